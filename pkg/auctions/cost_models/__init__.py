"""Production cost functions, conjugates and marginal-cost constructions."""
