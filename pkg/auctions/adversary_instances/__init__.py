"""Lower-bound instance families and seeded random instances."""
