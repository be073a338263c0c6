"""Offline optimum benchmarks."""
