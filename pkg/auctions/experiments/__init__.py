"""Experiment sweeps and report emission."""
