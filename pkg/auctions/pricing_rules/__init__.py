"""Pricing functions, differential-equation checks and competitive-ratio estimates."""
