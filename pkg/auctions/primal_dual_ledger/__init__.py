"""Primal/dual objective bookkeeping along mechanism traces."""
