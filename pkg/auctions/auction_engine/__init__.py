"""The posted-pricing mechanism and its instance/trace formats."""
