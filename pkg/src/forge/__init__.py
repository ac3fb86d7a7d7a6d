"""Scenario-analysis engine for land-based GHG mitigation planning."""

__version__ = "0.1.0"
