"""Lie-Baecklund fields on jet bundles: prolongation, exponentiability checks and flows."""

__version__ = "0.1.0"
