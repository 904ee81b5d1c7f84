"""Matern Cardinal application package."""
