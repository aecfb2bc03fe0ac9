"""Paraxial beam modes mapped to exact single-particle scalar-field states."""

__version__ = "0.1.0"
