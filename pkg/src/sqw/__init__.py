"""Staggered quantum walks on graphs: tessellations, Szegedy conversions,
search operators, hitting times and discriminant spectra."""

__version__ = "0.1.0"
