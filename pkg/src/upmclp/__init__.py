"""Upgrading maximal covering location: formulations, preprocessing, exact oracle."""
__version__ = "0.1.0"
