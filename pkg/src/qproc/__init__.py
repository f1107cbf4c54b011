"""Exact analytics and simulation of the Quicksort-on-the-fly running-time process."""

__version__ = "0.1.0"
