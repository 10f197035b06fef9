"""Toolkit for illustrating and evaluating visual storylines built from social media."""

__version__ = "0.1.0"
