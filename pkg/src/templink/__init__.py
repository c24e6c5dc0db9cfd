"""Temporal link prediction toolkit for the Game of Thrones kills network."""

__version__ = "0.1.0"
