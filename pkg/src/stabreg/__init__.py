"""Exact stable regularity toolkit for finite measured hypergraphs."""

__version__ = "0.1.0"
