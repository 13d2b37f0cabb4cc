"""Inducibility of 4-vertex oriented graphs: counting, constructions, limits, search and certificates."""
