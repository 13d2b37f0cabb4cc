"""Exact limit densities of blow-up constructions and the closed-form lower bounds."""
