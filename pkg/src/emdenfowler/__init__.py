"""Singular Emden-Fowler initial value problems, shooting and isoparametric reductions."""

__version__ = "0.1.0"
