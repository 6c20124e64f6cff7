"""Exact and numerical toolkit for the crystallized quantum group C(SU_0(n+1))."""
__version__ = "0.1.0"
