"""Toroidal multipliers, periodic Besov norms and spectral solvers on T^n."""

__version__ = "0.1.0"
