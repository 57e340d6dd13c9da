"""Numerical toolkit for travelling wavefronts of the scalar nonlocal
Kolmogorov ecological equation u_t = u_xx + u*G(K*u)."""

__version__ = "0.1.0"
