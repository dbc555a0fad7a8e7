"""Numerical verification of classical and A_n multilateral basic hypergeometric identities."""

__version__ = "0.1.0"
