"""Spin-Dirac Selberg trace formula on explicit finite-area hyperbolic surfaces."""

__version__ = "0.1.0"
