"""Special functions and quadrature primitives.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError

_TAYLOR_RADIUS = 1e-4


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for ``integrate_even_decaying``.

    ``cutoff`` is the radius where the integral is split into a body
    (adaptive quadrature on ``[0, cutoff]``) and a tail.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_subdivisions: int = 2000
    cutoff: float = 40.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.cutoff > 0):
            raise DomainError("QuadratureSpec requires positive tolerances and cutoff")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def refined(self, factor: float = 100.0) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol / factor, self.rel_tol / factor,
                              2 * self.max_subdivisions, 2 * self.cutoff)


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Small-T heat expansion coefficients a_0..a_n for a surface of given area and cusp count."""

    a: tuple[float, ...]
    area: float
    k: int

    def model(self, T: float) -> float:
        """area/(4πT) − k·log2/√(4πT) + (area/4π)·Σ a_m T^m."""
        series = sum(c * T**m for m, c in enumerate(self.a))
        return (self.area / (4 * math.pi * T)
                - self.k * math.log(2) / math.sqrt(4 * math.pi * T)
                + self.area / (4 * math.pi) * series)


def xi_coth(xi):
    """ξ·coth(πξ), with the removable singularity at 0 filled in (value 1/π).

    Accepts scalars or numpy arrays.
    """
    x = np.asarray(xi, dtype=float)
    small = np.abs(x) < _TAYLOR_RADIUS
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1 / np.pi + np.pi * x * x / 3, safe / np.tanh(np.pi * safe))
    return float(out) if out.ndim == 0 else out


def _dilog_series(x: float) -> float:
    # |x| <= 1/2, so 60 terms reach well below 1e-17
    total, power = 0.0, 1.0
    for n in range(1, 80):
        power *= x
        term = power / (n * n)
        total += term
        if abs(term) < 1e-18:
            break
    return total


def dilog(x: float) -> float:
    """Real dilogarithm Li₂(x) for x ≤ 1."""
    x = float(x)
    if not math.isfinite(x) or x > 1:
        raise DomainError(f"dilog is real only for x <= 1, got {x}")
    if x == 1.0:
        return math.pi**2 / 6
    if abs(x) <= 0.5:
        return _dilog_series(x)
    if x > 0.5:
        # reflection: Li2(x) + Li2(1-x) = π²/6 − log(x)log(1−x)
        return math.pi**2 / 6 - math.log(x) * math.log1p(-x) - _dilog_series(1 - x)
    if x >= -1:
        # Landen: Li2(x) = −Li2(x/(x−1)) − log²(1−x)/2, maps [−1, −1/2] into [1/3, 1/2]
        return -_dilog_series(x / (x - 1)) - 0.5 * math.log1p(-x) ** 2
    # inversion for x < −1
    return -math.pi**2 / 6 - 0.5 * math.log(-x) ** 2 - dilog(1 / x)


def tanh_partial_sum(z: float, N: int) -> float:
    """Partial sum of the partial-fraction series for tanh(πz).

    (1/(iπ))Σ_{m<N}[1/(½+m−iz) − 1/(½+m+iz)] paired into the real form
    (2z/π)Σ_{m<N} 1/((m+½)² + z²). Error is O(1/N).
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    m = np.arange(N, dtype=float) + 0.5
    # sum smallest terms first to limit rounding
    terms = 1.0 / (m * m + z * z)
    return float(2 * z / math.pi * math.fsum(terms[::-1]))


def _quad(f: Callable[[float], float], lo: float, hi: float, spec: QuadratureSpec,
          points=None) -> tuple[float, float]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                  limit=spec.max_subdivisions, points=points)
    for w in caught:
        msg = str(w.message)
        # roundoff means the tolerance is below attainable precision; the
        # estimate is still returned and reported through err
        if "roundoff" not in msg:
            raise NumericalError(f"quadrature did not converge on [{lo}, {hi}]: {msg}")
    return val, err


def integrate_even_decaying(f: Callable[[float], float], spec: QuadratureSpec | None = None,
                            tail_bound: float | None = None,
                            points=None) -> tuple[float, float]:
    """Integrate an even function over the real line.

    Computes 2∫₀^cutoff f by adaptive quadrature. If ``tail_bound`` is given
    it must bound ∫_{|ξ|>cutoff} |f|, and the tail is dropped and folded into
    the error. Otherwise the tail is integrated numerically to infinity.

    Returns
    -------
    value, err_bound
    """
    spec = spec or QuadratureSpec()
    body, err = _quad(f, 0.0, spec.cutoff, spec, points=points)
    if tail_bound is None:
        tail, tail_err = _quad(f, spec.cutoff, math.inf, spec)
        return 2 * (body + tail), 2 * (err + tail_err)
    if tail_bound < 0:
        raise DomainError("tail_bound must be nonnegative")
    return 2 * body, 2 * err + tail_bound
