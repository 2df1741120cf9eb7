"""Geometric side of the spin Selberg trace formula and the analyses built on it.

The spectral side Σ_j u(ξ_j) is never computed directly: the geometric side
defines it, and agreement between test-function families is the check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError, HypothesisViolation, NumericalError
from .numerics import AsymptoticCoefficients, QuadratureSpec, _quad, integrate_even_decaying, xi_coth
from .parallel import ordered_map
from .spin import SpinStructure, epsilon_from_record, is_nontrivial_at_cusps
from .surfaces import LengthSpectrum, SurfacePresentation
from .testfn import TestFunctionPair, heat_pair

LOG2 = math.log(2)


class DivergenceWarning(RuntimeWarning):
    """Pinching sum with ε = +1 at tiny l: grows like 1/l."""


@dataclass(frozen=True)
class GeometricSide:
    identity_term: complex | float
    hyperbolic_term: complex | float
    cusp_term: complex | float
    total: complex | float
    hyperbolic_tail_bound: float
    quadrature_err: float


def _identity_integral(pair: TestFunctionPair,
                       spec: QuadratureSpec | None) -> tuple[complex | float, float]:
    """∫ ξ·coth(πξ)·u(ξ) dξ and its error bound."""
    if spec is None:
        spec = QuadratureSpec(cutoff=pair.u_cutoff)
    tail = pair.u_tail(spec.cutoff) if pair.u_tail is not None else None

    def part(take):
        return integrate_even_decaying(lambda x: take(complex(pair.u(x))) * xi_coth(x), spec, tail)

    re, err = part(lambda z: z.real)
    if not pair.is_complex:
        return re, err
    im, err_im = part(lambda z: z.imag)
    return complex(re, im), err + err_im


def identity_term(area: float, pair: TestFunctionPair, spec: QuadratureSpec | None = None):
    """area/(4π) · ∫ ξ u(ξ) coth(πξ) dξ."""
    value, _ = _identity_integral(pair, spec)
    return area / (4 * math.pi) * value


def cusp_term(k: int, pair: TestFunctionPair):
    """−k·log2·v(0)."""
    if k < 0:
        raise DomainError("cusp count must be nonnegative")
    v0 = complex(pair.v(0.0))
    value = -k * LOG2 * v0
    return value if pair.is_complex else value.real


def default_n_max(l: float, decay_rate: float) -> int:
    """Smallest n with n·l ≥ 60/(1/2 + decay_rate)."""
    return max(1, math.ceil(60 / ((0.5 + decay_rate) * l)))


def _class_series(l: float, eps: int, pair: TestFunctionPair, n_max: int) -> complex:
    n = np.arange(1, n_max + 1, dtype=float)
    x = n * l
    vals = np.asarray(pair.v(x), dtype=complex)
    # l/(2 sinh(x/2)) = l·e^{−x/2}/(1 − e^{−x})
    weight = l * np.exp(-x / 2) / -np.expm1(-x)
    terms = (float(eps) ** n) * weight * vals
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _unseen_tail(spectrum: LengthSpectrum, pair: TestFunctionPair, R: float) -> float:
    """Bound on Σ over (class, n) with n·l > R, via L(r) ≤ C e^r.

    With G(r) = r·env(r)/(2 sinh(r/2)) nonincreasing, Stieltjes integration by
    parts gives Σ G ≤ C·f·[e^R G(R) + ∫_R^∞ e^r G(r) dr]; the factor f covers
    the proper powers.
    """
    C = spectrum.tail_constant
    if not math.isfinite(R):
        return 0.0

    def G(r: float) -> float:
        return r * pair.bound(r) * math.exp(-r / 2) / -math.expm1(-r)

    prim = spectrum.primitive_records()
    l_min = prim[0].length if prim else R
    r_peak = max(R, 2.0)
    powers = 1 + (r_peak / l_min) * math.exp(-r_peak / 2)
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-8, max_subdivisions=500)
    def weighted(r: float) -> float:
        b = pair.bound(r)
        if b <= 0:
            return 0.0
        # e^r G(r) assembled in log space: e^r alone overflows long before G underflows
        return r * math.exp(math.log(b) + r / 2) / -math.expm1(-r)

    integral, err = _quad(weighted, R, math.inf, spec)
    return C * powers * (math.exp(R) * G(R) + integral + err)


def _power_tail(l: float, pair: TestFunctionPair, n_max: int) -> float:
    """Σ_{n>n_max} of the certificate bound for one class of length l."""
    q = 1 + pair.decay_rate
    return (l * pair.c * math.exp(-q * (n_max + 1) * l)
            / (-math.expm1(-l) * -math.expm1(-q * l)))


def hyperbolic_term(spectrum: LengthSpectrum, spin: SpinStructure, pair: TestFunctionPair,
                    n_max: int | None = None) -> tuple[complex | float, float]:
    """Σ over oriented primitive classes Σ_{n ≤ n_max} l εⁿ v(nl)/(2 sinh(nl/2)).

    Returns (value, tail_bound). The tail covers classes beyond the
    spectrum's certified range and the n > n_max remainder.
    """
    if not pair.decay_rate > 0 or not pair.c > 0:
        raise DomainError("test pair lacks a decay certificate")
    records = spectrum.primitive_records(spectrum.r_max)
    total_re: list[float] = []
    total_im: list[float] = []
    power_tail = 0.0
    for rec in records:
        eps = epsilon_from_record(spin, rec.representative, rec.trace)
        n = n_max if n_max is not None else default_n_max(rec.length, pair.decay_rate)
        z = _class_series(rec.length, eps, pair, n)
        total_re.append(z.real)
        total_im.append(z.imag)
        power_tail += _power_tail(rec.length, pair, n)
    R = min(spectrum.complete_up_to, spectrum.r_max)
    tail = _unseen_tail(spectrum, pair, R) + power_tail
    value = complex(math.fsum(total_re), math.fsum(total_im))
    return (value if pair.is_complex else value.real), tail


def _check_hypothesis(surface: SurfacePresentation, spin: SpinStructure) -> None:
    spin.validate(surface)
    if not is_nontrivial_at_cusps(spin, surface):
        raise HypothesisViolation(
            f"spin structure {spin} is trivial at a cusp; the trace formula needs ε = −1 "
            "on every primitive parabolic class")


def geometric_side(surface: SurfacePresentation, spin: SpinStructure, pair: TestFunctionPair,
                   spectrum: LengthSpectrum, spec: QuadratureSpec | None = None,
                   n_max: int | None = None) -> GeometricSide:
    _check_hypothesis(surface, spin)
    ident, qerr = _identity_integral(pair, spec)
    ident = surface.area / (4 * math.pi) * ident
    qerr = surface.area / (4 * math.pi) * qerr
    hyp, tail = hyperbolic_term(spectrum, spin, pair, n_max)
    cusp = cusp_term(surface.cusp_count, pair)
    return GeometricSide(ident, hyp, cusp, ident + hyp + cusp, tail, qerr)


def heat_trace_detail(surface, spin, spectrum, T: float,
                      spec: QuadratureSpec | None = None) -> GeometricSide:
    return geometric_side(surface, spin, heat_pair(T), spectrum, spec)


def heat_trace(surface: SurfacePresentation, spin: SpinStructure, spectrum: LengthSpectrum,
               T: float) -> float:
    """Σ_j e^{−Tλ_j}, computed from the geometric side of the heat pair."""
    return float(heat_trace_detail(surface, spin, spectrum, T).total)


def asymptotic_coefficient(m: int, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """a_m = ((−1)^m/m!)·∫ ξ^{2m}(ξ coth πξ − |ξ|) dξ, with its quadrature error."""
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13, cutoff=40.0 + 4 * m)

    def excess(x: float) -> float:
        # ξ coth πξ − ξ = 2ξ/(e^{2πξ} − 1)
        x = abs(x)
        base = 1 / math.pi if x == 0 else 2 * x / math.expm1(2 * math.pi * x)
        return x ** (2 * m) * base

    tail = 4 * (spec.cutoff ** (2 * m + 1)) * math.exp(-2 * math.pi * spec.cutoff)
    value, err = integrate_even_decaying(excess, spec, tail_bound=tail)
    scale = (-1) ** m / math.factorial(m)
    return scale * value, abs(scale) * err


def heat_asymptotics(area: float, k: int, n_terms: int,
                     spec: QuadratureSpec | None = None) -> AsymptoticCoefficients:
    """Coefficients a_0..a_{n_terms} of the small-T heat expansion."""
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    coeffs = tuple(asymptotic_coefficient(m, spec)[0] for m in range(n_terms + 1))
    return AsymptoticCoefficients(coeffs, float(area), int(k))


@dataclass(frozen=True)
class SpectrumEstimate:
    """Nonnegative spectral measure fitted to heat-trace samples.

    ``eigenvalues``/``weights`` merge adjacent grid cells with positive
    weight; ``resolved`` lists the clusters whose weight exceeds the
    threshold. Every cluster contributes to spectral sums.
    """

    eigenvalues: tuple[float, ...]
    weights: tuple[float, ...]
    residual: float
    relative_residual: float
    resolved: tuple[tuple[float, float], ...]
    grid: tuple[float, ...] = field(repr=False, default=())
    grid_weights: tuple[float, ...] = field(repr=False, default=())
    xi_convention: str = "xi_j = +sqrt(lambda_j)"

    @property
    def xi(self) -> tuple[float, ...]:
        return tuple(math.sqrt(max(lam, 0.0)) for lam in self.eigenvalues)

    def spectral_sum(self, u) -> complex:
        """Σ_j w_j u(ξ_j)."""
        return sum(w * complex(u(x)) for x, w in zip(self.xi, self.weights))


def fit_exponential_sum(T_grid: Sequence[float], samples: Sequence[float],
                        lam_grid: Sequence[float], threshold: float = 0.05,
                        residual_bound: float = 1e-3) -> SpectrumEstimate:
    """Fit samples(T) ≈ Σ w_i e^{−T λ_i} with w ≥ 0 on a fixed λ grid.

    Rows are scaled by 1/|sample| so the fit is relative across the T range.
    """
    T = np.asarray(T_grid, dtype=float)
    h = np.asarray(samples, dtype=float)
    lam = np.asarray(sorted(lam_grid), dtype=float)
    if lam.size == 0:
        raise DomainError("empty eigenvalue grid")
    if T.size != h.size:
        raise DomainError("T grid and samples differ in length")
    if T.size < 2 * lam.size:
        raise DomainError("need at least twice as many T samples as grid eigenvalues")
    scale = 1 / np.maximum(np.abs(h), 1e-300)
    design = np.exp(-np.outer(T, lam)) * scale[:, None]
    w, _ = nnls(design, h * scale, maxiter=50 * lam.size)
    fitted = np.exp(-np.outer(T, lam)) @ w
    residual = float(np.max(np.abs(fitted - h)))
    rel = float(np.max(np.abs(fitted - h) * scale))
    if rel > residual_bound:
        raise NumericalError(f"exponential-sum fit residual {rel:.3g} exceeds {residual_bound:.3g}",
                             code="ill-conditioned-fit")
    clusters: list[tuple[float, float]] = []
    run_lam: list[float] = []
    run_w: list[float] = []
    for li, wi in list(zip(lam, w)) + [(math.nan, 0.0)]:
        if wi > 0:
            run_lam.append(li)
            run_w.append(wi)
        elif run_w:
            mass = math.fsum(run_w)
            clusters.append((math.fsum(a * b for a, b in zip(run_lam, run_w)) / mass, mass))
            run_lam, run_w = [], []
    resolved = tuple(c for c in clusters if c[1] >= threshold)
    return SpectrumEstimate(tuple(c[0] for c in clusters), tuple(c[1] for c in clusters),
                            residual, rel, resolved, tuple(lam.tolist()), tuple(w.tolist()))


def extract_spectrum(surface: SurfacePresentation, spin: SpinStructure,
                     spectrum: LengthSpectrum, T_grid: Sequence[float],
                     lam_grid: Sequence[float], threshold: float = 0.05,
                     residual_bound: float = 1e-3) -> SpectrumEstimate:
    """Recover a nonnegative spectral measure from geometric-side heat traces."""
    if len(lam_grid) == 0:
        raise DomainError("empty eigenvalue grid")
    samples = ordered_map(lambda t: heat_trace(surface, spin, spectrum, t), list(T_grid))
    return fit_exponential_sum(T_grid, samples, lam_grid, threshold, residual_bound)


def weyl_limit_check(surface, spin, spectrum, T_list: Sequence[float]) -> list[tuple[float, float]]:
    """(T, T·heat_trace(T)) along a decreasing T list; tends to area/(4π)."""
    Ts = [float(t) for t in T_list]
    if any(t <= 0 for t in Ts) or any(b >= a for a, b in zip(Ts, Ts[1:])):
        raise DomainError("T list must be positive and strictly decreasing")
    values = ordered_map(lambda t: t * heat_trace(surface, spin, spectrum, t), Ts)
    return list(zip(Ts, values))


def _pinch_f(pair: TestFunctionPair, x: np.ndarray) -> np.ndarray:
    """f(x) = x·v(2x)/sinh(x), with f(0) = v(0)."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    ratio = np.where(x == 0, 1.0, safe / np.sinh(safe))
    return ratio * np.asarray(pair.v(2 * x), dtype=complex)


def pinch_direct_sum(l: float, pair: TestFunctionPair, eps_sign: int, n_max: int) -> complex:
    """2·Σ_{n ≤ n_max} εⁿ l v(nl)/(2 sinh(nl/2)), summed term by term."""
    return 2 * _class_series(l, eps_sign, pair, n_max)


def pinch_paired_sum(l: float, pair: TestFunctionPair, j_max: int,
                     chunk: int = 1 << 20) -> complex:
    """Σ_{j ≤ j_max} [(f(jl) − f((2j−1)l/2))/(2j−1) − f(jl)/(2j(2j−1))].

    This regroups the alternating series (ε = −1) in consecutive pairs; the
    pinching term is twice this value.
    """
    parts_re: list[float] = []
    parts_im: list[float] = []
    for start in range(1, j_max + 1, chunk):
        j = np.arange(start, min(start + chunk, j_max + 1), dtype=float)
        f_even = _pinch_f(pair, j * l)
        f_odd = _pinch_f(pair, (2 * j - 1) * l / 2)
        odd = 2 * j - 1
        terms = (f_even - f_odd) / odd - f_even / (2 * j * odd)
        parts_re.append(math.fsum(terms.real))
        parts_im.append(math.fsum(terms.imag))
    return complex(math.fsum(parts_re), math.fsum(parts_im))


def pinch_geodesic_term(l: float, pair: TestFunctionPair, eps_sign: int,
                        n_max: int | None = None):
    """Contribution 2·Σ_n εⁿ l v(nl)/(2 sinh(nl/2)) of a geodesic of length l and its inverse.

    With ε = −1 the alternating series is summed in pairs, which keeps the
    cost O(1/l) and the rounding small; it tends to −2 log2 v(0) as l → 0.
    """
    if not l > 0:
        raise DomainError("l must be positive")
    if eps_sign not in (1, -1):
        raise DomainError("eps_sign must be +1 or -1")
    n = n_max if n_max is not None else default_n_max(l, pair.decay_rate)
    if eps_sign == 1:
        if l < 1e-3:
            warnings.warn(f"ε = +1 pinching sum at l = {l:g} diverges like 2v(0)·log(1/l); the "
                          "limit theorem requires ε = −1", DivergenceWarning, stacklevel=2)
        value = pinch_direct_sum(l, pair, 1, n)
    else:
        j_max = n // 2
        value = 2 * pinch_paired_sum(l, pair, j_max)
        if n % 2:
            last = complex(_pinch_f(pair, np.array([n * l / 2]))[0])
            value -= 2 * last / n
    return value if pair.is_complex else value.real


@dataclass(frozen=True)
class IsospectralVerdict:
    indistinguishable: bool
    verdict: str
    r_max: float
    witness: dict | None = None
    compared_classes: int = 0


def _marked_lengths(surface, spin, spectrum, r_max) -> list[tuple[float, int]]:
    marked = [(rec.length, epsilon_from_record(spin, rec.representative, rec.trace))
              for rec in spectrum.primitive_records(r_max)]
    # lengths equal up to rounding must sort by ε, not by their last bits
    return sorted(marked, key=lambda m: (round(m[0], 9), m[1]))


def isospectral_compare(surf_a, spin_a, spec_a, surf_b, spin_b, spec_b,
                        r_max: float, tol: float = 1e-8) -> IsospectralVerdict:
    """Compare area, cusp count and the ε-marked length spectra up to r_max."""
    for name, sp in (("first", spec_a), ("second", spec_b)):
        if sp.complete_up_to < r_max or sp.r_max < r_max:
            raise DomainError(f"{name} spectrum certified only to "
                              f"{min(sp.complete_up_to, sp.r_max):.6g} < {r_max}",
                              code="watermark")
    if abs(surf_a.area - surf_b.area) > 1e-12 * max(surf_a.area, 1):
        return IsospectralVerdict(False, "distinguishable", r_max,
                                  {"kind": "area", "a": surf_a.area, "b": surf_b.area})
    if surf_a.cusp_count != surf_b.cusp_count:
        return IsospectralVerdict(False, "distinguishable", r_max,
                                  {"kind": "cusps", "a": surf_a.cusp_count,
                                   "b": surf_b.cusp_count})
    # stay clear of r_max so rounding cannot put a class on different sides
    cut = r_max - 10 * tol
    a = _marked_lengths(surf_a, spin_a, spec_a, cut)
    b = _marked_lengths(surf_b, spin_b, spec_b, cut)
    for i, (x, y) in enumerate(zip(a, b)):
        if abs(x[0] - y[0]) > tol:
            return IsospectralVerdict(False, "distinguishable", r_max,
                                      {"kind": "length", "index": i, "a": list(x), "b": list(y)},
                                      i)
        if x[1] != y[1]:
            return IsospectralVerdict(False, "distinguishable", r_max,
                                      {"kind": "epsilon", "index": i, "a": list(x), "b": list(y)},
                                      i)
    if len(a) != len(b):
        i = min(len(a), len(b))
        extra = a[i] if len(a) > len(b) else b[i]
        return IsospectralVerdict(False, "distinguishable", r_max,
                                  {"kind": "count", "index": i, "a": len(a), "b": len(b),
                                   "unmatched": list(extra)}, i)
    return IsospectralVerdict(True, "indistinguishable up to r_max", r_max, None, len(a))
