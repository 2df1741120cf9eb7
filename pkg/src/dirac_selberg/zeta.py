"""Selberg zeta function Z_ε: product, logarithmic derivative, continuation and pinching limits."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, HypothesisViolation, NumericalError
from .numerics import QuadratureSpec, _quad, dilog, xi_coth
from .parallel import ordered_map
from .spin import SpinStructure, epsilon, epsilon_from_record
from .surfaces import LengthSpectrum, PinchFamily, enumerate_length_spectrum

LOG2 = math.log(2)
POLE_GUARD = 1e-6


@dataclass(frozen=True)
class ZetaEvaluation:
    s: complex
    log_value: complex
    r_max: float
    m_max: int
    tail_bound: float

    @property
    def value(self) -> complex:
        return cmath.exp(self.log_value)


@dataclass(frozen=True)
class SpectralInput:
    """Spectral parameters ξ_j = √λ_j ≥ 0 with multiplicities."""

    xi: tuple[float, ...]
    weights: tuple[float, ...]
    source: str = "synthetic"

    def __post_init__(self):
        if len(self.xi) != len(self.weights):
            raise DomainError("xi and weights differ in length")
        if any(x < 0 for x in self.xi) or list(self.xi) != sorted(self.xi):
            raise DomainError("xi must be nonnegative and sorted")
        if any(w <= 0 for w in self.weights):
            raise DomainError("weights must be positive")
        if self.source not in ("extracted", "synthetic", "user"):
            raise DomainError(f"unknown spectral source {self.source!r}")
        if self.source == "user" and any(w < 1 or w != int(w) for w in self.weights):
            raise DomainError("user multiplicities must be positive integers")

    @classmethod
    def from_estimate(cls, estimate) -> "SpectralInput":
        pairs = sorted(zip(estimate.xi, estimate.weights))
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), "extracted")


def _check_region(s: complex, spectrum: LengthSpectrum, r_max: float) -> None:
    if not s.real > 1:
        raise DomainError(f"product and sum converge only for Re(s) > 1, got {s}")
    if spectrum.complete_up_to < r_max or spectrum.r_max < r_max:
        raise DomainError(f"spectrum certified to {min(spectrum.complete_up_to, spectrum.r_max):.6g}"
                          f" < r_max = {r_max}", code="watermark")


def _marked(spectrum: LengthSpectrum, spin: SpinStructure, r_max: float):
    return [(rec.length, epsilon_from_record(spin, rec.representative, rec.trace))
            for rec in spectrum.primitive_records(r_max)]


def _class_tail(spectrum: LengthSpectrum, sigma: float, R: float) -> float:
    """Bound on Σ_{classes, l > R} Σ_m |log(1 − εe^{−l(s+m)})| ≤ Σ 2e^{−lσ}/(1 − e^{−l})."""
    C = spectrum.tail_constant
    damp = -math.expm1(-R)
    return C * (2 * math.exp(-R * (sigma - 1)) / damp
                + 2 * math.exp(-R * (sigma - 1)) / ((sigma - 1) * damp))


def zeta(spectrum: LengthSpectrum, spin: SpinStructure, s: complex, r_max: float,
         m_max: int = 40) -> ZetaEvaluation:
    """log Z(s) = Σ_{[μ], l ≤ r_max} Σ_{m ≤ m_max} log(1 − ε(μ) e^{−l(s+m)})."""
    s = complex(s)
    _check_region(s, spectrum, r_max)
    m = np.arange(m_max + 1, dtype=float)
    re: list[float] = []
    im: list[float] = []
    m_tail = 0.0
    for l, eps in _marked(spectrum, spin, r_max):
        z = -eps * np.exp(-l * (s + m))
        logs = np.log1p(z)
        re.append(math.fsum(logs.real))
        im.append(math.fsum(logs.imag))
        m_tail += 2 * math.exp(-l * (s.real + m_max + 1)) / -math.expm1(-l)
    tail = m_tail + _class_tail(spectrum, s.real, r_max)
    return ZetaEvaluation(s, complex(math.fsum(re), math.fsum(im)), float(r_max), m_max, tail)


def log_deriv_sum(spectrum: LengthSpectrum, spin: SpinStructure, s: complex, r_max: float,
                  n_max: int | None = None) -> complex:
    """Z′/Z(s) = Σ_{[μ]} Σ_n l εⁿ e^{−nl(s−½)}/(2 sinh(nl/2))."""
    s = complex(s)
    _check_region(s, spectrum, r_max)
    re: list[float] = []
    im: list[float] = []
    for l, eps in _marked(spectrum, spin, r_max):
        N = n_max if n_max is not None else max(1, math.ceil(60 / ((s.real - 0.5) * l)))
        n = np.arange(1, N + 1, dtype=float)
        # e^{−nl(s−½)}/(2 sinh(nl/2)) = e^{−nls}/(1 − e^{−nl})
        terms = l * (float(eps) ** n) * np.exp(-n * l * s) / -np.expm1(-n * l)
        re.append(math.fsum(terms.real))
        im.append(math.fsum(terms.imag))
    return complex(math.fsum(re), math.fsum(im))


def _pole_guard(s: complex, spectral: SpectralInput) -> None:
    a = s - 0.5
    for x in spectral.xi:
        if min(abs(a - 1j * x), abs(a + 1j * x)) <= POLE_GUARD:
            raise DomainError(f"s = {s} is within {POLE_GUARD} of the spectral pole 1/2 ± {x}i",
                              code="pole-proximity")
    if a.real < 0:
        n = round(-a.real)
        if n >= 1 and abs(a + n) <= POLE_GUARD:
            raise DomainError(f"s = {s} is within {POLE_GUARD} of the trivial pole 1/2 − {n}",
                              code="pole-proximity")


def _digamma_difference_series(a: complex, b: complex, n_terms: int = 200) -> complex:
    """Σ_{n≥1} (1/(n+b) − 1/(n+a)), summed directly with an Euler–Maclaurin tail."""
    n = np.arange(1, n_terms + 1, dtype=float)
    head = np.sum(1 / (n + b) - 1 / (n + a))
    x = n_terms + 1.0

    def f(k):
        # k-th derivative of 1/(x+b) − 1/(x+a) at x
        sign = (-1) ** k * math.factorial(k)
        return sign * (1 / (x + b) ** (k + 1) - 1 / (x + a) ** (k + 1))

    integral = cmath.log((x + a) / (x + b))
    tail = integral + f(0) / 2 - f(1) / 12 + f(3) / 720 - f(5) / 30240
    return complex(head + tail)


def identity_contribution_series(s: complex, s0: complex, area: float) -> complex:
    """−(area/4π)∫ξ coth(πξ)[(2s−1)/(ξ²+(s−½)²) − (2s−1)/(ξ²+(s0−½)²)]dξ in series form.

    (area/2π)[(2s−1)/(2s0−1) − 1 + Σ_n ((2s−1)/(s0−½+n) − (2s−1)/(s−½+n))];
    valid for all s away from the poles 1/2 − n.
    """
    a, b = s - 0.5, s0 - 0.5
    ratio = (2 * s - 1) / (2 * s0 - 1)
    return area / (2 * math.pi) * (ratio - 1 + (2 * s - 1) * _digamma_difference_series(a, b))


def identity_contribution_integral(s: complex, s0: complex, area: float,
                                   spec: QuadratureSpec | None = None) -> complex:
    """The same term by quadrature; equals the series only for Re(s) > 1/2."""
    if not (s.real > 0.5 and s0.real > 0.5):
        raise DomainError("the integral form represents the continuation only for Re(s) > 1/2")
    a2, b2 = (s - 0.5) ** 2, (s0 - 0.5) ** 2
    k = 2 * s - 1
    spec = spec or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12, max_subdivisions=2000,
                                  cutoff=max(60.0, 4 * abs((s - 0.5).imag)))
    # resolve the near-pole bump at ξ ≈ Im(s − 1/2) when Re(s − 1/2) is small
    points = sorted({abs((s - 0.5).imag), abs((s0 - 0.5).imag)} - {0.0}) or None
    if points is not None:
        points = [p for p in points if p < spec.cutoff] or None

    def g(x: float, part) -> float:
        val = k * (1 / (x * x + a2) - 1 / (x * x + b2)) * xi_coth(x)
        return part(val)

    total = 0j
    for part, unit in ((lambda z: z.real, 1), (lambda z: z.imag, 1j)):
        body, _ = _quad(lambda x: g(x, part), 0.0, spec.cutoff, spec, points=points)
        tail, _ = _quad(lambda x: g(x, part), spec.cutoff, math.inf, spec)
        total += unit * 2 * (body + tail)
    return -area / (4 * math.pi) * total


def log_deriv_continuation(s: complex, s0: complex, spectral: SpectralInput, area: float,
                           k: int, anchor_value: complex, cross_check: bool = True,
                           tol: float = 1e-6) -> complex:
    """Z′/Z(s) continued from the anchor value Z′/Z(s0), Re(s0) > 1.

    anchor·(2s−1)/(2s0−1) + (2s−1)Σ_j w_j[1/(ξ_j²+(s−½)²) − 1/(ξ_j²+(s0−½)²)]
    + identity contribution + k·log2·(1 − (2s−1)/(2s0−1)).
    Where Re(s) > 1/2 the identity contribution is computed both as a series
    and by quadrature, and the two must agree within ``tol``.
    """
    s, s0 = complex(s), complex(s0)
    if not s0.real > 1:
        raise DomainError("anchor point needs Re(s0) > 1")
    _pole_guard(s, spectral)
    a2, b2 = (s - 0.5) ** 2, (s0 - 0.5) ** 2
    ratio = (2 * s - 1) / (2 * s0 - 1)
    spec_re: list[complex] = [w * (1 / (x * x + a2) - 1 / (x * x + b2))
                              for x, w in zip(spectral.xi, spectral.weights)]
    spectral_term = (2 * s - 1) * complex(math.fsum(z.real for z in spec_re),
                                          math.fsum(z.imag for z in spec_re))
    ident = identity_contribution_series(s, s0, area)
    if cross_check and s.real > 0.5:
        via_quad = identity_contribution_integral(s, s0, area)
        if abs(via_quad - ident) > tol * max(1.0, abs(ident)):
            raise NumericalError(f"identity term: series {ident} vs quadrature {via_quad}",
                                 code="cross-check-failure")
    return anchor_value * ratio + spectral_term + ident + k * LOG2 * (1 - ratio)


@dataclass(frozen=True)
class Anchor:
    s0: complex
    value: complex


def functional_equation_residual(s: complex, spectral: SpectralInput, area: float, k: int,
                                 anchor: Anchor) -> complex:
    """Z′/Z(s) + Z′/Z(1−s) − area·(s−½)·tan(πs) − 2k·log2, both sides continued from one anchor."""
    s = complex(s)
    c = cmath.cos(math.pi * s)
    if abs(c) <= POLE_GUARD:
        raise DomainError(f"tan(πs) has a pole at s = {s}", code="pole-proximity")
    left = log_deriv_continuation(s, anchor.s0, spectral, area, k, anchor.value)
    right = log_deriv_continuation(1 - s, anchor.s0, spectral, area, k, anchor.value)
    return left + right - area * (s - 0.5) * cmath.tan(math.pi * s) - 2 * k * LOG2


def contour_residue(fn, center: complex, radius: float = 0.05, points: int = 64) -> complex:
    """(1/2πi)∮ fn on a circle by the trapezoid rule."""
    theta = 2 * math.pi * np.arange(points) / points
    zs = center + radius * np.exp(1j * theta)
    vals = np.array([fn(complex(z)) for z in zs])
    # dz = i r e^{iθ} dθ, so (1/2πi)∮ f dz = mean(f · r e^{iθ})
    return complex(np.mean(vals * radius * np.exp(1j * theta)))


def default_eta_m_max(l: float) -> int:
    return max(1, math.ceil(50 / l))


def log_zeta_eta_factor(s: complex, l: float, m_max: int | None = None) -> tuple[complex, float]:
    """log Π_{m ≤ m_max}(1 + e^{−(s+m)l})² and a bound on the omitted factors."""
    if not l > 0:
        raise DomainError("l must be positive")
    s = complex(s)
    M = m_max if m_max is not None else default_eta_m_max(l)
    re: list[float] = []
    im: list[float] = []
    for start in range(0, M + 1, 1 << 20):
        m = np.arange(start, min(start + (1 << 20), M + 1), dtype=float)
        logs = np.log1p(np.exp(-(s + m) * l))
        re.append(math.fsum(logs.real))
        im.append(math.fsum(logs.imag))
    tail = 4 * math.exp(-(s.real + M + 1) * l) / -math.expm1(-l)
    return 2 * complex(math.fsum(re), math.fsum(im)), tail


def zeta_eta_factor(s: complex, l: float, m_max: int | None = None) -> complex:
    """Zeta factor Π_m(1 + e^{−(s+m)l})² of one geodesic and its inverse with ε = −1."""
    return cmath.exp(log_zeta_eta_factor(s, l, m_max)[0])


def zeta_eta_dilog_model(s: float, l: float) -> float:
    """−(2/l)·Li₂(−e^{−sl}) + log(1 + e^{−sl}): leading terms of the log factor."""
    x = math.exp(-s * l)
    return -(2 / l) * dilog(-x) + math.log1p(x)


def zeta_eta_rescaled_limit(s: complex, l_list: Sequence[float]) -> list[complex]:
    """Z_η(s, l)·e^{−π²/(6l)} per l, evaluated in log space; tends to 2^{1−2s}."""
    out = []
    for l in l_list:
        log_val, _ = log_zeta_eta_factor(s, float(l))
        out.append(cmath.exp(log_val - math.pi**2 / (6 * l)))
    return out


@dataclass(frozen=True)
class PinchStabilization:
    l_values: tuple[float, ...]
    W: tuple[complex, ...]
    differences: tuple[float, ...]
    eta_rescaled: tuple[complex, ...]
    stabilizing: bool


def pinch_zeta_stabilization(family: PinchFamily, spins: Sequence[SpinStructure] | SpinStructure,
                             s: complex, r_max: float, word_cap: int = 12,
                             m_max: int = 60) -> PinchStabilization:
    """W_t(s) = Z(s, g_t)·exp(−Σ_j π²/(6 l_t(η_j))) along a pinching family.

    Stabilization means the successive differences |W_{t_{i+1}} − W_{t_i}|
    decrease.
    """
    s = complex(s)
    if isinstance(spins, SpinStructure):
        spins = [spins] * len(family.surfaces)
    if len(spins) != len(family.surfaces):
        raise DomainError("need one spin structure per family member")
    for surf, spin in zip(family.surfaces, spins):
        spin.validate(surf)
        for w in family.pinched_classes:
            if epsilon(spin, w, surf) != -1:
                raise HypothesisViolation(f"ε({w}) = +1 for spin {spin}; pinched classes need ε = −1")

    def member(i: int) -> tuple[complex, complex]:
        surf, spin = family.surfaces[i], spins[i]
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        ev = zeta(spectrum, spin, s, r_max, m_max)
        pinched = sum(math.pi**2 / (6 * l) for l in family.pinched_lengths[i])
        # the pinched classes themselves enter the product with m ≤ m_max only;
        # replace that truncated part by the fully converged factor
        log_w = ev.log_value - pinched
        for l in family.pinched_lengths[i]:
            truncated = 2 * complex(np.sum(np.log1p(np.exp(-(s + np.arange(m_max + 1)) * l))))
            log_w += log_zeta_eta_factor(s, l)[0] - truncated
        eta = cmath.exp(sum(log_zeta_eta_factor(s, l)[0] for l in family.pinched_lengths[i])
                        - pinched)
        return cmath.exp(log_w), eta

    results = ordered_map(member, range(len(family.surfaces)))
    W = tuple(r[0] for r in results)
    diffs = tuple(abs(b - a) for a, b in zip(W, W[1:]))
    stabilizing = all(b < a for a, b in zip(diffs, diffs[1:]))
    return PinchStabilization(tuple(l[0] for l in family.pinched_lengths), W, diffs,
                              tuple(r[1] for r in results), stabilizing)
