"""Admissible test-function pairs (v, u = v̂) for the trace formula."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError
from .numerics import QuadratureSpec, _quad

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestFunctionPair:
    """An even function v with its Fourier transform u(ξ) = ∫ v(t) e^{−iξt} dt.

    Decay certificate: |v(x)| ≤ c·e^{−|x|(1/2 + decay_rate)} for all x.
    ``envelope(x)`` is a nonincreasing bound for |v| on [x, ∞), usually much
    tighter than the certificate; tail bounds use it when present.
    ``u_tail(X)`` optionally bounds ∫_{|ξ|>X} |ξ·coth(πξ)·u(ξ)| dξ.
    """

    __test__ = False  # not a pytest class

    v: ArrayFn
    u: ArrayFn
    decay_rate: float
    c: float
    moment_exponent: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    envelope: Callable[[float], float] | None = None
    u_tail: Callable[[float], float] | None = None
    u_cutoff: float = 40.0
    is_complex: bool = False
    support: float | None = None

    def bound(self, x: float) -> float:
        if self.envelope is not None:
            return self.envelope(abs(x))
        return self.c * math.exp(-abs(x) * (0.5 + self.decay_rate))

    def __add__(self, other: "TestFunctionPair") -> "TestFunctionPair":
        f, g = self, other
        env = tail = None
        if f.envelope is not None and g.envelope is not None:
            env = lambda x: f.envelope(x) + g.envelope(x)  # noqa: E731
        if f.u_tail is not None and g.u_tail is not None:
            tail = lambda x: f.u_tail(x) + g.u_tail(x)  # noqa: E731
        support = None
        if f.support is not None and g.support is not None:
            support = max(f.support, g.support)
        return TestFunctionPair(
            v=lambda x: f.v(x) + g.v(x), u=lambda xi: f.u(xi) + g.u(xi),
            decay_rate=min(f.decay_rate, g.decay_rate), c=f.c + g.c,
            moment_exponent=min(f.moment_exponent, g.moment_exponent),
            name=f"({f.name})+({g.name})", params={"left": f.params, "right": g.params},
            envelope=env, u_tail=tail, u_cutoff=max(f.u_cutoff, g.u_cutoff),
            is_complex=f.is_complex or g.is_complex, support=support)


@dataclass(frozen=True)
class HeatFamily:
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f"heat parameter T must be positive, got {self.T}")


@dataclass(frozen=True)
class ResolventFamily:
    s: complex
    s0: complex

    def __post_init__(self):
        if not (self.s.real > 1 and self.s0.real > 1):
            raise DomainError("resolvent family needs Re(s) > 1 and Re(s0) > 1")


def heat_pair(T: float) -> TestFunctionPair:
    """v(x) = e^{−x²/4T}/√(4πT), u(ξ) = e^{−Tξ²}."""
    T = HeatFamily(float(T)).T
    norm = 1 / math.sqrt(4 * math.pi * T)

    def v(x):
        x = np.asarray(x, dtype=float)
        return norm * np.exp(-x * x / (4 * T))

    def u(xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-T * xi * xi)

    def envelope(x):
        return norm * math.exp(-x * x / (4 * T))

    def u_tail(X):
        # ∫_{|ξ|>X} ξ coth(πξ) e^{−Tξ²} ≤ 2 coth(πX) e^{−TX²}/(2T)
        return math.exp(-T * X * X) / (T * math.tanh(math.pi * X))

    # tail below 1e-16 relative to 1/T
    cutoff = math.sqrt(40 / T)
    rate = 1.0
    c = norm * math.exp(T * (0.5 + rate) ** 2)
    return TestFunctionPair(v, u, rate, c, 1.0, "heat", {"T": T}, envelope, u_tail, cutoff)


def resolvent_pair(s: complex, s0: complex) -> TestFunctionPair:
    """Difference of two resolvent kernels.

    v(t) = e^{−|t|(s−½)}/(2s−1) − e^{−|t|(s0−½)}/(2s0−1),
    u(ξ) = 1/(ξ² + (s−½)²) − 1/(ξ² + (s0−½)²).
    """
    fam = ResolventFamily(complex(s), complex(s0))
    s, s0 = fam.s, fam.s0
    a, b = s - 0.5, s0 - 0.5

    def v(x):
        x = np.abs(np.asarray(x, dtype=float))
        return np.exp(-x * a) / (2 * a) - np.exp(-x * b) / (2 * b)

    def u(xi):
        xi = np.asarray(xi, dtype=float)
        # combined form: the plain difference cancels for ξ ≫ |s|
        x2 = xi * xi
        return (b * b - a * a) / ((x2 + a * a) * (x2 + b * b))

    def envelope(x):
        return math.exp(-x * a.real) / abs(2 * a) + math.exp(-x * b.real) / abs(2 * b)

    rate = min(s.real, s0.real) - 1
    c = 1 / abs(2 * a) + 1 / abs(2 * b)
    return TestFunctionPair(v, u, rate, c, 0.5, "resolvent", {"s": s, "s0": s0}, envelope,
                            None, 40.0, is_complex=bool(a.imag or b.imag))


def _gauss_legendre(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = (hi - lo) / 2
    return lo + half * (x + 1), half * w


def pair_from_phi(phi: Callable[[float], float], support_radius: float,
                  spec: QuadratureSpec | None = None, nodes: int = 64,
                  max_nodes: int = 4096, xi_max: float = 800.0) -> TestFunctionPair:
    """Pair built from φ through a(t) = φ(t)/√(t+4) and

        v(t) = 4cosh(t/2) ∫₀^∞ a(4sinh²(t/2) + y²) dy,   u = v̂.

    v vanishes for |t| > 2·asinh(√R/2). It is tabulated on Gauss–Legendre
    nodes of that interval; the node count doubles until u(0) and the
    transform at the highest resolved frequency agree to the requested
    tolerance up to frequency ``xi_max``. u is then the Gauss–Legendre
    cosine sum, and ``xi_max`` is the quadrature cutoff for u.
    """
    R = float(support_radius)
    if not R > 0:
        raise DomainError("support radius must be positive")
    spec = spec or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)
    t_max = 2 * math.asinh(math.sqrt(R) / 2)

    def a(w: float) -> float:
        return phi(w) / math.sqrt(w + 4)

    def v_scalar(t: float) -> float:
        q = 4 * math.sinh(t / 2) ** 2
        if q >= R:
            return 0.0
        inner, _ = _quad(lambda y: a(q + y * y), 0.0, math.sqrt(R - q), spec)
        return 4 * math.cosh(t / 2) * inner

    def table(n):
        t, w = _gauss_legendre(n, 0.0, t_max)
        return t, w, np.array([v_scalar(ti) for ti in t])

    def transform(t, w, vals, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return 2 * (np.cos(np.outer(xi, t)) * (w * vals)).sum(axis=1)

    probe = np.linspace(0.0, xi_max, 41)
    t, w, vals = table(nodes)
    while True:
        t2, w2, vals2 = table(2 * nodes)
        diff = np.max(np.abs(transform(t, w, vals, probe) - transform(t2, w2, vals2, probe)))
        t, w, vals, nodes = t2, w2, vals2, 2 * nodes
        if diff < 100 * spec.abs_tol * max(1.0, abs(vals).max()):
            break
        if nodes >= max_nodes:
            raise NumericalError(f"transform of v did not settle (last change {diff:.3g})")

    weighted = w * vals
    vmax = float(np.abs(vals).max()) if len(vals) else 0.0

    def v(x):
        x = np.abs(np.asarray(x, dtype=float))
        out = np.vectorize(v_scalar, otypes=[float])(x)
        return out

    def u(xi):
        xi = np.asarray(xi, dtype=float)
        out = 2 * (np.cos(np.multiply.outer(xi, t)) * weighted).sum(axis=-1)
        return out

    def envelope(x):
        return vmax if x <= t_max else 0.0

    # compact support: any decay rate works; pick one with an honest constant
    rate = 1.0
    c = vmax * math.exp(t_max * (0.5 + rate))
    return TestFunctionPair(v, u, rate, c, 1.0, "phi", {"support_radius": R}, envelope,
                            None, xi_max, support=t_max)


@dataclass(frozen=True)
class AdmissibilityReport:
    passed: bool
    witness: tuple[float, float, float] | None  # (x, |v(x)|, certificate bound)
    moment_integral: float
    message: str = ""


def check_admissible(pair: TestFunctionPair, x_max: float = 50.0,
                     samples: int = 2001) -> AdmissibilityReport:
    """Sample the decay certificate on [0, x_max] and integrate |ξ^{2+ε′}u|."""
    xs = np.linspace(0.0, x_max, samples)
    vs = np.abs(np.asarray(pair.v(xs), dtype=complex))
    bounds = pair.c * np.exp(-xs * (0.5 + pair.decay_rate))
    bad = np.nonzero(vs > bounds * (1 + 1e-9) + 1e-300)[0]
    witness = None
    if pair.decay_rate <= 0:
        return AdmissibilityReport(False, None, math.nan, "decay rate must be positive")
    if len(bad):
        i = int(bad[0])
        witness = (float(xs[i]), float(vs[i]), float(bounds[i]))
    p = 2 + pair.moment_exponent

    def moment(xi):
        return abs(xi) ** p * abs(complex(pair.u(xi)))

    spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-8, max_subdivisions=500, cutoff=pair.u_cutoff)
    try:
        body, _ = _quad(moment, 0.0, pair.u_cutoff, spec)
        tail, _ = _quad(moment, pair.u_cutoff, math.inf, spec)
        total = 2 * (body + tail)
        finite = math.isfinite(total)
    except NumericalError:
        total, finite = math.inf, False
    passed = witness is None and finite
    msg = "ok" if passed else ("decay certificate violated" if witness else "moment diverges")
    return AdmissibilityReport(passed, witness, total, msg)


def fourier_transform(v: ArrayFn, xi: float, x_max: float = 60.0) -> complex:
    """2∫₀^{x_max} v(x) cos(ξx) dx by adaptive quadrature (v even)."""
    re, _ = integrate.quad(lambda x: complex(v(x)).real, 0.0, x_max, weight="cos", wvar=xi,
                           limit=400)
    im, _ = integrate.quad(lambda x: complex(v(x)).imag, 0.0, x_max, weight="cos", wvar=xi,
                           limit=400)
    return 2 * complex(re, im)


