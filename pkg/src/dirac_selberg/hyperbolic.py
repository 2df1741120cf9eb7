"""SL₂(ℝ) isometries of the upper half-plane and basic hyperbolic metric geometry."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PARABOLIC_TOL = 1e-9
_RENORM_THRESHOLD = 1e-14
_EPS = 2.0**-52


@dataclass(frozen=True)
class UnimodularMatrix:
    """Real 2×2 matrix [[a, b], [c, d]] rescaled on construction to determinant 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # ad − bc cancels for large entries; a deviation inside that rounding noise
        # is not a real scale error, and rescaling by it would inject one
        noise = 16 * _EPS * (abs(self.a * self.d) + abs(self.b * self.c))
        if not math.isfinite(det) or (det <= 0 and 1.0 - det > noise):
            raise DomainError(f"matrix determinant must be positive, got {det}")
        if abs(det - 1.0) > max(_RENORM_THRESHOLD, noise):
            r = math.sqrt(det)
            for name in "abcd":
                object.__setattr__(self, name, getattr(self, name) / r)

    @classmethod
    def from_rows(cls, rows) -> "UnimodularMatrix":
        (a, b), (c, d) = rows
        return cls(float(a), float(b), float(c), float(d))

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "UnimodularMatrix":
        base = self if n >= 0 else self.inverse()
        out = UnimodularMatrix.identity()
        for _ in range(abs(n)):
            out = out @ base
        return out

    @property
    def trace(self) -> float:
        return self.a + self.d

    def rows(self) -> list[list[float]]:
        return [[self.a, self.b], [self.c, self.d]]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows())

    def act(self, z: complex) -> complex:
        """Möbius action z ↦ (az + b)/(cz + d)."""
        return (self.a * z + self.b) / (self.c * z + self.d)


class IsometryClass(enum.Enum):
    IDENTITY = "identity"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"half-plane point needs y > 0, got {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "HalfPlanePoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def moved_by(self, m: UnimodularMatrix) -> "HalfPlanePoint":
        return HalfPlanePoint.from_complex(m.act(self.z))


def classify(m: UnimodularMatrix, tol: float = PARABOLIC_TOL) -> IsometryClass:
    for sign in (1.0, -1.0):
        if (abs(m.a - sign) <= tol and abs(m.d - sign) <= tol
                and abs(m.b) <= tol and abs(m.c) <= tol):
            return IsometryClass.IDENTITY
    t = abs(m.trace)
    if abs(t - 2) <= tol:
        return IsometryClass.PARABOLIC
    return IsometryClass.HYPERBOLIC if t > 2 else IsometryClass.ELLIPTIC


def length_from_trace(trace: float) -> float:
    """2·arccosh(|tr|/2); the caller guarantees |tr| > 2."""
    return 2 * math.acosh(abs(trace) / 2)


def translation_length(m: UnimodularMatrix, tol: float = PARABOLIC_TOL) -> float:
    kind = classify(m, tol)
    if kind is not IsometryClass.HYPERBOLIC:
        raise DomainError(f"translation length needs a hyperbolic element, got {kind.value}")
    return length_from_trace(m.trace)


def distance(z: HalfPlanePoint, w: HalfPlanePoint) -> float:
    # arccosh(1 + q) loses precision for small q; 2·asinh(√(q/2)) is the stable form
    q = ((z.x - w.x) ** 2 + (z.y - w.y) ** 2) / (2 * z.y * w.y)
    return 2 * math.asinh(math.sqrt(q / 2))


def pants_points(l: float) -> tuple[HalfPlanePoint, HalfPlanePoint]:
    """Endpoints R, S of the collar-crossing segment for a boundary geodesic of length l.

    Normalized so the geodesic's diametrically opposite points sit at i and i·e^{l/2}.
    """
    if not l > 0:
        raise DomainError("l must be positive")
    e = math.exp(l)
    h = math.exp(l / 2)
    r = HalfPlanePoint(2 * h / (e + 1), (e - 1) / (e + 1))
    s = HalfPlanePoint(2 * e / (e + 1), h * (e - 1) / (e + 1))
    return r, s


def pants_collar_cosh(l: float) -> float:
    c4 = math.cosh(l / 4) ** 2
    return (2 * c4 + math.cosh(l / 2) ** 2) / (2 * c4)


def pants_collar_distance(l: float) -> float:
    """d(R, S) for the collar segment; increases with l, tending to arccosh(3/2) as l → 0."""
    if not l > 0:
        raise DomainError("l must be positive")
    return math.acosh(pants_collar_cosh(l))


def parallel_transport_phase(z: HalfPlanePoint, w: HalfPlanePoint) -> complex:
    """Unit complex number −i(z − w̄)/|z − w̄|."""
    q = z.z - w.z.conjugate()
    return -1j * q / abs(q)


__all__ = [
    "UnimodularMatrix", "IsometryClass", "HalfPlanePoint", "classify", "translation_length",
    "length_from_trace", "distance", "pants_points", "pants_collar_cosh",
    "pants_collar_distance", "parallel_transport_phase", "PARABOLIC_TOL",
]
