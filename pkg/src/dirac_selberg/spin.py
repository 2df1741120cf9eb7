"""Spin structures as sign lifts of generators and the class function ε."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .hyperbolic import IsometryClass, UnimodularMatrix, classify
from .surfaces import SurfacePresentation, Word

SNAP_TOL = 1e-9


@dataclass(frozen=True)
class SpinStructure:
    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signs):
            raise DomainError("spin signs must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "SpinStructure":
        """From a string such as ``"+-"``."""
        table = {"+": 1, "-": -1}
        try:
            return cls(tuple(table[ch] for ch in text.strip()))
        except KeyError as exc:
            raise DomainError(f"spin must be a string of '+'/'-', got {text!r}") from exc

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def validate(self, surface: SurfacePresentation) -> None:
        """Check the sign count and that every relation lifts to +I."""
        if len(self.signs) != len(surface.generators):
            raise DomainError(f"{len(self.signs)} signs for {len(surface.generators)} generators")
        for rel in surface.relations:
            m = lift(self, rel, surface)
            if abs(m.a - 1) > SNAP_TOL or abs(m.d - 1) > SNAP_TOL or abs(m.b) > SNAP_TOL \
                    or abs(m.c) > SNAP_TOL:
                raise DomainError(f"relation {rel} does not lift to +I")

    def sign_of(self, word: Word) -> int:
        out = 1
        for g, e in word.letters:
            if not 0 <= g < len(self.signs):
                raise DomainError(f"generator index {g} out of range")
            if e % 2:
                out *= self.signs[g]
        return out


def all_spin_structures(surface: SurfacePresentation) -> list[SpinStructure]:
    n = len(surface.generators)
    return [SpinStructure(tuple(-1 if (mask >> i) & 1 else 1 for i in range(n)))
            for mask in range(2**n)]


def lift(spin: SpinStructure, w: Word, surface: SurfacePresentation) -> UnimodularMatrix:
    """Signed product Π (s_g M_g)^e over the letters of w."""
    m = surface.matrix(w)
    if len(spin.signs) != len(surface.generators):
        raise DomainError("spin structure does not match the generator count")
    return -m if spin.sign_of(w) < 0 else m


def sign_of_trace(trace: float) -> int:
    if abs(abs(trace) - 2) <= SNAP_TOL:
        trace = 2.0 if trace > 0 else -2.0
    return 1 if trace > 0 else -1


def epsilon(spin: SpinStructure, w: Word, surface: SurfacePresentation) -> int:
    """ε(w) = sign tr(lift(w)) for hyperbolic or parabolic w."""
    m = lift(spin, w, surface)
    kind = classify(m, surface.trace_tolerance(w))
    if kind not in (IsometryClass.HYPERBOLIC, IsometryClass.PARABOLIC):
        raise DomainError(f"epsilon is undefined on {kind.value} elements")
    return sign_of_trace(m.trace)


def epsilon_from_record(spin: SpinStructure, representative: Word, trace: float) -> int:
    """ε for an enumerated class, reusing the trace already computed for it."""
    return spin.sign_of(representative) * sign_of_trace(trace)


def is_nontrivial_at_cusps(spin: SpinStructure, surface: SurfacePresentation) -> bool:
    # vacuously true without cusps
    return all(epsilon(spin, w, surface) == -1 for w in surface.parabolic_words)
