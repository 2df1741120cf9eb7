"""Surface presentations, word enumeration and the oriented primitive length spectrum."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .hyperbolic import (PARABOLIC_TOL, IsometryClass, UnimodularMatrix, classify,
                         length_from_trace)

TRACE_CAP = 1e150
FRICKE_TOL = 1e-9
# rounding in a product of matrices is bounded by eps times the product of their norms
_PRODUCT_ROUNDING = 8 * np.finfo(float).eps


def _letter_name(index: int, exponent_sign: int) -> str:
    ch = chr(ord("A") + index)
    return ch if exponent_sign > 0 else ch.lower()


@dataclass(frozen=True)
class Word:
    """Freely reduced word, stored as (generator_index, nonzero exponent) pairs.

    The compact string form writes generator i as the i-th capital letter and
    its inverse in lower case, so the commutator of A and B is ``"ABab"``.
    """

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for i, (g, e) in enumerate(self.letters):
            if e == 0:
                raise DomainError("zero exponent in word")
            if i and self.letters[i - 1][0] == g:
                raise DomainError("adjacent letters share a generator; word is not reduced")

    @classmethod
    def from_codes(cls, codes: Iterable[int]) -> "Word":
        """Build from unit letter codes: 2i is generator i, 2i+1 its inverse."""
        return cls._from_units([(c >> 1, -1 if c & 1 else 1) for c in codes])

    @classmethod
    def _from_units(cls, units: Iterable[tuple[int, int]]) -> "Word":
        stack: list[list[int]] = []
        for g, e in units:
            if stack and stack[-1][0] == g:
                stack[-1][1] += e
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                stack.append([g, e])
        return cls(tuple((g, e) for g, e in stack))

    @classmethod
    def parse(cls, text: str) -> "Word":
        units = []
        for ch in text.strip():
            if not ch.isalpha():
                raise DomainError(f"bad letter {ch!r} in word {text!r}")
            units.append((ord(ch.upper()) - ord("A"), 1 if ch.isupper() else -1))
        return cls._from_units(units)

    def units(self) -> list[tuple[int, int]]:
        return [(g, 1 if e > 0 else -1) for g, e in self.letters for _ in range(abs(e))]

    def codes(self) -> tuple[int, ...]:
        return tuple(2 * g + (1 if e < 0 else 0) for g, e in self.units())

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word._from_units(self.units() + other.units())

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def power(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word._from_units(base.units() * abs(n))

    def __str__(self) -> str:
        return "".join(_letter_name(g, s) for g, s in self.units())

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def cyclic_reduce(codes: Sequence[int]) -> tuple[int, ...]:
    c = list(codes)
    while len(c) >= 2 and c[0] == (c[-1] ^ 1):
        c = c[1:-1]
    return tuple(c)


def minimal_rotation(codes: Sequence[int]) -> tuple[int, ...]:
    n = len(codes)
    if n == 0:
        return ()
    return min(tuple(codes[i:]) + tuple(codes[:i]) for i in range(n))


def smallest_period(codes: Sequence[int]) -> int:
    n = len(codes)
    for p in range(1, n + 1):
        if n % p == 0 and tuple(codes[:p]) * (n // p) == tuple(codes):
            return p
    return n


def conjugacy_key(word: Word) -> str:
    """Dedup key: lexicographically minimal rotation of the cyclic reduction."""
    return str(Word.from_codes(minimal_rotation(cyclic_reduce(word.codes()))))


@dataclass(frozen=True)
class SurfacePresentation:
    generators: tuple[UnimodularMatrix, ...]
    parabolic_words: tuple[Word, ...]
    genus: int
    cusp_count: int
    area: float
    relations: tuple[Word, ...] = ()
    name: str = "custom"
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.genus < 0 or self.cusp_count < 0:
            raise DomainError("genus and cusp count must be nonnegative")
        expected = 2 * math.pi * (2 * self.genus - 2 + self.cusp_count)
        if expected <= 0:
            raise DomainError("Euler characteristic must be negative")
        if abs(self.area - expected) > 1e-12 * expected:
            raise DomainError(f"area {self.area} violates Gauss-Bonnet ({expected})")
        if len(self.parabolic_words) != self.cusp_count:
            raise DomainError("need exactly one parabolic word per cusp")
        for g in self.generators:
            if classify(g) is IsometryClass.IDENTITY:
                raise DomainError("generator is the identity")
            if classify(g) is IsometryClass.ELLIPTIC:
                raise DomainError("elliptic generator: the group must be torsion free",
                                  code="elliptic-generator")
        for w in self.parabolic_words:
            if classify(self.matrix(w), self.trace_tolerance(w)) is not IsometryClass.PARABOLIC:
                raise DomainError(f"cusp word {w} is not parabolic")

    @property
    def k(self) -> int:
        return self.cusp_count

    def trace_tolerance(self, word: Word) -> float:
        """Tolerance for |tr| = 2 tests on ``word``, scaled by its rounding bound."""
        scale = 1.0
        for g, e in word.letters:
            scale *= np.linalg.norm(self.generators[g].as_array()) ** abs(e)
        return max(PARABOLIC_TOL, _PRODUCT_ROUNDING * scale)

    def matrix(self, word: Word) -> UnimodularMatrix:
        out = UnimodularMatrix.identity()
        for g, e in word.letters:
            if not 0 <= g < len(self.generators):
                raise DomainError(f"generator index {g} out of range")
            out = out @ self.generators[g].power(e)
        return out

    def relabeled(self, order: Sequence[int]) -> "SurfacePresentation":
        """Same group with generators listed in a new order."""
        if sorted(order) != list(range(len(self.generators))):
            raise DomainError("order must be a permutation of generator indices")
        new_index = {old: new for new, old in enumerate(order)}
        words = tuple(Word(tuple((new_index[g], e) for g, e in w.letters))
                      for w in self.parabolic_words)
        rels = tuple(Word(tuple((new_index[g], e) for g, e in w.letters))
                     for w in self.relations)
        return SurfacePresentation(tuple(self.generators[i] for i in order), words,
                                   self.genus, self.cusp_count, self.area, rels,
                                   self.name + "-relabeled", dict(self.provenance))


def punctured_torus(x: float, y: float, z: float) -> SurfacePresentation:
    """Once-punctured torus with tr A = x, tr B = y, tr AB = z.

    A = diag(α, 1/α), and B has lower-left entry 1 with the remaining
    entries fixed by tr B, tr AB and det B = 1.
    """
    x, y, z = float(x), float(y), float(z)
    if min(x, y, z) <= 2:
        raise DomainError("all traces must exceed 2", code="non-discrete")
    residual = x * x + y * y + z * z - x * y * z
    if abs(residual) > FRICKE_TOL * max(1.0, x * y * z):
        raise DomainError(f"x^2+y^2+z^2-xyz = {residual:.3g}, not 0", code="relation-violation")
    alpha = (x + math.sqrt(x * x - 4)) / 2
    b11 = (z - y / alpha) / (alpha - 1 / alpha)
    b22 = y - b11
    A = UnimodularMatrix(alpha, 0.0, 0.0, 1 / alpha)
    B = UnimodularMatrix(b11, b11 * b22 - 1, 1.0, b22)
    return SurfacePresentation((A, B), (Word.parse("ABab"),), 1, 1, 2 * math.pi,
                               name="punctured-torus", provenance={"traces": [x, y, z]})


def thrice_punctured_sphere() -> SurfacePresentation:
    P = UnimodularMatrix(1.0, 2.0, 0.0, 1.0)
    Q = UnimodularMatrix(1.0, 0.0, 2.0, 1.0)
    cusps = (Word.parse("A"), Word.parse("B"), Word.parse("Ab"))
    return SurfacePresentation((P, Q), cusps, 0, 3, 2 * math.pi,
                               name="thrice-punctured-sphere", provenance={})


@dataclass(frozen=True)
class PinchFamily:
    t: tuple[float, ...]
    surfaces: tuple[SurfacePresentation, ...]
    pinched_classes: tuple[Word, ...]
    pinched_lengths: tuple[tuple[float, ...], ...]  # per surface, one entry per pinched class


def symmetric_traces(l: float) -> tuple[float, float, float]:
    x = 2 * math.cosh(l / 2)
    # x - 2 = 4 sinh²(l/4) avoids cancellation for small l
    y = x / (2 * math.sinh(l / 4))
    return x, y, y


def pinch_family_symmetric(l_values: Sequence[float]) -> PinchFamily:
    """Punctured tori whose generator A has length l, for each l given (strictly decreasing)."""
    ls = [float(v) for v in l_values]
    if not ls or any(v <= 0 for v in ls):
        raise DomainError("pinch lengths must be positive")
    if any(b >= a for a, b in zip(ls, ls[1:])):
        raise DomainError("pinch lengths must be strictly decreasing")
    surfaces = tuple(punctured_torus(*symmetric_traces(l)) for l in ls)
    return PinchFamily(tuple(l / ls[0] for l in ls), surfaces, (Word.parse("A"),),
                       tuple((length_from_trace(s.generators[0].trace),) for s in surfaces))


@dataclass(frozen=True)
class ConjugacyClassRecord:
    representative: Word
    matrix: UnimodularMatrix
    length: float
    trace: float
    primitive: bool
    primitive_root: Word | None
    key: str
    inverse_key: str
    power: int = 1

    @property
    def orientation_pair_id(self) -> str:
        return min(self.key, self.inverse_key)


@dataclass(frozen=True)
class LengthSpectrum:
    records: tuple[ConjugacyClassRecord, ...]
    complete_up_to: float
    word_length_cap: int
    tail_constant: float
    r_max: float
    overflow: bool = False
    parabolic_words_seen: int = 0
    certificate: str = "heuristic-watermark"

    @property
    def status(self) -> str:
        return "complete" if self.complete_up_to >= self.r_max else "incomplete"

    def primitive_records(self, r: float | None = None) -> list[ConjugacyClassRecord]:
        r = math.inf if r is None else r
        return [rec for rec in self.records if rec.primitive and rec.length <= r]

    def by_key(self) -> dict[str, ConjugacyClassRecord]:
        return {rec.key: rec for rec in self.records}

    def count(self, r: float) -> int:
        """L(r): number of oriented primitive classes of length ≤ r."""
        return len(self.primitive_records(r))


def _letter_matrices(surface: SurfacePresentation) -> np.ndarray:
    mats = []
    for g in surface.generators:
        mats.append(g.as_array())
        mats.append(g.inverse().as_array())
    return np.array(mats)


def enumerate_length_spectrum(surface: SurfacePresentation, r_max: float,
                              word_cap: int) -> LengthSpectrum:
    """Breadth-first enumeration of conjugacy classes of hyperbolic words.

    All freely reduced words up to ``word_cap`` letters are generated level by
    level (vectorized over the frontier). Cyclically reduced hyperbolic words of
    length ≤ r_max are deduplicated by minimal rotation. Inverse classes are
    kept as separate, cross-linked records.

    Only words whose first letter code is minimal among their letters are
    extended; every cyclic word has such a rotation, so no class is lost.

    ``complete_up_to`` is the smallest translation length among cyclically
    reduced, primitive hyperbolic words in the last few levels, where "few" is the
    longest cusp word. Words that wind around a cusp gain length only
    logarithmically and periodically in the winding number, so a one-level
    frontier overstates completeness. This is a heuristic watermark.
    """
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    if word_cap < 1:
        raise DomainError("word_cap must be >= 1")
    letters = _letter_matrices(surface)
    n_letters = len(letters)
    trace_cap = 2 * math.cosh(r_max / 2)

    window = max([len(w) for w in surface.parabolic_words] + [1])
    words = np.arange(n_letters, dtype=np.int8).reshape(-1, 1)
    mats = letters.copy()
    letter_norms = np.linalg.norm(letters, axis=(1, 2))
    norms = letter_norms.copy()
    found: dict[tuple[int, ...], tuple[int, ...]] = {}
    overflow = False
    parabolic_seen = 0
    watermark = math.inf
    for level in range(1, word_cap + 1):
        if level > 1:
            last = words[:, -1]
            nxt = np.arange(n_letters, dtype=np.int8)
            allowed = (nxt[None, :] != (last[:, None] ^ 1)) & (nxt[None, :] >= words[:, :1])
            rows, cols = np.nonzero(allowed)
            words = np.concatenate([words[rows], cols[:, None].astype(np.int8)], axis=1)
            mats = np.einsum("nij,njk->nik", mats[rows], letters[cols])
            norms = norms[rows] * letter_norms[cols]
        big = np.abs(mats).max(axis=(1, 2)) > TRACE_CAP
        if big.any():
            overflow = True
            keep = ~big
            words, mats, norms = words[keep], mats[keep], norms[keep]
        if len(words) == 0:
            break
        cyc = words[:, 0] != (words[:, -1] ^ 1)
        tr = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
        tol = np.maximum(PARABOLIC_TOL, _PRODUCT_ROUNDING * norms)
        hyper = cyc & (tr > 2 + tol)
        parabolic_seen += int(np.count_nonzero(cyc & (np.abs(tr - 2) <= tol)))
        if level > word_cap - window and hyper.any():
            # proper powers add nothing new: their roots are shorter words
            cand = np.nonzero(hyper)[0]
            for idx in cand[np.argsort(tr[cand], kind="stable")]:
                codes = tuple(int(c) for c in words[idx])
                if smallest_period(codes) == len(codes):
                    watermark = min(watermark, length_from_trace(float(tr[idx])))
                    break
        for idx in np.nonzero(hyper & (tr <= trace_cap))[0]:
            codes = tuple(int(c) for c in words[idx])
            key = minimal_rotation(codes)
            if key not in found:
                found[key] = key
    records = [_make_record(surface, key) for key in found]
    records = [r for r in records if r.length <= r_max]
    records.sort(key=lambda r: (r.length, r.key))
    primitive_lengths = sorted(r.length for r in records if r.primitive)
    if primitive_lengths:
        ratios = [(i + 1) / math.exp(l) for i, l in enumerate(primitive_lengths)]
        tail_constant = 2 * max(ratios)
    else:
        tail_constant = 1.0
    if overflow:
        watermark = min(watermark, r_max)
    return LengthSpectrum(tuple(records), watermark, word_cap, tail_constant, float(r_max),
                          overflow, parabolic_seen)


def _make_record(surface: SurfacePresentation, codes: tuple[int, ...]) -> ConjugacyClassRecord:
    word = Word.from_codes(codes)
    inv_codes = minimal_rotation(tuple(c ^ 1 for c in reversed(codes)))
    period = smallest_period(codes)
    m = surface.matrix(word)
    root = Word.from_codes(codes[:period]) if period < len(codes) else None
    return ConjugacyClassRecord(
        representative=word, matrix=m, length=length_from_trace(m.trace), trace=m.trace,
        primitive=root is None, primitive_root=root, key=str(word),
        inverse_key=str(Word.from_codes(inv_codes)), power=len(codes) // period)


def counting_bound(spectrum: LengthSpectrum, r: float) -> float:
    """C·e^r, an empirical upper bound for L(r)."""
    if not spectrum.primitive_records():
        raise DomainError("counting bound needs a nonempty spectrum")
    if not r > 0:
        raise DomainError("r must be positive")
    return spectrum.tail_constant * math.exp(r)
