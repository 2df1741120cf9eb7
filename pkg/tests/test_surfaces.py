import math

import pytest
from hypothesis import given, strategies as st

from dirac_selberg.errors import DomainError
from dirac_selberg.hyperbolic import IsometryClass, classify, translation_length
from dirac_selberg.surfaces import (SurfacePresentation, Word, conjugacy_key, counting_bound,
                                    cyclic_reduce, enumerate_length_spectrum, minimal_rotation,
                                    pinch_family_symmetric, punctured_torus, smallest_period,
                                    symmetric_traces)

SYSTOLE = 2 * math.acosh(1.5)
words = st.lists(st.sampled_from("ABab"), min_size=1, max_size=8).map("".join)


# --- words ---------------------------------------------------------------

def test_word_parse_reduces():
    assert str(Word.parse("AaB")) == "B"
    assert str(Word.parse("ABba")) == ""
    assert len(Word.parse("AAb")) == 3


def test_word_rejects_bad_letters():
    with pytest.raises(DomainError):
        Word.parse("A1")


@given(words, words)
def test_word_inverse_and_product(x, y):
    u, v = Word.parse(x), Word.parse(y)
    assert len(u * u.inverse()) == 0
    assert (u * v).inverse() == v.inverse() * u.inverse()


@given(words)
def test_codes_round_trip(x):
    w = Word.parse(x)
    assert Word.from_codes(w.codes()) == w


def test_cyclic_helpers():
    a, A = 0, 1
    assert cyclic_reduce([2, a, 2, 3]) == (a, 2)  # B A B b → A B after cancelling the ends
    assert minimal_rotation((2, 0, 1)) == (0, 1, 2)
    assert smallest_period((0, 2, 0, 2)) == 2
    assert smallest_period((0, 2, 2)) == 3
    assert A == 1


@given(words, words)
def test_conjugacy_key_invariant(x, y):
    w, u = Word.parse(x), Word.parse(y)
    assert conjugacy_key(u * w * u.inverse()) == conjugacy_key(w)


# --- constructors ----------------------------------------------------------

def test_modular_torus(modular_torus):
    A, B = modular_torus.generators
    assert translation_length(A) == pytest.approx(SYSTOLE, rel=1e-12)
    assert A.trace == pytest.approx(3) and B.trace == pytest.approx(3)
    assert (A @ B).trace == pytest.approx(3)
    comm = modular_torus.matrix(Word.parse("ABab"))
    assert comm.trace == pytest.approx(-2, abs=1e-9)
    assert B.c == 1.0
    assert modular_torus.area == 2 * math.pi and modular_torus.genus == 1 and modular_torus.k == 1


def test_relation_violation():
    with pytest.raises(DomainError) as err:
        punctured_torus(3, 3, 4)
    assert err.value.code == "relation-violation"


def test_non_discrete_guard():
    with pytest.raises(DomainError) as err:
        punctured_torus(2, 2, 2)
    assert err.value.code == "non-discrete"


@given(st.floats(2.1, 30), st.floats(2.1, 30))
def test_fricke_family_gives_parabolic_commutator(x, y):
    # pick z on the larger root of z² − xyz + x² + y² = 0
    disc = (x * y) ** 2 - 4 * (x * x + y * y)
    if disc < 0:
        return
    z = (x * y + math.sqrt(disc)) / 2
    if z <= 2:
        return
    surf = punctured_torus(x, y, z)
    assert surf.matrix(Word.parse("ABab")).trace == pytest.approx(-2, abs=1e-7 * max(1, z * z))


def test_thrice_punctured_sphere(sphere):
    P, Q = sphere.generators
    assert (P @ Q.inverse()).trace == pytest.approx(-2)
    assert translation_length(P @ Q) == pytest.approx(2 * math.acosh(3), rel=1e-12)
    assert sphere.area == pytest.approx(2 * math.pi) and sphere.k == 3 and sphere.genus == 0


def test_gauss_bonnet_is_enforced(modular_torus):
    with pytest.raises(DomainError):
        SurfacePresentation(modular_torus.generators, modular_torus.parabolic_words, 1, 1, 6.0)


def test_cusp_word_must_be_parabolic(modular_torus):
    with pytest.raises(DomainError):
        SurfacePresentation(modular_torus.generators, (Word.parse("AB"),), 1, 1, 2 * math.pi)


def test_relabeled_swaps_generators(modular_torus):
    r = modular_torus.relabeled([1, 0])
    assert r.generators == modular_torus.generators[::-1]
    assert str(r.parabolic_words[0]) == "BAba"
    with pytest.raises(DomainError):
        modular_torus.relabeled([0, 0])


# --- pinch family ---------------------------------------------------------

def test_pinch_family_contains_modular_torus():
    l = 2 * math.acosh(1.5)
    x, y, z = symmetric_traces(l)
    assert (x, y, z) == pytest.approx((3, 3, 3), rel=1e-12)


@given(st.floats(1e-4, 5))
def test_pinch_family_fricke(l):
    x, y, z = symmetric_traces(l)
    assert abs(x * x + y * y + z * z - x * y * z) <= 1e-9 * x * y * z


@given(st.floats(1e-2, 5))
def test_pinch_family_matches_closed_form(l):
    x, y, _ = symmetric_traces(l)
    assert y == pytest.approx(x / math.sqrt(x - 2), rel=1e-8)


@pytest.mark.parametrize("l", [0.05, 0.01, 1e-3])
def test_pinched_commutator_stays_parabolic(l):
    surf = punctured_torus(*symmetric_traces(l))
    comm = Word.parse("ABab")
    assert classify(surf.matrix(comm), surf.trace_tolerance(comm)) is IsometryClass.PARABOLIC


def test_pinch_family_lengths_and_growth():
    fam = pinch_family_symmetric([0.4, 0.1, 0.01])
    assert [l[0] for l in fam.pinched_lengths] == pytest.approx([0.4, 0.1, 0.01], rel=1e-9)
    ys = [s.generators[1].trace for s in fam.surfaces]
    assert ys[0] < ys[1] < ys[2]
    assert str(fam.pinched_classes[0]) == "A"


@pytest.mark.parametrize("ls", [[0.1, 0.2], [0.1, -0.1], []])
def test_pinch_family_validation(ls):
    with pytest.raises(DomainError):
        pinch_family_symmetric(ls)


# --- enumeration -----------------------------------------------------------

def test_word_cap_one(modular_torus):
    spec = enumerate_length_spectrum(modular_torus, 2.0, 1)
    assert sorted(r.key for r in spec.records) == ["A", "B", "a", "b"]
    assert all(r.length == pytest.approx(SYSTOLE) for r in spec.records)
    assert spec.count(SYSTOLE + 1e-9) >= 4


def test_powers_and_conjugates(small_spectrum):
    by = small_spectrum.by_key()
    assert not by["AA"].primitive and str(by["AA"].primitive_root) == "A"
    assert conjugacy_key(Word.parse("BAb")) == "A"


def test_records_match_translation_length(modular_spectrum):
    for rec in modular_spectrum.records:
        assert rec.length == pytest.approx(translation_length(rec.matrix), abs=1e-9)


def test_oriented_pairing(modular_spectrum):
    by = modular_spectrum.by_key()
    for rec in modular_spectrum.records:
        inv = by.get(rec.inverse_key)
        if inv is None:
            # the inverse may sit just past the word cap only if its length is beyond r_max
            assert rec.length > modular_spectrum.r_max
            continue
        assert inv.length == pytest.approx(rec.length, rel=1e-12)
        assert inv.trace == pytest.approx(rec.trace, rel=1e-12)
        assert inv.orientation_pair_id == rec.orientation_pair_id


def test_count_at_six(modular_spectrum):
    assert modular_spectrum.status == "complete"
    assert modular_spectrum.complete_up_to >= 6
    assert len(modular_spectrum.primitive_records(6.0)) == 72


def test_cap_stability(modular_torus):
    a = enumerate_length_spectrum(modular_torus, 20.0, 10)
    b = enumerate_length_spectrum(modular_torus, 20.0, 11)
    cut = a.complete_up_to
    keys_a = {r.key for r in a.records if r.length <= cut}
    keys_b = {r.key for r in b.records if r.length <= cut}
    assert keys_a == keys_b


def test_non_hyperbolic_words_are_cusp_powers(modular_torus):
    # brute force over short words: anything not hyperbolic is parabolic and conjugate to [A,B]^n
    from itertools import product
    comm = {conjugacy_key(Word.parse("ABab").power(n)) for n in (1, -1, 2, -2)}
    for n in range(1, 9):
        for letters in product("ABab", repeat=n):
            w = Word.parse("".join(letters))
            if len(w) == 0:
                continue
            kind = classify(modular_torus.matrix(w))
            if kind is not IsometryClass.HYPERBOLIC:
                assert kind is IsometryClass.PARABOLIC
                assert conjugacy_key(w) in comm


def test_incomplete_when_cap_too_small(modular_torus):
    spec = enumerate_length_spectrum(modular_torus, 6.0, 6)
    assert spec.status == "incomplete"
    assert spec.certificate == "heuristic-watermark"


def test_overflow_flag(modular_torus, monkeypatch):
    import dirac_selberg.surfaces as surfaces
    monkeypatch.setattr(surfaces, "TRACE_CAP", 50.0)
    spec = enumerate_length_spectrum(modular_torus, 6.0, 8)
    assert spec.overflow
    assert spec.complete_up_to <= 6.0


@pytest.mark.parametrize("args", [(0.0, 5), (4.0, 0)])
def test_enumeration_validation(modular_torus, args):
    with pytest.raises(DomainError):
        enumerate_length_spectrum(modular_torus, *args)


def test_counting_bound(modular_spectrum):
    prim = modular_spectrum.primitive_records()
    for i, rec in enumerate(prim):
        assert i + 1 <= counting_bound(modular_spectrum, rec.length)
    assert counting_bound(modular_spectrum, 3.0) / counting_bound(modular_spectrum, 2.0) == \
        pytest.approx(math.e)
    with pytest.raises(DomainError):
        counting_bound(modular_spectrum, 0.0)


def test_gauss_bonnet_fields(modular_torus, sphere):
    for s in (modular_torus, sphere):
        assert s.area == 2 * math.pi * (2 * s.genus - 2 + s.cusp_count)
