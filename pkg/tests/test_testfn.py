import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirac_selberg.errors import DomainError
from dirac_selberg.numerics import xi_coth
from dirac_selberg.testfn import (TestFunctionPair, check_admissible, fourier_transform, heat_pair,
                                  pair_from_phi, resolvent_pair)
from scipy import integrate


def bump(t):
    return math.exp(-1 / (1 - t * t)) if abs(t) < 1 else 0.0


def phi_zero_identity(pair):
    """(1/4π)∫ ξ u(ξ) coth(πξ) dξ by plain scipy quadrature, independent of the package's splitter."""
    f = lambda x: float(pair.u(x)) * float(xi_coth(x))
    val, _ = integrate.quad(f, 0, pair.u_cutoff, limit=4000, epsabs=1e-13)
    return 2 * val / (4 * math.pi)


def test_heat_pair_values():
    p = heat_pair(0.5)
    assert p.v(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert p.u(0.0) == 1.0
    assert fourier_transform(heat_pair(1.0).v, 1.0) == pytest.approx(math.exp(-1), abs=1e-8)


@pytest.mark.parametrize("T", [0.0, -1.0])
def test_heat_pair_domain(T):
    with pytest.raises(DomainError):
        heat_pair(T)


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(-10, 10))
def test_heat_semigroup(T1, T2, xi):
    assert heat_pair(T1).u(xi) * heat_pair(T2).u(xi) == pytest.approx(heat_pair(T1 + T2).u(xi),
                                                                      rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("pair", [heat_pair(0.5), heat_pair(2.0), resolvent_pair(2, 3),
                                  resolvent_pair(1.6, 4)], ids=["heat.5", "heat2", "res23", "res164"])
@pytest.mark.parametrize("xi", [0.0, 0.5, 1.0, 2.0, 5.0])
def test_transform_consistency(pair, xi):
    assert abs(complex(pair.u(xi)) - fourier_transform(pair.v, xi)) <= 1e-6


def test_resolvent_pair_zero_and_rate():
    p = resolvent_pair(2, 2)
    assert p.v(np.array([0.0, 1.0])).tolist() == [0.0, 0.0]
    assert resolvent_pair(2, 3).decay_rate == pytest.approx(1.0)
    assert resolvent_pair(2 + 1j, 3).is_complex


@pytest.mark.parametrize("s,s0", [(1.0, 3.0), (2.0, 0.9), (0.5, 3)])
def test_resolvent_domain(s, s0):
    with pytest.raises(DomainError):
        resolvent_pair(s, s0)


def test_admissibility_reports():
    assert check_admissible(heat_pair(1.0)).passed
    assert check_admissible(resolvent_pair(2, 3)).passed
    fat = TestFunctionPair(v=lambda x: 1 / (1 + np.asarray(x) ** 2),
                           u=lambda xi: math.pi * np.exp(-np.abs(xi)), decay_rate=0.5, c=1.0,
                           moment_exponent=0.5)
    report = check_admissible(fat)
    assert not report.passed and report.witness is not None
    x, vx, bound = report.witness
    assert vx > bound


def test_pair_from_phi_zero():
    p = pair_from_phi(lambda t: 0.0, 1.0)
    assert p.v(0.3) == 0.0 and p.u(1.0) == 0.0


@pytest.fixture(scope="module")
def bump_pair():
    return pair_from_phi(bump, 1.0)


def test_pair_from_phi_even_and_supported(bump_pair):
    assert bump_pair.v(1.0) == pytest.approx(bump_pair.v(-1.0), abs=1e-10)
    assert bump_pair.support == pytest.approx(2 * math.asinh(0.5))
    assert bump_pair.v(bump_pair.support + 1e-3) == 0.0


def test_pair_from_phi_transform_matches_quadrature(bump_pair):
    for xi in (0.0, 1.0, 3.0, 7.0):
        oracle = fourier_transform(bump_pair.v, xi, x_max=bump_pair.support)
        assert complex(bump_pair.u(xi)).real == pytest.approx(oracle.real, abs=1e-9)


def test_transform_chain_identity(bump_pair):
    assert phi_zero_identity(bump_pair) == pytest.approx(bump(0.0), abs=1e-5)


@pytest.mark.parametrize("scale,shift", [(0.5, 0.0), (1.0, 0.3)])
def test_transform_chain_identity_variants(scale, shift):
    # φ supported in [−1, 1] after scaling and translation
    def phi(t):
        return bump((t - shift) / scale)

    pair = pair_from_phi(phi, 1.0 + abs(shift)) if shift else pair_from_phi(phi, scale)
    assert phi_zero_identity(pair) == pytest.approx(phi(0.0), abs=1e-5 * max(1, abs(phi(0.0))))


def test_pair_sum_is_linear():
    a, b = heat_pair(0.5), resolvent_pair(2, 3)
    s = a + b
    for x in (0.0, 0.7, 3.0):
        assert complex(s.v(x)) == pytest.approx(complex(a.v(x)) + complex(b.v(x)))
    assert s.decay_rate == min(a.decay_rate, b.decay_rate)


def test_support_radius_must_be_positive():
    with pytest.raises(DomainError):
        pair_from_phi(bump, 0.0)
