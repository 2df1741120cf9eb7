"""End-to-end acceptance checks, one per criterion, at their stated tolerances.

Each test records a PASS/FAIL line; conftest prints them together at the end of the run.
A failing criterion is asserted, not skipped.
"""
import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner
from scipy import integrate

from dirac_selberg.cli import main
from dirac_selberg.errors import HypothesisViolation
from dirac_selberg.numerics import tanh_partial_sum, xi_coth
from dirac_selberg.spin import SpinStructure, all_spin_structures
from dirac_selberg.surfaces import (enumerate_length_spectrum, pinch_family_symmetric,
                                    thrice_punctured_sphere)
from dirac_selberg.testfn import heat_pair, pair_from_phi, resolvent_pair
from dirac_selberg.traceformula import (asymptotic_coefficient, extract_spectrum, geometric_side,
                                        heat_asymptotics, heat_trace, identity_term,
                                        isospectral_compare, pinch_geodesic_term)
from dirac_selberg.zeta import (LOG2, Anchor, SpectralInput, contour_residue,
                                functional_equation_residual, log_deriv_continuation,
                                log_deriv_sum, pinch_zeta_stabilization, zeta, zeta_eta_factor)


def report(log, n, ok, detail):
    log.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def bump(t):
    return math.exp(-1 / (1 - t * t)) if abs(t) < 1 else 0.0


def test_criterion_01_transform_chain(acceptance_log):
    phis = [bump, lambda t: bump(2 * t), lambda t: (1 + t * t) * bump(t / 1.5)]
    radii = [1.0, 0.5, 1.5]
    start = time.perf_counter()
    errs = []
    for phi, r in zip(phis, radii):
        pair = pair_from_phi(phi, r)
        f = lambda x: float(pair.u(x)) * float(xi_coth(x))
        val, _ = integrate.quad(f, 0, pair.u_cutoff, limit=4000, epsabs=1e-13)
        errs.append(abs(phi(0.0) - 2 * val / (4 * math.pi)) / max(1.0, abs(phi(0.0))))
    elapsed = time.perf_counter() - start
    report(acceptance_log, 1, max(errs) <= 1e-5 and elapsed < 30,
           f"max scaled error {max(errs):.2e} (tol 1e-5), {elapsed:.1f} s (< 30 s)")


def test_criterion_02_tanh_series(acceptance_log):
    e3 = abs(tanh_partial_sum(1.0, 10**3) - math.tanh(math.pi))
    e4 = abs(tanh_partial_sum(1.0, 10**4) - math.tanh(math.pi))
    ratio = e4 / e3
    ok = e3 <= 3e-3 and e4 <= 3e-4 and 0.08 <= ratio <= 0.12
    report(acceptance_log, 2, ok,
           f"errors {e3:.3e}, {e4:.3e}; ratio {ratio:.4f} (in [0.08, 0.12])")


def test_criterion_03_identity_integral_limits(acceptance_log):
    def I(T):
        return identity_term(4 * math.pi, heat_pair(T))

    small = 1e-4 * I(1e-4)
    T = 50.0
    large = abs(I(T) - 1 / math.sqrt(math.pi * T) - math.sqrt(math.pi**3 / T**3) / 6)
    bound = 0.5 * T**-2.5
    report(acceptance_log, 3, 0.98 <= small <= 1.02 and large <= bound,
           f"T·I(T) = {small:.6f} at T = 1e-4; large-T error {large:.3e} vs bound {bound:.3e}"
           f" (next term −(π^(7/2)/60)·T^(−5/2) has size {math.pi**3.5 / 60 * T**-2.5:.3e})")


def test_criterion_04_heat_asymptotics(modular_torus, modular_spectrum, acceptance_log):
    a0, _ = asymptotic_coefficient(0)
    N = 10**6
    oracle = 2 * math.fsum(1 / (2 * math.pi**2 * n * n) for n in range(1, N)) \
        + 2 / (2 * math.pi**2 * N)
    coeffs = heat_asymptotics(modular_torus.area, modular_torus.cusp_count, 1)
    worst = []
    for spin in all_spin_structures(modular_torus):
        ratios = [abs(heat_trace(modular_torus, spin, modular_spectrum, T) - coeffs.model(T)) / T
                  for T in (0.2, 0.1, 0.05)]
        worst.append(all(b <= a for a, b in zip(ratios, ratios[1:])))
        worst.append(max(ratios) < 1.0)
    ok = abs(a0 - 1 / 6) <= 1e-8 and abs(oracle - 1 / 6) <= 1e-8 and all(worst)
    report(acceptance_log, 4, ok,
           f"a_0 = {a0:.12f}, oracle {oracle:.12f}; |heat − A|/T nonincreasing and"
           f" < 1 for all {len(worst) // 2} spin structures: {all(worst)}")


def test_criterion_05_pinching_geodesic_term(acceptance_log):
    pair = heat_pair(1.0)
    target = -2 * math.log(2) * float(pair.v(0.0))
    start = time.perf_counter()
    e3 = abs(pinch_geodesic_term(1e-3, pair, -1) - target)
    e4 = abs(pinch_geodesic_term(1e-4, pair, -1) - target)
    elapsed = time.perf_counter() - start
    report(acceptance_log, 5, e3 <= 1e-2 and e4 <= 1e-3 and elapsed < 10,
           f"errors {e3:.2e} at l = 1e-3 (tol 1e-2), {e4:.2e} at l = 1e-4 (tol 1e-3), "
           f"{elapsed:.2f} s")


def test_criterion_06_dilog_zeta_factor(acceptance_log):
    ls = [0.2, 0.1, 0.05, 0.025]
    errs = [abs(zeta_eta_factor(2.0, l) * math.exp(-math.pi**2 / (6 * l)) - 1 / 8) for l in ls]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    report(acceptance_log, 6, monotone and errs[-1] <= 1e-3,
           f"errors {', '.join(f'{e:.2e}' for e in errs)}; monotone {monotone}; "
           f"{errs[-1]:.2e} at l = 0.025 vs tol 1e-3 (O(l) term ≈ 0.135·l)")


def test_criterion_07_zeta_consistency(modular_spectrum, acceptance_log):
    h = 1e-4
    worst = 0.0
    for spin in ("++", "-+"):
        sp = SpinStructure.parse(spin)
        for s in (1.8, 2.0, 2.5):
            fd = (zeta(modular_spectrum, sp, s + h, 6.0).log_value
                  - zeta(modular_spectrum, sp, s - h, 6.0).log_value) / (2 * h)
            worst = max(worst, abs(fd - log_deriv_sum(modular_spectrum, sp, s, 6.0)))
    report(acceptance_log, 7, worst <= 1e-6,
           f"max |d/ds log Z − Z′/Z| = {worst:.2e} (tol 1e-6)")


def test_criterion_08_continuation_and_residues(modular_torus, modular_spectrum, acceptance_log):
    area, k = modular_torus.area, modular_torus.cusp_count
    spectral = SpectralInput((1.0,), (3.0,))
    s0 = 2.0
    anchor = Anchor(s0, log_deriv_sum(modular_spectrum, SpinStructure.parse("++"), s0, 6.0))

    def f(z):
        return log_deriv_continuation(z, s0, spectral, area, k, anchor.value, cross_check=False)

    r_spec = contour_residue(f, 0.5 + 1j)
    r_triv = contour_residue(f, -0.5)
    fe = abs(functional_equation_residual(0.3 + 0.2j, spectral, area, k, anchor))
    ok = abs(r_spec - 3) <= 1e-3 and abs(r_triv - area / math.pi) <= 1e-3 and fe <= 1e-5
    report(acceptance_log, 8, ok,
           f"residue at 1/2+i {r_spec.real:.8f}, at −1/2 {r_triv.real:.8f}; "
           f"FE residual {fe:.2e} (2k·log2 constant; the 4k form would leave "
           f"{2 * k * LOG2:.6f})")


def test_criterion_09_cross_family(modular_torus, modular_spectrum, acceptance_log):
    spin = SpinStructure.parse("++")
    T = np.geomspace(2e-4, 0.6, 240)
    lam = np.concatenate([[0.0], np.geomspace(0.05, 2e4, 99)])
    est = extract_spectrum(modular_torus, spin, modular_spectrum, T, lam, residual_bound=1e-2)
    pair = resolvent_pair(2.0, 3.0)
    spectral = est.spectral_sum(pair.u)
    geometric = geometric_side(modular_torus, spin, pair, modular_spectrum).total
    rel = abs(spectral - geometric) / abs(geometric)
    report(acceptance_log, 9, rel <= 1e-2,
           f"spectral {spectral.real:.6f} vs geometric {geometric.real:.6f}, "
           f"relative {rel:.2e} (tol 1e-2)")


def test_criterion_10_isospectrality(modular_torus, small_spectrum, acceptance_log):
    plus = SpinStructure.parse("++")
    relabeled = modular_torus.relabeled([1, 0])
    v1 = isospectral_compare(modular_torus, plus, small_spectrum, relabeled, plus,
                             enumerate_length_spectrum(relabeled, 4.0, 10), 4.0)
    fam = pinch_family_symmetric([1.5, 1.0])
    a, b = fam.surfaces
    v2 = isospectral_compare(a, plus, enumerate_length_spectrum(a, 4.0, 12), b, plus,
                             enumerate_length_spectrum(b, 4.0, 12), 4.0)
    v3 = isospectral_compare(modular_torus, plus, small_spectrum, modular_torus,
                             SpinStructure.parse("-+"), small_spectrum, 4.0)
    ok = (v1.indistinguishable and not v2.indistinguishable and v2.witness["kind"] == "length"
          and not v3.indistinguishable and v3.witness["kind"] == "epsilon")
    report(acceptance_log, 10, ok,
           f"relabeled: {v1.verdict}; pinch members: {v2.witness['kind']} witness; "
           f"spin change: {v3.witness['kind']} witness")


def test_criterion_11_hypothesis_guards(acceptance_log):
    runner = CliRunner()
    trace = runner.invoke(main, ["trace", "--surface", "thrice-punctured-sphere", "--spin", "++",
                                 "--r-max", "3", "--word-cap", "8"])
    pinch = runner.invoke(main, ["pinch", "--spin", "++", "--l", "0.4", "--l", "0.2",
                                 "--r-max", "3.5", "--word-cap", "10"])
    codes = [trace.exit_code, pinch.exit_code]
    kinds = [json.loads(r.stdout)["error"]["code"] for r in (trace, pinch)]
    with pytest.raises(HypothesisViolation):
        geometric_side(thrice_punctured_sphere(), SpinStructure.parse("++"), heat_pair(1.0),
                       enumerate_length_spectrum(thrice_punctured_sphere(), 3.0, 8))
    with pytest.raises(HypothesisViolation):
        pinch_zeta_stabilization(pinch_family_symmetric([0.4, 0.2]), SpinStructure.parse("++"),
                                 2.0, 3.5, word_cap=10)
    report(acceptance_log, 11, codes == [4, 4] and kinds == ["hypothesis-violation"] * 2,
           f"exit codes geometric side / pinch zeta: {codes}")
