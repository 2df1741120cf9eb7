"""Command-line front end.

Every command prints a JSON document (or a CSV/table projection of it).
Errors print a JSON error object and exit with 2 (input or domain),
3 (numerical failure) or 4 (hypothesis violation).
"""
from __future__ import annotations

import json
import math
import sys
from typing import Any, Callable

import click

from . import __version__
from .errors import DomainError, HypothesisViolation, NumericalError, SelbergError
from .serialize import (SCHEMA_VERSION, dumps, rows_to_csv, rows_to_table, spectrum_metadata,
                        surface_document, surface_from_document, write_atomic)
from .spin import (SpinStructure, all_spin_structures, epsilon_from_record,
                   is_nontrivial_at_cusps)
from .surfaces import (SurfacePresentation, enumerate_length_spectrum, pinch_family_symmetric,
                       punctured_torus, symmetric_traces, thrice_punctured_sphere)
from .testfn import heat_pair, resolvent_pair
from .traceformula import (geometric_side, heat_asymptotics, heat_trace_detail,
                           isospectral_compare, pinch_geodesic_term, weyl_limit_check)
from .zeta import (Anchor, SpectralInput, functional_equation_residual, log_deriv_continuation,
                   log_deriv_sum, pinch_zeta_stabilization, zeta)

FORMATS = click.Choice(["json", "csv", "table"])


# ---------------------------------------------------------------- parsing

def parse_complex(text: str) -> complex:
    """"re" or "re,im"."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise DomainError(f"cannot read complex number {text!r}; use 're' or 're,im'",
                      code="bad-complex")


def load_surface(surface: str | None, traces: tuple[float, ...] | None) -> SurfacePresentation:
    if traces:
        return punctured_torus(*traces)
    if surface in (None, "modular-torus"):
        return punctured_torus(3, 3, 3)
    if surface == "thrice-punctured-sphere":
        return thrice_punctured_sphere()
    return surface_from_document(_read_json(surface))


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise DomainError(f"no such file: {path}", code="missing-file") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not valid JSON: {exc}", code="bad-json") from exc


def resolve_spin(text: str | None, surface: SurfacePresentation,
                 doc_signs: list[int] | None = None) -> SpinStructure | None:
    if text is not None:
        spin = SpinStructure.parse(text)
    elif doc_signs is not None:
        spin = SpinStructure(tuple(int(s) for s in doc_signs))
    else:
        return None
    spin.validate(surface)
    return spin


def default_spin(surface: SurfacePresentation) -> SpinStructure:
    """First spin structure (in +/− order) that is nontrivial at every cusp."""
    for spin in all_spin_structures(surface):
        if is_nontrivial_at_cusps(spin, surface):
            return spin
    raise HypothesisViolation(f"{surface.name} has no spin structure nontrivial at all cusps")


# ---------------------------------------------------------------- output

class Emitter:
    def __init__(self, fmt: str, out: str | None):
        self.fmt, self.out = fmt, out

    def emit(self, doc: dict, rows: list[dict] | None = None,
             columns: list[str] | None = None) -> None:
        if self.fmt == "json" or rows is None:
            text = dumps(doc)
        elif self.fmt == "csv":
            text = rows_to_csv(rows, columns or sorted(rows[0]) if rows else [])
        else:
            text = rows_to_table(rows, columns or [])
        if self.out:
            write_atomic(self.out, text)
        else:
            click.echo(text, nl=False)


def check_block(theorem: str, check: str, value: Any, tolerance: Any, passed: bool) -> dict:
    return {"theorem": theorem, "check": check, "value": value, "tolerance": tolerance,
            "passed": bool(passed)}


def result(command: str, inputs: dict, check: dict, **body) -> dict:
    doc = {"schema": f"dirac-selberg/result/{SCHEMA_VERSION}", "command": command,
           "inputs": inputs, "paper_check": check}
    doc.update(body)
    return doc


def run_guarded(fn: Callable[[], None]) -> None:
    try:
        fn()
    except SelbergError as exc:
        err = {"schema": f"dirac-selberg/error/{SCHEMA_VERSION}",
               "error": {"code": exc.code, "message": str(exc), "exit_code": exc.exit_code}}
        click.echo(dumps(err), nl=False)
        sys.exit(exc.exit_code)
    except OverflowError as exc:
        err = {"schema": f"dirac-selberg/error/{SCHEMA_VERSION}",
               "error": {"code": "overflow", "message": str(exc),
                         "exit_code": NumericalError.exit_code}}
        click.echo(dumps(err), nl=False)
        sys.exit(NumericalError.exit_code)


# ---------------------------------------------------------------- options

def surface_options(f):
    f = click.option("--surface", default=None,
                     help="Surface JSON path, or 'modular-torus' / 'thrice-punctured-sphere'.")(f)
    f = click.option("--traces", nargs=3, type=float, default=None,
                     help="Punctured torus from traces x y z (overrides --surface).")(f)
    return f


def truncation_options(f):
    f = click.option("--r-max", type=float, default=6.0, show_default=True)(f)
    f = click.option("--word-cap", type=int, default=14, show_default=True)(f)
    return f


def output_options(f):
    f = click.option("--format", "fmt", type=FORMATS, default="json", show_default=True)(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None)(f)
    return f


@click.group()
@click.version_option(__version__)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat JSON key/value file of option defaults (flags take precedence).")
@click.pass_context
def main(ctx: click.Context, config: str | None):
    """Spin-Dirac Selberg trace formula on hyperbolic surfaces."""
    if config:
        run_guarded(lambda: _load_config(ctx, config))


def _load_config(ctx: click.Context, config: str) -> None:
    """Flat key/value JSON; keys are option names, dashes or underscores."""
    flat = _read_json(config)
    if not isinstance(flat, dict) or any(isinstance(v, (dict, list)) for v in flat.values()):
        raise DomainError(f"{config} must be a flat JSON object", code="bad-config")
    flat = {k.replace("-", "_"): v for k, v in flat.items()}
    if "format" in flat:
        flat["fmt"] = flat.pop("format")
    ctx.default_map = {name: flat for name in main.commands}


# ---------------------------------------------------------------- surface

@main.command("surface")
@click.argument("kind", type=click.Choice(["punctured-torus", "thrice-punctured-sphere",
                                           "pinch-member"]))
@click.option("--traces", nargs=3, type=float, default=(3.0, 3.0, 3.0), show_default=True)
@click.option("--l", "l_value", type=float, default=None, help="Pinch length for pinch-member.")
@click.option("--spin", default=None, help="Optional sign string stored with the surface.")
@output_options
def cmd_surface(kind, traces, l_value, spin, fmt, out):
    """Build a surface presentation and print its document."""
    def go():
        if kind == "punctured-torus":
            surf = punctured_torus(*traces)
        elif kind == "thrice-punctured-sphere":
            surf = thrice_punctured_sphere()
        else:
            if l_value is None:
                raise DomainError("pinch-member needs --l", code="missing-parameter")
            surf = punctured_torus(*symmetric_traces(l_value))
            surf = SurfacePresentation(surf.generators, surf.parabolic_words, surf.genus,
                                       surf.cusp_count, surf.area, surf.relations,
                                       "pinch-member", {**surf.provenance, "l": l_value})
        sp = resolve_spin(spin, surf)
        doc = surface_document(surf, sp)
        rows = [{"generator": chr(ord("A") + i), "a": g.a, "b": g.b, "c": g.c, "d": g.d,
                 "trace": g.trace} for i, g in enumerate(surf.generators)]
        Emitter(fmt, out).emit(doc, rows, ["generator", "a", "b", "c", "d", "trace"])
    run_guarded(go)


# ---------------------------------------------------------------- spectrum

@main.command("spectrum")
@surface_options
@truncation_options
@click.option("--spin", default=None)
@output_options
def cmd_spectrum(surface, traces, r_max, word_cap, spin, fmt, out):
    """Enumerate the oriented primitive length spectrum."""
    def go():
        surf = load_surface(surface, traces)
        sp = resolve_spin(spin, surf)
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        warnings = []
        if sp is None:
            warnings.append("no --spin given: epsilon column omitted")
            click.echo("warning: no --spin given; epsilon column omitted", err=True)
        if spectrum.status != "complete":
            warnings.append(f"watermark {spectrum.complete_up_to:.6g} below requested r_max")
        rows = []
        for rec in spectrum.records:
            row = {"length": rec.length, "trace": rec.trace, "word": rec.key,
                   "primitive": rec.primitive, "orientation_pair_id": rec.orientation_pair_id}
            if sp is not None:
                row["epsilon"] = epsilon_from_record(sp, rec.representative, rec.trace)
            rows.append(row)
        columns = ["length", "trace", "word", "primitive"] + (["epsilon"] if sp else []) \
            + ["orientation_pair_id"]
        doc = {"schema": f"dirac-selberg/spectrum/{SCHEMA_VERSION}",
               "surface": surface_document(surf, sp), "metadata": spectrum_metadata(spectrum),
               "records": rows, "warnings": warnings}
        Emitter(fmt, out).emit(doc, rows, columns)
    run_guarded(go)


# ---------------------------------------------------------------- trace

@main.command("trace")
@surface_options
@truncation_options
@click.option("--spin", default=None)
@click.option("--family", type=click.Choice(["heat", "resolvent"]), default="heat")
@click.option("--T", "T_value", type=float, default=1.0, show_default=True)
@click.option("--s", "s_text", default="2", show_default=True)
@click.option("--s0", "s0_text", default="3", show_default=True)
@click.option("--n-max", type=int, default=None)
@click.option("--tol", type=float, default=1e-2, show_default=True)
@output_options
def cmd_trace(surface, traces, r_max, word_cap, spin, family, T_value, s_text, s0_text, n_max,
              tol, fmt, out):
    """Evaluate the three geometric-side terms for one test pair."""
    def go():
        surf = load_surface(surface, traces)
        sp = resolve_spin(spin, surf) or default_spin(surf)
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        if family == "heat":
            pair, params = heat_pair(T_value), {"T": T_value}
        else:
            s, s0 = parse_complex(s_text), parse_complex(s0_text)
            pair, params = resolvent_pair(s, s0), {"s": s, "s0": s0}
        g = geometric_side(surf, sp, pair, spectrum, n_max=n_max)
        err = g.hyperbolic_tail_bound + g.quadrature_err
        terms = {"identity": g.identity_term, "hyperbolic": g.hyperbolic_term,
                 "cusp": g.cusp_term, "total": g.total,
                 "hyperbolic_tail_bound": g.hyperbolic_tail_bound,
                 "quadrature_err": g.quadrature_err}
        check = check_block("spin Selberg trace formula, geometric side",
                            "total error bound (tail + quadrature) within tolerance",
                            err, tol, err <= tol)
        doc = result("trace", {"family": family, **params, "spin": str(sp), "n_max": n_max},
                     check, surface=surface_document(surf, sp),
                     spectrum=spectrum_metadata(spectrum), terms=terms)
        Emitter(fmt, out).emit(doc, [terms], list(terms))
    run_guarded(go)


# ---------------------------------------------------------------- heat

@main.command("heat")
@surface_options
@truncation_options
@click.option("--spin", default=None)
@click.option("--T", "T_values", type=float, multiple=True, required=True,
              help="Repeat or list after the flag: --T 1 --T 0.5.")
@click.option("--n-terms", type=int, default=1, show_default=True)
@output_options
def cmd_heat(surface, traces, r_max, word_cap, spin, T_values, n_terms, fmt, out):
    """Heat traces with their small-T asymptotic model."""
    def go():
        surf = load_surface(surface, traces)
        sp = resolve_spin(spin, surf) or default_spin(surf)
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        coeffs = heat_asymptotics(surf.area, surf.cusp_count, n_terms)
        rows = []
        for T in T_values:
            g = heat_trace_detail(surf, sp, spectrum, T)
            model = coeffs.model(T)
            rows.append({"T": T, "identity": g.identity_term, "hyperbolic": g.hyperbolic_term,
                         "cusp": g.cusp_term, "heat_trace": g.total,
                         "hyperbolic_tail_bound": g.hyperbolic_tail_bound,
                         "quadrature_err": g.quadrature_err, "asymptotic_model": model,
                         "scaled_remainder": (g.total - model) / T**n_terms})
        small = sorted((r for r in rows if r["T"] <= 0.2), key=lambda r: -r["T"])
        ratios = [abs(r["scaled_remainder"]) for r in small]
        ok = all(b <= a for a, b in zip(ratios, ratios[1:]))
        check = check_block("small-time heat-trace asymptotics",
                            "|heat_trace − model|/T^n nonincreasing as T decreases (T ≤ 0.2)",
                            ratios, "nonincreasing", ok if len(ratios) >= 2 else True)
        doc = result("heat", {"T": list(T_values), "n_terms": n_terms, "spin": str(sp)}, check,
                     spectrum=spectrum_metadata(spectrum), coefficients=list(coeffs.a),
                     rows=rows)
        Emitter(fmt, out).emit(doc, rows, list(rows[0]) if rows else [])
    run_guarded(go)


# ---------------------------------------------------------------- weyl

@main.command("weyl")
@surface_options
@truncation_options
@click.option("--spin", default=None)
@click.option("--T", "T_values", type=float, multiple=True, default=(1e-1, 1e-2, 1e-3),
              show_default=True)
@click.option("--tol", type=float, default=5e-2, show_default=True)
@output_options
def cmd_weyl(surface, traces, r_max, word_cap, spin, T_values, tol, fmt, out):
    """T·heat_trace(T) along decreasing T; tends to area/(4π)."""
    def go():
        surf = load_surface(surface, traces)
        sp = resolve_spin(spin, surf) or default_spin(surf)
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        pairs = weyl_limit_check(surf, sp, spectrum, T_values)
        limit = surf.area / (4 * math.pi)
        rows = [{"T": T, "T_heat_trace": v, "deviation": v - limit} for T, v in pairs]
        dev = abs(rows[-1]["deviation"])
        check = check_block("Weyl law from the heat trace",
                            "final T·heat_trace(T) within tolerance of area/(4π)", dev, tol,
                            dev <= tol)
        doc = result("weyl", {"T": list(T_values), "spin": str(sp)}, check, limit=limit,
                     spectrum=spectrum_metadata(spectrum), rows=rows)
        Emitter(fmt, out).emit(doc, rows, ["T", "T_heat_trace", "deviation"])
    run_guarded(go)


# ---------------------------------------------------------------- pinch

@main.command("pinch")
@click.option("--s", "s_text", default="2", show_default=True)
@click.option("--l", "l_values", type=float, multiple=True, default=(0.4, 0.2, 0.1, 0.05),
              show_default=True)
@click.option("--spin", default="-+", show_default=True)
@click.option("--r-max", type=float, default=4.5, show_default=True)
@click.option("--word-cap", type=int, default=12, show_default=True)
@click.option("--m-max", type=int, default=60, show_default=True)
@click.option("--T", "T_value", type=float, default=1.0, show_default=True,
              help="Heat parameter for the pinched-geodesic term.")
@output_options
def cmd_pinch(s_text, l_values, spin, r_max, word_cap, m_max, T_value, fmt, out):
    """Zeta stabilization and pinched-geodesic terms along the symmetric pinching family."""
    def go():
        s = parse_complex(s_text)
        family = pinch_family_symmetric(l_values)
        sp = SpinStructure.parse(spin)
        stab = pinch_zeta_stabilization(family, sp, s, r_max, word_cap, m_max)
        pair = heat_pair(T_value)
        target = -2 * math.log(2) * float(pair.v(0.0))
        rows = []
        for i, l in enumerate(stab.l_values):
            term = pinch_geodesic_term(l, pair, -1)
            rows.append({"l": l, "W": stab.W[i], "eta_rescaled": stab.eta_rescaled[i],
                         "difference": stab.differences[i - 1] if i else None,
                         "geodesic_term": term, "geodesic_term_limit": target})
        check = check_block("convergence of the zeta function under pinching",
                            "successive |W_t differences| decrease (Cauchy stabilization)",
                            list(stab.differences), "decreasing", stab.stabilizing)
        doc = result("pinch", {"s": s, "l": list(l_values), "spin": spin, "r_max": r_max,
                               "word_cap": word_cap, "m_max": m_max, "T": T_value}, check,
                     eta_limit=2 ** (1 - 2 * s), rows=rows)
        Emitter(fmt, out).emit(doc, rows, list(rows[0]))
    run_guarded(go)


# ---------------------------------------------------------------- zeta

@main.command("zeta")
@surface_options
@truncation_options
@click.option("--spin", default=None)
@click.option("--s", "s_texts", multiple=True, default=("2",), show_default=True)
@click.option("--s0", "s0_text", default="2", show_default=True)
@click.option("--m-max", type=int, default=40, show_default=True)
@click.option("--n-max", type=int, default=None)
@click.option("--spectral", type=click.Path(dir_okay=False), default=None,
              help="JSON with 'xi' and 'weights' (and optional 'source') for continuation.")
@click.option("--tol", type=float, default=1e-5, show_default=True)
@output_options
def cmd_zeta(surface, traces, r_max, word_cap, spin, s_texts, s0_text, m_max, n_max, spectral,
             tol, fmt, out):
    """Zeta values, logarithmic derivatives, continuation and functional-equation residuals."""
    def go():
        surf = load_surface(surface, traces)
        sp = resolve_spin(spin, surf) or default_spin(surf)
        spectrum = enumerate_length_spectrum(surf, r_max, word_cap)
        s0 = parse_complex(s0_text)
        spectral_input = None
        if spectral:
            d = _read_json(spectral)
            spectral_input = SpectralInput(tuple(d["xi"]), tuple(d["weights"]),
                                           d.get("source", "user"))
        anchor = None
        if spectral_input is not None:
            anchor = Anchor(s0, log_deriv_sum(spectrum, sp, s0, r_max, n_max))
        rows, worst = [], 0.0
        h = 1e-4
        for text in s_texts:
            s = parse_complex(text)
            row: dict[str, Any] = {"s": s}
            if s.real > 1:
                ev = zeta(spectrum, sp, s, r_max, m_max)
                d = log_deriv_sum(spectrum, sp, s, r_max, n_max)
                fd = (zeta(spectrum, sp, s + h, r_max, m_max).log_value
                      - zeta(spectrum, sp, s - h, r_max, m_max).log_value) / (2 * h)
                row.update(log_zeta=ev.log_value, zeta=ev.value, tail_bound=ev.tail_bound,
                           log_derivative=d, derivative_mismatch=abs(fd - d))
                worst = max(worst, abs(fd - d))
            if anchor is not None:
                row["continued_log_derivative"] = log_deriv_continuation(
                    s, s0, spectral_input, surf.area, surf.cusp_count, anchor.value)
                if abs(math.cos(math.pi * s.real)) > 1e-6 or s.imag:
                    fe = functional_equation_residual(s, spectral_input, surf.area,
                                                      surf.cusp_count, anchor)
                    row["functional_equation_residual"] = fe
                    worst = max(worst, abs(fe))
            rows.append(row)
        check = check_block("continuation and functional equation of the Selberg zeta function",
                            "max of FE residuals and scaled product/derivative mismatches",
                            worst, tol, worst <= tol)
        doc = result("zeta", {"s": [parse_complex(t) for t in s_texts], "s0": s0,
                              "r_max": r_max, "m_max": m_max, "n_max": n_max, "spin": str(sp),
                              "spectral": spectral}, check,
                     spectrum=spectrum_metadata(spectrum), rows=rows)
        columns = sorted({k for r in rows for k in r}, key=lambda c: (c != "s", c))
        Emitter(fmt, out).emit(doc, rows, columns)
    run_guarded(go)


# ---------------------------------------------------------------- compare

@main.command("compare")
@click.argument("surface_a", type=click.Path(dir_okay=False))
@click.argument("surface_b", type=click.Path(dir_okay=False))
@click.option("--r-max", type=float, default=4.0, show_default=True)
@click.option("--word-cap", type=int, default=12, show_default=True)
@click.option("--spin-a", default=None)
@click.option("--spin-b", default=None)
@output_options
def cmd_compare(surface_a, surface_b, r_max, word_cap, spin_a, spin_b, fmt, out):
    """Compare two surfaces' ε-marked length spectra, areas and cusp counts."""
    def go():
        docs = [_read_json(surface_a), _read_json(surface_b)]
        surfs = [surface_from_document(d) for d in docs]
        spins = [resolve_spin(t, s, d.get("spin")) or default_spin(s)
                 for t, s, d in zip((spin_a, spin_b), surfs, docs)]
        spectra = [enumerate_length_spectrum(s, r_max, word_cap) for s in surfs]
        v = isospectral_compare(surfs[0], spins[0], spectra[0], surfs[1], spins[1], spectra[1],
                                r_max)
        check = check_block("isospectrality from the trace formula",
                            "areas, cusp counts and ε-marked length spectra agree up to r_max",
                            v.verdict, 1e-8, True)
        doc = result("compare", {"a": surface_a, "b": surface_b, "r_max": r_max,
                                 "word_cap": word_cap, "spin_a": str(spins[0]),
                                 "spin_b": str(spins[1])}, check,
                     verdict=v.verdict, indistinguishable=v.indistinguishable,
                     witness=v.witness, compared_classes=v.compared_classes,
                     spectra=[spectrum_metadata(s) for s in spectra])
        row = {"verdict": v.verdict, "indistinguishable": v.indistinguishable,
               "witness": json.dumps(v.witness) if v.witness else ""}
        Emitter(fmt, out).emit(doc, [row], list(row))
    run_guarded(go)



if __name__ == "__main__":
    main()
