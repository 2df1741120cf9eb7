"""JSON documents for surfaces, spectra and results; deterministic and round-trip exact."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Any

from .errors import DomainError
from .hyperbolic import UnimodularMatrix
from .surfaces import LengthSpectrum, SurfacePresentation, Word

SCHEMA_VERSION = "v1"


def to_jsonable(obj: Any) -> Any:
    """Complex → {"re", "im"}; non-finite floats → strings; tuples → lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return to_jsonable(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: Any) -> str:
    # float repr is the shortest string that round-trips bitwise
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def surface_document(surface: SurfacePresentation, spin=None) -> dict:
    doc = {
        "schema": f"dirac-selberg/surface/{SCHEMA_VERSION}",
        "name": surface.name,
        "generators": [[g.a, g.b, g.c, g.d] for g in surface.generators],
        "parabolic_words": [str(w) for w in surface.parabolic_words],
        "relations": [str(w) for w in surface.relations],
        "genus": surface.genus,
        "cusp_count": surface.cusp_count,
        "area": surface.area,
        "provenance": surface.provenance,
    }
    if spin is not None:
        doc["spin"] = list(spin.signs)
    return doc


def surface_from_document(doc: dict) -> SurfacePresentation:
    try:
        gens = tuple(UnimodularMatrix(*map(float, row)) for row in doc["generators"])
        return SurfacePresentation(
            gens, tuple(Word.parse(w) for w in doc["parabolic_words"]), int(doc["genus"]),
            int(doc["cusp_count"]), float(doc["area"]),
            tuple(Word.parse(w) for w in doc.get("relations", [])), doc.get("name", "custom"),
            dict(doc.get("provenance", {})))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed surface document: {exc}", code="bad-surface") from exc


def spectrum_metadata(spectrum: LengthSpectrum) -> dict:
    return {
        "r_max": spectrum.r_max,
        "word_cap": spectrum.word_length_cap,
        "complete_up_to": spectrum.complete_up_to,
        "status": spectrum.status,
        "certificate": spectrum.certificate,
        "tail_constant": spectrum.tail_constant,
        "overflow": spectrum.overflow,
        "records": len(spectrum.records),
    }


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in columns})
    return buf.getvalue()


def _cell(value: Any) -> Any:
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    if isinstance(value, float):
        return repr(value)
    return value


def rows_to_table(rows: list[dict], columns: list[str]) -> str:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.10g}"
        if isinstance(v, complex):
            return f"{v.real:.10g}{v.imag:+.10g}j"
        return str(v)

    cells = [[fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"
