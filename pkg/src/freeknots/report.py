"""Serialize fit results: JSON reports and plot samples."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .assembly import Candidate, classify_knots
from .dataset import format_float
from .search import FitResult

PROPER_TOL = 1e-9


def fit_report(result: FitResult, proper_tol: float = PROPER_TOL) -> dict:
    """Plain-data report of a search result."""
    c = result.best
    st = result.stats
    stats = {
        "examined": st.examined,
        "regular": st.regular,
        "rejected": st.rejected_no_intersection,
        "pruned": st.pruned,
        "elapsed_ms": st.elapsed * 1000.0,
    }
    if c is None:
        return {"knots": [], "pieces": [], "residual": None,
                "source_vector": None, "stats": stats,
                "complete": result.complete}
    proper = classify_knots(c, proper_tol)
    return {
        "knots": [{"t": float(t), "proper": p} for t, p in zip(c.knots, proper)],
        "pieces": [{"slope": s, "intercept": b, "from": lo, "to": hi}
                   for s, b, lo, hi in c.spline.pieces()],
        "residual": float(c.residual),
        "source_vector": [int(v) for v in c.source_vector],
        "stats": stats,
        "complete": result.complete,
    }


def mbc_mic(knots, kappa0: float) -> tuple:
    """Concentrations ``kappa0 * 2**-t`` at the two knots ``t1 < t2``."""
    if not kappa0 > 0:
        raise ValueError("kappa0 must be positive")
    if len(knots) != 2:
        raise ValueError("MBC/MIC need exactly two knots")
    t1, t2 = (float(t) for t in knots)
    return kappa0 * 2.0 ** (-t1), kappa0 * 2.0 ** (-t2)


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite number in report")
        text = format_float(obj)
        # keep floats recognizable as floats after parsing
        if all(ch not in text for ch in ".eE"):
            text += ".0"
        out.append(text)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for n, (key, val) in enumerate(obj.items()):
            if n:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for n, val in enumerate(obj):
            if n:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(report: dict) -> str:
    """JSON text with every float written to 17 significant digits."""
    out: list = []
    _encode(report, out)
    return "".join(out) + "\n"


def plot_samples(c: Candidate, dense: int = 16) -> list:
    """``(x, s(x))`` pairs along the fitted broken line.

    Each piece contributes its two end points, evaluated from that piece's
    own formula (so every breakpoint appears once from each side), plus
    ``dense`` evenly spaced interior samples.
    """
    rows = []
    for slope, icpt, lo, hi in c.spline.pieces():
        xs = [lo] + [lo + (hi - lo) * j / (dense + 1) for j in range(1, dense + 1)] + [hi]
        rows.extend((x, slope * x + icpt) for x in xs)
    return rows


def write_plot_csv(path, c: Candidate, dense: int = 16) -> None:
    lines = ["x,s(x)"]
    lines += [f"{format_float(x)},{format_float(y)}" for x, y in plot_samples(c, dense)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
