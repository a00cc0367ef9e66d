"""Glue segment fits together at their crossing points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import DataSet
from .lsq import BrokenLine, Line, SegmentFit

# Lines whose values at both gap ends agree to this relative precision are
# treated as identical; such a pair is glued at the gap midpoint.
IDENTICAL_RTOL = 1e-12
# Crossings this close (relative to the gap width) to a gap end are rejected.
ENDPOINT_RTOL = 1e-12


@dataclass(frozen=True)
class Candidate:
    spline: BrokenLine
    knots: tuple
    residual: float
    source_vector: tuple
    # knot indices that sit strictly between two abscissae
    interior: tuple = ()

    @property
    def residual_sq(self) -> float:
        return self.residual * self.residual


def cross_in_gap(l0: float, l1: float, r0: float, r1: float,
                 xa: float, xb: float) -> Optional[float]:
    """Crossing of two lines given by their values at the gap ends
    ``xa < xb`` (``l*`` for the left line, ``r*`` for the right one)."""
    d0 = l0 - r0
    d1 = l1 - r1
    scale = max(abs(l0), abs(l1), abs(r0), abs(r1))
    tol = IDENTICAL_RTOL * scale
    if abs(d0) <= tol and abs(d1) <= tol:
        return 0.5 * (xa + xb)
    if (d0 > 0.0 and d1 < 0.0) or (d0 < 0.0 and d1 > 0.0):
        t = d0 / (d0 - d1)
        if ENDPOINT_RTOL < t < 1.0 - ENDPOINT_RTOL:
            return xa + t * (xb - xa)
    return None


def intersect_in_gap(left_piece, right_piece, gap) -> Optional[float]:
    """Crossing of ``y = m1*x + c1`` and ``y = m2*x + c2`` strictly inside
    the open interval ``gap``.

    Identical lines give the gap midpoint; parallel distinct lines, or a
    crossing outside (or on the boundary of) the gap, give ``None``.
    """
    (m1, c1), (m2, c2) = left_piece, right_piece
    xa, xb = (float(g) for g in gap)
    if not xa < xb:
        raise ValueError("gap must be a nonempty open interval")
    return cross_in_gap(m1 * xa + c1, m1 * xb + c1, m2 * xa + c2, m2 * xb + c2,
                        xa, xb)


def join(prev: Line, nxt: Line, xa: float, xb: float) -> Optional[float]:
    """Crossing of the right end piece ``prev`` and left end piece ``nxt``
    inside ``(xa, xb)``."""
    return cross_in_gap(prev(xa), prev(xb), nxt(xa), nxt(xb), xa, xb)


def assemble(fits: Sequence[SegmentFit], gaps: Sequence[int],
             data: DataSet) -> Optional[Candidate]:
    """Glue consecutive segment fits; ``gaps[l]`` is the index ``i`` of the
    interval ``(x_i, x_{i+1})`` between ``fits[l]`` and ``fits[l+1]``.

    Returns ``None`` when some pair of neighbouring fits does not cross
    inside its gap.
    """
    if len(fits) != len(gaps) + 1:
        raise ValueError("need exactly one gap between consecutive fits")
    x = data.abscissae
    crossings = []
    for l, g in enumerate(gaps):
        if fits[l].hi != g or fits[l + 1].lo != g + 1:
            raise ValueError(f"gap {g} does not separate fits {l} and {l + 1}")
        z = join(fits[l].right_line, fits[l + 1].left_line, x[g], x[g + 1])
        if z is None:
            return None
        crossings.append(z)
    return _glue(fits, gaps, crossings, data)


def _glue(fits, gaps, crossings, data) -> Candidate:
    x = data.abscissae
    bp = [float(x[0])]
    vals = [float(fits[0].fit.values[0])]
    knots = []
    interior = []
    code = []
    for l, fit in enumerate(fits):
        if l > 0:
            z = crossings[l - 1]
            interior.append(len(knots))
            knots.append(z)
            bp.append(z)
            vals.append(fits[l - 1].right_line(z))
            code.append(2 * gaps[l - 1])
        for idx, v in zip(fit.breakpoint_indices[1:-1], fit.fit.values[1:-1]):
            knots.append(float(x[idx]))
            bp.append(float(x[idx]))
            vals.append(float(v))
            code.append(2 * idx - 1)
    bp.append(float(x[-1]))
    vals.append(float(fits[-1].fit.values[-1]))
    rsq = sum(f.residual_sq for f in fits)
    return Candidate(BrokenLine(bp, vals), tuple(knots), float(np.sqrt(rsq)),
                     tuple(code), tuple(interior))


def classify_knots(c: Candidate, tol: float = 1e-9) -> list:
    """``True`` for every proper knot (the slope changes there), judged by
    ``|slope_right - slope_left| > tol * (1 + |slope_left|)``."""
    slopes = c.spline.slopes
    out = []
    for j in range(len(c.knots)):
        left, right = slopes[j], slopes[j + 1]
        out.append(bool(abs(right - left) > tol * (1.0 + abs(left))))
    return out
