"""Brute-force reference solvers used to certify search results.

Nothing here shares code with the enumeration, segmentation or assembly
steps; fits are computed from a dense hat-basis design matrix with
arbitrary breakpoints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .assembly import Candidate
from .dataset import DataSet
from .lsq import BrokenLine, residual_norm

DEFAULT_BUDGET = 2_000_000
BATCH = 2048


class BudgetExceeded(RuntimeError):
    """The number of knot subsets exceeds the oracle's budget."""


@dataclass(frozen=True)
class GridSpec:
    """``refinement`` equispaced knot candidates inside every data interval."""

    refinement: int = 1

    def __post_init__(self):
        if int(self.refinement) < 1:
            raise ValueError("grid refinement must be >= 1")


def grid_candidates(data: DataSet, grid: GridSpec) -> np.ndarray:
    """Inner abscissae ``x_1..x_mu`` plus ``g`` equispaced points strictly
    inside each interval ``(x_i, x_{i+1})``, sorted."""
    x = data.abscissae
    g = int(grid.refinement)
    frac = np.arange(1, g + 1) / (g + 1)
    inner = (x[:-1, None] + frac[None, :] * np.diff(x)[:, None]).ravel()
    return np.sort(np.concatenate([x[1:-1], inner]))


def _batch_residuals(x, f, knots):
    """Least-squares residual norms of broken lines on ``x`` with
    breakpoints ``[x0, *knots[b], x_end]`` for every row ``b``."""
    nb, k = knots.shape
    bp = np.empty((nb, k + 2))
    bp[:, 0] = x[0]
    bp[:, -1] = x[-1]
    bp[:, 1:-1] = knots
    j = (bp[:, None, :] <= x[None, :, None]).sum(axis=2) - 1
    np.clip(j, 0, k, out=j)
    lo = np.take_along_axis(bp, j, axis=1)
    hi = np.take_along_axis(bp, j + 1, axis=1)
    w = (x[None, :] - lo) / (hi - lo)
    cols = np.arange(k + 2)
    H = ((1.0 - w)[..., None] * (cols == j[..., None])
         + w[..., None] * (cols == (j + 1)[..., None]))
    U, s, _ = np.linalg.svd(H, full_matrices=False)
    keep = s > s[:, :1] * (max(H.shape[1:]) * np.finfo(float).eps)
    proj = np.einsum("bnp,n->bp", U, f) * keep
    r = f[None, :] - np.einsum("bnp,bp->bn", U, proj)
    return np.sqrt(np.einsum("bn,bn->b", r, r))


def grid_oracle(data: DataSet, k: int, grid: GridSpec = GridSpec(),
                budget: int = DEFAULT_BUDGET) -> float:
    """Smallest residual over all broken lines whose ``k`` knots are drawn
    from :func:`grid_candidates`.

    An upper bound on the free-knot optimum. It can only decrease along
    nested grids, i.e. from ``g`` to ``g'`` when ``g + 1`` divides
    ``g' + 1``.
    """
    if k < 1 or data.mu < k + 1:
        raise ValueError(f"need k >= 1 and mu >= k+1 (mu={data.mu}, k={k})")
    cand = grid_candidates(data, grid)
    total = math.comb(cand.size, k)
    if total > budget:
        raise BudgetExceeded(
            f"{total} knot subsets exceed the oracle budget of {budget}")
    x = np.asarray(data.abscissae, dtype=float)
    f = np.asarray(data.values, dtype=float)
    best = math.inf
    combos = itertools.combinations(range(cand.size), k)
    while True:
        idx = np.array(list(itertools.islice(combos, BATCH)), dtype=np.intp)
        if idx.size == 0:
            break
        best = min(best, float(_batch_residuals(x, f, cand[idx]).min()))
    return best


def _two_knot_pieces(base: Candidate):
    if len(base.knots) != 2:
        raise ValueError("the family is defined for two-knot fits only")
    left, right = base.spline.pieces()[0], base.spline.pieces()[-1]
    return (left[0], left[1]), (right[0], right[1])


def family_member(base: Candidate, y1: float, y2: float) -> BrokenLine:
    """``base`` with its middle piece replaced by the chord from
    ``(y1, left(y1))`` to ``(y2, right(y2))``, where ``left``/``right`` are
    the outer pieces of ``base`` extended."""
    (m1, c1), (m3, c3) = _two_knot_pieces(base)
    t1, t2 = (float(t) for t in base.knots)
    if not t1 <= y1 < y2 <= t2:
        raise ValueError(f"need t1 <= y1 < y2 <= t2, got y1={y1}, y2={y2}")
    x0, xe = base.spline.breakpoints[0], base.spline.breakpoints[-1]
    return BrokenLine([x0, y1, y2, xe],
                      [m1 * x0 + c1, m1 * y1 + c1, m3 * y2 + c3, m3 * xe + c3])


def nonuniqueness_family_residual(data: DataSet, base: Candidate,
                                  y1: float, y2: float,
                                  rtol: float = 1e-9) -> float:
    """Residual of :func:`family_member` ``(base, y1, y2)`` on ``data``.

    The middle piece of ``base`` may only be moved if no data abscissa lies
    strictly between the two knots, or a single one that ``base``
    reproduces exactly (then see :func:`pinned_left_knot`); otherwise
    ``ValueError`` is raised.
    """
    t1, t2 = (float(t) for t in base.knots)
    x, f = data.abscissae, data.values
    inside = np.flatnonzero((x > t1) & (x < t2))
    if inside.size > 1:
        raise ValueError(
            f"{inside.size} abscissae lie between the knots; the middle piece "
            "is determined by the data")
    scale = max(1.0, float(np.max(np.abs(f))))
    for i in inside:
        if abs(base.spline(x[i]) - f[i]) > rtol * scale:
            raise ValueError(
                f"abscissa x[{i}] lies between the knots and is not reproduced")
    return residual_norm(data, family_member(base, y1, y2))


def pinned_left_knot(base: Candidate, y2: float, pivot: tuple) -> float:
    """Left knot ``y1`` of the family member whose middle piece passes
    through ``pivot = (x, value)`` and ends at ``(y2, right(y2))``.

    Used when a data point between the knots is reproduced: only one of
    the two knots is then free.
    """
    (m1, c1), (m3, c3) = _two_knot_pieces(base)
    px, py = (float(v) for v in pivot)
    if not y2 > px:
        raise ValueError("y2 must lie to the right of the pivot")
    mc = (m3 * y2 + c3 - py) / (y2 - px)
    if mc == m1:
        raise ValueError("chord parallel to the left piece")
    y1 = (py - mc * px - c1) / (m1 - mc)
    t1, t2 = (float(t) for t in base.knots)
    # at y2 = t2 the exact answer is t1; absorb rounding
    if 0 < t1 - y1 <= 1e-9 * (t2 - t1):
        y1 = t1
    return y1
