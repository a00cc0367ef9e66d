"""Least-squares building blocks for continuous piecewise-linear fits.

Fits are parameterised by their values at the breakpoints (hat basis), so
continuity never has to be imposed as a constraint. Because every
breakpoint of a fixed-knot fit here is a data abscissa, the hat-basis
design matrix is lower bidiagonal when rows are taken in order of
increasing ``x``; the QR factor is therefore upper bidiagonal and is built
with Givens rotations one piece at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import DataSet


class RankDeficiencyError(ArithmeticError):
    """A fixed-knot system without full column rank."""


@dataclass(frozen=True)
class BrokenLine:
    """Continuous piecewise-linear function through ``(breakpoints[j], values[j])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if xi.shape != v.shape or xi.ndim != 1 or xi.size < 2:
            raise ValueError("need matching 1-d breakpoints/values, length >= 2")
        if np.any(np.diff(xi) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", xi)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        """Evaluate; points outside the breakpoint range follow the end pieces."""
        x = np.asarray(x, dtype=float)
        xi, v = self.breakpoints, self.values
        j = np.clip(np.searchsorted(xi, x, side="right") - 1, 0, xi.size - 2)
        w = (x - xi[j]) / (xi[j + 1] - xi[j])
        out = v[j] + w * (v[j + 1] - v[j])
        return float(out) if out.ndim == 0 else out

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    @property
    def intercepts(self) -> np.ndarray:
        return self.values[:-1] - self.slopes * self.breakpoints[:-1]

    def pieces(self):
        """``(slope, intercept, from, to)`` for every linear piece."""
        return [(float(s), float(c), float(a), float(b)) for s, c, a, b in zip(
            self.slopes, self.intercepts, self.breakpoints[:-1], self.breakpoints[1:])]


@dataclass(frozen=True)
class Line:
    """Straight line through two points; used for the end pieces of fits."""

    x0: float
    v0: float
    x1: float
    v1: float

    def __call__(self, x: float) -> float:
        return self.v0 + (self.v1 - self.v0) * ((x - self.x0) / (self.x1 - self.x0))

    @property
    def slope(self) -> float:
        return (self.v1 - self.v0) / (self.x1 - self.x0)

    @property
    def intercept(self) -> float:
        return self.v0 - self.slope * self.x0


@dataclass(frozen=True)
class SegmentFit:
    """Best fixed-knot fit on one contiguous index range."""

    lo: int
    hi: int
    breakpoint_indices: tuple
    fit: BrokenLine
    residual_sq: float

    @property
    def left_line(self) -> Line:
        xi, v = self.fit.breakpoints, self.fit.values
        return Line(xi[0], v[0], xi[1], v[1])

    @property
    def right_line(self) -> Line:
        xi, v = self.fit.breakpoints, self.fit.values
        return Line(xi[-2], v[-2], xi[-1], v[-1])

    @property
    def boundary_lines(self):
        """Leftmost and rightmost pieces as ``(slope, intercept)`` pairs."""
        a, b = self.left_line, self.right_line
        return (a.slope, a.intercept), (b.slope, b.intercept)


def givens(a: float, b: float):
    """Rotation ``(r, c, s)`` with ``c*a + s*b = r`` and ``-s*a + c*b = 0``."""
    r = math.sqrt(a * a + b * b)
    if r == 0.0:
        return 0.0, 1.0, 0.0
    return r, a / r, b / r


class PieceBlocks:
    """Triangular factors of every single-piece subproblem of a data set.

    For abscissa indices ``a < b`` the points ``a+1..b`` expressed in the
    two hat functions anchored at ``x_a`` and ``x_b`` reduce, by Givens QR,
    to ``[[r11, r12], [0, r22]]`` with transformed right-hand side
    ``(g1, g2)`` and annihilated residual ``rsq``. These are stored in
    ``(n, n)`` arrays indexed ``[a, b]``.
    """

    def __init__(self, data: DataSet):
        x = data.abscissae
        f = data.values
        n = x.size
        self.n = n
        self.x = x
        self.f = f
        shape = (n, n)
        self.r11 = np.zeros(shape)
        self.r12 = np.zeros(shape)
        self.r22 = np.zeros(shape)
        self.g1 = np.zeros(shape)
        self.g2 = np.zeros(shape)
        self.rsq = np.zeros(shape)
        xl = x.tolist()
        fl = f.tolist()
        for a in range(n - 1):
            for b in range(a + 1, n):
                self._build(xl, fl, a, b)

    def _build(self, x, f, a, b):
        h = x[b] - x[a]
        r11 = r12 = r22 = g1 = g2 = rsq = 0.0
        row1 = row2 = False
        for i in range(a + 1, b + 1):
            wb = (x[i] - x[a]) / h
            wa = (x[b] - x[i]) / h
            y = f[i]
            if not row1:
                r11, r12, g1 = wa, wb, y
                row1 = True
                continue
            r, c, s = givens(r11, wa)
            r11 = r
            w = -s * r12 + c * wb
            r12 = c * r12 + s * wb
            y1 = -s * g1 + c * y
            g1 = c * g1 + s * y
            if not row2:
                r22, g2 = w, y1
                row2 = True
                continue
            r, c, s = givens(r22, w)
            r22 = r
            y2 = -s * g2 + c * y1
            g2 = c * g2 + s * y1
            rsq += y2 * y2
        self.r11[a, b] = r11
        self.r12[a, b] = r12
        self.r22[a, b] = r22
        self.g1[a, b] = g1
        self.g2[a, b] = g2
        self.rsq[a, b] = rsq


class SegmentQR:
    """Incremental QR of a fixed-knot fit whose breakpoints are data
    abscissae ``lo = b_0 < b_1 < ...``.

    ``extend(b)`` appends a breakpoint and absorbs the points of the new
    piece in O(1) using :class:`PieceBlocks`.
    """

    __slots__ = ("blocks", "bp", "d", "e", "g", "rsq")

    def __init__(self, blocks: PieceBlocks, lo: int):
        self.blocks = blocks
        self.bp = [lo]
        self.d = [1.0]
        self.e = [0.0]
        self.g = [float(blocks.f[lo])]
        self.rsq = 0.0

    def copy(self) -> "SegmentQR":
        other = SegmentQR.__new__(SegmentQR)
        other.blocks = self.blocks
        other.bp = self.bp[:]
        other.d = self.d[:]
        other.e = self.e[:]
        other.g = self.g[:]
        other.rsq = self.rsq
        return other

    def extend(self, b: int) -> None:
        B = self.blocks
        a = self.bp[-1]
        if b <= a:
            raise ValueError("breakpoints must increase")
        r11, r12, r22 = B.r11[a, b], B.r12[a, b], B.r22[a, b]
        g1, g2 = B.g1[a, b], B.g2[a, b]
        m = len(self.bp) - 1
        r, c, s = givens(self.d[m], r11)
        g_old = self.g[m]
        self.d[m] = r
        self.e[m] = s * r12
        self.g[m] = c * g_old + s * g1
        w = c * r12
        y1 = -s * g_old + c * g1
        r, c, s = givens(w, r22)
        if r == 0.0:
            raise RankDeficiencyError(f"piece ({a}, {b}) adds no information")
        y2 = -s * y1 + c * g2
        self.bp.append(b)
        self.d.append(r)
        self.e.append(0.0)
        self.g.append(c * y1 + s * g2)
        self.rsq += float(B.rsq[a, b]) + y2 * y2

    def solve(self) -> list:
        """Breakpoint values by back substitution."""
        m = len(self.bp) - 1
        if m < 1:
            raise RankDeficiencyError("a fit needs at least two breakpoints")
        v = [0.0] * (m + 1)
        v[m] = self.g[m] / self.d[m]
        for i in range(m - 1, -1, -1):
            v[i] = (self.g[i] - self.e[i] * v[i + 1]) / self.d[i]
        return v


def fit_fixed_knots(data: DataSet, index_range, data_knots: Sequence[int] = (),
                    blocks: PieceBlocks | None = None) -> SegmentFit:
    """Least-squares continuous broken line on ``x[lo..hi]`` with breakpoints
    at ``x[lo]``, ``x[j]`` for ``j`` in ``data_knots``, and ``x[hi]``.

    With no knots this is ordinary straight-line regression.
    """
    lo, hi = (int(i) for i in index_range)
    if not 0 <= lo < hi < len(data):
        raise ValueError(
            f"index range [{lo}, {hi}] must hold >= 2 points of the data")
    knots = [int(j) for j in data_knots]
    if any(not lo < j < hi for j in knots) or any(
            a >= b for a, b in zip(knots, knots[1:])):
        raise ValueError("data knots must increase strictly inside the range")
    if blocks is None:
        blocks = PieceBlocks(data)
    qr = SegmentQR(blocks, lo)
    for j in knots:
        qr.extend(j)
    qr.extend(hi)
    v = qr.solve()
    bp = tuple(qr.bp)
    fit = BrokenLine(data.abscissae[list(bp)], v)
    return SegmentFit(lo, hi, bp, fit, qr.rsq)


def residual_norm(data: DataSet, s) -> float:
    """Euclidean norm of ``F - s(X)``."""
    r = data.values - np.asarray(s(data.abscissae), dtype=float)
    return float(np.sqrt(np.dot(r, r)))


def divided_differences(data: DataSet):
    """First-order differences ``(f[j+1] - f[j]) / (x[j+1] - x[j])`` for
    ``j = 0..mu`` and central second-order differences
    ``(f[j+1] - 2 f[j] + f[j-1]) / (x[j+1] - x[j])**2`` for ``j = 1..mu``.

    The second array has length ``mu``; its element ``j - 1`` belongs to
    abscissa ``j``. The squared forward spacing is used as denominator for
    any spacing.
    """
    x, f = data.abscissae, data.values
    d1 = np.diff(f) / np.diff(x)
    d2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / (x[2:] - x[1:-1]) ** 2
    return d1, d2


def hat_design(x: np.ndarray, breakpoints: Sequence[float]) -> np.ndarray:
    """Hat-basis design matrix ``H[i, j] = phi_j(x[i])`` for arbitrary
    increasing breakpoints covering ``x``."""
    xi = np.asarray(breakpoints, dtype=float)
    x = np.asarray(x, dtype=float)
    H = np.zeros((x.size, xi.size))
    j = np.clip(np.searchsorted(xi, x, side="right") - 1, 0, xi.size - 2)
    w = (x - xi[j]) / (xi[j + 1] - xi[j])
    rows = np.arange(x.size)
    H[rows, j] = 1.0 - w
    H[rows, j + 1] += w
    return H
