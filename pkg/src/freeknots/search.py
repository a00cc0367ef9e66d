"""Exhaustive search over regular position vectors.

The vectors are split into chunks by a fixed-length prefix. Chunks are
processed in rounds; every chunk of a round starts from the best residual
known at the end of the previous round, so the work done (and all counters)
does not depend on how many threads run the round.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assembly import Candidate, _glue, join
from .dataset import DataSet
from .lsq import PieceBlocks, SegmentQR, BrokenLine, SegmentFit, divided_differences
from .positions import completion_counts, regular_prefixes
from .segmentation import segmentize
from . import _pykernel

try:
    if os.environ.get("FREEKNOTS_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernel as _default_backend
except ImportError:
    _default_backend = _pykernel

BACKENDS = {"python": _pykernel}
if _default_backend is not _pykernel:
    BACKENDS["cython"] = _default_backend

# Residuals within this fraction of ||F|| of the minimum count as ties.
TIE_RTOL = 1e-12
ROUND_SIZE = 16
MIN_CHUNKS = 64


def backend_name() -> str:
    """Name of the kernel used by default (``"cython"`` or ``"python"``)."""
    return _default_backend.BACKEND


@dataclass(frozen=True)
class SearchOptions:
    threads: int = 1
    time_limit: Optional[float] = None
    prioritize: bool = True
    prune: bool = True

    def __post_init__(self):
        if int(self.threads) < 1:
            raise ValueError("threads must be >= 1")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


@dataclass
class SearchStats:
    examined: int = 0
    regular: int = 0
    rejected_no_intersection: int = 0
    pruned: int = 0
    elapsed: float = 0.0


@dataclass
class FitResult:
    best: Optional[Candidate]
    complete: bool
    stats: SearchStats = field(default_factory=SearchStats)


def evaluate_vector(p: Sequence[int], data: DataSet, cutoff: float = math.inf,
                    blocks: PieceBlocks | None = None) -> Optional[Candidate]:
    """Best broken line whose knots are placed as coded by the regular
    vector ``p``, or ``None`` if two neighbouring segment fits do not cross
    inside their gap or the residual exceeds ``cutoff``."""
    seg = segmentize(p, data.mu)
    if blocks is None:
        blocks = PieceBlocks(data)
    cutoff_sq = cutoff * cutoff if math.isfinite(cutoff) else math.inf
    x = data.abscissae
    fits = []
    crossings = []
    closed = 0.0
    for l, S in enumerate(seg.segments):
        qr = SegmentQR(blocks, S.lo)
        for j in S.data_knots:
            qr.extend(j)
        qr.extend(S.hi)
        v = qr.solve()
        fit = SegmentFit(S.lo, S.hi, tuple(qr.bp),
                         BrokenLine(x[qr.bp], v), qr.rsq)
        if l > 0:
            g = seg.gaps[l - 1]
            z = join(fits[-1].right_line, fit.left_line, float(x[g]), float(x[g + 1]))
            if z is None:
                return None
            crossings.append(z)
        closed = closed + fit.residual_sq
        if closed > cutoff_sq:
            return None
        fits.append(fit)
    return _glue(fits, seg.gaps, crossings, data)


def priority_weights(data: DataSet) -> np.ndarray:
    """Weight of every code ``1..2*mu-1``: ``|second difference|`` at the
    abscissa of a data knot, and the larger of the two neighbouring values
    for a knot between abscissae."""
    mu = data.mu
    _, d2 = divided_differences(data)
    a = np.zeros(mu + 2)
    a[1:mu + 1] = np.abs(d2)
    w = np.zeros(2 * mu)
    for c in range(1, 2 * mu):
        i = c // 2
        w[c] = a[(c + 1) // 2] if c % 2 else max(a[i], a[i + 1])
    return w


def prioritize_order(data: DataSet, prefixes: Sequence[tuple]) -> list:
    """Chunks ordered by decreasing weight of their first component; ties
    keep lexicographic order."""
    w = priority_weights(data)
    return sorted(prefixes, key=lambda p: (-w[p[0]], p))


def chunk_prefixes(mu: int, k: int, target: int = MIN_CHUNKS) -> list:
    """Shortest prefix length giving at least ``target`` nonempty chunks
    (or full vectors if there are fewer)."""
    for length in range(1, k + 1):
        out = list(regular_prefixes(mu, k, length))
        if len(out) >= target:
            return out
    return out


def run_search(data: DataSet, k: int, opts: SearchOptions | None = None,
               backend=None) -> FitResult:
    """Least-squares broken line with ``k`` free knots.

    Among all vectors attaining the minimum (up to ``TIE_RTOL * ||F||``)
    the lexicographically smallest is reported.
    """
    opts = opts or SearchOptions()
    mu = data.mu
    k = int(k)
    if k < 1:
        raise ValueError(f"need k >= 1, got k={k}")
    if k >= mu:
        raise ValueError(
            f"k={k} knots with only {mu + 2} points: the data are exactly "
            "reproducible by a broken line, nothing to search")
    backend = backend or _default_backend
    if isinstance(backend, str):
        backend = BACKENDS[backend]
    start = time.monotonic()
    deadline = None if opts.time_limit is None else start + opts.time_limit

    blocks = PieceBlocks(data)
    counts = completion_counts(mu, k)
    ctx = backend.Context(data.abscissae, data.values, mu, k, blocks, counts)
    scale = float(np.linalg.norm(data.values))
    tol = TIE_RTOL * max(scale, np.finfo(float).tiny)

    chunks = chunk_prefixes(mu, k, max(MIN_CHUNKS, 8 * int(opts.threads)))
    if opts.prioritize:
        chunks = prioritize_order(data, chunks)

    stats = SearchStats()
    pool: list = []
    best = math.inf
    timed_out = False

    def work(prefix, cutoff):
        return ctx.run(prefix, cutoff, tol, deadline, opts.prune)

    ex = ThreadPoolExecutor(opts.threads) if opts.threads > 1 else None
    try:
        for r0 in range(0, len(chunks), ROUND_SIZE):
            batch = chunks[r0:r0 + ROUND_SIZE]
            cutoff = best + tol if opts.prune else math.inf
            if ex is None:
                results = [work(p, cutoff) for p in batch]
            else:
                results = list(ex.map(lambda p: work(p, cutoff), batch))
            for stair, (n_ex, n_reg, n_rej, n_pr), to in results:
                pool.extend(stair)
                stats.examined += n_ex
                stats.regular += n_reg
                stats.rejected_no_intersection += n_rej
                stats.pruned += n_pr
                timed_out = timed_out or to
            if pool:
                best = min(best, math.sqrt(min(e[0] for e in pool)))
                pool = [e for e in pool if math.sqrt(e[0]) <= best + tol]
            if timed_out:
                break
    finally:
        if ex is not None:
            ex.shutdown()

    candidate = None
    if pool:
        winner = _winner(pool, tol)
        candidate = evaluate_vector(winner, data, blocks=blocks)
    stats.elapsed = time.monotonic() - start
    return FitResult(candidate, not timed_out, stats)


def _winner(pool, tol):
    r_min = math.sqrt(min(e[0] for e in pool))
    for rsq, vec in sorted(pool, key=lambda e: e[1]):
        if math.sqrt(rsq) <= r_min + tol:
            return vec
    raise AssertionError("empty tie window")
