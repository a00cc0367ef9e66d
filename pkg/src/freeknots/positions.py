"""Position vectors: integer codes for where the knots of a broken line sit
relative to the data abscissae.

A component ``2i - 1`` means the knot coincides with ``x_i`` (a data knot);
``2i`` means it lies strictly inside ``(x_i, x_{i+1})`` (an interior knot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=True)
class DataKnot:
    """Knot located exactly at ``x[index]``."""
    index: int

    @property
    def position(self) -> float:
        return float(self.index)


@dataclass(frozen=True, order=True)
class IntervalKnot:
    """Knot located strictly between ``x[index]`` and ``x[index + 1]``."""
    index: int

    @property
    def position(self) -> float:
        return self.index + 0.5


Knot = Union[DataKnot, IntervalKnot]


def validate(p: Sequence[int], mu: int) -> tuple:
    """Check the general position-vector bounds and return ``p`` as a tuple."""
    p = tuple(int(c) for c in p)
    for j, c in enumerate(p):
        if not 0 <= c <= 2 * mu:
            raise ValueError(
                f"component {j + 1} = {c} outside [0, {2 * mu}]")
    for j in range(len(p) - 1):
        if p[j] > p[j + 1]:
            raise ValueError(f"components {j + 1},{j + 2} decrease")
        if p[j] == p[j + 1] and p[j] % 2:
            raise ValueError(
                f"equal components {j + 1},{j + 2} must be even, got {p[j]}")
    return p


def decode(p: Sequence[int], mu: int) -> tuple:
    """Knot placement coded by ``p``."""
    p = validate(p, mu)
    return tuple(DataKnot((c + 1) // 2) if c % 2 else IntervalKnot(c // 2)
                 for c in p)


def encode(placement: Sequence[Knot]) -> tuple:
    out = []
    prev = None
    for knot in placement:
        if prev is not None:
            if knot.position < prev.position or (
                    knot.position == prev.position
                    and not isinstance(knot, IntervalKnot)):
                raise ValueError(f"invalid placement order at {knot}")
        if isinstance(knot, DataKnot):
            out.append(2 * knot.index - 1)
        else:
            out.append(2 * knot.index)
        prev = knot
    return tuple(out)


def is_regular(p: Sequence[int], mu: int) -> bool:
    """Regularity test on the integer code."""
    p = tuple(p)
    k = len(p)
    # (a)
    if any(not 1 <= c <= 2 * mu - 1 for c in p):
        return False
    for j, c in enumerate(p):
        if c % 2 == 0:
            # (b)
            if any(p[i] == c - 1 for i in range(j)):
                return False
            if any(p[i] == c + 1 for i in range(j + 1, k)):
                return False
            # (c): next even component with only odd ones in between
            for jj in range(j + 1, k):
                if p[jj] % 2 == 0:
                    l = jj - j - 1
                    if p[jj] // 2 - c // 2 < 2 + l:
                        return False
                    break
    # (d)
    for j in range(k - 1):
        gap = 4 if p[j] % 2 == 0 and p[j + 1] % 2 == 0 else 2
        if p[j + 1] - p[j] < gap:
            return False
    return True


def has_placement_features(p: Sequence[int], mu: int) -> bool:
    """Structural features of the knot placement itself, evaluated on the
    decoded knots rather than on the code: no knots in the two boundary
    intervals; abscissae next to an interior knot are not knots; at least
    two non-knot abscissae between any two interior knots; at least two
    abscissae on or between neighbouring knots (boundary points included).
    """
    knots = decode(p, mu)
    pos = [kn.position for kn in knots]
    data_knots = {kn.index for kn in knots if isinstance(kn, DataKnot)}
    interior = [kn for kn in knots if isinstance(kn, IntervalKnot)]

    if knots and (pos[0] < 1 or pos[-1] > mu):
        return False
    for kn in interior:
        if kn.index in data_knots or kn.index + 1 in data_knots:
            return False
    for a in range(len(interior)):
        for b in range(a + 1, len(interior)):
            lo, hi = interior[a].position, interior[b].position
            free = [m for m in range(mu + 2)
                    if lo < m < hi and m not in data_knots]
            if len(free) < 2:
                return False
    ext = [0.0] + pos + [float(mu + 1)]
    for left, right in zip(ext, ext[1:]):
        if not any(left <= m and m + 1 <= right for m in range(mu + 1)):
            return False
    return True


def _check_sizes(mu: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"need k >= 1, got k={k}")
    if mu < k + 1:
        raise ValueError(
            f"need mu >= k+1 (got mu={mu}, k={k}); with this few points the "
            "data are reproduced exactly")


def _step_ok(last: int, last_even: int, odds: int, c: int) -> bool:
    # prefix test for (b)/(c)/(d) when appending c; last=0 means empty prefix
    if last:
        both_even = last % 2 == 0 and c % 2 == 0
        if c - last < (4 if both_even else 2):
            return False
        if c % 2 == 0 and last == c - 1:
            return False
        if last % 2 == 0 and c == last + 1:
            return False
    if c % 2 == 0 and last_even and c // 2 - last_even // 2 < 2 + odds:
        return False
    return True


def enumerate_regular(mu: int, k: int, prefix: Sequence[int] = ()) -> Iterator[tuple]:
    """Yield every regular position vector of length ``k`` (optionally
    starting with ``prefix``) in lexicographic order.

    Walks strictly increasing vectors over ``1..2*mu-1`` depth first and
    cuts a subtree as soon as its prefix breaks a condition; each complete
    vector is confirmed with :func:`is_regular`. Memory is O(k).
    """
    _check_sizes(mu, k)
    top = 2 * mu - 1
    prefix = tuple(prefix)
    if len(prefix) > k:
        raise ValueError("prefix longer than k")
    vec = [0] * k
    last = last_even = odds = 0
    for j, c in enumerate(prefix):
        if not 1 <= c <= top or not _step_ok(last, last_even, odds, c):
            return
        vec[j] = c
        if c % 2:
            odds += 1
        else:
            last_even, odds = c, 0
        last = c
    start = len(prefix)
    if start == k:
        if is_regular(vec, mu):
            yield tuple(vec)
        return

    # explicit stack of (depth, next candidate, last, last_even, odds)
    stack = [(start, last + 2 if last else 1, last, last_even, odds)]
    while stack:
        depth, c, last, last_even, odds = stack.pop()
        remaining = k - depth - 1
        while c <= top - 2 * remaining:
            if _step_ok(last, last_even, odds, c):
                break
            c += 1
        else:
            continue
        stack.append((depth, c + 1, last, last_even, odds))
        vec[depth] = c
        if depth + 1 == k:
            if is_regular(vec, mu):
                yield tuple(vec)
            continue
        if c % 2:
            stack.append((depth + 1, c + 2, c, last_even, odds + 1))
        else:
            stack.append((depth + 1, c + 2, c, c, 0))


def _completion_tables(mu: int, k: int) -> list:
    """``tbl[rem][last][T]``: number of ways to append ``rem`` components
    after a prefix ending in ``last`` (0 for the empty prefix), where ``T`` is
    the smallest even code still admissible (0 while no even code has
    occurred, capped at ``2*mu``).
    """
    top = 2 * mu - 1
    cap = 2 * mu
    width = cap + 1
    ones = [[1] * width for _ in range(top + 1)]
    tbl = [ones]
    for rem in range(1, k + 1):
        prev = tbl[-1]
        # suffix sums over the next code c >= lo
        odd_suf = [[0] * (top + 3) for _ in range(width)]
        for t in range(width):
            row = odd_suf[t]
            for c in range(top, 0, -1):
                row[c] = row[c + 1] + (prev[c][t] if c % 2 else 0)
        even_suf = [0] * (top + 3)
        for c in range(top, 0, -1):
            even_suf[c] = even_suf[c + 1] + (
                prev[c][min(c + 4, cap)] if c % 2 == 0 else 0)
        cur = []
        for last in range(top + 1):
            lo = last + 2 if last else 1
            lo = min(lo, top + 1)
            row = []
            for t in range(width):
                t_odd = 0 if t == 0 else min(t + 2, cap)
                # even-after-even needs a gap of 4; the T bound covers that
                row.append(odd_suf[t_odd][lo] + even_suf[min(max(lo, t), top + 1)])
            cur.append(row)
        tbl.append(cur)
    return tbl


@lru_cache(maxsize=64)
def _tables_cached(mu: int, k: int):
    return _completion_tables(mu, k)


def count_regular(mu: int, k: int) -> int:
    """Number of regular position vectors, by dynamic programming over the
    value and parity of the last component (independent of
    :func:`enumerate_regular`). Exact for any size."""
    _check_sizes(mu, k)
    return _tables_cached(mu, k)[k][0][0]


def count_superset(mu: int, k: int) -> int:
    """Number of strictly increasing vectors over ``1..2*mu-1``."""
    if k < 0 or mu < 1:
        raise ValueError("need k >= 0 and mu >= 1")
    return math.comb(2 * mu - 1, k)


def completion_counts(mu: int, k: int) -> np.ndarray:
    """The completion table as an ``int64`` array of shape
    ``(k+1, 2*mu, 2*mu+1)`` for the search kernels.

    Raises ``OverflowError`` if a count does not fit in 64 bits.
    """
    _check_sizes(mu, k)
    tbl = _tables_cached(mu, k)
    if tbl[k][0][0] > INT64_MAX:
        raise OverflowError(
            f"regular vector count for mu={mu}, k={k} exceeds 64 bits")
    return np.array(tbl, dtype=np.int64)


def next_threshold(last_even_threshold: int, c: int, mu: int) -> int:
    """Update the smallest admissible even code after appending ``c``."""
    cap = 2 * mu
    if c % 2 == 0:
        return min(c + 4, cap)
    return 0 if last_even_threshold == 0 else min(last_even_threshold + 2, cap)


def regular_prefixes(mu: int, k: int, length: int) -> Iterator[tuple]:
    """Lexicographically ordered prefixes of the given length that extend
    to at least one regular vector of length ``k``."""
    _check_sizes(mu, k)
    if not 0 <= length <= k:
        raise ValueError("prefix length must lie in [0, k]")
    tbl = _tables_cached(mu, k)
    top = 2 * mu - 1
    vec = []

    def rec(last, t):
        if len(vec) == length:
            yield tuple(vec)
            return
        rem_after = k - len(vec) - 1
        for c in range(last + 2 if last else 1, top + 1):
            if last and c - last < (4 if last % 2 == 0 and c % 2 == 0 else 2):
                continue
            if c % 2 == 0 and t and c < t:
                continue
            tn = next_threshold(t, c, mu)
            if tbl[rem_after][c][tn] == 0:
                continue
            vec.append(c)
            yield from rec(c, tn)
            vec.pop()

    yield from rec(0, 0)
