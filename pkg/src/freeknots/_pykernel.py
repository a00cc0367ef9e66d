"""Pure-Python search kernel; used when the compiled extension is missing.

Mirrors ``_kernel.pyx`` operation for operation, so both produce the same
floating-point results.
"""

from __future__ import annotations

import math
import time

from .assembly import cross_in_gap

BACKEND = "python"

CHECK_EVERY = 1024


class Context:
    """Search state shared by all chunks of one ``(data, k)`` problem."""

    def __init__(self, x, f, mu, k, blocks, counts):
        self.x = [float(v) for v in x]
        self.f = [float(v) for v in f]
        self.mu = int(mu)
        self.k = int(k)
        self.r11 = blocks.r11.tolist()
        self.r12 = blocks.r12.tolist()
        self.r22 = blocks.r22.tolist()
        self.g1 = blocks.g1.tolist()
        self.g2 = blocks.g2.tolist()
        self.rsq = blocks.rsq.tolist()
        self.counts = counts.tolist()

    def run(self, prefix, cutoff, tol, deadline, prune):
        """Search all regular vectors starting with ``prefix``.

        Returns ``(stair, stats, timed_out)``: ``stair`` lists
        ``(residual_sq, vector)`` pairs in lexicographic order with strictly
        decreasing residuals, all within ``tol`` of the smallest;
        ``stats`` is ``(examined, regular, rejected, pruned)``.
        """
        run = _Run(self, tuple(prefix), cutoff, tol, deadline, prune)
        try:
            run.dfs(0, 0, 0, [0], [1.0], [0.0], [self.f[0]], 0.0, 0.0, None)
        except _Timeout:
            run.timed_out = True
        return run.stair, (run.examined, run.regular, run.rejected,
                           run.pruned), run.timed_out


class _Timeout(Exception):
    pass


def prefix_total(counts, prefix, k, mu):
    """Number of regular vectors starting with ``prefix`` (0 if the prefix
    itself breaks a rule)."""
    top = 2 * mu - 1
    cap = 2 * mu
    last = t = 0
    for c in prefix:
        if not 1 <= c <= top:
            return 0
        if last and c - last < (4 if last % 2 == 0 and c % 2 == 0 else 2):
            return 0
        if c % 2 == 0:
            if t and c < t:
                return 0
            t = min(c + 4, cap)
        else:
            t = min(t + 2, cap) if t else 0
        last = c
    if not prefix:
        return counts[k][0][0]
    return counts[k - len(prefix)][last][t]


def _extend(ctx, bp, d, e, g, b):
    """Append breakpoint ``b``; returns the residual increment."""
    a = bp[-1]
    r11 = ctx.r11[a][b]
    r12 = ctx.r12[a][b]
    r22 = ctx.r22[a][b]
    g1 = ctx.g1[a][b]
    g2 = ctx.g2[a][b]
    m = len(bp) - 1
    dm = d[m]
    r = math.sqrt(dm * dm + r11 * r11)
    if r == 0.0:
        c, s = 1.0, 0.0
    else:
        c, s = dm / r, r11 / r
    g_old = g[m]
    d[m] = r
    e[m] = s * r12
    g[m] = c * g_old + s * g1
    w = c * r12
    y1 = -s * g_old + c * g1
    r = math.sqrt(w * w + r22 * r22)
    if r == 0.0:
        c, s = 1.0, 0.0
    else:
        c, s = w / r, r22 / r
    y2 = -s * y1 + c * g2
    bp.append(b)
    d.append(r)
    e.append(0.0)
    g.append(c * y1 + s * g2)
    return ctx.rsq[a][b] + y2 * y2


def _solve(d, e, g):
    m = len(d) - 1
    v = [0.0] * (m + 1)
    v[m] = g[m] / d[m]
    for i in range(m - 1, -1, -1):
        v[i] = (g[i] - e[i] * v[i + 1]) / d[i]
    return v


def _at(x0, v0, x1, v1, x):
    return v0 + (v1 - v0) * ((x - x0) / (x1 - x0))


class _Run:
    def __init__(self, ctx, prefix, cutoff, tol, deadline, prune):
        self.ctx = ctx
        self.prefix = prefix
        # a cut above the last prefix level removes exactly this chunk
        self.chunk_total = prefix_total(ctx.counts, prefix, ctx.k, ctx.mu)
        self.tol = tol
        self.cutoff_sq = cutoff * cutoff if math.isfinite(cutoff) else math.inf
        self.deadline = deadline
        self.prune = prune
        self.vec = [0] * ctx.k
        self.stair = []
        self.examined = self.regular = self.rejected = self.pruned = 0
        self.timed_out = False
        self.tick = 0

    def record(self, total):
        stair = self.stair
        if stair and total >= stair[-1][0]:
            return
        stair.append((total, tuple(self.vec)))
        r_min = math.sqrt(total)
        limit = r_min + self.tol
        drop = 0
        while math.sqrt(stair[drop][0]) > limit:
            drop += 1
        if drop:
            del stair[:drop]
        limit_sq = limit * limit
        if limit_sq < self.cutoff_sq:
            self.cutoff_sq = limit_sq

    def close(self, bp, d, e, g, prev, hi):
        """Close the open segment at ``hi``; returns ``(ok, rsq_inc, right_line)``."""
        x = self.ctx.x
        inc = _extend(self.ctx, bp, d, e, g, hi)
        v = _solve(d, e, g)
        if prev is not None:
            gi = bp[0] - 1
            xa, xb = x[gi], x[gi + 1]
            px0, pv0, px1, pv1 = prev
            nx0, nv0, nx1, nv1 = x[bp[0]], v[0], x[bp[1]], v[1]
            z = cross_in_gap(_at(px0, pv0, px1, pv1, xa), _at(px0, pv0, px1, pv1, xb),
                             _at(nx0, nv0, nx1, nv1, xa), _at(nx0, nv0, nx1, nv1, xb),
                             xa, xb)
            if z is None:
                return False, inc, None
        m = len(bp) - 1
        return True, inc, (x[bp[m - 1]], v[m - 1], x[bp[m]], v[m])

    def dfs(self, j, last, t, bp, d, e, g, seg_rsq, closed_rsq, prev):
        ctx = self.ctx
        k = ctx.k
        mu = ctx.mu
        top = 2 * mu - 1
        cap = 2 * mu
        counts = ctx.counts[k - j - 1]
        if j < len(self.prefix):
            lo = hi = self.prefix[j]
            if lo < 1 or lo > top:
                return
        else:
            lo = last + 2 if last else 1
            hi = top
        for c in range(lo, hi + 1):
            # deadline checked between vectors, every CHECK_EVERY steps
            self.tick += 1
            if self.tick >= CHECK_EVERY:
                self.tick = 0
                if self.deadline is not None and time.monotonic() > self.deadline:
                    raise _Timeout
            if last:
                if c - last < (4 if (last % 2 == 0 and c % 2 == 0) else 2):
                    continue
            if c % 2 == 0:
                if t and c < t:
                    continue
                t_next = min(c + 4, cap)
            else:
                t_next = min(t + 2, cap) if t else 0
            n_sub = counts[c][t_next]
            if n_sub == 0:
                continue
            if j < len(self.prefix) - 1:
                n_sub = self.chunk_total
            self.vec[j] = c
            bp2, d2, e2, g2 = bp[:], d[:], e[:], g[:]
            if c % 2:
                seg2 = seg_rsq + _extend(ctx, bp2, d2, e2, g2, (c + 1) // 2)
                closed2 = closed_rsq
                prev2 = prev
            else:
                ok, inc, line = self.close(bp2, d2, e2, g2, prev, c // 2)
                if not ok:
                    self.rejected += n_sub
                    self.regular += n_sub
                    continue
                closed2 = closed_rsq + (seg_rsq + inc)
                lo2 = c // 2 + 1
                bp2, d2, e2, g2 = [lo2], [1.0], [0.0], [ctx.f[lo2]]
                seg2 = 0.0
                prev2 = line
            if self.prune and closed2 + seg2 > self.cutoff_sq:
                self.pruned += n_sub
                self.regular += n_sub
                continue
            if j + 1 == k:
                self.leaf(bp2, d2, e2, g2, seg2, closed2, prev2)
            else:
                self.dfs(j + 1, c, t_next, bp2, d2, e2, g2, seg2, closed2, prev2)

    def leaf(self, bp, d, e, g, seg_rsq, closed_rsq, prev):
        self.examined += 1
        self.regular += 1
        ok, inc, _ = self.close(bp, d, e, g, prev, self.ctx.mu + 1)
        if not ok:
            self.rejected += 1
            return
        total = closed_rsq + (seg_rsq + inc)
        if self.prune and total > self.cutoff_sq:
            self.pruned += 1
            return
        self.record(total)
