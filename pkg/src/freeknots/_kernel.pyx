# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernel.

Same algorithm and the same floating-point operation order as
``_pykernel``; the depth-first walk runs without the GIL so chunks can be
searched on several threads at once.
"""

from libc.math cimport sqrt, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

import numpy as np

from ._pykernel import prefix_total

BACKEND = "cython"

cdef enum:
    CHECK_EVERY = 1024


cdef extern from "<time.h>" nogil:
    ctypedef long time_t
    struct timespec:
        time_t tv_sec
        long tv_nsec
    int clock_gettime(int clk_id, timespec *tp)
    int CLOCK_MONOTONIC


cdef inline double _now() noexcept nogil:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return <double>ts.tv_sec + <double>ts.tv_nsec * 1e-9


cdef double IDENTICAL_RTOL = 1e-12
cdef double ENDPOINT_RTOL = 1e-12


cdef inline int _cross(double l0, double l1, double r0, double r1,
                       double xa, double xb) noexcept nogil:
    # 1 if the two lines are identical or cross strictly inside (xa, xb)
    cdef double d0 = l0 - r0
    cdef double d1 = l1 - r1
    cdef double scale = fabs(l0)
    cdef double t
    if fabs(l1) > scale:
        scale = fabs(l1)
    if fabs(r0) > scale:
        scale = fabs(r0)
    if fabs(r1) > scale:
        scale = fabs(r1)
    cdef double tol = IDENTICAL_RTOL * scale
    if fabs(d0) <= tol and fabs(d1) <= tol:
        return 1
    if (d0 > 0.0 and d1 < 0.0) or (d0 < 0.0 and d1 > 0.0):
        t = d0 / (d0 - d1)
        if ENDPOINT_RTOL < t and t < 1.0 - ENDPOINT_RTOL:
            return 1
    return 0


cdef inline double _at(double x0, double v0, double x1, double v1,
                       double x) noexcept nogil:
    return v0 + (v1 - v0) * ((x - x0) / (x1 - x0))


# Per-depth state of the open segment: breakpoints and bidiagonal factor.
cdef struct Level:
    int nbp
    int *bp
    double *d
    double *e
    double *g
    double seg_rsq
    double closed_rsq
    int has_prev
    double prev[4]


cdef struct Run:
    int mu
    int k
    int n
    int top
    int cap
    const double *x
    const double *f
    const double *r11
    const double *r12
    const double *r22
    const double *g1
    const double *g2
    const double *rsq
    const long long *counts
    int plen
    int *prefix
    long long chunk_total
    double tol
    double cutoff_sq
    double deadline
    int has_deadline
    int prune
    int *vec
    Level *lev
    # staircase: rsq values and vectors, row-major
    int stair_n
    int stair_cap
    double *stair_rsq
    int *stair_vec
    long long examined
    long long regular
    long long rejected
    long long pruned
    int timed_out
    int tick
    int oom


cdef inline double _extend(Run *R, Level *L, int b) noexcept nogil:
    cdef int a = L.bp[L.nbp - 1]
    cdef Py_ssize_t ab = <Py_ssize_t>a * R.n + b
    cdef double r11 = R.r11[ab]
    cdef double r12 = R.r12[ab]
    cdef double r22 = R.r22[ab]
    cdef double g1 = R.g1[ab]
    cdef double g2 = R.g2[ab]
    cdef int m = L.nbp - 1
    cdef double dm = L.d[m]
    cdef double r = sqrt(dm * dm + r11 * r11)
    cdef double c, s
    if r == 0.0:
        c = 1.0
        s = 0.0
    else:
        c = dm / r
        s = r11 / r
    cdef double g_old = L.g[m]
    L.d[m] = r
    L.e[m] = s * r12
    L.g[m] = c * g_old + s * g1
    cdef double w = c * r12
    cdef double y1 = -s * g_old + c * g1
    r = sqrt(w * w + r22 * r22)
    if r == 0.0:
        c = 1.0
        s = 0.0
    else:
        c = w / r
        s = r22 / r
    cdef double y2 = -s * y1 + c * g2
    L.bp[m + 1] = b
    L.d[m + 1] = r
    L.e[m + 1] = 0.0
    L.g[m + 1] = c * y1 + s * g2
    L.nbp = m + 2
    return R.rsq[ab] + y2 * y2


cdef inline void _solve(Level *L, double *v) noexcept nogil:
    cdef int m = L.nbp - 1
    cdef int i
    v[m] = L.g[m] / L.d[m]
    for i in range(m - 1, -1, -1):
        v[i] = (L.g[i] - L.e[i] * v[i + 1]) / L.d[i]


cdef inline void _copy_level(Run *R, Level *dst, Level *src) noexcept nogil:
    dst.nbp = src.nbp
    memcpy(dst.bp, src.bp, src.nbp * sizeof(int))
    memcpy(dst.d, src.d, src.nbp * sizeof(double))
    memcpy(dst.e, src.e, src.nbp * sizeof(double))
    memcpy(dst.g, src.g, src.nbp * sizeof(double))
    dst.seg_rsq = src.seg_rsq
    dst.closed_rsq = src.closed_rsq
    dst.has_prev = src.has_prev
    memcpy(dst.prev, src.prev, 4 * sizeof(double))


cdef int _close(Run *R, Level *L, Level *prev_src, int hi, double *inc,
                double *line, double *v) noexcept nogil:
    """Close the open segment of ``L`` at ``hi``; the previous right line is
    read from ``prev_src``. Returns 0 if there is no admissible crossing."""
    cdef const double *x = R.x
    inc[0] = _extend(R, L, hi)
    _solve(L, v)
    cdef int gi
    cdef double xa, xb, px0, pv0, px1, pv1, nx0, nv0, nx1, nv1
    if prev_src.has_prev:
        gi = L.bp[0] - 1
        xa = x[gi]
        xb = x[gi + 1]
        px0 = prev_src.prev[0]
        pv0 = prev_src.prev[1]
        px1 = prev_src.prev[2]
        pv1 = prev_src.prev[3]
        nx0 = x[L.bp[0]]
        nv0 = v[0]
        nx1 = x[L.bp[1]]
        nv1 = v[1]
        if not _cross(_at(px0, pv0, px1, pv1, xa), _at(px0, pv0, px1, pv1, xb),
                      _at(nx0, nv0, nx1, nv1, xa), _at(nx0, nv0, nx1, nv1, xb),
                      xa, xb):
            return 0
    cdef int m = L.nbp - 1
    line[0] = x[L.bp[m - 1]]
    line[1] = v[m - 1]
    line[2] = x[L.bp[m]]
    line[3] = v[m]
    return 1


cdef void _record(Run *R, double total) noexcept nogil:
    cdef int k = R.k
    cdef int drop = 0
    cdef int i
    cdef double r_min, limit, limit_sq
    if R.stair_n and total >= R.stair_rsq[R.stair_n - 1]:
        return
    if R.stair_n == R.stair_cap:
        R.stair_cap = 2 * R.stair_cap + 8
        R.stair_rsq = <double *>realloc(R.stair_rsq, R.stair_cap * sizeof(double))
        R.stair_vec = <int *>realloc(R.stair_vec, R.stair_cap * k * sizeof(int))
        if R.stair_rsq == NULL or R.stair_vec == NULL:
            R.oom = 1
            R.stair_n = 0
            return
    R.stair_rsq[R.stair_n] = total
    memcpy(R.stair_vec + R.stair_n * k, R.vec, k * sizeof(int))
    R.stair_n += 1
    r_min = sqrt(total)
    limit = r_min + R.tol
    while sqrt(R.stair_rsq[drop]) > limit:
        drop += 1
    if drop:
        for i in range(drop, R.stair_n):
            R.stair_rsq[i - drop] = R.stair_rsq[i]
            memcpy(R.stair_vec + (i - drop) * k, R.stair_vec + i * k, k * sizeof(int))
        R.stair_n -= drop
    limit_sq = limit * limit
    if limit_sq < R.cutoff_sq:
        R.cutoff_sq = limit_sq


cdef void _leaf(Run *R, Level *L, double *v) noexcept nogil:
    cdef double inc, total
    cdef double line[4]
    R.examined += 1
    R.regular += 1
    if not _close(R, L, L, R.mu + 1, &inc, line, v):
        R.rejected += 1
        return
    total = L.closed_rsq + (L.seg_rsq + inc)
    if R.prune and total > R.cutoff_sq:
        R.pruned += 1
        return
    _record(R, total)


cdef int _dfs(Run *R, int j, int last, int t, double *v) noexcept nogil:
    # state for depth j is in R.lev[j]; children use R.lev[j + 1]
    cdef int k = R.k
    cdef int cap = R.cap
    cdef int lo, hi, c, t_next, lo2
    cdef long long n_sub
    cdef const long long *counts = R.counts + <Py_ssize_t>(k - j - 1) * (2 * R.mu) * (cap + 1)
    cdef Level *cur = &R.lev[j]
    cdef Level *nxt = &R.lev[j + 1]
    cdef double inc
    cdef double line[4]
    if j < R.plen:
        lo = R.prefix[j]
        hi = lo
        if lo < 1 or lo > R.top:
            return 0
    else:
        lo = last + 2 if last else 1
        hi = R.top
    for c in range(lo, hi + 1):
        # deadline checked between vectors, every CHECK_EVERY steps
        R.tick += 1
        if R.tick >= CHECK_EVERY:
            R.tick = 0
            if R.has_deadline and _now() > R.deadline:
                R.timed_out = 1
                return 1
        if last:
            if c - last < (4 if (last % 2 == 0 and c % 2 == 0) else 2):
                continue
        if c % 2 == 0:
            if t and c < t:
                continue
            t_next = c + 4 if c + 4 < cap else cap
        else:
            if t:
                t_next = t + 2 if t + 2 < cap else cap
            else:
                t_next = 0
        n_sub = counts[<Py_ssize_t>c * (cap + 1) + t_next]
        if n_sub == 0:
            continue
        if j < R.plen - 1:
            n_sub = R.chunk_total
        R.vec[j] = c
        _copy_level(R, nxt, cur)
        if c % 2:
            nxt.seg_rsq = cur.seg_rsq + _extend(R, nxt, (c + 1) // 2)
        else:
            if not _close(R, nxt, cur, c // 2, &inc, line, v):
                R.rejected += n_sub
                R.regular += n_sub
                continue
            nxt.closed_rsq = cur.closed_rsq + (cur.seg_rsq + inc)
            lo2 = c // 2 + 1
            nxt.nbp = 1
            nxt.bp[0] = lo2
            nxt.d[0] = 1.0
            nxt.e[0] = 0.0
            nxt.g[0] = R.f[lo2]
            nxt.seg_rsq = 0.0
            nxt.has_prev = 1
            memcpy(nxt.prev, line, 4 * sizeof(double))
        if R.prune and nxt.closed_rsq + nxt.seg_rsq > R.cutoff_sq:
            R.pruned += n_sub
            R.regular += n_sub
            continue
        if j + 1 == k:
            _leaf(R, nxt, v)
        else:
            if _dfs(R, j + 1, c, t_next, v):
                return 1
    return 0


cdef class Context:
    """Search state shared by all chunks of one ``(data, k)`` problem."""

    cdef readonly int mu, k, n
    cdef const double[::1] x, f
    cdef const double[:, ::1] r11, r12, r22, g1, g2, rsq
    cdef const long long[:, :, ::1] counts
    cdef object counts_list

    def __init__(self, x, f, mu, k, blocks, counts):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.f = np.ascontiguousarray(f, dtype=np.float64)
        self.mu = int(mu)
        self.k = int(k)
        self.n = self.x.shape[0]
        self.r11 = np.ascontiguousarray(blocks.r11, dtype=np.float64)
        self.r12 = np.ascontiguousarray(blocks.r12, dtype=np.float64)
        self.r22 = np.ascontiguousarray(blocks.r22, dtype=np.float64)
        self.g1 = np.ascontiguousarray(blocks.g1, dtype=np.float64)
        self.g2 = np.ascontiguousarray(blocks.g2, dtype=np.float64)
        self.rsq = np.ascontiguousarray(blocks.rsq, dtype=np.float64)
        self.counts = np.ascontiguousarray(counts, dtype=np.int64)
        self.counts_list = np.asarray(counts).tolist()
        if self.counts.shape[0] != self.k + 1 or self.counts.shape[1] != 2 * self.mu \
                or self.counts.shape[2] != 2 * self.mu + 1:
            raise ValueError("completion table has the wrong shape")

    def run(self, prefix, double cutoff, double tol, deadline, bint prune):
        """Search all regular vectors starting with ``prefix``; see
        ``_pykernel.Context.run`` for the return value."""
        cdef Run R
        cdef int k = self.k
        cdef int width = k + 2
        cdef int j
        cdef int plen = len(prefix)
        if plen > k:
            raise ValueError("prefix longer than k")
        R.mu = self.mu
        R.k = k
        R.n = self.n
        R.top = 2 * self.mu - 1
        R.cap = 2 * self.mu
        R.x = &self.x[0]
        R.f = &self.f[0]
        R.r11 = &self.r11[0, 0]
        R.r12 = &self.r12[0, 0]
        R.r22 = &self.r22[0, 0]
        R.g1 = &self.g1[0, 0]
        R.g2 = &self.g2[0, 0]
        R.rsq = &self.rsq[0, 0]
        R.counts = &self.counts[0, 0, 0]
        R.plen = plen
        # a cut above the last prefix level removes exactly this chunk
        R.chunk_total = prefix_total(self.counts_list, prefix, k, self.mu)
        R.tol = tol
        R.cutoff_sq = cutoff * cutoff if isfinite(cutoff) else INFINITY
        R.has_deadline = deadline is not None
        R.deadline = float(deadline) if deadline is not None else 0.0
        R.prune = prune
        R.stair_n = 0
        R.stair_cap = 0
        R.stair_rsq = NULL
        R.stair_vec = NULL
        R.examined = R.regular = R.rejected = R.pruned = 0
        R.timed_out = 0
        R.tick = 0
        R.oom = 0

        R.prefix = <int *>malloc((plen + 1) * sizeof(int))
        R.vec = <int *>malloc(k * sizeof(int))
        R.lev = <Level *>malloc((k + 1) * sizeof(Level))
        cdef int *ibuf = <int *>malloc((k + 1) * width * sizeof(int))
        cdef double *dbuf = <double *>malloc(3 * (k + 1) * width * sizeof(double))
        cdef double *v = <double *>malloc(width * sizeof(double))
        if (R.prefix == NULL or R.vec == NULL or R.lev == NULL or ibuf == NULL
                or dbuf == NULL or v == NULL):
            free(R.prefix); free(R.vec); free(R.lev); free(ibuf); free(dbuf); free(v)
            raise MemoryError()
        for j in range(plen):
            R.prefix[j] = int(prefix[j])
        for j in range(k):
            R.vec[j] = 0
        for j in range(k + 1):
            R.lev[j].bp = ibuf + j * width
            R.lev[j].d = dbuf + (3 * j) * width
            R.lev[j].e = dbuf + (3 * j + 1) * width
            R.lev[j].g = dbuf + (3 * j + 2) * width
        R.lev[0].nbp = 1
        R.lev[0].bp[0] = 0
        R.lev[0].d[0] = 1.0
        R.lev[0].e[0] = 0.0
        R.lev[0].g[0] = R.f[0]
        R.lev[0].seg_rsq = 0.0
        R.lev[0].closed_rsq = 0.0
        R.lev[0].has_prev = 0

        with nogil:
            _dfs(&R, 0, 0, 0, v)

        stair = []
        for j in range(R.stair_n):
            stair.append((R.stair_rsq[j],
                          tuple(R.stair_vec[j * k + i] for i in range(k))))
        free(R.prefix); free(R.vec); free(R.lev); free(ibuf); free(dbuf); free(v)
        free(R.stair_rsq); free(R.stair_vec)
        if R.oom:
            raise MemoryError("staircase allocation failed")
        return stair, (R.examined, R.regular, R.rejected, R.pruned), bool(R.timed_out)
