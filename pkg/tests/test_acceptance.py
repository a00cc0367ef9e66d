"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for just the summary lines.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import reference_data as ref  # noqa: E402
from freeknots.assembly import classify_knots  # noqa: E402
from freeknots.dataset import DataSet, load_csv  # noqa: E402
from freeknots.oracle import GridSpec, grid_oracle, nonuniqueness_family_residual, pinned_left_knot  # noqa: E402
from freeknots.positions import (count_regular, count_superset, is_regular,  # noqa: E402
                                 has_placement_features)
from freeknots.report import fit_report, mbc_mic, to_json  # noqa: E402
from freeknots.search import SearchOptions, run_search  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol


def check_count_table():
    t0 = time.monotonic()
    bad = []
    for k, row in ref.COUNT_TABLE.items():
        for n, published in zip(ref.COUNT_TABLE_POINTS, row):
            got = count_regular(n - 2, k)
            if got != published:
                bad.append(f"k={k}/{n} points: computed {got}, published {published}")
    elapsed = time.monotonic() - t0
    ok = not bad and elapsed < 10
    detail = f"{42 - len(bad)}/42 cells equal in {elapsed:.2f} s"
    if bad:
        detail += "; " + "; ".join(bad)
    return ok, detail


def check_twenty_point_counts():
    got = (count_superset(18, 7), count_regular(18, 7),
           count_superset(18, 10), count_regular(18, 10))
    want = (6724520, 795455, 183579396, 1256465)
    return got == want, f"superset/regular k=7: {got[0]}/{got[1]}, k=10: {got[2]}/{got[3]}"


def check_isolated_peak():
    d = ref.isolated_peak()
    ok = True
    parts = []
    for k, (knots, residual) in ref.ISOLATED_PEAK_FITS.items():
        t0 = time.monotonic()
        best = run_search(d, k).best
        dt = time.monotonic() - t0
        if residual == 0:
            good = best.residual <= 1e-9
        else:
            good = close(best.residual, residual, 1e-4)
        if knots is not None:
            good = good and best.knots == knots
        if k >= 4:
            good = good and sum(classify_knots(best)) == 3
        good = good and dt < 1.0
        ok = ok and good
        parts.append(f"k={k}: r={best.residual:.5f} ({dt:.2f} s)")
    return ok, ", ".join(parts)


def check_gradual_rise():
    d = ref.series(ref.GRADUAL_RISE)
    want = ref.GRADUAL_RISE_FIT
    best = run_search(d, 2).best
    ok = all(close(a, b, 1e-3) for a, b in zip(best.knots, want["knots"]))
    ok = ok and close(best.residual, want["residual"], 1e-3)
    for (m, c, _, _), (pm, pc) in zip(best.spline.pieces(), want["pieces"]):
        ok = ok and close(m, pm, 1e-3) and close(c, pc, 1e-3)
    mbc, mic = mbc_mic(best.knots, want["kappa0"])
    ok = ok and close(mbc, want["mbc"], 1e-3) and close(mic, want["mic"], 1e-3)
    return ok, (f"knots {best.knots[0]:.5f}, {best.knots[1]:.5f}, r={best.residual:.4f}, "
                f"MBC {mbc:.4f}, MIC {mic:.4f}")


def check_sharp_jump():
    d = ref.series(ref.SHARP_JUMP)
    best = run_search(d, 2).best
    mbc, mic = mbc_mic(best.knots, 128.0)
    fam = nonuniqueness_family_residual(d, best, 9.4, 9.6)
    ok = (best.knots == (9.0, 10.0) and close(best.residual, 4.24581, 1e-3)
          and close(mbc, 0.25, 1e-12) and close(mic, 0.125, 1e-12)
          and close(fam, best.residual, 1e-9))
    return ok, (f"knots {best.knots}, r={best.residual:.5f}, MBC {mbc}, MIC {mic}, "
                f"|s(9.4,9.6) - r| = {abs(fam - best.residual):.1e}")


def check_sharp_jump_raised():
    d = ref.series(ref.SHARP_JUMP_RAISED)
    best = run_search(d, 2).best
    pivot = (9.0, ref.SHARP_JUMP_RAISED[9])
    vals = [nonuniqueness_family_residual(d, best, pinned_left_knot(best, y2, pivot), y2)
            for y2 in np.linspace(9.1, 10.0, 10)]
    spread = max(vals) - min(vals)
    ok = (close(best.knots[0], 8.98057, 1e-3) and best.knots[1] == 10.0
          and close(best.residual, 4.11872, 1e-3) and spread < 1e-9)
    return ok, (f"t1={best.knots[0]:.5f}, t2={best.knots[1]}, r={best.residual:.5f}, "
                f"family spread {spread:.1e}")


def check_late_rise():
    best = run_search(ref.series(ref.LATE_RISE), 2).best
    ok = (all(close(a, b, 1e-3) for a, b in zip(best.knots, ref.LATE_RISE_FIT["knots"]))
          and close(best.residual, 7.69589, 1e-3))
    return ok, f"knots {best.knots[0]:.5f}, {best.knots[1]:.5f}, r={best.residual:.5f}"


def check_convexity():
    best = run_search(ref.parabola(), 5).best
    slopes = best.spline.slopes
    ok = bool(np.all(np.diff(slopes) >= -1e-12))
    return ok, "slopes " + ", ".join(f"{s:.3f}" for s in slopes)


def check_titanium():
    if not ref.TITANIUM_CSV.exists():
        return None, "fixture missing"
    d = load_csv(ref.TITANIUM_CSV)
    ok = True
    parts = []
    for k, (knots, residual) in ref.TITANIUM_FITS.items():
        best = run_search(d, k).best
        good = close(best.residual, residual, 5e-3)
        if knots is not None:
            good = good and all(close(a, b, 5e-3) for a, b in zip(best.knots, knots))
        ok = ok and good
        parts.append(f"k={k}: r={best.residual:.4f}")
    return ok, ", ".join(parts)


def check_random_optimality():
    rng = np.random.default_rng(12)
    worst = -np.inf
    ok = True
    for _ in range(50):
        n = int(rng.integers(8, 15))
        k = int(rng.integers(1, 4))
        x = np.sort(rng.choice(np.arange(100), size=n, replace=False)).astype(float)
        d = DataSet(x, rng.uniform(size=n))
        a = run_search(d, k).best
        b = run_search(d, k, SearchOptions(prune=False)).best
        oracle = grid_oracle(d, k, GridSpec(4))
        worst = max(worst, a.residual - oracle)
        ok = ok and a.residual <= oracle + 1e-9
        ok = ok and (a.residual, a.source_vector) == (b.residual, b.source_vector)
    return ok, f"50 instances, max(search - oracle) = {worst:.2e}, prune on/off identical"


def _json_without_timing(result):
    rep = fit_report(result)
    rep["stats"].pop("elapsed_ms")
    return to_json(rep).encode()


def check_thread_determinism():
    cases = [(ref.isolated_peak(), k) for k in ref.ISOLATED_PEAK_FITS]
    cases += [(ref.series(v), 2) for v in (ref.GRADUAL_RISE, ref.SHARP_JUMP,
                                           ref.SHARP_JUMP_RAISED, ref.LATE_RISE)]
    for d, k in cases:
        outs = {_json_without_timing(run_search(d, k, SearchOptions(threads=t)))
                for t in (1, 2, 8)}
        if len(outs) != 1:
            return False, f"reports differ for k={k}, n={len(d)}"
    return True, f"{len(cases)} fits byte-identical for 1, 2 and 8 threads"


def check_placement_equivalence():
    total = 0
    for mu, k in [(6, 2), (8, 3)]:
        for p in itertools.combinations_with_replacement(range(2 * mu + 1), k):
            if any(a == b and a % 2 for a, b in zip(p, p[1:])):
                continue
            total += 1
            if is_regular(p, mu) != has_placement_features(p, mu):
                return False, f"disagree on {p} (mu={mu})"
    return True, f"{total} position vectors agree"


CRITERIA = [
    (1, "regular-vector count table (42 cells)", check_count_table),
    (2, "twenty-point counts for 7 and 10 knots", check_twenty_point_counts),
    (3, "isolated peak, k = 1..5", check_isolated_peak),
    (4, "gradual-rise series: knots, pieces, MBC/MIC", check_gradual_rise),
    (5, "sharp-jump series: data knots, MBC/MIC, equal-residual family", check_sharp_jump),
    (6, "sharp jump with reproduced point: one free knot", check_sharp_jump_raised),
    (7, "late-rise series: interior knots", check_late_rise),
    (8, "convex data keeps nondecreasing slopes", check_convexity),
    (9, "titanium heat data, k = 3..5", check_titanium),
    (10, "random instances: search <= grid oracle, pruning sound", check_random_optimality),
    (11, "thread count does not change the report", check_thread_determinism),
    (12, "regularity equals placement features", check_placement_equivalence),
]


def line(n, title, ok, detail):
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    return f"[{status}] criterion {n:2d}: {title} -- {detail}"


def _run(n, capsys):
    _, title, check = CRITERIA[n - 1]
    ok, detail = check()
    with capsys.disabled():
        print("\n" + line(n, title, ok, detail))
    if ok is None:
        pytest.skip(detail)
    assert ok, detail


@pytest.mark.xfail(strict=True, reason="one published cell (7 knots, 35 points) "
                   "reads 249673265; exhaustive enumeration gives 240673265")
def test_criterion_01(capsys):
    _run(1, capsys)


@pytest.mark.parametrize("n", range(2, 13))
def test_criterion(n, capsys):
    _run(n, capsys)


if __name__ == "__main__":
    failed = 0
    for n, title, check in CRITERIA:
        ok, detail = check()
        failed += ok is False
        print(line(n, title, ok, detail))
    sys.exit(1 if failed else 0)
