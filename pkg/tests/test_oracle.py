import numpy as np
import pytest

import reference_data as ref
from freeknots.assembly import Candidate
from freeknots.dataset import DataSet
from freeknots.lsq import BrokenLine
from freeknots.oracle import (BudgetExceeded, GridSpec, family_member,
                              grid_candidates, grid_oracle,
                              nonuniqueness_family_residual, pinned_left_knot)
from freeknots.search import run_search


def test_grid_candidates():
    d = DataSet([0.0, 1.0, 3.0], [0, 0, 0])
    np.testing.assert_allclose(grid_candidates(d, GridSpec(1)), [0.5, 1.0, 2.0])
    np.testing.assert_allclose(grid_candidates(d, GridSpec(3)),
                               [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5])


def test_grid_spec_validated():
    with pytest.raises(ValueError):
        GridSpec(0)


def test_collinear_data_is_fit_exactly():
    x = np.linspace(0, 3, 9)
    d = DataSet(x, 1.5 * x - 2)
    for g in (1, 3):
        assert grid_oracle(d, 2, GridSpec(g)) < 1e-12


def test_sharp_jump_on_coarsest_grid():
    d = ref.series(ref.SHARP_JUMP)
    assert grid_oracle(d, 2, GridSpec(1)) == pytest.approx(4.24581, abs=1e-5)


def test_oracle_bounds_search_and_tightens(random_data):
    for n, k in [(8, 1), (10, 2), (12, 2), (9, 3)]:
        d = random_data(n)
        found = run_search(d, k).best.residual
        # nested grids: halves, quarters, eighths
        bounds = [grid_oracle(d, k, GridSpec(g)) for g in (1, 3, 7)]
        assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(bounds, bounds[1:]))
        assert all(found <= b + 1e-9 for b in bounds)
        assert found <= grid_oracle(d, k, GridSpec(4)) + 1e-9


def test_budget_guard():
    d = ref.series(ref.LATE_RISE)
    with pytest.raises(BudgetExceeded):
        grid_oracle(d, 3, GridSpec(20), budget=1000)


def test_size_precondition(peak):
    with pytest.raises(ValueError):
        grid_oracle(peak, 15)


@pytest.fixture(scope="module")
def sharp_jump_fit():
    d = ref.series(ref.SHARP_JUMP)
    return d, run_search(d, 2).best


def test_family_member_between_data_knots(sharp_jump_fit):
    d, best = sharp_jump_fit
    r = nonuniqueness_family_residual(d, best, 9.4, 9.6)
    assert r == pytest.approx(best.residual, abs=1e-9)


def test_family_identity_member(sharp_jump_fit):
    d, best = sharp_jump_fit
    s = family_member(best, 9.0, 10.0)
    np.testing.assert_allclose(s(d.abscissae), best.spline(d.abscissae), atol=1e-12)
    assert nonuniqueness_family_residual(d, best, 9.0, 10.0) == pytest.approx(best.residual, abs=1e-12)


def test_family_residual_is_constant_on_grid(sharp_jump_fit):
    d, best = sharp_jump_fit
    ys = np.linspace(9.0, 10.0, 12)[1:-1]
    vals = [nonuniqueness_family_residual(d, best, y1, y2)
            for y1 in ys for y2 in ys + 0.05 if y1 < y2 <= 10.0]
    assert max(vals) - min(vals) < 1e-9
    assert abs(vals[0] - best.residual) < 1e-9


def test_family_bounds_checked(sharp_jump_fit):
    _, best = sharp_jump_fit
    with pytest.raises(ValueError):
        family_member(best, 8.5, 9.5)
    with pytest.raises(ValueError):
        family_member(best, 9.6, 9.4)


def test_pinned_family_with_reproduced_point():
    d = ref.series(ref.SHARP_JUMP_RAISED)
    best = run_search(d, 2).best
    pivot = (9.0, ref.SHARP_JUMP_RAISED[9])
    assert best.spline(9.0) == pytest.approx(pivot[1], abs=1e-9)
    vals = []
    for y2 in np.linspace(9.1, 10.0, 10):
        y1 = pinned_left_knot(best, y2, pivot)
        assert best.knots[0] <= y1 < 9.0
        vals.append(nonuniqueness_family_residual(d, best, y1, y2))
    assert max(vals) - min(vals) < 1e-9


def test_family_rejects_unreproduced_inner_point():
    d = ref.series(ref.GRADUAL_RISE)
    best = run_search(d, 2).best
    # x = 11 and 12 both lie between the knots
    with pytest.raises(ValueError, match="2 abscissae"):
        nonuniqueness_family_residual(d, best, 10.5, 12.0)


def test_family_rejects_unreproduced_point():
    d = DataSet(np.arange(11.0), [0, 0, 0, 0, 0, 3, 8, 8, 8, 8, 8])
    base = Candidate(BrokenLine([0.0, 4.5, 5.5, 10.0], [0.0, 0.0, 8.0, 8.0]),
                     (4.5, 5.5), 0.0, ())
    # x = 5 is the only abscissa between the knots, and base(5) = 4 != 3
    with pytest.raises(ValueError, match="not reproduced"):
        nonuniqueness_family_residual(d, base, 4.7, 5.3)


def test_family_needs_two_knots(peak):
    best = run_search(peak, 1).best
    with pytest.raises(ValueError):
        family_member(best, 7.0, 8.0)
