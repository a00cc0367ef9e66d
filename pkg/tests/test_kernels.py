"""The compiled and pure-Python kernels must agree bit for bit."""

import math

import numpy as np
import pytest

import reference_data as ref
from freeknots import _pykernel
from freeknots.dataset import DataSet
from freeknots.lsq import PieceBlocks
from freeknots.positions import completion_counts, count_regular, regular_prefixes
from freeknots.search import BACKENDS, SearchOptions, backend_name, run_search

compiled = pytest.mark.skipif("cython" not in BACKENDS,
                              reason="compiled kernel not built")


def test_default_backend_is_known():
    assert backend_name() in ("cython", "python")


@compiled
def test_compiled_kernel_is_default():
    assert backend_name() == "cython"


def _summary(r):
    st = r.stats
    best = None if r.best is None else (r.best.residual, r.best.source_vector)
    return best, st.examined, st.regular, st.rejected_no_intersection, st.pruned


@compiled
@pytest.mark.parametrize("prune", [True, False])
def test_backends_agree_on_random_data(rng, prune):
    for _ in range(25):
        n = int(rng.integers(6, 16))
        x = np.sort(rng.choice(100, n, replace=False)).astype(float)
        d = DataSet(x, rng.normal(size=n).round(3))
        for k in range(1, min(3, n - 3) + 1):
            opts = SearchOptions(prune=prune)
            a = run_search(d, k, opts, backend="python")
            b = run_search(d, k, opts, backend="cython")
            assert _summary(a) == _summary(b)


@compiled
@pytest.mark.parametrize("k", [2, 3, 4])
def test_backends_agree_on_published_series(k):
    for values in (ref.GRADUAL_RISE, ref.SHARP_JUMP, ref.LATE_RISE):
        d = ref.series(values)
        assert _summary(run_search(d, k, backend="python")) == \
            _summary(run_search(d, k, backend="cython"))


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("length", [0, 1, 2, 3])
def test_chunks_add_up_to_the_count(name, length):
    d = ref.series(ref.LATE_RISE)
    k = 3
    ctx = BACKENDS[name].Context(d.abscissae, d.values, d.mu, k, PieceBlocks(d),
                                 completion_counts(d.mu, k))
    total = 0
    for p in regular_prefixes(d.mu, k, length):
        # a tight cutoff forces cuts inside the fixed prefix
        _, (_, regular, _, _), _ = ctx.run(p, 1.0, 0.0, None, True)
        total += regular
    assert total == count_regular(d.mu, k)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_invalid_prefix_is_empty(name):
    d = ref.series(ref.LATE_RISE)
    ctx = BACKENDS[name].Context(d.abscissae, d.values, d.mu, 2, PieceBlocks(d),
                                 completion_counts(d.mu, 2))
    stair, stats, timed_out = ctx.run((4, 6), math.inf, 0.0, None, True)
    assert stair == [] and stats == (0, 0, 0, 0) and not timed_out


def test_prefix_total():
    counts = completion_counts(12, 3).tolist()
    assert _pykernel.prefix_total(counts, (), 3, 12) == count_regular(12, 3)
    assert _pykernel.prefix_total(counts, (2, 4), 3, 12) == 0
    assert _pykernel.prefix_total(counts, (1, 3, 5), 3, 12) == 1


def test_env_var_selects_python_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, FREEKNOTS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c",
                          "import freeknots.search as s; print(s.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
