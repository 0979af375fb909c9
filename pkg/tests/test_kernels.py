import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kmlab import _kernels

BACKENDS = [pytest.param(_kernels.fallback, id="python")]
if _kernels.compiled() is not None:
    BACKENDS.append(pytest.param(_kernels.compiled(), id="cython"))


def box_values(A, bounds):
    pts = np.array(list(itertools.product(*[range(-b, b + 1) for b in bounds])), dtype=np.int64)
    return pts, np.einsum("ni,ij,nj->n", pts, np.array(A, dtype=np.int64), pts)


sym = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(st.integers(0, 3), min_size=n, max_size=n)))


@pytest.mark.parametrize("impl", BACKENDS)
@settings(max_examples=40, deadline=None)
@given(sym, st.integers(0, 30))
def test_box_kernels_against_numpy(impl, data, top):
    M, bounds = data
    A = [[M[i][j] + M[j][i] for j in range(len(M))] for i in range(len(M))]
    pts, vals = box_values(A, bounds)
    want = [int(np.sum(vals == k)) for k in range(top + 1)]
    assert impl.box_norm_counts(A, bounds, top) == want
    assert impl.box_enumerate(A, bounds, top) == [tuple(int(c) for c in p) for p in pts[vals == top]]


@pytest.mark.parametrize("impl", BACKENDS)
@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), max_size=12))
def test_inversion_parity(impl, seq):
    inv = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    assert impl.inversion_parity(seq) == inv % 2


@pytest.mark.parametrize("impl", BACKENDS)
def test_edge_cases(impl):
    assert impl.box_norm_counts([[1]], [0], 3) == [1, 0, 0, 0]
    assert impl.box_enumerate([[2, 1], [1, 2]], [1, 1], 2) == [(-1, 0), (-1, 1), (0, -1),
                                                                (0, 1), (1, -1), (1, 0)]
    assert impl.inversion_parity([]) == 0


@pytest.mark.skipif(_kernels.compiled() is None, reason="compiled kernels are not built")
def test_compiled_is_selected_by_default():
    assert _kernels.BACKEND == "cython" or os.environ.get("KMLAB_PURE_PYTHON")


def test_environment_variable_forces_the_fallback():
    env = dict(os.environ, KMLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c",
                          "from kmlab import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
