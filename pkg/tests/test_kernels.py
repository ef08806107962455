"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuro_irl import kernels
from neuro_irl.gridworld import GridSpec, MdpKind, build_gridworld
from neuro_irl.neat import EvolutionParams, InnovationRegistry, compile_genome, mutate, perceptron
from neuro_irl.solvers import _passive_csr

PY = kernels.get_backend("python")

try:
    CY = kernels.get_backend("cython")
except ImportError:  # extension not built
    CY = None

needs_ext = pytest.mark.skipif(CY is None, reason="compiled kernels not built")


def test_backend_names():
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_ext
@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 8), d=st.floats(0.0, 1.0), seed=st.integers(0, 10_000))
def test_value_iteration_and_q_agree(n, d, seed):
    world = build_gridworld(GridSpec(n=n, d=d, seed=seed))
    args = (np.asarray(world.rewards, float), np.asarray(world.successors, np.int64), d, 0.9, 1e-10, 10_000)
    v_py, it_py, delta_py = PY.value_iteration(*args)
    v_cy, it_cy, delta_cy = CY.value_iteration(*args)
    np.testing.assert_allclose(v_cy, v_py, rtol=1e-12, atol=1e-12)
    assert abs(it_cy - it_py) <= 1
    q_py = PY.q_values(args[0], args[1], d, 0.9, v_py)
    q_cy = CY.q_values(args[0], args[1], d, 0.9, v_py)
    np.testing.assert_allclose(q_cy, q_py, rtol=1e-13, atol=1e-12)


@needs_ext
@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 10_000))
def test_lmdp_power_iteration_agrees(n, seed):
    world = build_gridworld(GridSpec(n=n, mdp_kind=MdpKind.LINEAR, seed=seed))
    indptr, indices, log_p = _passive_csr(np.asarray(world.passive_dynamics))
    neg = -np.asarray(world.state_costs, float)
    v_py, _, _ = PY.lmdp_power_iteration(neg, indptr, indices, log_p, 1e-11, 10_000)
    v_cy, _, _ = CY.lmdp_power_iteration(neg, indptr, indices, log_p, 1e-11, 10_000)
    np.testing.assert_allclose(v_cy, v_py, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), m=st.integers(1, 12), p=st.integers(1, 12), seed=st.integers(0, 10_000))
def test_log_matmul_matches_direct_sum(n, m, p, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=20.0, size=(n, m))
    b = rng.normal(scale=20.0, size=(m, p))
    a[rng.random(a.shape) < 0.3] = -np.inf
    b[rng.random(b.shape) < 0.3] = -np.inf
    want = np.full((n, p), -np.inf)
    for i in range(n):
        for j in range(p):
            terms = [a[i, k] + b[k, j] for k in range(m) if np.isfinite(a[i, k] + b[k, j])]
            if terms:
                top = max(terms)
                want[i, j] = top + np.log(sum(np.exp(t - top) for t in terms))
    for backend in filter(None, (PY, CY)):
        got = backend.log_matmul(a, b)
        assert np.array_equal(np.isinf(got), np.isinf(want))
        np.testing.assert_allclose(got[np.isfinite(want)], want[np.isfinite(want)], rtol=1e-13, atol=1e-12)


@needs_ext
@settings(max_examples=25, deadline=None)
@given(num_inputs=st.integers(1, 12), steps=st.integers(0, 40), seed=st.integers(0, 10_000))
def test_feedforward_agrees(num_inputs, steps, seed):
    rng = np.random.default_rng(seed)
    registry = InnovationRegistry()
    genome = perceptron(num_inputs, registry, rng)
    params = EvolutionParams(p_add_node=0.5, p_add_connection=0.5)
    for _ in range(steps):
        genome = mutate(genome, params, registry, rng)
    net = compile_genome(genome)
    x = rng.normal(size=(17, num_inputs))
    args = (x, net.num_nodes, net.eval_nodes, net.is_sigmoid, net.indptr, net.src, net.weights, net.out_slot)
    np.testing.assert_allclose(CY.feedforward(*args), PY.feedforward(*args), rtol=1e-12, atol=1e-12)
