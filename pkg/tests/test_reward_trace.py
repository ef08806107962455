import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuro_irl.demos import Demonstration, sample_demonstrations
from neuro_irl.gridworld import GridSpec, MdpKind, build_gridworld
from neuro_irl.neat import ConnectionGene, EvolutionParams, InnovationRegistry, activate_batch, perceptron
from neuro_irl.reward_trace import (
    RewardTrace,
    SamplerParams,
    _initial_state,
    _propose,
    _refresh,
    aggregate_mean,
    boltzmann_log_likelihood,
    composite_features,
    demo_log_likelihood,
    mh_accept,
    rewards_to_policy,
    run_bnp_neat,
    sample_reward_trace,
    trace_inputs,
)
from neuro_irl.solvers import optimal_policy, value_iteration


def _goal_setup(n=4, d=1.0, kind=MdpKind.STANDARD, goal=5, samples=4, length=2, seed=0):
    world = build_gridworld(GridSpec(n=n, d=d, mdp_kind=kind, goals=((goal, 100.0),)))
    demo = sample_demonstrations(world, optimal_policy(world), samples, length, seed)
    return world, demo


# -- composite features -----------------------------------------------------------


def test_empty_conjunctions_are_true():
    atomic = np.random.default_rng(0).random((9, 4)) < 0.5
    phi = composite_features(np.zeros((4, 3), bool), np.zeros((4, 3), bool), np.ones(4, bool), atomic)
    assert np.all(phi == 1)


def test_single_literal_copies_feature():
    atomic = np.random.default_rng(1).random((9, 4)) < 0.5
    Z = np.zeros((4, 1), bool)
    Z[2, 0] = True
    phi = composite_features(Z, np.zeros((4, 1), bool), np.ones(4, bool), atomic)
    np.testing.assert_array_equal(phi[:, 0], atomic[:, 2])


def test_inactive_features_are_dropped():
    atomic = np.random.default_rng(1).random((9, 4)) < 0.5
    Z = np.ones((4, 1), bool)
    X = np.array([False, True, False, False])
    phi = composite_features(Z, np.zeros((4, 1), bool), X, atomic)
    np.testing.assert_array_equal(phi[:, 0], atomic[:, 1])


def test_conjunction_with_negation_enumerated_on_n3():
    world = build_gridworld(GridSpec(n=3))
    atomic = world.features.astype(bool)
    Z = np.zeros((4, 1), bool)
    U = np.zeros((4, 1), bool)
    Z[0, 0] = Z[3, 0] = True
    U[3, 0] = True  # row >= 1 AND NOT col >= 2
    phi = composite_features(Z, U, np.ones(4, bool), atomic)
    for s in range(9):
        row, col = divmod(s, 3)
        assert phi[s, 0] == int(row >= 1 and not col >= 2)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 6), k=st.integers(1, 5))
def test_composite_features_brute_force(seed, m, k):
    rng = np.random.default_rng(seed)
    atomic = rng.random((7, m)) < 0.5
    Z, U = rng.random((m, k)) < 0.5, rng.random((m, k)) < 0.5
    X = rng.random(m) < 0.5
    phi = composite_features(Z, U, X, atomic)
    for s, j in itertools.product(range(7), range(k)):
        want = all(atomic[s, i] != U[i, j] for i in range(m) if Z[i, j] and X[i])
        assert phi[s, j] == int(want)


# -- likelihood ----------------------------------------------------------------------


def test_zero_confidence_is_uniform():
    q = np.random.default_rng(0).normal(size=(4, 5))
    pairs = [(0, 1), (2, 4), (3, 0)]
    assert boltzmann_log_likelihood(q, pairs, 1e-12) == pytest.approx(-3 * math.log(5), abs=1e-9)


def test_likelihood_shift_invariant():
    q = np.random.default_rng(1).normal(size=(4, 5))
    pairs = [(0, 1), (1, 3)]
    assert boltzmann_log_likelihood(q + 17.0, pairs, 2.0) == pytest.approx(boltzmann_log_likelihood(q, pairs, 2.0), abs=1e-12)


def test_true_rewards_high_confidence_near_zero():
    world = build_gridworld(GridSpec(n=2, goals=((3, 10.0),)))
    # demonstrated actions with a unique optimum
    demo = Demonstration(traces=(((1, 1),), ((2, 3),)))
    lls = [demo_log_likelihood(world.rewards, world, demo, eta=eta) for eta in (0.25, 0.5, 1.0, 2.0)]
    assert all(a < b for a, b in zip(lls, lls[1:]))
    assert all(ll <= 0.0 for ll in lls)
    assert lls[-1] > -1e-6


# -- sampler -------------------------------------------------------------------------


def test_params_validation():
    for bad in (dict(max_k=0), dict(iterations=0), dict(eta=0.0), dict(burn_in=-1), dict(kappa_beta=(0.0, 1.0))):
        with pytest.raises(ValueError):
            SamplerParams(**bad)


def test_single_iteration_trace_shape():
    world, demo = _goal_setup()
    trace = sample_reward_trace(world, demo, SamplerParams(iterations=1))
    assert trace.iterations.shape == (1, 16)


def test_trace_shape_and_determinism():
    world, demo = _goal_setup(d=0.7, kind=MdpKind.LINEAR)
    params = SamplerParams(iterations=12, burn_in=5, seed=4)
    a, b = sample_reward_trace(world, demo, params), sample_reward_trace(world, demo, params)
    assert a.iterations.shape == (12, 16)
    np.testing.assert_array_equal(a.iterations, b.iterations)
    assert 0.0 <= a.acceptance_rate <= 1.0


def test_improving_proposal_always_accepted():
    rng = np.random.default_rng(0)
    assert all(mh_accept(0.0, rng) for _ in range(100))
    assert all(mh_accept(3.2, rng) for _ in range(100))
    assert not any(mh_accept(-800.0, rng) for _ in range(100))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rewards_are_features_times_weights(seed):
    rng = np.random.default_rng(seed)
    atomic = build_gridworld(GridSpec(n=4)).features.astype(bool)
    params = SamplerParams(max_k=5)
    state = _initial_state(atomic.shape[1], params, atomic, rng)
    for _ in range(20):
        state, _ = _propose(state, params, rng)
        _refresh(state, atomic)
        assert state.Phi.shape[1] <= params.max_k
        np.testing.assert_allclose(state.r, state.Phi @ state.w, atol=1e-12, rtol=0)
        np.testing.assert_array_equal(state.Phi, composite_features(state.Z, state.U, state.X, atomic))


def test_chain_likelihood_improves():
    world, demo = _goal_setup(samples=4, length=2)
    T = 200
    early, late = [], []
    for seed in range(10):
        trace = sample_reward_trace(world, demo, SamplerParams(iterations=T, seed=seed))
        lls = [demo_log_likelihood(r, world, demo, 1.0) for r in trace.iterations]
        early.append(np.mean(lls[: T // 4]))
        late.append(np.mean(lls[-T // 4 :]))
        np.testing.assert_allclose(trace.log_likelihoods, lls, atol=1e-6)
    assert np.mean(late) >= np.mean(early)


def test_trace_json_round_trip():
    world, demo = _goal_setup()
    trace = sample_reward_trace(world, demo, SamplerParams(iterations=3))
    again = RewardTrace.from_json(trace.to_json())
    np.testing.assert_array_equal(again.iterations, trace.iterations)
    np.testing.assert_array_equal(again.log_likelihoods, trace.log_likelihoods)


# -- aggregation ---------------------------------------------------------------------


def test_mean_of_constant_trace():
    r = np.arange(16.0)
    assert np.array_equal(aggregate_mean(RewardTrace(np.tile(r, (5, 1)))), r)


def test_mean_of_two_iterations():
    v = np.random.default_rng(0).normal(size=9)
    np.testing.assert_allclose(aggregate_mean(RewardTrace(np.stack([np.zeros(9), 2 * v]))), v, rtol=1e-15)


def test_mean_matches_elementwise_average():
    its = np.random.default_rng(5).normal(size=(5, 16))
    want = [sum(its[t, s] for t in range(5)) / 5 for s in range(16)]
    np.testing.assert_allclose(aggregate_mean(RewardTrace(its)), want, rtol=1e-14)


def test_mean_rejects_empty_trace():
    with pytest.raises(ValueError):
        aggregate_mean(RewardTrace(np.zeros((0, 4))))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.integers(1, 12))
def test_mean_is_permutation_invariant(seed, t):
    rng = np.random.default_rng(seed)
    its = rng.normal(size=(t, 6))
    perm = rng.permutation(t)
    np.testing.assert_allclose(aggregate_mean(RewardTrace(its)), aggregate_mean(RewardTrace(its[perm])), rtol=1e-12, atol=1e-12)


def test_network_input_width():
    its = np.random.default_rng(0).normal(size=(8, 16))
    assert trace_inputs(RewardTrace(its)).shape == (16, 8)
    long = np.random.default_rng(0).normal(size=(100, 16))
    x = trace_inputs(RewardTrace(long), cap=16)
    assert x.shape == (16, 16)
    np.testing.assert_array_equal(x[:, 0], long[0])
    np.testing.assert_array_equal(x[:, -1], long[-1])


def _mean_network(width):
    g = perceptron(width, InnovationRegistry(), np.random.default_rng(0))
    for k, c in list(g.connections.items()):
        g.connections[k] = ConnectionGene(c.src, c.dst, 1.0 / width, True, c.innovation)
    return g


@pytest.mark.parametrize("kind", [MdpKind.STANDARD, MdpKind.LINEAR])
def test_mean_network_reproduces_mean_policy(kind):
    world, demo = _goal_setup(d=0.7, kind=kind)
    trace = sample_reward_trace(world, demo, SamplerParams(iterations=8, seed=2))
    rewards = activate_batch(_mean_network(8), trace_inputs(trace))
    np.testing.assert_allclose(rewards, aggregate_mean(trace), atol=1e-12)
    np.testing.assert_array_equal(rewards_to_policy(world, rewards), rewards_to_policy(world, aggregate_mean(trace)))


def test_bnp_neat_result_shapes():
    world, demo = _goal_setup(d=0.7, kind=MdpKind.LINEAR)
    trace = sample_reward_trace(world, demo, SamplerParams(iterations=8, seed=1))
    result = run_bnp_neat(world, demo, trace, EvolutionParams(pop_size=10, max_generations=5, seed=1))
    assert result.learned_rewards.shape == (16,)
    assert result.learned_policy.shape == (16,)
    assert result.best_genome.num_inputs == 8
    assert result.generations_run <= 5
    np.testing.assert_array_equal(result.learned_policy, rewards_to_policy(world, result.learned_rewards))
