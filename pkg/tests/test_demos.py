import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuro_irl.demos import Demonstration, sample_demonstrations
from neuro_irl.gridworld import GridSpec, build_gridworld
from neuro_irl.solvers import optimal_policy


def _expert(world):
    return optimal_policy(world)


def test_four_single_pair_traces_cover_at_most_a_quarter(goal_world_4):
    demo = sample_demonstrations(goal_world_4, _expert(goal_world_4), 4, 1, seed=0)
    assert len(demo.traces) == 4
    assert all(len(t) == 1 for t in demo.traces)
    assert len(demo.demo_states) <= 4


def test_four_traces_of_two_pairs(goal_world_4):
    demo = sample_demonstrations(goal_world_4, _expert(goal_world_4), 4, 2, seed=1)
    assert [len(t) for t in demo.traces] == [2, 2, 2, 2]
    assert len(demo.pairs) == 8


def test_same_seed_same_traces(goal_world_4):
    expert = _expert(goal_world_4)
    a = sample_demonstrations(goal_world_4, expert, 5, 3, seed=42)
    b = sample_demonstrations(goal_world_4, expert, 5, 3, seed=42)
    assert a == b


def test_first_occurrence_wins():
    demo = Demonstration(traces=(((3, 1),), ((3, 2), (5, 0))))
    assert demo.state_actions() == {3: 1, 5: 0}
    assert demo.demo_states == [3, 5]


def test_jsonl_format_and_round_trip(goal_world_4):
    demo = sample_demonstrations(goal_world_4, _expert(goal_world_4), 3, 2, seed=5)
    text = demo.to_jsonl()
    assert text.count("\n") == 3
    assert '"pairs"' in text.splitlines()[0]
    buf = io.StringIO()
    demo.dump(buf)
    assert Demonstration.from_jsonl(buf.getvalue()) == demo
    assert Demonstration.from_jsonl('{"pairs": [[0, "Right"], [1, "Down"]]}').pairs == [(0, 3), (1, 1)]


def test_rejects_bad_arguments(goal_world_4):
    expert = _expert(goal_world_4)
    with pytest.raises(ValueError):
        sample_demonstrations(goal_world_4, expert, 0, 1, seed=0)
    with pytest.raises(ValueError):
        sample_demonstrations(goal_world_4, expert[:3], 1, 1, seed=0)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 6),
    d=st.sampled_from([1.0, 0.7, 0.2]),
    n_samples=st.integers(1, 8),
    length=st.integers(1, 6),
    seed=st.integers(0, 10_000),
)
def test_traces_follow_intended_successors(n, d, n_samples, length, seed):
    world = build_gridworld(GridSpec(n=n, d=d, seed=seed))
    expert = _expert(world)
    demo = sample_demonstrations(world, expert, n_samples, length, seed)
    assert len(demo.demo_states) <= n_samples * length
    for trace in demo.traces:
        assert len(trace) == length
        for (s, a), (s_next, _) in zip(trace, trace[1:]):
            assert a == expert[s]
            assert s_next == world.successors[s, a]
