"""Inverse reinforcement learning on grid worlds with evolved value networks."""

from .demos import Demonstration, sample_demonstrations
from .gridworld import Action, GridSpec, GridWorld, MdpKind, build_gridworld, to_lmdp
from .kernels import BACKEND
from .metrics import misprediction, two_tailed_t_test
from .neat_irl import IrlConfig, IrlResult, run_neat_irl
from .reward_trace import RewardTrace, SamplerParams, aggregate_mean, run_bnp_neat, sample_reward_trace
from .solvers import optimal_policy, solve_lmdp, value_iteration

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BACKEND",
    "Demonstration",
    "GridSpec",
    "GridWorld",
    "IrlConfig",
    "IrlResult",
    "MdpKind",
    "RewardTrace",
    "SamplerParams",
    "aggregate_mean",
    "build_gridworld",
    "misprediction",
    "optimal_policy",
    "run_bnp_neat",
    "run_neat_irl",
    "sample_demonstrations",
    "sample_reward_trace",
    "solve_lmdp",
    "to_lmdp",
    "two_tailed_t_test",
    "value_iteration",
]
