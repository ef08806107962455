"""Per-iteration reward traces from a composite-feature reward sampler, and
their aggregation into a final reward by mean or by an evolved network.

Rewards decompose as ``r = Phi @ w`` where column ``j`` of ``Phi`` is the
conjunction of the atomic features selected by ``Z[:, j]`` and ``X``, each
optionally negated by ``U[:, j]``. The number of composite features is
fixed at ``max_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .demos import Demonstration
from .gridworld import GridWorld
from .neat import EvolutionParams, Genome, activate_batch, run_evolution
from .neat_irl import DemoTargets, IrlResult
from .solvers import LMDP_SQUARINGS, optimal_policy, solve_values, value_iteration, value_iteration_arrays

LIKELIHOOD_TOL = 1e-8


@dataclass(frozen=True)
class SamplerParams:
    max_k: int = 8
    kappa_beta: tuple[float, float] = (1.0, 1.0)
    eta: float = 1.0
    iterations: int = 8
    weight_prior_sigma: float = 1.0
    alpha: float = 1.0
    """IBP concentration; kept for configuration fidelity, unused by the fixed-K sampler."""
    burn_in: int = 0
    """Unrecorded iterations run before the first recorded one."""
    seed: int = 0

    def __post_init__(self):
        if self.max_k < 1:
            raise ValueError("max_k must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        a, b = self.kappa_beta
        if a <= 0 or b <= 0:
            raise ValueError("kappa_beta shape parameters must be positive")


@dataclass
class SamplerState:
    Z: np.ndarray
    U: np.ndarray
    X: np.ndarray
    kappa: float
    w: np.ndarray
    Phi: np.ndarray
    r: np.ndarray
    log_likelihood: float = -math.inf

    def copy(self) -> "SamplerState":
        return SamplerState(
            self.Z.copy(), self.U.copy(), self.X.copy(), self.kappa,
            self.w.copy(), self.Phi.copy(), self.r.copy(), self.log_likelihood,
        )


@dataclass(frozen=True)
class RewardTrace:
    iterations: np.ndarray
    """(T, |S|) reward vector recorded after each sampler iteration."""
    log_likelihoods: np.ndarray = field(default_factory=lambda: np.zeros(0))
    acceptance_rate: float = float("nan")

    @property
    def num_iterations(self) -> int:
        return self.iterations.shape[0]

    def to_json(self) -> str:
        return json.dumps({
            "iterations": self.iterations.tolist(),
            "log_likelihoods": self.log_likelihoods.tolist(),
            "acceptance_rate": self.acceptance_rate,
        })

    @classmethod
    def from_json(cls, text: str) -> "RewardTrace":
        data = json.loads(text)
        return cls(
            np.asarray(data["iterations"], dtype=np.float64),
            np.asarray(data.get("log_likelihoods", []), dtype=np.float64),
            float(data.get("acceptance_rate", float("nan"))),
        )


def composite_features(Z, U, X, atomic) -> np.ndarray:
    """Phi[s, j] = AND over active i with Z[i, j] = 1 of (atomic[s, i] XOR U[i, j]).

    An empty conjunction is true.
    """
    Z = np.asarray(Z, dtype=bool)
    U = np.asarray(U, dtype=bool)
    X = np.asarray(X, dtype=bool)
    atomic = np.asarray(atomic, dtype=bool)
    active = Z & X[:, None]  # (M, K)
    literals = atomic[:, :, None] ^ U[None, :, :]  # (S, M, K)
    return np.all(literals | ~active[None, :, :], axis=1).astype(np.int8)


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


def boltzmann_log_likelihood(q: np.ndarray, pairs, eta: float) -> float:
    """Sum over (s, a) of eta * Q(s, a) - logsumexp_a' eta * Q(s, a')."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    scaled = eta * q[pairs[:, 0]]
    return float(np.sum(scaled[np.arange(len(pairs)), pairs[:, 1]] - _logsumexp_rows(scaled)))


def demo_log_likelihood(r, world: GridWorld, demo: Demonstration, eta: float) -> float:
    """Boltzmann likelihood of every demonstrated pair under Q* for rewards ``r``."""
    _, q = value_iteration(world.with_rewards(r), tol=LIKELIHOOD_TOL)
    return boltzmann_log_likelihood(q, demo.pairs, eta)


def _log_prior(state: SamplerState, params: SamplerParams) -> float:
    # Z and U carry uniform Bernoulli(0.5) priors, constant under flips.
    a, b = params.kappa_beta
    k = state.kappa
    x_on = int(state.X.sum())
    x_off = state.X.size - x_on
    lp = x_on * math.log(k) + x_off * math.log1p(-k)
    lp += (a - 1.0) * math.log(k) + (b - 1.0) * math.log1p(-k)
    lp += -0.5 * float(np.sum(state.w ** 2)) / params.weight_prior_sigma ** 2
    return lp


def _refresh(state: SamplerState, atomic: np.ndarray) -> None:
    state.Phi = composite_features(state.Z, state.U, state.X, atomic)
    state.r = state.Phi @ state.w


def _initial_state(m: int, params: SamplerParams, atomic: np.ndarray, rng: np.random.Generator) -> SamplerState:
    kappa = float(np.clip(rng.beta(*params.kappa_beta), 1e-6, 1 - 1e-6))
    state = SamplerState(
        Z=rng.random((m, params.max_k)) < 0.5,
        U=rng.random((m, params.max_k)) < 0.5,
        X=rng.random(m) < kappa,
        kappa=kappa,
        w=rng.normal(0.0, params.weight_prior_sigma, size=params.max_k),
        Phi=np.zeros((atomic.shape[0], params.max_k), dtype=np.int8),
        r=np.zeros(atomic.shape[0]),
    )
    _refresh(state, atomic)
    return state


def _propose(state: SamplerState, params: SamplerParams, rng: np.random.Generator) -> tuple[SamplerState, float]:
    """Draw a proposal and its Hastings correction log q(old|new) - log q(new|old).

    Weight and kappa moves redraw from their priors, so their correction
    cancels the corresponding prior ratio.
    """
    new = state.copy()
    m, k = new.Z.shape
    move = int(rng.integers(5))
    correction = 0.0
    if move == 0:
        i, j = rng.integers(m), rng.integers(k)
        new.Z[i, j] = ~new.Z[i, j]
    elif move == 1:
        i, j = rng.integers(m), rng.integers(k)
        new.U[i, j] = ~new.U[i, j]
    elif move == 2:
        i = rng.integers(m)
        new.X[i] = ~new.X[i]
    elif move == 3:
        j = int(rng.integers(k))
        old_w = new.w[j]
        new.w[j] = rng.normal(0.0, params.weight_prior_sigma)
        # independence proposal from the prior: q ratio = prior(old) / prior(new)
        correction = 0.5 * (new.w[j] ** 2 - old_w ** 2) / params.weight_prior_sigma ** 2
    else:
        a, b = params.kappa_beta
        old_k = new.kappa
        new.kappa = float(np.clip(rng.beta(a, b), 1e-6, 1 - 1e-6))
        correction = -((a - 1.0) * (math.log(new.kappa) - math.log(old_k))
                       + (b - 1.0) * (math.log1p(-new.kappa) - math.log1p(-old_k)))
    return new, correction


def mh_accept(log_ratio: float, rng: np.random.Generator) -> bool:
    """Metropolis-Hastings rule: always accept a non-negative log ratio."""
    if log_ratio >= 0.0:
        return True
    return bool(rng.random() < math.exp(log_ratio))


def sample_reward_trace(world: GridWorld, demo: Demonstration, params: SamplerParams) -> RewardTrace:
    """Run the Metropolis-Hastings chain and record ``r`` after every iteration."""
    rng = np.random.default_rng(params.seed)
    atomic = np.asarray(world.features, dtype=bool)
    pairs = np.asarray(demo.pairs, dtype=np.int64)

    def loglik(r):
        _, q = value_iteration_arrays(r, world.successors, world.d, world.gamma, tol=LIKELIHOOD_TOL)
        return boltzmann_log_likelihood(q, pairs, params.eta)

    state = _initial_state(atomic.shape[1], params, atomic, rng)
    state.log_likelihood = loglik(state.r)
    log_post = state.log_likelihood + _log_prior(state, params)

    total = params.burn_in + params.iterations
    recorded = np.empty((params.iterations, world.num_states))
    lls = np.empty(params.iterations)
    accepted = 0
    for t in range(total):
        proposal, correction = _propose(state, params, rng)
        _refresh(proposal, atomic)
        # flips that leave r unchanged skip the MDP solve
        if np.array_equal(proposal.r, state.r):
            proposal.log_likelihood = state.log_likelihood
        else:
            proposal.log_likelihood = loglik(proposal.r)
        new_post = proposal.log_likelihood + _log_prior(proposal, params)
        if mh_accept(new_post - log_post + correction, rng):
            state, log_post = proposal, new_post
            accepted += 1
        if t >= params.burn_in:
            recorded[t - params.burn_in] = state.r
            lls[t - params.burn_in] = state.log_likelihood
    return RewardTrace(recorded, lls, accepted / total)


def aggregate_mean(trace: RewardTrace) -> np.ndarray:
    if trace.num_iterations == 0:
        raise ValueError("empty reward trace")
    return trace.iterations.mean(axis=0)


def trace_inputs(trace: RewardTrace, cap: int = 16) -> np.ndarray:
    """(|S|, T') network inputs: each state's rewards across iterations.

    Traces longer than ``cap`` are subsampled at evenly spaced iterations.
    """
    its = trace.iterations
    if its.shape[0] > cap:
        idx = np.unique(np.round(np.linspace(0, its.shape[0] - 1, cap)).astype(int))
        its = its[idx]
    return np.ascontiguousarray(its.T)


def rewards_to_policy(world: GridWorld, rewards, squarings: int = LMDP_SQUARINGS) -> np.ndarray:
    """Greedy policy for ``rewards``; LMDP solves that stall keep their last iterate.

    ``squarings=0`` skips the strided phase of the LMDP solver, trading
    accuracy on nearly degenerate rewards for a bounded cost per call.
    """
    return optimal_policy(world.with_rewards(rewards), strict=False, squarings=squarings)


def run_bnp_neat(
    world: GridWorld,
    demo: Demonstration,
    trace: RewardTrace,
    evolution: EvolutionParams,
    cap: int = 16,
    early_termination: bool = True,
    on_generation: Optional[Callable[[dict], None]] = None,
) -> IrlResult:
    """Evolve networks mapping each state's reward trace to a single reward.

    Each genome's reward vector is solved to an optimal policy for the
    world's kind and scored with the same shifted coherence as NEAT-IRL.
    """
    inputs = trace_inputs(trace, cap)
    targets = DemoTargets.from_demo(demo)

    def fitness(genome: Genome) -> float:
        rewards = activate_batch(genome, inputs)
        if not np.all(np.isfinite(rewards)):
            return 0.0
        # plain sweeps only: this runs once per genome per generation
        return float(targets.score(rewards_to_policy(world, rewards, squarings=0)))

    target = targets.perfect_fitness if early_termination else None
    evo = run_evolution(inputs.shape[1], evolution, fitness, target, on_generation)
    rewards = activate_batch(evo.best, inputs)
    solved = world.with_rewards(rewards)
    return IrlResult(
        best_genome=evo.best,
        learned_values=solve_values(solved, strict=False),
        learned_policy=optimal_policy(solved, strict=False),
        generations_run=evo.generations_run,
        terminated_early=evo.reached_target,
        fitness_history=evo.history,
        best_fitness=evo.best_fitness,
        perfect_fitness=targets.perfect_fitness,
        learned_rewards=rewards,
    )
