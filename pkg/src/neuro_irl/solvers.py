"""Optimal values and policies for standard and linearly solvable grid MDPs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .gridworld import GridWorld, MdpKind

VI_TOL = 1e-10
LMDP_TOL = 1e-9
LMDP_TIE_TOL = 1e-12
LMDP_SQUARINGS = 48
MAX_ITERS = 10_000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class LmdpSolution:
    """Desirability ``z`` (max-normalised to 1), ``v = log z`` and the
    controlled successor distribution ``policy_dist[s, s'] ~ p(s'|s) z(s')``.

    ``log_rate`` is the log of the principal eigenvalue of ``diag(exp(-q)) P``
    (the average reward per step); ``residual`` is the sup-norm error of
    ``z = exp(-q - log_rate) * (P z)``.
    """

    z: np.ndarray
    v: np.ndarray
    policy_dist: np.ndarray
    log_rate: float
    residual: float
    iterations: int


def value_iteration_arrays(rewards, successors, d, gamma, tol=VI_TOL, max_iters=MAX_ITERS):
    """Value iteration on a successor table with the grid noise model.

    Returns ``(v, q)``. The Bellman residual of ``v`` is below ``tol``:
    the loop stops once a sweep changes ``v`` by less than ``tol``, and the
    residual of the returned iterate is at most ``gamma`` times that change.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    successors = np.asarray(successors, dtype=np.int64)
    v, iters, delta = kernels.value_iteration(rewards, successors, float(d), float(gamma), float(tol), int(max_iters))
    if not delta < tol:
        raise ConvergenceError("value iteration did not converge", delta, iters)
    q = kernels.q_values(rewards, successors, float(d), float(gamma), v)
    return v, q


def value_iteration(world: GridWorld, tol: float = VI_TOL, max_iters: int = MAX_ITERS):
    """Optimal state values and Q(s, a) with reward on the current state."""
    return value_iteration_arrays(world.rewards, world.successors, world.d, world.gamma, tol, max_iters)


def bellman_residual(world: GridWorld, v: np.ndarray) -> float:
    q = kernels.q_values(world.rewards, world.successors, world.d, world.gamma, np.asarray(v, dtype=np.float64))
    return float(np.max(np.abs(q.max(axis=1) - v)))


def extract_greedy_policy(q: np.ndarray) -> np.ndarray:
    """argmax over actions; the first maximum wins (Up < Down < Left < Right < Nothing)."""
    q = np.asarray(q, dtype=np.float64)
    return np.argmax(q, axis=1).astype(np.int64)


def _passive_csr(passive: np.ndarray):
    rows, cols = np.nonzero(passive)
    counts = np.bincount(rows, minlength=passive.shape[0])
    if np.any(counts == 0):
        raise ValueError(f"passive dynamics rows {np.flatnonzero(counts == 0).tolist()} have no mass")
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return indptr, cols.astype(np.int64), np.log(passive[rows, cols])


def _normalised_step(log_op: np.ndarray, v: np.ndarray) -> np.ndarray:
    w = kernels.log_matmul(log_op, v[:, None])[:, 0]
    return w - w.max()


def _squaring_phase(neg_cost, passive, v, tol, squarings):
    """Continue the power iteration in geometrically growing strides.

    ``log G`` is squared in the log-sum-exp semiring, so after ``k``
    squarings one application advances the iteration by ``2**k`` sweeps.
    Needed when the leading eigenvalues nearly coincide and plain sweeps
    crawl. Convergence is still judged by a single ordinary sweep.
    """
    with np.errstate(divide="ignore"):
        log_op = neg_cost[:, None] + np.log(passive)
    power = log_op - log_op.max()
    steps = 0
    delta = np.inf
    for k in range(1, squarings + 1):
        power = kernels.log_matmul(power, power)
        power -= power.max()
        v = _normalised_step(power, v)
        steps += 2 ** k
        nxt = _normalised_step(log_op, v)
        delta = float(np.max(np.abs(nxt - v)))
        v = nxt
        steps += 1
        if delta < tol:
            break
    return v, steps, delta


def solve_lmdp(world: GridWorld, tol: float = LMDP_TOL, max_iters: int = MAX_ITERS,
               strict: bool = True, squarings: int = LMDP_SQUARINGS) -> LmdpSolution:
    """Principal solution of ``z = exp(-q) * (P z)`` by renormalised power iteration.

    The iteration runs on ``v = log z`` so that desirabilities many orders
    of magnitude below the maximum do not underflow. ``v`` is only defined
    up to an additive constant; it is pinned so that ``max(v) = 0``.
    Convergence means one sweep changes no entry of ``v`` by ``tol`` or
    more, i.e. every desirability is accurate relative to itself.

    Up to ``max_iters`` plain sweeps run first; if they have not converged,
    up to ``squarings`` strided rounds follow (see ``_squaring_phase``).
    With ``strict=False`` a solve that still has not converged returns the
    last iterate instead of raising; its ``residual`` tells how far off it is.
    """
    if world.passive_dynamics is None or world.state_costs is None:
        raise ValueError("world has no LMDP data; build it with mdp_kind=linear or call to_lmdp")
    passive = np.asarray(world.passive_dynamics, dtype=np.float64)
    indptr, indices, log_p = _passive_csr(passive)
    neg_cost = -np.asarray(world.state_costs, dtype=np.float64)
    v, iters, delta = kernels.lmdp_power_iteration(neg_cost, indptr, indices, log_p, float(tol), int(max_iters))
    if not delta < tol and squarings > 0:
        v, extra, delta = _squaring_phase(neg_cost, passive, v, tol, squarings)
        iters += extra
    if strict and not delta < tol:
        raise ConvergenceError("LMDP power iteration did not converge", delta, iters)

    z = np.exp(v)
    gz = np.exp(neg_cost) * (passive @ z)
    log_rate = float(np.log(gz.max()))
    residual = float(np.max(np.abs(z - np.exp(neg_cost - log_rate) * (passive @ z))))

    with np.errstate(divide="ignore"):
        logits = np.log(passive) + v[None, :]
    logits -= logits.max(axis=1, keepdims=True)
    dist = np.exp(logits)
    dist /= dist.sum(axis=1, keepdims=True)
    return LmdpSolution(z=z, v=v, policy_dist=dist, log_rate=log_rate, residual=residual, iterations=iters)


def lmdp_greedy_policy(sol: LmdpSolution, world: GridWorld) -> np.ndarray:
    """Action whose intended successor has the largest desirability.

    Compared on ``v = log z``, which orders states exactly like ``z`` but
    keeps distinct values where ``z`` itself would underflow to 0. Values
    within ``LMDP_TIE_TOL`` of the best count as tied (round-off in the
    log-domain sweep would otherwise break exact ties), and ties go to the
    first action.
    """
    cand = sol.v[world.successors]
    near = cand >= cand.max(axis=1, keepdims=True) - LMDP_TIE_TOL
    return np.argmax(near, axis=1).astype(np.int64)


def optimal_policy(world: GridWorld, strict: bool = True, squarings: int = LMDP_SQUARINGS) -> np.ndarray:
    """Expert policy for the world's kind: value iteration or LMDP."""
    if world.mdp_kind is MdpKind.LINEAR:
        return lmdp_greedy_policy(solve_lmdp(world, strict=strict, squarings=squarings), world)
    _, q = value_iteration(world)
    return extract_greedy_policy(q)


def solve_values(world: GridWorld, strict: bool = True) -> np.ndarray:
    """State values used for reporting: v* for standard worlds, log z for linear ones."""
    if world.mdp_kind is MdpKind.LINEAR:
        return solve_lmdp(world, strict=strict).v
    return value_iteration(world)[0]


def evaluate_policy(world: GridWorld, policy: np.ndarray) -> np.ndarray:
    """Exact discounted return of a deterministic policy via a linear solve."""
    theta = world.transitions
    n = world.num_states
    p_pi = theta[np.arange(n), np.asarray(policy)]
    return np.linalg.solve(np.eye(n) - world.gamma * p_pi, world.rewards)
