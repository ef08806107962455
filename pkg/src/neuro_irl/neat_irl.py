"""NEAT-IRL: evolve networks from state features to state values.

A genome is scored by turning its per-state outputs into a greedy policy
(one-step comparison of neighbouring values) and summing the coherence of
that policy with the demonstrated actions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, TextIO

import numpy as np

from .demos import Demonstration
from .gridworld import Action, GridWorld
from .neat import EvolutionParams, Genome, activate_batch, run_evolution


def coherence(generated, demonstrated) -> int:
    """+1 for the same action, -1 for the reverse move, 0 for anything else."""
    generated, demonstrated = Action(generated), Action(demonstrated)
    if generated is demonstrated:
        return 1
    if demonstrated.opposite() is generated:
        return -1
    return 0


# _COHERENCE[g, d] == coherence(g, d)
_COHERENCE = np.array([[coherence(g, d) for d in Action] for g in Action], dtype=np.int64)


def values_to_policy(values, world: GridWorld) -> np.ndarray:
    """Greedy policy over the intended successors' values.

    Blocked moves self-loop and so score the current state's value, the same
    as Nothing. Ties resolve in action order Up, Down, Left, Right, Nothing.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (world.num_states,):
        raise ValueError(f"expected {world.num_states} values, got shape {values.shape}")
    return np.argmax(values[world.successors], axis=1).astype(np.int64)


@dataclass(frozen=True)
class DemoTargets:
    """Distinct demonstrated states and the expert action at each."""

    states: np.ndarray
    actions: np.ndarray

    @classmethod
    def from_demo(cls, demo: Demonstration) -> "DemoTargets":
        pairs = demo.state_actions()
        states = np.array(sorted(pairs), dtype=np.int64)
        return cls(states, np.array([pairs[s] for s in states], dtype=np.int64))

    @property
    def perfect_fitness(self) -> int:
        return 2 * len(self.states)

    def score(self, policy: np.ndarray) -> int:
        """Coherence sum over distinct demonstrated states, shifted by +k."""
        raw = _COHERENCE[policy[self.states], self.actions].sum()
        return int(raw) + len(self.states)


def policy_fitness(policy: np.ndarray, demo: Demonstration) -> int:
    return DemoTargets.from_demo(demo).score(np.asarray(policy))


def genome_fitness(genome: Genome, world: GridWorld, demo: Demonstration) -> float:
    """Shifted coherence of the genome's value policy with the demonstration.

    Lies in ``[0, 2k]`` for ``k`` distinct demonstrated states; ``2k`` means
    every demonstrated action is reproduced.
    """
    values = activate_batch(genome, world.features)
    return float(DemoTargets.from_demo(demo).score(values_to_policy(values, world)))


@dataclass(frozen=True)
class IrlConfig:
    world: GridWorld
    demo: Demonstration
    evolution: EvolutionParams = EvolutionParams()
    early_termination: bool = True

    def __post_init__(self):
        bad = [s for s in self.demo.demo_states if not 0 <= s < self.world.num_states]
        if bad:
            raise ValueError(f"demonstrated states {bad} are outside the world")


@dataclass
class IrlResult:
    best_genome: Genome
    learned_values: np.ndarray
    learned_policy: np.ndarray
    generations_run: int
    terminated_early: bool
    fitness_history: list[float]
    best_fitness: float
    perfect_fitness: int
    learned_rewards: Optional[np.ndarray] = None


def progress_writer(fh: TextIO) -> Callable[[dict], None]:
    """Callback that writes one JSON line per generation to ``fh``."""

    def write(record: dict) -> None:
        fh.write(json.dumps(record) + "\n")

    return write


def run_neat_irl(config: IrlConfig, on_generation: Optional[Callable[[dict], None]] = None) -> IrlResult:
    world = config.world
    targets = DemoTargets.from_demo(config.demo)
    features = np.asarray(world.features, dtype=np.float64)

    def fitness(genome: Genome) -> float:
        values = activate_batch(genome, features)
        return float(targets.score(values_to_policy(values, world)))

    target = targets.perfect_fitness if config.early_termination else None
    evo = run_evolution(world.num_features, config.evolution, fitness, target, on_generation)
    values = activate_batch(evo.best, features)
    return IrlResult(
        best_genome=evo.best,
        learned_values=values,
        learned_policy=values_to_policy(values, world),
        generations_run=evo.generations_run,
        terminated_early=evo.reached_target,
        fitness_history=evo.history,
        best_fitness=evo.best_fitness,
        perfect_fitness=targets.perfect_fitness,
    )
