"""Speciated generational evolution.

Randomness is drawn from per-genome streams keyed on (run seed, generation,
slot, purpose), so the result of a generation does not depend on the order
in which genomes are evaluated. The innovation registry is the only shared
mutable state and is only touched while children are produced, in slot
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .genome import Genome, InnovationRegistry, compatibility_distance, crossover, mutate, perceptron

_INIT_STREAM = 0
_BREED_STREAM = 1


@dataclass(frozen=True)
class EvolutionParams:
    pop_size: int = 50
    max_generations: int = 50
    p_add_node: float = 0.03
    p_add_connection: float = 0.05
    p_weight: float = 0.8
    weight_sigma: float = 0.5
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.4
    compat_threshold: float = 3.0
    elitism: int = 1
    crossover_fraction: float = 0.75
    survival_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.pop_size < 1 or self.max_generations < 1:
            raise ValueError("pop_size and max_generations must be >= 1")
        for name in ("p_add_node", "p_add_connection", "p_weight", "crossover_fraction", "survival_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.elitism <= self.pop_size:
            raise ValueError("elitism must lie in [0, pop_size]")


@dataclass
class Species:
    id: int
    representative: Genome
    members: list[int] = field(default_factory=list)


@dataclass
class Population:
    genomes: list[Genome]
    registry: InnovationRegistry
    params: EvolutionParams
    generation: int = 0
    species: list[Species] = field(default_factory=list)
    next_species_id: int = 0


def _stream(params: EvolutionParams, generation: int, slot: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng([params.seed, generation, slot, purpose])


def init_population(num_inputs: int, params: EvolutionParams) -> Population:
    """``pop_size`` perceptron genomes sharing one set of innovation numbers."""
    registry = InnovationRegistry()
    genomes = [
        perceptron(num_inputs, registry, _stream(params, 0, i, _INIT_STREAM)) for i in range(params.pop_size)
    ]
    return Population(genomes, registry, params)


def speciate(pop: Population, params: EvolutionParams) -> list[Species]:
    """Assign each genome to the first species whose representative is
    within ``compat_threshold``; unmatched genomes found new species."""
    species = [Species(s.id, s.representative) for s in pop.species]
    for idx, genome in enumerate(pop.genomes):
        for sp in species:
            if compatibility_distance(genome, sp.representative, params.c1, params.c2, params.c3) < params.compat_threshold:
                sp.members.append(idx)
                break
        else:
            species.append(Species(pop.next_species_id, genome, [idx]))
            pop.next_species_id += 1
    return [sp for sp in species if sp.members]


def allocate_offspring(scores, total: int) -> list[int]:
    """Split ``total`` children proportionally to ``scores`` (largest remainder).

    A zero score total falls back to an even split.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 0:
        return []
    if scores.sum() <= 0.0:
        scores = np.ones_like(scores)
    quotas = total * scores / scores.sum()
    counts = np.floor(quotas).astype(int)
    remainder = total - counts.sum()
    order = sorted(range(len(scores)), key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in order[:remainder]:
        counts[k] += 1
    return counts.tolist()


def evolve_generation(pop: Population, fitnesses, params: Optional[EvolutionParams] = None) -> Population:
    """Produce the next generation from evaluated fitnesses (all >= 0).

    Elites are copied unchanged; the remaining slots are shared between
    species in proportion to their mean fitness (explicit fitness sharing).
    Within a species, parents come from the top ``survival_fraction``.
    """
    params = params or pop.params
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    if fitnesses.shape != (len(pop.genomes),):
        raise ValueError(f"expected {len(pop.genomes)} fitness values, got shape {fitnesses.shape}")
    if np.any(fitnesses < 0) or not np.all(np.isfinite(fitnesses)):
        raise ValueError("fitness values must be finite and non-negative")
    for g, f in zip(pop.genomes, fitnesses):
        g.fitness = float(f)

    species = speciate(pop, params)
    shared = [fitnesses[sp.members].sum() / len(sp.members) for sp in species]

    ranking = sorted(range(len(pop.genomes)), key=lambda i: (-fitnesses[i], i))
    n_elite = min(params.elitism, params.pop_size)
    next_genomes = [pop.genomes[i].copy() for i in ranking[:n_elite]]

    generation = pop.generation + 1
    slot = n_elite
    for sp, n_children in zip(species, allocate_offspring(shared, params.pop_size - n_elite)):
        members = sorted(sp.members, key=lambda i: (-fitnesses[i], i))
        pool = members[: max(1, math.ceil(params.survival_fraction * len(members)))]
        for _ in range(n_children):
            rng = _stream(params, generation, slot, _BREED_STREAM)
            if len(pool) >= 2 and rng.random() < params.crossover_fraction:
                a, b = rng.choice(len(pool), size=2, replace=False)
                pa, pb = pool[a], pool[b]
                if (fitnesses[pb], -pb) > (fitnesses[pa], -pa):
                    pa, pb = pb, pa
                child = crossover(pop.genomes[pa], pop.genomes[pb], rng)
            else:
                child = pop.genomes[pool[int(rng.integers(len(pool)))]].copy()
            next_genomes.append(mutate(child, params, pop.registry, rng))
            slot += 1

    for sp in species:
        sp.representative = pop.genomes[min(sp.members, key=lambda i: (-fitnesses[i], i))]
    return Population(next_genomes, pop.registry, params, generation, species, pop.next_species_id)


@dataclass
class EvolutionResult:
    best: Genome
    best_fitness: float
    history: list[float]
    """Best-so-far fitness after each evaluated generation."""
    generations_run: int
    reached_target: bool
    species_counts: list[int]


def run_evolution(
    num_inputs: int,
    params: EvolutionParams,
    fitness_fn: Callable[[Genome], float],
    target: Optional[float] = None,
    on_generation: Optional[Callable[[dict], None]] = None,
) -> EvolutionResult:
    """Evolve for up to ``max_generations`` evaluated generations.

    Stops as soon as a genome reaches ``target`` (when given). Genomes are
    scored in population order; ties for best go to the earliest genome.
    """
    pop = init_population(num_inputs, params)
    best, best_fit = None, -math.inf
    history: list[float] = []
    species_counts: list[int] = []
    reached = False
    for gen in range(params.max_generations):
        fits = np.array([fitness_fn(g) for g in pop.genomes], dtype=np.float64)
        top = int(np.argmax(fits))
        if fits[top] > best_fit:
            best_fit = float(fits[top])
            best = pop.genomes[top].copy()
            best.fitness = best_fit
        history.append(best_fit)
        reached = target is not None and best_fit >= target
        last = reached or gen == params.max_generations - 1
        if not last:
            pop = evolve_generation(pop, fits, params)
            species_counts.append(len(pop.species))
        else:
            species_counts.append(len(speciate(pop, params)))
        if on_generation is not None:
            on_generation({"generation": gen, "best_fitness": best_fit, "species": species_counts[-1]})
        if reached:
            break
    return EvolutionResult(best, best_fit, history, len(history), reached, species_counts)
