"""Seeded batch experiments: one grid world per run, scored against the expert.

Run ``i`` uses seed ``base_seed + i``. Every random choice in a run (world,
goal placement, demonstration, sampler, evolution) is drawn from a stream
derived from that seed and a fixed tag, so two algorithms run on the same
seed see the same world, demonstration and reward trace.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .demos import sample_demonstrations
from .gridworld import GridSpec, MdpKind, build_gridworld, place_goals
from .metrics import TTestResult, misprediction, two_tailed_t_test
from .neat import EvolutionParams
from .neat_irl import IrlConfig, run_neat_irl
from .reward_trace import SamplerParams, aggregate_mean, rewards_to_policy, run_bnp_neat, sample_reward_trace
from .solvers import optimal_policy

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "run,seed,algorithm,n,d,mdp_kind,n_samples,sample_len,pop,gens,goals,"
    "misprediction,seconds,generations_run,terminated_early"
)
CSV_FIELDS = tuple(CSV_HEADER.split(","))

SWEEP_AXES = ("n_samples", "pop", "gens", "goals")

_GOAL_STREAM = 1
_DEMO_STREAM = 2
_SAMPLER_STREAM = 3
_EVOLUTION_STREAM = 4


class Algorithm(str, enum.Enum):
    NEAT_IRL = "neat-irl"
    BNP_MEAN = "bnp-mean"
    BNP_NEAT = "bnp-neat"

    @classmethod
    def parse(cls, value) -> "Algorithm":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"neatirl": "neat-irl", "bnpmean": "bnp-mean", "bnpneat": "bnp-neat"}
        return cls(aliases.get(key.replace("-", ""), key))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: Algorithm = Algorithm.NEAT_IRL
    n: int = 4
    b: int = 1
    d: float = 1.0
    mdp_kind: MdpKind = MdpKind.STANDARD
    gamma: float = 0.9
    goals: int = 0
    """Number of randomly placed goal states; 0 means random macroblock rewards."""
    goal_reward: float = 100.0
    goal_states: Optional[tuple[int, ...]] = None
    """Fixed goal placement; overrides random placement when given."""
    n_samples: int = 4
    sample_len: int = 1
    pop: int = 50
    gens: int = 50
    early_termination: bool = True
    evolution: dict = field(default_factory=dict)
    """Extra EvolutionParams overrides (mutation rates, speciation, ...)."""
    iterations: int = 8
    burn_in: int = 0
    eta: float = 1.0
    max_k: int = 8
    weight_sigma: float = 1.0
    trace_cap: int = 16
    runs: int = 25
    base_seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))
            object.__setattr__(self, "mdp_kind", MdpKind(str(getattr(self.mdp_kind, "value", self.mdp_kind)).lower()))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.goal_states is not None:
            object.__setattr__(self, "goal_states", tuple(int(s) for s in self.goal_states))
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.goals < 0 or self.goals > self.n * self.n:
            raise ConfigError(f"goals must lie in [0, {self.n * self.n}]")
        if self.n_samples < 1 or self.sample_len < 1:
            raise ConfigError("n_samples and sample_len must be >= 1")
        if self.pop < 1 or self.gens < 1:
            raise ConfigError("pop and gens must be >= 1")
        unknown = set(self.evolution) - {f.name for f in fields(EvolutionParams)}
        if unknown:
            raise ConfigError(f"unknown evolution parameters: {sorted(unknown)}")

    @property
    def goal_count(self) -> int:
        return len(self.goal_states) if self.goal_states is not None else self.goals

    def to_dict(self) -> dict:
        data = asdict(self)
        data["algorithm"] = self.algorithm.value
        data["mdp_kind"] = self.mdp_kind.value
        data["goal_states"] = None if self.goal_states is None else list(self.goal_states)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class RunRow:
    run: int
    seed: int
    algorithm: str
    n: int
    d: float
    mdp_kind: str
    n_samples: int
    sample_len: int
    pop: int
    gens: int
    goals: int
    misprediction: Optional[float]
    seconds: float
    generations_run: int
    terminated_early: bool
    error: Optional[str] = None

    def csv_values(self) -> list[str]:
        return [
            str(self.run),
            str(self.seed),
            self.algorithm,
            str(self.n),
            repr(float(self.d)),
            self.mdp_kind,
            str(self.n_samples),
            str(self.sample_len),
            str(self.pop),
            str(self.gens),
            str(self.goals),
            "" if self.misprediction is None else repr(float(self.misprediction)),
            f"{self.seconds:.6f}",
            str(self.generations_run),
            "true" if self.terminated_early else "false",
        ]


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    count: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[RunRow]

    @property
    def scores(self) -> np.ndarray:
        return np.array([r.misprediction for r in self.rows if r.misprediction is not None], dtype=np.float64)

    @property
    def failed(self) -> list[RunRow]:
        return [r for r in self.rows if r.misprediction is None]

    @property
    def aggregate(self) -> Aggregate:
        s = self.scores
        if s.size == 0:
            return Aggregate(math.nan, math.nan, 0)
        return Aggregate(float(s.mean()), float(s.std(ddof=1)) if s.size > 1 else 0.0, int(s.size))

    def compare(self, other: "ExperimentResult") -> TTestResult:
        return two_tailed_t_test(self.scores, other.scores)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


def rows_to_csv(rows: Sequence[RunRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow(row.csv_values())
    return buf.getvalue()


def write_csv(rows: Sequence[RunRow], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, dtype=np.uint32)[0])


def build_run_world(config: ExperimentConfig, seed: int):
    if config.goal_states is not None:
        goals = tuple((s, config.goal_reward) for s in config.goal_states)
    elif config.goals > 0:
        goals = place_goals(config.n, config.goals, config.goal_reward, np.random.default_rng(_derived_seed(seed, _GOAL_STREAM)))
    else:
        goals = None
    spec = GridSpec(n=config.n, b=config.b, d=config.d, mdp_kind=config.mdp_kind, gamma=config.gamma, goals=goals, seed=seed)
    return build_gridworld(spec)


def evolution_params(config: ExperimentConfig, seed: int) -> EvolutionParams:
    return EvolutionParams(
        pop_size=config.pop,
        max_generations=config.gens,
        seed=_derived_seed(seed, _EVOLUTION_STREAM),
        **config.evolution,
    )


def sampler_params(config: ExperimentConfig, seed: int) -> SamplerParams:
    return SamplerParams(
        max_k=config.max_k,
        eta=config.eta,
        iterations=config.iterations,
        weight_prior_sigma=config.weight_sigma,
        burn_in=config.burn_in,
        seed=_derived_seed(seed, _SAMPLER_STREAM),
    )


def execute_run(config: ExperimentConfig, index: int) -> RunRow:
    """One run: build world, solve the expert, demonstrate, learn, score."""
    seed = config.base_seed + index
    row = RunRow(
        run=index, seed=seed, algorithm=config.algorithm.value, n=config.n, d=config.d,
        mdp_kind=config.mdp_kind.value, n_samples=config.n_samples, sample_len=config.sample_len,
        pop=config.pop, gens=config.gens, goals=config.goal_count,
        misprediction=None, seconds=0.0, generations_run=0, terminated_early=False,
    )
    try:
        world = build_run_world(config, seed)
        expert = optimal_policy(world)
        demo = sample_demonstrations(world, expert, config.n_samples, config.sample_len, _derived_seed(seed, _DEMO_STREAM))
        start = time.perf_counter()
        if config.algorithm is Algorithm.NEAT_IRL:
            result = run_neat_irl(IrlConfig(world, demo, evolution_params(config, seed), config.early_termination))
            policy = result.learned_policy
            row.generations_run, row.terminated_early = result.generations_run, result.terminated_early
        else:
            trace = sample_reward_trace(world, demo, sampler_params(config, seed))
            if config.algorithm is Algorithm.BNP_MEAN:
                policy = rewards_to_policy(world, aggregate_mean(trace))
            else:
                result = run_bnp_neat(
                    world, demo, trace, evolution_params(config, seed),
                    cap=config.trace_cap, early_termination=config.early_termination,
                )
                policy = result.learned_policy
                row.generations_run, row.terminated_early = result.generations_run, result.terminated_early
        row.seconds = time.perf_counter() - start
        row.misprediction = misprediction(policy, expert)
    except Exception as exc:  # recorded per run, excluded from aggregates
        logger.warning("run %d (seed %d) failed: %s", index, seed, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def worker_count(default: Optional[int] = None) -> int:
    env = os.environ.get("NEURO_IRL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"NEURO_IRL_THREADS must be an integer, got {env!r}") from None
    return default or os.cpu_count() or 1


def _execute_star(args):
    return execute_run(*args)


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    workers = min(workers or worker_count(), config.runs)
    jobs = [(config, i) for i in range(config.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_execute_star, jobs))
    else:
        rows = [execute_run(*job) for job in jobs]
    rows.sort(key=lambda r: r.run)
    result = ExperimentResult(config, rows)
    if config.out:
        write_csv(rows, config.out)
    return result


def sweep(config: ExperimentConfig, axis: str, values: Sequence, out: Optional[str] = None,
          workers: Optional[int] = None) -> list[ExperimentResult]:
    """One experiment per axis value; optionally one combined long-format CSV."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    results = []
    for value in values:
        cfg = replace(config, **{axis: int(value)}, out=None)
        if axis == "goals":
            cfg = replace(cfg, goal_states=None)
        results.append(run_experiment(cfg, workers))
    if out:
        write_csv([row for res in results for row in res.rows], out)
    return results
