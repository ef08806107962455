"""Expert demonstrations sampled from an optimal policy."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .gridworld import Action, GridWorld

Trace = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Demonstration:
    traces: tuple[Trace, ...]

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [p for trace in self.traces for p in trace]

    @property
    def demo_states(self) -> list[int]:
        return sorted({s for s, _ in self.pairs})

    def state_actions(self) -> dict[int, int]:
        """Demonstrated action per distinct state (first occurrence wins)."""
        out: dict[int, int] = {}
        for s, a in self.pairs:
            out.setdefault(s, a)
        return out

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"pairs": [[s, Action(a).label] for s, a in trace]})
            for trace in self.traces
        ]
        return "\n".join(lines) + "\n"

    def dump(self, fh: TextIO) -> None:
        fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, lines: str | Iterable[str]) -> "Demonstration":
        if isinstance(lines, str):
            lines = lines.splitlines()
        traces = []
        for line in lines:
            if line.strip():
                pairs = json.loads(line)["pairs"]
                traces.append(tuple((int(s), int(Action.parse(a))) for s, a in pairs))
        return cls(tuple(traces))


def sample_demonstrations(world: GridWorld, expert, n_samples: int, length: int, seed) -> Demonstration:
    """Roll out ``n_samples`` expert traces of ``length`` pairs each.

    Start states are uniform over the grid (with replacement); each step
    records the expert action and moves to its intended successor.
    """
    if n_samples < 1 or length < 1:
        raise ValueError("n_samples and length must both be >= 1")
    expert = np.asarray(expert, dtype=np.int64)
    if expert.shape != (world.num_states,):
        raise ValueError(f"expert policy must cover all {world.num_states} states")
    rng = np.random.default_rng(seed)
    traces = []
    for start in rng.integers(world.num_states, size=n_samples):
        s = int(start)
        trace = []
        for _ in range(length):
            a = int(expert[s])
            trace.append((s, a))
            s = int(world.successors[s, a])
        traces.append(tuple(trace))
    return Demonstration(tuple(traces))
