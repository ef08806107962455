"""Grid world MDPs and their linearly solvable counterparts.

States are numbered row-major, ``s = row * n + col``, with row 0 at the top.
Each state carries ``2 (n - 1)`` binary thermometer features: the first
``n - 1`` encode the row (feature ``k`` is on iff ``row >= k + 1``), the
rest encode the column the same way.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

NUM_ACTIONS = 5

RANDOM_REWARD_ZERO_PROB = 0.7
RANDOM_REWARD_MAX = 10


class Action(enum.IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    NOTHING = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()

    def opposite(self) -> Optional["Action"]:
        """The reverse movement, or None for NOTHING."""
        return _OPPOSITE[self]

    @classmethod
    def parse(cls, value) -> "Action":
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown action {value!r}") from None
        return cls(int(value))


_OPPOSITE = {
    Action.UP: Action.DOWN,
    Action.DOWN: Action.UP,
    Action.LEFT: Action.RIGHT,
    Action.RIGHT: Action.LEFT,
    Action.NOTHING: None,
}

# (d_row, d_col) per action, in Action order.
_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0))


class MdpKind(str, enum.Enum):
    STANDARD = "standard"
    LINEAR = "linear"


@dataclass(frozen=True)
class GridSpec:
    """Parameters of a grid world.

    ``goals=None`` assigns random rewards per ``b x b`` macroblock; otherwise
    ``goals`` is a sequence of ``(state, reward)`` pairs and every other
    state gets reward 0.
    """

    n: int
    b: int = 1
    d: float = 1.0
    mdp_kind: MdpKind = MdpKind.STANDARD
    gamma: float = 0.9
    goals: Optional[tuple[tuple[int, float], ...]] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid side n must be >= 2, got {self.n}")
        if self.b < 1 or (self.b != 1 and self.n % self.b):
            raise ValueError(f"macroblock size {self.b} must divide n={self.n}")
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"determinism d must lie in [0, 1], got {self.d}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"discount gamma must lie in (0, 1), got {self.gamma}")
        object.__setattr__(self, "mdp_kind", MdpKind(self.mdp_kind))
        if self.goals is not None:
            goals = tuple((int(s), float(r)) for s, r in self.goals)
            for s, _ in goals:
                if not 0 <= s < self.n * self.n:
                    raise ValueError(f"goal state {s} outside [0, {self.n * self.n})")
            object.__setattr__(self, "goals", goals)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "b": self.b,
            "d": self.d,
            "mdp_kind": self.mdp_kind.value,
            "gamma": self.gamma,
            "goals": None if self.goals is None else [list(g) for g in self.goals],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        data = dict(data)
        if data.get("goals") is not None:
            data["goals"] = tuple(tuple(g) for g in data["goals"])
        return cls(**data)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridWorld:
    spec: GridSpec
    rewards: np.ndarray
    features: np.ndarray
    successors: np.ndarray
    """(|S|, 5) intended successor of each action (d = 1 semantics)."""
    passive_dynamics: Optional[np.ndarray] = None
    state_costs: Optional[np.ndarray] = None
    cost_scale: float = 1.0
    _transitions: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def num_states(self) -> int:
        return self.spec.n * self.spec.n

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def actions(self) -> list[Action]:
        return list(Action)

    @property
    def mdp_kind(self) -> MdpKind:
        return self.spec.mdp_kind

    @property
    def d(self) -> float:
        return self.spec.d

    @property
    def gamma(self) -> float:
        return self.spec.gamma

    @property
    def transitions(self) -> np.ndarray:
        """Dense ``(|S|, 5, |S|)`` array of theta(s' | s, a)."""
        if self._transitions is None:
            object.__setattr__(self, "_transitions", _frozen(_dense_transitions(self.successors, self.spec.d)))
        return self._transitions

    def coords(self, s: int) -> tuple[int, int]:
        return divmod(int(s), self.spec.n)

    def state(self, row: int, col: int) -> int:
        return row * self.spec.n + col

    def with_rewards(self, rewards: Sequence[float]) -> "GridWorld":
        """Same dynamics and features, new reward vector (LMDP costs follow)."""
        rewards = np.array(rewards, dtype=np.float64)
        if rewards.shape != (self.num_states,):
            raise ValueError(f"expected {self.num_states} rewards, got shape {rewards.shape}")
        world = replace(self, rewards=_frozen(rewards), state_costs=None)
        if self.passive_dynamics is not None:
            world = to_lmdp(world, self.cost_scale)
        return world

    def to_dict(self) -> dict:
        """JSON-ready view: spec, rewards, features and non-zero transitions."""
        theta = self.transitions
        triples = [
            [int(s), int(a), int(t), float(theta[s, a, t])]
            for s, a, t in zip(*np.nonzero(theta))
        ]
        out = {
            "spec": self.spec.to_dict(),
            "rewards": self.rewards.tolist(),
            "features": self.features.tolist(),
            "transitions": triples,
        }
        if self.state_costs is not None:
            out["state_costs"] = self.state_costs.tolist()
            out["cost_scale"] = self.cost_scale
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "GridWorld":
        spec = GridSpec.from_dict(data["spec"])
        world = _build_structure(spec, np.asarray(data["rewards"], dtype=np.float64))
        if spec.mdp_kind is MdpKind.LINEAR:
            world = to_lmdp(world, data.get("cost_scale", 1.0))
        return world

    @classmethod
    def from_json(cls, text: str) -> "GridWorld":
        return cls.from_dict(json.loads(text))


def grid_successors(n: int) -> np.ndarray:
    """Intended successor per (state, action); off-grid moves stay put."""
    rows, cols = np.divmod(np.arange(n * n), n)
    succ = np.empty((n * n, NUM_ACTIONS), dtype=np.int64)
    for a, (dr, dc) in enumerate(_MOVES):
        r2, c2 = rows + dr, cols + dc
        off = (r2 < 0) | (r2 >= n) | (c2 < 0) | (c2 >= n)
        succ[:, a] = np.where(off, np.arange(n * n), r2 * n + c2)
    return succ


def thermometer_features(n: int) -> np.ndarray:
    rows, cols = np.divmod(np.arange(n * n), n)
    ks = np.arange(1, n)
    row_bits = rows[:, None] >= ks[None, :]
    col_bits = cols[:, None] >= ks[None, :]
    return np.hstack([row_bits, col_bits]).astype(np.int8)


def state_features(world: GridWorld, s: int) -> np.ndarray:
    if not 0 <= s < world.num_states:
        raise IndexError(f"state {s} outside [0, {world.num_states})")
    return world.features[s]


def _dense_transitions(succ: np.ndarray, d: float) -> np.ndarray:
    n_states, n_actions = succ.shape
    theta = np.zeros((n_states, n_actions, n_states))
    noise = (1.0 - d) / n_actions
    idx = np.arange(n_states)
    for a in range(n_actions):
        for b in range(n_actions):
            np.add.at(theta[:, a, :], (idx, succ[:, b]), noise + (d if a == b else 0.0))
    return theta


def random_macroblock_rewards(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    blocks = n // b
    values = np.where(
        rng.random(blocks * blocks) < RANDOM_REWARD_ZERO_PROB,
        0.0,
        rng.integers(1, RANDOM_REWARD_MAX + 1, size=blocks * blocks).astype(np.float64),
    )
    if not values.any():
        values[rng.integers(blocks * blocks)] = rng.integers(1, RANDOM_REWARD_MAX + 1)
    rows, cols = np.divmod(np.arange(n * n), n)
    return values[(rows // b) * blocks + cols // b]


def _build_structure(spec: GridSpec, rewards: np.ndarray) -> GridWorld:
    return GridWorld(
        spec=spec,
        rewards=_frozen(rewards),
        features=_frozen(thermometer_features(spec.n)),
        successors=_frozen(grid_successors(spec.n)),
    )


def build_gridworld(spec: GridSpec) -> GridWorld:
    n = spec.n
    if spec.goals is None:
        rewards = random_macroblock_rewards(n, spec.b, np.random.default_rng(spec.seed))
    else:
        rewards = np.zeros(n * n)
        for s, r in spec.goals:
            rewards[s] = r
    world = _build_structure(spec, rewards)
    if spec.mdp_kind is MdpKind.LINEAR:
        world = to_lmdp(world)
    return world


def to_lmdp(world: GridWorld, cost_scale: float = 1.0) -> GridWorld:
    """Attach state costs ``q = -cost_scale * R`` and uniform passive dynamics.

    Passive dynamics put mass 1/5 on each action's intended successor, so
    self-loops from blocked moves accumulate.
    """
    n_states = world.num_states
    passive = np.zeros((n_states, n_states))
    np.add.at(passive, (np.repeat(np.arange(n_states), NUM_ACTIONS), world.successors.ravel()), 1.0 / NUM_ACTIONS)
    spec = world.spec if world.spec.mdp_kind is MdpKind.LINEAR else replace(world.spec, mdp_kind=MdpKind.LINEAR)
    return replace(
        world,
        spec=spec,
        passive_dynamics=_frozen(passive),
        state_costs=_frozen(-cost_scale * np.asarray(world.rewards, dtype=np.float64)),
        cost_scale=cost_scale,
    )


def place_goals(n: int, count: int, reward: float, rng: np.random.Generator) -> tuple[tuple[int, float], ...]:
    """``count`` distinct goal states drawn uniformly, each with ``reward``."""
    if not 0 < count <= n * n:
        raise ValueError(f"cannot place {count} goals on a {n}x{n} grid")
    states = sorted(int(s) for s in rng.choice(n * n, size=count, replace=False))
    return tuple((s, float(reward)) for s in states)
