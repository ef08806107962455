"""Direct-encoded NEAT genomes: genes, evaluation and variation operators.

Node ids are laid out as inputs ``0 .. I-1``, the single output ``I``, then
hidden nodes in creation order. Connection genes are keyed by innovation
number. Only feed-forward structure is allowed: acyclicity is maintained
over *all* connection genes, enabled or not, so re-enabling a gene during
crossover can never close a loop.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .. import kernels

SIGMOID_SLOPE = 4.9


class NodeKind(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    HIDDEN = "hidden"


class Activation(str, enum.Enum):
    STEEP_SIGMOID = "steep_sigmoid"
    LINEAR = "linear"


class CycleError(ValueError):
    pass


def steep_sigmoid(x):
    return 1.0 / (1.0 + np.exp(-SIGMOID_SLOPE * x))


@dataclass(frozen=True)
class NodeGene:
    id: int
    kind: NodeKind
    activation: Activation


@dataclass(frozen=True)
class ConnectionGene:
    src: int
    dst: int
    weight: float
    enabled: bool
    innovation: int


@dataclass
class Genome:
    num_inputs: int
    nodes: dict[int, NodeGene]
    connections: dict[int, ConnectionGene]
    fitness: float = 0.0

    @property
    def output_id(self) -> int:
        return self.num_inputs

    @property
    def hidden_ids(self) -> list[int]:
        return [i for i, n in self.nodes.items() if n.kind is NodeKind.HIDDEN]

    def copy(self) -> "Genome":
        # genes are immutable, shallow dict copies suffice
        return Genome(self.num_inputs, dict(self.nodes), dict(self.connections), self.fitness)

    def enabled_connections(self) -> list[ConnectionGene]:
        return [c for c in self.connections.values() if c.enabled]

    def signature(self) -> tuple:
        """Structure without weights: node ids and (innovation, src, dst, enabled)."""
        return (
            tuple(sorted(self.nodes)),
            tuple(sorted((c.innovation, c.src, c.dst, c.enabled) for c in self.connections.values())),
        )

    def to_dict(self) -> dict:
        return {
            "num_inputs": self.num_inputs,
            "fitness": self.fitness,
            "nodes": [
                {"id": n.id, "kind": n.kind.value, "activation": n.activation.value}
                for n in self.nodes.values()
            ],
            "connections": [
                {
                    "from": c.src,
                    "to": c.dst,
                    "weight": c.weight,
                    "enabled": c.enabled,
                    "innovation": c.innovation,
                }
                for c in self.connections.values()
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Genome":
        nodes = {
            int(n["id"]): NodeGene(int(n["id"]), NodeKind(n["kind"]), Activation(n["activation"]))
            for n in data["nodes"]
        }
        conns = {
            int(c["innovation"]): ConnectionGene(
                int(c["from"]), int(c["to"]), float(c["weight"]), bool(c["enabled"]), int(c["innovation"])
            )
            for c in data["connections"]
        }
        genome = cls(int(data["num_inputs"]), nodes, conns, float(data.get("fitness", 0.0)))
        check_genome(genome)
        return genome

    @classmethod
    def from_json(cls, text: str) -> "Genome":
        return cls.from_dict(json.loads(text))


@dataclass
class InnovationRegistry:
    """Run-wide historical markings.

    The same (src, dst) signature always maps to the same innovation
    number, and splitting the same connection maps to the same hidden node
    id, so identical structural mutations line up during crossover.
    """

    next_innovation: int = 0
    next_node: int = 0
    _connections: dict[tuple[int, int], int] = field(default_factory=dict)
    _splits: dict[int, int] = field(default_factory=dict)

    def connection(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self._connections:
            self._connections[key] = self.next_innovation
            self.next_innovation += 1
        return self._connections[key]

    def split_node(self, innovation: int) -> int:
        if innovation not in self._splits:
            self._splits[innovation] = self.new_node()
        return self._splits[innovation]

    def new_node(self) -> int:
        node = self.next_node
        self.next_node += 1
        return node

    def to_dict(self) -> dict:
        return {
            "next_innovation": self.next_innovation,
            "next_node": self.next_node,
            "connections": [[s, d, i] for (s, d), i in self._connections.items()],
            "splits": [[k, v] for k, v in self._splits.items()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InnovationRegistry":
        reg = cls(int(data["next_innovation"]), int(data["next_node"]))
        reg._connections = {(int(s), int(d)): int(i) for s, d, i in data["connections"]}
        reg._splits = {int(k): int(v) for k, v in data["splits"]}
        return reg


def perceptron(num_inputs: int, registry: InnovationRegistry, rng: np.random.Generator) -> Genome:
    """Inputs wired straight to one linear output, weights ~ U(-1, 1)."""
    if num_inputs < 1:
        raise ValueError("a genome needs at least one input")
    registry.next_node = max(registry.next_node, num_inputs + 1)
    nodes = {i: NodeGene(i, NodeKind.INPUT, Activation.LINEAR) for i in range(num_inputs)}
    nodes[num_inputs] = NodeGene(num_inputs, NodeKind.OUTPUT, Activation.LINEAR)
    weights = rng.uniform(-1.0, 1.0, size=num_inputs)
    conns = {}
    for i in range(num_inputs):
        innov = registry.connection(i, num_inputs)
        conns[innov] = ConnectionGene(i, num_inputs, float(weights[i]), True, innov)
    return Genome(num_inputs, nodes, conns)


# -- structure -------------------------------------------------------------


def _adjacency(genome: Genome, enabled_only: bool) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {i: [] for i in genome.nodes}
    for c in genome.connections.values():
        if c.enabled or not enabled_only:
            adj[c.src].append(c.dst)
    return adj


def topological_order(genome: Genome, enabled_only: bool = True) -> list[int]:
    adj = _adjacency(genome, enabled_only)
    indeg = {i: 0 for i in genome.nodes}
    for outs in adj.values():
        for j in outs:
            indeg[j] += 1
    queue = deque(sorted(i for i, k in indeg.items() if k == 0))
    order = []
    while queue:
        i = queue.popleft()
        order.append(i)
        for j in adj[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(j)
    if len(order) != len(genome.nodes):
        raise CycleError("genome contains a directed cycle")
    return order


def _descendants(adj: dict[int, list[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def creates_cycle(genome: Genome, src: int, dst: int) -> bool:
    """Would adding src -> dst close a directed loop (over all genes)?"""
    return src in _descendants(_adjacency(genome, enabled_only=False), dst)


def check_genome(genome: Genome) -> None:
    """Raise ``ValueError`` if any structural invariant is broken."""
    out = genome.output_id
    kinds = {i: n.kind for i, n in genome.nodes.items()}
    for i in range(genome.num_inputs):
        if kinds.get(i) is not NodeKind.INPUT:
            raise ValueError(f"input node {i} missing")
    if kinds.get(out) is not NodeKind.OUTPUT:
        raise ValueError("output node missing")
    if sum(k is NodeKind.OUTPUT for k in kinds.values()) != 1:
        raise ValueError("exactly one output node expected")
    pairs = set()
    for innov, c in genome.connections.items():
        if innov != c.innovation:
            raise ValueError(f"connection keyed {innov} carries innovation {c.innovation}")
        if c.src not in kinds or c.dst not in kinds:
            raise ValueError(f"connection {innov} references a missing node")
        if kinds[c.dst] is NodeKind.INPUT or kinds[c.src] is NodeKind.OUTPUT:
            raise ValueError(f"connection {innov} runs against the feed-forward direction")
        if (c.src, c.dst) in pairs:
            raise ValueError(f"duplicate connection {c.src}->{c.dst}")
        pairs.add((c.src, c.dst))
    topological_order(genome, enabled_only=False)


# -- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class CompiledNetwork:
    num_inputs: int
    num_nodes: int
    eval_nodes: np.ndarray
    is_sigmoid: np.ndarray
    indptr: np.ndarray
    src: np.ndarray
    weights: np.ndarray
    out_slot: int

    def __call__(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != self.num_inputs:
            raise ValueError(f"expected input rows of width {self.num_inputs}, got shape {inputs.shape}")
        return kernels.feedforward(
            inputs, self.num_nodes, self.eval_nodes, self.is_sigmoid,
            self.indptr, self.src, self.weights, self.out_slot,
        )


def compile_genome(genome: Genome) -> CompiledNetwork:
    order = topological_order(genome, enabled_only=True)
    n_in = genome.num_inputs
    slot = {i: i for i in range(n_in)}
    eval_ids = [i for i in order if genome.nodes[i].kind is not NodeKind.INPUT]
    for k, i in enumerate(eval_ids):
        slot[i] = n_in + k
    incoming: dict[int, list[ConnectionGene]] = {i: [] for i in eval_ids}
    for c in genome.connections.values():
        if c.enabled:
            incoming[c.dst].append(c)
    indptr = [0]
    src, weights = [], []
    for i in eval_ids:
        for c in incoming[i]:
            src.append(slot[c.src])
            weights.append(c.weight)
        indptr.append(len(src))
    return CompiledNetwork(
        num_inputs=n_in,
        num_nodes=n_in + len(eval_ids),
        eval_nodes=np.array([slot[i] for i in eval_ids], dtype=np.int64),
        is_sigmoid=np.array(
            [genome.nodes[i].activation is Activation.STEEP_SIGMOID for i in eval_ids], dtype=np.uint8
        ),
        indptr=np.array(indptr, dtype=np.int64),
        src=np.array(src, dtype=np.int64),
        weights=np.array(weights, dtype=np.float64),
        out_slot=slot[genome.output_id],
    )


def activate_batch(genome: Genome, inputs: np.ndarray) -> np.ndarray:
    """Network output for each row of ``inputs``."""
    return compile_genome(genome)(np.atleast_2d(inputs))


def activate(genome: Genome, inputs) -> float:
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.shape != (genome.num_inputs,):
        raise ValueError(f"expected {genome.num_inputs} inputs, got shape {inputs.shape}")
    return float(activate_batch(genome, inputs[None, :])[0])


# -- variation -------------------------------------------------------------


def add_node(genome: Genome, registry: InnovationRegistry, rng: np.random.Generator) -> bool:
    """Split a random enabled connection with a new steep-sigmoid node.

    The split gene is disabled; the incoming gene gets weight 1.0 and the
    outgoing gene inherits the old weight.
    """
    enabled = genome.enabled_connections()
    if not enabled:
        return False
    old = enabled[int(rng.integers(len(enabled)))]
    node = registry.split_node(old.innovation)
    if node in genome.nodes:
        node = registry.new_node()
    genome.nodes[node] = NodeGene(node, NodeKind.HIDDEN, Activation.STEEP_SIGMOID)
    genome.connections[old.innovation] = replace(old, enabled=False)
    i_in = registry.connection(old.src, node)
    i_out = registry.connection(node, old.dst)
    genome.connections[i_in] = ConnectionGene(old.src, node, 1.0, True, i_in)
    genome.connections[i_out] = ConnectionGene(node, old.dst, old.weight, True, i_out)
    return True


def legal_new_connections(genome: Genome) -> list[tuple[int, int]]:
    adj = _adjacency(genome, enabled_only=False)
    existing = {(c.src, c.dst) for c in genome.connections.values()}
    sources = [i for i, n in genome.nodes.items() if n.kind is not NodeKind.OUTPUT]
    targets = [i for i, n in genome.nodes.items() if n.kind is not NodeKind.INPUT]
    out = []
    for dst in targets:
        below = _descendants(adj, dst)
        for src in sources:
            if src not in below and (src, dst) not in existing:
                out.append((src, dst))
    return out


def add_connection(genome: Genome, registry: InnovationRegistry, rng: np.random.Generator) -> bool:
    """Add one random feed-forward connection; False when none is legal."""
    candidates = legal_new_connections(genome)
    if not candidates:
        return False
    src, dst = candidates[int(rng.integers(len(candidates)))]
    innov = registry.connection(src, dst)
    genome.connections[innov] = ConnectionGene(src, dst, float(rng.uniform(-1.0, 1.0)), True, innov)
    return True


def perturb_weights(genome: Genome, rate: float, sigma: float, rng: np.random.Generator) -> None:
    for innov, c in list(genome.connections.items()):
        if rng.random() < rate:
            genome.connections[innov] = replace(c, weight=c.weight + float(rng.normal(0.0, sigma)))


def mutate(genome: Genome, params, registry: InnovationRegistry, rng: np.random.Generator) -> Genome:
    """Return a mutated copy; ``params`` supplies the four mutation rates."""
    child = genome.copy()
    if rng.random() < params.p_add_node:
        add_node(child, registry, rng)
    if rng.random() < params.p_add_connection:
        add_connection(child, registry, rng)
    perturb_weights(child, params.p_weight, params.weight_sigma, rng)
    return child


def crossover(fitter: Genome, other: Genome, rng: np.random.Generator) -> Genome:
    """Matching genes take their weight from a random parent; everything
    else, including node set and enabled flags, comes from ``fitter``."""
    conns = {}
    for innov, gene in fitter.connections.items():
        mate = other.connections.get(innov)
        if mate is not None and rng.random() < 0.5:
            gene = replace(gene, weight=mate.weight)
        conns[innov] = gene
    return Genome(fitter.num_inputs, dict(fitter.nodes), conns)


def compatibility_distance(a: Genome, b: Genome, c1: float, c2: float, c3: float) -> float:
    """c1 * E / N + c2 * D / N + c3 * mean |w_a - w_b| over matching genes."""
    ia, ib = set(a.connections), set(b.connections)
    if not ia and not ib:
        return 0.0
    max_a = max(ia, default=-1)
    max_b = max(ib, default=-1)
    cutoff = min(max_a, max_b)
    unmatched = ia ^ ib
    excess = sum(1 for i in unmatched if i > cutoff)
    disjoint = len(unmatched) - excess
    matching = ia & ib
    w_bar = (
        sum(abs(a.connections[i].weight - b.connections[i].weight) for i in matching) / len(matching)
        if matching
        else 0.0
    )
    n = max(len(ia), len(ib), 1)
    return c1 * excess / n + c2 * disjoint / n + c3 * w_bar


def has_input_output_path(genome: Genome) -> bool:
    adj = _adjacency(genome, enabled_only=True)
    return any(genome.output_id in _descendants(adj, i) for i in range(genome.num_inputs))

