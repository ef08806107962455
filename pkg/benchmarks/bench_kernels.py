"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each row times one kernel call on an n=16 grid workload (256 states) and
reports the best of ``--repeat`` runs for both backends.
"""

import argparse
import timeit

import numpy as np

from neuro_irl import kernels
from neuro_irl.gridworld import GridSpec, MdpKind, build_gridworld
from neuro_irl.neat import EvolutionParams, InnovationRegistry, compile_genome, mutate, perceptron
from neuro_irl.solvers import _passive_csr


def workloads():
    world = build_gridworld(GridSpec(n=16, d=0.7, seed=1))
    rewards = np.asarray(world.rewards, dtype=np.float64)
    succ = np.asarray(world.successors, dtype=np.int64)
    v = np.random.default_rng(0).normal(size=256)

    linear = build_gridworld(GridSpec(n=16, d=0.7, mdp_kind=MdpKind.LINEAR, seed=2))
    passive = np.asarray(linear.passive_dynamics)
    indptr, indices, log_p = _passive_csr(passive)
    neg = -np.asarray(linear.state_costs, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_op = neg[:, None] + np.log(passive)
    dense = kernels.get_backend("python").log_matmul(log_op, log_op)

    rng = np.random.default_rng(3)
    registry = InnovationRegistry()
    genome = perceptron(30, registry, rng)
    params = EvolutionParams(p_add_node=0.3, p_add_connection=0.5)
    for _ in range(60):
        genome = mutate(genome, params, registry, rng)
    net = compile_genome(genome)
    inputs = np.asarray(world.features, dtype=np.float64)

    return {
        "q_values": lambda k: k.q_values(rewards, succ, 0.7, 0.9, v),
        "value_iteration": lambda k: k.value_iteration(rewards, succ, 0.7, 0.9, 1e-10, 10_000),
        "lmdp_power_iteration (500 sweeps)": lambda k: k.lmdp_power_iteration(neg, indptr, indices, log_p, 0.0, 500),
        "log_matmul (256x256, dense)": lambda k: k.log_matmul(dense, dense),
        "feedforward (30 inputs, 256 rows)": lambda k: k.feedforward(
            inputs, net.num_nodes, net.eval_nodes, net.is_sigmoid, net.indptr, net.src, net.weights, net.out_slot
        ),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':38s} {'python (ms)':>12s} {'cython (ms)':>12s} {'speed-up':>9s}")
    for name, call in workloads().items():
        t_py = min(timeit.repeat(lambda: call(py), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: call(cy), number=1, repeat=args.repeat))
        print(f"{name:38s} {t_py * 1e3:12.3f} {t_cy * 1e3:12.3f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
