"""Command-line entry point: ``neuro-irl run`` and ``neuro-irl sweep``.

Settings come from an optional JSON config (``--config``) whose keys mirror
:class:`~neuro_irl.experiment.ExperimentConfig`; any flag given on the
command line wins over the file.

Exit codes: 0 success, 1 every run failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import (
    SWEEP_AXES,
    Algorithm,
    ConfigError,
    ExperimentConfig,
    run_experiment,
    sweep,
    write_csv,
)

EXIT_OK = 0
EXIT_ALL_FAILED = 1
EXIT_CONFIG = 2

# flag dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "n": "n",
    "determinism": "d",
    "mdp_kind": "mdp_kind",
    "samples": "n_samples",
    "sample_len": "sample_len",
    "pop": "pop",
    "gens": "gens",
    "goals": "goals",
    "runs": "runs",
    "seed": "base_seed",
    "iterations": "iterations",
    "burn_in": "burn_in",
    "eta": "eta",
    "max_k": "max_k",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument(
        "--algorithm",
        help="neat-irl, bnp-mean or bnp-neat; a comma-separated list runs each on the same seeds",
    )
    p.add_argument("--n", type=int, help="grid side length")
    p.add_argument("--determinism", type=float, help="probability the selected action is taken")
    p.add_argument("--mdp-kind", choices=["standard", "linear"])
    p.add_argument("--samples", type=int, help="number of demonstration traces (N_S)")
    p.add_argument("--sample-len", type=int, help="pairs per trace (L_S)")
    p.add_argument("--pop", type=int, help="NEAT population size (N_P)")
    p.add_argument("--gens", type=int, help="NEAT maximum generations (N_G)")
    p.add_argument("--goals", type=int, help="randomly placed goals of reward 100 (0: random rewards)")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    p.add_argument("--iterations", type=int, help="recorded sampler iterations (T)")
    p.add_argument("--burn-in", type=int, help="unrecorded sampler iterations")
    p.add_argument("--eta", type=float, help="Boltzmann action-optimality confidence")
    p.add_argument("--max-k", type=int, help="composite features in the sampler")
    p.add_argument("--no-early-stop", action="store_true", help="always run all generations")
    p.add_argument("--out", type=Path, help="CSV output path")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neuro-irl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run one experiment (or several algorithms on the same seeds)")
    _add_common(run)
    sw = sub.add_parser("sweep", help="repeat an experiment over one parameter axis")
    _add_common(sw)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--values", required=True, help="comma-separated axis values, e.g. 1,2,3,4")
    return parser


def _config_from_args(args) -> tuple[ExperimentConfig, list[Algorithm]]:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for dest, name in _FLAG_FIELDS.items():
        value = getattr(args, dest)
        if value is not None:
            overrides[name] = value
    if args.goals is not None:
        overrides["goal_states"] = None
    if args.no_early_stop:
        overrides["early_termination"] = False
    if args.out is not None:
        overrides["out"] = str(args.out)
    try:
        algorithms = (
            [Algorithm.parse(a) for a in args.algorithm.split(",") if a.strip()]
            if args.algorithm
            else [cfg.algorithm]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not algorithms:
        raise ConfigError("no algorithm given")
    cfg = replace(cfg, algorithm=algorithms[0], **overrides)
    return cfg, algorithms


def _summary(result) -> str:
    agg = result.aggregate
    return (
        f"{result.config.algorithm.value:9s} runs={len(result.rows)} ok={agg.count} "
        f"misprediction mean={agg.mean:.4f} std={agg.std:.4f} "
        f"seconds={sum(r.seconds for r in result.rows):.2f}"
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, algorithms = _config_from_args(args)
        if args.command == "sweep":
            try:
                values = [int(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be integers, got {args.values!r}") from None
    except ConfigError as exc:
        print(f"neuro-irl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.out
    cfg = replace(cfg, out=None)
    results = []
    try:
        for algorithm in algorithms:
            acfg = replace(cfg, algorithm=algorithm)
            if args.command == "run":
                results.append(run_experiment(acfg))
            else:
                results.extend(sweep(acfg, args.axis, values))
    except ConfigError as exc:
        print(f"neuro-irl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for res in results:
        label = f"[{args.axis}={getattr(res.config, args.axis)}] " if args.command == "sweep" else ""
        print(label + _summary(res))
    if len(algorithms) >= 2:
        per_algo = len(results) // len(algorithms)
        for k in range(per_algo):
            a, b = results[k], results[per_algo + k]
            if a.aggregate.count < 2 or b.aggregate.count < 2:
                continue
            tt = a.compare(b)
            label = f"[{args.axis}={getattr(a.config, args.axis)}] " if args.command == "sweep" else ""
            print(
                f"{label}t-test {a.config.algorithm.value} vs {b.config.algorithm.value}: "
                f"t={tt.t_statistic:.4f} dof={tt.degrees_of_freedom:.2f} p={tt.p_value:.4g}"
            )
    if out:
        write_csv([row for res in results for row in res.rows], out)

    if all(res.aggregate.count == 0 for res in results):
        print("neuro-irl: every run failed", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
