"""Command line: ``alphabp {ising-mismatch,mimo-ser,run,infer}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from alphabp.engine import EngineConfig, map_decision, marginals, run
from alphabp.experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from alphabp.graph import GraphError, load_graph
from alphabp.models import snr_db

log = logging.getLogger("alphabp")

# config-file / flag spellings that differ from ExperimentConfig fields
_ALIASES = {"n": "n_vars", "m": "n_receive", "tol": "tolerance"}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, help="convergence tolerance (default 1e-6)")
    p.add_argument("--max-sweeps", type=int, help="sweep budget (default 50)")
    p.add_argument("--damping", type=float, help="message damping in [0, 1) (default 0)")
    p.add_argument("--schedule", choices=["fixed", "random"])
    p.add_argument("--seed", type=int)


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with any of these settings")
    p.add_argument("--n", type=int, help="number of variables / transmit antennas")
    p.add_argument("--m", type=int, help="receive antennas (mimo-ser; default n)")
    p.add_argument("--trials", type=int, help="trials per sweep point (default 1000)")
    p.add_argument("--sweep", type=_float_list,
                   help="edge probabilities (ising) or noise levels sigma_w (mimo)")
    p.add_argument("--alphas", type=_float_list)
    p.add_argument("--prior", choices=["none", "mmse"])
    p.add_argument("--mismatch", choices=["hamming", "vector"])
    p.add_argument("--covariance-scaling", choices=["sigma", "sigma_squared"])
    p.add_argument("--batch-size", type=int)
    p.add_argument("--out", help="CSV path (default: standard output)")
    _add_engine_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphabp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_experiment_flags(sub.add_parser(name, help=f"run the {name} sweep"))
    p = sub.add_parser("run", help="run the experiment named by --experiment or the config")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    _add_experiment_flags(p)
    p = sub.add_parser("infer", help="run alpha-BP on a graph file")
    p.add_argument("graph", type=Path)
    p.add_argument("--alpha", type=float, default=1.0)
    _add_engine_flags(p)
    return parser


def _normalize_keys(data: dict) -> dict:
    out = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        out[_ALIASES.get(key, key)] = value
    return out


def experiment_config(args: argparse.Namespace, experiment=None) -> ExperimentConfig:
    settings: dict = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
        if not isinstance(data, dict):
            raise ValueError("config file must hold an object")
        settings.update(_normalize_keys(data))
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("config", "command", "verbose")}
    settings.update(_normalize_keys(flags))
    if experiment is not None:
        settings["experiment"] = experiment
    if "experiment" not in settings:
        raise ValueError("no experiment given (use --experiment or the config file)")
    return ExperimentConfig.from_mapping(settings)


def _cmd_experiment(args, experiment=None) -> int:
    config = experiment_config(args, experiment)
    table = run_experiment(config)
    if config.out is None:
        sys.stdout.write(table.to_csv())
    for r in table.rows:
        where = f"sweep={r.sweep:g}"
        if config.experiment == "mimo-ser":
            where += f" ({snr_db(config.n, r.sweep):.2f} dB)"
        alpha = "" if r.alpha is None else f" alpha={r.alpha:g}"
        print(f"{where} {r.method}{alpha}: {r.metric:.6g} "
              f"(converged {r.converged_frac:.3f})", file=sys.stderr)
    return 0


def _cmd_infer(args) -> int:
    try:
        graph = load_graph(args.graph)
    except (GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    overrides = {
        "tolerance": args.tol, "max_sweeps": args.max_sweeps, "damping": args.damping,
        "schedule": args.schedule, "seed": args.seed,
    }
    config = EngineConfig(alpha=args.alpha,
                          **{k: v for k, v in overrides.items() if v is not None})
    state, report = run(graph, config)
    probs = marginals(state, graph)
    for i, row in enumerate(probs):
        print(f"x{i}: " + " ".join(repr(float(v)) for v in row))
    decision = graph.alphabet[map_decision(state, graph)]
    print("decision: " + " ".join(f"{v:+g}" for v in decision))
    print(f"converged: {'true' if report.converged else 'false'}")
    print(f"sweeps: {report.sweeps_used}")
    print(f"residual: {report.final_residual!r}")
    return 0 if report.converged else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "infer":
            return _cmd_infer(args)
        if args.command == "run":
            return _cmd_experiment(args)
        return _cmd_experiment(args, args.command)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
