"""Command-line interface.

Subcommands: ``analytic`` (closed forms), ``mc`` (Monte Carlo estimate),
``train`` (self-learning loop), ``figure`` (panel CSV reproduction), and
``oracle-check`` (analytic vs exact-oracle cross-validation).

Exit codes: 0 success, 2 configuration error, 3 oracle-check violation,
4 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

import numpy as np

from . import formulas
from .cascade import ModelConfig, estimate_stats
from .errors import (BudgetExceededError, ConfigError, ContractError,
                     TopologyError, TrustCascadeError)
from .experiments import (DEFAULT_ETA_GRID, ExperimentConfig, FIGURES,
                          derive_seed, learning_from_config, load_config_file,
                          run_figure, run_oracle_check)
from .formulas import SumMode
from .graph import TopologySpec, build, set_limit_weights
from .learning import LearningConfig, train


def _add_topology_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--shape", choices=["chain", "star", "bridged"])
    parser.add_argument("--n", type=int)
    parser.add_argument("--l", type=int)
    parser.add_argument("--h", type=int)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file; flags override it")
    parser.add_argument("--eta", type=float)
    parser.add_argument("--seed", type=int)


def _merge(args, config: dict):
    """Resolve (spec, eta, seed) from flags with config-file fallback."""
    topo = config.get("topology", {})
    shape = args.shape or topo.get("shape")
    if shape is None:
        raise ConfigError("no topology given (use --shape or a config file)")
    n = args.n if args.n is not None else topo.get("n")
    if n is None:
        raise ConfigError("no size given (use --n or topology.n in the config)")
    l = args.l if args.l is not None else topo.get("l")
    h = args.h if args.h is not None else topo.get("h")
    spec = TopologySpec(shape, int(n),
                        int(l) if l is not None else None,
                        int(h) if h is not None else None)
    eta = args.eta if args.eta is not None else config.get("model", {}).get("eta")
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    return spec, eta, int(seed)


def _require_eta(eta) -> float:
    if eta is None:
        raise ConfigError("no eta given (use --eta or model.eta in the config)")
    return float(eta)


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def _counts_json(counts: dict[int, float]) -> dict[str, float]:
    return {str(k): v for k, v in sorted(counts.items())}


def cmd_analytic(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    spec, eta, _ = _merge(args, config)
    eta = _require_eta(eta)
    mode = SumMode.ASYMPTOTIC if args.mode == "asymptotic" else SumMode.EXACT_SUM
    if spec.shape == "chain":
        m = formulas.chain_metrics(spec.n, eta, args.trained, mode)
        payload = {"topology": spec.to_dict(), "eta": eta, "trained": args.trained,
                   "mode": mode.value, "TTA": m.tta, "FTA": m.fta, "IFA": m.ifa,
                   "true_counts": _counts_json(m.true_counts),
                   "false_counts": _counts_json(m.false_counts)}
        if spec.n >= 3:
            prof = formulas.stratification_profile(spec.n, eta, args.trained)
            payload["stratification"] = {"D_true": _counts_json(prof.d_true),
                                         "D_false": _counts_json(prof.d_false),
                                         "switching_point": prof.switching_point}
    elif spec.shape == "star":
        m = formulas.star_metrics(spec.n, eta, args.trained)
        payload = {"topology": spec.to_dict(), "eta": eta, "trained": args.trained,
                   "TTA": m.tta, "FTA": m.fta, "IFA": m.ifa,
                   "true_counts": _counts_json(m.true_counts),
                   "false_counts": _counts_json(m.false_counts)}
    else:
        m = formulas.crossover_metrics(spec.n, spec.l, spec.h, eta, args.trained)
        payload = {"topology": spec.to_dict(), "eta": eta, "trained": args.trained,
                   "true_counts_a": _counts_json(m.true_counts_a),
                   "false_counts_a": _counts_json(m.false_counts_a),
                   "true_counts_b": _counts_json(m.true_counts_b),
                   "false_counts_b": _counts_json(m.false_counts_b),
                   "D_true_a": _counts_json(m.d_true_a),
                   "D_false_a": _counts_json(m.d_false_a),
                   "bridge_gains": {"untrained_true": m.untrained_gain_true,
                                    "untrained_false": m.untrained_gain_false,
                                    "trained_true": m.trained_gain_true,
                                    "trained_false": m.trained_gain_false}}
    _emit(payload)
    return 0


def cmd_mc(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    spec, eta, seed = _merge(args, config)
    eta = _require_eta(eta)
    replications = args.replications or config.get("mc", {}).get("replications", 10_000)
    graph = build(spec)
    if args.trained:
        set_limit_weights(graph)
    stats = estimate_stats(graph, ModelConfig(eta), int(replications),
                           np.random.default_rng(derive_seed(seed, "cli-mc", spec.to_dict()["shape"],
                                                             spec.n, eta, args.trained)))
    _emit({"topology": spec.to_dict(), "eta": eta, "trained": args.trained,
           "replications": stats.replications,
           "TTA": stats.tta, "FTA": stats.fta, "IFA": stats.ifa,
           "stderr_TTA": stats.stderr_tta, "stderr_FTA": stats.stderr_fta,
           "stderr_IFA": stats.stderr_ifa})
    return 0


def cmd_train(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    spec, eta, seed = _merge(args, config)
    eta = _require_eta(eta)
    learning = learning_from_config(config.get("learning", {}))
    if args.iterations is not None:
        learning = LearningConfig(delta=learning.delta, floor=learning.floor,
                                  max_iterations=args.iterations,
                                  stability_eps=learning.stability_eps,
                                  stability_window=learning.stability_window)
    graph = build(spec)
    report = train(graph, ModelConfig(eta), learning,
                   random.Random(derive_seed(seed, "cli-train", spec.to_dict()["shape"], spec.n, eta)),
                   trajectory_stride=args.trajectory_stride if args.trajectory else None)
    if args.trajectory:
        with open(args.trajectory, "w") as fh:
            fh.write("iteration,src,dst,weight\n")
            for it, j, k, w in report.trajectory_rows():
                fh.write(f"{it},{j},{k},{w!r}\n")
    if args.dump_weights:
        Path(args.dump_weights).write_text(graph.dump())
    _emit({"topology": spec.to_dict(), "eta": eta,
           "iterations_run": report.iterations_run, "converged": report.converged,
           "delta": learning.delta, "floor": learning.floor,
           "final_weights": {f"{j}->{k}": w for (j, k), w in sorted(report.final_weights.items())}})
    return 0


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def cmd_figure(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    output_dir = args.out or config.get("output_dir", ".")
    learning = None
    if "learning" in config or args.iterations is not None:
        learning = learning_from_config(config.get("learning", {}),
                                        default_budget=FIGURES[args.id].training_budget)
        if args.iterations is not None:
            learning = LearningConfig(delta=learning.delta, floor=learning.floor,
                                      max_iterations=args.iterations,
                                      stability_eps=learning.stability_eps,
                                      stability_window=learning.stability_window)
    cfg = ExperimentConfig(
        figure_id=args.id,
        eta_grid=args.eta_grid or tuple(config.get("eta_grid", DEFAULT_ETA_GRID)),
        size_grid=args.sizes,
        replications=args.replications or config.get("mc", {}).get("replications", 10_000),
        learning=learning,
        seed=int(seed),
        output_dir=Path(output_dir),
        limit_weights=args.limit_weights,
    )
    for path in run_figure(cfg):
        print(path)
    return 0


def cmd_oracle_check(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    spec, _, seed = _merge(args, config)
    mode = SumMode.ASYMPTOTIC if args.mode == "asymptotic" else SumMode.EXACT_SUM
    report = run_oracle_check(spec, eta_grid=args.eta_grid or DEFAULT_ETA_GRID,
                              mode=mode, mc_replications=args.mc_replications,
                              seed=seed, tolerance=args.tolerance)
    print(f"{'regime':<10} {'eta':<5} {'quantity':<22} {'analytic':<24} {'oracle':<24} {'abs_gap':<12} exempt")
    for row in report.rows:
        print(f"{row['regime']:<10} {row['eta']:<5} {row['quantity']:<22} "
              f"{row['analytic']:<24.17g} {row['oracle']:<24.17g} {row['abs_gap']:<12.3e} "
              f"{'yes' if row['exempt'] else 'no'}")
    print(f"# rows={len(report.rows)} violations={len(report.violations)} "
          f"max_strict_gap={report.max_gap():.3e}")
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trustcascade",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="evaluate the closed-form metrics")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--trained", action="store_true")
    p.add_argument("--mode", choices=["exact", "asymptotic"], default="exact")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("mc", help="Monte Carlo estimate of TTA/FTA/IFA")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--trained", action="store_true", help="measure the analytic fixed point")
    p.add_argument("--replications", type=int)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("train", help="run the self-learning loop")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--iterations", type=int)
    p.add_argument("--trajectory", type=Path, help="write a weight-trajectory CSV here")
    p.add_argument("--trajectory-stride", type=int, default=1000)
    p.add_argument("--dump-weights", type=Path, help="write the final graph dump here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("figure", help="reproduce a figure's panel CSVs")
    p.add_argument("id", choices=sorted(FIGURES))
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--eta-grid", type=_float_list)
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--iterations", type=int, help="override the training budget")
    p.add_argument("--limit-weights", action="store_true",
                   help="substitute the analytic trained fixed point for the learning loop")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("oracle-check", help="cross-check closed forms against the exact oracle")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--mode", choices=["exact", "asymptotic"], default="exact")
    p.add_argument("--eta-grid", type=_float_list)
    p.add_argument("--mc-replications", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, TopologyError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrustCascadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
