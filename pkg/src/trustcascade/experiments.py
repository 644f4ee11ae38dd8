"""Experiment harness: figure-data reproduction, oracle cross-checks, seeding,
and CSV persistence.

Each figure family carries a default protocol: 10,000 messages per
source, reward step and weight floor both 0.001, and per-topology training
budgets (4,000,000 iterations for the size-10 chain, 2,000 for the size-100
star, 8,000,000 for the bridged pair). Panel (a) measures the fresh network,
panel (b) the trained one, panel (c) appends the improvement/difference
column to the panel-(b) rows.

Analytic IFA columns use the simplified large-size chain forms (exact ones for
the star, whose formulas involve no simplification); the improvement column
is computed from exact sums, which is where "training always helps" actually
holds. Stratification columns use the exact closed forms throughout.
"""
from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import formulas
from .cascade import MessageKind, ModelConfig, estimate_stats, stratification_mc
from .errors import ConfigError, SingularityError
from .formulas import SumMode
from .graph import TopologySpec, TrustGraph, build, set_limit_weights
from .learning import LearningConfig, train

DEFAULT_ETA_GRID = (0.3, 0.5, 0.7, 0.9)
DEFAULT_REPLICATIONS = 10_000


def derive_seed(root: int, *parts) -> int:
    """Stable 63-bit stream seed for a labelled subtask of a root seed.

    Counter-based: any (root, parts) pair always maps to the same stream, so
    tasks can run in any order or in parallel without changing results.
    """
    payload = repr((root,) + parts).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big") >> 1


@dataclass
class FigureProtocol:
    topology: str
    sizes: tuple[int, ...]
    kind: Optional[MessageKind]  # None for IFA figures, set for stratification
    training_budget: int
    l: Optional[int] = None
    h: Optional[int] = None


FIGURES: dict[str, FigureProtocol] = {
    "fig4": FigureProtocol("chain", tuple(range(2, 11)), None, 4_000_000),
    "fig5": FigureProtocol("star", tuple(range(10, 101, 10)), None, 2_000),
    "fig6": FigureProtocol("chain", (10,), MessageKind.TRUE, 4_000_000),
    "fig7": FigureProtocol("chain", (10,), MessageKind.FALSE, 4_000_000),
    "fig8": FigureProtocol("bridged", (10,), MessageKind.TRUE, 8_000_000, l=4, h=8),
    "fig9": FigureProtocol("bridged", (10,), MessageKind.FALSE, 8_000_000, l=4, h=8),
}

IFA_COLUMNS = ["N", "eta", "F_analytic", "F_mc", "F_mc_stderr"]
STRAT_COLUMNS = ["i", "eta", "D_analytic", "D_mc", "D_mc_stderr", "message_kind", "regime"]


@dataclass
class ExperimentConfig:
    figure_id: str
    eta_grid: tuple[float, ...] = DEFAULT_ETA_GRID
    size_grid: Optional[tuple[int, ...]] = None
    replications: int = DEFAULT_REPLICATIONS
    learning: Optional[LearningConfig] = None
    seed: int = 0
    output_dir: Path = Path(".")
    limit_weights: bool = False  # substitute the analytic fixed point for training

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise ConfigError(f"unknown figure {self.figure_id!r}; choose from {sorted(FIGURES)}")
        if not self.eta_grid:
            raise ConfigError("eta grid must be non-empty")
        if self.size_grid is not None and not self.size_grid:
            raise ConfigError("size grid must be non-empty")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        self.output_dir = Path(self.output_dir)

    @property
    def protocol(self) -> FigureProtocol:
        return FIGURES[self.figure_id]

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.size_grid if self.size_grid is not None else self.protocol.sizes

    def learning_config(self) -> LearningConfig:
        if self.learning is not None:
            return self.learning
        return LearningConfig(max_iterations=self.protocol.training_budget)


def topology_for(cfg: ExperimentConfig, n: int) -> TopologySpec:
    proto = cfg.protocol
    if proto.topology == "bridged":
        return TopologySpec("bridged", n, proto.l, proto.h)
    return TopologySpec(proto.topology, n)


def trained_graph(cfg: ExperimentConfig, spec: TopologySpec, eta: float) -> TrustGraph:
    """Panel-(b) network: really trained by default, analytic fixed point if
    the config opts out for speed."""
    graph = build(spec)
    if cfg.limit_weights:
        return set_limit_weights(graph)
    rng = random.Random(derive_seed(cfg.seed, "train", cfg.figure_id, spec.to_dict()["shape"], spec.n, eta))
    train(graph, ModelConfig(eta), cfg.learning_config(), rng)
    return graph


def analytic_ifa(spec: TopologySpec, eta: float, trained: bool,
                 mode: SumMode = SumMode.ASYMPTOTIC) -> float:
    """The IFA curve value plotted for a figure cell. Chain cells fall back to
    the exact sum where the large-size simplification is singular (eta = 1)."""
    if spec.shape == "star":
        return formulas.star_metrics(spec.n, eta, trained).ifa
    try:
        return formulas.chain_metrics(spec.n, eta, trained, mode).ifa
    except SingularityError:
        return formulas.chain_metrics(spec.n, eta, trained, SumMode.EXACT_SUM).ifa


def _exact_ifa(spec: TopologySpec, eta: float, trained: bool) -> float:
    if spec.shape == "star":
        return formulas.star_metrics(spec.n, eta, trained).ifa
    return formulas.chain_metrics(spec.n, eta, trained, SumMode.EXACT_SUM).ifa


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _ifa_figure(cfg: ExperimentConfig) -> dict[str, list[list]]:
    rows_a, rows_b, rows_c = [], [], []
    for eta in cfg.eta_grid:
        model = ModelConfig(eta)
        for n in cfg.sizes:
            spec = topology_for(cfg, n)
            fresh = build(spec)
            mc = estimate_stats(fresh, model, cfg.replications,
                                np.random.default_rng(derive_seed(cfg.seed, "mc", cfg.figure_id, "a", eta, n)))
            rows_a.append([n, eta, analytic_ifa(spec, eta, False), mc.ifa, mc.stderr_ifa])

            trained = trained_graph(cfg, spec, eta)
            mc_t = estimate_stats(trained, model, cfg.replications,
                                  np.random.default_rng(derive_seed(cfg.seed, "mc", cfg.figure_id, "b", eta, n)))
            analytic_trained = analytic_ifa(spec, eta, True)
            rows_b.append([n, eta, analytic_trained, mc_t.ifa, mc_t.stderr_ifa])

            delta = formulas.relative_improvement(_exact_ifa(spec, eta, True),
                                                  _exact_ifa(spec, eta, False))
            rows_c.append([n, eta, analytic_trained, mc_t.ifa, mc_t.stderr_ifa, delta])
    return {"a": rows_a, "b": rows_b, "c": rows_c}


def _analytic_diffs(spec: TopologySpec, eta: float, trained: bool,
                    kind: MessageKind) -> dict[int, float]:
    if spec.shape == "bridged":
        metrics = formulas.crossover_metrics(spec.n, spec.l, spec.h, eta, trained)
        return metrics.d_true_a if kind is MessageKind.TRUE else metrics.d_false_a
    profile = formulas.stratification_profile(spec.n, eta, trained)
    return profile.d_true if kind is MessageKind.TRUE else profile.d_false


def _strat_figure(cfg: ExperimentConfig) -> dict[str, list[list]]:
    kind = cfg.protocol.kind
    rows_a, rows_b, rows_c = [], [], []
    n = cfg.sizes[0]
    spec = topology_for(cfg, n)
    for eta in cfg.eta_grid:
        model = ModelConfig(eta)
        fresh = build(spec)
        mc = stratification_mc(fresh, model, kind, cfg.replications,
                               np.random.default_rng(derive_seed(cfg.seed, "strat", cfg.figure_id, "a", eta)))
        before = _analytic_diffs(spec, eta, False, kind)
        for i in sorted(before):
            rows_a.append([i, eta, before[i], mc.diffs[i], mc.stderr_diffs[i],
                           kind.value, "untrained"])

        trained = trained_graph(cfg, spec, eta)
        mc_t = stratification_mc(trained, model, kind, cfg.replications,
                                 np.random.default_rng(derive_seed(cfg.seed, "strat", cfg.figure_id, "b", eta)))
        after = _analytic_diffs(spec, eta, True, kind)
        for i in sorted(after):
            rows_b.append([i, eta, after[i], mc_t.diffs[i], mc_t.stderr_diffs[i],
                           kind.value, "trained"])
            rows_c.append([i, eta, after[i], mc_t.diffs[i], mc_t.stderr_diffs[i],
                           kind.value, "trained", after[i] - before[i]])
    return {"a": rows_a, "b": rows_b, "c": rows_c}


def run_figure(cfg: ExperimentConfig) -> list[Path]:
    """Produce the three panel CSVs for one figure; returns their paths.

    Re-running with an identical config and seed reproduces the files byte
    for byte.
    """
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    is_ifa = cfg.protocol.kind is None
    panels = _ifa_figure(cfg) if is_ifa else _strat_figure(cfg)
    paths = []
    for panel in ("a", "b", "c"):
        if is_ifa:
            columns = IFA_COLUMNS + (["delta_F"] if panel == "c" else [])
        else:
            columns = STRAT_COLUMNS + (["D_after_minus_before"] if panel == "c" else [])
        paths.append(_write_csv(cfg.output_dir / f"{cfg.figure_id}_{panel}.csv",
                                columns, panels[panel]))
    return paths


# ---------------------------------------------------------------------------
# oracle cross-check
# ---------------------------------------------------------------------------

@dataclass
class OracleCheckReport:
    rows: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def max_gap(self) -> float:
        strict = [r["abs_gap"] for r in self.rows if not r["exempt"]]
        return max(strict) if strict else 0.0


def analytic_counts(spec: TopologySpec, eta: float, trained: bool
                    ) -> tuple[dict[int, float], dict[int, float]]:
    """Closed-form per-source expected counts keyed by flat node id."""
    if spec.shape == "chain":
        m = formulas.chain_metrics(spec.n, eta, trained)
        return m.true_counts, m.false_counts
    if spec.shape == "star":
        m = formulas.star_metrics(spec.n, eta, trained)
        return m.true_counts, m.false_counts
    m = formulas.crossover_metrics(spec.n, spec.l, spec.h, eta, trained)
    true_counts = dict(m.true_counts_a)
    false_counts = dict(m.false_counts_a)
    for i, v in m.true_counts_b.items():
        true_counts[spec.n + i] = v
    for i, v in m.false_counts_b.items():
        false_counts[spec.n + i] = v
    return true_counts, false_counts


def run_oracle_check(spec: TopologySpec, eta_grid=DEFAULT_ETA_GRID,
                     mode: SumMode = SumMode.EXACT_SUM,
                     regimes: tuple[bool, ...] = (False, True),
                     mc_replications: int = 0, seed: int = 0,
                     tolerance: float = 1e-12) -> OracleCheckReport:
    """Tabulate analytic vs oracle (vs optional MC) spread values.

    Exact-sum and star rows must agree with the oracle within ``tolerance``;
    asymptotic aggregate rows are reported but exempt from the bound.
    """
    from .oracle import tree_expected_spread  # local import to keep module deps one-way

    report = OracleCheckReport()
    graph = build(spec)
    for trained in regimes:
        if trained:
            set_limit_weights(graph)
        for eta in eta_grid:
            model = ModelConfig(eta)
            true_counts, false_counts = analytic_counts(spec, eta, trained)
            oracle_true = {}
            oracle_false = {}
            for v in graph.nodes:
                oracle_true[v] = tree_expected_spread(graph, v, MessageKind.TRUE, model).expected_posters
                if not graph.is_smart(v):
                    oracle_false[v] = tree_expected_spread(graph, v, MessageKind.FALSE, model).expected_posters
            pairs = [("true", v, true_counts[v], oracle_true[v]) for v in sorted(true_counts)]
            pairs += [("false", v, false_counts[v], oracle_false[v]) for v in sorted(false_counts)]
            if mc_replications:
                mc = estimate_stats(graph, model, mc_replications,
                                    np.random.default_rng(derive_seed(seed, "oracle-mc", spec.to_dict()["shape"], trained, eta)))
            else:
                mc = None
            for kind_name, v, analytic, oracle_value in pairs:
                gap = abs(analytic - oracle_value)
                row = {"regime": "trained" if trained else "untrained", "eta": eta,
                       "quantity": f"count[{kind_name},{graph.labels[v]}]",
                       "analytic": analytic, "oracle": oracle_value,
                       "abs_gap": gap, "exempt": False}
                report.rows.append(row)
                if gap > tolerance:
                    report.violations.append(row)
            if spec.shape in ("chain", "star"):
                n = spec.n
                normals = [v for v in graph.nodes if not graph.is_smart(v)]
                oracle_tta = sum(oracle_true.values()) / n**2
                oracle_fta = sum(oracle_false.values()) / (n * len(normals))
                oracle_ifa = (oracle_tta - oracle_fta) / oracle_fta
                if spec.shape == "star":
                    metrics = formulas.star_metrics(n, eta, trained)
                    exempt = False
                else:
                    metrics = formulas.chain_metrics(n, eta, trained, mode)
                    exempt = mode is SumMode.ASYMPTOTIC
                for name, analytic, oracle_value in (("TTA", metrics.tta, oracle_tta),
                                                     ("FTA", metrics.fta, oracle_fta),
                                                     ("IFA", metrics.ifa, oracle_ifa)):
                    gap = abs(analytic - oracle_value)
                    row = {"regime": "trained" if trained else "untrained", "eta": eta,
                           "quantity": name, "analytic": analytic, "oracle": oracle_value,
                           "abs_gap": gap, "exempt": exempt}
                    if mc is not None:
                        row["mc"] = {"TTA": mc.tta, "FTA": mc.fta, "IFA": mc.ifa}[name]
                        row["mc_stderr"] = {"TTA": mc.stderr_tta, "FTA": mc.stderr_fta,
                                            "IFA": mc.stderr_ifa}[name]
                    report.rows.append(row)
                    if not exempt and gap > tolerance:
                        report.violations.append(row)
    return report


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def load_config_file(path: Path) -> dict:
    """Read a JSON config with the documented nested keys (topology.shape/n/l/h,
    model.eta, mc.replications, learning.*, seed, output_dir)."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def learning_from_config(section: dict, default_budget: Optional[int] = None) -> LearningConfig:
    kwargs = {}
    for key in ("delta", "floor", "stability_eps"):
        if key in section:
            kwargs[key] = float(section[key])
    for key in ("max_iterations", "stability_window"):
        if key in section:
            kwargs[key] = int(section[key])
    if "max_iterations" not in kwargs and default_budget is not None:
        kwargs["max_iterations"] = default_budget
    return LearningConfig(**kwargs)
