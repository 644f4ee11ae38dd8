"""Self-learning trust re-weighting loop.

Each iteration triggers one cascade (uniform random source; a smart source
emits a true message, a normal source a fair coin flip between true and false)
and then rewards or punishes, by a fixed step, the weight of every link that
delivered the message -- including links whose receiver declined to forward.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .cascade import MessageKind, ModelConfig, run_cascade
from .errors import ContractError
from .graph import TrustGraph


@dataclass(frozen=True)
class LearningConfig:
    """Re-weighting parameters.

    ``delta`` is the per-delivery reward/punishment step; ``floor`` the
    minimum weight, kept positive so no link ever has zero transition
    probability. Defaults are 0.001 each, the values the figure protocols
    assume.
    """

    delta: float = 0.001
    floor: float = 0.001
    max_iterations: int = 1_000_000
    stability_eps: float = 1e-6
    stability_window: int = 5

    def __post_init__(self):
        if self.delta <= 0 or self.floor <= 0:
            raise ContractError("delta and floor must be positive")
        if self.floor + self.delta > 1.0:
            raise ContractError("floor + delta must not exceed 1")
        if self.max_iterations < 1:
            raise ContractError("max_iterations must be >= 1")
        if self.stability_window < 1:
            raise ContractError("stability_window must be >= 1")


def reweight_on_receipt(weight: float, kind: MessageKind, cfg: LearningConfig) -> float:
    """One weight update: +delta for a delivered true message (clamped at 1),
    -delta for a false one (clamped at the floor)."""
    if kind is MessageKind.TRUE:
        return weight + cfg.delta if weight <= 1.0 - cfg.delta else 1.0
    return weight - cfg.delta if weight >= cfg.delta + cfg.floor else cfg.floor


def has_converged(snapshots: list[tuple[float, ...]], cfg: LearningConfig) -> bool:
    """True iff, over the trailing window, no weight moved by stability_eps or
    more (max spread per weight across the window stays below the threshold)."""
    if len(snapshots) < cfg.stability_window:
        raise ContractError(
            f"need at least {cfg.stability_window} snapshots, got {len(snapshots)}")
    window = snapshots[-cfg.stability_window:]
    for values in zip(*window):
        if max(values) - min(values) >= cfg.stability_eps:
            return False
    return True


@dataclass
class TrainingReport:
    iterations_run: int
    converged: bool
    final_weights: dict[tuple[int, int], float]
    weight_trajectory: list[tuple[int, dict[tuple[int, int], float]]] = field(default_factory=list)

    def trajectory_rows(self):
        """Yield ``(iteration, src, dst, weight)`` rows for CSV export."""
        for iteration, weights in self.weight_trajectory:
            for (j, k) in sorted(weights):
                yield iteration, j, k, weights[(j, k)]


def train(graph: TrustGraph, model: ModelConfig, cfg: LearningConfig,
          rng: random.Random, *, check_interval: int = 1000,
          trajectory_stride: Optional[int] = None) -> TrainingReport:
    """Run the re-weighting loop in place on ``graph``.

    Weight updates are applied after each cascade completes, in delivery
    order; on the tree topologies in scope each edge delivers at most once per
    cascade, so the order is immaterial. Stops early once the sampled weight
    snapshots are stable (checked every ``check_interval`` iterations), else
    after ``max_iterations``.
    """
    for w in graph.weights.values():
        if not cfg.floor <= w <= 1.0:
            raise ContractError(f"initial weight {w} outside [{cfg.floor}, 1]")
    nodes = graph.nodes
    weights = graph.weights
    edge_order = sorted(weights)
    delta = cfg.delta
    floor_step = cfg.delta + cfg.floor
    snapshots: list[tuple[float, ...]] = []
    trajectory: list[tuple[int, dict]] = []
    converged = False
    iterations = 0
    for t in range(1, cfg.max_iterations + 1):
        iterations = t
        source = nodes[rng.randrange(len(nodes))]
        if graph.is_smart(source):
            kind = MessageKind.TRUE
        else:
            kind = MessageKind.TRUE if rng.random() < 0.5 else MessageKind.FALSE
        outcome = run_cascade(graph, source, kind, model, rng)
        if kind is MessageKind.TRUE:
            for j, k, _ in outcome.deliveries:
                w = weights[(j, k)]
                weights[(j, k)] = w + delta if w <= 1.0 - delta else 1.0
        else:
            for j, k, _ in outcome.deliveries:
                w = weights[(j, k)]
                weights[(j, k)] = w - delta if w >= floor_step else cfg.floor
        if trajectory_stride and t % trajectory_stride == 0:
            trajectory.append((t, dict(weights)))
        if t % check_interval == 0:
            snapshots.append(tuple(weights[e] for e in edge_order))
            if len(snapshots) >= cfg.stability_window and has_converged(snapshots, cfg):
                converged = True
                break
            if len(snapshots) > cfg.stability_window:
                del snapshots[0]
    return TrainingReport(iterations_run=iterations, converged=converged,
                          final_weights=dict(weights), weight_trajectory=trajectory)
