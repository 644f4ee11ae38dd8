"""Stochastic cascading engine and Monte Carlo spread estimators.

The model: a source posts a message; in synchronous rounds, every undecided
node with at least one in-neighbor that posted in the previous round picks one
posted in-neighbor uniformly at random and decides once, permanently. A smart
node forwards a true message with probability eta and never forwards a false
one; a normal node forwards with probability eta * w_jk where j is the picked
neighbor. Every receipt (forwarded or declined) is a delivery event, which the
learning loop consumes.
"""
from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

from .errors import ContractError, EstimationError, UnsupportedTopologyError
from .graph import NodeKind, TrustGraph


class MessageKind(Enum):
    TRUE = "true"
    FALSE = "false"


@dataclass(frozen=True)
class ModelConfig:
    """Cascade parameters. ``eta`` is the natural forwarding rate."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ContractError(f"eta must lie in [0, 1], got {self.eta}")


class Delivery(NamedTuple):
    src: int
    dst: int
    forwarded: bool


@dataclass
class CascadeOutcome:
    """Full record of one cascade: who posted, and every delivery event."""

    source: int
    kind: MessageKind
    posters: set[int]
    deliveries: list[Delivery]
    rounds: int

    def dump(self) -> str:
        buf = io.StringIO()
        buf.write(f"# source={self.source} kind={self.kind.value} "
                  f"posters={sorted(self.posters)} rounds={self.rounds}\n")
        for d in self.deliveries:
            buf.write(f"{d.src}->{d.dst} {'forwarded' if d.forwarded else 'declined'}\n")
        return buf.getvalue()


def run_cascade(graph: TrustGraph, source: int, kind: MessageKind,
                cfg: ModelConfig, rng: random.Random) -> CascadeOutcome:
    """Run one synchronous-round cascade and record every delivery.

    A node that receives from several simultaneous posters picks uniformly
    among them once; on the tree topologies in scope this never happens.
    """
    if source not in graph.kinds:
        raise ContractError(f"source {source} not in graph")
    if kind is MessageKind.FALSE and graph.is_smart(source):
        raise ContractError("a smart source never emits a false message")

    eta = cfg.eta
    out_nb = graph.out_neighbors
    in_nb = graph.in_neighbors
    weights = graph.weights
    kinds = graph.kinds
    smart = NodeKind.SMART
    is_true = kind is MessageKind.TRUE

    posted = {source}
    decided = {source}
    frontier = [source]
    deliveries: list[Delivery] = []
    rounds = 0
    while frontier:
        receivers: dict[int, None] = {}
        for j in frontier:
            for k in out_nb[j]:
                if k not in decided:
                    receivers[k] = None
        if not receivers:
            break
        rounds += 1
        frontier = []
        for k in sorted(receivers):
            candidates = [j for j in in_nb[k] if j in posted]
            j = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
            if kinds[k] is smart:
                forwarded = is_true and rng.random() < eta
            else:
                forwarded = rng.random() < eta * weights[(j, k)]
            deliveries.append(Delivery(j, k, forwarded))
            decided.add(k)
            if forwarded:
                posted.add(k)
                frontier.append(k)
    return CascadeOutcome(source=source, kind=kind, posters=posted,
                          deliveries=deliveries, rounds=rounds)


def _delivery_tree(graph: TrustGraph, source: int, kind: MessageKind, eta: float):
    """BFS layout from ``source``: per reachable node, its parent position and
    the probability it forwards given the parent posted. Subtrees behind a
    zero-probability hop are pruned (their posting probability is zero)."""
    parent = [-1]
    prob = [1.0]
    pos = {source: 0}
    frontier = [source]
    is_true = kind is MessageKind.TRUE
    while frontier:
        nxt = []
        for j in frontier:
            for k in graph.out_neighbors[j]:
                if k in pos:
                    continue
                if graph.kinds[k] is NodeKind.SMART:
                    p = eta if is_true else 0.0
                else:
                    p = eta * graph.weights[(j, k)]
                if p <= 0.0:
                    continue
                pos[k] = len(prob)
                parent.append(pos[j])
                prob.append(p)
                nxt.append(k)
        frontier = nxt
    order = sorted(pos, key=pos.get)
    return order, np.asarray(parent), np.asarray(prob)


def sample_spread_counts(graph: TrustGraph, source: int, kind: MessageKind,
                         cfg: ModelConfig, replications: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Vectorized Monte Carlo: sizes of ``replications`` independent cascades.

    Exploits the tree structure (each node has a unique delivery path), so the
    per-replication draw is a chain of Bernoulli thinnings; distributionally
    identical to repeated ``run_cascade`` calls but orders of magnitude
    faster. Tree topologies only.
    """
    if not graph.is_tree():
        raise UnsupportedTopologyError("batch sampling requires a tree topology")
    if kind is MessageKind.FALSE and graph.is_smart(source):
        raise ContractError("a smart source never emits a false message")
    _, parent, prob = _delivery_tree(graph, source, kind, cfg.eta)
    n = len(prob)
    if n == 1:
        return np.ones(replications)
    draws = rng.random((replications, n - 1))
    post = np.empty((replications, n), dtype=bool)
    post[:, 0] = True
    for idx in range(1, n):
        post[:, idx] = post[:, parent[idx]] & (draws[:, idx - 1] < prob[idx])
    return post.sum(axis=1).astype(float)


def _mean_and_var(counts: np.ndarray) -> tuple[float, float]:
    m = float(counts.mean())
    v = float(counts.var(ddof=1)) if len(counts) > 1 else 0.0
    return m, v


@dataclass
class SpreadStats:
    """Monte Carlo estimates of the three transmission abilities.

    ``tta``/``fta`` are the network-averaged true/false spread fractions;
    ``ifa`` is their relative difference (tta - fta) / fta.
    """

    tta: float
    fta: float
    ifa: float
    stderr_tta: float
    stderr_fta: float
    stderr_ifa: float
    replications: int


def estimate_stats(graph: TrustGraph, cfg: ModelConfig, replications: int,
                   rng: Union[np.random.Generator, int]) -> SpreadStats:
    """Estimate TTA, FTA, and IFA by Monte Carlo.

    Every node sources ``replications`` true cascades and every normal node
    sources ``replications`` false cascades. Each (source, kind) pair draws
    from its own child stream spawned in a fixed order, so results are
    bit-reproducible for a given seed and independent of execution order.
    """
    if replications < 1:
        raise ContractError("replications must be >= 1")
    normals = graph.normal_nodes
    if not normals:
        raise EstimationError("FTA is undefined on a graph with no normal nodes")
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    nodes = graph.nodes
    n = len(nodes)
    tasks = [(v, MessageKind.TRUE) for v in nodes] + [(v, MessageKind.FALSE) for v in normals]
    streams = rng.spawn(len(tasks))
    means = {}
    variances = {}
    for (v, kind), stream in zip(tasks, streams):
        counts = sample_spread_counts(graph, v, kind, cfg, replications, stream)
        means[(v, kind)], variances[(v, kind)] = _mean_and_var(counts)

    n_norm = len(normals)
    tta = sum(means[(v, MessageKind.TRUE)] for v in nodes) / n**2
    fta = sum(means[(v, MessageKind.FALSE)] for v in normals) / (n * n_norm)
    var_tta = sum(variances[(v, MessageKind.TRUE)] for v in nodes) / (replications * n**4)
    var_fta = sum(variances[(v, MessageKind.FALSE)] for v in normals) / (replications * (n * n_norm) ** 2)
    ifa = (tta - fta) / fta
    # delta method on the ratio; true and false runs are independent
    var_ifa = var_tta / fta**2 + (tta**2 / fta**4) * var_fta
    return SpreadStats(tta=tta, fta=fta, ifa=ifa,
                       stderr_tta=math.sqrt(var_tta), stderr_fta=math.sqrt(var_fta),
                       stderr_ifa=math.sqrt(var_ifa), replications=replications)


@dataclass
class MeasuredStratification:
    """Per-source mean spread counts and successive differences, estimated by
    Monte Carlo on a chain or on chain A of a bridged pair."""

    kind: MessageKind
    sources: list[int]
    mean_counts: dict[int, float]
    stderr_counts: dict[int, float]
    diffs: dict[int, float]
    stderr_diffs: dict[int, float]
    replications: int


def stratification_mc(graph: TrustGraph, cfg: ModelConfig, kind: MessageKind,
                      replications: int,
                      rng: Union[np.random.Generator, int]) -> MeasuredStratification:
    """Estimate the diffusion-power profile along a chain.

    Sources are the chain positions 1..n (true) or 2..n (false; the smart
    terminal cannot source a false message); counts cover the whole graph, so
    on a bridged pair the spread into chain B is included. Stars are rejected:
    their leaves are exchangeable, so no profile exists.
    """
    spec = graph.topology
    if spec is None or spec.shape not in ("chain", "bridged"):
        raise UnsupportedTopologyError("stratification profile needs a chain or bridged topology")
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    first = 1 if kind is MessageKind.TRUE else 2
    sources = list(range(first, spec.n + 1))
    streams = rng.spawn(len(sources))
    means = {}
    variances = {}
    for v, stream in zip(sources, streams):
        counts = sample_spread_counts(graph, v, kind, cfg, replications, stream)
        means[v], variances[v] = _mean_and_var(counts)
    diffs = {}
    stderr_diffs = {}
    for i in sources[:-1]:
        diffs[i] = means[i] - means[i + 1]
        stderr_diffs[i] = math.sqrt((variances[i] + variances[i + 1]) / replications)
    return MeasuredStratification(
        kind=kind, sources=sources, mean_counts=means,
        stderr_counts={v: math.sqrt(variances[v] / replications) for v in sources},
        diffs=diffs, stderr_diffs=stderr_diffs, replications=replications)
