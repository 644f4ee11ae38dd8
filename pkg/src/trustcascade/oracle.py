"""Independent ground truth for expected spread counts.

Two routes, neither of which shares code with the closed forms: a path-product
evaluation that is exact on trees, and an exhaustive event-tree enumeration of
the round-synchronous cascade (including the pick rule) for small graphs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .cascade import MessageKind, ModelConfig
from .errors import BudgetExceededError, ContractError, UnsupportedTopologyError
from .graph import NodeKind, TrustGraph


@dataclass
class ExpectedSpread:
    source: int
    kind: MessageKind
    expected_posters: float
    node_probabilities: dict[int, float]


def _hop_probability(graph: TrustGraph, j: int, k: int, kind: MessageKind, eta: float) -> float:
    if graph.kinds[k] is NodeKind.SMART:
        return eta if kind is MessageKind.TRUE else 0.0
    return eta * graph.weights[(j, k)]


def tree_expected_spread(graph: TrustGraph, source: int, kind: MessageKind,
                         cfg: ModelConfig) -> ExpectedSpread:
    """Exact expectation on a tree: each node posts with the product of the
    per-hop forwarding probabilities along its unique delivery path."""
    if not graph.is_tree():
        raise UnsupportedTopologyError("path-product oracle requires a tree")
    if source not in graph.kinds:
        raise ContractError(f"source {source} not in graph")
    if kind is MessageKind.FALSE and graph.is_smart(source):
        raise ContractError("a smart source never emits a false message")
    prob = {v: 0.0 for v in graph.kinds}
    prob[source] = 1.0
    frontier = [source]
    seen = {source}
    while frontier:
        nxt = []
        for j in frontier:
            for k in graph.out_neighbors[j]:
                if k in seen:
                    continue
                seen.add(k)
                prob[k] = prob[j] * _hop_probability(graph, j, k, kind, cfg.eta)
                nxt.append(k)
        frontier = nxt
    return ExpectedSpread(source=source, kind=kind,
                          expected_posters=math.fsum(prob.values()),
                          node_probabilities=prob)


def enumerate_expected_spread(graph: TrustGraph, source: int, kind: MessageKind,
                              cfg: ModelConfig, budget: int = 500_000) -> ExpectedSpread:
    """Exact expectation by expanding the full event tree of the cascade.

    Branches over every pick choice and every forward/decline outcome, round
    by round, weighting each branch by its probability. Validates the pick
    rule on arbitrary graphs, unlike the path-product route; cost is
    exponential, so ``budget`` caps the number of expanded states and the
    function refuses (rather than truncates) beyond it.
    """
    if source not in graph.kinds:
        raise ContractError(f"source {source} not in graph")
    if kind is MessageKind.FALSE and graph.is_smart(source):
        raise ContractError("a smart source never emits a false message")
    eta = cfg.eta
    out_nb = graph.out_neighbors
    in_nb = graph.in_neighbors
    node_prob = {v: 0.0 for v in graph.kinds}
    expected = 0.0
    states = 0

    def settle(posted: frozenset, p: float) -> None:
        nonlocal expected
        expected += p * len(posted)
        for v in posted:
            node_prob[v] += p

    def advance(posted: frozenset, decided: frozenset, frontier: frozenset, p: float) -> None:
        nonlocal states
        states += 1
        if states > budget:
            raise BudgetExceededError(f"event tree exceeded budget of {budget} states")
        receivers = sorted({k for j in frontier for k in out_nb[j] if k not in decided})
        if not receivers:
            settle(posted, p)
            return
        # expand the joint (pick, forward) outcome of every receiver this round
        def expand(idx: int, new_posts: tuple, p_branch: float) -> None:
            if idx == len(receivers):
                advance(posted | frozenset(new_posts),
                        decided | frozenset(receivers),
                        frozenset(new_posts), p_branch)
                return
            k = receivers[idx]
            candidates = [j for j in in_nb[k] if j in posted]
            pick_p = p_branch / len(candidates)
            for j in candidates:
                forward_p = _hop_probability(graph, j, k, kind, eta)
                if forward_p > 0.0:
                    expand(idx + 1, new_posts + (k,), pick_p * forward_p)
                if forward_p < 1.0:
                    expand(idx + 1, new_posts, pick_p * (1.0 - forward_p))
        expand(0, (), p)

    advance(frozenset([source]), frozenset([source]), frozenset([source]), 1.0)
    return ExpectedSpread(source=source, kind=kind,
                          expected_posters=expected, node_probabilities=node_prob)
