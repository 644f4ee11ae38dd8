"""Trust network data model and builders for chain, star, and bridged-chain topologies.

Nodes are 1-based integers. Every directed edge (j, k) carries a trust weight
w_jk in [floor, 1], read by node k when it decides whether to copy a message
received from j. Freshly built graphs have every weight at 0.5.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import ContractError, TopologyError

INITIAL_WEIGHT = 0.5


class NodeKind(Enum):
    SMART = "smart"
    NORMAL = "normal"


@dataclass(frozen=True)
class TopologySpec:
    """Shape descriptor: ``chain``/``star`` of size ``n``, or two ``bridged``
    chains of ``n`` nodes each joined between node ``l`` (chain A) and node
    ``h`` (chain B)."""

    shape: str
    n: int
    l: Optional[int] = None
    h: Optional[int] = None

    def __post_init__(self):
        if self.shape not in ("chain", "star", "bridged"):
            raise TopologyError(f"unknown shape {self.shape!r}")
        if self.n < 2:
            raise TopologyError(f"{self.shape} needs at least 2 nodes per component, got n={self.n}")
        if self.shape == "bridged":
            if self.l is None or self.h is None:
                raise TopologyError("bridged topology needs bridge indices l and h")
            for name, idx in (("l", self.l), ("h", self.h)):
                if not 2 <= idx <= self.n:
                    raise TopologyError(
                        f"bridge index {name}={idx} out of range [2, {self.n}] "
                        f"(bridge endpoints must be normal nodes)"
                    )
        elif self.l is not None or self.h is not None:
            raise TopologyError(f"{self.shape} topology takes no bridge indices")

    def to_dict(self) -> dict:
        d = {"shape": self.shape, "n": self.n}
        if self.shape == "bridged":
            d["l"] = self.l
            d["h"] = self.h
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TopologySpec":
        return cls(shape=d["shape"], n=int(d["n"]),
                   l=int(d["l"]) if d.get("l") is not None else None,
                   h=int(d["h"]) if d.get("h") is not None else None)


@dataclass
class TrustGraph:
    """Directed weighted trust network.

    ``weights`` maps each directed edge (src, dst) to the trust dst places in
    src. ``out_neighbors``/``in_neighbors`` are adjacency lists kept in sync
    with ``weights`` by the builders; cascade code reads them directly.
    Weights may be mutated between cascades (learning); everything else is
    fixed at build time.
    """

    kinds: dict[int, NodeKind]
    weights: dict[tuple[int, int], float]
    out_neighbors: dict[int, list[int]] = field(repr=False)
    in_neighbors: dict[int, list[int]] = field(repr=False)
    labels: dict[int, str]
    topology: Optional[TopologySpec] = None

    @property
    def node_count(self) -> int:
        return len(self.kinds)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.kinds)

    @property
    def smart_nodes(self) -> list[int]:
        return [v for v in self.nodes if self.kinds[v] is NodeKind.SMART]

    @property
    def normal_nodes(self) -> list[int]:
        return [v for v in self.nodes if self.kinds[v] is NodeKind.NORMAL]

    def is_smart(self, node: int) -> bool:
        return self.kinds[node] is NodeKind.SMART

    def copy(self) -> "TrustGraph":
        return TrustGraph(
            kinds=dict(self.kinds),
            weights=dict(self.weights),
            out_neighbors={v: list(ns) for v, ns in self.out_neighbors.items()},
            in_neighbors={v: list(ns) for v, ns in self.in_neighbors.items()},
            labels=dict(self.labels),
            topology=self.topology,
        )

    def undirected_edges(self) -> set[frozenset[int]]:
        return {frozenset(e) for e in self.weights}

    def is_tree(self) -> bool:
        """True iff the underlying undirected graph is connected and acyclic."""
        und = {}
        for (j, k) in self.weights:
            und.setdefault(j, set()).add(k)
            und.setdefault(k, set()).add(j)
        if len(self.undirected_edges()) != self.node_count - 1:
            return False
        seen = set()
        stack = [next(iter(self.kinds))]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(und.get(v, ()))
        return len(seen) == self.node_count

    def dump(self) -> str:
        """Serialize as a node-kind header plus one ``src,dst,weight`` line per edge."""
        buf = io.StringIO()
        kinds = " ".join(f"{v}={self.kinds[v].value}" for v in self.nodes)
        buf.write(f"# kinds {kinds}\n")
        buf.write("src,dst,weight\n")
        for (j, k) in sorted(self.weights):
            buf.write(f"{j},{k},{self.weights[(j, k)]!r}\n")
        return buf.getvalue()

    @classmethod
    def from_dump(cls, text: str) -> "TrustGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# kinds "):
            raise ContractError("graph dump must start with a '# kinds' header")
        kinds = {}
        for item in lines[0][len("# kinds "):].split():
            node, kind = item.split("=")
            kinds[int(node)] = NodeKind(kind)
        if lines[1] != "src,dst,weight":
            raise ContractError("graph dump missing 'src,dst,weight' column header")
        weights = {}
        for ln in lines[2:]:
            j, k, w = ln.split(",")
            weights[(int(j), int(k))] = float(w)
        return _assemble(kinds, weights, labels={v: f"v{v}" for v in kinds})


def _assemble(kinds, weights, labels, topology=None) -> TrustGraph:
    out_nb = {v: [] for v in kinds}
    in_nb = {v: [] for v in kinds}
    for (j, k) in sorted(weights):
        if j not in kinds or k not in kinds:
            raise ContractError(f"edge ({j},{k}) references a missing node")
        out_nb[j].append(k)
        in_nb[k].append(j)
    return TrustGraph(kinds=kinds, weights=weights, out_neighbors=out_nb,
                      in_neighbors=in_nb, labels=labels, topology=topology)


def _fresh_pair(weights: dict, j: int, k: int) -> None:
    weights[(j, k)] = INITIAL_WEIGHT
    weights[(k, j)] = INITIAL_WEIGHT


def build_chain(n: int) -> TrustGraph:
    """Chain v1..vn with v1 the only smart node and bidirectional 0.5 links."""
    spec = TopologySpec("chain", n)
    kinds = {i: NodeKind.SMART if i == 1 else NodeKind.NORMAL for i in range(1, n + 1)}
    weights: dict[tuple[int, int], float] = {}
    for i in range(1, n):
        _fresh_pair(weights, i, i + 1)
    return _assemble(kinds, weights, {i: f"v{i}" for i in kinds}, spec)


def build_star(n: int) -> TrustGraph:
    """Star with smart center v1 and leaves v2..vn; no leaf-leaf links."""
    spec = TopologySpec("star", n)
    kinds = {i: NodeKind.SMART if i == 1 else NodeKind.NORMAL for i in range(1, n + 1)}
    weights: dict[tuple[int, int], float] = {}
    for i in range(2, n + 1):
        _fresh_pair(weights, 1, i)
    return _assemble(kinds, weights, {i: f"v{i}" for i in kinds}, spec)


def bridged_node_id(component: str, index: int, n: int) -> int:
    """Flat node id for chain-A ('a') or chain-B ('b') position ``index``."""
    if component == "a":
        return index
    if component == "b":
        return n + index
    raise ContractError(f"component must be 'a' or 'b', got {component!r}")


def build_bridged_chains(n: int, l: int, h: int) -> TrustGraph:
    """Two chains of ``n`` nodes (A: v1..vn, B: u1..un, each led by a smart
    terminal) plus a bidirectional bridge between v_l and u_h.

    Chain-B node u_i gets the flat id n+i.
    """
    spec = TopologySpec("bridged", n, l, h)
    kinds = {}
    labels = {}
    for i in range(1, n + 1):
        kinds[i] = NodeKind.SMART if i == 1 else NodeKind.NORMAL
        labels[i] = f"v{i}"
        kinds[n + i] = NodeKind.SMART if i == 1 else NodeKind.NORMAL
        labels[n + i] = f"u{i}"
    weights: dict[tuple[int, int], float] = {}
    for i in range(1, n):
        _fresh_pair(weights, i, i + 1)
        _fresh_pair(weights, n + i, n + i + 1)
    _fresh_pair(weights, l, n + h)
    return _assemble(kinds, weights, labels, spec)


_BUILDERS = {
    "chain": lambda s: build_chain(s.n),
    "star": lambda s: build_star(s.n),
    "bridged": lambda s: build_bridged_chains(s.n, s.l, s.h),
}


def build(spec: TopologySpec) -> TrustGraph:
    return _BUILDERS[spec.shape](spec)


def set_limit_weights(graph: TrustGraph, spec: Optional[TopologySpec] = None) -> TrustGraph:
    """Set weights to the predicted fixed point of infinite training.

    Links pointing away from a smart node saturate at 1 (they only ever carry
    true messages sourced there); for bridged chains the bridge pair and the
    backward links on the paths from each bridge endpoint down to index 2 also
    saturate, because true messages from the *other* chain's smart node flow
    through them. Everything else keeps its 0.5 initialization. Mutates
    ``graph`` in place and returns it; idempotent.
    """
    spec = spec or graph.topology
    if spec is None:
        raise ContractError("graph carries no topology spec and none was given")
    reference = build(spec)
    if graph.kinds != reference.kinds or set(graph.weights) != set(reference.weights):
        raise ContractError(f"graph does not match topology spec {spec.to_dict()}")
    n = spec.n
    for e in graph.weights:
        graph.weights[e] = INITIAL_WEIGHT
    if spec.shape == "chain":
        for i in range(1, n):
            graph.weights[(i, i + 1)] = 1.0
    elif spec.shape == "star":
        for i in range(2, n + 1):
            graph.weights[(1, i)] = 1.0
    else:
        for i in range(1, n):
            graph.weights[(i, i + 1)] = 1.0
            graph.weights[(n + i, n + i + 1)] = 1.0
        graph.weights[(spec.l, n + spec.h)] = 1.0
        graph.weights[(n + spec.h, spec.l)] = 1.0
        for i in range(3, spec.l + 1):
            graph.weights[(i, i - 1)] = 1.0
        for i in range(3, spec.h + 1):
            graph.weights[(n + i, n + i - 1)] = 1.0
    return graph


def validate_weights(graph: TrustGraph, floor: float) -> None:
    """Raise if any weight lies outside [floor, 1]."""
    for e, w in graph.weights.items():
        if not floor <= w <= 1.0:
            raise ContractError(f"weight {w} on edge {e} outside [{floor}, 1]")
