"""Typed multigraph data model for the six-node-type / six-edge-type network.

The network couples individuals to combination nodes summarizing their traits
(personality, social status, physical health, well-being) and to one of two
mental-health state nodes. Individual-individual edges carry SMS counts as
integer weights; all other edges have weight 1. Instances are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np
import scipy.sparse as sp


class NodeKind(Enum):
    # Declaration order fixes the global node ordering used by slice_matrix.
    Individual = 0
    PersonalityTraits = 1
    SocialStatus = 2
    PhysicalHealth = 3
    WellBeing = 4
    MentalHealth = 5


class EdgeKind(Enum):
    II = "II"
    IP = "IP"
    IS = "IS"
    IF = "IF"
    IW = "IW"
    IM = "IM"

    @property
    def endpoints(self) -> tuple[NodeKind, NodeKind]:
        return _SCHEMA[self]

    @property
    def is_target(self) -> bool:
        return self is EdgeKind.IM


_SCHEMA: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.II: (NodeKind.Individual, NodeKind.Individual),
    EdgeKind.IP: (NodeKind.Individual, NodeKind.PersonalityTraits),
    EdgeKind.IS: (NodeKind.Individual, NodeKind.SocialStatus),
    EdgeKind.IF: (NodeKind.Individual, NodeKind.PhysicalHealth),
    EdgeKind.IW: (NodeKind.Individual, NodeKind.WellBeing),
    EdgeKind.IM: (NodeKind.Individual, NodeKind.MentalHealth),
}

#: Edge kinds usable as side information (everything but the target kind).
SIDE_KINDS = (EdgeKind.II, EdgeKind.IP, EdgeKind.IS, EdgeKind.IF, EdgeKind.IW)

#: Trait edge kinds: each individual has exactly one edge of each.
TRAIT_KINDS = (EdgeKind.IP, EdgeKind.IS, EdgeKind.IF, EdgeKind.IW)


class NodeId(NamedTuple):
    kind: NodeKind
    index: int


class SchemaError(ValueError):
    """Raised when an operation violates the network schema."""


Edge = tuple[int, int, float]  # (u_index, v_index, weight), kinds implied


@dataclass(frozen=True)
class Hin:
    """Immutable heterogeneous network.

    ``labels[kind]`` lists node labels; node index within a kind is the
    position in that list. ``edges[kind]`` holds undirected edges once, as
    (u_index, v_index, weight) with u_index < v_index for II and u = the
    Individual endpoint otherwise.
    """

    labels: dict[NodeKind, tuple[str, ...]]
    edges: dict[EdgeKind, tuple[Edge, ...]]
    _adj: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for kind in NodeKind:
            self.labels.setdefault(kind, ())
        for kind in EdgeKind:
            self.edges.setdefault(kind, ())
        # adjacency index: _adj[ekind][NodeId] -> sorted list of (NodeId, w)
        adj: dict[EdgeKind, dict[NodeId, list[tuple[NodeId, float]]]] = {}
        for ekind in EdgeKind:
            ka, kb = ekind.endpoints
            index: dict[NodeId, list[tuple[NodeId, float]]] = {}
            for u, v, w in self.edges[ekind]:
                a, b = NodeId(ka, u), NodeId(kb, v)
                index.setdefault(a, []).append((b, w))
                index.setdefault(b, []).append((a, w))
            for lst in index.values():
                lst.sort(key=lambda t: (t[0].kind.value, t[0].index))
            adj[ekind] = index
        object.__setattr__(self, "_adj", adj)

    # -- basic accessors ---------------------------------------------------

    def n_nodes(self, kind: NodeKind) -> int:
        return len(self.labels[kind])

    @property
    def total_nodes(self) -> int:
        return sum(len(v) for v in self.labels.values())

    def node_offset(self, kind: NodeKind) -> int:
        """Start of this kind's block in the global node ordering."""
        off = 0
        for k in NodeKind:
            if k is kind:
                return off
            off += len(self.labels[k])
        raise AssertionError(kind)

    def global_index(self, node: NodeId) -> int:
        return self.node_offset(node.kind) + node.index

    def has_node(self, node: NodeId) -> bool:
        return 0 <= node.index < len(self.labels[node.kind])

    def neighbors(self, node: NodeId, kind: EdgeKind) -> list[tuple[NodeId, float]]:
        """Neighbors of ``node`` along ``kind`` edges, ascending by index."""
        if not self.has_node(node):
            raise SchemaError(f"unknown node {node}")
        if node.kind not in kind.endpoints:
            raise SchemaError(f"{node.kind.name} nodes carry no {kind.value} edges")
        return list(self._adj[kind].get(node, ()))

    # -- matrix views ------------------------------------------------------

    def slice_matrix(self, kind: EdgeKind) -> sp.csr_matrix:
        """Symmetric adjacency over the full node universe for one edge kind."""
        n = self.total_nodes
        ka, kb = kind.endpoints
        oa, ob = self.node_offset(ka), self.node_offset(kb)
        rows, cols, vals = [], [], []
        for u, v, w in self.edges[kind]:
            i, j = oa + u, ob + v
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        return sp.csr_matrix(
            (np.asarray(vals, dtype=float), (rows, cols)), shape=(n, n)
        )

    # -- derived networks --------------------------------------------------

    def mask_target_edges(self, individuals: Iterable[NodeId]) -> "Hin":
        """Copy with IM edges incident to the given individuals removed."""
        hidden = set()
        for node in individuals:
            if node.kind is not NodeKind.Individual:
                raise SchemaError(f"cannot mask target edges of {node.kind.name}")
            hidden.add(node.index)
        kept = tuple(e for e in self.edges[EdgeKind.IM] if e[0] not in hidden)
        edges = dict(self.edges)
        edges[EdgeKind.IM] = kept
        return Hin(dict(self.labels), edges)

    def restrict_edge_kinds(self, kinds: Iterable[EdgeKind]) -> "Hin":
        """Copy keeping only the given side kinds (IM always retained)."""
        kinds = set(kinds)
        if not kinds:
            raise ValueError("at least one side edge kind required")
        if EdgeKind.IM in kinds:
            raise ValueError("IM is always retained; do not pass it explicitly")
        keep = kinds | {EdgeKind.IM}
        edges = {k: (self.edges[k] if k in keep else ()) for k in EdgeKind}
        return Hin(dict(self.labels), edges)

    # -- validation --------------------------------------------------------

    def validate(self) -> list[str]:
        """Diagnostics for every violated invariant; empty list iff valid."""
        out: list[str] = []
        if len(self.labels[NodeKind.MentalHealth]) not in (0, 2):
            out.append(
                "MentalHealth must have exactly 2 nodes, found "
                f"{len(self.labels[NodeKind.MentalHealth])}"
            )
        for ekind in EdgeKind:
            ka, kb = ekind.endpoints
            na, nb = self.n_nodes(ka), self.n_nodes(kb)
            seen = set()
            for u, v, w in self.edges[ekind]:
                if not (0 <= u < na and 0 <= v < nb):
                    out.append(f"{ekind.value} edge ({u},{v}) endpoint out of range")
                if ekind is EdgeKind.II and u == v:
                    out.append(f"{ekind.value} self-loop at individual {u}")
                key = (min(u, v), max(u, v)) if ka is kb else (u, v)
                if key in seen:
                    out.append(f"duplicate {ekind.value} edge ({u},{v})")
                seen.add(key)
                if ekind is EdgeKind.II:
                    if w <= 0 or w != int(w):
                        out.append(f"II edge ({u},{v}) weight {w} not a positive integer")
                elif w != 1:
                    out.append(f"{ekind.value} edge ({u},{v}) weight {w} != 1")
        # per-individual incidence
        for ekind in TRAIT_KINDS:
            if not self.edges[ekind]:
                continue  # a kind removed wholesale (ablation) stays valid
            deg = [0] * self.n_nodes(NodeKind.Individual)
            for u, _, _ in self.edges[ekind]:
                if 0 <= u < len(deg):
                    deg[u] += 1
            for i, d in enumerate(deg):
                if d != 1:
                    out.append(
                        f"individual {i} has {d} {ekind.value} edges (expected 1)"
                    )
        deg = [0] * self.n_nodes(NodeKind.Individual)
        for u, _, _ in self.edges[EdgeKind.IM]:
            if 0 <= u < len(deg):
                deg[u] += 1
        for i, d in enumerate(deg):
            if d > 1:
                out.append(f"individual {i} has {d} IM edges (expected 0 or 1)")
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "nodes": {k.name: list(self.labels[k]) for k in NodeKind},
            "edges": {
                ek.value: [
                    [
                        self.labels[ek.endpoints[0]][u],
                        self.labels[ek.endpoints[1]][v],
                        w,
                    ]
                    for u, v, w in self.edges[ek]
                ]
                for ek in EdgeKind
            },
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Hin":
        doc = json.loads(text)
        labels = {k: tuple(doc["nodes"].get(k.name, ())) for k in NodeKind}
        index = {k: {lab: i for i, lab in enumerate(labels[k])} for k in NodeKind}
        edges: dict[EdgeKind, tuple[Edge, ...]] = {}
        for ek in EdgeKind:
            ka, kb = ek.endpoints
            edges[ek] = tuple(
                (index[ka][ua], index[kb][vb], w)
                for ua, vb, w in doc["edges"].get(ek.value, ())
            )
        return cls(labels, edges)


def build(
    labels: dict[NodeKind, Iterable[str]],
    edges: dict[EdgeKind, Iterable[tuple[int, int, float]]],
) -> Hin:
    """Construct a Hin, normalizing edge orientation (Individual first, II sorted)."""
    norm_edges: dict[EdgeKind, tuple[Edge, ...]] = {}
    for ek, es in edges.items():
        if ek is EdgeKind.II:
            norm_edges[ek] = tuple(
                (min(u, v), max(u, v), float(w)) for u, v, w in es
            )
        else:
            norm_edges[ek] = tuple((u, v, float(w)) for u, v, w in es)
    return Hin({k: tuple(v) for k, v in labels.items()}, norm_edges)
