"""Graphlet degree vectors: orbit counts of small induced subgraphs.

Orbits follow the standard numbering for connected graphlets on 2-4 nodes:

    0  edge endpoint            8  4-cycle
    1  3-path end               9  paw pendant
    2  3-path middle           10  paw triangle, degree 2
    3  triangle                11  paw triangle, degree 3
    4  4-path end              12  diamond, degree 2
    5  4-path middle           13  diamond, degree 3
    6  claw leaf               14  4-clique
    7  claw center

``gdv`` counts via per-node neighborhood set algebra; ``gdv_oracle`` counts
by exhaustive enumeration and exists purely to cross-check ``gdv``.

The colored variant keeps counts per (orbit 0-3, sorted color multiset of the
graphlet's nodes). Its feature order is the published contract: first orbit 0
with the 6 pairs {Individual, kind} in NodeKind declaration order, then
orbits 1, 2, 3 each with the 21 multisets {Individual, a, b} for kinds a <= b
in declaration order.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .hin import EdgeKind, Hin, NodeKind

N_ORBITS = 15

Adjacency = list[set[int]]


def adjacency_from_edges(n: int, edges) -> Adjacency:
    adj: Adjacency = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at {u}")
        adj[u].add(v)
        adj[v].add(u)
    return adj


def homogeneous_graph(hin: Hin, include_target: bool = False) -> Adjacency:
    """Collapse the typed network to one simple graph over global indices."""
    n = hin.total_nodes
    adj: Adjacency = [set() for _ in range(n)]
    for ekind in EdgeKind:
        if ekind.is_target and not include_target:
            continue
        ka, kb = ekind.endpoints
        oa, ob = hin.node_offset(ka), hin.node_offset(kb)
        for u, v, _ in hin.edges[ekind]:
            adj[oa + u].add(ob + v)
            adj[ob + v].add(oa + u)
    return adj


def _triangle_lists(adj: Adjacency) -> list[list[tuple[int, int]]]:
    """Per node, the pairs completing a triangle with it."""
    n = len(adj)
    tri: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for u in range(n):
        for v in adj[u]:
            if v <= u:
                continue
            for w in adj[u] & adj[v]:
                if w > v:
                    tri[u].append((v, w))
                    tri[v].append((u, w))
                    tri[w].append((u, v))
    return tri


def gdv(adj: Adjacency, max_size: int = 4) -> np.ndarray:
    """Exact orbit counts for every node; shape (n, 15).

    With max_size=3 the 4-node orbits stay zero.
    """
    if max_size not in (3, 4):
        raise ValueError("max_size must be 3 or 4")
    n = len(adj)
    counts = np.zeros((n, N_ORBITS), dtype=np.int64)
    deg = [len(adj[v]) for v in range(n)]
    tri = _triangle_lists(adj)

    for v in range(n):
        d = deg[v]
        t = len(tri[v])
        counts[v, 0] = d
        counts[v, 1] = sum(deg[u] - 1 for u in adj[v]) - 2 * t
        counts[v, 2] = comb(d, 2) - t
        counts[v, 3] = t

    if max_size == 3:
        return counts

    for v in range(n):
        nv = adj[v]
        d = deg[v]

        k4 = 0
        o9 = o10 = o11 = o12 = 0
        for a, b in tri[v]:
            common_ab = adj[a] & adj[b]
            k4 += len(common_ab & nv)
            o12 += len(common_ab) - 1 - len(common_ab & nv)
            o11 += len(nv - adj[a] - adj[b] - {a, b})
            o10 += len(adj[a] - adj[b] - nv - {v, b})
            o10 += len(adj[b] - adj[a] - nv - {v, a})
        assert k4 % 3 == 0
        k4 //= 3

        for u in nv:
            for a, b in tri[u]:
                if v != a and v != b and v not in adj[a] and v not in adj[b]:
                    o9 += 1

        o13 = 0
        p2 = 0
        for u in nv:
            s = adj[u] & nv
            c = len(s)
            p2 += comb(c, 2)
            e_in = sum(len(adj[a] & s) for a in s) // 2
            o13 += comb(c, 2) - e_in

        o7 = comb(d, 3) - len(tri[v]) * (d - 2) + p2 - k4

        o6 = 0
        for u in nv:
            s = adj[u] - nv - {v}
            e_s = sum(len(adj[a] & s) for a in s) // 2
            o6 += comb(len(s), 2) - e_s

        o4 = o5 = o8 = 0
        for u in nv:
            a_set = nv - adj[u] - {u}
            b_set = adj[u] - nv - {v}
            o5 += len(a_set) * len(b_set) - sum(len(adj[a] & b_set) for a in a_set)
            for y in b_set:
                o4 += len(adj[y] - nv - adj[u] - {v, u})
        for u, w in itertools.combinations(sorted(nv), 2):
            if w in adj[u]:
                continue
            common = adj[u] & adj[w]
            o8 += len(common) - 1 - len(common & nv)

        counts[v, 4:15] = (o4, o5, o6, o7, o8, o9, o10, o11, o12, o13, k4)
    return counts


# -- exhaustive oracle ------------------------------------------------------

_ORACLE_MAX_NODES = 40

# (subgraph size, edge count, node degree within subgraph) -> orbit
_CLASSIFY = {
    (2, 1, 1): 0,
    (3, 2, 1): 1,
    (3, 2, 2): 2,
    (3, 3, 2): 3,
    (4, 3, 1, "path"): 4,
    (4, 3, 2, "path"): 5,
    (4, 3, 1, "star"): 6,
    (4, 3, 3, "star"): 7,
    (4, 4, 2, "cycle"): 8,
    (4, 4, 1, "paw"): 9,
    (4, 4, 2, "paw"): 10,
    (4, 4, 3, "paw"): 11,
    (4, 5, 2): 12,
    (4, 5, 3): 13,
    (4, 6, 3): 14,
}


def _connected(nodes: tuple[int, ...], adj: Adjacency) -> bool:
    todo = [nodes[0]]
    seen = {nodes[0]}
    members = set(nodes)
    while todo:
        u = todo.pop()
        for w in adj[u] & members:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(nodes)


def _classify(nodes: tuple[int, ...], adj: Adjacency, node: int) -> int:
    k = len(nodes)
    degs = {u: sum(1 for w in nodes if w in adj[u] and w != u) for u in nodes}
    e = sum(degs.values()) // 2
    dv = degs[node]
    if k < 4 or e in (5, 6):
        return _CLASSIFY[(k, e, dv)]
    shape_by_degseq = {
        (1, 1, 2, 2): "path",
        (1, 1, 1, 3): "star",
        (2, 2, 2, 2): "cycle",
        (1, 2, 2, 3): "paw",
    }
    shape = shape_by_degseq[tuple(sorted(degs.values()))]
    return _CLASSIFY[(k, e, dv, shape)]


def gdv_oracle(adj: Adjacency, node: int, max_size: int = 4) -> np.ndarray:
    """Brute-force orbit counts for one node; guards against large graphs."""
    if max_size not in (3, 4):
        raise ValueError("max_size must be 3 or 4")
    n = len(adj)
    if n > _ORACLE_MAX_NODES:
        raise ValueError(f"oracle limited to {_ORACLE_MAX_NODES} nodes, got {n}")
    others = [u for u in range(n) if u != node]
    counts = np.zeros(N_ORBITS, dtype=np.int64)
    for k in range(2, max_size + 1):
        for rest in itertools.combinations(others, k - 1):
            nodes = (node,) + rest
            if _connected(nodes, adj):
                counts[_classify(nodes, adj, node)] += 1
    return counts


# -- colored graphlets ------------------------------------------------------


def colored_feature_names() -> list[str]:
    """The fixed (orbit, color multiset) feature order."""
    kinds = list(NodeKind)
    names = [f"orbit_0::{NodeKind.Individual.name}-{k.name}" for k in kinds]
    for orbit in (1, 2, 3):
        for a, b in itertools.combinations_with_replacement(kinds, 2):
            names.append(
                f"orbit_{orbit}::{NodeKind.Individual.name}-{a.name}-{b.name}"
            )
    return names


def _color_index() -> dict:
    kinds = list(NodeKind)
    idx = {}
    pos = 0
    for k in kinds:
        idx[(0, (k,))] = pos
        pos += 1
    for orbit in (1, 2, 3):
        for a, b in itertools.combinations_with_replacement(kinds, 2):
            idx[(orbit, (a, b))] = pos
            pos += 1
    return idx


def colored_gdv(hin: Hin, max_size: int = 3) -> np.ndarray:
    """Per-individual counts over (orbit, color multiset) pairs.

    The target edge kind is excluded from the collapsed graph. Rows follow
    individual index order; columns follow ``colored_feature_names``.
    """
    if max_size != 3:
        raise ValueError("colored counting supports max_size=3")
    adj = homogeneous_graph(hin, include_target=False)
    kind_of: list[NodeKind] = []
    for k in NodeKind:
        kind_of.extend([k] * hin.n_nodes(k))
    index = _color_index()
    n_ind = hin.n_nodes(NodeKind.Individual)
    off = hin.node_offset(NodeKind.Individual)
    out = np.zeros((n_ind, len(index)), dtype=np.int64)

    def colorpair(a: int, b: int) -> tuple[NodeKind, NodeKind]:
        ka, kb = kind_of[a], kind_of[b]
        return (ka, kb) if ka.value <= kb.value else (kb, ka)

    for i in range(n_ind):
        v = off + i
        nv = adj[v]
        for u in nv:
            out[i, index[(0, (kind_of[u],))]] += 1
        for a, b in itertools.combinations(sorted(nv), 2):
            orbit = 3 if b in adj[a] else 2
            out[i, index[(orbit, colorpair(a, b))]] += 1
        for u in nv:
            for w in adj[u] - nv - {v}:
                out[i, index[(1, colorpair(u, w))]] += 1
    return out


def write_gdv_csv(counts: np.ndarray, ids, path, colored: bool = False) -> None:
    """One row per individual; homogeneous headers orbit_k, colored headers
    orbit_k::colorset."""
    names = colored_feature_names() if colored else [f"orbit_{k}" for k in range(N_ORBITS)]
    if counts.shape != (len(ids), len(names)):
        raise ValueError("count matrix shape does not match ids/headers")
    with open(path, "w") as fh:
        fh.write("id," + ",".join(names) + "\n")
        for ident, row in zip(ids, counts):
            fh.write(ident + "," + ",".join(str(int(v)) for v in row) + "\n")
