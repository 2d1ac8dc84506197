"""Random-walk corpora and skip-gram-with-negative-sampling embeddings.

Uniform walks over the collapsed graph feed a DeepWalk-style embedding;
metapath-restricted walks over the typed network feed the heterogeneous
variant, whose negative samples are drawn only from the context node's kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hin import EdgeKind, Hin, NodeId, NodeKind, SchemaError

_SCHEMA_PAIRS = {frozenset(ek.endpoints) for ek in EdgeKind}


@dataclass
class Metapath:
    """Node-kind sequence, starting and ending at Individual."""

    kinds: tuple[NodeKind, ...]

    def __post_init__(self):
        ks = self.kinds
        if len(ks) < 3 or len(ks) % 2 == 0:
            raise SchemaError("metapath length must be odd and >= 3")
        if ks[0] is not NodeKind.Individual or ks[-1] is not NodeKind.Individual:
            raise SchemaError("metapath must start and end at Individual")
        for a, b in zip(ks, ks[1:]):
            if frozenset((a, b)) not in _SCHEMA_PAIRS:
                raise SchemaError(f"no edge kind joins {a.name} and {b.name}")

    @property
    def edge_kinds(self) -> tuple[EdgeKind, ...]:
        out = []
        for a, b in zip(self.kinds, self.kinds[1:]):
            for ek in EdgeKind:
                if frozenset(ek.endpoints) == frozenset((a, b)):
                    out.append(ek)
                    break
        return tuple(out)

    def label(self) -> str:
        return "-".join(k.name for k in self.kinds)


def via(kind: NodeKind) -> Metapath:
    """The I-X-I metapath through one intermediate kind."""
    return Metapath((NodeKind.Individual, kind, NodeKind.Individual))


@dataclass
class WalkCorpus:
    walks: list[list[NodeId]]
    walks_per_node: int
    length: int
    seed: int


def _walk_rng(seed: int, node_key: int, walk_index: int) -> np.random.Generator:
    # per-walk derived seed: results do not depend on generation order
    return np.random.default_rng(np.random.SeedSequence((seed, node_key, walk_index)))


def random_walks(
    hin: Hin,
    walks_per_node: int = 10,
    length: int = 80,
    seed: int = 0,
    include_target: bool = False,
    weighted: bool = False,
) -> WalkCorpus:
    """Uniform random walks on the collapsed graph, started at every node.

    A node with no usable neighbor ends its walk early (length-1 walks from
    isolated nodes). With ``weighted`` the next step is drawn proportionally
    to edge weight instead of uniformly.
    """
    if length < 1 or walks_per_node < 1:
        raise ValueError("length and walks_per_node must be >= 1")
    neigh: dict[NodeId, list[tuple[NodeId, float]]] = {}
    nodes: list[NodeId] = []
    for kind in NodeKind:
        for i in range(hin.n_nodes(kind)):
            node = NodeId(kind, i)
            acc: list[tuple[NodeId, float]] = []
            for ek in EdgeKind:
                if ek.is_target and not include_target:
                    continue
                if kind in ek.endpoints:
                    acc.extend(hin.neighbors(node, ek))
            if kind is NodeKind.MentalHealth and not include_target:
                continue
            neigh[node] = acc
            nodes.append(node)

    walks = []
    for key, start in enumerate(nodes):
        for w in range(walks_per_node):
            rng = _walk_rng(seed, key, w)
            walk = [start]
            cur = start
            while len(walk) < length:
                options = neigh.get(cur, ())
                if not options:
                    break
                if weighted:
                    ws = np.array([t[1] for t in options])
                    cur = options[rng.choice(len(options), p=ws / ws.sum())][0]
                else:
                    cur = options[rng.integers(len(options))][0]
                walk.append(cur)
            walks.append(walk)
    return WalkCorpus(walks, walks_per_node, length, seed)


def metapath_walks(
    hin: Hin,
    metapath: Metapath,
    walks_per_node: int = 10,
    repeats: int = 20,
    seed: int = 0,
) -> WalkCorpus:
    """Walks cycling the metapath pattern ``repeats`` times from each Individual.

    The next node is uniform among neighbors of the required next kind; a
    walk truncates when no such neighbor exists.
    """
    if walks_per_node < 1 or repeats < 1:
        raise ValueError("walks_per_node and repeats must be >= 1")
    pattern = metapath.kinds + tuple(
        k for _ in range(repeats - 1) for k in metapath.kinds[1:]
    )
    ekinds = metapath.edge_kinds
    n_ind = hin.n_nodes(NodeKind.Individual)
    walks = []
    steps_per_cycle = len(metapath.kinds) - 1
    for i in range(n_ind):
        for w in range(walks_per_node):
            rng = _walk_rng(seed, i, w)
            walk = [NodeId(NodeKind.Individual, i)]
            cur = walk[0]
            for step in range(len(pattern) - 1):
                ek = ekinds[step % steps_per_cycle]
                want = pattern[step + 1]
                options = [
                    nb for nb, _ in hin.neighbors(cur, ek) if nb.kind is want
                ]
                if not options:
                    break
                cur = options[rng.integers(len(options))]
                walk.append(cur)
            walks.append(walk)
    return WalkCorpus(walks, walks_per_node, len(pattern), seed)


@dataclass
class Embedding:
    dim: int
    vectors: np.ndarray  # one row per node
    node_index: dict[NodeId, int]

    def rows_for(self, nodes: list[NodeId]) -> np.ndarray:
        return self.vectors[[self.node_index[n] for n in nodes]]


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.clip(z, -35.0, 35.0)))


def _pairs_from_corpus(corpus: WalkCorpus, window: int, node_index):
    centers, contexts = [], []
    for walk in corpus.walks:
        idx = [node_index[n] for n in walk]
        for i, c in enumerate(idx):
            lo = max(0, i - window)
            hi = min(len(idx), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(c)
                    contexts.append(idx[j])
    return np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)


def train_skipgram(
    corpus: WalkCorpus,
    d: int = 64,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    lr: float = 8.0,
    seed: int = 0,
    hetero: bool = False,
    batch: int = 2048,
    negative_sampler=None,
) -> Embedding:
    """Skip-gram with negative sampling over a walk corpus.

    Noise follows the unigram^0.75 distribution; with ``hetero`` each negative
    is drawn only from nodes of the context node's kind. The learning rate
    decays linearly to 10% of the initial value. ``negative_sampler``, when
    given, observes every (context_index, negatives_array) draw (test hook).
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not corpus.walks:
        raise ValueError("empty corpus")
    kind_order = {k: i for i, k in enumerate(NodeKind)}
    nodes = sorted(
        {n for walk in corpus.walks for n in walk},
        key=lambda n: (kind_order[n.kind], n.index),
    )
    if not nodes:
        raise ValueError("empty corpus")
    node_index = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    rng = np.random.default_rng(seed)
    w_in = (rng.random((n, d)) - 0.5) / d
    w_out = np.zeros((n, d))

    centers, contexts = _pairs_from_corpus(corpus, window, node_index)
    freq = np.bincount(
        np.concatenate([[node_index[walk[0]] for walk in corpus.walks],
                        contexts]), minlength=n
    ).astype(float)
    noise = freq**0.75
    # per-kind noise tables for the heterogeneous sampler
    kinds = np.array([nd.kind.value for nd in nodes])
    tables = {}
    for kv in np.unique(kinds):
        members = np.flatnonzero(kinds == kv)
        p = noise[members]
        tables[int(kv)] = (members, p / p.sum())
    global_p = noise / noise.sum()
    all_ids = np.arange(n)

    n_pairs = len(centers)
    total_batches = max(1, epochs * ((n_pairs + batch - 1) // batch))
    losses = []
    b_count = 0
    for _ in range(epochs):
        order = rng.permutation(n_pairs)
        for s in range(0, n_pairs, batch):
            sel = order[s : s + batch]
            c, o = centers[sel], contexts[sel]
            if hetero:
                neg = np.empty((len(sel), negatives), dtype=np.int64)
                for kv, (members, p) in tables.items():
                    mask = kinds[o] == kv
                    cnt = int(mask.sum())
                    if cnt:
                        neg[mask] = rng.choice(
                            members, size=(cnt, negatives), p=p
                        )
            else:
                neg = rng.choice(all_ids, size=(len(sel), negatives), p=global_p)
            if negative_sampler is not None:
                negative_sampler(o, neg)
            # accidental hits of the true pair carry no gradient
            live = (neg != o[:, None]) & (neg != c[:, None])

            step = lr * max(0.1, 1.0 - b_count / total_batches) / len(sel)
            vc = w_in[c]  # (B,d)
            vo = w_out[o]
            vneg = w_out[neg]  # (B,k,d)
            pos_score = _expit((vc * vo).sum(1))
            neg_score = _expit((vneg * vc[:, None, :]).sum(2))
            losses.append(
                float(
                    -np.log(np.clip(pos_score, 1e-10, 1)).mean()
                    - (np.log(np.clip(1 - neg_score, 1e-10, 1)) * live)
                    .sum(1)
                    .mean()
                )
            )
            g_pos = pos_score - 1.0  # (B,)
            g_neg = neg_score * live  # (B,k)
            grad_c = g_pos[:, None] * vo + (g_neg[:, :, None] * vneg).sum(1)
            np.add.at(w_in, c, -step * grad_c)
            np.add.at(w_out, o, -step * g_pos[:, None] * vc)
            np.add.at(
                w_out.reshape(-1),
                (neg[:, :, None] * d + np.arange(d)).reshape(-1),
                (-step * g_neg[:, :, None] * vc[:, None, :]).reshape(-1),
            )
            b_count += 1
    emb = Embedding(d, w_in, node_index)
    emb.loss_curve = losses  # type: ignore[attr-defined]
    return emb


def write_corpus(corpus: WalkCorpus, path) -> None:
    """One walk per line, space-separated kind:index labels."""
    with open(path, "w") as fh:
        for walk in corpus.walks:
            fh.write(" ".join(f"{n.kind.name}:{n.index}" for n in walk) + "\n")


def write_embedding(emb: Embedding, path) -> None:
    kind_order = {k: i for i, k in enumerate(NodeKind)}
    nodes = sorted(emb.node_index, key=lambda n: (kind_order[n.kind], n.index))
    with open(path, "w") as fh:
        fh.write("node," + ",".join(f"dim_{j}" for j in range(emb.dim)) + "\n")
        for node in nodes:
            row = emb.vectors[emb.node_index[node]]
            vals = ",".join(f"{v:.10g}" for v in row)
            fh.write(f"{node.kind.name}:{node.index},{vals}\n")
