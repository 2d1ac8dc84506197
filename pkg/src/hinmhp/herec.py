"""Metapath-fusion recommender for target-edge scoring.

Three stages, trained in sequence:

1. per-metapath embeddings of individuals from metapath-restricted walks
   (skip-gram with kind-restricted negative sampling),
2. a personalized non-linear fusion of the per-metapath embeddings,
   e_i = s(sum_l w_il (M_l e_i^l + b_l)) with per-individual weights w_il,
3. a bilinear scoring head against learned mental-health-node factors.

Stages 2 and 3 are optimized end-to-end with squared loss on the unmasked
(training) target edges; the complement mental-health pairing of each
observed edge serves as its negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hin import TRAIT_KINDS, EdgeKind, Hin, NodeId, NodeKind  # noqa: F401
from .mrmf import DivergenceError
from .walks import Metapath, metapath_walks, train_skipgram, via


@dataclass
class HerecConfig:
    d: int = 30
    learning_rate: float = 0.5
    l2: float = 0.001
    epochs: int = 300
    seed: int = 0
    walks_per_node: int = 10
    repeats: int = 20
    window: int = 5
    negatives: int = 5
    embed_epochs: int = 5

    def check(self) -> None:
        if self.d < 1:
            raise ValueError("embedding dimension must be >= 1")
        if self.learning_rate <= 0 or self.epochs < 1:
            raise ValueError("learning_rate must be > 0 and epochs >= 1")


def default_metapaths() -> list[Metapath]:
    """The five I-X-I families, one per non-individual node kind."""
    paths = [via(ek.endpoints[1]) for ek in TRAIT_KINDS]
    paths.append(via(NodeKind.MentalHealth))
    return paths


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.clip(z, -35.0, 35.0)))


@dataclass
class HerecModel:
    fusion_weights: np.ndarray  # (n_individuals, n_metapaths)
    transforms: list[np.ndarray]  # M_l, each (d, d)
    biases: list[np.ndarray]  # b_l, each (d,)
    bilinear: np.ndarray  # (d, d)
    mh_factors: np.ndarray  # (2, d)
    objective_curve: list[float] = field(default_factory=list)


def _metapath_embeddings(hin: Hin, metapaths, cfg) -> np.ndarray:
    """(L, n, d) per-metapath individual embeddings, zero rows for
    individuals that never co-occur in a walk pair."""
    n = hin.n_nodes(NodeKind.Individual)
    out = np.zeros((len(metapaths), n, cfg.d))
    for l, mp in enumerate(metapaths):
        corpus = metapath_walks(
            hin, mp, walks_per_node=cfg.walks_per_node, repeats=cfg.repeats,
            seed=cfg.seed + l,
        )
        if not any(len(w) > 1 for w in corpus.walks):
            raise ValueError(f"empty walk corpus for metapath {mp.label()}")
        emb = train_skipgram(
            corpus, d=cfg.d, window=cfg.window, negatives=cfg.negatives,
            epochs=cfg.embed_epochs, seed=cfg.seed + l, hetero=True,
        )
        for i in range(n):
            row = emb.node_index.get(NodeId(NodeKind.Individual, i))
            if row is not None:
                out[l, i] = emb.vectors[row]
    return out


def herec_scores(
    hin: Hin, metapaths: list[Metapath] | None = None, cfg: HerecConfig | None = None
) -> np.ndarray:
    """(n_individuals, 2) scores against the two mental-health nodes."""
    model, scores = fit_herec(hin, metapaths, cfg)
    return scores


def fit_herec(hin, metapaths=None, cfg=None):
    cfg = cfg or HerecConfig()
    cfg.check()
    metapaths = metapaths if metapaths is not None else default_metapaths()
    if not metapaths:
        raise ValueError("at least one metapath required")
    train_edges = hin.edges[EdgeKind.IM]
    if not train_edges:
        raise ValueError("no training target edges")

    E = _metapath_embeddings(hin, metapaths, cfg)  # (L, n, d)
    L, n, d = E.shape
    rows = np.array([e[0] for e in train_edges], dtype=np.int64)
    mh = np.array([e[1] for e in train_edges], dtype=np.int64)
    # observed pairing is the positive, the complement node the negative
    tr_i = np.concatenate([rows, rows])
    tr_m = np.concatenate([mh, 1 - mh])
    tr_y = np.concatenate([np.ones(len(rows)), np.zeros(len(rows))])

    rng = np.random.default_rng(cfg.seed)
    w = np.full((n, L), 1.0 / L)
    Ms = 0.1 * rng.standard_normal((L, d, d))
    bs = 0.1 * rng.standard_normal((L, d))
    B = 0.1 * rng.standard_normal((d, d))
    H = 0.1 * rng.standard_normal((2, d))

    def forward(w, Ms, bs, B, H):
        T = np.einsum("lnd,led->lne", E, Ms) + bs[:, None, :]  # (L, n, d)
        a = np.einsum("nl,lnd->nd", w, T)
        f = _expit(a)
        s = f @ B @ H.T  # (n, 2)
        return T, a, f, _expit(s)

    def objective(params):
        w, Ms, bs, B, H = params
        _, _, _, p = forward(w, Ms, bs, B, H)
        err = ((p[tr_i, tr_m] - tr_y) ** 2).sum()
        reg = cfg.l2 * (
            (w**2).sum() + (Ms**2).sum() + (bs**2).sum()
            + (B**2).sum() + (H**2).sum()
        )
        return float(err + reg)

    def gradient(params):
        w, Ms, bs, B, H = params
        T, a, f, p = forward(w, Ms, bs, B, H)
        gS = np.zeros((n, 2))
        pe = p[tr_i, tr_m]
        np.add.at(gS, (tr_i, tr_m), 2.0 * (pe - tr_y) * pe * (1.0 - pe))
        gH = gS.T @ (f @ B) + 2.0 * cfg.l2 * H
        gB = f.T @ (gS @ H) + 2.0 * cfg.l2 * B
        gF = gS @ (H @ B.T)  # d(loss)/df, via s = f B h
        gA = gF * f * (1.0 - f)  # (n, d)
        gw = np.einsum("nd,lnd->nl", gA, T) + 2.0 * cfg.l2 * w
        gMs = np.einsum("nl,nd,lne->lde", w, gA, E) + 2.0 * cfg.l2 * Ms
        gbs = np.einsum("nl,nd->ld", w, gA) + 2.0 * cfg.l2 * bs
        return [gw, gMs, gbs, gB, gH]

    params = [w, Ms, bs, B, H]
    lr = cfg.learning_rate
    obj = objective(params)
    curve = [obj]
    for _ in range(cfg.epochs):
        grads = gradient(params)
        while True:
            trial = [p - lr * g for p, g in zip(params, grads)]
            new_obj = objective(trial)
            if np.isfinite(new_obj) and new_obj <= obj:
                params, obj = trial, new_obj
                lr *= 1.1
                break
            lr *= 0.5
            if lr < 1e-15:
                break
        if lr < 1e-15:
            break
        curve.append(obj)
    if not np.isfinite(obj):
        raise DivergenceError("objective diverged")

    w, Ms, bs, B, H = params
    _, _, _, p = forward(w, Ms, bs, B, H)
    if not np.isfinite(p).all():
        raise DivergenceError("non-finite scores")
    model = HerecModel(w, list(Ms), list(bs), B, H, curve)
    return model, p
