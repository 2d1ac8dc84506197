"""Multi-relational matrix factorization for target-edge prediction.

Three trainers share the protocol: train on a network whose target edges for
test individuals are hidden, then score each individual against the two
mental-health state nodes and predict the higher-scoring state.

* DMF-style: per-node-kind factors joined by per-relation interaction
  matrices, trained by minibatch SGD on observed edges plus sampled
  non-edges (squared error on a logistic score).
* RESCAL: one shared factor matrix with per-relation cores, full-batch
  gradient descent on the Frobenius reconstruction error.
* DEDICOM: shared factors, a single core, per-relation diagonal scalings.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .hin import SIDE_KINDS, EdgeKind, Hin, NodeKind


@dataclass
class TrainConfig:
    d: int = 16
    learning_rate: float = 0.05
    l2: float = 0.01
    epochs: int = 200
    negatives_per_positive: int = 5
    seed: int = 0
    batch: int = 1024
    ii_weight_mode: str = "binary"  # or "log1p": scaled log(1+w) targets

    def check(self) -> None:
        if self.ii_weight_mode not in ("binary", "log1p"):
            raise ValueError("ii_weight_mode must be 'binary' or 'log1p'")
        if self.d < 1:
            raise ValueError("latent dimension must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")


@dataclass
class RelationSpec:
    kind: EdgeKind
    alpha: float = 1.0
    negatives_per_positive: int | None = None  # falls back to the config

    @property
    def row_kind(self) -> NodeKind:
        return self.kind.endpoints[0]

    @property
    def col_kind(self) -> NodeKind:
        return self.kind.endpoints[1]


def default_relations(kinds=SIDE_KINDS) -> list[RelationSpec]:
    """Side relations plus the always-present target relation."""
    return [RelationSpec(k) for k in kinds] + [RelationSpec(EdgeKind.IM)]


class DivergenceError(RuntimeError):
    """Objective became non-finite during training."""


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.clip(z, -35.0, 35.0)))


@dataclass
class DmfModel:
    factors: dict[NodeKind, np.ndarray]
    cores: dict[EdgeKind, np.ndarray]
    objective_curve: list[float] = field(default_factory=list)

    def edge_score(self, kind: EdgeKind, row: int, col: int) -> float:
        ka, kb = kind.endpoints
        u = self.factors[ka][row]
        v = self.factors[kb][col]
        return float(_sigmoid(u @ self.cores[kind] @ v))

    def target_scores(self) -> np.ndarray:
        """(n_individuals, 2) scores against the two mental-health nodes."""
        U = self.factors[NodeKind.Individual]
        M = self.factors[NodeKind.MentalHealth]
        return _sigmoid(U @ self.cores[EdgeKind.IM] @ M.T)

    def to_json(self) -> str:
        return json.dumps(
            {
                "factors": {
                    k.name: [v.shape, v.ravel().tolist()]
                    for k, v in self.factors.items()
                },
                "cores": {
                    k.value: [v.shape, v.ravel().tolist()]
                    for k, v in self.cores.items()
                },
            }
        )


def _relation_data(hin: Hin, spec: RelationSpec, ii_weight_mode: str):
    ka, kb = spec.kind.endpoints
    edges = hin.edges[spec.kind]
    rows = np.array([e[0] for e in edges], dtype=np.int64)
    cols = np.array([e[1] for e in edges], dtype=np.int64)
    targets = np.ones(len(edges))
    if spec.kind is EdgeKind.II and ii_weight_mode == "log1p":
        w = np.log1p(np.array([e[2] for e in edges], dtype=float))
        targets = w / w.max() if len(w) else targets
    return ka, kb, rows, cols, targets


def _sample_negatives(rng, spec, ka_n, kb_n, rows, cols, per_pos, symmetric):
    """Uniform non-edges of the relation, one batch of per_pos per positive.

    For the two-column target relation the complement pair of every observed
    edge is the natural non-edge; elsewhere rejection-sample uniformly.
    """
    observed = set(zip(rows.tolist(), cols.tolist()))
    if kb_n == 2:
        return rows.copy(), 1 - cols
    n_pairs = ka_n * (ka_n - 1) // 2 if symmetric else ka_n * kb_n
    if len(observed) >= n_pairs:
        # saturated relation: no non-edges exist, nothing to sample
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    want = len(rows) * per_pos
    out_r = np.empty(want, dtype=np.int64)
    out_c = np.empty(want, dtype=np.int64)
    got = 0
    while got < want:
        r = rng.integers(ka_n, size=want - got)
        c = rng.integers(kb_n, size=want - got)
        for a, b in zip(r, c):
            key = (min(a, b), max(a, b)) if symmetric else (a, b)
            if symmetric and a == b:
                continue
            if key in observed:
                continue
            out_r[got], out_c[got] = a, b
            got += 1
            if got == want:
                break
    return out_r, out_c


def train_dmf(
    hin: Hin, relations: list[RelationSpec] | None = None, cfg: TrainConfig | None = None
) -> DmfModel:
    """Fit per-kind factors and per-relation cores by minibatch SGD.

    The recorded objective (observed edges plus a fixed seeded negative set,
    plus the L2 term) is evaluated every epoch; an epoch that increases it is
    rolled back and the learning rate halved, so the curve is non-increasing.
    """
    cfg = cfg or TrainConfig()
    cfg.check()
    relations = relations or default_relations()
    if not any(r.kind is EdgeKind.IM and r.alpha > 0 for r in relations):
        raise ValueError("target relation IM must be present with alpha > 0")
    for r in relations:
        if r.alpha < 0:
            raise ValueError("relation alpha must be >= 0")
        if not hin.edges[r.kind]:
            raise ValueError(f"relation {r.kind.value} has no edges")

    rng = np.random.default_rng(cfg.seed)
    factors = {
        k: 0.1 * rng.standard_normal((max(1, hin.n_nodes(k)), cfg.d))
        for k in NodeKind
    }
    cores = {r.kind: 0.1 * rng.standard_normal((cfg.d, cfg.d)) for r in relations}

    data = []
    for spec in relations:
        ka, kb, rows, cols, targets = _relation_data(hin, spec, cfg.ii_weight_mode)
        per_pos = spec.negatives_per_positive or cfg.negatives_per_positive
        ev_r, ev_c = _sample_negatives(
            rng, spec, hin.n_nodes(ka), hin.n_nodes(kb), rows, cols, per_pos,
            symmetric=spec.kind is EdgeKind.II,
        )
        data.append((spec, ka, kb, rows, cols, targets, ev_r, ev_c, per_pos))

    def objective():
        total = 0.0
        for spec, ka, kb, rows, cols, targets, ev_r, ev_c, _ in data:
            s_pos = _sigmoid(
                np.einsum(
                    "ij,jk,ik->i",
                    factors[ka][rows],
                    cores[spec.kind],
                    factors[kb][cols],
                )
            )
            s_neg = _sigmoid(
                np.einsum(
                    "ij,jk,ik->i",
                    factors[ka][ev_r],
                    cores[spec.kind],
                    factors[kb][ev_c],
                )
            )
            total += spec.alpha * (((s_pos - targets) ** 2).sum() + (s_neg**2).sum())
        total += cfg.l2 * (
            sum((f**2).sum() for f in factors.values())
            + sum((c**2).sum() for c in cores.values())
        )
        return float(total)

    lr = cfg.learning_rate
    prev = objective()
    curve = [prev]
    for _ in range(cfg.epochs):
        snapshot = (
            {k: v.copy() for k, v in factors.items()},
            {k: v.copy() for k, v in cores.items()},
        )
        for spec, ka, kb, rows, cols, targets, _, _, per_pos in data:
            ng_r, ng_c = _sample_negatives(
                rng, spec, hin.n_nodes(ka), hin.n_nodes(kb), rows, cols, per_pos,
                symmetric=spec.kind is EdgeKind.II,
            )
            all_r = np.concatenate([rows, ng_r])
            all_c = np.concatenate([cols, ng_c])
            y = np.concatenate([targets, np.zeros(len(ng_r))])
            order = rng.permutation(len(all_r))
            W = cores[spec.kind]
            for s in range(0, len(order), cfg.batch):
                sel = order[s : s + cfg.batch]
                r, c, yy = all_r[sel], all_c[sel], y[sel]
                U, V = factors[ka][r], factors[kb][c]
                z = np.einsum("ij,jk,ik->i", U, W, V)
                p = _sigmoid(z)
                g = spec.alpha * 2.0 * (p - yy) * p * (1.0 - p)
                grad_u = g[:, None] * (V @ W.T) + cfg.l2 * U
                grad_v = g[:, None] * (U @ W) + cfg.l2 * V
                grad_w = U.T @ (g[:, None] * V) + cfg.l2 * W
                np.add.at(factors[ka], r, -lr * grad_u)
                np.add.at(factors[kb], c, -lr * grad_v)
                W -= lr * grad_w
        obj = objective()
        if not np.isfinite(obj):
            raise DivergenceError("objective diverged")
        if obj > prev * (1.0 + 1e-9):
            factors, cores = snapshot
            lr *= 0.5
            curve.append(prev)
        else:
            prev = obj
            curve.append(obj)
    return DmfModel(factors, cores, curve)


def predict_condition(score_positive: float, score_negative: float) -> bool:
    """True iff the positive-state score strictly exceeds the negative one."""
    if not (np.isfinite(score_positive) and np.isfinite(score_negative)):
        raise ValueError("scores must be finite")
    return score_positive > score_negative


# -- RESCAL / DEDICOM -------------------------------------------------------


@dataclass
class RescalModel:
    A: np.ndarray
    cores: list[np.ndarray]
    objective_curve: list[float] = field(default_factory=list)

    def reconstruct(self, k: int) -> np.ndarray:
        return self.A @ self.cores[k] @ self.A.T


@dataclass
class DedicomModel:
    A: np.ndarray
    R: np.ndarray
    scalings: list[np.ndarray]  # diagonal entries per slice
    objective_curve: list[float] = field(default_factory=list)

    def reconstruct(self, k: int) -> np.ndarray:
        D = np.diag(self.scalings[k])
        return self.A @ D @ self.R @ D @ self.A.T


def _as_dense(slices) -> list[np.ndarray]:
    out = []
    n = None
    for X in slices:
        X = X.toarray() if hasattr(X, "toarray") else np.asarray(X, dtype=float)
        if n is None:
            n = X.shape[0]
        if X.shape != (n, n):
            raise ValueError("slices must share a square dimension")
        out.append(X)
    if not out:
        raise ValueError("at least one slice required")
    return out


def _descend(params, objective, gradient, epochs, lr):
    """Full-batch gradient descent with step-halving on objective increase."""
    obj = objective(params)
    curve = [obj]
    for _ in range(epochs):
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
    return params, curve


def train_rescal(slices, cfg: TrainConfig | None = None) -> RescalModel:
    """Minimize sum_k ||X_k - A R_k A^T||_F^2 + l2 * (||A||^2 + sum ||R_k||^2)."""
    cfg = cfg or TrainConfig()
    cfg.check()
    X = _as_dense(slices)
    n = X[0].shape[0]
    K = len(X)
    rng = np.random.default_rng(cfg.seed)
    A0 = 0.1 * rng.standard_normal((n, cfg.d))
    R0 = []
    for _ in range(K):
        M = 0.1 * rng.standard_normal((cfg.d, cfg.d))
        R0.append(0.5 * (M + M.T))  # symmetric start keeps fits symmetric

    def unpack(params):
        return params[0], params[1:]

    def objective(params):
        A, Rs = unpack(params)
        val = cfg.l2 * ((A**2).sum() + sum((R**2).sum() for R in Rs))
        for Xk, Rk in zip(X, Rs):
            E = Xk - A @ Rk @ A.T
            val += (E**2).sum()
        return float(val)

    def gradient(params):
        A, Rs = unpack(params)
        gA = 2.0 * cfg.l2 * A
        gRs = []
        for Xk, Rk in zip(X, Rs):
            E = Xk - A @ Rk @ A.T
            gA += -2.0 * (E @ A @ Rk.T + E.T @ A @ Rk)
            gRs.append(-2.0 * (A.T @ E @ A) + 2.0 * cfg.l2 * Rk)
        return [gA] + gRs

    params, curve = _descend([A0] + R0, objective, gradient, cfg.epochs,
                             cfg.learning_rate)
    A, Rs = unpack(params)
    return RescalModel(A, list(Rs), curve)


def train_dedicom(slices, cfg: TrainConfig | None = None) -> DedicomModel:
    """Minimize sum_k ||X_k - A D_k R D_k A^T||_F^2 with diagonal D_k."""
    cfg = cfg or TrainConfig()
    cfg.check()
    X = _as_dense(slices)
    n = X[0].shape[0]
    K = len(X)
    rng = np.random.default_rng(cfg.seed)
    A0 = 0.1 * rng.standard_normal((n, cfg.d))
    M = 0.1 * rng.standard_normal((cfg.d, cfg.d))
    R0 = 0.5 * (M + M.T)
    D0 = [np.ones(cfg.d) + 0.1 * rng.standard_normal(cfg.d) for _ in range(K)]

    def unpack(params):
        return params[0], params[1], params[2:]

    def objective(params):
        A, R, Ds = unpack(params)
        val = cfg.l2 * ((A**2).sum() + (R**2).sum() + sum((d**2).sum() for d in Ds))
        for Xk, dk in zip(X, Ds):
            Mk = (dk[:, None] * R) * dk[None, :]
            E = Xk - A @ Mk @ A.T
            val += (E**2).sum()
        return float(val)

    def gradient(params):
        A, R, Ds = unpack(params)
        gA = 2.0 * cfg.l2 * A
        gR = 2.0 * cfg.l2 * R
        gDs = []
        for Xk, dk in zip(X, Ds):
            Mk = (dk[:, None] * R) * dk[None, :]
            E = Xk - A @ Mk @ A.T
            gA += -2.0 * (E @ A @ Mk.T + E.T @ A @ Mk)
            inner = A.T @ E @ A  # d x d
            gR += -2.0 * (dk[:, None] * inner * dk[None, :])
            g_d = -2.0 * (
                np.diag(inner @ (dk[:, None] * R).T)
                + np.diag((R * dk[None, :]).T @ inner)
            )
            gDs.append(g_d + 2.0 * cfg.l2 * dk)
        return [gA, gR] + gDs

    params, curve = _descend([A0, R0] + D0, objective, gradient, cfg.epochs,
                             cfg.learning_rate)
    A, R, Ds = unpack(params)
    return DedicomModel(A, R, list(Ds), curve)


# -- edge-kind ablation -----------------------------------------------------

_ACRONYM = {
    EdgeKind.II: "I",
    EdgeKind.IP: "P",
    EdgeKind.IS: "S",
    EdgeKind.IF: "F",
    EdgeKind.IW: "W",
}
_ACRONYM_ORDER = "IPSFW"


def combo_label(kinds) -> str:
    letters = [_ACRONYM[k] for k in kinds]
    return "".join(sorted(letters, key=_ACRONYM_ORDER.index))


def ablation_combos() -> list[frozenset[EdgeKind]]:
    """All 31 non-empty side-kind subsets, by size then acronym order."""
    kinds = list(SIDE_KINDS)
    combos = []
    for size in range(1, 6):
        subsets = [frozenset(c) for c in itertools.combinations(kinds, size)]
        subsets.sort(key=lambda s: [_ACRONYM_ORDER.index(ch) for ch in combo_label(s)])
        combos.extend(subsets)
    return combos


def write_training_log(objective_curve, path) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,objective\n")
        for i, v in enumerate(objective_curve):
            fh.write(f"{i},{v:.10g}\n")
