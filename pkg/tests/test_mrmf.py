import itertools
import json

import numpy as np
import pytest

from hinmhp.hin import EdgeKind, NodeKind
from hinmhp.mrmf import (
    RelationSpec,
    TrainConfig,
    ablation_combos,
    combo_label,
    default_relations,
    predict_condition,
    train_dedicom,
    train_dmf,
    train_rescal,
    write_training_log,
)

from conftest import small_hin


def planted_hin(n_ind=12):
    """Individuals split in two blocks; block decides the MH node."""
    ii = [
        (u, v, 2.0)
        for u, v in itertools.combinations(range(n_ind), 2)
        if (u < n_ind // 2) == (v < n_ind // 2)
    ]
    im = {j: (0 if j < n_ind // 2 else 1) for j in range(n_ind)}
    return small_hin(n_ind=n_ind, ii_edges=ii, im=im)


def test_dmf_rank_one_recovery():
    # every individual attaches to MH node 0: a rank-1 all-ones target block
    n = 10
    hin = small_hin(n_ind=n, im={j: 0 for j in range(n)})
    cfg = TrainConfig(d=4, epochs=400, learning_rate=0.2, l2=1e-4, seed=0)
    model = train_dmf(hin, [RelationSpec(EdgeKind.IM)], cfg)
    probs = np.asarray(
        [[model.edge_score(EdgeKind.IM, i, c) for c in (0, 1)] for i in range(n)]
    )
    target = np.column_stack([np.ones(n), np.zeros(n)])
    rmse = float(np.sqrt(np.mean((probs - target) ** 2)))
    assert rmse < 1e-2


def test_dmf_deterministic():
    hin = planted_hin()
    cfg = TrainConfig(d=4, epochs=30, seed=5)
    a = train_dmf(hin, cfg=cfg)
    b = train_dmf(hin, cfg=cfg)
    assert a.to_json() == b.to_json()
    assert np.array_equal(a.target_scores(), b.target_scores())


def test_dmf_objective_non_increasing():
    hin = planted_hin()
    model = train_dmf(hin, cfg=TrainConfig(d=4, epochs=50, seed=1))
    curve = np.asarray(model.objective_curve)
    assert np.all(np.diff(curve) <= 1e-12)


def test_dmf_separates_planted_blocks():
    hin = planted_hin(n_ind=16)
    model = train_dmf(hin, cfg=TrainConfig(d=8, epochs=300, seed=2,
                                           learning_rate=0.2))
    scores = model.target_scores()
    pred = scores[:, 0] > scores[:, 1]
    assert np.array_equal(pred, np.arange(16) < 8)


def test_dmf_config_validation():
    hin = planted_hin()
    with pytest.raises(ValueError):
        train_dmf(hin, cfg=TrainConfig(d=0))
    with pytest.raises(ValueError):
        train_dmf(hin, cfg=TrainConfig(ii_weight_mode="sqrt"))
    with pytest.raises(ValueError):
        train_dmf(hin, [RelationSpec(EdgeKind.II)])  # no target relation
    with pytest.raises(ValueError):
        train_dmf(hin, [RelationSpec(EdgeKind.IM, alpha=0.0)])
    bare = small_hin(n_ind=3, im={0: 0, 1: 1, 2: 0})  # no II edges
    with pytest.raises(ValueError):
        train_dmf(bare, default_relations())


def test_dmf_permutation_invariant_scores():
    # scores depend on factors only through row lookups: permuting individual
    # factor rows permutes target scores identically
    hin = planted_hin()
    model = train_dmf(hin, cfg=TrainConfig(d=4, epochs=20, seed=3))
    scores = model.target_scores()
    perm = np.random.default_rng(0).permutation(len(scores))
    model.factors[NodeKind.Individual] = model.factors[NodeKind.Individual][perm]
    assert np.allclose(model.target_scores(), scores[perm])


def test_dmf_log1p_weight_mode_runs():
    hin = planted_hin()
    model = train_dmf(hin, cfg=TrainConfig(d=4, epochs=20, seed=4,
                                           ii_weight_mode="log1p"))
    assert np.isfinite(model.target_scores()).all()


def test_dmf_json_round_trip_fields():
    hin = planted_hin()
    model = train_dmf(hin, cfg=TrainConfig(d=3, epochs=5, seed=6))
    blob = json.loads(model.to_json())
    shape, flat = blob["factors"]["Individual"]
    assert shape == list(model.factors[NodeKind.Individual].shape)
    assert flat == model.factors[NodeKind.Individual].ravel().tolist()
    assert set(blob["cores"]) == {r.kind.value for r in default_relations()}


def planted_slices(n=20, d=3, K=2, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    X = []
    for _ in range(K):
        M = rng.standard_normal((d, d))
        R = 0.5 * (M + M.T)
        X.append(A @ R @ A.T)
    return X


def test_rescal_planted_recovery():
    X = planted_slices(seed=1)
    cfg = TrainConfig(d=3, epochs=800, learning_rate=1e-4, l2=0.0, seed=1)
    model = train_rescal(X, cfg)
    rel = sum(
        np.linalg.norm(X[k] - model.reconstruct(k)) / np.linalg.norm(X[k])
        for k in range(len(X))
    ) / len(X)
    assert rel < 0.05


def test_rescal_reconstruction_symmetric():
    X = planted_slices(seed=2)
    model = train_rescal(X, TrainConfig(d=3, epochs=100, learning_rate=1e-4,
                                        l2=0.0, seed=2))
    for k in range(len(X)):
        rec = model.reconstruct(k)
        assert np.abs(rec - rec.T).max() < 1e-8


def test_rescal_zero_slices_near_zero():
    X = [np.zeros((8, 8)) for _ in range(2)]
    model = train_rescal(X, TrainConfig(d=2, epochs=300, learning_rate=1e-3,
                                        l2=0.0, seed=3))
    assert np.abs(model.reconstruct(0)).max() < 0.05


def test_rescal_full_rank_exact():
    X = planted_slices(n=6, d=6, K=1, seed=4)
    cfg = TrainConfig(d=6, epochs=4000, learning_rate=1e-4, l2=0.0, seed=4)
    model = train_rescal(X, cfg)
    init = np.linalg.norm(X[0])
    assert np.linalg.norm(X[0] - model.reconstruct(0)) < 1e-2 * init


def test_dedicom_planted_recovery():
    rng = np.random.default_rng(5)
    n, d, K = 20, 3, 2
    A = rng.standard_normal((n, d))
    M = rng.standard_normal((d, d))
    R = 0.5 * (M + M.T)
    Ds = [np.diag(rng.uniform(0.5, 1.5, d)) for _ in range(K)]
    X = [A @ D @ R @ D @ A.T for D in Ds]
    cfg = TrainConfig(d=3, epochs=2000, learning_rate=1e-4, l2=0.0, seed=5)
    model = train_dedicom(X, cfg)
    rel = sum(
        np.linalg.norm(X[k] - model.reconstruct(k)) / np.linalg.norm(X[k])
        for k in range(K)
    ) / K
    assert rel < 0.05


def test_dedicom_zero_slices():
    X = [np.zeros((6, 6))]
    model = train_dedicom(X, TrainConfig(d=2, epochs=300, learning_rate=1e-3,
                                         l2=0.0, seed=6))
    assert np.abs(model.reconstruct(0)).max() < 0.05


def test_dedicom_objective_non_increasing():
    X = planted_slices(seed=7)
    model = train_dedicom(X, TrainConfig(d=3, epochs=200, learning_rate=1e-4,
                                         l2=0.0, seed=7))
    curve = np.asarray(model.objective_curve)
    assert np.all(np.diff(curve) <= 1e-9)


def test_predict_condition_rules():
    assert predict_condition(0.7, 0.4) is True
    assert predict_condition(0.4, 0.7) is False
    assert predict_condition(0.5, 0.5) is False  # ties go negative
    with pytest.raises(ValueError):
        predict_condition(float("nan"), 0.5)


def test_predict_condition_monotone_transform_invariant():
    rng = np.random.default_rng(8)
    for _ in range(50):
        a, b = rng.random(2)
        assert predict_condition(a, b) == predict_condition(2 * a + 1, 2 * b + 1)


def test_ablation_combos_structure():
    combos = ablation_combos()
    assert len(combos) == 31
    labels = [combo_label(c) for c in combos]
    assert len(set(labels)) == 31
    assert labels[:5] == ["I", "P", "S", "F", "W"]  # singletons first, canonical order
    assert labels[-1] == "IPSFW"
    assert "FW" in labels
    sizes = [len(c) for c in combos]
    assert sizes == sorted(sizes)
    assert all(EdgeKind.IM not in c for c in combos)


def test_combo_label_order():
    assert combo_label({EdgeKind.IW, EdgeKind.IF}) == "FW"
    assert combo_label({EdgeKind.II, EdgeKind.IW}) == "IW"


def test_write_training_log(tmp_path):
    path = tmp_path / "log.csv"
    write_training_log([3.0, 2.5, 2.0], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,objective"
    assert lines[1] == "0,3"
    assert lines[2] == "1,2.5"
    assert len(lines) == 4
