"""End-to-end acceptance gate.

Each test checks one release criterion at a fixed tolerance and prints a
single PASS/FAIL line so the suite output doubles as a checklist. The
directional replication tests (6 and 7) run on planted-signal synthetic
cohorts sized like the reference population (n=274, base rates 67/274 and
106/274).
"""

import itertools
import math
import time

import numpy as np
import pytest

from hinmhp.classify import (
    calibrate_cutoff,
    fit_logreg,
    logreg_gradient,
    logreg_objective,
    random_guess,
)
from hinmhp.graphlets import (
    adjacency_from_edges,
    colored_feature_names,
    colored_gdv,
    gdv,
    gdv_oracle,
    homogeneous_graph,
)
from hinmhp.hin import EdgeKind, NodeKind
from hinmhp.ingest import Condition, build_hin
from hinmhp.mrmf import RelationSpec, TrainConfig, train_dedicom, train_dmf, train_rescal
from hinmhp.pipeline import RunConfig, load_data, run_ablation, run_evaluation
from hinmhp.stats import (
    bh_fdr,
    confusion,
    hypergeom_tail,
    metrics,
    relative_gain,
    stratified_kfold,
    wilcoxon_signed_rank,
)
from hinmhp.synth import SignalLoadings, SynthParams, nethealth_fixture

from conftest import small_hin


def _verdict(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_schema_fidelity():
    t0 = time.time()
    cohort, sms = nethealth_fixture()
    hin = build_hin(cohort, sms, Condition.Depression)
    node_counts = [hin.n_nodes(k) for k in NodeKind]
    edge_counts = [len(hin.edges[k]) for k in EdgeKind]
    elapsed = time.time() - t0
    ok = (
        node_counts == [274, 114, 55, 27, 87, 2]
        and edge_counts == [1354, 274, 274, 274, 274, 274]
        and elapsed < 5.0
    )
    _verdict(1, "schema fidelity", ok,
             f"nodes={node_counts} edges={edge_counts} in {elapsed:.2f}s")


def test_criterion_2_graphlet_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(42)
    mismatches = 0
    for g in range(200):
        n = int(rng.integers(5, 31))
        p = float(rng.choice([0.1, 0.3, 0.5]))
        edges = [
            (u, v)
            for u, v in itertools.combinations(range(n), 2)
            if rng.random() < p
        ]
        adj = adjacency_from_edges(n, edges)
        counts = gdv(adj)
        for v in rng.choice(n, size=min(5, n), replace=False):
            if not np.array_equal(counts[v], gdv_oracle(adj, int(v))):
                mismatches += 1

    marginal_ok = True
    names = colored_feature_names()
    orbit_cols = {
        orbit: [j for j, nm in enumerate(names)
                if nm.startswith(f"orbit_{orbit}::")]
        for orbit in range(4)
    }
    for seed in range(5):
        r2 = np.random.default_rng(seed)
        n_ind = 8
        ii = [
            (u, v, float(r2.integers(1, 9)))
            for u, v in itertools.combinations(range(n_ind), 2)
            if r2.random() < 0.3
        ]
        hin = small_hin(n_ind=n_ind, ii_edges=ii,
                        im={j: int(r2.integers(2)) for j in range(n_ind)})
        colored = colored_gdv(hin)
        plain = gdv(homogeneous_graph(hin), max_size=3)
        off = hin.node_offset(NodeKind.Individual)
        for orbit, cols in orbit_cols.items():
            if not np.array_equal(colored[:, cols].sum(axis=1),
                                  plain[off:off + n_ind, orbit]):
                marginal_ok = False
    elapsed = time.time() - t0
    ok = mismatches == 0 and marginal_ok and elapsed < 120.0
    _verdict(2, "graphlet oracle equivalence", ok,
             f"mismatches={mismatches} marginalization_ok={marginal_ok} "
             f"in {elapsed:.1f}s")


def test_criterion_3_statistics_oracles():
    from math import comb

    t0 = time.time()
    rng = np.random.default_rng(7)
    worst_hg = 0.0
    for _ in range(500):
        S = int(rng.integers(2, 201))
        A = int(rng.integers(1, S + 1))
        B = int(rng.integers(1, S + 1))
        O = int(rng.integers(0, min(A, B) + 1))
        exact = sum(
            comb(A, i) * comb(S - A, B - i)
            for i in range(O, min(A, B) + 1)
        ) / comb(S, B)
        worst_hg = max(worst_hg, abs(hypergeom_tail(S, A, B, O) - exact))

    worst_w = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 13))
        x = rng.integers(-5, 6, size=m).astype(float)
        y = rng.integers(-5, 6, size=m).astype(float)
        d = x - y
        d = d[d != 0]
        if len(d) == 0:
            continue
        absd = np.abs(d)
        order = np.argsort(absd, kind="stable")
        ranks = np.empty(len(d))
        i = 0
        sa = absd[order]
        while i < len(d):
            j = i
            while j < len(d) and sa[j] == sa[i]:
                j += 1
            ranks[order[i:j]] = (i + j + 1) / 2.0
            i = j
        W = ranks[d > 0].sum()
        stats = np.array([
            sum(r for s, r in zip(signs, ranks) if s)
            for signs in itertools.product((0, 1), repeat=len(d))
        ])
        exact_p = float(np.mean(stats >= W))
        _, got_p = wilcoxon_signed_rank(x, y, alternative="greater")
        worst_w = max(worst_w, abs(got_p - exact_p))

    bh_ok = np.allclose(bh_fdr([0.01, 0.02, 0.04]), [0.03, 0.03, 0.04]) \
        and np.allclose(bh_fdr([0.04, 0.01, 0.02]), [0.04, 0.03, 0.03]) \
        and np.allclose(bh_fdr([0.2]), [0.2])
    elapsed = time.time() - t0
    ok = worst_hg < 1e-10 and worst_w < 1e-12 and bh_ok and elapsed < 60.0
    _verdict(3, "statistics oracles", ok,
             f"hypergeom_err={worst_hg:.2e} wilcoxon_err={worst_w:.2e} "
             f"bh_ok={bh_ok} in {elapsed:.1f}s")


def test_criterion_4_optimization_correctness():
    t0 = time.time()
    rng = np.random.default_rng(11)
    worst_rel = 0.0
    eps = 1e-6
    for _ in range(50):
        nr, nc = int(rng.integers(5, 30)), int(rng.integers(1, 8))
        X = rng.normal(size=(nr, nc))
        y = (rng.random(nr) < 0.5).astype(float)
        w = 0.5 * rng.normal(size=nc)
        b = float(rng.normal())
        l2 = float(rng.uniform(0.0, 0.1))
        gw, gb = logreg_gradient(X, y, w, b, l2)
        for j in range(nc):
            wp, wm = w.copy(), w.copy()
            wp[j] += eps
            wm[j] -= eps
            fd = (logreg_objective(X, y, wp, b, l2)
                  - logreg_objective(X, y, wm, b, l2)) / (2 * eps)
            worst_rel = max(worst_rel,
                            abs(fd - gw[j]) / max(1.0, abs(fd)))
        fd_b = (logreg_objective(X, y, w, b + eps, l2)
                - logreg_objective(X, y, w, b - eps, l2)) / (2 * eps)
        worst_rel = max(worst_rel, abs(fd_b - gb) / max(1.0, abs(fd_b)))

    A = rng.standard_normal((20, 3))
    X_sl = []
    for _ in range(2):
        M = rng.standard_normal((3, 3))
        X_sl.append(A @ (0.5 * (M + M.T)) @ A.T)
    rescal = train_rescal(
        X_sl, TrainConfig(d=3, epochs=800, learning_rate=1e-4, l2=0.0, seed=1))
    rescal_err = max(
        np.linalg.norm(X_sl[k] - rescal.reconstruct(k)) / np.linalg.norm(X_sl[k])
        for k in range(2)
    )
    Ds = [np.diag(rng.uniform(0.5, 1.5, 3)) for _ in range(2)]
    M = rng.standard_normal((3, 3))
    R = 0.5 * (M + M.T)
    X_dd = [A @ D @ R @ D @ A.T for D in Ds]
    dedicom = train_dedicom(
        X_dd, TrainConfig(d=3, epochs=3000, learning_rate=1e-4, l2=0.0, seed=2))
    dedicom_err = max(
        np.linalg.norm(X_dd[k] - dedicom.reconstruct(k)) / np.linalg.norm(X_dd[k])
        for k in range(2)
    )

    n = 10
    hin = small_hin(n_ind=n, im={j: 0 for j in range(n)})
    model = train_dmf(
        hin, [RelationSpec(EdgeKind.IM)],
        TrainConfig(d=4, epochs=400, learning_rate=0.2, l2=1e-4, seed=0))
    probs = np.asarray(
        [[model.edge_score(EdgeKind.IM, i, c) for c in (0, 1)]
         for i in range(n)]
    )
    rmse = float(np.sqrt(np.mean(
        (probs - np.column_stack([np.ones(n), np.zeros(n)])) ** 2)))
    elapsed = time.time() - t0
    ok = (worst_rel < 1e-4 and rescal_err < 0.05 and dedicom_err < 0.05
          and rmse < 1e-2 and elapsed < 180.0)
    _verdict(4, "optimization correctness", ok,
             f"logreg_fd={worst_rel:.2e} rescal={rescal_err:.3f} "
             f"dedicom={dedicom_err:.3f} dmf_rmse={rmse:.2e} in {elapsed:.1f}s")


def test_criterion_5_random_baseline_calibration():
    n, rate = 274, 0.245
    k = int(math.floor(rate * n + 0.5))
    y = np.zeros(n, dtype=bool)
    y[:k] = True
    precs, recs = [], []
    for seed in range(1000):
        pred = random_guess(rate, n, seed=seed)
        m = metrics(confusion(pred, y))
        precs.append(m.precision)
        recs.append(m.recall)
    mp, mr = float(np.mean(precs)), float(np.mean(recs))
    ok = abs(mp - 0.245) < 0.02 and abs(mr - 0.245) < 0.02
    _verdict(5, "random baseline calibration", ok,
             f"mean_precision={mp:.4f} mean_recall={mr:.4f} target=0.245±0.02")


def test_criterion_6_directional_network_gain():
    t0 = time.time()
    synth = SynthParams(
        n=274, depression_rate=67 / 274, anxiety_rate=106 / 274,
        signal=SignalLoadings(personality=0.5, physical=0.5, wellbeing=0.5,
                              social=0.3, sms=0.95),
        communities=2, intra_p=0.3, inter_p=0.02, seed=0,
    )
    cfg = RunConfig(
        methods=("dmf", "deepwalk", "nonnetwork", "random"),
        synth=synth, seed=0, repetitions=5,
        method_params={
            "dmf": {"d": 16, "epochs": 120},
            "deepwalk": {"d": 32, "epochs": 3, "walks_per_node": 5,
                         "length": 40},
        },
    )
    cohort, sms = load_data(cfg)
    report = run_evaluation(cohort, sms, cfg)
    rec = {m: report.summary[m]["recall"]["mean"] for m in cfg.methods}
    f1 = {m: report.summary[m]["f1"]["mean"] for m in cfg.methods}
    gain_dmf = relative_gain(rec["dmf"], rec["random"])
    gain_dw = relative_gain(rec["deepwalk"], rec["random"])
    elapsed = time.time() - t0
    ok = (gain_dmf >= 0.5 and gain_dw >= 0.5
          and f1["dmf"] >= f1["nonnetwork"] and elapsed < 900.0)
    _verdict(6, "directional network gain", ok,
             f"recall_gain dmf={gain_dmf:.2f} deepwalk={gain_dw:.2f} "
             f"f1 dmf={f1['dmf']:.3f} nonnetwork={f1['nonnetwork']:.3f} "
             f"in {elapsed:.0f}s")


def test_criterion_7_directional_ablation():
    t0 = time.time()
    wins = 0
    details = []
    for seed in range(5):
        synth = SynthParams(
            n=274, depression_rate=67 / 274, anxiety_rate=106 / 274,
            signal=SignalLoadings(personality=0.0, physical=0.9,
                                  wellbeing=0.9, social=0.0, sms=0.0),
            seed=seed,
        )
        cfg = RunConfig(
            methods=("dmf",), synth=synth, seed=seed,
            method_params={"dmf": {"d": 8, "epochs": 100,
                                   "learning_rate": 0.25,
                                   "negatives_per_positive": 2}},
        )
        cohort, sms = load_data(cfg)
        rows = run_ablation(cohort, sms, cfg)
        prec = {r["combination"]: r["precision"] for r in rows}
        win = all(prec["FW"] > prec[s] for s in "IPS")
        wins += win
        details.append(f"s{seed}:FW={prec['FW']:.2f}"
                       f"{'>' if win else '!>'}max(I,P,S)")
    elapsed = time.time() - t0
    ok = wins >= 4 and elapsed < 1800.0
    _verdict(7, "directional ablation", ok,
             f"wins={wins}/5 [{' '.join(details)}] in {elapsed:.0f}s")


def test_criterion_8_protocol_exactness():
    rng = np.random.default_rng(3)
    cutoff_ok = True
    for _ in range(200):
        n = int(rng.integers(3, 300))
        rate = float(rng.uniform(0.02, 0.98))
        pred = calibrate_cutoff(rng.random(n), rate)
        if pred.sum() != int(math.floor(rate * n + 0.5)):
            cutoff_ok = False

    folds_ok = True
    for _ in range(50):
        k = int(rng.integers(2, 7))
        n_pos = int(rng.integers(k, 60))
        n_neg = int(rng.integers(k, 120))
        y = [True] * n_pos + [False] * n_neg
        folds = stratified_kfold(y, k, seed=int(rng.integers(10**6)))
        pos = [int(np.sum(folds[np.array(y)] == f)) for f in range(k)]
        if max(pos) - min(pos) > 1:
            folds_ok = False

    cfg = RunConfig(
        methods=("dmf", "deepwalk", "random"),
        synth=SynthParams(n=60, seed=5), seed=5,
        method_params={
            "dmf": {"d": 4, "epochs": 10},
            "deepwalk": {"d": 8, "epochs": 1, "walks_per_node": 2,
                         "length": 20},
        },
    )
    cohort, sms = load_data(cfg)
    r1 = run_evaluation(cohort, sms, cfg)
    r2 = run_evaluation(cohort, sms, cfg)
    repro_ok = r1.to_json() == r2.to_json()

    ok = cutoff_ok and folds_ok and repro_ok
    _verdict(8, "protocol exactness", ok,
             f"cutoff_exact={cutoff_ok} folds_balanced={folds_ok} "
             f"byte_reproducible={repro_ok}")
