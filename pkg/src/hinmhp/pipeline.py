"""Evaluation pipeline: cross-validated method comparison, ablation, overlap.

Two protocols share the stratified folds:

* recommender (RS) methods mask the target edges of the held-out fold,
  retrain on the masked network, score every individual against both
  mental-health nodes and predict the higher-scoring one;
* node-classification (NC) methods compute per-individual features on the
  target-free network, fit logistic regression on the training fold
  (features standardized with training-fold statistics) and label the
  held-out fold by the proportional cutoff at the training positive rate.

Predictions are pooled across folds, so each individual is predicted
exactly once per repetition.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import (
    FeatureMatrix,
    calibrate_cutoff,
    fit_logreg,
    nonnetwork_features,
    predict_proba,
    random_guess,
)
from .graphlets import colored_gdv, gdv, homogeneous_graph
from .herec import HerecConfig, herec_scores
from .hin import SIDE_KINDS, EdgeKind, Hin, NodeId, NodeKind
from .ingest import Condition, CohortTable, build_hin, read_cohort_csv, read_sms_csv
from .mrmf import (
    TrainConfig,
    ablation_combos,
    combo_label,
    default_relations,
    train_dedicom,
    train_dmf,
    train_rescal,
)
from .stats import (
    bh_fdr,
    confusion,
    metrics,
    overlap_analysis,
    stratified_kfold,
    wilcoxon_signed_rank,
)
from .synth import SynthParams, generate
from .walks import metapath_walks, random_walks, train_skipgram, via

METHOD_REGISTRY = (
    "dmf",
    "rescal",
    "dedicom",
    "herec",
    "gdv",
    "colored_gdv",
    "deepwalk",
    "metapath2vecpp",
    "nonnetwork",
    "random",
)
RS_METHODS = ("dmf", "rescal", "dedicom", "herec")
METRIC_NAMES = ("precision", "recall", "f1", "accuracy")


@dataclass
class RunConfig:
    condition: str = "depression"
    methods: tuple = ("dmf", "random")
    k: int = 5
    repetitions: int = 1
    seed: int = 0
    jobs: int = 1
    cohort_path: str | None = None
    sms_path: str | None = None
    synth: SynthParams | None = None
    method_params: dict = field(default_factory=dict)
    pairing: str = "per-fold"  # or "per-individual"
    include_condition_scores: bool = False

    def check(self) -> None:
        if self.condition not in ("depression", "anxiety"):
            raise ValueError(f"unknown condition {self.condition!r}")
        for m in self.methods:
            if m not in METHOD_REGISTRY:
                raise ValueError(f"unknown method {m!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.pairing not in ("per-fold", "per-individual"):
            raise ValueError(f"unknown pairing {self.pairing!r}")
        if (self.cohort_path is None) != (self.sms_path is None):
            raise ValueError("cohort_path and sms_path must be given together")
        for p in (self.cohort_path, self.sms_path):
            if p is not None and not os.path.exists(p):
                raise ValueError(f"path does not exist: {p}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        if self.synth is not None:
            d["synth"] = json.loads(self.synth.to_json())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if d.get("synth") is not None:
            d["synth"] = SynthParams.from_dict(d["synth"])
        if "methods" in d:
            d["methods"] = tuple(d["methods"])
        return cls(**d)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def load_data(cfg: RunConfig):
    if cfg.cohort_path is not None:
        return read_cohort_csv(cfg.cohort_path), read_sms_csv(cfg.sms_path)
    return generate(cfg.synth or SynthParams(seed=cfg.seed))


# -- per-method prediction -------------------------------------------------


def _rs_target_scores(method: str, masked: Hin, params: dict, seed: int) -> np.ndarray:
    """(n_individuals, 2) scores from one recommender method."""
    if method == "dmf":
        # ablation removes kinds wholesale, so only keep populated relations
        present = [k for k in SIDE_KINDS if masked.edges[k]]
        model = train_dmf(
            masked, default_relations(present), TrainConfig(seed=seed, **params)
        )
        return model.target_scores()
    if method == "herec":
        return herec_scores(masked, cfg=HerecConfig(seed=seed, **params))
    slices = []
    for ek in EdgeKind:
        X = masked.slice_matrix(ek).toarray()
        slices.append((X > 0).astype(float))  # binarized weights
    target_slice = list(EdgeKind).index(EdgeKind.IM)
    trainer = train_rescal if method == "rescal" else train_dedicom
    model = trainer(slices, TrainConfig(seed=seed, **params))
    R = model.reconstruct(target_slice)
    off_i = masked.node_offset(NodeKind.Individual)
    off_m = masked.node_offset(NodeKind.MentalHealth)
    n = masked.n_nodes(NodeKind.Individual)
    return R[off_i : off_i + n, off_m : off_m + 2]


def _nc_features(method: str, hin: Hin, params: dict, seed: int) -> np.ndarray:
    """Per-individual features from the target-free network."""
    n = hin.n_nodes(NodeKind.Individual)
    # heavy-tailed counts: log-transform before standardization
    if method == "gdv":
        return np.log1p(gdv(homogeneous_graph(hin, include_target=False))[:n])
    if method == "colored_gdv":
        return np.log1p(colored_gdv(hin))
    if method == "deepwalk":
        corpus = random_walks(
            hin,
            walks_per_node=params.get("walks_per_node", 10),
            length=params.get("length", 80),
            seed=seed,
        )
        emb = train_skipgram(
            corpus,
            d=params.get("d", 64),
            window=params.get("window", 5),
            negatives=params.get("negatives", 5),
            epochs=params.get("epochs", 5),
            seed=seed,
        )
    elif method == "metapath2vecpp":
        walks = []
        kinds = [ek.endpoints[1] for ek in SIDE_KINDS if ek is not EdgeKind.II]
        for j, kind in enumerate(kinds):
            c = metapath_walks(
                hin,
                via(kind),
                walks_per_node=params.get("walks_per_node", 10),
                repeats=params.get("repeats", 20),
                seed=seed + j,
            )
            walks.extend(c.walks)
        ii_only = hin.restrict_edge_kinds([EdgeKind.II])
        c = random_walks(
            ii_only,
            walks_per_node=params.get("walks_per_node", 10),
            length=params.get("length", 80),
            seed=seed + len(kinds),
        )
        walks.extend(w for w in c.walks if w[0].kind is NodeKind.Individual)
        from .walks import WalkCorpus

        corpus = WalkCorpus(walks, params.get("walks_per_node", 10), 0, seed)
        emb = train_skipgram(
            corpus,
            d=params.get("d", 64),
            window=params.get("window", 5),
            negatives=params.get("negatives", 5),
            epochs=params.get("epochs", 5),
            seed=seed,
            hetero=True,
        )
    else:
        raise ValueError(f"unknown NC method {method!r}")
    out = np.zeros((n, emb.dim))
    for i in range(n):
        row = emb.node_index.get(NodeId(NodeKind.Individual, i))
        if row is not None:
            out[i] = emb.vectors[row]
    return out


def _standardize(train: np.ndarray, test: np.ndarray):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)  # constant columns pass through as 0
    return (train - mu) / sd, (test - mu) / sd


def _nc_fold_predict(X, y, train_idx, test_idx, params, seed):
    Xtr, Xte = _standardize(X[train_idx], X[test_idx])
    model = fit_logreg(
        Xtr,
        y[train_idx],
        l2=params.get("l2", 0.01),
        max_iter=params.get("max_iter", 500),
        tol=params.get("tol", 1e-6),
    )
    probs = predict_proba(model, Xte)
    rate = float(y[train_idx].mean())
    return calibrate_cutoff(probs, rate)


def predict_method(method, hin, cohort, y, folds, rep_seed, params, cfg):
    """Pooled boolean predictions over all individuals for one repetition."""
    n = len(y)
    pred = np.zeros(n, dtype=bool)
    k = folds.max() + 1
    if method in RS_METHODS:
        for f in range(k):
            test = np.flatnonzero(folds == f)
            masked = hin.mask_target_edges(
                [NodeId(NodeKind.Individual, int(i)) for i in test]
            )
            scores = _rs_target_scores(method, masked, params, rep_seed * 1000 + f)
            # mental-health node 0 is the positive state
            pred[test] = scores[test, 0] > scores[test, 1]
        return pred
    if method == "random":
        for f in range(k):
            test = np.flatnonzero(folds == f)
            rate = float(y[folds != f].mean())
            pred[test] = random_guess(rate, len(test), seed=rep_seed * 1000 + f)
        return pred
    if method == "nonnetwork":
        X = nonnetwork_features(
            cohort, include_condition_scores=cfg.include_condition_scores
        ).values
    else:
        X = _nc_features(method, hin, params, rep_seed)
    for f in range(k):
        test = np.flatnonzero(folds == f)
        train = np.flatnonzero(folds != f)
        pred[test] = _nc_fold_predict(X, y, train, test, params, rep_seed)
    return pred


# -- report assembly -------------------------------------------------------


@dataclass
class EvalReport:
    condition: str
    config_hash: str
    labels: list[bool]
    fold_metrics: dict  # method -> list of {repetition, fold, <metrics>}
    summary: dict  # method -> {metric: {mean, std}}
    pairwise: list  # {a, b, metric, p_raw, p_adj}
    pooled_predictions: dict  # method -> list[bool] (first repetition)
    correct_positives: dict  # method -> sorted list of indices

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


def _fold_rows(pred, y, folds, rep):
    rows = []
    for f in range(folds.max() + 1):
        sel = folds == f
        m = metrics(confusion(pred[sel], y[sel]))
        row = {"repetition": rep, "fold": int(f)}
        row.update(m.as_dict())
        row["undefined"] = list(m.undefined)
        rows.append(row)
    return rows


def _pairwise_tests(cfg, fold_metrics, correctness, y):
    out = []
    methods = list(fold_metrics)
    for metric in METRIC_NAMES:
        batch = []
        for i, a in enumerate(methods):
            for b in methods[i + 1 :]:
                if cfg.pairing == "per-individual" and metric == "accuracy":
                    x1 = correctness[a].astype(float)
                    x2 = correctness[b].astype(float)
                else:
                    x1 = np.array([r[metric] for r in fold_metrics[a]])
                    x2 = np.array([r[metric] for r in fold_metrics[b]])
                try:
                    _, p = wilcoxon_signed_rank(x1, x2, alternative="two-sided")
                except ValueError:  # all differences zero: no evidence
                    p = 1.0
                batch.append({"a": a, "b": b, "metric": metric, "p_raw": p})
        if batch:
            adj = bh_fdr([r["p_raw"] for r in batch])
            for r, pa in zip(batch, adj):
                r["p_adj"] = float(pa)
            out.extend(batch)
    return out


def _method_task(args):
    method, hin, cohort, y, fold_sets, cfg = args
    params = dict(cfg.method_params.get(method, {}))
    rows, pooled = [], None
    for rep, folds in enumerate(fold_sets):
        pred = predict_method(
            method, hin, cohort, y, folds, cfg.seed + rep, params, cfg
        )
        rows.extend(_fold_rows(pred, y, folds, rep))
        if rep == 0:
            pooled = pred
    return method, rows, pooled


def run_evaluation(cohort: CohortTable, sms, cfg: RunConfig) -> EvalReport:
    cfg.check()
    condition = Condition(cfg.condition)
    hin = build_hin(cohort, sms, condition)
    y = np.array(
        [e[1] == 0 for e in sorted(hin.edges[EdgeKind.IM])], dtype=bool
    )
    fold_sets = [
        stratified_kfold(y, cfg.k, seed=cfg.seed + rep)
        for rep in range(cfg.repetitions)
    ]

    tasks = [(m, hin, cohort, y, fold_sets, cfg) for m in cfg.methods]
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.jobs) as ex:
            results = list(ex.map(_method_task, tasks))
    else:
        results = [_method_task(t) for t in tasks]
    results.sort(key=lambda r: cfg.methods.index(r[0]))

    fold_metrics = {m: rows for m, rows, _ in results}
    pooled = {m: p for m, _, p in results}
    summary = {}
    for m, rows in fold_metrics.items():
        summary[m] = {
            metric: {
                "mean": float(np.mean([r[metric] for r in rows])),
                "std": float(np.std([r[metric] for r in rows])),
            }
            for metric in METRIC_NAMES
        }
    correctness = {m: pooled[m] == y for m in pooled}
    pairwise = _pairwise_tests(cfg, fold_metrics, correctness, y)
    correct_pos = {
        m: sorted(int(i) for i in np.flatnonzero(pooled[m] & y)) for m in pooled
    }
    return EvalReport(
        condition=cfg.condition,
        config_hash=cfg.config_hash(),
        labels=[bool(v) for v in y],
        fold_metrics=fold_metrics,
        summary=summary,
        pairwise=pairwise,
        pooled_predictions={m: [bool(v) for v in p] for m, p in pooled.items()},
        correct_positives=correct_pos,
    )


# -- ablation ---------------------------------------------------------------


def _ablation_task(args):
    combo, hin, cohort, y, fold_sets, cfg = args
    params = dict(cfg.method_params.get("dmf", {}))
    restricted = hin.restrict_edge_kinds(combo)
    rows = []
    for rep, folds in enumerate(fold_sets):
        pred = predict_method(
            "dmf", restricted, cohort, y, folds, cfg.seed + rep, params, cfg
        )
        rows.extend(_fold_rows(pred, y, folds, rep))
    entry = {"combination": combo_label(combo)}
    for metric in METRIC_NAMES:
        entry[metric] = float(np.mean([r[metric] for r in rows]))
        entry[metric + "_std"] = float(np.std([r[metric] for r in rows]))
    return entry


def run_ablation(cohort: CohortTable, sms, cfg: RunConfig) -> list[dict]:
    """31-row DMF ablation table, sorted by mean precision descending."""
    cfg.check()
    condition = Condition(cfg.condition)
    hin = build_hin(cohort, sms, condition)
    y = np.array([e[1] == 0 for e in sorted(hin.edges[EdgeKind.IM])], dtype=bool)
    fold_sets = [
        stratified_kfold(y, cfg.k, seed=cfg.seed + rep)
        for rep in range(cfg.repetitions)
    ]
    combos = ablation_combos()
    tasks = [(c, hin, cohort, y, fold_sets, cfg) for c in combos]
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.jobs) as ex:
            rows = list(ex.map(_ablation_task, tasks))
    else:
        rows = [_ablation_task(t) for t in tasks]
    order = {combo_label(c): i for i, c in enumerate(combos)}
    rows.sort(key=lambda r: (-r["precision"], order[r["combination"]]))
    return rows


# -- overlap ----------------------------------------------------------------


def run_overlap(cohort: CohortTable, sms, cfg: RunConfig) -> dict:
    """Pairwise overlap significance plus 3-way Venn region counts."""
    if len(cfg.methods) < 2:
        raise ValueError("overlap analysis needs at least 2 methods")
    report = run_evaluation(cohort, sms, cfg)
    actual = {i for i, v in enumerate(report.labels) if v}
    sets = {m: set(v) for m, v in report.correct_positives.items()}
    pairs = overlap_analysis(sets, actual)
    out = {
        "universe": len(actual),
        "set_sizes": {m: len(s) for m, s in sets.items()},
        "pairs": [
            {
                "a": a,
                "b": b,
                "overlap": t.overlap,
                "p_value": t.p_value,
                "significant": t.significant,
            }
            for (a, b), t in sorted(pairs.items())
        ],
    }
    if len(cfg.methods) == 3:
        A, B, C = (sets[m] for m in cfg.methods)
        out["venn"] = {
            "abc": len(A & B & C),
            "ab": len((A & B) - C),
            "ac": len((A & C) - B),
            "bc": len((B & C) - A),
            "a": len(A - B - C),
            "b": len(B - A - C),
            "c": len(C - A - B),
        }
    out["report"] = report
    return out


# -- persistence ------------------------------------------------------------


def write_report(report: EvalReport, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
    header = f"# config {report.config_hash}\n"
    with open(os.path.join(out_dir, "metrics.csv"), "w") as fh:
        fh.write(header)
        fh.write("method,repetition,fold,metric,value\n")
        for m, rows in report.fold_metrics.items():
            for r in rows:
                for metric in METRIC_NAMES:
                    fh.write(
                        f"{m},{r['repetition']},{r['fold']},{metric},"
                        f"{r[metric]:.10g}\n"
                    )
    with open(os.path.join(out_dir, "pvalues.csv"), "w") as fh:
        fh.write(header)
        fh.write("method_a,method_b,metric,p_raw,p_adj\n")
        for r in report.pairwise:
            fh.write(
                f"{r['a']},{r['b']},{r['metric']},{r['p_raw']:.10g},"
                f"{r['p_adj']:.10g}\n"
            )


def write_ablation(rows: list[dict], config_hash: str, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "ablation.csv"), "w") as fh:
        fh.write(f"# config {config_hash}\n")
        fh.write("combination,precision,recall,f1,accuracy\n")
        for r in rows:
            fh.write(
                f"{r['combination']},{r['precision']:.10g},{r['recall']:.10g},"
                f"{r['f1']:.10g},{r['accuracy']:.10g}\n"
            )


def write_overlap(result: dict, config_hash: str, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "overlap.csv"), "w") as fh:
        fh.write(f"# config {config_hash}\n")
        fh.write("method_a,method_b,universe,size_a,size_b,overlap,p_value,significant\n")
        for r in result["pairs"]:
            fh.write(
                f"{r['a']},{r['b']},{result['universe']},"
                f"{result['set_sizes'][r['a']]},{result['set_sizes'][r['b']]},"
                f"{r['overlap']},{r['p_value']:.10g},{r['significant']}\n"
            )
    if "venn" in result:
        with open(os.path.join(out_dir, "venn.csv"), "w") as fh:
            fh.write(f"# config {config_hash}\n")
            fh.write("region,count\n")
            for region, count in sorted(result["venn"].items()):
                fh.write(f"{region},{count}\n")


def render_barchart(report: EvalReport, metric: str, path: str) -> None:
    """Bar chart of metric mean ± std per method, random baseline in red."""
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    methods = list(report.summary)
    means = [report.summary[m][metric]["mean"] for m in methods]
    stds = [report.summary[m][metric]["std"] for m in methods]
    fig, ax = plt.subplots(figsize=(1.2 * len(methods) + 2, 4))
    ax.bar(methods, means, yerr=stds, capsize=4, color="steelblue")
    base_rate = float(np.mean(report.labels))
    ax.axhline(base_rate, color="red", linewidth=1.5, label="random baseline")
    ax.set_ylabel(metric)
    ax.set_title(f"{report.condition}: {metric}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
