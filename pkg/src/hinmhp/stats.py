"""Evaluation statistics: stratified folds, confusion metrics, paired tests.

Includes an exact small-sample Wilcoxon signed-rank test, Benjamini-Hochberg
step-up adjustment, and a log-space hypergeometric upper-tail used to test
whether two methods' correct-prediction sets overlap more than chance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class MetricSet:
    precision: float
    recall: float
    f1: float
    accuracy: float
    undefined: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


@dataclass
class OverlapTest:
    universe: int
    a: int
    b: int
    overlap: int
    p_value: float
    significant: bool = field(init=False)

    def __post_init__(self):
        self.significant = self.p_value < 0.05


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Per-individual fold index; positives dealt round-robin, then negatives.

    Fold sizes and per-fold positive counts each differ by at most one.
    """
    y = np.asarray(labels, dtype=bool)
    n = len(y)
    if n < k:
        raise ValueError(f"n={n} < k={k}")
    if y.all() or not y.any():
        raise ValueError("both classes required for stratification")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=int)
    pos = rng.permutation(np.flatnonzero(y))
    neg = rng.permutation(np.flatnonzero(~y))
    folds[pos] = np.arange(len(pos)) % k
    # continue dealing where the positives stopped so totals stay balanced
    folds[neg] = (np.arange(len(neg)) + len(pos)) % k
    return folds


def confusion(pred, truth) -> ConfusionCounts:
    p = np.asarray(pred, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if p.shape != t.shape:
        raise ValueError("pred and truth lengths differ")
    return ConfusionCounts(
        tp=int((p & t).sum()),
        fp=int((p & ~t).sum()),
        tn=int((~p & ~t).sum()),
        fn=int((~p & t).sum()),
    )


def metrics(c: ConfusionCounts) -> MetricSet:
    """Precision/recall/F1/accuracy; zero-denominator cases report 0, flagged."""
    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    precision = ratio(c.tp, c.tp + c.fp, "precision")
    recall = ratio(c.tp, c.tp + c.fn, "recall")
    f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "f1")
    accuracy = ratio(c.tp + c.tn, c.n, "accuracy")
    return MetricSet(precision, recall, f1, accuracy, tuple(undefined))


def relative_gain(a: float, b: float) -> float:
    """(a - b) / b, the relative change of a over baseline b."""
    if b <= 0:
        raise ValueError("baseline must be positive")
    return (a - b) / b


def wilcoxon_signed_rank(x, y, alternative: str = "two-sided") -> tuple[float, float]:
    """Wilcoxon signed-rank test for paired samples.

    Zero differences are dropped; ties get average ranks. Exact p-value by
    enumerating all sign assignments when at most 14 non-zero differences
    remain, otherwise a tie-corrected normal approximation with continuity
    correction. Returns (W, p) with W the positive-rank sum.
    """
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0.0]
    m = len(d)
    if m == 0:
        raise ValueError("all differences are zero")
    absd = np.abs(d)
    order = np.argsort(absd, kind="stable")
    ranks = np.empty(m)
    sorted_abs = absd[order]
    i = 0
    while i < m:
        j = i
        while j + 1 < m and sorted_abs[j + 1] == sorted_abs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    w_pos = float(ranks[d > 0].sum())

    if m <= 14:
        # exact null: every sign pattern equally likely
        totals = np.zeros(1)
        for r in ranks:
            totals = np.concatenate([totals, totals + r])
        ge = float((totals >= w_pos - 1e-12).mean())
        le = float((totals <= w_pos + 1e-12).mean())
        if alternative == "greater":
            p = ge
        elif alternative == "less":
            p = le
        else:
            p = min(1.0, 2 * min(ge, le))
        return w_pos, p

    mean = m * (m + 1) / 4
    _, tie_counts = np.unique(absd, return_counts=True)
    tie_term = (tie_counts**3 - tie_counts).sum() / 48
    var = m * (m + 1) * (2 * m + 1) / 24 - tie_term
    sd = math.sqrt(var)

    def sf(val):  # P(W >= val) with continuity correction
        return 0.5 * math.erfc((val - 0.5 - mean) / (sd * math.sqrt(2)))

    def cdf(val):  # P(W <= val)
        return 0.5 * math.erfc((mean - val - 0.5) / (sd * math.sqrt(2)))

    if alternative == "greater":
        p = sf(w_pos)
    elif alternative == "less":
        p = cdf(w_pos)
    else:
        p = min(1.0, 2 * min(sf(w_pos), cdf(w_pos)))
    return w_pos, p


def bh_fdr(pvals) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in the input order."""
    p = np.asarray(pvals, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0,1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m / rank)
        adjusted[idx] = running
    return adjusted


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def hypergeom_tail(S: int, A: int, B: int, O: int) -> float:
    """P(X >= O) for X hypergeometric (population S, A successes, B draws)."""
    if not (0 <= A <= S and 0 <= B <= S):
        raise ValueError("need 0 <= A,B <= S")
    if not 0 <= O <= min(A, B):
        raise ValueError("need 0 <= O <= min(A,B)")
    if O == 0:
        return 1.0
    lo = max(0, A + B - S)
    hi = min(A, B)
    i = np.arange(lo, hi + 1)
    logpmf = _log_comb(A, i) + _log_comb(S - A, B - i) - _log_comb(S, B)
    pmf = np.exp(logpmf)
    tail = float(pmf[i >= O].sum())
    return min(1.0, max(0.0, tail))


def overlap_analysis(
    correct: dict[str, set], actual_positives: set
) -> dict[tuple[str, str], OverlapTest]:
    """Pairwise overlap significance of correct-positive sets."""
    for name, s in correct.items():
        if not s <= actual_positives:
            raise ValueError(f"{name} correct set not within the positive universe")
    out = {}
    for a, b in itertools.combinations(sorted(correct), 2):
        sa, sb = correct[a], correct[b]
        o = len(sa & sb)
        p = hypergeom_tail(len(actual_positives), len(sa), len(sb), o)
        out[(a, b)] = OverlapTest(len(actual_positives), len(sa), len(sb), o, p)
    return out
