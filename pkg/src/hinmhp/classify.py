"""Regularized logistic regression and the baseline predictors.

The classifier is trained by gradient descent with backtracking line search
on the mean negative log-likelihood plus an L2 penalty (bias unregularized).
Predicted labels come from a proportional cutoff: exactly the top
round(rate * n) probabilities are labeled positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ingest import (
    CohortTable,
    PERSONALITY_FIELDS,
    PHYSICAL_FIELDS,
    SOCIAL_CARDINALITIES,
    SOCIAL_FIELDS,
    WELLBEING_FIELDS,
    BinLevel,
    bin_scores,
)


@dataclass
class FeatureMatrix:
    names: list[str]
    values: np.ndarray  # n rows x p named columns

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ValueError("feature matrix shape does not match names")
        if not np.isfinite(self.values).all():
            raise ValueError("non-finite feature value")


@dataclass
class LogregModel:
    weights: np.ndarray
    bias: float
    l2: float
    iterations: int
    objective: float

    def to_json(self, names: list[str] | None = None) -> str:
        return json.dumps(
            {
                "feature_names": names or [f"x{i}" for i in range(len(self.weights))],
                "weights": [float(w) for w in self.weights],
                "bias": self.bias,
                "l2": self.l2,
            },
            indent=1,
        )


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logreg_objective(X, y, w, b, l2):
    """Mean NLL + (l2/2)||w||^2, with a numerically safe log-sigmoid."""
    z = X @ w + b
    # log(1+exp(-|z|)) is stable; y in {0,1}
    nll = np.logaddexp(0.0, -z) * y + np.logaddexp(0.0, z) * (1 - y)
    return float(nll.mean() + 0.5 * l2 * (w @ w))


def logreg_gradient(X, y, w, b, l2):
    p = _sigmoid(X @ w + b)
    err = p - y
    gw = X.T @ err / len(y) + l2 * w
    gb = float(err.mean())
    return gw, gb


def fit_logreg(
    X: FeatureMatrix | np.ndarray,
    y,
    l2: float = 0.01,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> LogregModel:
    A = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    if not np.isfinite(A).all():
        raise ValueError("non-finite feature value")
    y = np.asarray(y, dtype=float)
    if y.min() == y.max():
        raise ValueError("training labels contain a single class")
    w = np.zeros(A.shape[1])
    b = 0.0
    obj = logreg_objective(A, y, w, b, l2)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        gw, gb = logreg_gradient(A, y, w, b, l2)
        if max(np.abs(gw).max(initial=0.0), abs(gb)) < tol:
            break
        # backtracking: shrink until the objective decreases
        while step > 1e-12:
            w_new = w - step * gw
            b_new = b - step * gb
            new_obj = logreg_objective(A, y, w_new, b_new, l2)
            if new_obj <= obj:
                break
            step *= 0.5
        else:
            break
        w, b, obj = w_new, b_new, new_obj
        step = min(step * 2.0, 1e6)
    return LogregModel(w, b, l2, it, obj)


def predict_proba(model: LogregModel, X: FeatureMatrix | np.ndarray) -> np.ndarray:
    A = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    if A.shape[1] != len(model.weights):
        raise ValueError("feature count does not match model")
    return _sigmoid(A @ model.weights + model.bias)


def calibrate_cutoff(probs, target_rate: float) -> np.ndarray:
    """Label exactly round(rate*n) rows positive: the largest probabilities.

    Ties break toward the lower row index (stable sort on descending prob).
    """
    if not 0.0 < target_rate < 1.0:
        raise ValueError(f"target_rate={target_rate} outside (0,1)")
    p = np.asarray(probs, dtype=float)
    n = len(p)
    k = int(math.floor(target_rate * n + 0.5))
    order = np.argsort(-p, kind="stable")
    out = np.zeros(n, dtype=bool)
    out[order[:k]] = True
    return out


def random_guess(target_rate: float, n: int, seed: int = 0) -> np.ndarray:
    """Uniformly random subset of exactly round(rate*n) predicted positives."""
    if not 0.0 < target_rate < 1.0:
        raise ValueError(f"target_rate={target_rate} outside (0,1)")
    rng = np.random.default_rng(seed)
    k = int(math.floor(target_rate * n + 0.5))
    out = np.zeros(n, dtype=bool)
    out[rng.choice(n, size=k, replace=False)] = True
    return out


# -- non-network baseline features -----------------------------------------

#: Numeric variables the baseline bins to L/M/H; the mental-health scores
#: themselves are excluded by default (they define the labels).
BINNED_BASELINE_FIELDS = (
    PERSONALITY_FIELDS + PHYSICAL_FIELDS + WELLBEING_FIELDS
)
_LEVELS = (BinLevel.Low, BinLevel.Medium, BinLevel.High)


def nonnetwork_features(
    cohort: CohortTable, include_condition_scores: bool = False
) -> FeatureMatrix:
    """One-hot encoding of binned numeric traits plus categorical status.

    Every numeric variable (13 survey traits + steps/sleep already included in
    the physical fields + SMS totals) is quantile-binned over the cohort and
    expanded to 3 columns; the 4 social-status variables are one-hot by
    category. ``include_condition_scores`` additionally bins the raw
    depression/anxiety scores, replicating the source protocol literally at
    the cost of label leakage.
    """
    n = len(cohort)
    names: list[str] = []
    cols: list[np.ndarray] = []

    binned_fields = list(BINNED_BASELINE_FIELDS)
    if include_condition_scores:
        binned_fields += ["cesd", "stai"]

    for fname in binned_fields:
        levels = bin_scores(cohort.numeric[fname])
        for lvl in _LEVELS:
            names.append(f"{fname}_{lvl.value}")
            cols.append(np.array([1.0 if v is lvl else 0.0 for v in levels]))
    levels = bin_scores([float(v) for v in cohort.sms_total])
    for lvl in _LEVELS:
        names.append(f"sms_total_{lvl.value}")
        cols.append(np.array([1.0 if v is lvl else 0.0 for v in levels]))

    for fname, card in zip(SOCIAL_FIELDS, SOCIAL_CARDINALITIES):
        codes = cohort.categorical[fname]
        for c in range(card):
            names.append(f"{fname}_{c}")
            cols.append(np.array([1.0 if v == c else 0.0 for v in codes]))

    return FeatureMatrix(names, np.column_stack(cols).reshape(n, len(names)))
