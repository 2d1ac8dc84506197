"""Synthetic cohorts with controllable trait-label signal.

Real study data is access-restricted, so experiments run on generated
cohorts: a shared latent distress score drives labels, trait scores, social
category association, and SMS-graph community structure. ``nethealth_fixture``
builds a cohort whose derived network reproduces the published per-type node
and edge counts exactly.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ingest import (
    CohortTable,
    PERSONALITY_FIELDS,
    PHYSICAL_FIELDS,
    SOCIAL_CARDINALITIES,
    SOCIAL_FIELDS,
    SmsEdgeList,
    WELLBEING_FIELDS,
)

#: Sign of each numeric trait's association with latent distress; chosen per
#: published correlates (e.g. higher distress, lower self-esteem).
TRAIT_SIGNS = {
    "agreeableness": -1.0,
    "conscientiousness": -1.0,
    "extraversion": -1.0,
    "neuroticism": 1.0,
    "openness": -0.5,
    "sleep_quality": -1.0,
    "avg_sleep_minutes": -1.0,
    "avg_steps": -1.0,
    "body_image": -1.0,
    "happiness": -1.0,
    "health": -1.0,
    "loneliness": 1.0,
    "self_esteem": -1.0,
}

DIMENSION_FIELDS = {
    "personality": PERSONALITY_FIELDS,
    "physical": PHYSICAL_FIELDS,
    "wellbeing": WELLBEING_FIELDS,
}


@dataclass
class SignalLoadings:
    personality: float = 0.5
    physical: float = 0.5
    wellbeing: float = 0.5
    social: float = 0.3
    sms: float = 0.5

    def check(self) -> None:
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"loading {f.name}={v} outside [0,1]")


@dataclass
class SynthParams:
    n: int = 274
    depression_rate: float = 0.245
    anxiety_rate: float = 0.387
    signal: SignalLoadings = field(default_factory=SignalLoadings)
    communities: int = 2
    intra_p: float = 0.08
    inter_p: float = 0.01
    mean_sms: float = 30.0
    seed: int = 0

    def check(self) -> None:
        if self.n < 10:
            raise ValueError("n must be >= 10")
        for name in ("depression_rate", "anxiety_rate"):
            r = getattr(self, name)
            if not 0.0 < r < 1.0:
                raise ValueError(f"{name}={r} outside (0,1)")
        self.signal.check()
        if self.communities < 2:
            raise ValueError("communities must be >= 2")
        if not 0.0 <= self.inter_p <= self.intra_p <= 1.0:
            raise ValueError("need 0 <= inter_p <= intra_p <= 1")
        if self.mean_sms <= 0:
            raise ValueError("mean_sms must be positive")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthParams":
        doc = dict(doc)
        if "signal" in doc:
            doc["signal"] = SignalLoadings(**doc["signal"])
        return cls(**doc)


def _quota_labels(z: np.ndarray, rate: float, noise: np.ndarray) -> np.ndarray:
    """Exactly round(n * rate) positives: largest noisy-distress individuals."""
    n = len(z)
    k = int(math.floor(n * rate + 0.5))
    order = np.argsort(-(z + noise), kind="stable")
    out = np.zeros(n, dtype=bool)
    out[order[:k]] = True
    return out


def generate(params: SynthParams) -> tuple[CohortTable, SmsEdgeList]:
    """Deterministic synthetic cohort + SMS edge list."""
    params.check()
    rng = np.random.default_rng(params.seed)
    n = params.n
    z = rng.standard_normal(n)

    depressed = _quota_labels(z, params.depression_rate, 0.5 * rng.standard_normal(n))
    anxious = _quota_labels(z, params.anxiety_rate, 0.5 * rng.standard_normal(n))

    # Scores land strictly on the correct side of the published thresholds.
    cesd = np.where(
        depressed, 16.0 + 14.0 * rng.random(n), 15.0 * rng.random(n)
    )
    stai = np.where(
        anxious, 41.0 + 19.0 * rng.random(n), 40.0 * rng.random(n)
    )

    numeric: dict[str, list[float]] = {}
    for dim, fields in DIMENSION_FIELDS.items():
        load = getattr(params.signal, dim)
        for f in fields:
            col = TRAIT_SIGNS[f] * load * z + rng.standard_normal(n)
            numeric[f] = [float(v) for v in col]
    numeric["cesd"] = [float(v) for v in cesd]
    numeric["stai"] = [float(v) for v in stai]

    categorical: dict[str, list[int]] = {}
    for fname, card in zip(SOCIAL_FIELDS, SOCIAL_CARDINALITIES):
        codes = rng.integers(card, size=n)
        # With probability = loading, a depressed individual sits in a fixed
        # "associated" category; the association strength is the loading.
        hit = rng.random(n) < params.signal.social
        codes = np.where(hit & depressed, 0, codes)
        codes = np.where(hit & ~depressed, np.maximum(codes, 1) % card, codes)
        categorical[fname] = [int(v) for v in codes]

    # SMS graph: stochastic block model, communities mixing random placement
    # with depression-label homophily.
    comm = rng.integers(params.communities, size=n)
    hom = rng.random(n) < params.signal.sms
    override = np.where(
        depressed, params.communities - 1, rng.integers(params.communities - 1, size=n)
    )
    comm = np.where(hom, override, comm)
    iu, ju = np.triu_indices(n, k=1)
    same = comm[iu] == comm[ju]
    p = np.where(same, params.intra_p, params.inter_p)
    hit = rng.random(len(iu)) < p
    geo_p = min(1.0, 1.0 / params.mean_sms)
    sms: SmsEdgeList = []
    weights = rng.geometric(geo_p, size=int(hit.sum()))
    ids = [f"ind{i:04d}" for i in range(n)]
    for (a, b), w in zip(zip(iu[hit], ju[hit]), weights):
        sms.append((ids[a], ids[b], int(w)))

    totals = np.zeros(n, dtype=int)
    for a, b, w in sms:
        totals[int(a[3:])] += w
        totals[int(b[3:])] += w

    cohort = CohortTable(
        ids=ids,
        numeric=numeric,
        categorical=categorical,
        sms_total=[int(t) for t in totals],
    )
    cohort.check()
    return cohort, sms


# -- NetHealth-shaped fixture ----------------------------------------------

_FIXTURE_N = 274
_FIXTURE_II = 1354
_FIXTURE_DEPRESSED = 67
_FIXTURE_ANXIOUS = 106
_FIXTURE_BOTH = 51
_FIXTURE_DISTINCT = {"personality": 114, "social": 55, "physical": 27, "wellbeing": 87}

# Nearest-rank margins for n=274 that keep a three-valued column binning to
# exactly its intended groups: at least 69 Lows, at most 68 Highs, at most
# 205 Lows per component.
_MIN_LOW, _MAX_LOW, _MAX_HIGH = 69, 205, 68


def _margins_ok(tuples: list[tuple[int, ...]], m: int) -> bool:
    arr = np.asarray(tuples)
    for c in range(m):
        n_low = int((arr[:, c] == 0).sum())
        n_high = int((arr[:, c] == 2).sum())
        if not (_MIN_LOW <= n_low <= _MAX_LOW and n_high <= _MAX_HIGH):
            return False
    return True


def _repair_distinct(
    assign: list[tuple[int, ...]],
    target: int,
    universe: list[tuple[int, ...]],
) -> list[tuple[int, ...]]:
    """Merge or split tuple groups until exactly `target` distinct tuples."""
    assign = list(assign)
    while True:
        counts: dict[tuple[int, ...], list[int]] = {}
        for i, t in enumerate(assign):
            counts.setdefault(t, []).append(i)
        if len(counts) == target:
            return assign
        by_size = sorted(counts.items(), key=lambda kv: (len(kv[1]), kv[0]))
        if len(counts) > target:
            # fold the rarest group into the most common one
            rare, members = by_size[0]
            common = by_size[-1][0]
            for i in members:
                assign[i] = common
        else:
            unused = [t for t in universe if t not in counts]
            # prefer medium-heavy tuples: they never strain the bin margins
            unused.sort(key=lambda t: (sum(1 for v in t if v != 1), t))
            new = unused[0]
            donor_members = by_size[-1][1]
            assign[donor_members[0]] = new


def _binned_dimension(
    n_components: int, target: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    """Per-individual L/M/H tuples (coded 0/1/2) with exact distinct count."""
    universe = list(itertools.product(range(3), repeat=n_components))
    for _ in range(200):
        draws = rng.choice(3, size=(_FIXTURE_N, n_components), p=[0.35, 0.45, 0.20])
        assign = [tuple(int(v) for v in row) for row in draws]
        assign = _repair_distinct(assign, target, universe)
        if _margins_ok(assign, n_components):
            return assign
    raise RuntimeError("fixture dimension construction failed to satisfy margins")


def _social_dimension(rng: np.random.Generator) -> list[tuple[int, ...]]:
    probs = [
        [0.5, 0.5],
        [0.6, 0.2, 0.1, 0.06, 0.04],
        [0.5, 0.3, 0.15, 0.05],
        [0.5, 0.3, 0.2],
    ]
    universe = list(itertools.product(*[range(c) for c in SOCIAL_CARDINALITIES]))
    draws = np.column_stack(
        [rng.choice(len(p), size=_FIXTURE_N, p=p) for p in probs]
    )
    assign = [tuple(int(v) for v in row) for row in draws]
    # no margin constraints for categorical components
    return _repair_social(assign, _FIXTURE_DISTINCT["social"], universe)


def _repair_social(assign, target, universe):
    assign = list(assign)
    while True:
        counts: dict[tuple[int, ...], list[int]] = {}
        for i, t in enumerate(assign):
            counts.setdefault(t, []).append(i)
        if len(counts) == target:
            return assign
        by_size = sorted(counts.items(), key=lambda kv: (len(kv[1]), kv[0]))
        if len(counts) > target:
            rare, members = by_size[0]
            common = by_size[-1][0]
            for i in members:
                assign[i] = common
        else:
            unused = sorted(t for t in universe if t not in counts)
            assign[by_size[-1][1][0]] = unused[0]


#: Raw score emitted for each bin level, per binned component.
_BIN_VALUES = {
    "agreeableness": (2.0, 3.0, 4.2),
    "conscientiousness": (2.1, 3.1, 4.3),
    "extraversion": (1.9, 3.0, 4.4),
    "neuroticism": (1.8, 2.9, 4.1),
    "openness": (2.2, 3.2, 4.5),
    "sleep_quality": (4.0, 8.0, 12.0),
    "avg_sleep_minutes": (360.0, 420.0, 490.0),
    "avg_steps": (5200.0, 8400.0, 12500.0),
    "body_image": (2.0, 3.0, 4.0),
    "happiness": (2.1, 3.2, 4.1),
    "health": (2.2, 3.3, 4.2),
    "loneliness": (1.5, 2.5, 3.8),
    "self_esteem": (1.8, 2.8, 4.0),
}


def nethealth_fixture(seed: int = 2016) -> tuple[CohortTable, SmsEdgeList]:
    """Cohort mirroring the published network shape exactly.

    The derived network has per-type node counts 274/114/55/27/87/2 and
    per-type edge counts 1354/274/274/274/274/274, with 67 depressed and 106
    anxious individuals (51 both).
    """
    rng = np.random.default_rng(seed)
    n = _FIXTURE_N
    ids = [f"ind{i:04d}" for i in range(n)]

    dims = {
        "personality": _binned_dimension(5, _FIXTURE_DISTINCT["personality"], rng),
        "physical": _binned_dimension(3, _FIXTURE_DISTINCT["physical"], rng),
        "wellbeing": _binned_dimension(5, _FIXTURE_DISTINCT["wellbeing"], rng),
    }
    social = _social_dimension(rng)

    numeric: dict[str, list[float]] = {}
    for dim, fields in DIMENSION_FIELDS.items():
        for c, f in enumerate(fields):
            values = _BIN_VALUES[f]
            numeric[f] = [values[dims[dim][i][c]] for i in range(n)]
    categorical = {
        f: [social[i][c] for i in range(n)] for c, f in enumerate(SOCIAL_FIELDS)
    }

    dep_idx = rng.choice(n, size=_FIXTURE_DEPRESSED, replace=False)
    depressed = np.zeros(n, dtype=bool)
    depressed[dep_idx] = True
    anx_from_dep = rng.choice(dep_idx, size=_FIXTURE_BOTH, replace=False)
    non_dep = np.flatnonzero(~depressed)
    anx_from_rest = rng.choice(
        non_dep, size=_FIXTURE_ANXIOUS - _FIXTURE_BOTH, replace=False
    )
    anxious = np.zeros(n, dtype=bool)
    anxious[anx_from_dep] = True
    anxious[anx_from_rest] = True

    cesd = np.where(depressed, 16.0 + 13.0 * rng.random(n), 15.0 * rng.random(n))
    stai = np.where(anxious, 41.0 + 18.0 * rng.random(n), 40.0 * rng.random(n))
    numeric["cesd"] = [float(v) for v in cesd]
    numeric["stai"] = [float(v) for v in stai]

    iu, ju = np.triu_indices(n, k=1)
    chosen = rng.choice(len(iu), size=_FIXTURE_II, replace=False)
    chosen.sort()
    weights = rng.geometric(1.0 / 30.0, size=_FIXTURE_II)
    sms: SmsEdgeList = [
        (ids[iu[c]], ids[ju[c]], int(w)) for c, w in zip(chosen, weights)
    ]

    totals = np.zeros(n, dtype=int)
    for a, b, w in sms:
        totals[int(a[3:])] += w
        totals[int(b[3:])] += w

    cohort = CohortTable(
        ids=ids,
        numeric=numeric,
        categorical=categorical,
        sms_total=[int(t) for t in totals],
    )
    cohort.check()
    return cohort, sms
