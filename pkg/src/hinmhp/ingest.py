"""Cohort ingest: raw per-individual measurements to the heterogeneous network.

Numeric characteristics are quantile-binned into Low/Medium/High groups over
the full cohort; per-dimension bin (or category) tuples become combination
nodes; depression and anxiety labels come from strict score thresholds
(CES-D > 15, STAI > 40).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .hin import EdgeKind, Hin, NodeKind, build

PERSONALITY_FIELDS = (
    "agreeableness",
    "conscientiousness",
    "extraversion",
    "neuroticism",
    "openness",
)
SOCIAL_FIELDS = ("gender", "race", "religion", "parents_education")
SOCIAL_CARDINALITIES = (2, 5, 4, 3)
PHYSICAL_FIELDS = ("sleep_quality", "avg_sleep_minutes", "avg_steps")
WELLBEING_FIELDS = ("body_image", "happiness", "health", "loneliness", "self_esteem")

COHORT_HEADER = (
    ("id",)
    + PERSONALITY_FIELDS
    + SOCIAL_FIELDS
    + PHYSICAL_FIELDS[:1]
    + PHYSICAL_FIELDS[1:]
    + WELLBEING_FIELDS
    + ("cesd", "stai", "sms_total")
)
SMS_HEADER = ("id_a", "id_b", "count")


class BinLevel(Enum):
    Low = "L"
    Medium = "M"
    High = "H"


class Condition(Enum):
    Depression = "depression"
    Anxiety = "anxiety"


#: Strict thresholds: score strictly above the value means positive.
LABEL_THRESHOLDS = {Condition.Depression: 15.0, Condition.Anxiety: 40.0}
SCORE_FIELD = {Condition.Depression: "cesd", Condition.Anxiety: "stai"}

#: Maps each combination dimension to (component field names, binned?).
DIMENSIONS = {
    NodeKind.PersonalityTraits: (PERSONALITY_FIELDS, True),
    NodeKind.SocialStatus: (SOCIAL_FIELDS, False),
    NodeKind.PhysicalHealth: (PHYSICAL_FIELDS, True),
    NodeKind.WellBeing: (WELLBEING_FIELDS, True),
}
DIMENSION_EDGE = {
    NodeKind.PersonalityTraits: EdgeKind.IP,
    NodeKind.SocialStatus: EdgeKind.IS,
    NodeKind.PhysicalHealth: EdgeKind.IF,
    NodeKind.WellBeing: EdgeKind.IW,
}


@dataclass
class CohortTable:
    """Column-oriented per-individual measurements.

    ``numeric[field]`` holds floats, ``categorical[field]`` integer codes;
    row order is shared across all columns and ``ids``.
    """

    ids: list[str]
    numeric: dict[str, list[float]]
    categorical: dict[str, list[int]]
    sms_total: list[int]

    def __len__(self) -> int:
        return len(self.ids)

    def check(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate individual ids")
        n = len(self.ids)
        for name, col in self.numeric.items():
            if len(col) != n:
                raise ValueError(f"column {name} has {len(col)} rows, expected {n}")
            for v in col:
                if not math.isfinite(v):
                    raise ValueError(f"non-finite value in column {name}")
        for name, card in zip(SOCIAL_FIELDS, SOCIAL_CARDINALITIES):
            for v in self.categorical[name]:
                if not 0 <= v < card:
                    raise ValueError(f"{name} code {v} outside [0,{card})")
        for v in self.sms_total:
            if v < 0:
                raise ValueError("negative sms_total")


SmsEdgeList = list[tuple[str, str, int]]


def bin_scores(values: Sequence[float]) -> list[BinLevel]:
    """Bin values into Low (<= q25), High (> q75), Medium otherwise.

    Quantiles use the nearest-rank rule: the k-th smallest with
    k = ceil(q * n). When q25 == q75 everything is Medium.
    """
    if len(values) == 0:
        raise ValueError("empty input")
    for v in values:
        if not math.isfinite(v):
            raise ValueError("non-finite value")
    ranked = sorted(values)
    n = len(ranked)
    q25 = ranked[math.ceil(0.25 * n) - 1]
    q75 = ranked[math.ceil(0.75 * n) - 1]
    if q25 == q75:
        return [BinLevel.Medium] * n
    out = []
    for v in values:
        if v <= q25:
            out.append(BinLevel.Low)
        elif v > q75:
            out.append(BinLevel.High)
        else:
            out.append(BinLevel.Medium)
    return out


def combination_nodes(
    cohort: CohortTable, dimension: NodeKind
) -> tuple[list[str], list[int]]:
    """Distinct combination keys for a dimension and per-individual assignment.

    Returns (keys, assignment) where keys are stable string labels (first-seen
    order) and assignment[i] indexes into keys.
    """
    if dimension not in DIMENSIONS:
        raise ValueError(f"{dimension} is not a combination dimension")
    fields, binned = DIMENSIONS[dimension]
    if binned:
        parts = [bin_scores(cohort.numeric[f]) for f in fields]
        tuples = [
            "-".join(parts[c][i].value for c in range(len(fields)))
            for i in range(len(cohort))
        ]
    else:
        tuples = [
            "-".join(str(cohort.categorical[f][i]) for f in fields)
            for i in range(len(cohort))
        ]
    keys: list[str] = []
    key_index: dict[str, int] = {}
    assignment = []
    for t in tuples:
        if t not in key_index:
            key_index[t] = len(keys)
            keys.append(t)
        assignment.append(key_index[t])
    return keys, assignment


def mental_health_labels(cohort: CohortTable, condition: Condition) -> list[bool]:
    """Positive iff the condition's score is strictly above its threshold."""
    scores = cohort.numeric[SCORE_FIELD[condition]]
    threshold = LABEL_THRESHOLDS[condition]
    return [s > threshold for s in scores]


def build_hin(cohort: CohortTable, sms: SmsEdgeList, condition: Condition) -> Hin:
    """Assemble the full network for one condition."""
    cohort.check()
    row = {ident: i for i, ident in enumerate(cohort.ids)}
    ii_edges = []
    seen = set()
    for a, b, count in sms:
        if a not in row or b not in row:
            raise ValueError(f"SMS edge references unknown id {a!r} or {b!r}")
        if a == b:
            raise ValueError(f"SMS self-loop at {a!r}")
        if count <= 0:
            raise ValueError(f"SMS count for ({a},{b}) must be positive")
        key = (min(row[a], row[b]), max(row[a], row[b]))
        if key in seen:
            raise ValueError(f"duplicate SMS pair ({a},{b})")
        seen.add(key)
        ii_edges.append((key[0], key[1], float(count)))

    labels: dict[NodeKind, list[str]] = {NodeKind.Individual: list(cohort.ids)}
    edges: dict[EdgeKind, list] = {EdgeKind.II: ii_edges}
    for dim, ekind in DIMENSION_EDGE.items():
        keys, assignment = combination_nodes(cohort, dim)
        labels[dim] = keys
        edges[ekind] = [(i, k, 1.0) for i, k in enumerate(assignment)]

    positive = mental_health_labels(cohort, condition)
    pos_name, neg_name = {
        Condition.Depression: ("depressed", "non-depressed"),
        Condition.Anxiety: ("anxious", "non-anxious"),
    }[condition]
    labels[NodeKind.MentalHealth] = [pos_name, neg_name]
    edges[EdgeKind.IM] = [(i, 0 if p else 1, 1.0) for i, p in enumerate(positive)]
    return build(labels, edges)


# -- CSV interchange -------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() else repr(float(v))


def write_cohort_csv(cohort: CohortTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COHORT_HEADER)
        for i in range(len(cohort)):
            row = [cohort.ids[i]]
            for f in COHORT_HEADER[1:]:
                if f in cohort.numeric:
                    row.append(_fmt(cohort.numeric[f][i]))
                elif f in cohort.categorical:
                    row.append(str(cohort.categorical[f][i]))
                else:
                    row.append(str(cohort.sms_total[i]))
            w.writerow(row)


def read_cohort_csv(path) -> CohortTable:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COHORT_HEADER:
            raise ValueError(f"unexpected cohort.csv header: {reader.fieldnames}")
        ids: list[str] = []
        numeric = {
            f: []
            for f in COHORT_HEADER[1:]
            if f not in SOCIAL_FIELDS and f != "sms_total"
        }
        categorical = {f: [] for f in SOCIAL_FIELDS}
        sms_total: list[int] = []
        for rec in reader:
            for f, v in rec.items():
                if v is None or v == "":
                    raise ValueError(f"missing value for {f} in row {rec.get('id')}")
            ids.append(rec["id"])
            for f in numeric:
                numeric[f].append(float(rec[f]))
            for f in categorical:
                categorical[f].append(int(rec[f]))
            sms_total.append(int(rec["sms_total"]))
    table = CohortTable(ids, numeric, categorical, sms_total)
    table.check()
    return table


def write_sms_csv(sms: SmsEdgeList, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SMS_HEADER)
        for a, b, count in sms:
            w.writerow([a, b, count])


def read_sms_csv(path) -> SmsEdgeList:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SMS_HEADER:
            raise ValueError(f"unexpected sms.csv header: {reader.fieldnames}")
        return [(r["id_a"], r["id_b"], int(r["count"])) for r in reader]
