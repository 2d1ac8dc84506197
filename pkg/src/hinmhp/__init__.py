"""Heterogeneous-network modeling and mental-health state prediction.

A cohort of individuals with survey traits, wearable measurements and SMS
communication is modeled as a heterogeneous information network; binary
depression and anxiety states are predicted either by recommender-style
target-edge scoring or by node classification over network features.
"""

from .classify import (
    FeatureMatrix,
    LogregModel,
    calibrate_cutoff,
    fit_logreg,
    nonnetwork_features,
    predict_proba,
    random_guess,
)
from .graphlets import colored_gdv, gdv, gdv_oracle, homogeneous_graph
from .herec import HerecConfig, default_metapaths, fit_herec, herec_scores
from .hin import EdgeKind, Hin, NodeId, NodeKind, SchemaError
from .ingest import (
    BinLevel,
    CohortTable,
    Condition,
    bin_scores,
    build_hin,
    read_cohort_csv,
    read_sms_csv,
    write_cohort_csv,
    write_sms_csv,
)
from .mrmf import (
    DedicomModel,
    DmfModel,
    RelationSpec,
    RescalModel,
    TrainConfig,
    ablation_combos,
    combo_label,
    predict_condition,
    train_dedicom,
    train_dmf,
    train_rescal,
)
from .pipeline import (
    EvalReport,
    RunConfig,
    load_data,
    run_ablation,
    run_evaluation,
    run_overlap,
)
from .stats import (
    ConfusionCounts,
    MetricSet,
    OverlapTest,
    bh_fdr,
    confusion,
    hypergeom_tail,
    metrics,
    overlap_analysis,
    relative_gain,
    stratified_kfold,
    wilcoxon_signed_rank,
)
from .synth import SignalLoadings, SynthParams, generate, nethealth_fixture
from .walks import Metapath, metapath_walks, random_walks, train_skipgram, via

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
