"""Generate a synthetic cohort, build the network, and compare predictors.

Run with: python3 demos/quickstart.py
"""

from hinmhp.ingest import Condition, build_hin
from hinmhp.pipeline import RunConfig, load_data, run_evaluation
from hinmhp.synth import SignalLoadings, SynthParams


def main():
    synth = SynthParams(
        n=120,
        depression_rate=0.245,
        anxiety_rate=0.387,
        signal=SignalLoadings(physical=0.8, wellbeing=0.8, sms=0.8),
        intra_p=0.2,
        seed=42,
    )
    cfg = RunConfig(
        methods=("dmf", "nonnetwork", "random"),
        synth=synth,
        seed=42,
        repetitions=2,
        method_params={"dmf": {"d": 8, "epochs": 60}},
    )

    cohort, sms = load_data(cfg)
    print(f"cohort: {len(cohort)} individuals, {len(sms)} SMS pairs")

    hin = build_hin(cohort, sms, Condition.Depression)
    for kind, names in hin.labels.items():
        print(f"  {kind.name}: {len(names)} nodes")
    problems = hin.validate()
    print(f"schema diagnostics: {problems or 'none'}")

    report = run_evaluation(cohort, sms, cfg)
    print(f"\n5-fold CV x {cfg.repetitions} repetitions, condition={cfg.condition}")
    for method, summary in report.summary.items():
        line = "  ".join(
            f"{metric}={v['mean']:.3f}±{v['std']:.3f}"
            for metric, v in summary.items()
        )
        print(f"{method:>12}  {line}")

    print("\npairwise tests (BH-adjusted):")
    for row in report.pairwise:
        if row["metric"] != "recall":
            continue
        print(f"  {row['a']} vs {row['b']}: p_adj={row['p_adj']:.4f}")


if __name__ == "__main__":
    main()
