"""Command-line entry point.

Subcommands: synth, build, run, ablate, overlap, report. A JSON config file
supplies any RunConfig field; command-line flags override config keys. The
HINMHP_SEED environment variable is the seed fallback when neither a flag
nor the config sets one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .hin import SchemaError
from .ingest import Condition, build_hin, read_cohort_csv, read_sms_csv, write_cohort_csv, write_sms_csv
from .pipeline import (
    EvalReport,
    RunConfig,
    load_data,
    render_barchart,
    run_ablation,
    run_evaluation,
    run_overlap,
    write_ablation,
    write_overlap,
    write_report,
)
from .synth import SynthParams, generate


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hinmhp",
        description="Heterogeneous-network mental-health state prediction.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--condition", choices=("depression", "anxiety"))
        sp.add_argument("--out", metavar="DIR", default="out")
        sp.add_argument("--jobs", type=int, metavar="N")

    sp = sub.add_parser("synth", help="generate a synthetic cohort")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--depression-rate", type=float)
    sp.add_argument("--anxiety-rate", type=float)

    sp = sub.add_parser("build", help="build and validate an HIN from CSV files")
    common(sp)
    sp.add_argument("--cohort", metavar="PATH", required=True)
    sp.add_argument("--sms", metavar="PATH", required=True)

    sp = sub.add_parser("run", help="cross-validated method comparison")
    common(sp)
    sp.add_argument("--methods", nargs="+", metavar="NAME")

    sp = sub.add_parser("ablate", help="31-combination DMF edge-kind ablation")
    common(sp)

    sp = sub.add_parser("overlap", help="overlap analysis of correct predictions")
    common(sp)
    sp.add_argument("--methods", nargs="+", metavar="NAME")

    sp = sub.add_parser("report", help="render charts from an existing report")
    common(sp)
    sp.add_argument("--report", metavar="PATH", required=True)
    sp.add_argument("--metric", default="f1",
                    choices=("precision", "recall", "f1", "accuracy"))
    return p


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    if args.seed is not None:
        cfg["seed"] = args.seed
    elif "seed" not in cfg and os.environ.get("HINMHP_SEED"):
        cfg["seed"] = int(os.environ["HINMHP_SEED"])
    if args.condition:
        cfg["condition"] = args.condition
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if getattr(args, "methods", None):
        cfg["methods"] = list(args.methods)
    return cfg


def _run_config(args) -> RunConfig:
    return RunConfig.from_dict(_load_config(args))


def _cmd_synth(args) -> None:
    cfg = _load_config(args)
    sp = dict(cfg.get("synth") or {})
    if "seed" in cfg:
        sp["seed"] = cfg["seed"]
    for key in ("n", "depression_rate", "anxiety_rate"):
        v = getattr(args, key, None)
        if v is not None:
            sp[key] = v
    params = SynthParams.from_dict(sp)
    cohort, sms = generate(params)
    os.makedirs(args.out, exist_ok=True)
    write_cohort_csv(cohort, os.path.join(args.out, "cohort.csv"))
    write_sms_csv(sms, os.path.join(args.out, "sms.csv"))
    with open(os.path.join(args.out, "params.json"), "w") as fh:
        fh.write(params.to_json())
    print(f"wrote cohort.csv, sms.csv, params.json to {args.out}")


def _cmd_build(args) -> None:
    cfg = _load_config(args)
    cohort = read_cohort_csv(args.cohort)
    sms = read_sms_csv(args.sms)
    condition = Condition(cfg.get("condition", "depression"))
    hin = build_hin(cohort, sms, condition)
    problems = hin.validate()
    if problems:
        raise SchemaError("; ".join(problems))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "hin.json")
    with open(path, "w") as fh:
        fh.write(hin.to_json())
    counts = ", ".join(f"{k.name}={hin.n_nodes(k)}" for k in hin.labels)
    print(f"wrote {path} ({counts})")


def _cmd_run(args) -> None:
    cfg = _run_config(args)
    cohort, sms = load_data(cfg)
    report = run_evaluation(cohort, sms, cfg)
    write_report(report, args.out)
    for m, s in report.summary.items():
        vals = " ".join(f"{k}={v['mean']:.3f}" for k, v in s.items())
        print(f"{m}: {vals}")
    print(f"report written to {args.out}")


def _cmd_ablate(args) -> None:
    cfg = _run_config(args)
    cohort, sms = load_data(cfg)
    rows = run_ablation(cohort, sms, cfg)
    write_ablation(rows, cfg.config_hash(), args.out)
    for r in rows[:5]:
        print(f"{r['combination']}: precision={r['precision']:.3f}")
    print(f"ablation table ({len(rows)} rows) written to {args.out}")


def _cmd_overlap(args) -> None:
    merged = _load_config(args)
    if "methods" not in merged:
        merged["methods"] = ["dmf", "deepwalk", "nonnetwork"]
    cfg = RunConfig.from_dict(merged)
    cohort, sms = load_data(cfg)
    result = run_overlap(cohort, sms, cfg)
    write_overlap(result, cfg.config_hash(), args.out)
    for r in result["pairs"]:
        print(
            f"{r['a']} vs {r['b']}: overlap={r['overlap']} "
            f"p={r['p_value']:.4g} significant={r['significant']}"
        )
    print(f"overlap tables written to {args.out}")


def _cmd_report(args) -> None:
    with open(args.report) as fh:
        data = json.load(fh)
    report = EvalReport(**data)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{report.condition}_{args.metric}.svg")
    render_barchart(report, args.metric, path)
    print(f"chart written to {path}")


_COMMANDS = {
    "synth": _cmd_synth,
    "build": _cmd_build,
    "run": _cmd_run,
    "ablate": _cmd_ablate,
    "overlap": _cmd_overlap,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (ValueError, SchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
