"""Pipeline driver: each analysis stage as a subcommand.

Subcommands: ``sequences``, ``mine``, ``predict``, ``report``, ``synth``,
``run-all``. All take ``--config`` (key=value file) plus optional ``--out``
and ``--seed`` overrides. Data goes to files in the output directory,
diagnostics to stderr; exit code 0 means success.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import Counter
from pathlib import Path

from . import diagnostics as diag
from .config import (
    PipelineConfig,
    read_kv_file,
    synth_config_from_values,
)
from .errors import StudentRiskError
from .learn import (
    BASELINE_KINDS,
    baseline_fit_predict,
    dataset_from_features,
    forward_select,
    mlp_train_eval,
    mlp_trainer,
    rf_fit,
    rf_importance,
    split,
)
from .model import (
    Outcome,
    assemble_cohort,
    label_outcome,
    load_grouping,
    load_outcomes,
    load_submissions,
)
from .patterns import format_pattern, mine
from .sequences import (
    KIND_EXPORT_ORDER,
    SequenceKind,
    build_sequences,
    load_sequences_csv,
    write_sequences_csv,
)
from .synth import gen_cohort, write_cohort_files

GRADE_BANDS = (
    ("score_lt_60", 0.0, 60.0),
    ("score_60_69", 60.0, 70.0),
    ("score_70_79", 70.0, 80.0),
    ("score_80_89", 80.0, 90.0),
    ("score_ge_90", 90.0, 100.0 + 1e-9),
)


def _load_cohort(config: PipelineConfig):
    submissions = load_submissions(config.submissions_path)
    outcomes = load_outcomes(config.outcomes_path)
    grouping = load_grouping(config.grouping_path)
    return assemble_cohort(submissions, outcomes, grouping)


def cmd_sequences(config: PipelineConfig) -> None:
    cohort = _load_cohort(config)
    seqset = build_sequences(cohort, config.order_thresholds)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    write_sequences_csv(seqset, config.out_dir / "sequences.csv")


def cmd_mine(config: PipelineConfig) -> None:
    seq_path = config.out_dir / "sequences.csv"
    if not seq_path.exists():
        raise StudentRiskError(
            f"{seq_path} not found; run the 'sequences' stage first"
        )
    students, sequences, _ = load_sequences_csv(seq_path)
    outcomes = load_outcomes(config.outcomes_path)
    missing = [s for s in students if s not in outcomes]
    if missing:
        raise StudentRiskError(f"students without outcomes: {missing}")

    rows = []
    for kind in KIND_EXPORT_ORDER:
        fail_seqs = [
            sequences[s][kind]
            for s in students
            if label_outcome(outcomes[s]) is Outcome.FAIL
        ]
        pass_seqs = [
            sequences[s][kind]
            for s in students
            if label_outcome(outcomes[s]) is Outcome.PASS
        ]
        for found in mine(fail_seqs, pass_seqs, config.mining):
            rows.append(
                [
                    kind.value,
                    format_pattern(found.pattern),
                    f"{found.stats.accuracy:.4f}",
                    f"{found.stats.recall:.4f}",
                    found.stats.fail_matches,
                    found.stats.pass_matches,
                ]
            )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    with open(config.out_dir / "patterns.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["kind", "pattern", "accuracy", "recall", "fail_matches", "pass_matches"]
        )
        writer.writerows(rows)


def cmd_predict(config: PipelineConfig) -> None:
    cohort = _load_cohort(config)
    taxonomy = (
        diag.load_taxonomy(config.taxonomy_path)
        if config.taxonomy_path is not None
        else diag.default_taxonomy()
    )
    features = diag.extract_features(cohort, taxonomy)
    labels = {sid: cohort.label(sid) for sid in cohort.students}
    dataset = dataset_from_features(features, labels, taxonomy.feature_names)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    diag.write_features_csv(features, taxonomy, config.out_dir / "features.csv")

    params = config.learn
    train, test = split(dataset, params.train_fraction, params.seed)
    forest = rf_fit(
        train, n_trees=params.trees, max_depth=params.max_depth, seed=params.seed
    )
    ranking = rf_importance(forest)

    mlp_cfg = params.mlp_config()
    selection = forward_select(
        dataset,
        ranking.names,
        mlp_trainer(mlp_cfg),
        params.seed,
        params.train_fraction,
    )
    selected = list(selection.selected)

    train_sel = train.select_features(selected)
    test_sel = test.select_features(selected)
    models = {}
    mlp_metrics = mlp_train_eval(train_sel, test_sel, mlp_cfg, params.seed)
    models["mlp"] = {"accuracy": mlp_metrics.accuracy, "recall": mlp_metrics.recall}
    for kind in BASELINE_KINDS:
        metrics = baseline_fit_predict(kind, train_sel, test_sel, params.seed)
        models[kind] = {"accuracy": metrics.accuracy, "recall": metrics.recall}

    config.out_dir.mkdir(parents=True, exist_ok=True)
    with open(config.out_dir / "importance.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "importance"])
        for name, value in ranking.entries:
            writer.writerow([name, f"{value:.6f}"])

    payload = {
        "config": {
            "seed": params.seed,
            "train_fraction": params.train_fraction,
            "trees": params.trees,
            "max_depth": params.max_depth,
            "epochs": params.epochs,
            "batch_size": params.batch_size,
            "learning_rate": params.learning_rate,
            "momentum": params.momentum,
            "hidden_widths": list(params.hidden_widths),
        },
        "selected_features": selected,
        "accuracy_trajectory": list(selection.trajectory),
        "models": models,
    }
    with open(config.out_dir / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_report(config: PipelineConfig) -> None:
    seq_path = config.out_dir / "sequences.csv"
    if not seq_path.exists():
        raise StudentRiskError(
            f"{seq_path} not found; run the 'sequences' stage first"
        )
    students, sequences, _ = load_sequences_csv(seq_path)
    outcomes = load_outcomes(config.outcomes_path)
    missing = [s for s in students if s not in outcomes]
    if missing:
        raise StudentRiskError(f"students without outcomes: {missing}")

    table = {symbol: [0] * len(GRADE_BANDS) for symbol in (1, 2, 3)}
    for sid in students:
        seq = sequences[sid][SequenceKind.ORDER]
        tally = Counter(seq.symbols)
        # modal symbol; ties resolve to the smaller (more active) symbol
        modal = min(tally, key=lambda s: (-tally[s], s))
        score = outcomes[sid]
        for col, (_, lo, hi) in enumerate(GRADE_BANDS):
            if lo <= score < hi:
                table[modal][col] += 1
                break

    config.out_dir.mkdir(parents=True, exist_ok=True)
    with open(
        config.out_dir / "order_vs_grade.csv", "w", newline="", encoding="utf-8"
    ) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["order_symbol", *(name for name, _, _ in GRADE_BANDS)])
        if students:
            for symbol in (1, 2, 3):
                writer.writerow([symbol, *table[symbol]])


def cmd_synth(config_path: Path, out_override, seed_override) -> None:
    values = read_kv_file(config_path)
    synth_cfg = synth_config_from_values(values, seed_override)
    out_dir = Path(out_override) if out_override else Path(values.get("output.dir", "out"))
    if not out_dir.is_absolute():
        out_dir = config_path.parent / out_dir
    result = gen_cohort(synth_cfg)
    write_cohort_files(result, out_dir)

    # ready-to-run pipeline config pointing at the generated cohort, with
    # matching discretization thresholds; mine/learn keys pass through
    t1, t2 = result.manifest["order_thresholds"]
    lines = [
        "# pipeline config generated alongside the synthetic cohort",
        "paths.submissions = submissions.csv",
        "paths.outcomes = outcomes.csv",
        "paths.grouping = grouping.csv",
        "output.dir = .",
        f"sequences.order_threshold_1 = {t1:g}",
        f"sequences.order_threshold_2 = {t2:g}",
    ]
    for key in sorted(values):
        if key.startswith(("mine.", "learn.")):
            lines.append(f"{key} = {values[key]}")
    (out_dir / "pipeline.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_run_all(config: PipelineConfig) -> None:
    cmd_sequences(config)
    cmd_mine(config)
    cmd_predict(config)
    cmd_report(config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="studentrisk",
        description="Submission-behavior pattern mining and pass/fail prediction",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="key = value config file")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--seed", type=int, default=None, help="seed override")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sequences", parents=[common], help="build feature sequences")
    sub.add_parser("mine", parents=[common], help="mine failure patterns")
    sub.add_parser("predict", parents=[common], help="rank features and fit models")
    sub.add_parser("report", parents=[common], help="order-symbol vs grade cross-tab")
    sub.add_parser("synth", parents=[common], help="generate a synthetic cohort")
    sub.add_parser("run-all", parents=[common], help="all pipeline stages in order")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            cmd_synth(Path(args.config), args.out, args.seed)
        else:
            config = PipelineConfig.from_file(args.config, args.out, args.seed)
            dispatch = {
                "sequences": cmd_sequences,
                "mine": cmd_mine,
                "predict": cmd_predict,
                "report": cmd_report,
                "run-all": cmd_run_all,
            }
            dispatch[args.command](config)
    except StudentRiskError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
