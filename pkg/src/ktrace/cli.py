"""Command-line surface: preprocess, synth, train, evaluate, report.

Exit codes: 0 success, 1 runtime/model error, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import SUBJECTIVE, to_sequences
from .errors import CheckpointError, ConfigError, KtraceError
from .ingest import (
    preprocess,
    read_meta,
    read_records_jsonl,
    split,
    write_meta,
    write_records_jsonl,
)
from .metrics import MetricsReport
from .synth import SynthConfig, generate, write_csv
from .training import (
    TrainConfig,
    config_from_dict,
    evaluate,
    load_model_checkpoint,
    save_model_checkpoint,
    train,
    write_reports_jsonl,
)

RUN_FILE_KEYS = {"records", "meta", "out_dir", "dataset"}


def cmd_preprocess(args) -> int:
    source = Path(args.input)
    if not source.exists():
        raise ConfigError(f"input file not found: {source}")
    table = None
    if args.max_score_table:
        table = json.loads(Path(args.max_score_table).read_text())
    result = preprocess(source, args.schema, table)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records_jsonl(result.records, out_dir / "records.jsonl")
    write_meta(result.meta, out_dir / "meta.json")
    (out_dir / "report.json").write_text(
        json.dumps(result.report, sort_keys=True, indent=2) + "\n"
    )
    print(
        f"wrote {len(result.records)} records "
        f"({result.meta.n_students} students, {result.meta.n_skills} skills) to {out_dir}"
    )
    return 0


def cmd_synth(args) -> int:
    config = SynthConfig(
        n_students=args.students,
        n_skills=args.skills,
        seq_len=args.seq_len,
        p_init=args.p_init,
        p_learn=args.p_learn,
        slip=args.slip,
        guess=args.guess,
        task=args.task,
        score_noise_sd=args.noise_sd,
        score_levels=args.levels,
    )
    records, _ = generate(config, args.seed)
    write_csv(records, args.out, args.task, args.levels)
    print(f"wrote {len(records)} synthetic records to {args.out}")
    return 0


def load_run_config(path) -> tuple[TrainConfig, dict]:
    """Parse the run file: TrainConfig keys + records/meta/out_dir paths.

    Unknown keys are rejected; paths resolve relative to the config file.
    """
    cfg_path = Path(path)
    if not cfg_path.exists():
        raise ConfigError(f"config file not found: {cfg_path}")
    try:
        payload = json.loads(cfg_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{cfg_path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{cfg_path}: expected a JSON object")
    train_keys = set(TrainConfig.__dataclass_fields__)
    unknown = set(payload) - train_keys - RUN_FILE_KEYS
    if unknown:
        raise ConfigError(f"{cfg_path}: unknown config keys: {sorted(unknown)}")
    for key in ("records", "meta", "out_dir"):
        if key not in payload:
            raise ConfigError(f"{cfg_path}: missing required key '{key}'")
    base = cfg_path.parent
    paths = {
        "records": base / payload["records"],
        "meta": base / payload["meta"],
        "out_dir": base / payload["out_dir"],
        "dataset": payload.get("dataset", Path(payload["records"]).stem),
    }
    config = config_from_dict({k: v for k, v in payload.items() if k in train_keys})
    return config, paths


def cmd_train(args) -> int:
    config, paths = load_run_config(args.config)
    records = read_records_jsonl(paths["records"])
    meta = read_meta(paths["meta"])
    if meta.task != config.task:
        raise ConfigError(
            f"config task '{config.task}' does not match dataset task '{meta.task}'"
        )
    sequences = to_sequences(records, meta, config.max_seq_len)
    train_seqs, test_seqs = split(sequences, config.test_fraction, config.seed)
    result = train(train_seqs, test_seqs, meta, config)
    out_dir = paths["out_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_reports_jsonl(
        result.reports, out_dir / "metrics.jsonl", paths["dataset"], config.model_kind
    )
    save_model_checkpoint(out_dir / "checkpoint.bin", result.model, config, paths["dataset"])
    final_test = [r for r in result.reports if r.split == "test"]
    if final_test:
        print(json.dumps(final_test[-1].to_dict(), sort_keys=True))
    return 0


def cmd_evaluate(args) -> int:
    model, ckpt = load_model_checkpoint(args.checkpoint)
    records = read_records_jsonl(args.records)
    meta = read_meta(args.meta)
    if meta.task != model.task:
        raise CheckpointError(
            f"checkpoint task '{model.task}' does not match dataset task '{meta.task}'"
        )
    if meta.n_skills != model.config.n_skills:
        raise CheckpointError(
            f"checkpoint expects {model.config.n_skills} skills, dataset has {meta.n_skills}"
        )
    train_cfg = config_from_dict(ckpt.config["train"])
    sequences = to_sequences(records, meta, train_cfg.max_seq_len)
    _, test_seqs = split(sequences, train_cfg.test_fraction, train_cfg.seed)
    report = evaluate(
        model, test_seqs, meta, train_cfg.batch_size, epoch=train_cfg.epochs, split="test"
    )
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.metrics:
        lines = [
            json.loads(line)
            for line in Path(path).read_text().splitlines()
            if line.strip()
        ]
        if not lines:
            raise ConfigError(f"{path}: empty metrics file")
        test_lines = [ln for ln in lines if ln.get("split") == "test"]
        rows.append(test_lines[-1] if test_lines else lines[-1])
    rows.sort(key=lambda r: (r.get("dataset", ""), r.get("model", "")))
    print(render_table(rows))
    return 0


def render_table(rows: list[dict]) -> str:
    headers = ["dataset", "model", "task", "loss", "rmse", "mae", "acc", "auc"]
    table = [headers]
    for row in rows:
        table.append(
            [
                str(row.get("dataset", "-")),
                str(row.get("model", "-")),
                str(row.get("task", "-")),
                _fmt(row.get("loss")),
                _fmt(row.get("rmse")),
                _fmt(row.get("mae")),
                _fmt(row.get("acc")),
                _fmt(row.get("auc")),
            ]
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines)


def _fmt(value) -> str:
    return "-" if value is None else f"{float(value):.4f}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktrace",
        description="Knowledge tracing toolkit: data pipeline, models, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="parse, clean and remap a CSV dataset")
    p.add_argument("--input", required=True, help="source CSV file")
    p.add_argument("--schema", required=True, choices=["assist09", "scored"])
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--max-score-table",
        help="optional JSON file mapping raw skill id to rubric full marks",
    )
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--task", default="objective", choices=["objective", "subjective"])
    p.add_argument("--students", type=int, default=500)
    p.add_argument("--skills", type=int, default=10)
    p.add_argument("--seq-len", type=int, default=50)
    p.add_argument("--p-init", type=float, default=0.2)
    p.add_argument("--p-learn", type=float, default=0.25)
    p.add_argument("--slip", type=float, default=0.1)
    p.add_argument("--guess", type=float, default=0.1)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model from a JSON run config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset's test split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--meta", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render a comparison table from metrics files")
    p.add_argument("--metrics", required=True, nargs="+")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KtraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
