"""Command-line surface: synth -> preprocess -> connect -> select -> label
-> train -> evaluate -> report.

Artifacts are plain files in the ``--out`` run directory. Exit codes:
0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from pathlib import Path

from .artifacts import read_json, require, write_json, write_text
from .config import PipelineConfig
from .connectivity import edges_payload, matrix_payload
from .errors import ConfigError, DataFormatError, NumericalError
from .evaluate import comparison_csv, evaluate_cv, make_fold_plan, stratified_folds
from .labeling import trials_csv
from .montage import DEFAULT_MONTAGE
from .nn.model import build_model, save_parameters, spec_for
from .nn.train import TrainConfig, train
from .pipeline import (
    CohortAccumulator,
    cohort_spec_for,
    preprocess_full,
    resolve_electrodes,
    summarize_subject,
)
from .recording import load_recording, save_recording
from .seeds import derive_seed
from .spectral import recording_psd
from .synth import cohort_ground_truth, iter_cohort


def _out(config: PipelineConfig) -> Path:
    return Path(config.out_dir)


def _write_manifest(config: PipelineConfig, command: str) -> None:
    write_json(
        _out(config) / f"manifest-{command}.json",
        {"schema": "cogstate.manifest/v1", "command": command,
         "config": config.semantic_dict()},
        config,
    )


def _cohort_dir(config: PipelineConfig) -> Path:
    return _out(config) / "cohort"


def _load_cohort(config: PipelineConfig, stage_dir: str, producer: str):
    d = _out(config) / stage_dir
    require(d, producer)
    files = sorted(d.glob("*.csv"))
    if not files:
        raise DataFormatError(f"no recordings in {d}; run `cogstate {producer}` first")
    return [load_recording(f, DEFAULT_MONTAGE) for f in files]


def cmd_synth(config: PipelineConfig) -> None:
    spec = cohort_spec_for(config)
    out = _cohort_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    for rec in iter_cohort(spec):
        save_recording(rec, out / f"{rec.subject_id}.csv")
    truth = cohort_ground_truth(spec)
    write_json(
        out / "ground_truth.json",
        {
            "schema": "cogstate.ground_truth/v1",
            "informative_channels": list(truth.informative_channels),
            "strong_edges": [list(e) for e in truth.strong_edges],
            "states": {f"{sid}:{ri}": st for (sid, ri), st in sorted(truth.states.items())},
        },
        config,
    )
    _write_manifest(config, "synth")
    print(f"synth: wrote {spec.n_subjects} subjects to {out}")


def cmd_preprocess(config: PipelineConfig) -> None:
    recs = _load_cohort(config, "cohort", "synth")
    out = _out(config) / "preprocessed"
    out.mkdir(parents=True, exist_ok=True)
    logs = []
    psd_sum = None
    grid = None
    for rec in recs:
        processed, log = preprocess_full(rec, DEFAULT_MONTAGE, config)
        save_recording(processed, out / f"{rec.subject_id}.csv")
        logs.append(
            {
                "subject_id": log.subject_id,
                "corrupt_samples": log.corrupt_samples,
                "whole_channels": list(log.whole_channels),
                "ica_converged": log.ica_converged,
                "ica_iterations": log.ica_iterations,
                "rejected_components": list(log.rejected_components),
            }
        )
        psd = recording_psd(processed)
        psd_sum = psd.power.copy() if psd_sum is None else psd_sum + psd.power
        grid = psd.freqs_hz
    write_json(out / "preprocess_log.json",
               {"schema": "cogstate.preprocess_log/v1", "subjects": logs}, config)
    payload = {
        "schema": "cogstate.psd/v1",
        "channels": list(recs[0].channels),
        "freqs_hz": grid.tolist(),
        "psd": (psd_sum / len(recs)).tolist(),
        "params": {"segment_samples": 0, "overlap": 0.5, "window": "hann",
                   "note": "cohort mean over subjects"},
    }
    write_json(out / "psd.json", payload, config)
    _write_manifest(config, "preprocess")
    print(f"preprocess: {len(recs)} subjects -> {out}")


def _accumulate(config: PipelineConfig) -> CohortAccumulator:
    recs = _load_cohort(config, "preprocessed", "preprocess")
    acc = CohortAccumulator(config)
    for rec in recs:
        acc.add(summarize_subject(rec, config))
    return acc


def cmd_connect(config: PipelineConfig) -> None:
    acc = _accumulate(config)
    analysis = acc.connectivity_analysis()
    out = _out(config) / "connect"
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "overall_matrix.json",
               matrix_payload(analysis.channels, analysis.overall.values,
                              {"mode": "overall_sum", "n_inputs": analysis.overall.n_inputs}),
               config)
    header = "," + ",".join(analysis.channels)
    rows = [header] + [
        name + "," + ",".join(repr(v) for v in row)
        for name, row in zip(analysis.channels, analysis.overall.values)
    ]
    write_text(out / "overall_matrix.csv", "\n".join(rows) + "\n", config)
    for gender, agg in analysis.by_gender.items():
        write_json(out / f"matrix_{gender}.json",
                   matrix_payload(analysis.channels, agg.values,
                                  {"mode": "cohort", "gender": gender, "n_inputs": agg.n_inputs}),
                   config)
    write_json(out / "edges_top.json", edges_payload(analysis.top_edges, label="overall"), config)
    write_json(out / "edges_positive.json", edges_payload(analysis.positive, label="overall"), config)
    write_json(out / "edges_negative.json", edges_payload(analysis.negative, label="overall"), config)
    write_json(
        out / "embedding.json",
        {
            "schema": "cogstate.embedding/v1",
            "channels": list(analysis.channels),
            "entries": [
                {
                    "subject_id": e.subject_id,
                    "task": e.task,
                    "edges": [[ed.a, ed.b, ed.weight] for ed in e.edges],
                }
                for e in analysis.embedding.entries
            ],
        },
        config,
    )
    write_json(out / "task_weights.json",
               {"schema": "cogstate.task_weights/v1", "weights": analysis.task_weights},
               config)
    _write_manifest(config, "connect")
    print(f"connect: overall aggregate over {analysis.overall.n_inputs} subject-task matrices -> {out}")


def cmd_select(config: PipelineConfig) -> None:
    acc = _accumulate(config)
    analysis = acc.connectivity_analysis()
    out = _out(config) / "select"
    out.mkdir(parents=True, exist_ok=True)
    write_json(
        out / "ranking.json",
        {
            "schema": "cogstate.ranking/v1",
            "scores": [{"channel": cs.name, "score": cs.score} for cs in analysis.ranking],
        },
        config,
    )
    write_json(
        out / "selected.json",
        {"schema": "cogstate.selected/v1", "channels": list(analysis.selected),
         "top_k_edges": config.top_k},
        config,
    )
    _write_manifest(config, "select")
    print(f"select: {', '.join(analysis.selected)}")


def cmd_label(config: PipelineConfig) -> None:
    acc = _accumulate(config)
    trials = acc.trials()
    out = _out(config) / "label"
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "labels.csv", trials_csv(trials), config)
    counts = {s: sum(1 for t in trials if t.state == s) for s in ("low", "transition", "high")}
    _write_manifest(config, "label")
    print(f"label: {len(trials)} trials ({counts})")


def _labeled_dataset(config: PipelineConfig):
    require(_out(config) / "label" / "labels.csv", "label")
    acc = _accumulate(config)
    trials = acc.trials()
    dataset = acc.dataset(trials)
    analysis = None
    if config.electrodes.startswith("topk:"):
        selected = read_json(_out(config) / "select" / "selected.json",
                             "cogstate.selected/v1", "select")
        n = int(config.electrodes.split(":", 1)[1])
        channels = tuple(selected["channels"][:n])
    else:
        channels = resolve_electrodes(config.electrodes, analysis)
    return dataset.select_channels(channels)


def cmd_train(config: PipelineConfig) -> None:
    dataset = _labeled_dataset(config)
    spec = spec_for(
        config.model, len(dataset.channels), dataset.x.shape[3], dataset.fs,
        seed=derive_seed(config.seed, "train", config.model),
    )
    model = build_model(spec)
    plan = stratified_folds(dataset.state_names(), 5, derive_seed(config.seed, "val-split"))
    train_idx, val_idx = plan.folds[0]
    cfg = TrainConfig(
        batch_size=config.batch_size,
        epochs=config.train_epochs,
        learning_rate=config.learning_rate,
        seed=derive_seed(config.seed, "train"),
    )
    result = train(
        model,
        dataset.x[list(train_idx)], dataset.y[list(train_idx)],
        cfg,
        val_x=dataset.x[list(val_idx)], val_y=dataset.y[list(val_idx)],
    )
    out = _out(config) / "train"
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(spec.to_json() + "\n")
    save_parameters(model.params(), out / "params.bin", out / "params.index.json")
    write_json(out / "curves.json",
               {"schema": "cogstate.curves/v1", "model": spec.name, "curves": result.curves},
               config)
    _write_manifest(config, "train")
    print(f"train: {spec.name} final train acc {result.final_train_acc:.3f} -> {out}")


def cmd_evaluate(config: PipelineConfig) -> None:
    dataset = _labeled_dataset(config)
    plan = make_fold_plan(dataset, config.folds, derive_seed(config.seed, "cv"), config.split)
    spec = spec_for(
        config.model, len(dataset.channels), dataset.x.shape[3], dataset.fs,
        seed=derive_seed(config.seed, "model", config.model),
    )
    cfg = TrainConfig(
        batch_size=config.batch_size,
        epochs=config.train_epochs,
        learning_rate=config.learning_rate,
    )
    report = evaluate_cv(spec, dataset, plan, cfg, electrode_set=config.electrodes)
    out = _out(config) / "evaluate"
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report.payload(), config)
    write_text(out / "report.csv", comparison_csv([report]), config)
    _write_manifest(config, "evaluate")
    m = report.aggregate
    print(
        f"evaluate: {report.model} on {config.electrodes}: top-1 {report.accuracy_top1:.4f}, "
        f"macro acc {m.accuracy:.4f}, f1 {m.f1:.4f}"
    )


def cmd_report(config: PipelineConfig) -> None:
    out = _out(config) / "report"
    out.mkdir(parents=True, exist_ok=True)
    needed = {
        "psd.json": ("preprocessed/psd.json", "preprocess"),
        "overall_matrix.json": ("connect/overall_matrix.json", "connect"),
        "edges_top.json": ("connect/edges_top.json", "connect"),
        "edges_positive.json": ("connect/edges_positive.json", "connect"),
        "edges_negative.json": ("connect/edges_negative.json", "connect"),
        "ranking.json": ("select/ranking.json", "select"),
        "curves.json": ("train/curves.json", "train"),
        "report.json": ("evaluate/report.json", "evaluate"),
    }
    for name, (rel, producer) in needed.items():
        src = require(_out(config) / rel, producer)
        shutil.copyfile(src, out / name)
    write_json(
        out / "montage.json",
        {
            "schema": "cogstate.montage/v1",
            "channels": [
                {"name": ch.name, "x": ch.x, "y": ch.y,
                 "hemisphere": ch.hemisphere, "lobe": ch.lobe}
                for ch in DEFAULT_MONTAGE.channels
            ],
        },
        config,
    )
    _write_manifest(config, "report")
    print(f"report: bundled {len(needed) + 1} artifacts -> {out}")


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "connect": cmd_connect,
    "select": cmd_select,
    "label": cmd_label,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogstate",
        description="EEG functional-connectivity and cognitive-state pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="run directory")
        p.add_argument("--cohort", choices=("demo", "paper"))
        p.add_argument("--filter-preset", choices=("default", "text-2022", "alg1"))
        p.add_argument("--electrodes", help="all20 | paper8 | topk:<n>")
        p.add_argument("--model", choices=("mlp", "eegnet", "mha-eegnet"))
        p.add_argument("--folds", type=int)
        p.add_argument("--split", choices=("subject", "epoch"))
        p.add_argument("--train-epochs", type=int)
        p.add_argument("--window", type=float, help="epoch window seconds")
        p.add_argument("--overlap", type=float)
        p.add_argument("--no-stamp", action="store_true")
    return parser


_FLAG_FIELDS = {
    "seed": "seed",
    "out": "out_dir",
    "cohort": "cohort",
    "filter_preset": "filter_preset",
    "electrodes": "electrodes",
    "model": "model",
    "folds": "folds",
    "split": "split",
    "train_epochs": "train_epochs",
    "window": "window_s",
    "overlap": "overlap",
}


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = (
        PipelineConfig.from_json_file(args.config) if args.config else PipelineConfig()
    )
    overrides = {}
    for flag, field_name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    if args.no_stamp:
        overrides["stamp"] = False
    if overrides:
        config = config.with_overrides(**overrides)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
