"""Command-line entry point.

Usage::

    eegalign <command> [--config FILE] --out DIR [--seed N] [--threads N]

Commands: synth, preprocess, align, eval-offline, eval-online, report.
Configs are JSON objects checked against a strict schema per command; every
run writes ``run.json`` with the fully resolved config next to its outputs.
Errors print one line to stderr and exit nonzero (2 for configuration
errors, 1 for everything else).
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .alignment import REFERENCE_KINDS, build_reference, ea_transform
from .archive import load_archive, save_archive
from .data import Dataset, SubjectRecord, Trial
from .exceptions import ConfigError, EEGAlignError
from .harness import (
    OnlineConfig, PipelineSpec, loso_eval, online_eval, paired_t_test, read_csv, write_csv,
)
from .harness.curves import auc_curve
from .harness.pipeline import ALIGNMENTS, MODELS
from .preprocess import design_fir_bandpass, filter_causal
from .synth import SynthConfig, synth_erp, synth_mi

COMMANDS = ("synth", "preprocess", "align", "eval-offline", "eval-online", "report")
U64 = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}
POS_INT = {"type": "integer", "minimum": 1}
WINDOW = {"type": ["array", "null"], "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


def _obj(properties: dict, required=()) -> dict:
    return {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}


SYNTH_PROPS = {
    "task": {"enum": ["MI", "ERP"]},
    "n_subjects": POS_INT,
    "n_trials_per_class": POS_INT,
    "n_channels": POS_INT,
    "n_samples": POS_INT,
    "fs": {"type": "number", "exclusiveMinimum": 0},
    "noise_scale": {"type": "number", "minimum": 0},
    "mixing_condition": {"type": "number", "minimum": 1},
    "seed": U64,
}
PIPELINE = {
    "oneOf": [
        {"type": "string"},
        _obj({
            "model": {"enum": list(MODELS)},
            "alignment": {"enum": list(ALIGNMENTS)},
            "reference": {"enum": [*REFERENCE_KINDS, None]},
            "n_filters": POS_INT,
            "n_components": POS_INT,
            "n_features": POS_INT,
            "C": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "shrink": {"type": ["number", "null"], "minimum": 0, "exclusiveMaximum": 1},
            "name": {"type": ["string", "null"]},
        }, required=["model"]),
    ]
}
COMMON = {"seed": U64, "threads": POS_INT}
DATA_SOURCE = {"input": {"type": "string"}, "synth": _obj(SYNTH_PROPS)}
EVAL_PROPS = {**COMMON, **DATA_SOURCE, "pipelines": {"type": "array", "items": PIPELINE, "minItems": 1}}
SCHEMAS = {
    "synth": _obj({**SYNTH_PROPS, "threads": POS_INT}),
    "preprocess": _obj({
        **COMMON,
        "input": {"type": "string"},
        "filter": {"oneOf": [{"type": "null"}, _obj({
            "order": {"type": "integer", "minimum": 2, "multipleOf": 2},
            "band": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        }, required=["order", "band"])]},
        "window": WINDOW,
        "resting_window": WINDOW,
        "downsample": POS_INT,
    }, required=["input"]),
    "align": _obj({
        **COMMON,
        "input": {"type": "string"},
        "reference": {"enum": list(REFERENCE_KINDS)},
        "shrink": {"type": ["number", "null"], "minimum": 0, "exclusiveMaximum": 1},
    }, required=["input"]),
    "eval-offline": _obj(EVAL_PROPS),
    "eval-online": _obj({
        **EVAL_PROPS,
        "online": _obj({
            "m": POS_INT, "r": POS_INT, "first_batch": {"type": ["integer", "null"], "minimum": 1},
            "repetitions": POS_INT,
        }, required=["m", "r"]),
    }, required=["online"]),
    "report": _obj({**COMMON, "input": {"type": "string"}, "metric": {"enum": ["accuracy", "bca", None]},
                    "reference_pipeline": {"type": ["string", "null"]}}, required=["input"]),
}

SYNTH_DEFAULTS = {"task": "MI", **{k: v for k, v in SynthConfig().to_dict().items()}}
DEFAULT_PIPELINES = {
    ("eval-offline", "MI"): ["MDRM", "RA-MDRM", "CSP-LDA", "EA-CSP-LDA"],
    ("eval-offline", "ERP"): ["SVM", "EA-SVM", "xDAWN-SVM", "EA-xDAWN-SVM"],
    ("eval-online", "MI"): ["MDRM", "RA-MDRM", "CSP-LDA", "EA-CSP-LDA"],
    ("eval-online", "ERP"): ["MDRM", "RA-MDRM", "xDAWN-SVM", "EA-xDAWN-SVM"],
}


class _Stage:
    def __init__(self):
        self.name = "config"

    def __call__(self, name: str) -> "_Stage":
        self.name = name
        return self


def _validate(command: str, config: dict) -> None:
    errors = sorted(Draft202012Validator(SCHEMAS[command]).iter_errors(config), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"{where}: {e.message}")


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def _resolve_seed(args, config) -> int:
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _synth_dataset(cfg: dict) -> Dataset:
    params = {k: v for k, v in cfg.items() if k != "task"}
    config = SynthConfig(**params)
    return synth_erp(config) if cfg["task"] == "ERP" else synth_mi(config)


def _load_source(config: dict, seed: int):
    """Dataset from ``input`` (archive path) or an inline ``synth`` block."""
    if ("input" in config) == ("synth" in config):
        raise ConfigError("give exactly one of 'input' (archive path) or 'synth' (generator settings)")
    if "input" in config:
        return load_archive(config["input"]), {"input": config["input"]}
    synth = {**SYNTH_DEFAULTS, "seed": seed, **config["synth"]}
    return _synth_dataset(synth), {"synth": synth}


# ----------------------------------------------------------------------------- commands


def cmd_synth(config, seed, threads, out, stage):
    resolved = {**SYNTH_DEFAULTS, **config, "seed": seed}
    resolved.pop("threads", None)
    stage("synth")
    dataset = _synth_dataset(resolved)
    stage("write")
    save_archive(dataset, out)
    n = sum(s.n_trials for s in dataset.subjects)
    return resolved, f"synth: wrote {len(dataset.subjects)} {dataset.task_kind} subjects ({n} trials) to {out}"


def _crop(trial: Trial, window, what: str) -> np.ndarray:
    if window is None:
        return trial.data
    a, b = (int(np.floor(round(trial.fs * w, 9))) for w in window)
    if not 0 <= a < b <= trial.n_samples:
        raise ConfigError(
            f"{what} window {list(window)} s maps to samples [{a}, {b}) outside the {trial.n_samples}-sample trial"
        )
    return trial.data[:, a:b]


def cmd_preprocess(config, seed, threads, out, stage):
    resolved = {"input": config["input"], "filter": {"order": 50, "band": [8.0, 30.0]},
                "window": None, "resting_window": None, "downsample": 1}
    resolved.update({k: v for k, v in config.items() if k not in ("seed", "threads")})
    stage("load")
    dataset = load_archive(resolved["input"])
    stage("preprocess")
    fs = dataset.fs
    filt = None
    if resolved["filter"] is not None:
        filt = design_fir_bandpass(resolved["filter"]["order"], resolved["filter"]["band"], fs)
    factor = resolved["downsample"]

    def process(trial: Trial, window, what) -> Trial:
        data = filter_causal(trial.data, filt) if filt is not None else trial.data
        data = _crop(trial.with_data(data), window, what)[:, ::factor]
        return Trial(data, trial.fs / factor, trial.label, trial.subject, trial.kind)

    subjects = [
        SubjectRecord(
            r.subject,
            [process(t, resolved["window"], "task") for t in r.trials],
            [process(t, resolved["resting_window"], "resting") for t in r.resting],
            r.channel_names,
        )
        for r in dataset.subjects
    ]
    result = Dataset(subjects, dataset.label_map, dataset.task_kind)
    stage("write")
    save_archive(result, out)
    return resolved, f"preprocess: {len(subjects)} subjects at {fs / factor:g} Hz written to {out}"


def cmd_align(config, seed, threads, out, stage):
    resolved = {"input": config["input"], "reference": config.get("reference", "EI"),
                "shrink": config.get("shrink")}
    stage("load")
    dataset = load_archive(resolved["input"])
    stage("align")
    kind = resolved["reference"]
    subjects, refs, worst = [], {}, 0.0
    for r in dataset.subjects:
        source = r.resting if kind[1] == "R" else r.trials
        if not source:
            raise EEGAlignError(f"subject {r.subject}: no {'resting' if kind[1] == 'R' else 'task'} trials for {kind}")
        ref = build_reference(source, kind, resolved["shrink"])
        refs[r.subject] = ref.matrix
        aligned = [t.with_data(x) for t, x in zip(r.trials, ea_transform(r.X, ref))] if r.trials else []
        rest = [t.with_data(x) for t, x in zip(r.resting, ea_transform(r.X_resting, ref))] if r.resting else []
        subjects.append(SubjectRecord(r.subject, aligned, rest, r.channel_names))
        if kind == "EI" and aligned:
            X = np.stack([t.data for t in aligned])
            M = np.mean(X @ np.swapaxes(X, 1, 2), axis=0)
            worst = max(worst, float(np.linalg.norm(M - np.eye(len(M)))))
    stage("write")
    save_archive(Dataset(subjects, dataset.label_map, dataset.task_kind), out)
    np.savez(Path(out) / "references.npz", **refs)
    tail = f"; max |mean cov - I|_F = {worst:.2e}" if kind == "EI" else ""
    return resolved, f"align: {kind} references for {len(subjects)} subjects written to {out}{tail}"


def _pipelines(command: str, config: dict, task_kind: str) -> list:
    items = config.get("pipelines") or DEFAULT_PIPELINES[(command, task_kind)]
    specs = []
    for item in items:
        spec = PipelineSpec.from_name(item) if isinstance(item, str) else PipelineSpec(**item)
        specs.append(spec.resolved(task_kind))
    return specs


def _online_defaults(task_kind: str) -> dict:
    if task_kind == "ERP":
        return {"m": 80, "r": 10, "first_batch": 20, "repetitions": 30}
    return {"m": 40, "r": 4, "first_batch": None, "repetitions": 30}


def _cmd_eval(command, config, seed, threads, out, stage):
    stage("load")
    dataset, source = _load_source(config, seed)
    specs = _pipelines(command, config, dataset.task_kind)
    resolved = {**source, "pipelines": [s.to_dict() for s in specs]}
    if command == "eval-online":
        online = {**_online_defaults(dataset.task_kind), **config["online"]}
        cfg = OnlineConfig(online["m"], online["r"], online["first_batch"], online["repetitions"], seed)
        resolved["online"] = {**online, "first_batch": cfg.first_batch}
    stage("evaluate")
    reports = []
    for spec in specs:
        if command == "eval-online":
            reports.append(online_eval(dataset, spec, cfg, n_jobs=threads))
        else:
            reports.append(loso_eval(dataset, spec, seed=seed, n_jobs=threads))
    stage("write")
    _write_json(Path(out) / "report.json", {"reports": [r.to_dict() for r in reports]})
    write_csv(reports, Path(out) / "results.csv")
    metric = reports[0].metric
    what = "mean AUC" if command == "eval-online" else "mean"
    parts = ", ".join(f"{r.pipeline} {r.mean:.4f}" for r in reports)
    return resolved, f"{command}: {len(dataset.subjects)} subjects, {what} {metric}: {parts} -> {out}"


def cmd_eval_offline(config, seed, threads, out, stage):
    return _cmd_eval("eval-offline", config, seed, threads, out, stage)


def cmd_eval_online(config, seed, threads, out, stage):
    return _cmd_eval("eval-online", config, seed, threads, out, stage)


# ----------------------------------------------------------------------------- report


def markdown_table(header, rows, align=None) -> str:
    """Render rows as a column-aligned markdown table."""
    cells = [list(map(str, header))] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    align = align or ["l"] + ["r"] * (len(header) - 1)

    def line(row):
        return "| " + " | ".join(c.rjust(w) if a == "r" else c.ljust(w) for c, w, a in zip(row, widths, align)) + " |"

    rule = "| " + " | ".join(("-" * (w - 1) + ":") if a == "r" else "-" * w for w, a in zip(widths, align)) + " |"
    return "\n".join([line(cells[0]), rule] + [line(r) for r in cells[1:]]) + "\n"


def subject_scores(records, metric: str) -> dict:
    """{pipeline: {subject: score}} from flat result records.

    Offline rows give the metric directly; online rows are reduced to the
    mean over repetitions of each repetition's normalized AUC.
    """
    out = {}
    grouped = {}
    for r in records:
        grouped.setdefault(r["pipeline"], {}).setdefault(r["subject"], {}).setdefault(r["repetition"], {})[
            r["checkpoint"]] = r[metric]
    for pipe, subjects in grouped.items():
        out[pipe] = {}
        for sid, reps in subjects.items():
            vals = []
            for curve in reps.values():
                if None in curve:
                    vals.append(curve[None])
                else:
                    vals.append(auc_curve(curve) if len(curve) > 1 else next(iter(curve.values())))
            out[pipe][sid] = float(np.mean(vals))
    return out


def render_report(records, metric: str, timing=None, reference_pipeline=None) -> str:
    scores = subject_scores(records, metric)
    pipes = list(scores)
    subjects = list(dict.fromkeys(r["subject"] for r in records))
    online = any(r["checkpoint"] is not None for r in records)
    title = f"{'Mean AUC of ' if online else ''}{'balanced accuracy' if metric == 'bca' else 'accuracy'} (%)"
    rows = [[s] + [f"{100 * scores[p][s]:.2f}" for p in pipes] for s in subjects]
    rows.append(["Mean"] + [f"{100 * np.mean([scores[p][s] for s in subjects]):.2f}" for p in pipes])
    text = f"## {title}\n\n" + markdown_table(["Subject"] + pipes, rows)

    if len(pipes) > 1 and len(subjects) > 1:
        ref = reference_pipeline or pipes[-1]
        if ref not in scores:
            raise ConfigError(f"reference pipeline {ref!r} not in results {pipes}")
        trows = []
        for p in pipes:
            if p == ref:
                continue
            a = [scores[ref][s] for s in subjects]
            b = [scores[p][s] for s in subjects]
            try:
                res = paired_t_test(a, b)
                trows.append([f"{ref} vs {p}", f"{res.t:.4f}", f"{res.p:.4f}"])
            except EEGAlignError:
                trows.append([f"{ref} vs {p}", "n/a", "n/a"])
        text += "\n## Paired t-tests\n\n" + markdown_table(["Comparison", "t", "p"], trows)

    if timing:
        trow = []
        for pipe, per_subject in timing.items():
            stages = {}
            for sid, entry in per_subject.items():
                if sid == "auxiliary":
                    continue
                for name, v in entry.items():
                    stages.setdefault(name, []).append(v["seconds"])
            total = [sum(vals) for vals in zip(*stages.values())] if stages else []
            trow.append([pipe] + [f"{np.mean(stages.get(s, [0.0])):.4f}" for s in ("alignment", "fit", "predict")]
                        + [f"{np.mean(total) if total else 0.0:.4f}", f"{np.std(total) if total else 0.0:.4f}"])
        text += "\n## Computing time per subject (s)\n\n" + markdown_table(
            ["Pipeline", "alignment", "fit", "predict", "total mean", "total std"], trow)
    return text


def cmd_report(config, seed, threads, out, stage):
    resolved = {"input": config["input"], "metric": config.get("metric"),
                "reference_pipeline": config.get("reference_pipeline")}
    stage("load")
    src = Path(resolved["input"])
    csv_path = src / "results.csv" if src.is_dir() else src
    json_path = csv_path.with_name("report.json")
    records = read_csv(csv_path)
    if not records:
        raise ConfigError(f"{csv_path} holds no result rows")
    timing, task_kind = None, None
    if json_path.is_file():
        reports = json.loads(json_path.read_text(encoding="utf-8"))["reports"]
        timing = {r["pipeline"]: r.get("timing", {}) for r in reports}
        task_kind = reports[0]["task_kind"]
    metric = resolved["metric"] or ("bca" if task_kind == "ERP" else "accuracy")
    if any(r[metric] is None for r in records):
        raise ConfigError(f"metric {metric} is missing for some rows")
    resolved["metric"] = metric
    stage("report")
    text = render_report(records, metric, timing, resolved["reference_pipeline"])
    stage("write")
    (Path(out) / "report.md").write_text(text, encoding="utf-8")
    n_pipes = len({r["pipeline"] for r in records})
    return resolved, f"report: {n_pipes} pipelines x {len({r['subject'] for r in records})} subjects -> {out}/report.md"


HANDLERS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "align": cmd_align,
    "eval-offline": cmd_eval_offline,
    "eval-online": cmd_eval_online,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    """Argument errors become :class:`ConfigError` so they share the one-line format."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eegalign", description="EEG trial alignment experiments")
    parser.add_argument("--version", action="version", version=f"eegalign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "synth": "generate a synthetic MI or ERP archive",
        "preprocess": "band-pass filter, crop and downsample an archive",
        "align": "EA-align an archive and dump reference matrices",
        "eval-offline": "leave-one-subject-out evaluation",
        "eval-online": "simulated online calibration",
        "report": "render results as markdown tables",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads (overrides the config)")
    return parser


def _error_line(command, stage, exc) -> str:
    message = " ".join(str(exc).split())
    return (f"eegalign: error: command={command or '-'} stage={stage} type={type(exc).__name__} "
            f"message={json.dumps(message)}")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConfigError as exc:
        print(_error_line(None, "arguments", exc), file=sys.stderr)
        return 2
    stage = _Stage()
    try:
        config = _read_config(args.config)
        _validate(args.command, config)
        seed = _resolve_seed(args, config)
        threads = args.threads if args.threads is not None else config.get("threads", 1)
        if threads < 1:
            raise ConfigError(f"threads must be >= 1, got {threads}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        resolved, summary = HANDLERS[args.command](copy.deepcopy(config), seed, threads, out, stage)
        stage("write")
        _write_json(out / "run.json", {
            "command": args.command,
            "version": __version__,
            "seed": seed,
            "threads": threads,
            "config": resolved,
        })
    except ConfigError as exc:
        print(_error_line(args.command, stage.name, exc), file=sys.stderr)
        return 2
    except (EEGAlignError, OSError, ValueError, KeyError, np.linalg.LinAlgError) as exc:
        print(_error_line(args.command, stage.name, exc), file=sys.stderr)
        return 1
    print(summary)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
