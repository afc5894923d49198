"""Evaluation reports and their JSON / CSV serializations."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .curves import auc_curve

CSV_FIELDS = ("pipeline", "subject", "repetition", "checkpoint", "n0", "accuracy", "bca", "nonconverged_means")


def primary_metric(task_kind: str) -> str:
    """Accuracy for MI, balanced accuracy for the imbalanced ERP task."""
    return "bca" if task_kind == "ERP" else "accuracy"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class EvalReport:
    """Results of one pipeline under one protocol.

    ``rows`` holds one record per (subject, repetition, checkpoint); offline
    runs use repetition 0 and no checkpoint. Everything else in the report
    is derived from the rows.
    """

    mode: str
    pipeline: str
    spec: dict
    task_kind: str
    subjects: list
    rows: list
    config: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def metric(self) -> str:
        return primary_metric(self.task_kind)

    def _rows_of(self, subject) -> list:
        return [r for r in self.rows if r["subject"] == subject]

    def curve(self, subject, metric: Optional[str] = None) -> dict:
        """Checkpoint -> metric averaged over repetitions (online runs)."""
        metric = metric or self.metric
        by_k = {}
        for r in self._rows_of(subject):
            by_k.setdefault(r["checkpoint"], []).append(r[metric])
        return {k: float(np.mean(v)) for k, v in sorted(by_k.items())}

    def repetition_aucs(self, subject, metric: Optional[str] = None) -> list:
        metric = metric or self.metric
        reps = {}
        for r in self._rows_of(subject):
            reps.setdefault(r["repetition"], {})[r["checkpoint"]] = r[metric]
        return [auc_curve(c) if len(c) > 1 else float(next(iter(c.values()))) for _, c in sorted(reps.items())]

    def score(self, subject, metric: Optional[str] = None) -> float:
        """Offline: the subject's metric. Online: mean AUC over repetitions."""
        metric = metric or self.metric
        if self.mode == "online":
            return float(np.mean(self.repetition_aucs(subject, metric)))
        (row,) = self._rows_of(subject)
        return row[metric]

    def scores(self, metric: Optional[str] = None) -> dict:
        return {s: self.score(s, metric) for s in self.subjects}

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.scores().values())))

    def to_dict(self, include_timing: bool = True) -> dict:
        subjects = []
        for s in self.subjects:
            entry = {"id": s, "score": self.score(s)}
            if self.mode == "online":
                entry["curve"] = {str(k): v for k, v in self.curve(s).items()}
                entry["auc_per_repetition"] = self.repetition_aucs(s)
            else:
                (row,) = self._rows_of(s)
                entry.update(accuracy=row["accuracy"], bca=row["bca"])
            subjects.append(entry)
        out = {
            "mode": self.mode,
            "pipeline": self.pipeline,
            "spec": self.spec,
            "task_kind": self.task_kind,
            "metric": self.metric,
            "config": self.config,
            "subjects": subjects,
            "mean": self.mean,
            "rows": self.rows,
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def to_json(self, path=None, include_timing: bool = True) -> str:
        text = json.dumps(self.to_dict(include_timing), indent=2, allow_nan=True) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def csv_rows(self) -> list:
        return [{k: _fmt(self.pipeline if k == "pipeline" else r.get(k)) for k in CSV_FIELDS} for r in self.rows]

    def to_csv(self, path=None) -> str:
        return write_csv([self], path)


def write_csv(reports, path=None) -> str:
    """One flat CSV for several reports, one row per subject x repetition x checkpoint."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerows(rep.csv_rows())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_csv(path) -> list:
    """Parse a results CSV back into typed records."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out.append({
                "pipeline": r["pipeline"],
                "subject": r["subject"],
                "repetition": int(r["repetition"]),
                "checkpoint": int(r["checkpoint"]) if r["checkpoint"] else None,
                "n0": int(r["n0"]) if r["n0"] else None,
                "accuracy": float(r["accuracy"]),
                "bca": float(r["bca"]) if r["bca"] else None,
                "nonconverged_means": int(r.get("nonconverged_means") or 0),
            })
    return out
