"""Bit-exact dataset archive.

Layout of an archive directory::

    manifest.json          schema_version, task_kind, fs, channel_names,
                           label_map, subjects[{id, trials_file, resting_file}]
    <subject>_trials.bin   task trials
    <subject>_resting.bin  resting trials

Each binary file is ``b"EEGA"``, then little-endian u32 version, n_trials,
n_channels, n_samples, then n_trials i32 labels (-1 = unlabeled), then the
samples as float32 in trial-major, channel-major order.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .data import RESTING, TASK, Dataset, SubjectRecord, Trial
from .exceptions import ArchiveError, InvariantError

MAGIC = b"EEGA"
VERSION = 1
SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
_HEADER = struct.Struct("<4sIIII")


def encode_trials(trials, n_channels: int) -> bytes:
    """Serialize a trial list to the binary record format."""
    n_trials = len(trials)
    n_samples = trials[0].n_samples if n_trials else 0
    labels = np.array([-1 if t.label is None else t.label for t in trials], dtype="<i4")
    if n_trials:
        data = np.stack([t.data for t in trials])
        if data.shape[1:] != (n_channels, n_samples):
            raise InvariantError("all trials in one file must share (n_channels, n_samples)")
        if not np.all(np.isfinite(data)):
            raise InvariantError("refusing to write non-finite samples")
        payload = data.astype("<f4").tobytes(order="C")
    else:
        payload = b""
    return _HEADER.pack(MAGIC, VERSION, n_trials, n_channels, n_samples) + labels.tobytes() + payload


def decode_trials(buf: bytes, fs: float, subject: str, kind: str, source="<bytes>") -> list:
    """Parse one binary record; inverse of :func:`encode_trials`."""
    if len(buf) < _HEADER.size:
        raise ArchiveError(f"{source}: truncated header")
    magic, version, n_trials, n_channels, n_samples = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ArchiveError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ArchiveError(f"{source}: unsupported version {version}")
    expected = _HEADER.size + 4 * n_trials + 4 * n_trials * n_channels * n_samples
    if len(buf) != expected:
        raise ArchiveError(
            f"{source}: header declares {n_trials} trials of {n_channels}x{n_samples} "
            f"({expected} bytes) but file holds {len(buf)} bytes (truncated or padded)"
        )
    offset = _HEADER.size
    labels = np.frombuffer(buf, dtype="<i4", count=n_trials, offset=offset)
    offset += 4 * n_trials
    data = np.frombuffer(buf, dtype="<f4", count=n_trials * n_channels * n_samples, offset=offset)
    data = data.astype(np.float64).reshape(n_trials, n_channels, n_samples)
    if not np.all(np.isfinite(data)):
        raise ArchiveError(f"{source}: non-finite sample values")
    if np.any(labels < -1):
        raise ArchiveError(f"{source}: invalid label below -1")
    return [
        Trial(data[i], fs, None if labels[i] < 0 else int(labels[i]), subject, kind)
        for i in range(n_trials)
    ]


def _file_stem(subject_id: str) -> str:
    keep = "".join(c if c.isalnum() or c in "-_" else "_" for c in subject_id)
    return keep or "subject"


def save_archive(dataset: Dataset, path) -> None:
    """Write ``dataset`` to the directory ``path`` (created if needed).

    Values are written as float32; data already representable in float32 (the
    synthetic generators guarantee this) round-trips exactly.
    """
    path = Path(path)
    fs = dataset.fs
    channel_names = _common_channel_names(dataset)
    n_channels = len(channel_names)

    blobs = {}
    entries = []
    for record in dataset.subjects:
        stem = _file_stem(record.subject)
        trials_file, resting_file = f"{stem}_trials.bin", f"{stem}_resting.bin"
        if trials_file in blobs:
            raise InvariantError(f"subject ids collide on file name {trials_file}")
        for t in record.trials + record.resting:
            if t.fs != fs:
                raise InvariantError(f"subject {record.subject}: sampling rate {t.fs} != {fs}")
        blobs[trials_file] = encode_trials(record.trials, n_channels)
        blobs[resting_file] = encode_trials(record.resting, n_channels)
        entries.append({"id": record.subject, "trials_file": trials_file, "resting_file": resting_file})

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "task_kind": dataset.task_kind,
        "fs": fs,
        "channel_names": list(channel_names),
        "label_map": {str(k): v for k, v in sorted(dataset.label_map.items())},
        "subjects": entries,
    }
    path.mkdir(parents=True, exist_ok=True)
    for name, blob in blobs.items():
        (path / name).write_bytes(blob)
    text = json.dumps(manifest, indent=2, ensure_ascii=False) + "\n"
    (path / MANIFEST).write_text(text, encoding="utf-8")


def load_archive(path) -> Dataset:
    """Read an archive directory written by :func:`save_archive`."""
    path = Path(path)
    manifest_path = path / MANIFEST
    if not manifest_path.is_file():
        raise ArchiveError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"{manifest_path}: invalid JSON ({exc})") from exc
    required = ("schema_version", "task_kind", "fs", "channel_names", "label_map", "subjects")
    missing = [k for k in required if k not in manifest]
    if missing:
        raise ArchiveError(f"{manifest_path}: missing keys {missing}")
    if manifest["schema_version"] != SCHEMA_VERSION:
        raise ArchiveError(f"unsupported schema_version {manifest['schema_version']}")

    fs = float(manifest["fs"])
    channel_names = manifest["channel_names"]
    subjects = []
    for entry in manifest["subjects"]:
        sid = str(entry["id"])
        parts = {}
        for key, kind in (("trials_file", TASK), ("resting_file", RESTING)):
            file = path / entry[key]
            if not file.is_file():
                raise ArchiveError(f"missing data file {file}")
            parts[kind] = decode_trials(file.read_bytes(), fs, sid, kind, source=str(file))
            for t in parts[kind]:
                if t.n_channels != len(channel_names):
                    raise ArchiveError(f"{file}: {t.n_channels} channels, manifest lists {len(channel_names)}")
        subjects.append(SubjectRecord(sid, parts[TASK], parts[RESTING], channel_names))
    try:
        return Dataset(subjects, {int(k): v for k, v in manifest["label_map"].items()}, manifest["task_kind"])
    except InvariantError as exc:
        raise ArchiveError(f"{manifest_path}: {exc}") from exc


def _common_channel_names(dataset: Dataset) -> tuple:
    names = None
    n_channels = None
    for record in dataset.subjects:
        for t in record.trials + record.resting:
            n_channels = t.n_channels
            break
        if record.channel_names:
            if names is not None and record.channel_names != names:
                raise InvariantError("subjects disagree on channel names")
            names = record.channel_names
    if names is None:
        if n_channels is None:
            raise InvariantError("dataset holds no trials")
        names = tuple(f"ch{i + 1}" for i in range(n_channels))
    return names


def archive_files(path) -> list:
    """Sorted list of files that make up an archive (for hashing/comparison)."""
    path = Path(path)
    return sorted(p for p in path.iterdir() if p.is_file() and (p.name == MANIFEST or p.suffix == ".bin"))


__all__ = ["save_archive", "load_archive", "encode_trials", "decode_trials", "archive_files", "MAGIC", "VERSION"]
