"""Trial, subject and dataset containers.

All containers are immutable: sample arrays are stored as read-only float64
copies so they can be shared between threads without defensive copying.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvariantError

TASK = "task"
RESTING = "resting"
TASK_KINDS = ("MI", "ERP")


def _frozen_array(data) -> np.ndarray:
    arr = np.array(data, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trial:
    """One epoch of multichannel data.

    Parameters
    ----------
    data : ndarray, shape (n_channels, n_samples)
        Sample values.
    fs : float
        Sampling rate in Hz.
    label : int or None
        Class id, ``None`` when unlabeled.
    subject : str
        Owning subject id.
    kind : {"task", "resting"}
    """

    data: np.ndarray
    fs: float
    label: Optional[int] = None
    subject: str = ""
    kind: str = TASK

    def __post_init__(self):
        arr = _frozen_array(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvariantError(f"trial data must be a non-empty 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvariantError("trial data contains non-finite values")
        if not self.fs > 0:
            raise InvariantError(f"sampling rate must be positive, got {self.fs}")
        if self.kind not in (TASK, RESTING):
            raise InvariantError(f"unknown trial kind {self.kind!r}")
        if self.label is not None:
            label = int(self.label)
            if label < 0:
                raise InvariantError(f"labels are nonnegative integers, got {self.label}")
            object.__setattr__(self, "label", label)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "subject", str(self.subject))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def with_data(self, data) -> "Trial":
        """Copy of this trial carrying new sample values."""
        return replace(self, data=data)

    def unlabeled(self) -> "Trial":
        return replace(self, label=None)

    def __eq__(self, other):
        if not isinstance(other, Trial):
            return NotImplemented
        return (
            self.fs == other.fs
            and self.label == other.label
            and self.subject == other.subject
            and self.kind == other.kind
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None


@dataclass(frozen=True)
class SubjectRecord:
    """Ordered task and resting trials of one subject.

    When ``resting`` has the same length as ``trials``, ``resting[i]`` is the
    resting epoch that follows ``trials[i]``; the online protocol relies on
    that pairing.
    """

    subject: str
    trials: tuple = ()
    resting: tuple = ()
    channel_names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "subject", str(self.subject))
        object.__setattr__(self, "trials", tuple(self.trials))
        object.__setattr__(self, "resting", tuple(self.resting))
        object.__setattr__(self, "channel_names", tuple(str(c) for c in self.channel_names))
        everything = self.trials + self.resting
        if everything:
            shapes = {t.n_channels for t in everything}
            rates = {t.fs for t in everything}
            if len(shapes) > 1:
                raise InvariantError(f"subject {self.subject}: mixed channel counts {sorted(shapes)}")
            if len(rates) > 1:
                raise InvariantError(f"subject {self.subject}: mixed sampling rates {sorted(rates)}")
            if self.channel_names and len(self.channel_names) != everything[0].n_channels:
                raise InvariantError(
                    f"subject {self.subject}: {len(self.channel_names)} channel names "
                    f"for {everything[0].n_channels} channels"
                )

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    @property
    def X(self) -> np.ndarray:
        """Task trials stacked as (n_trials, n_channels, n_samples)."""
        return stack(self.trials)

    @property
    def y(self) -> np.ndarray:
        """Task labels; -1 marks unlabeled trials."""
        return np.array([-1 if t.label is None else t.label for t in self.trials], dtype=int)

    @property
    def X_resting(self) -> np.ndarray:
        return stack(self.resting)


@dataclass(frozen=True)
class Dataset:
    subjects: tuple
    label_map: dict = field(default_factory=dict)
    task_kind: str = "MI"

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        object.__setattr__(self, "label_map", {int(k): str(v) for k, v in self.label_map.items()})
        if self.task_kind not in TASK_KINDS:
            raise InvariantError(f"task kind must be one of {TASK_KINDS}, got {self.task_kind!r}")
        ids = [s.subject for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise InvariantError("duplicate subject ids")

    @property
    def fs(self) -> float:
        for s in self.subjects:
            for t in s.trials + s.resting:
                return t.fs
        raise InvariantError("dataset holds no trials")

    @property
    def subject_ids(self) -> list:
        return [s.subject for s in self.subjects]

    def subject(self, subject_id) -> SubjectRecord:
        for s in self.subjects:
            if s.subject == str(subject_id):
                return s
        raise KeyError(subject_id)

    def check_evaluable(self):
        """Raise unless the dataset supports cross-subject evaluation."""
        if len(self.subjects) < 2:
            raise InvariantError("cross-subject evaluation needs at least 2 subjects")
        labels = {t.label for s in self.subjects for t in s.trials if t.label is not None}
        if len(labels) < 2:
            raise InvariantError("cross-subject evaluation needs at least 2 classes")


def stack(trials: Sequence[Trial]) -> np.ndarray:
    """Stack trials into a 3-D array (n_trials, n_channels, n_samples)."""
    if len(trials) == 0:
        return np.empty((0, 0, 0))
    return np.stack([t.data for t in trials])


def as_array(trials) -> np.ndarray:
    """Accept a sequence of Trial or an array-like and return a float 3-D array."""
    if len(trials) == 0:
        return np.empty((0, 0, 0))
    if isinstance(trials[0], Trial):
        return stack(trials)
    arr = np.asarray(trials, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise InvariantError(f"expected (n_trials, n_channels, n_samples), got shape {arr.shape}")
    return arr
