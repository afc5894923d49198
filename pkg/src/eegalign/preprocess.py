"""Band-pass filtering, epoching, decimation and ERP trial augmentation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import RESTING, TASK, Trial
from .exceptions import EpochBoundsError, InvariantError


@dataclass(frozen=True, eq=False)
class FIRFilter:
    coefficients: np.ndarray
    fs: float
    band: tuple

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def response(self, freqs) -> np.ndarray:
        """Complex frequency response at ``freqs`` (Hz)."""
        freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
        k = np.arange(len(self.coefficients))
        return np.exp(-2j * np.pi * np.outer(freqs / self.fs, k)) @ self.coefficients

    def amplitude(self, freqs) -> np.ndarray:
        return np.abs(self.response(freqs))


def design_fir_bandpass(order: int, band, fs: float) -> FIRFilter:
    """Windowed-sinc band-pass FIR with a Hamming window.

    The band edges are half-amplitude (-6 dB) points of the ideal response.
    Coefficients are scaled to unit gain at the centre of the pass band,
    ``(low + high) / 2``, which is the convention of MATLAB's ``fir1``.

    Parameters
    ----------
    order : int
        Filter order, even; the filter has ``order + 1`` taps.
    band : (float, float)
        Low and high cut-off in Hz, ``0 < low < high < fs / 2``.
    fs : float
        Sampling rate in Hz.
    """
    low, high = (float(b) for b in band)
    if order < 2 or order % 2:
        raise ValueError(f"order must be a positive even integer, got {order}")
    if not 0 < low < high < fs / 2:
        raise ValueError(f"invalid band {band} for fs={fs}: need 0 < low < high < fs/2")

    n = np.arange(order + 1) - order / 2
    f1, f2 = low / fs, high / fs
    ideal = 2 * f2 * np.sinc(2 * f2 * n) - 2 * f1 * np.sinc(2 * f1 * n)
    h = ideal * np.hamming(order + 1)
    centre = (f1 + f2) / 2
    h /= np.abs(np.sum(h * np.exp(-2j * np.pi * centre * np.arange(order + 1))))
    # exact linear phase despite rounding in the products above
    h = 0.5 * (h + h[::-1])
    return FIRFilter(h, float(fs), (low, high))


def filter_causal(signal, filt: FIRFilter, fs: float | None = None) -> np.ndarray:
    """Direct-form FIR filtering along the last axis with zero initial state.

    Each output ``y[n] = sum_k h[k] x[n-k]`` is accumulated in tap order, so
    it does not depend on how many samples follow ``n``: filtering a prefix
    gives exactly the prefix of the full output. ``fs`` is checked against
    the filter's design rate when given.
    """
    if fs is not None and not math.isclose(fs, filt.fs):
        raise ValueError(f"signal sampled at {fs} Hz but filter designed for {filt.fs} Hz")
    x = np.asarray(signal, dtype=np.float64)
    n = x.shape[-1]
    y = np.zeros_like(x)
    for k, h in enumerate(filt.coefficients[:n]):
        y[..., k:] += h * x[..., : n - k]
    return y


def filter_trial(trial: Trial, filt: FIRFilter) -> Trial:
    return trial.with_data(filter_causal(trial.data, filt, trial.fs))


@dataclass(frozen=True)
class EpochSpec:
    """Window ``[start, end)`` in seconds relative to each event."""

    start: float
    end: float
    kind: str = TASK

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"epoch window must have end > start, got [{self.start}, {self.end}]")
        if self.kind not in (TASK, RESTING):
            raise ValueError(f"unknown epoch kind {self.kind!r}")


MI_TASK_WINDOW = EpochSpec(0.5, 3.5)
MI_RESTING_WINDOW = EpochSpec(4.25, 5.25, RESTING)
ERP_WINDOW = EpochSpec(0.0, 0.7)


def _index(x: float) -> int:
    # round away representation error (e.g. 250 * 4.6 = 1149.9999...) before flooring
    return int(math.floor(round(x, 9)))


def epoch_bounds(event_time: float, spec: EpochSpec, fs: float) -> tuple:
    """Half-open sample range ``[floor(fs*(t+start)), floor(fs*(t+end)))``."""
    return _index(fs * (event_time + spec.start)), _index(fs * (event_time + spec.end))


def epoch(recording, fs: float, events, spec: EpochSpec, subject: str = "",
          on_error: str = "warn") -> list:
    """Cut one trial per event out of a continuous recording.

    Parameters
    ----------
    recording : ndarray, shape (n_channels, n_samples)
    fs : float
    events : sequence of (time_s, label)
        ``label`` may be None.
    spec : EpochSpec
    on_error : {"warn", "raise", "ignore"}
        Out-of-bounds events are always skipped; with ``"raise"`` an
        :class:`EpochBoundsError` listing them is raised after all events
        have been examined.
    """
    recording = np.asarray(recording, dtype=np.float64)
    if recording.ndim != 2:
        raise InvariantError(f"recording must be (n_channels, n_samples), got {recording.shape}")
    n_total = recording.shape[1]
    trials, bad = [], []
    for idx, (t, label) in enumerate(events):
        a, b = epoch_bounds(t, spec, fs)
        if a < 0 or b > n_total or b <= a:
            bad.append((idx, t, a, b))
            continue
        trials.append(Trial(recording[:, a:b], fs, label, subject, spec.kind))
    if bad:
        msg = "; ".join(f"event {i} at {t:g}s -> samples [{a}, {b}) outside [0, {n_total})" for i, t, a, b in bad)
        if on_error == "raise":
            err = EpochBoundsError(msg)
            err.bad_events = [i for i, *_ in bad]
            err.trials = trials
            raise err
        if on_error == "warn":
            warnings.warn(msg, stacklevel=2)
    return trials


def downsample(trial: Trial, factor: int) -> Trial:
    """Keep every ``factor``-th sample starting at index 0; no anti-alias filter."""
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"downsampling factor must be >= 1, got {factor}")
    if factor == 1:
        return trial
    return Trial(trial.data[:, ::factor], trial.fs / factor, trial.label, trial.subject, trial.kind)


def erp_template(trials: Sequence[Trial]) -> Trial:
    """Elementwise mean of a set of trials."""
    if len(trials) == 0:
        raise InvariantError("ERP template of an empty trial set")
    shapes = {t.data.shape for t in trials}
    if len(shapes) != 1:
        raise InvariantError(f"trials have differing shapes {sorted(shapes)}")
    data = np.mean([t.data for t in trials], axis=0)
    first = trials[0]
    return Trial(data, first.fs, None, first.subject, first.kind)


def augment_erp(trial: Trial, template: Trial) -> Trial:
    """Stack ``template`` above ``trial``, doubling the channel count."""
    if trial.data.shape != template.data.shape:
        raise InvariantError(f"trial {trial.data.shape} and template {template.data.shape} differ in shape")
    return trial.with_data(np.vstack([template.data, trial.data]))


def augment_array(X, template) -> np.ndarray:
    """Array form of :func:`augment_erp` for a stack of trials."""
    X = np.asarray(X, dtype=np.float64)
    template = np.asarray(template, dtype=np.float64)
    if X.shape[1:] != template.shape:
        raise InvariantError(f"trials {X.shape[1:]} and template {template.shape} differ in shape")
    return np.concatenate([np.broadcast_to(template, X.shape), X], axis=1)
