"""Synthetic MI and ERP datasets with controllable subject shift.

Every subject ``s`` observes latent sources through its own symmetric
positive-definite mixing ``A_s = Q diag(sigma) Q^T``, where ``Q`` is the
QR-orthogonalized factor of a Gaussian matrix and ``sigma`` spans
``[1, mixing_condition]`` log-uniformly with both ends pinned, so
``cond(A_s) == mixing_condition`` exactly. All sample values are rounded to
float32 so a dataset survives an archive round trip bit-for-bit.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import RESTING, TASK, Dataset, SubjectRecord, Trial

MI_LABELS = {0: "class_1", 1: "class_2"}
ERP_LABELS = {0: "non-target", 1: "target"}
# variance of the two task sources: class 1 boosts source 1 and damps source 2,
# class 2 the reverse, so the pooled latent covariance stays at the resting level
MI_BOOST = 1.8
MI_DAMP = 0.2
ERP_NONTARGET_RATIO = 9


@dataclass(frozen=True)
class SynthConfig:
    n_subjects: int = 8
    n_trials_per_class: int = 60
    n_channels: int = 8
    n_samples: int = 128
    fs: float = 128.0
    noise_scale: float = 0.5
    mixing_condition: float = 5.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_subjects", "n_trials_per_class", "n_channels", "n_samples"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        if not self.noise_scale >= 0:
            raise ValueError("noise_scale must be >= 0")
        if not self.mixing_condition >= 1:
            raise ValueError("mixing_condition must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


def mixing_matrix(rng: np.random.Generator, n: int, condition: float) -> np.ndarray:
    """Random SPD mixing matrix with condition number exactly ``condition``."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if n == 1:
        sigma = np.ones(1)
    else:
        sigma = np.exp(np.concatenate([[0.0], rng.uniform(0, np.log(condition), n - 2), [np.log(condition)]]))
    return (Q * sigma) @ Q.T


def _f32(x: np.ndarray) -> np.ndarray:
    return x.astype(np.float32).astype(np.float64)


def _channel_names(n: int) -> tuple:
    return tuple(f"ch{i + 1}" for i in range(n))


def _interleaved_labels(rng, counts: dict) -> np.ndarray:
    labels = np.concatenate([np.full(n, c) for c, n in sorted(counts.items())])
    return rng.permutation(labels)


def synth_mi(config: SynthConfig, return_mixing: bool = False):
    """Two-class motor-imagery stand-in.

    Latent sources are white Gaussian with unit variance except for sources
    1 and 2, whose variances depend on the class. Each task trial is followed
    by a resting epoch in which every source sits at unit variance.

    With ``return_mixing=True`` also returns ``{subject_id: A_s}``.
    """
    rng = np.random.default_rng(config.seed)
    C, T = config.n_channels, config.n_samples
    profiles = {c: np.ones(C) for c in MI_LABELS}
    if C >= 2:
        profiles[0][:2] = (MI_BOOST, MI_DAMP)
        profiles[1][:2] = (MI_DAMP, MI_BOOST)
    else:
        profiles[0][0], profiles[1][0] = MI_BOOST, MI_DAMP

    subjects, mixing = [], {}
    for s in range(config.n_subjects):
        sid = f"S{s + 1:02d}"
        A = mixing[sid] = mixing_matrix(rng, C, config.mixing_condition)
        labels = _interleaved_labels(rng, {c: config.n_trials_per_class for c in MI_LABELS})
        trials, resting = [], []
        for label in labels:
            latent = np.sqrt(profiles[label])[:, None] * rng.standard_normal((C, T))
            x = A @ latent + config.noise_scale * rng.standard_normal((C, T))
            trials.append(Trial(_f32(x), config.fs, int(label), sid, TASK))
            rest = A @ rng.standard_normal((C, T)) + config.noise_scale * rng.standard_normal((C, T))
            resting.append(Trial(_f32(rest), config.fs, None, sid, RESTING))
        subjects.append(SubjectRecord(sid, trials, resting, _channel_names(C)))
    dataset = Dataset(subjects, MI_LABELS, "MI")
    return (dataset, mixing) if return_mixing else dataset


def erp_waveform(n_samples: int, fs: float) -> np.ndarray:
    """Two latent evoked components: a negativity near 200 ms and a positivity near 300 ms."""
    t = np.arange(n_samples) / fs
    n2 = -np.exp(-0.5 * ((t - 0.20) / 0.03) ** 2)
    p3 = 2.0 * np.exp(-0.5 * ((t - 0.30) / 0.06) ** 2)
    return np.vstack([p3 + 0.5 * n2, n2])


def erp_latent_template(n_channels: int, n_samples: int, fs: float) -> np.ndarray:
    """Evoked template in source space, shared by all subjects."""
    waves = erp_waveform(n_samples, fs)
    weights = np.zeros((n_channels, 2))
    k = min(n_channels, 3)
    weights[:k, 0] = [1.0, 0.7, 0.4][:k]
    if n_channels > 1:
        weights[1 : 1 + min(n_channels - 1, 2), 1] = [0.8, 0.5][: min(n_channels - 1, 2)]
    return weights @ waves


def synth_erp(config: SynthConfig, return_mixing: bool = False):
    """Target / non-target ERP stand-in with a 1:9 class ratio.

    ``n_trials_per_class`` is the number of target trials per subject; there
    are nine times as many non-targets. Targets are ``A_s (template + noise)``
    and non-targets ``A_s noise`` with white latent noise of standard
    deviation ``noise_scale``. No resting epochs are generated.
    With ``return_mixing=True`` also returns ``{subject_id: A_s}``.
    """
    rng = np.random.default_rng(config.seed)
    C, T = config.n_channels, config.n_samples
    template = erp_latent_template(C, T, config.fs)
    n_target = config.n_trials_per_class
    counts = {0: ERP_NONTARGET_RATIO * n_target, 1: n_target}

    subjects, mixing = [], {}
    for s in range(config.n_subjects):
        sid = f"S{s + 1:02d}"
        A = mixing[sid] = mixing_matrix(rng, C, config.mixing_condition)
        labels = _interleaved_labels(rng, counts)
        trials = []
        for label in labels:
            latent = config.noise_scale * rng.standard_normal((C, T))
            if label == 1:
                latent = latent + template
            trials.append(Trial(_f32(A @ latent), config.fs, int(label), sid, TASK))
        subjects.append(SubjectRecord(sid, trials, (), _channel_names(C)))
    dataset = Dataset(subjects, ERP_LABELS, "ERP")
    return (dataset, mixing) if return_mixing else dataset
