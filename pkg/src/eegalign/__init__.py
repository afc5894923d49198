"""Euclidean and Riemannian alignment of EEG trials for cross-subject decoding.

Subpackages and modules:

- :mod:`eegalign.data`, :mod:`eegalign.archive`, :mod:`eegalign.synth`: trial
  containers, the binary archive format and synthetic generators.
- :mod:`eegalign.spd`: matrix functions, geodesic distance and means on the
  SPD manifold.
- :mod:`eegalign.preprocess`: FIR band-pass design, causal filtering,
  epoching, decimation and ERP trial augmentation.
- :mod:`eegalign.alignment`: covariances, reference matrices, EA and RA.
- :mod:`eegalign.models`: MDRM, CSP, LDA, xDAWN, PCA and a linear SVM.
- :mod:`eegalign.harness`: offline and online protocols, metrics, statistics.
"""

__version__ = "0.1.0"

from .alignment import (
    ReferenceMatrix, build_reference, covariance, covariances, ea_align, incremental_reference, ra_align,
)
from .archive import load_archive, save_archive
from .data import Dataset, SubjectRecord, Trial
from .spd import arithmetic_mean, riemannian_distance, riemannian_mean
from .synth import SynthConfig, synth_erp, synth_mi

__all__ = [
    "__version__",
    "Trial", "SubjectRecord", "Dataset",
    "load_archive", "save_archive",
    "SynthConfig", "synth_mi", "synth_erp",
    "riemannian_distance", "riemannian_mean", "arithmetic_mean",
    "ReferenceMatrix", "covariance", "covariances", "build_reference", "incremental_reference",
    "ea_align", "ra_align",
]
