"""Declarative pipelines: an alignment step followed by a model chain.

A pipeline is run in two phases. :func:`build_transform` looks at one
subject's data and returns a :class:`SubjectTransform` that maps that
subject's raw trials into the representation the model chain consumes
(aligned trials, or aligned covariance matrices for MDRM). :func:`fit_chain`
then trains the chain on the pooled representations of several subjects.
"""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from ..alignment import REFERENCE_KINDS, ReferenceMatrix, build_reference, covariances, ea_transform, ra_align
from ..alignment import reference_from_covariances
from ..exceptions import PipelineError
from ..models import (
    csp_features, csp_fit, lda_fit, lda_predict, mdrm_fit, mdrm_predict, pca_apply, pca_fit,
    select_C, svm_fit, svm_predict, xdawn_apply, xdawn_fit,
)
from ..preprocess import augment_array
from .timing import StageTimer

ALIGNMENTS = ("none", "EA", "RA")
MODELS = ("MDRM", "CSP+LDA", "xDAWN+PCA+SVM", "PCA+SVM")
TARGET = 1
NON_TARGET = 0
# An augmented ERP trial repeats the template in its top half; with few
# labeled targets the template is close to some trials and the covariance
# nearly singular, so augmented covariances are shrunk unless told otherwise.
AUGMENTED_SHRINK = 0.01

_SHORT = {"MDRM": "MDRM", "CSP+LDA": "CSP-LDA", "xDAWN+PCA+SVM": "xDAWN-SVM", "PCA+SVM": "SVM"}
_FROM_SHORT = {v.lower(): k for k, v in _SHORT.items()}


def default_reference(alignment: str, task_kind: str) -> Optional[str]:
    if alignment == "EA":
        return "EI"
    if alignment == "RA":
        return "RR" if task_kind == "MI" else "RI"
    return None


@dataclass(frozen=True)
class PipelineSpec:
    """Alignment choice, model chain and hyperparameters.

    ``reference`` selects the reference-matrix variant (RR, ER, RI, EI) and
    defaults to EI for EA and RR for RA. For ERP data the *I kinds used by
    RA take the non-target trials, as the covariance of an augmented target
    trial carries the evoked response. ``C=None`` selects the SVM trade-off
    by nested cross-validation.
    """

    model: str
    alignment: str = "none"
    reference: Optional[str] = None
    n_filters: int = 6
    n_components: int = 4
    n_features: int = 20
    C: Optional[float] = None
    shrink: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise PipelineError(f"unknown model chain {self.model!r}; choose from {MODELS}")
        if self.alignment not in ALIGNMENTS:
            raise PipelineError(f"unknown alignment {self.alignment!r}; choose from {ALIGNMENTS}")
        if self.alignment == "RA" and self.model != "MDRM":
            raise PipelineError(f"RA outputs covariance matrices and only pairs with MDRM, not {self.model}")
        if self.reference is not None:
            if self.alignment == "none":
                raise PipelineError("a reference kind needs an alignment step")
            if self.reference not in REFERENCE_KINDS:
                raise PipelineError(f"unknown reference kind {self.reference!r}; choose from {REFERENCE_KINDS}")
        if self.n_filters < 2 or self.n_filters % 2:
            raise PipelineError(f"n_filters must be a positive even integer, got {self.n_filters}")
        if self.n_components < 1 or self.n_features < 1:
            raise PipelineError("n_components and n_features must be >= 1")
        if self.C is not None and not self.C > 0:
            raise PipelineError(f"C must be positive, got {self.C}")
        if self.shrink is not None and not 0 <= self.shrink < 1:
            raise PipelineError(f"shrinkage must lie in [0, 1), got {self.shrink}")

    @classmethod
    def from_name(cls, name: str, **overrides) -> "PipelineSpec":
        """Parse names such as ``EA-CSP-LDA``, ``RA-MDRM``, ``xDAWN-SVM`` or ``ER-CSP-LDA``.

        A reference-kind prefix (RR, ER, RI, EI) implies RA for MDRM and EA
        otherwise.
        """
        m = re.fullmatch(r"(?:(none|EA|RA|RR|ER|RI|EI)-)?(.+)", name.strip())
        prefix, rest = m.group(1), m.group(2)
        model = _FROM_SHORT.get(rest.lower(), rest if rest in MODELS else None)
        if model is None:
            raise PipelineError(f"cannot parse pipeline name {name!r}")
        alignment, reference = "none", None
        if prefix in ("EA", "RA"):
            alignment = prefix
        elif prefix in REFERENCE_KINDS:
            alignment, reference = ("RA" if model == "MDRM" else "EA"), prefix
        return cls(model=model, alignment=alignment, reference=reference, **overrides)

    def resolved(self, task_kind: str) -> "PipelineSpec":
        """Copy with the reference kind and display name filled in."""
        ref = self.reference or default_reference(self.alignment, task_kind)
        spec = replace(self, reference=ref)
        if spec.name is None:
            spec = replace(spec, name=spec.label(task_kind))
        return spec

    def label(self, task_kind: str = "MI") -> str:
        base = _SHORT[self.model]
        if self.alignment == "none":
            return base
        ref = self.reference or default_reference(self.alignment, task_kind)
        if ref == default_reference(self.alignment, task_kind):
            return f"{self.alignment}-{base}"
        return f"{ref}-{base}"

    def covariance_shrink(self, task_kind: str) -> Optional[float]:
        """Shrinkage for the covariances the MDRM chain consumes."""
        if self.shrink is None and task_kind == "ERP" and self.model == "MDRM":
            return AUGMENTED_SHRINK
        return self.shrink

    def uses_labels(self, task_kind: str) -> bool:
        """Whether building a subject's transform needs that subject's labels."""
        return task_kind == "ERP" and self.model == "MDRM"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SubjectTransform:
    """Maps raw trials of one subject into model input."""

    spec: PipelineSpec
    task_kind: str
    ea_ref: Optional[ReferenceMatrix] = None
    ra_ref: Optional[ReferenceMatrix] = None
    template: Optional[np.ndarray] = None

    @property
    def nonconverged_means(self) -> int:
        info = self.ra_ref.mean_info if self.ra_ref is not None else None
        return int(info is not None and not info.converged)

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.ea_ref is not None:
            X = ea_transform(X, self.ea_ref)
        if self.spec.model != "MDRM":
            return X
        if self.template is not None:
            X = augment_array(X, self.template)
        C = covariances(X, self.spec.covariance_shrink(self.task_kind))
        return C if self.ra_ref is None else ra_align(C, self.ra_ref)


def _reference_trials(kind: str, X, X_rest, what: str):
    if kind[1] == "R":
        if X_rest is None or len(X_rest) == 0:
            raise PipelineError(f"{kind} reference needs resting trials, none available for {what}")
        return X_rest
    if len(X) == 0:
        raise PipelineError(f"{kind} reference needs task trials, none available for {what}")
    return X


def build_transform(spec: PipelineSpec, task_kind: str, X, y=None, X_rest=None,
                    fallback_template=None, subject: str = "", timer: StageTimer | None = None) -> SubjectTransform:
    """Estimate one subject's alignment state from the trials it may use.

    Parameters
    ----------
    X : ndarray (n, C, T)
        Task trials available for estimating the reference.
    y : ndarray or None
        Their labels (-1 for unknown). Only consumed when
        ``spec.uses_labels(task_kind)``: ERP MDRM needs labeled targets for
        the augmentation template and RA needs labeled non-targets.
    X_rest : ndarray or None
        Resting trials, for RR/ER references.
    fallback_template : ndarray or None
        Template used when no labeled target is available.
    """
    spec = spec.resolved(task_kind)
    timer = timer or StageTimer()
    what = f"subject {subject}" if subject else "the subject"
    X = np.asarray(X, dtype=np.float64)
    with timer.stage("alignment"):
        ea_ref = None
        if spec.alignment == "EA":
            ea_ref = build_reference(_reference_trials(spec.reference, X, X_rest, what), spec.reference, spec.shrink)
            X = ea_transform(X, ea_ref)
            if X_rest is not None and len(X_rest):
                X_rest = ea_transform(X_rest, ea_ref)
        if spec.model != "MDRM":
            return SubjectTransform(spec, task_kind, ea_ref)

        template = None
        if task_kind == "ERP":
            labels = np.full(len(X), -1) if y is None else np.asarray(y)
            targets = X[labels == TARGET]
            if len(targets):
                template = targets.mean(axis=0)
            elif fallback_template is not None:
                template = np.asarray(fallback_template, dtype=np.float64)
            else:
                raise PipelineError(f"ERP MDRM needs labeled target trials from {what} to build the template")
        ra_ref = None
        if spec.alignment == "RA":
            if task_kind == "ERP":
                if spec.reference[1] == "R":
                    raise PipelineError("ERP data has no resting trials; use an RI or EI reference")
                source = X[labels == NON_TARGET]
                if len(source) == 0:
                    raise PipelineError(f"RA on ERP data needs labeled non-target trials from {what}")
                source = augment_array(source, template)
            else:
                source = _reference_trials(spec.reference, X, X_rest, what)
            shrink = spec.covariance_shrink(task_kind)
            ra_ref = reference_from_covariances(covariances(source, shrink), spec.reference, shrink, warn=False)
        return SubjectTransform(spec, task_kind, ea_ref, ra_ref, template)


@dataclass(frozen=True, eq=False)
class FittedChain:
    spec: PipelineSpec
    parts: dict = field(default_factory=dict)

    @property
    def nonconverged_means(self) -> int:
        if "mdrm" not in self.parts:
            return 0
        return sum(not r.converged for r in self.parts["mdrm"].mean_info)

    def predict(self, R) -> np.ndarray:
        p = self.parts
        model = self.spec.model
        if model == "MDRM":
            return np.atleast_1d(mdrm_predict(R, p["mdrm"]))
        if model == "CSP+LDA":
            return np.atleast_1d(lda_predict(csp_features(R, p["csp"]), p["lda"]))
        F = _vectorize(xdawn_apply(R, p["xdawn"]) if model == "xDAWN+PCA+SVM" else R)
        return np.atleast_1d(svm_predict(pca_apply(F, p["pca"]), p["svm"]))


def _vectorize(X) -> np.ndarray:
    X = np.asarray(X)
    return X.reshape(len(X), -1)


def fit_chain(spec: PipelineSpec, R, y, seed: int = 0) -> FittedChain:
    """Train the model chain of ``spec`` on representations ``R`` with labels ``y``.

    Riemannian means that stop at their iteration cap do not warn here; the
    count is exposed as ``nonconverged_means`` on the fitted chain and on
    each :class:`SubjectTransform` so the protocols can report it.
    """
    y = np.asarray(y)
    model = spec.model
    if model == "MDRM":
        return FittedChain(spec, {"mdrm": mdrm_fit(R, y, warn=False)})
    if model == "CSP+LDA":
        csp = csp_fit(R, y, spec.n_filters, spec.shrink)
        return FittedChain(spec, {"csp": csp, "lda": lda_fit(csp_features(R, csp), y)})
    parts = {}
    if model == "xDAWN+PCA+SVM":
        parts["xdawn"] = xdawn_fit(R, y, spec.n_components, target=int(np.max(y)))
        R = xdawn_apply(R, parts["xdawn"])
    parts["pca"] = pca_fit(_vectorize(R), spec.n_features)
    F = pca_apply(_vectorize(R), parts["pca"])
    C = spec.C if spec.C is not None else select_C(F, y, seed=seed)
    parts["svm"] = svm_fit(F, y, C)
    return FittedChain(spec, parts)
