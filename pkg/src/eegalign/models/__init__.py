"""Classifiers and feature extractors used by the evaluation pipelines."""
from .csp import CSPFilters, csp_features, csp_fit, csp_from_covariances
from .lda import LDAModel, lda_fit, lda_predict
from .mdrm import MDRMModel, mdrm_distances, mdrm_fit, mdrm_predict
from .pca import PCAModel, pca_apply, pca_fit
from .svm import C_GRID, CSelection, LinearMarginModel, select_C, svm_fit, svm_predict
from .xdawn import XDawnFilters, xdawn_apply, xdawn_fit

__all__ = [
    "CSPFilters", "csp_fit", "csp_features", "csp_from_covariances",
    "LDAModel", "lda_fit", "lda_predict",
    "MDRMModel", "mdrm_fit", "mdrm_predict", "mdrm_distances",
    "PCAModel", "pca_fit", "pca_apply",
    "C_GRID", "CSelection", "LinearMarginModel", "svm_fit", "svm_predict", "select_C",
    "XDawnFilters", "xdawn_fit", "xdawn_apply",
]
