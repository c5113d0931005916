"""Linearalgebra-Kernels."""
from .linalg import (
    EigenDecomposition,
    as_complex_matrix,
    herm_eig,
    hermitize,
    logdet_hpd,
    project_psd_unit_trace,
    project_simplex,
    spectral_norm_sq,
)

__all__ = [
    "EigenDecomposition",
    "as_complex_matrix",
    "hermitize",
    "herm_eig",
    "logdet_hpd",
    "spectral_norm_sq",
    "project_simplex",
    "project_psd_unit_trace",
]
