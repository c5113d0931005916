"""
Dichte komplex-hermitesche Linearalgebra.

Reine Funktionen ohne gemeinsamen Zustand, durchgehend in doppelter
Genauigkeit. Vor jeder Faktorisierung wird (A + A^H)/2 gebildet, um
Rundungsfehler aufzufangen.
"""
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.linalg import LinAlgError, eigh, eigvalsh, get_lapack_funcs

from ..exceptions import InputValidationError, NumericalError
from ..models.impairments import Covariance

HERMITIAN_RTOL = 1e-12
ORTHONORMALITY_TOLERANCE = 1e-10

ComplexMatrix = NDArray[np.complex128]


class EigenDecomposition(BaseModel):
    """Eigenwerte (absteigend) und orthonormale Eigenvektoren einer hermiteschen Matrix."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray = Field(..., description="Reell, absteigend sortiert")
    eigenvectors: np.ndarray = Field(..., description="Spalten orthonormal")

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def _validate_eigenvalues(cls, value: Any) -> np.ndarray:
        values = np.atleast_1d(np.array(value, dtype=np.float64))
        if not np.all(np.isfinite(values)):
            raise ValueError("Eigenwerte müssen endlich sein")
        if np.any(np.diff(values) > 0):
            raise ValueError("Eigenwerte müssen absteigend sortiert sein")
        values.flags.writeable = False
        return values

    @field_validator("eigenvectors", mode="before")
    @classmethod
    def _validate_eigenvectors(cls, value: Any) -> np.ndarray:
        vectors = np.array(value, dtype=np.complex128)
        gram = vectors.conj().T @ vectors
        deviation = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
        if deviation > ORTHONORMALITY_TOLERANCE:
            raise ValueError(f"Eigenvektoren nicht orthonormal (Abweichung {deviation:.2e})")
        vectors.flags.writeable = False
        return vectors

    @model_validator(mode="after")
    def _check_shapes(self) -> "EigenDecomposition":
        if self.eigenvectors.shape[1] != self.eigenvalues.size:
            raise ValueError("Anzahl Eigenvektoren passt nicht zu den Eigenwerten")
        return self

    def truncated(self, count: int) -> "EigenDecomposition":
        """Kompakte Zerlegung mit den ``count`` größten Eigenpaaren."""
        return EigenDecomposition(
            eigenvalues=self.eigenvalues[:count],
            eigenvectors=self.eigenvectors[:, :count],
        )

    def reconstruct(self) -> ComplexMatrix:
        """U diag(lambda) U^H."""
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_complex_matrix(value: ArrayLike) -> ComplexMatrix:
    """
    Wandelt eine Eingabe in eine komplexe 2D-Matrix um.

    Skalare werden zu 1x1-Matrizen.

    Raises:
        InputValidationError: Bei falscher Dimension oder leerer Matrix
    """
    matrix = np.asarray(value, dtype=np.complex128)
    if matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise InputValidationError(f"Erwartet 2D-Matrix mit rows, cols >= 1, Form {matrix.shape}")
    return matrix


def hermitize(a: ArrayLike) -> ComplexMatrix:
    """(A + A^H) / 2."""
    matrix = as_complex_matrix(a)
    return 0.5 * (matrix + matrix.conj().T)


def _require_hermitian(a: ArrayLike) -> ComplexMatrix:
    """Prüft Hermitizität (relativ 1e-12) und gibt die symmetrisierte Matrix zurück."""
    matrix = as_complex_matrix(a)
    if matrix.shape[0] != matrix.shape[1]:
        raise InputValidationError(f"Matrix ist nicht quadratisch: {matrix.shape}")
    scale = float(np.max(np.abs(matrix)))
    asymmetry = float(np.max(np.abs(matrix - matrix.conj().T)))
    if asymmetry > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise InputValidationError(
            f"Matrix ist nicht hermitesch (Abweichung {asymmetry:.3e}, Skala {scale:.3e})"
        )
    return 0.5 * (matrix + matrix.conj().T)


def herm_eig(a: ArrayLike) -> EigenDecomposition:
    """
    Eigenzerlegung einer hermiteschen Matrix, Eigenwerte absteigend.

    Gleiche Eigenwerte behalten die Reihenfolge des Solvers (stabile
    Sortierung nach ursprünglichem Index).

    Args:
        a: Hermitesche Matrix

    Returns:
        EigenDecomposition mit A = U diag(lambda) U^H

    Raises:
        InputValidationError: Matrix nicht hermitesch
        NumericalError: Solver konvergiert nicht
    """
    matrix = _require_hermitian(a)
    try:
        eigenvalues, eigenvectors = eigh(matrix)
    except (LinAlgError, ValueError) as e:
        raise NumericalError(
            "Eigenzerlegung fehlgeschlagen",
            {"shape": matrix.shape, "reason": str(e), "finite": bool(np.all(np.isfinite(matrix)))},
        ) from e

    order = np.argsort(-eigenvalues, kind="stable")
    return EigenDecomposition(eigenvalues=eigenvalues[order], eigenvectors=eigenvectors[:, order])


def logdet_hpd(a: ArrayLike) -> float:
    """
    log2 det(A) einer hermiteschen, positiv definiten Matrix über Cholesky.

    Args:
        a: Hermitesch positiv definite Matrix

    Returns:
        log2 det(A) in Bit

    Raises:
        InputValidationError: Matrix nicht hermitesch
        NumericalError: Matrix nicht positiv definit (mit Pivot-Index)
    """
    matrix = _require_hermitian(a)
    (potrf,) = get_lapack_funcs(("potrf",), (matrix,))
    factor, info = potrf(matrix, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NumericalError(
            "Matrix ist nicht positiv definit",
            {"pivot_index": int(info) - 1, "shape": matrix.shape},
        )
    if info < 0:
        raise NumericalError("Ungültiges Argument für potrf", {"argument": int(-info)})
    return float(2.0 * np.sum(np.log2(np.real(np.diag(factor)))))


def spectral_norm_sq(h: ArrayLike) -> float:
    """||H||_2^2 als größter Eigenwert von H^H H."""
    matrix = as_complex_matrix(h)
    gram = hermitize(matrix.conj().T @ matrix)
    n = gram.shape[0]
    largest = eigvalsh(gram, subset_by_index=[n - 1, n - 1])[0]
    return max(float(largest), 0.0)


def project_simplex(values: ArrayLike, budget: float = 1.0) -> NDArray[np.float64]:
    """
    Euklidische Projektion auf {x >= 0, sum(x) = budget}.

    Sortierbasiertes Verfahren: Schwelle theta aus den größten Einträgen,
    dann x = max(v - theta, 0).
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise InputValidationError("Leerer Vektor kann nicht projiziert werden")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - budget
    ranks = np.arange(1, v.size + 1)
    active = np.nonzero(u - cumulative / ranks > 0)[0]
    rho = int(active[-1]) + 1
    theta = cumulative[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def project_psd_unit_trace(a: ArrayLike) -> Covariance:
    """
    Frobenius-nächste hermitesch positiv semidefinite Matrix mit Spur 1.

    Die Eigenwerte werden auf den Simplex projiziert (negative Anteile
    fallen dabei auf null), die Eigenvektoren bleiben erhalten.

    Args:
        a: Hermitesche Matrix

    Returns:
        Zulässige Kovarianz
    """
    decomposition = herm_eig(a)
    weights = project_simplex(decomposition.eigenvalues, budget=1.0)
    u = decomposition.eigenvectors
    projected = hermitize((u * weights) @ u.conj().T)
    # Spur exakt auf 1 ziehen; die Abweichung liegt bei wenigen ulp
    projected /= np.real(np.trace(projected))
    return Covariance(q=projected)
