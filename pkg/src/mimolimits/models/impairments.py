"""Datenmodelle für das Verzerrungsmodell des Senders."""
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

# Toleranzen für die Kovarianz-Invarianten
HERMITIAN_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12


class Covariance(BaseModel):
    """Sende-Kovarianzmatrix Q: hermitesch, positiv semidefinit, Spur 1."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: np.ndarray = Field(..., description="Hermitesche N_t x N_t Matrix")

    @field_validator("q", mode="before")
    @classmethod
    def _validate_q(cls, value: Any) -> np.ndarray:
        q = np.array(value, dtype=np.complex128)
        if q.ndim == 0:
            q = q.reshape(1, 1)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise ValueError(f"Kovarianz muss quadratisch sein, Form {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("Kovarianz enthält nicht-endliche Einträge")

        scale = max(1.0, float(np.max(np.abs(q))))
        if np.max(np.abs(q - q.conj().T)) > HERMITIAN_TOLERANCE * scale:
            raise ValueError("Kovarianz ist nicht hermitesch")
        q = 0.5 * (q + q.conj().T)

        min_eig = float(np.linalg.eigvalsh(q)[0])
        if min_eig < -PSD_TOLERANCE:
            raise ValueError(f"Kovarianz nicht positiv semidefinit (min. Eigenwert {min_eig:.3e})")

        trace = float(np.real(np.trace(q)))
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise ValueError(f"Spur der Kovarianz muss 1 sein, ist {trace:.15g}")

        q.flags.writeable = False
        return q

    @classmethod
    def isotropic(cls, n_t: int) -> "Covariance":
        """Isotrope Kovarianz I/N_t."""
        return cls(q=np.eye(n_t, dtype=np.complex128) / n_t)

    @property
    def n_t(self) -> int:
        return int(self.q.shape[0])

    @property
    def diagonal(self) -> np.ndarray:
        """Leistungen q_n pro Sendeantenne (reell)."""
        return np.real(np.diag(self.q)).copy()

    def floored(self, floor: float = 1e-12) -> "Covariance":
        """
        Kopie mit Diagonaleinträgen mindestens ``floor`` (Spur renormiert).

        Nötig vor ``asymptotic_mi`` mit alpha=0, sonst ist die
        Verzerrungskovarianz singulär.
        """
        q = np.array(self.q)
        diag = np.real(np.diag(q))
        q[np.diag_indices_from(q)] = np.maximum(diag, floor)
        return Covariance(q=q / np.real(np.trace(q)))


class DistortionCovariance(BaseModel):
    """Diagonale Verzerrungskovarianz Upsilon_t als reeller Vektor."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    upsilon: np.ndarray = Field(..., description="Diagonaleinträge upsilon_n >= 0")

    @field_validator("upsilon", mode="before")
    @classmethod
    def _validate_upsilon(cls, value: Any) -> np.ndarray:
        upsilon = np.atleast_1d(np.array(value, dtype=np.float64))
        if upsilon.ndim != 1:
            raise ValueError("upsilon muss ein Vektor sein")
        if np.any(upsilon < 0) or not np.all(np.isfinite(upsilon)):
            raise ValueError("upsilon muss endlich und nichtnegativ sein")
        upsilon.flags.writeable = False
        return upsilon

    @property
    def matrix(self) -> np.ndarray:
        """Upsilon_t als Diagonalmatrix."""
        return np.diag(self.upsilon).astype(np.complex128)

    @property
    def total(self) -> float:
        return float(np.sum(self.upsilon))


class ImpairmentModel(BaseModel):
    """Impairment-Niveau kappa und Leakage-Parameter alpha."""

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(..., ge=0.0, description="Level of impairments (dimensionslos)")
    alpha: float = Field(default=1.0, ge=0.0, le=1.0, description="0: ein, 1: viele Subträger")

    @property
    def is_ideal(self) -> bool:
        """kappa = 0 entspricht idealen Transceivern."""
        return self.kappa == 0.0

    @computed_field
    @property
    def evm(self) -> float:
        """Error Vector Magnitude, gleich kappa^2."""
        return self.kappa**2

    def distortion_diagonal(self, powers: np.ndarray) -> np.ndarray:
        """kappa^2 ((1 - alpha) p_n + alpha mean(p)) für einen beliebigen reellen Vektor p."""
        powers = np.asarray(powers, dtype=np.float64)
        return self.kappa**2 * ((1.0 - self.alpha) * powers + self.alpha * float(np.mean(powers)))

    def distortion_covariance(self, covariance: Covariance) -> DistortionCovariance:
        """
        Berechnet Upsilon_t(Q).

        upsilon_n = kappa^2 * ((1 - alpha) * q_n + alpha * tr(Q) / N_t)

        Nur die Diagonale von Q geht ein; Kreuzkorrelationen zwischen
        Antennen werden vernachlässigt.

        Args:
            covariance: Sende-Kovarianz Q

        Returns:
            DistortionCovariance mit N_t Einträgen
        """
        upsilon = self.distortion_diagonal(covariance.diagonal)
        # Rundungsfehler bei q_n ~ -1e-16
        return DistortionCovariance(upsilon=np.maximum(upsilon, 0.0))

    def __str__(self) -> str:
        return f"kappa={self.kappa:g}, alpha={self.alpha:g}"
