"""Datenmodelle für Kanalrealisierungen und Kanalverteilungen."""
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Relative Toleranz für den Vollrang-Test (kleinster / größter kompakter Eigenwert)
RANK_TOLERANCE = 1e-12


def is_full_rank(h: np.ndarray, tolerance: float = RANK_TOLERANCE) -> bool:
    """
    Prüft rank(H) = min(N_t, N_r) über die kompakten Eigenwerte von H^H H.

    Es wird die Gram-Matrix der kleineren Dimension verwendet; ihre
    Eigenwerte sind genau die M von null verschiedenen Eigenwerte.
    """
    n_r, n_t = h.shape
    gram = h.conj().T @ h if n_t <= n_r else h @ h.conj().T
    eigenvalues = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    largest = float(eigenvalues[-1])
    return largest > 0.0 and float(eigenvalues[0]) > tolerance * largest


class ChannelMatrix(BaseModel):
    """Vollrangige Kanalrealisierung H (N_r x N_t)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h: np.ndarray = Field(..., description="Komplexe N_r x N_t Matrix")

    @field_validator("h", mode="before")
    @classmethod
    def _validate_h(cls, value: Any) -> np.ndarray:
        h = np.array(value, dtype=np.complex128)
        if h.ndim == 0:
            h = h.reshape(1, 1)
        if h.ndim != 2 or min(h.shape) < 1:
            raise ValueError(f"Kanalmatrix muss 2D sein, Form {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("Kanalmatrix enthält nicht-endliche Einträge")
        if not is_full_rank(h):
            raise ValueError(f"Kanalmatrix {h.shape} hat nicht vollen Rang")
        h.flags.writeable = False
        return h

    @property
    def n_r(self) -> int:
        return int(self.h.shape[0])

    @property
    def n_t(self) -> int:
        return int(self.h.shape[1])

    @property
    def m(self) -> int:
        """Anzahl der von null verschiedenen Eigenwerte, min(N_t, N_r)."""
        return min(self.n_t, self.n_r)

    @property
    def gram(self) -> np.ndarray:
        """H^H H (N_t x N_t)."""
        return self.h.conj().T @ self.h

    @classmethod
    def identity(cls, n_r: int, n_t: int) -> "ChannelMatrix":
        """Kanal mit Einsen auf der Hauptdiagonalen."""
        return cls(h=np.eye(n_r, n_t, dtype=np.complex128))


class ChannelKind(str, Enum):
    """Art der Kanalverteilung."""
    DETERMINISTIC = "deterministic"
    IID_RAYLEIGH = "iid_rayleigh"


class ChannelDistribution(BaseModel):
    """Kanalverteilung: deterministische Matrix oder i.i.d. Rayleigh-Fading."""

    model_config = ConfigDict(frozen=True)

    kind: ChannelKind = Field(..., description="Verteilungsart")
    n_t: int = Field(..., ge=1, description="Sendeantennen")
    n_r: int = Field(..., ge=1, description="Empfangsantennen")
    matrix: Optional[ChannelMatrix] = Field(
        default=None,
        description="Gespeicherte Matrix (nur deterministisch)",
    )

    @model_validator(mode="after")
    def _check_matrix(self) -> "ChannelDistribution":
        if self.kind == ChannelKind.DETERMINISTIC:
            if self.matrix is None:
                raise ValueError("Deterministische Verteilung braucht eine Matrix")
            if (self.matrix.n_r, self.matrix.n_t) != (self.n_r, self.n_t):
                raise ValueError("Dimensionen passen nicht zur Matrix")
        elif self.matrix is not None:
            raise ValueError("Rayleigh-Verteilung darf keine Matrix speichern")
        return self

    @classmethod
    def deterministic(cls, channel: ChannelMatrix) -> "ChannelDistribution":
        return cls(
            kind=ChannelKind.DETERMINISTIC,
            n_t=channel.n_t,
            n_r=channel.n_r,
            matrix=channel,
        )

    @classmethod
    def iid_rayleigh(cls, n_t: int, n_r: int) -> "ChannelDistribution":
        return cls(kind=ChannelKind.IID_RAYLEIGH, n_t=n_t, n_r=n_r)

    @property
    def is_random(self) -> bool:
        return self.kind == ChannelKind.IID_RAYLEIGH

    @property
    def m(self) -> int:
        return min(self.n_t, self.n_r)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.n_r}x{self.n_t}"


class RngStream(BaseModel):
    """
    Unveränderliches Token für einen reproduzierbaren Zufallsstrom.

    Trial i verwendet immer RngStream(master_seed, i), unabhängig davon,
    welcher Thread es wann ausführt. Der Generator ist zählerbasiert
    (Philox), die Schlüssel werden per SeedSequence aus (seed, index,
    substream) abgeleitet.
    """

    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(..., ge=0, lt=2**64, description="64-bit Master-Seed")
    stream_index: int = Field(default=0, ge=0, description="Index des Stroms (Trial)")

    def generator(self, substream: int = 0) -> np.random.Generator:
        """
        Frischer Generator für diesen Strom.

        Args:
            substream: Unterstrom, z.B. 0 für MIMO-Kanal, 1 für SISO-Referenz

        Returns:
            numpy Generator, bei gleichen Argumenten bitidentisch
        """
        seed_sequence = np.random.SeedSequence(
            entropy=self.master_seed,
            spawn_key=(self.stream_index, substream),
        )
        return np.random.Generator(np.random.Philox(seed_sequence))
