"""Datenmodelle für Kapazitäts- und Multiplexing-Ergebnisse."""
import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .impairments import Covariance


class SnrPoint(BaseModel):
    """SNR als lineares Leistungsverhältnis."""

    model_config = ConfigDict(frozen=True)

    linear_snr: float = Field(..., gt=0.0, allow_inf_nan=False, description="SNR (linear)")

    @classmethod
    def from_db(cls, snr_db: float) -> "SnrPoint":
        return cls(linear_snr=10.0 ** (snr_db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.linear_snr)

    def __str__(self) -> str:
        return f"{self.db:.1f} dB"


class WaterfillAllocation(BaseModel):
    """Ergebnis der Wasserfüllung: Leistungen d_i und Wasserpegel mu."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: np.ndarray = Field(..., description="Leistungen d_i >= 0 in Eingangsreihenfolge")
    water_level: float = Field(..., description="Wasserpegel mu")

    @field_validator("d", mode="before")
    @classmethod
    def _validate_d(cls, value: Any) -> np.ndarray:
        d = np.atleast_1d(np.array(value, dtype=np.float64))
        if np.any(d < 0):
            raise ValueError("Leistungen müssen nichtnegativ sein")
        d.flags.writeable = False
        return d

    @property
    def active_streams(self) -> int:
        return int(np.count_nonzero(self.d))


class CapacityLimits(BaseModel):
    """Schranken der asymptotischen Kapazität (SNR -> unendlich)."""

    model_config = ConfigDict(frozen=True)

    lower: float = Field(..., description="M log2(1 + 1/kappa^2) [bit]")
    upper: float = Field(..., description="M log2(1 + N_t/(M kappa^2)) [bit]")
    m: int = Field(..., ge=1, description="min(N_t, N_r)")

    @model_validator(mode="after")
    def _check_order(self) -> "CapacityLimits":
        if self.lower > self.upper:
            raise ValueError("Untere Schranke größer als obere")
        return self


class CapacitySolution(BaseModel):
    """Kapazitätswert samt erreichender Kovarianz (Zertifikat)."""

    model_config = ConfigDict(frozen=True)

    capacity_bits: float = Field(..., description="Kapazität [bit/Kanalnutzung]")
    covariance: Covariance = Field(..., description="Erreichende Kovarianz Q")
    allocation: Optional[WaterfillAllocation] = Field(
        default=None,
        description="Wasserfüllung (nur bei geschlossener Lösung)",
    )
    converged: bool = Field(default=True, description="False: Iterationslimit erreicht")
    iterations: int = Field(default=0, ge=0, description="Iterationen des Optimierers")


class MonteCarloConfig(BaseModel):
    """Monte-Carlo-Einstellungen; Ergebnis hängt nur von trials und master_seed ab."""

    model_config = ConfigDict(frozen=True)

    trials: int = Field(..., ge=1, description="Anzahl Trials")
    master_seed: int = Field(..., ge=0, lt=2**64, description="Master-Seed")
    max_parallelism: int = Field(default=1, ge=1, description="Max. parallele Worker")


class MonteCarloEstimate(BaseModel):
    """Stichprobenmittel mit Standardfehler."""

    model_config = ConfigDict(frozen=True)

    mean: float = Field(..., description="Stichprobenmittel")
    stderr: float = Field(default=0.0, ge=0.0, description="Standardabweichung / sqrt(trials)")
    trials: int = Field(default=1, ge=1, description="Anzahl Trials")

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "MonteCarloEstimate":
        """Schätzer aus Stichproben in fester Trial-Reihenfolge."""
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.size
        stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean=float(np.mean(samples)), stderr=stderr, trials=n)


class MuxGainBounds(BaseModel):
    """Grenzwerte des Multiplexing-Gewinns für SNR -> 0 und SNR -> unendlich."""

    model_config = ConfigDict(frozen=True)

    low_snr_lower: float = Field(..., description="E||H||_F^2 / (N_t E|h|^2)")
    low_snr_upper: float = Field(..., description="E||H||_2^2 / E|h|^2")
    high_snr_lower: float = Field(..., description="M")
    high_snr_upper: float = Field(..., description="M log2(1+N_t/(M k^2)) / log2(1+1/k^2)")

    @model_validator(mode="after")
    def _check_order(self) -> "MuxGainBounds":
        if self.low_snr_lower > self.low_snr_upper:
            raise ValueError("low_snr_lower > low_snr_upper")
        if self.high_snr_lower > self.high_snr_upper:
            raise ValueError("high_snr_lower > high_snr_upper")
        return self


class CurveKind(str, Enum):
    """Art einer Ergebnisreihe."""
    CAPACITY = "capacity"
    MUX_GAIN = "mux_gain"
    REFERENCE = "reference"
    SLOPE = "slope"  # dC / dlog2(SNR)


class CurveRecord(BaseModel):
    """Eine CSV-Zeile: Wert einer Reihe an einem SNR-Punkt."""

    model_config = ConfigDict(frozen=True)

    series: str = Field(..., description="Reihenbezeichnung")
    snr_db: float = Field(..., description="SNR [dB]")
    value: float = Field(..., description="Kapazität [bit] oder Verhältnis")
    stderr: float = Field(default=0.0, ge=0.0, description="Standardfehler, 0 wenn deterministisch")


class ResultCurve(BaseModel):
    """SNR-indizierte Ergebnisreihe (Kapazität, Multiplexing-Gewinn oder Referenzlinie)."""

    label: str = Field(..., description="Reihenbezeichnung")
    kind: CurveKind = Field(..., description="Art der Reihe")
    snr_db: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)
    stderr: List[float] = Field(default_factory=list)
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Parameter der Reihe")

    @model_validator(mode="after")
    def _check_lengths(self) -> "ResultCurve":
        if not len(self.snr_db) == len(self.values) == len(self.stderr):
            raise ValueError(f"Reihe {self.label}: Längen passen nicht zusammen")
        return self

    @classmethod
    def constant(
        cls,
        label: str,
        snr_db: List[float],
        value: float,
        parameters: Optional[Dict[str, Any]] = None,
    ) -> "ResultCurve":
        """Referenzlinie mit konstantem Wert über dem SNR-Gitter."""
        return cls(
            label=label,
            kind=CurveKind.REFERENCE,
            snr_db=list(snr_db),
            values=[value] * len(snr_db),
            stderr=[0.0] * len(snr_db),
            parameters=parameters or {},
        )

    def to_records(self) -> List[CurveRecord]:
        return [
            CurveRecord(series=self.label, snr_db=snr, value=value, stderr=err)
            for snr, value, err in zip(self.snr_db, self.values, self.stderr)
        ]
