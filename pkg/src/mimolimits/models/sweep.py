"""Datenmodelle für SNR-Sweeps und Szenarien."""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..config.settings import settings


class Scenario(str, Enum):
    """Vordefinierte Experimente."""
    FIG2 = "fig2"  # 4x4 Ensemble, verschiedene kappa
    FIG3 = "fig3"  # N_t in {4, 12}, alpha in {0, 1}, Rayleigh
    FIG4 = "fig4"  # Multiplexing-Gewinn, Rayleigh
    FIG5 = "fig5"  # Multiplexing-Gewinn, deterministisches Ensemble
    CUSTOM = "custom"


class ChannelSource(str, Enum):
    """Kanalquelle für das custom-Szenario."""
    IDENTITY = "identity"  # Einsen auf der Hauptdiagonalen
    ENSEMBLE = "ensemble"  # deterministische Kanäle mit CN(0,1)-Einträgen
    RAYLEIGH = "rayleigh"  # ergodisch, isotrope Kovarianz


class SisoReference(str, Enum):
    """SISO-Referenz im Nenner des Multiplexing-Gewinns."""
    FIXED = "fixed"  # |h| = 1
    RANDOM = "random"  # h ~ CN(0,1) pro Realisierung


class Averaging(str, Enum):
    """Mittelung über deterministische Realisierungen."""
    MEAN_OF_RATIOS = "mean_of_ratios"
    RATIO_OF_MEANS = "ratio_of_means"


# Standard-Gitter je Szenario (start, stop, step) in dB
DEFAULT_GRIDS: Dict[Scenario, tuple[float, float, float]] = {
    Scenario.FIG2: (-10.0, 70.0, 2.0),
    Scenario.FIG3: (-10.0, 70.0, 2.0),
    Scenario.FIG4: (-40.0, 80.0, 2.0),
    Scenario.FIG5: (-40.0, 80.0, 2.0),
    Scenario.CUSTOM: (-10.0, 70.0, 2.0),
}


class SweepSpec(BaseModel):
    """Vollständige Beschreibung eines SNR-Sweeps."""

    scenario: Scenario = Field(default=Scenario.CUSTOM, description="Experiment")
    snr_db_start: float = Field(default=-10.0, description="Erster SNR-Punkt [dB]")
    snr_db_stop: float = Field(default=70.0, description="Letzter SNR-Punkt [dB]")
    snr_db_step: float = Field(default=2.0, gt=0.0, description="Schrittweite [dB]")
    n_t: int = Field(default=4, ge=1, description="Sendeantennen (custom)")
    n_r: int = Field(default=4, ge=1, description="Empfangsantennen (custom)")
    kappa: float = Field(default=0.05, ge=0.0, description="Level of impairments (custom)")
    alpha: float = Field(default=1.0, ge=0.0, le=1.0, description="Leakage-Parameter (custom)")
    trials: int = Field(
        default_factory=lambda: settings.default_trials, ge=1, description="Trials / Ensemblegröße"
    )
    seed: int = Field(
        default_factory=lambda: settings.default_seed, ge=0, lt=2**64, description="Master-Seed"
    )
    channel: ChannelSource = Field(default=ChannelSource.IDENTITY, description="Kanal (custom)")
    channel_file: Optional[Path] = Field(default=None, description="CSV mit Kanalmatrix (custom)")
    siso_reference: SisoReference = Field(default=SisoReference.FIXED)
    averaging: Averaging = Field(default=Averaging.MEAN_OF_RATIOS)
    output_path: Optional[Path] = Field(default=None, description="Ziel-CSV")

    @model_validator(mode="before")
    @classmethod
    def _scenario_grid_defaults(cls, data: Any) -> Any:
        """Füllt fehlende Gitterparameter mit dem Standard des Szenarios."""
        if not isinstance(data, dict):
            return data
        scenario = Scenario(data.get("scenario", Scenario.CUSTOM))
        start, stop, step = DEFAULT_GRIDS[scenario]
        data = dict(data)
        data.setdefault("snr_db_start", start)
        data.setdefault("snr_db_stop", stop)
        data.setdefault("snr_db_step", step)
        return data

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepSpec":
        if self.snr_db_start > self.snr_db_stop:
            raise ValueError("snr_db_start muss <= snr_db_stop sein")
        return self

    def snr_grid_db(self) -> List[float]:
        """SNR-Gitter in dB, Endpunkt eingeschlossen, nie leer."""
        count = int(np.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9)) + 1
        return [round(self.snr_db_start + i * self.snr_db_step, 10) for i in range(count)]

    def header_items(self) -> List[tuple[str, str]]:
        """Effektive Konfiguration als (key, value) in Feldreihenfolge, ohne Zielpfad."""
        items = []
        for key, value in self.model_dump(mode="json", exclude={"output_path"}).items():
            items.append((key, "" if value is None else str(value)))
        return items
