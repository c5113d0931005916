"""
Konfigurationsmanagement mit Pydantic Settings.
Unterstützt .env Dateien und Umgebungsvariablen (Präfix MIMOLIMITS_).
"""
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Zentrale Konfiguration für mimolimits."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MIMOLIMITS_",
        case_sensitive=False,
    )

    # Parallelisierung
    threads: int = Field(
        default=4,
        ge=1,
        description="Standard-Anzahl Worker (nur wenn --threads fehlt)",
    )

    # Monte Carlo
    default_trials: int = Field(default=1000, ge=1, description="Anzahl Trials / Ensemblegröße")
    default_seed: int = Field(default=1, ge=0, description="Master-Seed")
    max_resample: int = Field(
        default=3,
        ge=0,
        description="Neuziehungen bei rangdefizienten Kanalrealisierungen",
    )
    rank_tolerance: float = Field(
        default=1e-12,
        gt=0,
        description="Relative Toleranz für den Vollrang-Test",
    )

    # Kovarianz-Optimierung (alpha < 1)
    optimizer_realizations: int = Field(
        default=20,
        ge=1,
        description="Max. Ensemblegröße für optimiererbasierte Kurven",
    )
    optimizer_max_iterations: int = Field(default=2000, ge=1, description="Iterationslimit")
    optimizer_tolerance_bits: float = Field(
        default=1e-9,
        gt=0,
        description="Abbruch, wenn die Verbesserung darunter liegt",
    )
    optimizer_armijo: float = Field(default=1e-4, gt=0, lt=1, description="Armijo-Konstante")

    # Ausgabe
    output_dir: Path = Field(default=Path("results"), description="Standardverzeichnis für CSVs")

    # Logging
    log_level: str = Field(default="INFO", description="Logging Level")
    log_file: Optional[Path] = Field(default=None, description="Logdatei (optional)")

    def get_output_directory(self) -> Path:
        """Gibt das Ausgabeverzeichnis zurück, erstellt es bei Bedarf."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir


# Globale Settings-Instanz
settings = Settings()
