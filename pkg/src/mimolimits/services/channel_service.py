"""Service für Kanalrealisierungen, SISO-Referenzen und Kanal-CSV-Import."""
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..config import get_logger, settings
from ..exceptions import DegenerateDistributionError, InputValidationError
from ..models import ChannelDistribution, ChannelMatrix, RngStream, SisoReference
from ..models.channel import is_full_rank

logger = get_logger("channel_service")

# Unterströme eines RngStream
MIMO_SUBSTREAM = 0
SISO_SUBSTREAM = 1


def circular_gaussian(
    generator: np.random.Generator,
    shape: tuple[int, ...],
) -> np.ndarray:
    """Zirkulär-symmetrische komplexe Gaußwerte CN(0, 1)."""
    real = generator.standard_normal(shape)
    imag = generator.standard_normal(shape)
    return (real + 1j * imag) / np.sqrt(2.0)


class ChannelService:
    """Service für Kanalverteilungen."""

    def __init__(self, max_resample: Optional[int] = None) -> None:
        """
        Initialisiert den ChannelService.

        Args:
            max_resample: Neuziehungen bei Rangdefizit (Standard aus Settings)
        """
        self.max_resample = settings.max_resample if max_resample is None else max_resample

    def sample_channel(self, dist: ChannelDistribution, rng: RngStream) -> ChannelMatrix:
        """
        Zieht eine vollrangige Kanalrealisierung.

        Deterministische Verteilungen geben die gespeicherte Matrix zurück.
        Rayleigh-Verteilungen ziehen Einträge CN(0,1), sodass
        E{tr(H^H H)} = N_t N_r.

        Args:
            dist: Kanalverteilung
            rng: Zufallsstrom (bestimmt die Realisierung vollständig)

        Returns:
            ChannelMatrix

        Raises:
            DegenerateDistributionError: Alle Ziehungen rangdefizient
        """
        if not dist.is_random:
            assert dist.matrix is not None
            return dist.matrix

        generator = rng.generator(MIMO_SUBSTREAM)
        for attempt in range(self.max_resample + 1):
            h = circular_gaussian(generator, (dist.n_r, dist.n_t))
            if is_full_rank(h, settings.rank_tolerance):
                return ChannelMatrix(h=h)
            logger.debug(
                f"Rangdefiziente Ziehung (Strom {rng.stream_index}, Versuch {attempt + 1})"
            )

        raise DegenerateDistributionError(
            f"{dist}: {self.max_resample + 1} rangdefiziente Ziehungen in Folge "
            f"(seed={rng.master_seed}, index={rng.stream_index})"
        )

    def siso_reference(
        self,
        dist: ChannelDistribution,
        rng: RngStream,
        reference: Optional[SisoReference] = None,
    ) -> complex:
        """
        SISO-Referenzkanal h für den Multiplexing-Gewinn.

        Ohne ``reference`` folgt h der Verteilung: Rayleigh h ~ CN(0,1),
        deterministisch h = 1, passend zur Normierung E{tr(H^H H)} = N_t N_r
        pro Eintrag. FIXED erzwingt h = 1, RANDOM zieht h aus dem
        SISO-Unterstrom von ``rng``.
        """
        if reference is None:
            reference = SisoReference.RANDOM if dist.is_random else SisoReference.FIXED
        if reference == SisoReference.FIXED:
            return complex(1.0, 0.0)
        return self.random_siso(rng)

    def random_siso(self, rng: RngStream) -> complex:
        """h ~ CN(0,1) aus dem SISO-Unterstrom von ``rng``."""
        generator = rng.generator(SISO_SUBSTREAM)
        return complex(circular_gaussian(generator, (1,))[0])

    @staticmethod
    def frobenius_norm_sq(channel: ChannelMatrix | np.ndarray) -> float:
        """||H||_F^2 = sum |h_ij|^2 (auch für rangdefiziente Arrays)."""
        h = channel.h if isinstance(channel, ChannelMatrix) else np.asarray(channel)
        return float(np.sum(np.abs(h) ** 2))

    def load_channel_csv(self, path: Path) -> ChannelMatrix:
        """
        Lädt eine deterministische Kanalmatrix aus CSV.

        Format: N_r Zeilen, je 2*N_t Spalten (abwechselnd Real- und
        Imaginärteil), UTF-8, Dezimalpunkt. Zeilen mit '#' sind Kommentare.

        Args:
            path: Pfad zur CSV-Datei

        Returns:
            ChannelMatrix

        Raises:
            InputValidationError: Ungerade Spaltenzahl oder nicht-numerische Werte
        """
        try:
            frame = pd.read_csv(
                path,
                header=None,
                comment="#",
                encoding="utf-8",
                skipinitialspace=True,
                dtype=np.float64,
            )
        except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise InputValidationError(f"Kanal-CSV {path} nicht lesbar: {e}") from e

        values = frame.to_numpy(dtype=np.float64)
        if values.shape[1] % 2 != 0:
            raise InputValidationError(
                f"Kanal-CSV {path}: {values.shape[1]} Spalten, erwartet 2*N_t"
            )
        h = values[:, 0::2] + 1j * values[:, 1::2]
        if not is_full_rank(h, settings.rank_tolerance):
            raise InputValidationError(f"Kanal-CSV {path}: Matrix hat nicht vollen Rang")

        logger.info(f"Kanalmatrix geladen: {path} ({h.shape[0]}x{h.shape[1]})")
        return ChannelMatrix(h=h)
