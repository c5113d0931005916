"""Service für den CSV-Export von Ergebniskurven."""
from pathlib import Path
from typing import Iterable, List

import pandas as pd

from .. import __version__
from ..config import get_logger
from ..models import CurveRecord, ResultCurve, SweepSpec

logger = get_logger("csv_export")

CSV_COLUMNS = ["series", "snr_db", "value", "stderr"]


class CsvExportService:
    """
    Schreibt Ergebniskurven als selbstbeschreibende CSV-Datei.

    Kopfblock aus Kommentarzeilen (Version, effektive Konfiguration,
    Seed), danach die Spalten series,snr_db,value,stderr mit sechs
    signifikanten Stellen. Der Kopfblock enthält weder Zeitstempel noch
    Thread-Anzahl; gleiche Sweeps ergeben bytegleiche Dateien.
    """

    def header_lines(self, spec: SweepSpec) -> List[str]:
        """Kommentarzeilen des Kopfblocks."""
        lines = [f"# mimolimits {__version__}"]
        lines.extend(f"# {key}={value}" for key, value in spec.header_items())
        lines.append(f"# seed={spec.seed}")
        return lines

    def to_frame(self, curves: Iterable[ResultCurve]) -> pd.DataFrame:
        """Eine Zeile pro (Reihe, SNR-Punkt), Reihen in Eingabereihenfolge."""
        records: List[CurveRecord] = []
        for curve in curves:
            records.extend(curve.to_records())
        return pd.DataFrame(
            [record.model_dump() for record in records],
            columns=CSV_COLUMNS,
        )

    def write_curves(self, curves: Iterable[ResultCurve], spec: SweepSpec, path: Path) -> Path:
        """
        Schreibt die Kurven nach ``path``.

        Args:
            curves: Ergebniskurven
            spec: Effektive Sweep-Konfiguration (landet im Kopfblock)
            path: Ziel-CSV

        Returns:
            Pfad der geschriebenen Datei

        Raises:
            OSError: Ziel nicht beschreibbar
        """
        frame = self.to_frame(curves)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write("\n".join(self.header_lines(spec)) + "\n")
            frame.to_csv(handle, index=False, float_format="%.6g", lineterminator="\n")

        logger.info(f"CSV geschrieben: {path} ({len(frame)} Zeilen)")
        return path
