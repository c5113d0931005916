"""
Sweep-Konfigurationsdateien im key=value-Format.

Ein Paar pro Zeile, '#' leitet Kommentare ein, Leerzeilen werden
ignoriert. Schlüssel sind die Feldnamen von SweepSpec.
"""
from pathlib import Path
from typing import Annotated, Any, Dict, Mapping, Optional

from pydantic import TypeAdapter, ValidationError

from ..exceptions import ConfigFileError
from ..models import SweepSpec
from .logging import get_logger

logger = get_logger("sweep_file")


def _valid_keys() -> str:
    return ", ".join(SweepSpec.model_fields)


def _field_adapter(key: str) -> TypeAdapter:
    """TypeAdapter für ein SweepSpec-Feld inklusive seiner Constraints."""
    field = SweepSpec.model_fields[key]
    if field.metadata:
        return TypeAdapter(Annotated[(field.annotation, *field.metadata)])
    return TypeAdapter(field.annotation)


def load_config(path: Path) -> Dict[str, Any]:
    """
    Liest eine Sweep-Konfiguration.

    Jeder Wert wird gegen Typ und Constraints des zugehörigen
    SweepSpec-Felds geprüft. Feldübergreifende Invarianten (start <= stop)
    prüft erst ``build_sweep_spec``.

    Args:
        path: Pfad zur Konfigurationsdatei

    Returns:
        Dict mit validierten Werten

    Raises:
        ConfigFileError: Unbekannter Schlüssel, Syntax- oder Typfehler
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigFileError(f"Konfigurationsdatei {path} nicht lesbar: {e}") from e

    values: Dict[str, Any] = {}
    fields = SweepSpec.model_fields

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(f"Erwartet key=value, gefunden '{raw_line.strip()}'", line_number)

        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ConfigFileError(
                f"Unbekannter Schlüssel '{key}'. Gültig: {_valid_keys()}", line_number
            )

        adapter = _field_adapter(key)
        try:
            values[key] = adapter.validate_strings(value) if value else None
        except ValidationError as e:
            message = e.errors()[0]["msg"]
            raise ConfigFileError(f"Ungültiger Wert für {key}: '{value}' ({message})", line_number) from e

    logger.debug(f"Konfiguration {path}: {sorted(values)}")
    return values


def build_sweep_spec(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> SweepSpec:
    """
    Effektive SweepSpec aus Datei und Kommandozeile.

    Werte aus ``overrides`` (Flags) haben Vorrang; None bedeutet "nicht
    gesetzt".

    Raises:
        ConfigFileError: Fehler in der Datei
        pydantic.ValidationError: Ungültige Kombination (z.B. start > stop)
    """
    values: Dict[str, Any] = load_config(config_file) if config_file else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return SweepSpec(**values)
