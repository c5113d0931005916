"""Fehlerklassen für mimolimits."""
from typing import Any, Dict, Optional


class MimoLimitsError(Exception):
    """Basisklasse aller Fehler dieses Pakets."""


class InputValidationError(MimoLimitsError, ValueError):
    """Eingabe verletzt eine Vorbedingung (Form, Hermitizität, Wertebereich)."""


class NumericalError(MimoLimitsError, ArithmeticError):
    """Numerisches Verfahren ist gescheitert."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = diagnostics or {}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{key}={value}" for key, value in self.diagnostics.items())
        return f"{base} ({details})"


class SingularDistortionError(NumericalError):
    """Verzerrungskovarianz hat einen Nulleintrag (alpha=0 und q_n=0)."""


class DegenerateRatioError(NumericalError):
    """SISO-Kapazität im Nenner ist praktisch null."""


class UnboundedCapacityError(MimoLimitsError, ValueError):
    """Ideale Transceiver (kappa=0) haben keine endliche Kapazitätsgrenze."""


class DegenerateDistributionError(MimoLimitsError):
    """Verteilung liefert wiederholt rangdefiziente Realisierungen."""


class UnsupportedConfigurationError(MimoLimitsError, ValueError):
    """Kombination von Parametern wird von der Operation nicht unterstützt."""


class ConfigFileError(MimoLimitsError, ValueError):
    """Fehler in einer Sweep-Konfigurationsdatei."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        if line_number is not None:
            message = f"Zeile {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
