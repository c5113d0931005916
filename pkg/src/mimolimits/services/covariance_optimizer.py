"""Projizierter Gradientenaufstieg für die Sende-Kovarianz bei alpha < 1."""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve

from ..config import get_logger, settings
from ..exceptions import InputValidationError
from ..models import CapacitySolution, ChannelMatrix, Covariance, ImpairmentModel, SnrPoint
from ..numerics import hermitize, logdet_hpd, project_psd_unit_trace

logger = get_logger("covariance_optimizer")

# Maximale Halbierungen der Schrittweite pro Iteration
MAX_BACKTRACKS = 60


class CovarianceOptimizer:
    """
    Maximiert die Transinformation über {Q >= 0, tr(Q) = 1}.

    Die Zielfunktion ist im Allgemeinen nicht konkav in Q, weil Q auch
    in der Verzerrungskovarianz auftaucht. Deshalb wird von mehreren
    Startpunkten aus optimiert und das beste Ergebnis genommen.
    """

    def __init__(
        self,
        max_iterations: Optional[int] = None,
        tolerance_bits: Optional[float] = None,
        armijo: Optional[float] = None,
    ) -> None:
        """
        Initialisiert den Optimierer.

        Args:
            max_iterations: Iterationslimit pro Startpunkt (Standard aus Settings)
            tolerance_bits: Abbruch bei kleinerer Verbesserung (Standard aus Settings)
            armijo: Konstante der Armijo-Bedingung (Standard aus Settings)
        """
        self.max_iterations = (
            settings.optimizer_max_iterations if max_iterations is None else max_iterations
        )
        self.tolerance_bits = (
            settings.optimizer_tolerance_bits if tolerance_bits is None else tolerance_bits
        )
        self.armijo = settings.optimizer_armijo if armijo is None else armijo

    def _matrices(
        self, h: np.ndarray, q: np.ndarray, s: float, model: ImpairmentModel
    ) -> Tuple[np.ndarray, np.ndarray]:
        upsilon = model.distortion_diagonal(np.maximum(np.real(np.diag(q)), 0.0))
        noise = hermitize(np.eye(h.shape[0]) + s * (h * upsilon) @ h.conj().T)
        signal = hermitize(noise + s * h @ q @ h.conj().T)
        return signal, noise

    def objective(self, h: np.ndarray, q: np.ndarray, snr: SnrPoint, model: ImpairmentModel) -> float:
        """Transinformation in Bit für rohe Arrays (ohne Clipping bei 0)."""
        signal, noise = self._matrices(h, q, snr.linear_snr, model)
        return logdet_hpd(signal) - logdet_hpd(noise)

    def gradient(self, h: np.ndarray, q: np.ndarray, snr: SnrPoint, model: ImpairmentModel) -> np.ndarray:
        """
        Euklidischer Gradient der Zielfunktion nach Q (hermitesch, Bit).

        Mit A = I + sH(Q+Y)H^H, B = I + sHYH^H, P_A = sH^H A^-1 H,
        P_B = sH^H B^-1 H und w = diag(P_A - P_B):
        G = (P_A + kappa^2 diag((1-alpha) w + alpha mean(w))) / ln 2.
        """
        s = snr.linear_snr
        signal, noise = self._matrices(h, q, s, model)
        h_conj = h.conj().T
        p_signal = s * h_conj @ solve(signal, h, assume_a="pos")
        p_noise = s * h_conj @ solve(noise, h, assume_a="pos")

        w = np.real(np.diag(p_signal - p_noise))
        distortion = model.distortion_diagonal(w)
        return hermitize(p_signal + np.diag(distortion)) / math.log(2.0)

    def maximize(
        self,
        channel: ChannelMatrix,
        snr: SnrPoint,
        model: ImpairmentModel,
        starts: Sequence[Covariance],
    ) -> CapacitySolution:
        """
        Multi-Start-Optimierung, bestes Ergebnis gewinnt.

        Args:
            channel: Kanalrealisierung
            snr: SNR
            model: Impairment-Modell
            starts: Zulässige Startkovarianzen

        Returns:
            CapacitySolution; converged=False, wenn das Iterationslimit griff
        """
        if not starts:
            raise InputValidationError("Optimierer braucht mindestens einen Startpunkt")

        h = channel.h
        if channel.n_t == 1:
            only = Covariance(q=np.ones((1, 1)))
            value = max(self.objective(h, only.q, snr, model), 0.0)
            return CapacitySolution(capacity_bits=value, covariance=only)

        best: Optional[Tuple[float, Covariance, bool, int]] = None
        total_iterations = 0
        for start in starts:
            value, covariance, converged, iterations = self._ascend(h, start, snr, model)
            total_iterations += iterations
            if best is None or value > best[0]:
                best = (value, covariance, converged, iterations)

        assert best is not None
        value, covariance, converged, _ = best
        if not converged:
            logger.warning(
                f"Kovarianz-Optimierung nicht konvergiert ({self.max_iterations} Iterationen, "
                f"{model}, SNR {snr})"
            )
        return CapacitySolution(
            capacity_bits=max(value, 0.0),
            covariance=covariance,
            converged=converged,
            iterations=total_iterations,
        )

    def _ascend(
        self,
        h: np.ndarray,
        start: Covariance,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> Tuple[float, Covariance, bool, int]:
        current = start
        value = self.objective(h, current.q, snr, model)
        step: Optional[float] = None

        for iteration in range(1, self.max_iterations + 1):
            grad = self.gradient(h, current.q, snr, model)
            norm = float(np.linalg.norm(grad))
            if norm == 0.0:
                return value, current, True, iteration
            if step is None:
                step = 1.0 / norm

            accepted = False
            for _ in range(MAX_BACKTRACKS):
                candidate = project_psd_unit_trace(current.q + step * grad)
                candidate_value = self.objective(h, candidate.q, snr, model)
                ascent = float(np.real(np.trace(grad @ (candidate.q - current.q))))
                if candidate_value >= value + self.armijo * ascent:
                    accepted = True
                    break
                step *= 0.5

            if not accepted:
                # Kein Anstieg mehr möglich: stationärer Punkt
                return value, current, True, iteration

            improvement = candidate_value - value
            current, value = candidate, candidate_value
            if improvement < self.tolerance_bits:
                return value, current, True, iteration
            step *= 2.0

        return value, current, False, self.max_iterations
