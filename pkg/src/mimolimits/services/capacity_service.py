"""Service für Transinformation, Kapazität und Kapazitätsgrenzen."""
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import solve

from ..config import get_logger
from ..exceptions import (
    InputValidationError,
    NumericalError,
    SingularDistortionError,
    UnboundedCapacityError,
    UnsupportedConfigurationError,
)
from ..models import (
    CapacityLimits,
    CapacitySolution,
    ChannelDistribution,
    ChannelMatrix,
    Covariance,
    ImpairmentModel,
    MonteCarloConfig,
    MonteCarloEstimate,
    RngStream,
    SnrPoint,
    WaterfillAllocation,
)
from ..numerics import EigenDecomposition, herm_eig, hermitize, logdet_hpd
from ..processing.monte_carlo import MonteCarloRunner
from .channel_service import ChannelService
from .covariance_optimizer import CovarianceOptimizer

logger = get_logger("capacity")


class CapacityService:
    """Service für Kapazitätsberechnungen mit Transceiver-Impairments."""

    def __init__(
        self,
        channel_service: Optional[ChannelService] = None,
        optimizer: Optional[CovarianceOptimizer] = None,
    ) -> None:
        """Initialisiert den CapacityService."""
        self.channel_service = channel_service or ChannelService()
        self.optimizer = optimizer or CovarianceOptimizer()

    # ------------------------------------------------------------------
    # Einzelne Realisierungen
    # ------------------------------------------------------------------

    def mutual_information(
        self,
        channel: ChannelMatrix,
        covariance: Covariance,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> float:
        """
        Transinformation für eine Realisierung H und Kovarianz Q in Bit.

        log2 det(I + SNR H (Q + Y) H^H) - log2 det(I + SNR H Y H^H)
        mit Y = Upsilon_t(Q). Die Differenz zweier Log-Determinanten ist
        bei hohem SNR besser konditioniert als die explizite Inverse.

        Args:
            channel: Kanalrealisierung H
            covariance: Sende-Kovarianz Q
            snr: SNR
            model: Impairment-Modell

        Returns:
            Transinformation >= 0 in Bit
        """
        if covariance.n_t != channel.n_t:
            raise InputValidationError(
                f"Kovarianz {covariance.n_t}x{covariance.n_t} passt nicht zu N_t={channel.n_t}"
            )
        h = channel.h
        upsilon = model.distortion_covariance(covariance).upsilon
        s = snr.linear_snr

        noise = np.eye(channel.n_r) + s * (h * upsilon) @ h.conj().T
        signal = noise + s * h @ covariance.q @ h.conj().T
        return max(logdet_hpd(signal) - logdet_hpd(noise), 0.0)

    @staticmethod
    def siso_capacity(h: complex, snr: SnrPoint, model: ImpairmentModel) -> float:
        """
        SISO-Kapazität log2(1 + SNR|h|^2 / (SNR|h|^2 kappa^2 + 1)).

        Für N_t = 1 ist Q = 1 und upsilon = kappa^2 für jedes alpha.
        """
        gain = snr.linear_snr * abs(h) ** 2
        return math.log2(1.0 + gain / (gain * model.kappa**2 + 1.0))

    @staticmethod
    def capacity_limits(n_t: int, n_r: int, model: ImpairmentModel) -> CapacityLimits:
        """
        Schranken der Kapazität für SNR -> unendlich.

        M log2(1 + 1/kappa^2) <= C(inf) <= M log2(1 + N_t/(M kappa^2)),
        M = min(N_t, N_r). Für N_t <= N_r fallen beide zusammen.

        Raises:
            UnboundedCapacityError: kappa = 0
        """
        if n_t < 1 or n_r < 1:
            raise InputValidationError(f"Antennenzahlen müssen >= 1 sein: N_t={n_t}, N_r={n_r}")
        if model.is_ideal:
            raise UnboundedCapacityError("Ideale Transceiver (kappa=0) haben keine endliche Grenze")

        m = min(n_t, n_r)
        kappa_sq = model.kappa**2
        lower = m * math.log2(1.0 + 1.0 / kappa_sq)
        upper = lower if n_t <= n_r else m * math.log2(1.0 + n_t / (m * kappa_sq))
        return CapacityLimits(lower=lower, upper=upper, m=m)

    @staticmethod
    def waterfill(gains: Sequence[float] | np.ndarray, budget: float = 1.0) -> WaterfillAllocation:
        """
        Exakte Wasserfüllung d_i = [mu - 1/c_i]_+ mit sum(d) = budget.

        Die Gewinne werden absteigend sortiert; die größte aktive Menge
        mit mu > 1/c_k wird direkt bestimmt, ohne Bisektion. Gleiche
        Gewinne werden gemeinsam aktiviert.

        Args:
            gains: Effektive Gewinne c_i > 0
            budget: Gesamtleistung

        Returns:
            WaterfillAllocation in Eingangsreihenfolge

        Raises:
            InputValidationError: Leerer Vektor oder c_i <= 0
            NumericalError: Wasserstand nicht endlich (Gewinne im Subnormalbereich)
        """
        c = np.asarray(gains, dtype=np.float64).ravel()
        if c.size == 0:
            raise InputValidationError("Wasserfüllung braucht mindestens einen Gewinn")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise InputValidationError(f"Gewinne müssen endlich und positiv sein: {c}")
        if budget <= 0:
            raise InputValidationError(f"Budget muss positiv sein: {budget}")

        order = np.argsort(-c, kind="stable")
        # Überlauf wird unten als nicht-endlicher Wasserstand gemeldet
        with np.errstate(over="ignore", invalid="ignore"):
            inverse = 1.0 / c[order]
            # Fehlbetrag bis zur Aktivierung von Kanal k, ohne Summe großer Zahlen
            deficits = np.array([np.sum(inverse[k] - inverse[: k + 1]) for k in range(c.size)])
            active = max(1, int(np.count_nonzero(deficits < budget)))

            head = inverse[:active]
            d_active = np.array([(budget - np.sum(value - head)) / active for value in head])
            water_level = budget / active + float(np.mean(head))
        if not np.isfinite(water_level) or not np.all(np.isfinite(d_active)):
            raise NumericalError(
                "Wasserfüllung liefert keinen endlichen Wasserstand",
                diagnostics={"active": active, "water_level": water_level},
            )

        d_sorted = np.zeros(c.size)
        d_sorted[:active] = np.maximum(d_active, 0.0)
        d = np.empty(c.size)
        d[order] = d_sorted
        return WaterfillAllocation(d=d, water_level=float(water_level))

    def deterministic_capacity(
        self,
        channel: ChannelMatrix,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> CapacitySolution:
        """
        Kapazität eines bekannten Kanals für alpha = 1 (Wasserfüllung).

        Mit alpha = 1 ist Upsilon_t = (kappa^2/N_t) I unabhängig von Q.
        Wasserfüllung über c_i = SNR l_i / (SNR l_i kappa^2/N_t + 1), die
        Kapazität ist sum log2(1 + c_i d_i), erreicht durch
        Q = U_M diag(d) U_M^H.

        Raises:
            UnsupportedConfigurationError: alpha != 1 bei kappa > 0
        """
        self._require_isotropic_distortion(model)
        eig = herm_eig(channel.gram).truncated(channel.m)
        return self.waterfilling_capacity(eig, channel.n_t, snr, model)

    def optimize_covariance(
        self,
        channel: ChannelMatrix,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> CapacitySolution:
        """
        Numerische Maximierung der Transinformation über Q (beliebiges alpha).

        Startpunkte: isotrope Kovarianz und die Wasserfüllungs-Kovarianz
        des Modells mit alpha = 1. Das Ergebnis ist nie schlechter als
        diese Startpunkte.
        """
        eig = herm_eig(channel.gram).truncated(channel.m)
        isotropic_model = ImpairmentModel(kappa=model.kappa, alpha=1.0)
        waterfilling = self.waterfilling_capacity(eig, channel.n_t, snr, isotropic_model)
        starts = [Covariance.isotropic(channel.n_t), waterfilling.covariance]
        return self.optimizer.maximize(channel, snr, model, starts)

    def channel_capacity(
        self,
        channel: ChannelMatrix,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> CapacitySolution:
        """Kapazität eines bekannten Kanals: geschlossen für alpha=1, sonst numerisch."""
        if self._has_isotropic_distortion(model):
            return self.deterministic_capacity(channel, snr, model)
        return self.optimize_covariance(channel, snr, model)

    def asymptotic_mi(
        self,
        channel: ChannelMatrix,
        covariance: Covariance,
        model: ImpairmentModel,
    ) -> float:
        """
        Grenzwert der Transinformation für SNR -> unendlich.

        sum_i log2(1 + mu_i(Y^-1/2 Q Y^-1/2 P)) über die M größten
        Eigenwerte, P = Y^1/2 U_M (U_M^H Y U_M)^-1 U_M^H Y^1/2 die
        Projektion, Y = Upsilon_t(Q).

        Bei alpha = 0 muss der Aufrufer Q mit ``Covariance.floored`` von
        Nulleinträgen auf der Diagonale befreien.

        Raises:
            SingularDistortionError: Ein upsilon_n ist null
        """
        if covariance.n_t != channel.n_t:
            raise InputValidationError("Kovarianz passt nicht zu N_t")
        upsilon = model.distortion_covariance(covariance).upsilon
        zero_entries = np.nonzero(upsilon <= 0.0)[0]
        if zero_entries.size:
            raise SingularDistortionError(
                "Verzerrungskovarianz ist singulär",
                {"zero_entries": zero_entries.tolist(), "kappa": model.kappa, "alpha": model.alpha},
            )

        m = channel.m
        u = herm_eig(channel.gram).truncated(m).eigenvectors
        root = np.sqrt(upsilon)

        inner = hermitize((u.conj().T * upsilon) @ u)
        weighted = root[:, None] * u
        projection = weighted @ solve(inner, weighted.conj().T, assume_a="pos")
        scaled_q = covariance.q / np.outer(root, root)
        sandwich = hermitize(projection @ scaled_q @ projection)

        mu = herm_eig(sandwich).eigenvalues[:m]
        return float(np.sum(np.log2(1.0 + np.maximum(mu, 0.0))))

    # ------------------------------------------------------------------
    # Ensembles und Zufallskanäle
    # ------------------------------------------------------------------

    def ergodic_capacity_isotropic(
        self,
        dist: ChannelDistribution,
        snr: SnrPoint,
        model: ImpairmentModel,
        mc: MonteCarloConfig,
    ) -> MonteCarloEstimate:
        """
        Ergodische Kapazität mit Q = I/N_t.

        Für rechts-rotationsinvariante Verteilungen ist die isotrope
        Kovarianz optimal. Deterministische Verteilungen werden genau
        einmal ausgewertet.
        """
        return self.ergodic_capacity_curve(dist, [snr], model, mc)[0]

    def ergodic_capacity_curve(
        self,
        dist: ChannelDistribution,
        snr_grid: Sequence[SnrPoint],
        model: ImpairmentModel,
        mc: MonteCarloConfig,
    ) -> List[MonteCarloEstimate]:
        """
        Isotrope ergodische Kapazität über ein SNR-Gitter.

        Trial i zieht eine Realisierung aus RngStream(seed, i) und wertet
        sie für alle SNR-Punkte aus.
        """
        covariance = Covariance.isotropic(dist.n_t)

        if not dist.is_random:
            assert dist.matrix is not None
            return [
                MonteCarloEstimate(
                    mean=self.mutual_information(dist.matrix, covariance, snr, model),
                    stderr=0.0,
                    trials=1,
                )
                for snr in snr_grid
            ]

        def trial(index: int) -> np.ndarray:
            channel = self.channel_service.sample_channel(
                dist, RngStream(master_seed=mc.master_seed, stream_index=index)
            )
            return np.array(
                [self.mutual_information(channel, covariance, snr, model) for snr in snr_grid]
            )

        logger.debug(f"Ergodische Kapazität: {dist}, {model}, {mc.trials} Trials")
        samples = MonteCarloRunner(mc).run(trial).reshape(mc.trials, len(snr_grid))
        return self._column_estimates(samples)

    def deterministic_ensemble_capacity(
        self,
        n_t: int,
        n_r: int,
        snr_grid: Sequence[SnrPoint],
        model: ImpairmentModel,
        mc: MonteCarloConfig,
    ) -> List[MonteCarloEstimate]:
        """
        Mittlere Kapazität über deterministische Kanäle mit CN(0,1)-Einträgen.

        Jede Realisierung ist dem Sender bekannt: Wasserfüllung für
        alpha = 1 (oder kappa = 0), sonst numerische Optimierung.
        """
        dist = ChannelDistribution.iid_rayleigh(n_t, n_r)
        closed_form = self._has_isotropic_distortion(model)

        def trial(index: int) -> np.ndarray:
            channel = self.channel_service.sample_channel(
                dist, RngStream(master_seed=mc.master_seed, stream_index=index)
            )
            if closed_form:
                eig = herm_eig(channel.gram).truncated(channel.m)
                values = [
                    self.waterfilling_capacity(eig, n_t, snr, model).capacity_bits
                    for snr in snr_grid
                ]
            else:
                values = [
                    self.optimize_covariance(channel, snr, model).capacity_bits
                    for snr in snr_grid
                ]
            return np.array(values)

        samples = MonteCarloRunner(mc).run(trial).reshape(mc.trials, len(snr_grid))
        return self._column_estimates(samples)

    @staticmethod
    def regime_slope(snr_db: Sequence[float], capacity_bits: Sequence[float]) -> np.ndarray:
        """
        Steigung dC / dlog2(SNR) einer Kapazitätskurve.

        Etwa M im DoF-Bereich, gegen 0 im Sättigungsbereich.
        """
        snr_db = np.asarray(snr_db, dtype=np.float64)
        if snr_db.size < 2:
            raise InputValidationError("Steigung braucht mindestens zwei SNR-Punkte")
        log2_snr = snr_db * math.log2(10.0) / 10.0
        return np.gradient(np.asarray(capacity_bits, dtype=np.float64), log2_snr)

    # ------------------------------------------------------------------
    # Interne Helfer
    # ------------------------------------------------------------------

    @staticmethod
    def _has_isotropic_distortion(model: ImpairmentModel) -> bool:
        return model.is_ideal or model.alpha == 1.0

    def _require_isotropic_distortion(self, model: ImpairmentModel) -> None:
        if not self._has_isotropic_distortion(model):
            raise UnsupportedConfigurationError(
                f"Geschlossene Lösung nur für alpha=1 ({model}); optimize_covariance verwenden"
            )

    def waterfilling_capacity(
        self,
        eig: EigenDecomposition,
        n_t: int,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> CapacitySolution:
        """Wasserfüllungs-Kapazität aus einer vorab berechneten kompakten Eigenzerlegung."""
        s = snr.linear_snr
        eigenvalues = eig.eigenvalues
        gains = s * eigenvalues / (s * eigenvalues * model.kappa**2 / n_t + 1.0)
        allocation = self.waterfill(gains)
        capacity = float(np.sum(np.log2(1.0 + gains * allocation.d)))

        u = eig.eigenvectors
        q = (u * allocation.d) @ u.conj().T
        q = hermitize(q)
        q /= np.real(np.trace(q))
        return CapacitySolution(
            capacity_bits=capacity,
            covariance=Covariance(q=q),
            allocation=allocation,
        )

    @staticmethod
    def _column_estimates(samples: np.ndarray) -> List[MonteCarloEstimate]:
        return [MonteCarloEstimate.from_samples(samples[:, k]) for k in range(samples.shape[1])]
