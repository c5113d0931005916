"""Service für den Multiplexing-Gewinn bei endlichem SNR und seine Grenzwerte."""
import math
from typing import List, Optional, Sequence

import numpy as np

from ..config import get_logger
from ..exceptions import DegenerateRatioError, InputValidationError
from ..models import (
    Averaging,
    ChannelDistribution,
    ChannelMatrix,
    Covariance,
    ImpairmentModel,
    MonteCarloConfig,
    MonteCarloEstimate,
    MuxGainBounds,
    RngStream,
    SisoReference,
    SnrPoint,
)
from ..numerics import herm_eig, spectral_norm_sq
from ..processing.monte_carlo import MonteCarloRunner
from .capacity_service import CapacityService

logger = get_logger("muxgain")

# Kleinster zulässiger Nenner (SISO-Kapazität in Bit)
MIN_DENOMINATOR_BITS = 1e-15


def _ratio_of_means(numerator: np.ndarray, denominator: np.ndarray) -> MonteCarloEstimate:
    """
    Verhältnis der Mittelwerte gepaarter Stichproben.

    Standardfehler nach der Delta-Methode über die Residuen
    numerator - r * denominator.
    """
    mean_den = float(np.mean(denominator))
    if mean_den < MIN_DENOMINATOR_BITS:
        raise DegenerateRatioError(
            "SISO-Kapazität im Nenner praktisch null",
            {"denominator_bits": mean_den},
        )
    ratio = float(np.mean(numerator)) / mean_den
    n = numerator.size
    if n > 1:
        residual = numerator - ratio * denominator
        stderr = float(np.std(residual, ddof=1) / math.sqrt(n) / mean_den)
    else:
        stderr = 0.0
    return MonteCarloEstimate(mean=ratio, stderr=stderr, trials=n)


class MuxGainService:
    """Service für C_{N_t,N_r}(SNR) / C_{1,1}(SNR) und die Grenzen für SNR -> 0 / unendlich."""

    def __init__(self, capacity_service: Optional[CapacityService] = None) -> None:
        self.capacity_service = capacity_service or CapacityService()
        self.channel_service = self.capacity_service.channel_service

    @staticmethod
    def classic_multiplexing_gain(model: ImpairmentModel) -> float:
        """
        Klassischer Multiplexing-Gewinn lim C(SNR) / log2(SNR).

        Mit kappa > 0 ist die Kapazität beschränkt, der Grenzwert also 0.
        """
        if model.is_ideal:
            raise InputValidationError("Klassischer Multiplexing-Gewinn nur für kappa > 0 definiert")
        return 0.0

    def classic_gain_ratio(
        self,
        channel: ChannelMatrix,
        snr: SnrPoint,
        model: ImpairmentModel,
    ) -> float:
        """C(SNR) / log2(SNR) für einen bekannten Kanal (SNR > 1)."""
        if snr.linear_snr <= 1.0:
            raise InputValidationError(f"log2(SNR) muss positiv sein, SNR = {snr}")
        capacity = self.capacity_service.channel_capacity(channel, snr, model).capacity_bits
        return capacity / math.log2(snr.linear_snr)

    def finite_snr_mux_gain(
        self,
        dist: ChannelDistribution,
        snr: SnrPoint,
        model: ImpairmentModel,
        mc: MonteCarloConfig,
        siso_reference: SisoReference = SisoReference.FIXED,
    ) -> float:
        """
        Multiplexing-Gewinn C_{N_t,N_r}(SNR) / C_{1,1}(SNR).

        Deterministisch: Kapazität des bekannten Kanals durch die SISO-
        Kapazität mit |h| = 1. Rayleigh: ergodische Kapazität mit
        Q = I/N_t durch die ergodische SISO-Kapazität, beide aus
        denselben Trial-Strömen.

        Raises:
            DegenerateRatioError: SISO-Kapazität < 1e-15 Bit
        """
        return self.mux_gain_curve(dist, [snr], model, mc, siso_reference)[0].mean

    def mux_gain_curve(
        self,
        dist: ChannelDistribution,
        snr_grid: Sequence[SnrPoint],
        model: ImpairmentModel,
        mc: MonteCarloConfig,
        siso_reference: SisoReference = SisoReference.FIXED,
    ) -> List[MonteCarloEstimate]:
        """Multiplexing-Gewinn über ein SNR-Gitter (siehe ``finite_snr_mux_gain``)."""
        capacity = self.capacity_service
        k = len(snr_grid)

        if not dist.is_random:
            assert dist.matrix is not None
            channel = dist.matrix
            numerator = np.array(
                [capacity.channel_capacity(channel, snr, model).capacity_bits for snr in snr_grid]
            )
            if siso_reference == SisoReference.FIXED:
                h = self.channel_service.siso_reference(
                    dist, RngStream(master_seed=mc.master_seed), siso_reference
                )
                denominator = np.array(
                    [capacity.siso_capacity(h, snr, model) for snr in snr_grid]
                )
                return [
                    _ratio_of_means(numerator[j : j + 1], denominator[j : j + 1])
                    for j in range(k)
                ]
            siso_samples = MonteCarloRunner(mc).run(
                lambda index: self._siso_trial(index, dist, mc, snr_grid, model)
            ).reshape(mc.trials, k)
            return [
                _ratio_of_means(np.full(mc.trials, numerator[j]), siso_samples[:, j])
                for j in range(k)
            ]

        covariance = Covariance.isotropic(dist.n_t)

        def trial(index: int) -> np.ndarray:
            stream = RngStream(master_seed=mc.master_seed, stream_index=index)
            channel = self.channel_service.sample_channel(dist, stream)
            h = self.channel_service.siso_reference(dist, stream)
            mimo = [capacity.mutual_information(channel, covariance, snr, model) for snr in snr_grid]
            siso = [capacity.siso_capacity(h, snr, model) for snr in snr_grid]
            return np.array(mimo + siso)

        logger.debug(f"Multiplexing-Gewinn: {dist}, {model}, {mc.trials} Trials")
        samples = MonteCarloRunner(mc).run(trial).reshape(mc.trials, 2 * k)
        return [_ratio_of_means(samples[:, j], samples[:, k + j]) for j in range(k)]

    def ensemble_mux_gain(
        self,
        n_t: int,
        n_r: int,
        snr_grid: Sequence[SnrPoint],
        model: ImpairmentModel,
        mc: MonteCarloConfig,
        siso_reference: SisoReference = SisoReference.FIXED,
        averaging: Averaging = Averaging.MEAN_OF_RATIOS,
    ) -> List[MonteCarloEstimate]:
        """
        Mittlerer Multiplexing-Gewinn deterministischer Kanäle.

        Realisierung i: H_i mit CN(0,1)-Einträgen aus RngStream(seed, i),
        dem Sender bekannt. Die SISO-Referenz ist |h| = 1 oder h_i ~ CN(0,1)
        aus dem SISO-Unterstrom derselben Realisierung.

        Args:
            averaging: Mittel der Verhältnisse (Standard) oder Verhältnis der Mittel
        """
        capacity = self.capacity_service
        dist = ChannelDistribution.iid_rayleigh(n_t, n_r)
        k = len(snr_grid)
        closed_form = model.is_ideal or model.alpha == 1.0

        def trial(index: int) -> np.ndarray:
            stream = RngStream(master_seed=mc.master_seed, stream_index=index)
            channel = self.channel_service.sample_channel(dist, stream)
            h = self.channel_service.siso_reference(dist, stream, siso_reference)

            if closed_form:
                eig = herm_eig(channel.gram).truncated(channel.m)
                mimo = [
                    capacity.waterfilling_capacity(eig, n_t, snr, model).capacity_bits
                    for snr in snr_grid
                ]
            else:
                mimo = [
                    capacity.optimize_covariance(channel, snr, model).capacity_bits
                    for snr in snr_grid
                ]
            siso = [capacity.siso_capacity(h, snr, model) for snr in snr_grid]
            return np.array(mimo + siso)

        samples = MonteCarloRunner(mc).run(trial).reshape(mc.trials, 2 * k)
        numerator, denominator = samples[:, :k], samples[:, k:]

        if averaging == Averaging.RATIO_OF_MEANS:
            return [_ratio_of_means(numerator[:, j], denominator[:, j]) for j in range(k)]

        smallest = float(np.min(denominator))
        if smallest < MIN_DENOMINATOR_BITS:
            raise DegenerateRatioError(
                "SISO-Kapazität im Nenner praktisch null",
                {"denominator_bits": smallest},
            )
        ratios = numerator / denominator
        return [MonteCarloEstimate.from_samples(ratios[:, j]) for j in range(k)]

    def mux_gain_bounds(
        self,
        dist: ChannelDistribution,
        model: ImpairmentModel,
        mc: MonteCarloConfig,
    ) -> MuxGainBounds:
        """
        Grenzen des Multiplexing-Gewinns.

        SNR -> 0: E||H||_F^2 / (N_t E|h|^2) und E||H||_2^2 / E|h|^2.
        SNR -> unendlich: M und M log2(1 + N_t/(M kappa^2)) / log2(1 + 1/kappa^2).
        Für kappa = 0 ist das Paar für hohes SNR (M, M).

        Rayleigh: E||H||_F^2 = N_t N_r und E|h|^2 = 1 exakt,
        E||H||_2^2 per Monte Carlo.
        """
        m = dist.m
        siso_gain = 1.0

        if dist.is_random:
            frobenius = float(dist.n_t * dist.n_r)

            def trial(index: int) -> float:
                stream = RngStream(master_seed=mc.master_seed, stream_index=index)
                return spectral_norm_sq(self.channel_service.sample_channel(dist, stream).h)

            spectral = float(np.mean(MonteCarloRunner(mc).run(trial)))
        else:
            assert dist.matrix is not None
            frobenius = self.channel_service.frobenius_norm_sq(dist.matrix)
            spectral = spectral_norm_sq(dist.matrix.h)

        low_lower = frobenius / (dist.n_t * siso_gain)
        low_upper = max(spectral / siso_gain, low_lower)

        if model.is_ideal or dist.n_t <= dist.n_r:
            high_upper = float(m)
        else:
            kappa_sq = model.kappa**2
            high_upper = m * math.log2(1.0 + dist.n_t / (m * kappa_sq)) / math.log2(1.0 + 1.0 / kappa_sq)

        return MuxGainBounds(
            low_snr_lower=low_lower,
            low_snr_upper=low_upper,
            high_snr_lower=float(m),
            high_snr_upper=high_upper,
        )

    def _siso_trial(
        self,
        index: int,
        dist: ChannelDistribution,
        mc: MonteCarloConfig,
        snr_grid: Sequence[SnrPoint],
        model: ImpairmentModel,
    ) -> np.ndarray:
        stream = RngStream(master_seed=mc.master_seed, stream_index=index)
        h = self.channel_service.siso_reference(dist, stream, SisoReference.RANDOM)
        return np.array([self.capacity_service.siso_capacity(h, snr, model) for snr in snr_grid])
