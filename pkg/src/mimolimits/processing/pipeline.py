"""Sweep-Pipeline: baut die Ergebniskurven der vordefinierten Szenarien."""
from typing import Callable, Dict, List, Optional, Sequence

from ..config import get_logger, settings
from ..models import (
    ChannelDistribution,
    ChannelMatrix,
    ChannelSource,
    CurveKind,
    ImpairmentModel,
    MonteCarloConfig,
    MonteCarloEstimate,
    ResultCurve,
    Scenario,
    SnrPoint,
    SweepSpec,
)
from ..services import CapacityService, ChannelService, MuxGainService

logger = get_logger("pipeline")

# Feste Parametersätze der Abbildungs-Szenarien
FIG2_KAPPAS = (0.0, 0.05, 0.1)
FIG3_N_TS = (4, 12)
FIG3_KAPPA = 0.05
MUX_N_TS = (4, 8, 12)
MUX_KAPPAS = (0.0, 0.05)
N_R = 4


def _estimate_curve(
    label: str,
    kind: CurveKind,
    snr_db: Sequence[float],
    estimates: Sequence[MonteCarloEstimate],
    parameters: Dict[str, object],
) -> ResultCurve:
    return ResultCurve(
        label=label,
        kind=kind,
        snr_db=list(snr_db),
        values=[estimate.mean for estimate in estimates],
        stderr=[estimate.stderr for estimate in estimates],
        parameters=parameters,
    )


class SweepPipeline:
    """Pipeline für SNR-Sweeps (Kapazität, Multiplexing-Gewinn, Referenzlinien)."""

    def __init__(
        self,
        threads: int = 1,
        capacity_service: Optional[CapacityService] = None,
        muxgain_service: Optional[MuxGainService] = None,
    ) -> None:
        """
        Initialisiert die Pipeline.

        Args:
            threads: Worker für Monte-Carlo-Trials (ändert keine Ergebnisse)
            capacity_service: Optionaler CapacityService
            muxgain_service: Optionaler MuxGainService
        """
        self.threads = threads
        self.capacity_service = capacity_service or CapacityService()
        self.muxgain_service = muxgain_service or MuxGainService(self.capacity_service)
        self.channel_service: ChannelService = self.capacity_service.channel_service

        self._builders: Dict[Scenario, Callable[[SweepSpec], List[ResultCurve]]] = {
            Scenario.FIG2: self._fig2,
            Scenario.FIG3: self._fig3,
            Scenario.FIG4: self._fig4,
            Scenario.FIG5: self._fig5,
            Scenario.CUSTOM: self._custom,
        }

    def run(self, spec: SweepSpec) -> List[ResultCurve]:
        """Führt den Sweep aus und gibt alle Reihen in fester Reihenfolge zurück."""
        logger.info(
            f"Sweep {spec.scenario.value}: {len(spec.snr_grid_db())} SNR-Punkte, "
            f"{spec.trials} Trials, seed={spec.seed}"
        )
        curves = self._builders[spec.scenario](spec)
        logger.info(f"Sweep abgeschlossen: {len(curves)} Reihen")
        return curves

    def monte_carlo(self, spec: SweepSpec, trials: Optional[int] = None) -> MonteCarloConfig:
        return MonteCarloConfig(
            trials=trials or spec.trials,
            master_seed=spec.seed,
            max_parallelism=self.threads,
        )

    def channel_distribution(self, spec: SweepSpec) -> Optional[ChannelDistribution]:
        """
        Kanalverteilung des custom-Szenarios.

        None steht für das Ensemble deterministischer Gauß-Kanäle, das
        kein einzelnes ChannelDistribution-Objekt ist.
        """
        if spec.channel_file is not None:
            channel = self.channel_service.load_channel_csv(spec.channel_file)
            return ChannelDistribution.deterministic(channel)
        if spec.channel == ChannelSource.IDENTITY:
            return ChannelDistribution.deterministic(ChannelMatrix.identity(spec.n_r, spec.n_t))
        if spec.channel == ChannelSource.RAYLEIGH:
            return ChannelDistribution.iid_rayleigh(spec.n_t, spec.n_r)
        return None

    # ------------------------------------------------------------------
    # Szenarien
    # ------------------------------------------------------------------

    def _fig2(self, spec: SweepSpec) -> List[ResultCurve]:
        """4x4, Ensemble deterministischer Kanäle, alpha = 1, verschiedene kappa."""
        snr_db = spec.snr_grid_db()
        grid = [SnrPoint.from_db(value) for value in snr_db]
        mc = self.monte_carlo(spec)
        curves = []

        for kappa in FIG2_KAPPAS:
            model = ImpairmentModel(kappa=kappa, alpha=1.0)
            logger.info(f"Reihe deterministic_kappa{kappa:g}")
            estimates = self.capacity_service.deterministic_ensemble_capacity(
                N_R, N_R, grid, model, mc
            )
            curves.append(
                _estimate_curve(
                    f"deterministic_kappa{kappa:g}",
                    CurveKind.CAPACITY,
                    snr_db,
                    estimates,
                    {"n_t": N_R, "n_r": N_R, "kappa": kappa, "alpha": 1.0},
                )
            )

        for kappa in FIG2_KAPPAS:
            if kappa > 0:
                curves.extend(self._limit_curves(N_R, N_R, kappa, snr_db, suffix=f"kappa{kappa:g}"))
        return curves

    def _fig3(self, spec: SweepSpec) -> List[ResultCurve]:
        """N_r = 4, kappa = 0.05, N_t in {4, 12}: deterministisch (alpha 0/1) und Rayleigh."""
        snr_db = spec.snr_grid_db()
        grid = [SnrPoint.from_db(value) for value in snr_db]
        mc = self.monte_carlo(spec)
        mc_optimizer = self.monte_carlo(spec, min(spec.trials, settings.optimizer_realizations))
        curves = []

        for n_t in FIG3_N_TS:
            for alpha, config in ((1.0, mc), (0.0, mc_optimizer)):
                model = ImpairmentModel(kappa=FIG3_KAPPA, alpha=alpha)
                label = f"det_alpha{alpha:g}_nt{n_t}"
                logger.info(f"Reihe {label} ({config.trials} Realisierungen)")
                estimates = self.capacity_service.deterministic_ensemble_capacity(
                    n_t, N_R, grid, model, config
                )
                curves.append(
                    _estimate_curve(
                        label,
                        CurveKind.CAPACITY,
                        snr_db,
                        estimates,
                        {"n_t": n_t, "n_r": N_R, "kappa": FIG3_KAPPA, "alpha": alpha},
                    )
                )

            model = ImpairmentModel(kappa=FIG3_KAPPA, alpha=1.0)
            label = f"rayleigh_nt{n_t}"
            logger.info(f"Reihe {label}")
            estimates = self.capacity_service.ergodic_capacity_curve(
                ChannelDistribution.iid_rayleigh(n_t, N_R), grid, model, mc
            )
            curves.append(
                _estimate_curve(
                    label,
                    CurveKind.CAPACITY,
                    snr_db,
                    estimates,
                    {"n_t": n_t, "n_r": N_R, "kappa": FIG3_KAPPA},
                )
            )

        for n_t in FIG3_N_TS:
            curves.extend(self._limit_curves(n_t, N_R, FIG3_KAPPA, snr_db, suffix=f"nt{n_t}"))
        return curves

    def _fig4(self, spec: SweepSpec) -> List[ResultCurve]:
        """Multiplexing-Gewinn bei Rayleigh-Fading, N_r = 4, N_t in {4, 8, 12}."""
        snr_db = spec.snr_grid_db()
        grid = [SnrPoint.from_db(value) for value in snr_db]
        mc = self.monte_carlo(spec)
        curves = []

        for n_t in MUX_N_TS:
            dist = ChannelDistribution.iid_rayleigh(n_t, N_R)
            for kappa in MUX_KAPPAS:
                label = f"rayleigh_nt{n_t}_kappa{kappa:g}"
                logger.info(f"Reihe {label}")
                estimates = self.muxgain_service.mux_gain_curve(
                    dist, grid, ImpairmentModel(kappa=kappa), mc
                )
                curves.append(
                    _estimate_curve(
                        label,
                        CurveKind.MUX_GAIN,
                        snr_db,
                        estimates,
                        {"n_t": n_t, "n_r": N_R, "kappa": kappa},
                    )
                )

        for n_t in MUX_N_TS:
            curves.extend(self._bound_curves(n_t, N_R, MUX_KAPPAS[-1], snr_db, mc))
        return curves

    def _fig5(self, spec: SweepSpec) -> List[ResultCurve]:
        """Mittlerer Multiplexing-Gewinn deterministischer Kanäle, N_r = 4, N_t in {4, 8, 12}."""
        snr_db = spec.snr_grid_db()
        grid = [SnrPoint.from_db(value) for value in snr_db]
        mc = self.monte_carlo(spec)
        curves = []

        for n_t in MUX_N_TS:
            for kappa in MUX_KAPPAS:
                label = f"deterministic_nt{n_t}_kappa{kappa:g}"
                logger.info(f"Reihe {label}")
                estimates = self.muxgain_service.ensemble_mux_gain(
                    n_t,
                    N_R,
                    grid,
                    ImpairmentModel(kappa=kappa, alpha=1.0),
                    mc,
                    siso_reference=spec.siso_reference,
                    averaging=spec.averaging,
                )
                curves.append(
                    _estimate_curve(
                        label,
                        CurveKind.MUX_GAIN,
                        snr_db,
                        estimates,
                        {
                            "n_t": n_t,
                            "n_r": N_R,
                            "kappa": kappa,
                            "siso_reference": spec.siso_reference.value,
                            "averaging": spec.averaging.value,
                        },
                    )
                )

        for n_t in MUX_N_TS:
            curves.extend(self._bound_curves(n_t, N_R, MUX_KAPPAS[-1], snr_db, mc))
        return curves

    def _custom(self, spec: SweepSpec) -> List[ResultCurve]:
        """Kapazität für frei gewählte N_t, N_r, kappa, alpha und Kanalquelle."""
        snr_db = spec.snr_grid_db()
        grid = [SnrPoint.from_db(value) for value in snr_db]
        model = ImpairmentModel(kappa=spec.kappa, alpha=spec.alpha)
        dist = self.channel_distribution(spec)
        n_t, n_r = (dist.n_t, dist.n_r) if dist is not None else (spec.n_t, spec.n_r)

        if dist is None:
            trials = spec.trials
            if not (model.is_ideal or model.alpha == 1.0):
                trials = min(trials, settings.optimizer_realizations)
            estimates = self.capacity_service.deterministic_ensemble_capacity(
                n_t, n_r, grid, model, self.monte_carlo(spec, trials)
            )
            source = ChannelSource.ENSEMBLE.value
        elif dist.is_random:
            estimates = self.capacity_service.ergodic_capacity_curve(
                dist, grid, model, self.monte_carlo(spec)
            )
            source = ChannelSource.RAYLEIGH.value
        else:
            assert dist.matrix is not None
            estimates = [
                MonteCarloEstimate(
                    mean=self.capacity_service.channel_capacity(dist.matrix, snr, model).capacity_bits
                )
                for snr in grid
            ]
            source = "file" if spec.channel_file is not None else ChannelSource.IDENTITY.value

        label = f"{source}_kappa{spec.kappa:g}_alpha{spec.alpha:g}"
        parameters = {"n_t": n_t, "n_r": n_r, "kappa": spec.kappa, "alpha": spec.alpha}
        curve = _estimate_curve(label, CurveKind.CAPACITY, snr_db, estimates, parameters)
        curves = [curve]

        if len(snr_db) > 1:
            slope = self.capacity_service.regime_slope(snr_db, curve.values)
            curves.append(
                ResultCurve(
                    label=f"{label}_slope",
                    kind=CurveKind.SLOPE,
                    snr_db=list(snr_db),
                    values=[float(value) for value in slope],
                    stderr=[0.0] * len(snr_db),
                    parameters=parameters,
                )
            )
        if not model.is_ideal:
            curves.extend(self._limit_curves(n_t, n_r, spec.kappa, snr_db, suffix=f"kappa{spec.kappa:g}"))
        return curves

    # ------------------------------------------------------------------
    # Referenzlinien
    # ------------------------------------------------------------------

    def _limit_curves(
        self,
        n_t: int,
        n_r: int,
        kappa: float,
        snr_db: Sequence[float],
        suffix: str,
    ) -> List[ResultCurve]:
        """Kapazitätsgrenzen als konstante Reihen; eine Reihe, wenn beide zusammenfallen."""
        limits = self.capacity_service.capacity_limits(n_t, n_r, ImpairmentModel(kappa=kappa))
        parameters = {"n_t": n_t, "n_r": n_r, "kappa": kappa}
        if limits.lower == limits.upper:
            return [ResultCurve.constant(f"limit_{suffix}", list(snr_db), limits.lower, parameters)]
        return [
            ResultCurve.constant(f"limit_lower_{suffix}", list(snr_db), limits.lower, parameters),
            ResultCurve.constant(f"limit_upper_{suffix}", list(snr_db), limits.upper, parameters),
        ]

    def _bound_curves(
        self,
        n_t: int,
        n_r: int,
        kappa: float,
        snr_db: Sequence[float],
        mc: MonteCarloConfig,
    ) -> List[ResultCurve]:
        """Grenzen des Multiplexing-Gewinns als konstante Reihen."""
        bounds = self.muxgain_service.mux_gain_bounds(
            ChannelDistribution.iid_rayleigh(n_t, n_r), ImpairmentModel(kappa=kappa), mc
        )
        parameters = {"n_t": n_t, "n_r": n_r, "kappa": kappa}
        return [
            ResultCurve.constant(f"bound_{name}_nt{n_t}", list(snr_db), value, parameters)
            for name, value in bounds.model_dump().items()
        ]
