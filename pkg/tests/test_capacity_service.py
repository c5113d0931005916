"""Tests für den CapacityService."""
import itertools
import math

import numpy as np
import pytest

from mimolimits.exceptions import (
    InputValidationError,
    NumericalError,
    SingularDistortionError,
    UnboundedCapacityError,
    UnsupportedConfigurationError,
)
from mimolimits.models import (
    ChannelDistribution,
    ChannelMatrix,
    Covariance,
    ImpairmentModel,
    MonteCarloConfig,
    SnrPoint,
)
from mimolimits.services import CapacityService

LIMIT_4X4_KAPPA_005 = 4 * math.log2(401)  # 34.5898
LIMIT_4X4_KAPPA_01 = 4 * math.log2(101)  # 26.6329
UPPER_12X4_KAPPA_005 = 4 * math.log2(1201)  # 40.9201


def random_channel(rng: np.random.Generator, n_r: int, n_t: int) -> ChannelMatrix:
    h = (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))) / math.sqrt(2)
    return ChannelMatrix(h=h)


def random_covariance(rng: np.random.Generator, n: int) -> Covariance:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q = a @ a.conj().T
    return Covariance(q=q / np.real(np.trace(q)))


def ideal_mutual_information(h: np.ndarray, q: np.ndarray, snr: float) -> float:
    """Transinformation idealer Transceiver über slogdet."""
    matrix = np.eye(h.shape[0]) + snr * h @ q @ h.conj().T
    _, logdet = np.linalg.slogdet(matrix)
    return logdet / math.log(2.0)


class TestMutualInformation:
    """Tests für mutual_information und siso_capacity."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()
        self.rng = np.random.default_rng(7)

    def test_ideal_siso(self) -> None:
        """Test: H = 1, Q = 1, SNR = 1, kappa = 0 -> 1 Bit."""
        value = self.service.mutual_information(
            ChannelMatrix(h=[[1.0]]),
            Covariance(q=[[1.0]]),
            SnrPoint(linear_snr=1.0),
            ImpairmentModel(kappa=0.0),
        )

        assert value == pytest.approx(1.0, abs=1e-14)

    def test_impaired_siso(self) -> None:
        """Test: kappa^2 = 0.01 -> log2(1 + 1/1.01) = 0.99284 Bit."""
        value = self.service.mutual_information(
            ChannelMatrix(h=[[1.0]]),
            Covariance(q=[[1.0]]),
            SnrPoint(linear_snr=1.0),
            ImpairmentModel(kappa=0.1),
        )

        assert value == pytest.approx(math.log2(1.0 + 1.0 / 1.01), abs=1e-14)
        assert value == pytest.approx(0.99284, abs=1e-5)

    def test_siso_capacity_matches(self) -> None:
        """Test: Skalare Formel stimmt mit dem Matrixausdruck überein."""
        model = ImpairmentModel(kappa=0.07, alpha=0.3)
        for h in (0.3 + 0.4j, 1.0, -2.0j):
            for snr_db in (-10.0, 0.0, 30.0):
                snr = SnrPoint.from_db(snr_db)
                matrix = self.service.mutual_information(
                    ChannelMatrix(h=[[h]]), Covariance(q=[[1.0]]), snr, model
                )

                assert self.service.siso_capacity(h, snr, model) == pytest.approx(matrix, abs=1e-12)

    def test_ideal_oracle(self) -> None:
        """Test: kappa = 0 entspricht der idealen log-det-Formel auf 1e-9."""
        model = ImpairmentModel(kappa=0.0, alpha=0.5)
        for _ in range(1000):
            n_t, n_r = self.rng.integers(1, 6, size=2)
            channel = random_channel(self.rng, int(n_r), int(n_t))
            covariance = random_covariance(self.rng, int(n_t))
            snr = 10.0 ** self.rng.uniform(-2.0, 4.0)

            value = self.service.mutual_information(channel, covariance, SnrPoint(linear_snr=snr), model)

            assert value == pytest.approx(
                ideal_mutual_information(channel.h, covariance.q, snr), abs=1e-9
            )

    def test_snr_monotonicity(self) -> None:
        """Test: Transinformation steigt nicht fallend im SNR."""
        violations = 0
        for _ in range(10_000):
            n_t = int(self.rng.integers(1, 5))
            channel = random_channel(self.rng, 4, n_t)
            covariance = random_covariance(self.rng, n_t)
            model = ImpairmentModel(
                kappa=float(self.rng.uniform(0.0, 0.2)),
                alpha=float(self.rng.uniform(0.0, 1.0)),
            )
            low, high = np.sort(10.0 ** self.rng.uniform(-3.0, 8.0, size=2))

            value_low = self.service.mutual_information(channel, covariance, SnrPoint(linear_snr=low), model)
            value_high = self.service.mutual_information(channel, covariance, SnrPoint(linear_snr=high), model)
            if value_high < value_low - 1e-12:
                violations += 1

        assert violations == 0

    def test_dimension_mismatch(self) -> None:
        """Test: Kovarianz mit falscher Dimension wird abgelehnt."""
        with pytest.raises(InputValidationError):
            self.service.mutual_information(
                ChannelMatrix.identity(2, 2),
                Covariance.isotropic(3),
                SnrPoint(linear_snr=1.0),
                ImpairmentModel(kappa=0.1),
            )


class TestCapacityLimits:
    """Tests für capacity_limits."""

    def test_square(self) -> None:
        """Test: 4x4, kappa = 0.05 -> lower = upper = 34.5898."""
        limits = CapacityService.capacity_limits(4, 4, ImpairmentModel(kappa=0.05))

        assert limits.lower == pytest.approx(LIMIT_4X4_KAPPA_005, abs=1e-12)
        assert limits.upper == limits.lower
        assert limits.lower == pytest.approx(34.5898, abs=1e-4)
        assert limits.m == 4

    def test_square_kappa_01(self) -> None:
        """Test: 4x4, kappa = 0.1 -> 26.6329."""
        limits = CapacityService.capacity_limits(4, 4, ImpairmentModel(kappa=0.1))

        assert limits.lower == pytest.approx(26.6329, abs=1e-4)

    def test_more_transmit_antennas(self) -> None:
        """Test: 12x4 -> lower 34.5898, upper 4 log2(1201) = 40.9201."""
        limits = CapacityService.capacity_limits(12, 4, ImpairmentModel(kappa=0.05))

        assert limits.lower == pytest.approx(34.5898, abs=1e-4)
        assert limits.upper == pytest.approx(UPPER_12X4_KAPPA_005, abs=1e-9)
        assert limits.upper == pytest.approx(40.9201, abs=1e-4)

    def test_ideal_unbounded(self) -> None:
        """Test: kappa = 0 hat keine endliche Grenze."""
        with pytest.raises(UnboundedCapacityError):
            CapacityService.capacity_limits(4, 4, ImpairmentModel(kappa=0.0))


class TestWaterfill:
    """Tests für die exakte Wasserfüllung."""

    def test_equal_gains(self) -> None:
        """Test: c = (g, g) -> d = (1/2, 1/2)."""
        allocation = CapacityService.waterfill([3.0, 3.0])

        np.testing.assert_allclose(allocation.d, [0.5, 0.5], atol=1e-15)

    def test_two_streams(self) -> None:
        """Test: c = (10, 1) -> d = (0.95, 0.05), mu = 1.05."""
        allocation = CapacityService.waterfill([10.0, 1.0])

        np.testing.assert_allclose(allocation.d, [0.95, 0.05], atol=1e-9)
        assert allocation.water_level == pytest.approx(1.05, abs=1e-9)
        assert allocation.active_streams == 2

    def test_inactive_stream(self) -> None:
        """Test: c = (10, 0.001) -> d = (1, 0)."""
        allocation = CapacityService.waterfill([10.0, 0.001])

        np.testing.assert_allclose(allocation.d, [1.0, 0.0], atol=1e-15)
        assert allocation.water_level == pytest.approx(1.1)

    def test_input_order_preserved(self) -> None:
        """Test: Ergebnis in Eingangsreihenfolge."""
        allocation = CapacityService.waterfill([1.0, 10.0])

        np.testing.assert_allclose(allocation.d, [0.05, 0.95], atol=1e-9)

    def test_empty(self) -> None:
        """Test: Leerer Gewinnvektor wird abgelehnt."""
        with pytest.raises(InputValidationError):
            CapacityService.waterfill([])

    def test_non_positive(self) -> None:
        """Test: c_i <= 0 wird abgelehnt."""
        with pytest.raises(InputValidationError):
            CapacityService.waterfill([1.0, 0.0])

    def test_tiny_gains_keep_budget(self) -> None:
        """Test: Gewinne ~1e-20 -> Budget bleibt erhalten, Wasserstand endlich."""
        allocation = CapacityService.waterfill([1e-20, 1e-21])

        np.testing.assert_allclose(allocation.d, [1.0, 0.0], atol=1e-15)
        assert np.sum(allocation.d) == pytest.approx(1.0, abs=1e-15)
        assert math.isfinite(allocation.water_level)

    def test_tiny_equal_gains(self) -> None:
        """Test: Gleiche winzige Gewinne teilen das Budget gleichmäßig."""
        allocation = CapacityService.waterfill([1e-20, 1e-20, 1e-20])

        np.testing.assert_allclose(allocation.d, [1 / 3] * 3, atol=1e-15)

    def test_subnormal_gain_is_numerical_error(self) -> None:
        """Test: 1/c läuft über -> NumericalError statt NaN."""
        with pytest.raises(NumericalError):
            CapacityService.waterfill([1e-320])

    @pytest.mark.parametrize("m", [2, 3])
    def test_beats_simplex_grid(self, m: int) -> None:
        """Test: Wasserfüllung schlägt jedes Gitter auf dem Simplex (Schritt 1e-3)."""
        rng = np.random.default_rng(m)
        steps = np.arange(0, 1001) / 1000.0
        if m == 2:
            grid = np.stack([steps, 1.0 - steps], axis=1)
        else:
            d1, d2 = np.meshgrid(steps, steps, indexing="ij")
            mask = d1 + d2 <= 1.0 + 1e-12
            grid = np.stack([d1[mask], d2[mask], np.maximum(1.0 - d1[mask] - d2[mask], 0.0)], axis=1)

        for _ in range(100):
            gains = 10.0 ** rng.uniform(-1.0, 2.0, size=m)
            allocation = CapacityService.waterfill(gains)
            optimum = np.sum(np.log2(1.0 + gains * allocation.d))
            best_grid = np.max(np.sum(np.log2(1.0 + gains * grid), axis=1))

            assert np.sum(allocation.d) == pytest.approx(1.0, abs=1e-10)
            assert optimum >= best_grid - 1e-12


class TestDeterministicCapacity:
    """Tests für deterministic_capacity und channel_capacity."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()
        self.rng = np.random.default_rng(11)
        self.model = ImpairmentModel(kappa=0.05, alpha=1.0)

    def test_identity_channel(self) -> None:
        """Test: H = I_4 -> gleichverteilte Leistung, geschlossene Formel."""
        for snr_db in (-10.0, 10.0, 40.0):
            snr = SnrPoint.from_db(snr_db)
            solution = self.service.deterministic_capacity(ChannelMatrix.identity(4, 4), snr, self.model)
            s = snr.linear_snr
            expected = 4 * math.log2(1.0 + (s / 4) / (s * 0.000625 + 1.0))

            assert solution.capacity_bits == pytest.approx(expected, abs=1e-10)
            np.testing.assert_allclose(solution.allocation.d, [0.25] * 4, atol=1e-12)

    def test_certificate_achieves_capacity(self) -> None:
        """Test: Die zurückgegebene Kovarianz erreicht die Kapazität."""
        channel = random_channel(self.rng, 4, 6)
        snr = SnrPoint.from_db(15.0)
        solution = self.service.deterministic_capacity(channel, snr, self.model)

        achieved = self.service.mutual_information(channel, solution.covariance, snr, self.model)

        assert achieved == pytest.approx(solution.capacity_bits, abs=1e-9)

    def test_high_snr_saturation(self) -> None:
        """Test: SNR = 1e10, 4x4 -> 34.5898 auf 1e-3."""
        for _ in range(10):
            channel = random_channel(self.rng, 4, 4)
            solution = self.service.deterministic_capacity(
                channel, SnrPoint(linear_snr=1e10), self.model
            )

            assert solution.capacity_bits == pytest.approx(LIMIT_4X4_KAPPA_005, abs=1e-3)

    def test_dominates_random_covariances(self) -> None:
        """Test: Kapazität >= Transinformation jeder zulässigen Kovarianz."""
        for _ in range(10):
            channel = random_channel(self.rng, 4, 4)
            snr = SnrPoint.from_db(float(self.rng.uniform(-10.0, 50.0)))
            capacity = self.service.deterministic_capacity(channel, snr, self.model).capacity_bits

            isotropic = self.service.mutual_information(channel, Covariance.isotropic(4), snr, self.model)
            assert capacity >= isotropic - 1e-12
            for _ in range(100):
                other = self.service.mutual_information(
                    channel, random_covariance(self.rng, 4), snr, self.model
                )
                assert capacity >= other - 1e-10

    def test_alpha_not_one_rejected(self) -> None:
        """Test: alpha != 1 verweist auf optimize_covariance."""
        with pytest.raises(UnsupportedConfigurationError):
            self.service.deterministic_capacity(
                ChannelMatrix.identity(2, 2),
                SnrPoint(linear_snr=10.0),
                ImpairmentModel(kappa=0.05, alpha=0.0),
            )

    def test_vanishing_snr_gives_valid_covariance(self) -> None:
        """Test: -200 dB -> endliche Kovarianz mit Spur 1, Kapazität ~ 0."""
        channel = ChannelMatrix(h=np.diag([1.0, 0.5]).astype(np.complex128))
        solution = self.service.deterministic_capacity(channel, SnrPoint.from_db(-200.0), self.model)

        assert np.all(np.isfinite(solution.covariance.q))
        assert np.real(np.trace(solution.covariance.q)) == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= solution.capacity_bits < 1e-15

    def test_ideal_any_alpha(self) -> None:
        """Test: kappa = 0 erlaubt jedes alpha."""
        solution = self.service.deterministic_capacity(
            ChannelMatrix.identity(2, 2),
            SnrPoint(linear_snr=2.0),
            ImpairmentModel(kappa=0.0, alpha=0.0),
        )

        assert solution.capacity_bits == pytest.approx(2.0, abs=1e-12)


class TestAsymptoticMutualInformation:
    """Tests für den Grenzwert der Transinformation bei SNR -> unendlich."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()
        self.rng = np.random.default_rng(23)
        self.model = ImpairmentModel(kappa=0.05, alpha=1.0)

    def test_isotropic_attains_lower_bound(self) -> None:
        """Test: Q = I/N_t, N_t <= N_r -> M log2(1 + 1/kappa^2)."""
        for n_t, n_r in [(4, 4), (2, 4), (3, 5)]:
            channel = random_channel(self.rng, n_r, n_t)
            value = self.service.asymptotic_mi(channel, Covariance.isotropic(n_t), self.model)

            assert value == pytest.approx(n_t * math.log2(1.0 + 1.0 / 0.05**2), abs=1e-9)

    def test_waterfilling_covariance(self) -> None:
        """Test: Wasserfüllungs-Q bei hohem SNR, 4x4 -> 34.5898."""
        channel = random_channel(self.rng, 4, 4)
        solution = self.service.deterministic_capacity(channel, SnrPoint(linear_snr=1e10), self.model)

        value = self.service.asymptotic_mi(channel, solution.covariance, self.model)

        assert value == pytest.approx(LIMIT_4X4_KAPPA_005, abs=1e-3)

    def test_convergence(self) -> None:
        """Test: |I(SNR = 1e10) - I(inf)| < 1e-3 auf 100 Instanzen."""
        for _ in range(100):
            channel = random_channel(self.rng, 4, 4)
            covariance = random_covariance(self.rng, 4)

            finite = self.service.mutual_information(
                channel, covariance, SnrPoint(linear_snr=1e10), self.model
            )
            limit = self.service.asymptotic_mi(channel, covariance, self.model)

            assert abs(finite - limit) < 1e-3

    def test_upper_bound_sandwich(self) -> None:
        """Test: Grenzwert <= M log2(1 + N_t/(M kappa^2)) für jede Kovarianz."""
        for _ in range(100):
            n_t = int(self.rng.integers(2, 9))
            channel = random_channel(self.rng, 4, n_t)
            covariance = random_covariance(self.rng, n_t)
            m = min(n_t, 4)
            upper = m * math.log2(1.0 + n_t / (m * 0.05**2))

            assert self.service.asymptotic_mi(channel, covariance, self.model) <= upper + 1e-9

    def test_singular_distortion(self) -> None:
        """Test: alpha = 0 und q_n = 0 -> SingularDistortionError."""
        model = ImpairmentModel(kappa=0.05, alpha=0.0)
        covariance = Covariance(q=np.diag([1.0, 0.0]))

        with pytest.raises(SingularDistortionError):
            self.service.asymptotic_mi(ChannelMatrix.identity(2, 2), covariance, model)

    def test_floored_covariance(self) -> None:
        """Test: Mit floored() ist der Grenzwert endlich."""
        model = ImpairmentModel(kappa=0.05, alpha=0.0)
        covariance = Covariance(q=np.diag([1.0, 0.0])).floored()

        value = self.service.asymptotic_mi(ChannelMatrix.identity(2, 2), covariance, model)

        assert np.isfinite(value)
        assert value >= math.log2(1.0 + 1.0 / 0.05**2) - 1e-6


class TestErgodicCapacity:
    """Tests für die ergodische Kapazität mit Q = I/N_t."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()
        self.model = ImpairmentModel(kappa=0.05, alpha=1.0)

    def test_deterministic_single_point(self) -> None:
        """Test: Deterministische Verteilung = eine Auswertung."""
        channel = ChannelMatrix(h=[[1.0, 0.5], [0.2j, 1.0]])
        snr = SnrPoint.from_db(10.0)
        mc = MonteCarloConfig(trials=50, master_seed=1)

        estimate = self.service.ergodic_capacity_isotropic(
            ChannelDistribution.deterministic(channel), snr, self.model, mc
        )

        assert estimate.mean == self.service.mutual_information(
            channel, Covariance.isotropic(2), snr, self.model
        )
        assert estimate.stderr == 0.0
        assert estimate.trials == 1

    def test_rayleigh_saturation(self) -> None:
        """Test: 4x4 Rayleigh bei 70 dB nahe 34.5898."""
        estimate = self.service.ergodic_capacity_isotropic(
            ChannelDistribution.iid_rayleigh(4, 4),
            SnrPoint.from_db(70.0),
            self.model,
            MonteCarloConfig(trials=2000, master_seed=5, max_parallelism=4),
        )

        assert estimate.mean == pytest.approx(LIMIT_4X4_KAPPA_005, rel=0.01)
        assert estimate.mean <= LIMIT_4X4_KAPPA_005 + 1e-9

    def test_rayleigh_12x4_lower_bound(self) -> None:
        """Test: 12x4 Rayleigh bei 70 dB bleibt bei der unteren Grenze."""
        estimate = self.service.ergodic_capacity_isotropic(
            ChannelDistribution.iid_rayleigh(12, 4),
            SnrPoint.from_db(70.0),
            self.model,
            MonteCarloConfig(trials=1000, master_seed=3, max_parallelism=4),
        )

        # Bei 70 dB liegt der Mittelwert ~3e-4 Bit unter der Grenze, der
        # Standardfehler ist ~3e-6: Vergleich gegen die Bias-Schranke, nicht gegen 3 sigma
        assert estimate.mean == pytest.approx(LIMIT_4X4_KAPPA_005, abs=1e-3)
        assert estimate.mean <= LIMIT_4X4_KAPPA_005 + 1e-9

    def test_low_snr_slope(self) -> None:
        """Test: kappa = 0, SNR = 1e-4 -> C ~ SNR N_r / ln 2."""
        estimate = self.service.ergodic_capacity_isotropic(
            ChannelDistribution.iid_rayleigh(4, 4),
            SnrPoint(linear_snr=1e-4),
            ImpairmentModel(kappa=0.0),
            MonteCarloConfig(trials=4000, master_seed=9, max_parallelism=4),
        )

        assert estimate.mean == pytest.approx(1e-4 * 4 / math.log(2.0), rel=0.05)

    def test_parallel_reproducibility(self) -> None:
        """Test: Bitidentische Ergebnisse mit 1 und 8 Workern."""
        dist = ChannelDistribution.iid_rayleigh(4, 4)
        snr = SnrPoint.from_db(20.0)

        sequential = self.service.ergodic_capacity_isotropic(
            dist, snr, self.model, MonteCarloConfig(trials=200, master_seed=77, max_parallelism=1)
        )
        parallel = self.service.ergodic_capacity_isotropic(
            dist, snr, self.model, MonteCarloConfig(trials=200, master_seed=77, max_parallelism=8)
        )

        assert sequential.mean == parallel.mean
        assert sequential.stderr == parallel.stderr

    def test_curve_matches_points(self) -> None:
        """Test: Kurve über das Gitter entspricht Einzelauswertungen."""
        dist = ChannelDistribution.iid_rayleigh(2, 3)
        grid = [SnrPoint.from_db(value) for value in (0.0, 20.0)]
        mc = MonteCarloConfig(trials=30, master_seed=4)

        curve = self.service.ergodic_capacity_curve(dist, grid, self.model, mc)
        points = [self.service.ergodic_capacity_isotropic(dist, snr, self.model, mc) for snr in grid]

        assert [estimate.mean for estimate in curve] == [estimate.mean for estimate in points]


class TestEnsembleCapacity:
    """Tests für Ensembles deterministischer Kanäle."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()
        self.grid = [SnrPoint.from_db(70.0)]

    @pytest.mark.parametrize(
        "kappa, expected",
        [(0.05, LIMIT_4X4_KAPPA_005), (0.1, LIMIT_4X4_KAPPA_01)],
    )
    def test_square_saturation(self, kappa: float, expected: float) -> None:
        """Test: 4x4 bei 70 dB innerhalb 1 % der Sättigung."""
        estimate = self.service.deterministic_ensemble_capacity(
            4,
            4,
            self.grid,
            ImpairmentModel(kappa=kappa, alpha=1.0),
            MonteCarloConfig(trials=1000, master_seed=1, max_parallelism=4),
        )[0]

        assert estimate.mean == pytest.approx(expected, rel=0.01)
        assert estimate.trials == 1000

    def test_more_transmit_antennas_upper_bound(self) -> None:
        """Test: 12x4, alpha = 1 bei 70 dB innerhalb 1 % von 40.9201."""
        estimate = self.service.deterministic_ensemble_capacity(
            12,
            4,
            self.grid,
            ImpairmentModel(kappa=0.05, alpha=1.0),
            MonteCarloConfig(trials=200, master_seed=2, max_parallelism=4),
        )[0]

        assert estimate.mean == pytest.approx(UPPER_12X4_KAPPA_005, rel=0.01)


class TestRegimeSlope:
    """Tests für die Steigung dC/dlog2(SNR)."""

    def setup_method(self) -> None:
        """Setup für jeden Test."""
        self.service = CapacityService()

    def _curve(self, kappa: float, snr_db: list) -> list:
        model = ImpairmentModel(kappa=kappa)
        return [
            self.service.deterministic_capacity(
                ChannelMatrix.identity(4, 4), SnrPoint.from_db(value), model
            ).capacity_bits
            for value in snr_db
        ]

    def test_degrees_of_freedom_regime(self) -> None:
        """Test: Ideale Transceiver haben bei hohem SNR Steigung ~ M."""
        snr_db = [60.0, 62.0, 64.0]
        slope = self.service.regime_slope(snr_db, self._curve(0.0, snr_db))

        assert slope[1] == pytest.approx(4.0, rel=1e-3)

    def test_saturation_regime(self) -> None:
        """Test: kappa = 0.05 hat bei 80 dB Steigung ~ 0."""
        snr_db = [78.0, 80.0, 82.0]
        slope = self.service.regime_slope(snr_db, self._curve(0.05, snr_db))

        assert abs(slope[1]) < 1e-3

    def test_needs_two_points(self) -> None:
        """Test: Ein Punkt reicht nicht."""
        with pytest.raises(InputValidationError):
            self.service.regime_slope([0.0], [1.0])
