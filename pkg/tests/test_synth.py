import numpy as np
import pytest

from mmchar.errors import ConfigError, InvalidInputError
from mmchar.synth import (
    ChannelModel,
    RngSeed,
    complex_normal,
    generate,
    make_rng,
    pilot_estimate,
    steering_vector,
)


def iid_model(m=32, n=100, f=2):
    return ChannelModel("iid_rayleigh", num_antennas=m, num_snapshots=n, num_freqs=f)


class TestModelValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ChannelModel("bogus", num_antennas=2, num_snapshots=2, num_freqs=1)

    def test_bad_counts(self):
        with pytest.raises(ConfigError):
            ChannelModel("iid_rayleigh", num_antennas=0, num_snapshots=2, num_freqs=1)

    def test_bad_rho(self):
        with pytest.raises(ConfigError):
            ChannelModel("kronecker_exponential", num_antennas=2, num_snapshots=2,
                         num_freqs=1, rho=1.0)

    def test_sparse_requires_paths(self):
        with pytest.raises(ConfigError):
            ChannelModel("sparse_multipath", num_antennas=2, num_snapshots=2,
                         num_freqs=1, steering_angles=(), path_powers=())


class TestGenerate:
    def test_shape(self):
        t = generate(iid_model(m=4, n=10, f=3), RngSeed(1))
        assert t.data.shape == (10, 3, 4)

    def test_iid_unit_power(self):
        t = generate(iid_model(m=32, n=3200, f=1), RngSeed(2))
        assert np.mean(np.abs(t.data) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_iid_zero_mean(self):
        t = generate(iid_model(m=8, n=12_500, f=1), RngSeed(3))
        assert abs(np.mean(t.data)) < 0.01

    def test_deterministic(self):
        a = generate(iid_model(), RngSeed(42, 7))
        b = generate(iid_model(), RngSeed(42, 7))
        np.testing.assert_array_equal(a.data, b.data)

    def test_distinct_streams_independent(self):
        a = generate(iid_model(m=1, n=100_000, f=1), RngSeed(42, 0)).data.ravel()
        b = generate(iid_model(m=1, n=100_000, f=1), RngSeed(42, 1)).data.ravel()
        corr = np.abs(np.mean(a * np.conj(b)))
        assert corr < 0.01

    def test_kronecker_zero_rho_matches_iid_statistics(self):
        model = ChannelModel("kronecker_exponential", num_antennas=4,
                             num_snapshots=50_000, num_freqs=1, rho=0.0)
        t = generate(model, RngSeed(4))
        h = t.data[:, 0, :]
        cov = h.conj().T @ h / h.shape[0]
        off = cov - np.diag(np.diag(cov))
        assert np.max(np.abs(off)) < 0.02

    def test_kronecker_exponential_covariance(self):
        rho = 0.6
        model = ChannelModel("kronecker_exponential", num_antennas=5,
                             num_snapshots=100_000, num_freqs=1, rho=rho)
        t = generate(model, RngSeed(5))
        h = t.data[:, 0, :]
        cov = (h.conj().T @ h / h.shape[0]).real
        idx = np.arange(5)
        expected = rho ** np.abs(idx[:, None] - idx[None, :])
        assert np.max(np.abs(cov - expected)) < 0.02

    def test_sparse_energy_in_steering_directions(self):
        angles = (-0.5, 0.3, 1.0)
        model = ChannelModel("sparse_multipath", num_antennas=16, num_snapshots=2000,
                             num_freqs=1, steering_angles=angles,
                             path_powers=(1.0, 0.5, 2.0), noise_floor=0.0)
        t = generate(model, RngSeed(6))
        # every snapshot lies in the span of the three steering vectors
        basis, _ = np.linalg.qr(np.stack(
            [steering_vector(a, 16) for a in angles], axis=1))
        h = t.data[:, 0, :].T
        residual = h - basis @ (basis.conj().T @ h)
        assert np.max(np.abs(residual)) < 1e-10


class TestComplexNormal:
    def test_moments(self):
        rng = make_rng(RngSeed(1))
        h = complex_normal(rng, 200_000)
        assert abs(np.mean(h)) < 0.01
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
        # real/imag parts each N(0, 1/2)
        assert np.var(h.real) == pytest.approx(0.5, abs=0.01)
        assert np.var(h.imag) == pytest.approx(0.5, abs=0.01)


class TestPilotEstimate:
    def test_noiseless_identity(self, rng):
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        pilot = np.ones(4) / 2.0
        est = pilot_estimate(h, pilot, 0.0, RngSeed(0))
        np.testing.assert_allclose(est, h, atol=1e-12)

    def test_noise_only_distribution(self):
        # h = 0, T = 1, unit noise: estimate is CN(0,1) per antenna
        samples = []
        for i in range(2000):
            est = pilot_estimate(np.zeros(4), [1.0], 1.0, RngSeed(10, i))
            samples.append(est)
        flat = np.concatenate(samples)
        assert np.mean(np.abs(flat) ** 2) == pytest.approx(1.0, abs=0.05)
        assert abs(np.mean(flat)) < 0.05

    def test_error_variance(self, rng):
        m, noise_std, trials = 8, 0.1, 10_000
        h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        pilot = np.ones(4) / 2.0
        total = 0.0
        for i in range(trials):
            est = pilot_estimate(h, pilot, noise_std, RngSeed(11, i))
            total += np.sum(np.abs(est - h) ** 2)
        assert total / trials == pytest.approx(m * noise_std**2, rel=0.05)

    def test_zero_energy_pilot(self):
        with pytest.raises(InvalidInputError):
            pilot_estimate(np.ones(2), np.zeros(3), 0.1, RngSeed(0))

    def test_non_unit_energy_pilot(self):
        with pytest.raises(InvalidInputError):
            pilot_estimate(np.ones(2), np.ones(4), 0.1, RngSeed(0))
