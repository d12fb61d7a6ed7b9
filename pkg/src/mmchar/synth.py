"""Seedable synthetic channel generation and pilot-estimation simulation.

All randomness goes through a counter-based Philox generator keyed by
(seed, stream_id), so any draw sequence is reproducible bit-for-bit and
independent streams can be handed to parallel workers without changing
results. Complex Gaussians come from a Box-Muller transform of the uniform
stream: h = sqrt(-ln u1) * exp(2*pi*i*u2) is exactly CN(0, 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConfigError, InvalidInputError
from .tensor import ChannelTensor

IID_RAYLEIGH = "iid_rayleigh"
KRONECKER = "kronecker_exponential"
SPARSE_MULTIPATH = "sparse_multipath"


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream_id: int = 0

    def spawn(self, index: int) -> "RngSeed":
        """Derive a child stream; disjoint indices give independent streams."""
        return RngSeed(self.seed, self.stream_id * 1_000_003 + index + 1)


def make_rng(seed: RngSeed) -> np.random.Generator:
    key = np.array([seed.seed, seed.stream_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. CN(0,1) samples via Box-Muller on the uniform stream."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    # guard the open interval: u1 == 0 would give log(0)
    u1 = np.maximum(u1, np.finfo(np.float64).tiny)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


@dataclass(frozen=True)
class ChannelModel:
    """Synthetic narrowband channel model for an M-antenna array.

    kinds:
      iid_rayleigh          -- samples i.i.d. CN(0,1) across n, f, m
      kronecker_exponential -- per-(n,f) vector R^(1/2) g with R[i,j] = rho^|i-j|
      sparse_multipath      -- sum of fixed ULA steering vectors with random
                               per-snapshot phases plus a white noise floor
    """

    kind: str
    num_antennas: int
    num_snapshots: int
    num_freqs: int
    rho: float = 0.0
    steering_angles: tuple = field(default=())
    path_powers: tuple = field(default=())
    noise_floor: float = 0.0

    def __post_init__(self):
        if self.kind not in (IID_RAYLEIGH, KRONECKER, SPARSE_MULTIPATH):
            raise ConfigError(f"unknown channel model kind {self.kind!r}")
        if min(self.num_antennas, self.num_snapshots, self.num_freqs) < 1:
            raise ConfigError("M, N and F must all be >= 1")
        if self.kind == KRONECKER and not (0.0 <= self.rho < 1.0):
            raise ConfigError(f"kronecker rho must be in [0, 1), got {self.rho}")
        if self.kind == SPARSE_MULTIPATH:
            object.__setattr__(self, "steering_angles", tuple(self.steering_angles))
            object.__setattr__(self, "path_powers", tuple(self.path_powers))
            if len(self.steering_angles) != len(self.path_powers) or not self.path_powers:
                raise ConfigError("need matching, nonempty steering_angles and path_powers")
            if any(p < 0 for p in self.path_powers) or self.noise_floor < 0:
                raise ConfigError("path powers and noise floor must be nonnegative")


def steering_vector(angle_rad: float, num_antennas: int) -> np.ndarray:
    """Half-wavelength ULA steering vector a_m = exp(i*pi*m*sin(angle))."""
    m = np.arange(num_antennas)
    return np.exp(1j * np.pi * m * np.sin(angle_rad))


def _exponential_correlation_sqrt(rho: float, m: int) -> np.ndarray:
    idx = np.arange(m)
    corr = rho ** np.abs(idx[:, None] - idx[None, :])
    spec = linalg.eigh(corr)
    return (spec.basis * np.sqrt(spec.values)) @ spec.basis.conj().T


def generate(model: ChannelModel, seed: RngSeed, position_id: str | None = None) -> ChannelTensor:
    """Draw one channel tensor of shape (N, F, M) from the model."""
    rng = make_rng(seed)
    n, f, m = model.num_snapshots, model.num_freqs, model.num_antennas
    if position_id is None:
        position_id = f"synth-{seed.seed}-{seed.stream_id}"

    if model.kind == IID_RAYLEIGH:
        data = complex_normal(rng, (n, f, m))
    elif model.kind == KRONECKER:
        g = complex_normal(rng, (n, f, m))
        sqrt_r = _exponential_correlation_sqrt(model.rho, m)
        data = np.einsum("ij,nfj->nfi", sqrt_r, g)
    else:  # sparse multipath
        num_paths = len(model.path_powers)
        steering = np.stack([steering_vector(a, m) for a in model.steering_angles])
        phases = np.exp(2j * np.pi * rng.random((num_paths, n)))
        amps = np.sqrt(np.asarray(model.path_powers))
        # h(n, f) = sum_l amp_l * exp(i phi_{l,n}) * a(theta_l), shared across f
        per_snapshot = np.einsum("l,ln,lm->nm", amps, phases, steering)
        data = np.repeat(per_snapshot[:, None, :], f, axis=1)
        if model.noise_floor > 0:
            data = data + np.sqrt(model.noise_floor) * complex_normal(rng, (n, f, m))
    return ChannelTensor(position_id, data)


def pilot_estimate(true_channel, pilot, noise_std: float, seed: RngSeed) -> np.ndarray:
    """Correlate the received pilot against the known sequence per antenna.

    Simulates y_m = h_m * phi + w_m with w i.i.d. CN(0, noise_std^2) and
    returns the estimate h_hat_m = y_m . phi^H. For a unit-energy pilot the
    noiseless estimate equals the true channel exactly.
    """
    h = np.asarray(true_channel, dtype=np.complex128).ravel()
    phi = np.asarray(pilot, dtype=np.complex128).ravel()
    energy = float(np.sum(np.abs(phi) ** 2))
    if energy == 0.0:
        raise InvalidInputError("pilot sequence has zero energy")
    if abs(energy - 1.0) > 1e-9:
        raise InvalidInputError(f"pilot must have unit energy, got {energy:.6g}")
    if noise_std < 0:
        raise InvalidInputError("noise_std must be nonnegative")
    y = h[:, None] * phi[None, :]
    if noise_std > 0:
        rng = make_rng(seed)
        y = y + noise_std * complex_normal(rng, y.shape)
    return y @ phi.conj()
