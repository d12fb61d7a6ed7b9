"""Channel metrics: normalization, gain statistics, hardening, correlation,
joint orthogonality, eigenstructure and chordal distance.

All gains are linear power quantities; dB conversions use 10*log10.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DegenerateInputError, InsufficientRankError, InvalidInputError
from .geometry import ArrayGeometry
from .linalg import EigenSpectrum
from .tensor import ChannelTensor, TimeWindow, window_view

# linear values below this floor have no meaningful dB representation
DB_FLOOR = 1e-15


def db(value: float) -> float:
    """10*log10 of a linear power value; NaN flags values below the floor."""
    if value < DB_FLOOR:
        return float("nan")
    return 10.0 * np.log10(value)


@dataclass(frozen=True)
class NormalizedTensor:
    """Channel tensor scaled so the mean gain over all (n, f, m) is one."""

    position_id: str
    data: np.ndarray  # complex128, shape (N, F, M)

    @property
    def num_snapshots(self) -> int:
        return self.data.shape[0]

    @property
    def num_freqs(self) -> int:
        return self.data.shape[1]

    @property
    def num_antennas(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class GainSeries:
    """Instantaneous channel gain per (n, f), averaged over the antenna subset."""

    values: np.ndarray  # real, shape (N, F)
    antenna_count: int


def normalize(tensor: ChannelTensor) -> NormalizedTensor:
    """Scale so the average gain over all antennas, frequencies and snapshots is 1."""
    power = np.abs(tensor.data) ** 2
    mean_power = float(np.mean(power))
    if mean_power == 0.0:
        raise DegenerateInputError(f"tensor {tensor.position_id!r} is identically zero")
    data = tensor.data / np.sqrt(mean_power)
    data.setflags(write=False)
    return NormalizedTensor(tensor.position_id, data)


def instantaneous_gain(tensor: NormalizedTensor) -> GainSeries:
    """Per-(n, f) gain averaged over the tensor's antennas."""
    values = np.mean(np.abs(tensor.data) ** 2, axis=2)
    values.setflags(write=False)
    return GainSeries(values=values, antenna_count=tensor.num_antennas)


def mean_gain(series: GainSeries) -> float:
    if series.values.size == 0:
        raise DegenerateInputError("empty gain series")
    return float(np.mean(series.values))


def gain_std(series: GainSeries) -> float:
    """Population standard deviation (divisor N*F) of the gain series."""
    if series.values.size < 2:
        raise DegenerateInputError("gain series needs at least two samples")
    return float(np.std(series.values))


def hardening_ratio(series: GainSeries) -> float:
    """Auxiliary variance-over-squared-mean ratio of the gain series."""
    mu = mean_gain(series)
    if mu == 0.0:
        raise DegenerateInputError("zero mean gain")
    return float(np.var(series.values)) / mu**2


def _subset_gain_std(data: np.ndarray, m: int) -> float:
    """Std of the per-subset gain, renormalized so the subset mean gain is 1."""
    gains = np.mean(np.abs(data[:, :, :m]) ** 2, axis=2)
    mu = float(np.mean(gains))
    if mu == 0.0:
        raise DegenerateInputError("subset has zero mean gain")
    return float(np.std(gains)) / mu


def hardening_db(tensor: NormalizedTensor, geometry: ArrayGeometry, m: int) -> float:
    """Gain-std reduction, in dB, from one antenna to the first m antennas.

    Each subset's gains are renormalized to unit mean before taking the std,
    so subsets of different sizes are compared on equal footing.
    """
    if not (1 <= m <= tensor.num_antennas):
        raise InvalidInputError(f"m must be in [1, {tensor.num_antennas}], got {m}")
    if geometry.num_elements != tensor.num_antennas:
        raise InvalidInputError("geometry does not match the tensor's antenna count")
    sigma_one = _subset_gain_std(tensor.data, 1)
    sigma_m = _subset_gain_std(tensor.data, m)
    if sigma_m == 0.0:
        raise DegenerateInputError("zero gain std for the selected subset")
    return 10.0 * np.log10(sigma_one / sigma_m)


def correlation_coefficient(hi, hj) -> float:
    """Normalized inner-product magnitude: 0 = orthogonal, 1 = parallel."""
    a = np.asarray(hi, dtype=np.complex128).ravel()
    b = np.asarray(hj, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise InvalidInputError("channel vectors must have equal length")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("zero-norm channel vector")
    if a.size == 1:
        return 1.0  # nonzero scalars are always parallel
    return float(np.abs(np.vdot(a, b)) / (na * nb))


def correlation_matrix(tensor: NormalizedTensor, window: TimeWindow, f: int) -> np.ndarray:
    """Snapshot-averaged outer product R = (1/L) sum_n h(n,f) h(n,f)^H."""
    if not (0 <= f < tensor.num_freqs):
        raise InvalidInputError(f"frequency index {f} out of range")
    h = window_view(ChannelTensor(tensor.position_id, tensor.data), window)[:, f, :]
    r = h.conj().T @ h / h.shape[0]
    return (r + r.conj().T) / 2.0


def inverse_condition_number(channels) -> float:
    """lambda_min / lambda_max of the Gram matrix of stacked channel columns.

    Eigenvalues below the relative clamp threshold count as exactly zero, so
    any rank-deficient stack (in particular K > M) returns 0.
    """
    arr = np.asarray(channels, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError("expected an M x K channel matrix")
    norms = np.linalg.norm(arr, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateInputError("channel matrix has a zero column")
    spec = linalg.eigh(linalg.gram(arr))
    lam_max = spec.values[0]
    lam_min = spec.values[-1]
    if lam_max == 0.0:
        raise DegenerateInputError("zero Gram matrix")
    if lam_min == 0.0:
        return 0.0
    return float(lam_min / lam_max)


def _check_orthonormal(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    arr = np.asarray(u, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError("expected an M x p matrix")
    gram = arr.conj().T @ arr
    err = np.max(np.abs(gram - np.eye(arr.shape[1])))
    if err > tol:
        raise InvalidInputError(f"columns are not orthonormal (max deviation {err:.3e})")
    return arr


def chordal_distance(ui, uj) -> float:
    """Squared Frobenius distance between the two column-space projectors.

    Computed as 2p - 2*||Ui^H Uj||_F^2, which equals the projector form for
    orthonormal inputs without building M x M projectors. Bounded by 2p.
    """
    a = _check_orthonormal(ui)
    b = _check_orthonormal(uj)
    if a.shape != b.shape:
        raise InvalidInputError("subspace bases must have identical shape")
    p = a.shape[1]
    cross = linalg.frobenius_norm_sq(a.conj().T @ b)
    return max(2.0 * p - 2.0 * cross, 0.0)


def dominant_eigenspace(spectrum: EigenSpectrum, p: int) -> np.ndarray:
    """First p eigenbasis columns (descending eigenvalue order)."""
    if not (1 <= p <= spectrum.dim):
        raise InvalidInputError(f"p must be in [1, {spectrum.dim}], got {p}")
    if spectrum.values[p - 1] <= 0.0:
        rank = int(np.count_nonzero(spectrum.values > 0.0))
        raise InsufficientRankError(f"spectrum has rank {rank} < requested p={p}")
    return spectrum.basis[:, :p]


def eigen_energy_fraction(spectrum: EigenSpectrum, p: int) -> float:
    """Fraction of total eigenvalue mass carried by the p dominant directions."""
    if not (1 <= p <= spectrum.dim):
        raise InvalidInputError(f"p must be in [1, {spectrum.dim}], got {p}")
    total = float(np.sum(spectrum.values))
    if total <= 0.0:
        raise DegenerateInputError("spectrum has zero total energy")
    return float(np.sum(spectrum.values[:p])) / total


def per_antenna_mean_gain_db(tensor: ChannelTensor) -> tuple[np.ndarray, np.ndarray]:
    """Time/frequency-averaged gain per antenna of the UN-normalized tensor.

    Returns (gain_db, silent) where silent flags antennas whose samples are
    all zero; their gain_db entries are NaN rather than -inf.
    """
    mean_power = np.mean(np.abs(tensor.data) ** 2, axis=(0, 1))
    silent = mean_power == 0.0
    gain_db = np.full(mean_power.shape, np.nan)
    gain_db[~silent] = 10.0 * np.log10(mean_power[~silent])
    return gain_db, silent


def array_gain_db(m: int) -> float:
    """Coherent-combining gain of m antennas over one, in dB."""
    if m < 1:
        raise InvalidInputError(f"antenna count must be >= 1, got {m}")
    return 10.0 * np.log10(m)
