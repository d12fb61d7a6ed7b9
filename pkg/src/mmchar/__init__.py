"""Massive-MIMO channel characterization toolkit.

Computes channel hardening, correlation, joint-orthogonality and
eigenstructure metrics over measured or synthetic narrowband channel
tensors, with seedable Monte Carlo baselines for i.i.d. Rayleigh fading.
"""

from .dataset import DatasetManifest, DatasetReader, PositionInfo, load_dataset, write_dataset
from .geometry import ArrayGeometry, canonical_numbering
from .linalg import EigenSpectrum, eigh, frobenius_norm_sq, gram
from .metrics import (
    GainSeries,
    NormalizedTensor,
    array_gain_db,
    chordal_distance,
    correlation_coefficient,
    correlation_matrix,
    dominant_eigenspace,
    eigen_energy_fraction,
    gain_std,
    hardening_db,
    instantaneous_gain,
    inverse_condition_number,
    mean_gain,
    normalize,
    per_antenna_mean_gain_db,
)
from .synth import ChannelModel, RngSeed, generate, pilot_estimate
from .tensor import ChannelTensor, TimeWindow, segment_windows, select_antennas

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "ChannelModel",
    "ChannelTensor",
    "DatasetManifest",
    "DatasetReader",
    "EigenSpectrum",
    "GainSeries",
    "NormalizedTensor",
    "PositionInfo",
    "RngSeed",
    "TimeWindow",
    "array_gain_db",
    "canonical_numbering",
    "chordal_distance",
    "correlation_coefficient",
    "correlation_matrix",
    "dominant_eigenspace",
    "eigen_energy_fraction",
    "eigh",
    "frobenius_norm_sq",
    "gain_std",
    "generate",
    "gram",
    "hardening_db",
    "instantaneous_gain",
    "inverse_condition_number",
    "load_dataset",
    "mean_gain",
    "normalize",
    "per_antenna_mean_gain_db",
    "pilot_estimate",
    "segment_windows",
    "select_antennas",
    "write_dataset",
]
