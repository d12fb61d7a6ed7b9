"""Complex channel tensors, antenna-subset selection and time windowing.

A ChannelTensor holds the channel estimates of one node position as a
complex array indexed [snapshot n][frequency f][antenna m]. All operations
are pure; tensors are never mutated in place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import ArrayGeometry


def _as_tensor_data(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.complex128)
    if arr.ndim != 3:
        raise InvalidInputError(f"tensor data must be 3-D [n][f][m], got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise InvalidInputError(f"all tensor axes must be >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise InvalidInputError("tensor contains non-finite samples")
    return arr


@dataclass(frozen=True)
class ChannelTensor:
    """Channel estimates for one position, shape (N snapshots, F freqs, M antennas)."""

    position_id: str
    data: np.ndarray  # complex128, shape (N, F, M)

    def __post_init__(self):
        arr = _as_tensor_data(self.data)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

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
class TimeWindow:
    """Half-open snapshot range [start, start + length)."""

    start: int
    length: int

    def __post_init__(self):
        if self.start < 0 or self.length < 1:
            raise InvalidInputError(f"invalid window start={self.start} length={self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length


def select_antennas(tensor: ChannelTensor, geometry: ArrayGeometry,
                    count: int, start_index: int = 0) -> ChannelTensor:
    """Restrict to `count` subsequent antennas under the canonical numbering.

    The antenna axis of a tensor follows the geometry's canonical numbering,
    so subsequent selection is a contiguous slice; no wraparound is allowed.
    """
    m = tensor.num_antennas
    if geometry.num_elements != m:
        raise InvalidInputError(
            f"geometry has {geometry.num_elements} elements, tensor has {m} antennas")
    if not (1 <= count <= m):
        raise IndexError(f"count must be in [1, {m}], got {count}")
    if start_index < 0 or start_index + count > m:
        raise IndexError(
            f"selection [{start_index}, {start_index + count}) out of bounds for M={m}")
    return ChannelTensor(tensor.position_id, tensor.data[:, :, start_index:start_index + count])


def segment_windows(tensor: ChannelTensor, window_length: int) -> list[TimeWindow]:
    """Non-overlapping consecutive windows; a short trailing remainder is dropped."""
    if window_length < 1:
        raise InvalidInputError(f"window_length must be >= 1, got {window_length}")
    count = tensor.num_snapshots // window_length
    return [TimeWindow(i * window_length, window_length) for i in range(count)]


def window_view(tensor: ChannelTensor, window: TimeWindow) -> np.ndarray:
    """Read-only view of the samples inside `window`, shape (L, F, M)."""
    if window.stop > tensor.num_snapshots:
        raise IndexError(
            f"window [{window.start}, {window.stop}) exceeds N={tensor.num_snapshots}")
    return tensor.data[window.start:window.stop]
