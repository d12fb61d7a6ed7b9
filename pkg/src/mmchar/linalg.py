"""Dense complex linear algebra for the channel metrics.

Small Hermitian matrices only (a few hundred dimensions at most). The
eigendecomposition is deterministic: eigenvalues are returned in descending
order and each eigenvector's global phase is fixed so its largest-magnitude
component is real and nonnegative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

HERMITIAN_ATOL = 1e-10
# eigenvalues below EIG_CLAMP_REL * lambda_max are treated as exactly zero
EIG_CLAMP_REL = 1e-12


def _as_matrix(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise InvalidInputError("matrix contains non-finite entries")
    return arr


def check_hermitian(matrix, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate Hermitian symmetry within `atol`; returns the array."""
    arr = _as_matrix(matrix)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"matrix is not square: {arr.shape}")
    err = np.max(np.abs(arr - arr.conj().T)) if arr.size else 0.0
    if err > atol:
        raise InvalidInputError(f"matrix is not Hermitian (max asymmetry {err:.3e})")
    return arr


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues (descending, clamped nonnegative) and unitary eigenbasis.

    Column j of `basis` is the eigenvector of `values[j]`.
    """

    values: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def gram(matrix) -> np.ndarray:
    """A^H A of an M x K matrix: the K x K Hermitian PSD Gram matrix."""
    arr = _as_matrix(matrix)
    g = arr.conj().T @ arr
    # enforce exact Hermitian symmetry against rounding
    return (g + g.conj().T) / 2.0


def eigh(matrix) -> EigenSpectrum:
    """Hermitian eigendecomposition with deterministic ordering and phases."""
    arr = check_hermitian(matrix)
    vals, vecs = np.linalg.eigh(arr)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order].real.copy()
    vecs = vecs[:, order].copy()
    if vals.size:
        clamp = EIG_CLAMP_REL * np.max(np.abs(vals))
        vals[np.abs(vals) < clamp] = 0.0
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        k = int(np.argmax(np.abs(col)))
        pivot = col[k]
        if abs(pivot) > 0:
            col *= np.conj(pivot) / abs(pivot)
            col[k] = abs(pivot)  # force exactly real pivot
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return EigenSpectrum(values=vals, basis=vecs)


def frobenius_norm_sq(matrix) -> float:
    """Sum of squared magnitudes of all entries."""
    arr = _as_matrix(matrix)
    return float(np.sum(np.abs(arr) ** 2))
