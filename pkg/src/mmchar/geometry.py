"""Antenna array geometry and the canonical element numbering.

The numbering maps a canonical antenna index (the order antennas appear in
channel tensors and in "subsequent element" selections) to a physical
(row, col) placement on the array.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

ULA = "ula"
URA = "ura"


@dataclass(frozen=True)
class ArrayGeometry:
    kind: str
    rows: int
    cols: int
    spacing_wavelengths: float = 0.5
    # numbering[i] = (row, col) of canonical antenna i; must be a bijection
    numbering: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in (ULA, URA):
            raise ConfigError(f"unknown array kind {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.kind == ULA and self.rows != 1:
            raise ConfigError("a ULA must have rows == 1")
        if self.spacing_wavelengths <= 0:
            raise ConfigError("spacing_wavelengths must be positive")
        numbering = self.numbering or default_numbering(self.rows, self.cols)
        object.__setattr__(self, "numbering", tuple(map(tuple, numbering)))
        self._check_bijection()

    def _check_bijection(self):
        m = self.rows * self.cols
        if len(self.numbering) != m:
            raise ConfigError(f"numbering must list all {m} elements")
        seen = set()
        for r, c in self.numbering:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ConfigError(f"numbering entry ({r},{c}) out of range")
            seen.add((r, c))
        if len(seen) != m:
            raise ConfigError("numbering is not a bijection")

    @property
    def num_elements(self) -> int:
        return self.rows * self.cols

    def position_of(self, index: int) -> tuple[int, int]:
        """Physical (row, col) of canonical antenna `index`."""
        return self.numbering[index]


def default_numbering(rows: int, cols: int) -> list[tuple[int, int]]:
    """Column-major numbering: ascend within each column, then next column.

    For a ULA (rows == 1) this is the identity along the line. For a URA
    built from stacked two-element holders it numbers each column of height
    `rows` top to bottom before moving to the next column, so e.g. a 4x8
    URA has indices 0..3 in column 0 and 4..7 in column 1.
    """
    return [(i % rows, i // rows) for i in range(rows * cols)]


def canonical_numbering(kind: str, rows: int, cols: int) -> ArrayGeometry:
    """Build an ArrayGeometry with the canonical element numbering."""
    return ArrayGeometry(kind=kind, rows=rows, cols=cols)
