"""Dataset container: JSON manifest plus one raw binary file per position.

Binary layout is snapshot-major [n][f][m], little-endian, interleaved
(re, im). Files named <id>.cf64 hold 64-bit floats (16 bytes per sample);
<id>.cf32 holds 32-bit floats and is widened to 64-bit on load.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    ManifestError,
    MissingFileError,
    NonFiniteSampleError,
    SizeMismatchError,
    VersionMismatchError,
)
from .geometry import ArrayGeometry
from .tensor import ChannelTensor

FORMAT_VERSION = "1"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class PositionInfo:
    id: str
    label: str
    los: bool
    num_snapshots: int
    file: str
    distance_m: float | None = None
    path_label: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    version: str
    carrier_hz: float
    num_freqs: int
    snapshot_interval_s: float
    array: ArrayGeometry
    positions: tuple[PositionInfo, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(self.positions))
        ids = [p.id for p in self.positions]
        if len(set(ids)) != len(ids):
            raise ManifestError("position ids are not unique")
        if self.num_freqs < 1:
            raise ManifestError("num_freqs must be >= 1")
        for p in self.positions:
            if p.num_snapshots < 1:
                raise ManifestError(f"num_snapshots must be >= 1", position_id=p.id)

    def position(self, position_id: str) -> PositionInfo:
        for p in self.positions:
            if p.id == position_id:
                return p
        raise KeyError(position_id)


def _geometry_to_json(geom: ArrayGeometry) -> dict:
    return {
        "kind": geom.kind,
        "rows": geom.rows,
        "cols": geom.cols,
        "spacing_wavelengths": geom.spacing_wavelengths,
        "numbering": [list(rc) for rc in geom.numbering],
    }


def _geometry_from_json(obj: dict) -> ArrayGeometry:
    try:
        return ArrayGeometry(
            kind=obj["kind"],
            rows=int(obj["rows"]),
            cols=int(obj["cols"]),
            spacing_wavelengths=float(obj.get("spacing_wavelengths", 0.5)),
            numbering=tuple(tuple(rc) for rc in obj.get("numbering", [])),
        )
    except ConfigError as exc:
        raise ManifestError(f"invalid array geometry: {exc}") from exc


def manifest_to_json(manifest: DatasetManifest) -> dict:
    return {
        "version": manifest.version,
        "carrier_hz": manifest.carrier_hz,
        "num_freqs": manifest.num_freqs,
        "snapshot_interval_s": manifest.snapshot_interval_s,
        "array": _geometry_to_json(manifest.array),
        "positions": [
            {
                "id": p.id,
                "label": p.label,
                "los": p.los,
                "num_snapshots": p.num_snapshots,
                "file": p.file,
                **({"distance_m": p.distance_m} if p.distance_m is not None else {}),
                **({"path_label": p.path_label} if p.path_label is not None else {}),
            }
            for p in manifest.positions
        ],
    }


def manifest_from_json(obj: dict) -> DatasetManifest:
    try:
        version = str(obj["version"])
        if version != FORMAT_VERSION:
            raise VersionMismatchError(
                f"unsupported container version {version!r} (expected {FORMAT_VERSION!r})")
        positions = tuple(
            PositionInfo(
                id=str(p["id"]),
                label=str(p.get("label", p["id"])),
                los=bool(p["los"]),
                num_snapshots=int(p["num_snapshots"]),
                file=str(p["file"]),
                distance_m=p.get("distance_m"),
                path_label=p.get("path_label"),
            )
            for p in obj["positions"]
        )
        return DatasetManifest(
            version=version,
            carrier_hz=float(obj["carrier_hz"]),
            num_freqs=int(obj["num_freqs"]),
            snapshot_interval_s=float(obj["snapshot_interval_s"]),
            array=_geometry_from_json(obj["array"]),
            positions=positions,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc


def _expected_bytes(info: PositionInfo, num_freqs: int, num_antennas: int) -> int:
    sample_bytes = 8 if info.file.endswith(".cf32") else 16
    return sample_bytes * info.num_snapshots * num_freqs * num_antennas


def _check_files(manifest: DatasetManifest, root: Path):
    m = manifest.array.num_elements
    for info in manifest.positions:
        path = root / info.file
        if not path.is_file():
            raise MissingFileError(f"missing file {info.file!r} for position {info.id!r}",
                                   position_id=info.id)
        expected = _expected_bytes(info, manifest.num_freqs, m)
        actual = path.stat().st_size
        if actual != expected:
            raise SizeMismatchError(
                f"position {info.id!r}: file {info.file!r} is {actual} bytes, "
                f"expected {expected}", position_id=info.id)


class DatasetReader:
    """Lazy position-id -> ChannelTensor accessor over a validated dataset."""

    def __init__(self, manifest: DatasetManifest, root: Path):
        self.manifest = manifest
        self.root = Path(root)

    def position_ids(self) -> list[str]:
        return [p.id for p in self.manifest.positions]

    def __len__(self) -> int:
        return len(self.manifest.positions)

    def __iter__(self):
        return iter(self.position_ids())

    def load(self, position_id: str) -> ChannelTensor:
        info = self.manifest.position(position_id)
        path = self.root / info.file
        dtype = np.complex64 if info.file.endswith(".cf32") else np.complex128
        raw = np.fromfile(path, dtype=np.dtype(dtype).newbyteorder("<"))
        shape = (info.num_snapshots, self.manifest.num_freqs, self.manifest.array.num_elements)
        if raw.size != np.prod(shape):
            raise SizeMismatchError(
                f"position {position_id!r}: decoded {raw.size} samples, expected "
                f"{int(np.prod(shape))}", position_id=position_id)
        data = raw.astype(np.complex128).reshape(shape)
        if not np.all(np.isfinite(data.view(np.float64))):
            raise NonFiniteSampleError(
                f"position {position_id!r} contains non-finite samples",
                position_id=position_id)
        return ChannelTensor(position_id, data)

    __getitem__ = load


def load_dataset(root) -> tuple[DatasetManifest, DatasetReader]:
    """Parse and validate a dataset directory; tensors are decoded lazily."""
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ManifestError(f"no {MANIFEST_NAME} under {root}")
    try:
        obj = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    manifest = manifest_from_json(obj)
    _check_files(manifest, root)
    return manifest, DatasetReader(manifest, root)


def write_dataset(manifest: DatasetManifest, tensors: dict, root) -> None:
    """Write manifest.json plus one binary file per position under `root`."""
    root = Path(root)
    m = manifest.array.num_elements
    for info in manifest.positions:
        tensor = tensors[info.id]
        if tensor.data.shape != (info.num_snapshots, manifest.num_freqs, m):
            raise ManifestError(
                f"tensor shape {tensor.data.shape} disagrees with manifest for "
                f"position {info.id!r}", position_id=info.id)
    root.mkdir(parents=True, exist_ok=True)
    for info in manifest.positions:
        data = tensors[info.id].data
        if info.file.endswith(".cf32"):
            out = data.astype(np.complex64)
        else:
            out = data.astype(np.complex128)
        out.astype(out.dtype.newbyteorder("<")).tofile(root / info.file)
    (root / MANIFEST_NAME).write_text(
        json.dumps(manifest_to_json(manifest), indent=2) + "\n")
