"""Eigenspace-based node grouping.

Nodes whose dominant eigenspaces are far apart (large chordal distance) are
easier to separate spatially, so the greedy grouping maximizes the minimum
pairwise separation inside each group. Correlation-based separation is
available as an alternative distance plug-in.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, metrics
from .errors import InsufficientDataError, InvalidInputError
from .experiments import SyntheticSource
from .synth import ChannelModel, RngSeed, generate
from .tensor import segment_windows

DEFAULT_DOMINANT_DIRECTIONS = 3


@dataclass(frozen=True)
class NodeSignature:
    position_id: str
    eigenspace: np.ndarray  # (M, p), orthonormal columns
    energy_fraction: float

    def __post_init__(self):
        arr = np.asarray(self.eigenspace, dtype=np.complex128)
        err = np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[1])))
        if err > 1e-8:
            raise InvalidInputError(
                f"signature {self.position_id!r}: columns not orthonormal ({err:.3e})")
        object.__setattr__(self, "eigenspace", arr)


@dataclass(frozen=True)
class SchedulingGroup:
    members: tuple
    min_pairwise_chordal: float

    @property
    def group_size(self) -> int:
        return len(self.members)


def chordal_separation(a: NodeSignature, b: NodeSignature) -> float:
    return metrics.chordal_distance(a.eigenspace, b.eigenspace)


def correlation_separation(a: NodeSignature, b: NodeSignature) -> float:
    """Alternative plug-in: one minus the worst-case column correlation."""
    cross = np.abs(a.eigenspace.conj().T @ b.eigenspace)
    return 1.0 - float(np.max(cross))


def build_signatures(source, window_length: int, p: int = DEFAULT_DOMINANT_DIRECTIONS,
                     seed: RngSeed | None = None, num_positions: int = 8,
                     freq_index: int = 0) -> list[NodeSignature]:
    """One signature per position from its first complete window.

    Rank-deficient positions (fewer than p positive eigenvalues) are skipped.
    """
    if window_length < 1 or p < 1:
        raise InvalidInputError("window_length and p must be >= 1")
    signatures = []
    if isinstance(source, SyntheticSource):
        if seed is None:
            seed = RngSeed(0)
        model = ChannelModel(
            kind=source.model.kind,
            num_antennas=source.model.num_antennas,
            num_snapshots=window_length,
            num_freqs=source.model.num_freqs,
            rho=source.model.rho,
            steering_angles=source.model.steering_angles,
            path_powers=source.model.path_powers,
            noise_floor=source.model.noise_floor,
        )
        items = [(f"node{i:03d}", generate(model, seed.spawn(i), position_id=f"node{i:03d}"))
                 for i in range(num_positions)]
    else:
        items = [(pid, source.reader.load(pid)) for pid in source.reader.position_ids()]

    for pid, tensor in items:
        windows = segment_windows(tensor, window_length)
        if not windows:
            continue
        norm = metrics.normalize(tensor)
        spec = linalg.eigh(metrics.correlation_matrix(norm, windows[0], freq_index))
        if int(np.count_nonzero(spec.values > 0.0)) < p:
            continue
        signatures.append(NodeSignature(
            position_id=pid,
            eigenspace=metrics.dominant_eigenspace(spec, p),
            energy_fraction=metrics.eigen_energy_fraction(spec, p),
        ))
    return signatures


def _distance_matrix(signatures, separation) -> np.ndarray:
    n = len(signatures)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = separation(signatures[i], signatures[j])
    return dist


def greedy_group(signatures, group_size: int,
                 separation=chordal_separation) -> list[SchedulingGroup]:
    """Partition signatures into groups of `group_size` by greedy max-min.

    Each group is seeded with the most separated unassigned pair, then grown
    by the signature maximizing the minimum separation to current members.
    Ties break toward the lowest position_id; the last group may be smaller.
    """
    if group_size < 2:
        raise InvalidInputError("group_size must be >= 2")
    if len(signatures) < group_size:
        raise InsufficientDataError(
            f"need at least {group_size} signatures, got {len(signatures)}")
    order = sorted(range(len(signatures)), key=lambda i: signatures[i].position_id)
    sigs = [signatures[i] for i in order]
    dist = _distance_matrix(sigs, separation)

    unassigned = list(range(len(sigs)))
    groups = []
    while unassigned:
        if len(unassigned) == 1:
            only = unassigned.pop()
            p = sigs[only].eigenspace.shape[1]
            # a lone node has no conflicting partner: vacuous separation 2p
            groups.append(SchedulingGroup((sigs[only].position_id,), 2.0 * p))
            break
        best = None
        for ai in range(len(unassigned)):
            for bi in range(ai + 1, len(unassigned)):
                a, b = unassigned[ai], unassigned[bi]
                key = (-dist[a, b], sigs[a].position_id, sigs[b].position_id)
                if best is None or key < best[0]:
                    best = (key, a, b)
        members = [best[1], best[2]]
        for m in members:
            unassigned.remove(m)
        while len(members) < group_size and unassigned:
            cand = None
            for c in unassigned:
                score = min(dist[c, m] for m in members)
                key = (-score, sigs[c].position_id)
                if cand is None or key < cand[0]:
                    cand = (key, c)
            members.append(cand[1])
            unassigned.remove(cand[1])
        min_sep = min(dist[a, b] for i, a in enumerate(members)
                      for b in members[i + 1:])
        groups.append(SchedulingGroup(
            tuple(sigs[m].position_id for m in members), float(min_sep)))
    return groups


def groups_to_json(groups) -> list[dict]:
    return [
        {
            "members": list(g.members),
            "min_pairwise_chordal": g.min_pairwise_chordal,
            "group_size": g.group_size,
        }
        for g in groups
    ]
