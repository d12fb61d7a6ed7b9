"""Monte Carlo harness and experiment recipes producing figure-ready curves.

Every experiment is a pure function of (source, parameters, seed): reruns
with the same seed give bit-identical results regardless of how the caller
schedules them. Channel sources are either a synthetic model (fresh draws
per trial) or a measured dataset, whose continuous recordings are split
into fixed-length virtual locations for the cross-position draws.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import linalg, metrics
from .dataset import DatasetManifest, DatasetReader
from .errors import InsufficientDataError, InvalidInputError
from .geometry import ArrayGeometry, canonical_numbering
from .linalg import EIG_CLAMP_REL
from .metrics import DB_FLOOR
from .synth import ChannelModel, RngSeed, complex_normal, generate, make_rng
from .tensor import segment_windows

VIRTUAL_LOCATION_SNAPSHOTS = 100
DEFAULT_CORRELATION_TRIALS = 100_000
DEFAULT_CONDITION_TRIALS = 10_000


@dataclass(frozen=True)
class MetricCurve:
    """A metric versus antenna count M (or node count K) with MC statistics."""

    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    trials: np.ndarray
    metric_name: str
    scale: str = "linear"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64)
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise InvalidInputError("curve x axis must be strictly increasing")
        trials = np.asarray(self.trials, dtype=np.int64)
        if np.any(trials <= 0):
            raise InvalidInputError("trial counts must be positive")
        stderr = np.asarray(self.stderr, dtype=np.float64)
        if np.any(stderr[np.isfinite(stderr)] < 0):
            raise InvalidInputError("standard errors must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "stderr", stderr)
        object.__setattr__(self, "trials", trials)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted sample values; evaluates the fraction of samples <= a query."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.sort(np.asarray(self.values, dtype=np.float64)))

    def evaluate(self, query: float) -> float:
        return float(np.searchsorted(self.values, query, side="right")) / self.values.size

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.values, q))


def _stderr(samples: np.ndarray) -> float:
    n = samples.size
    if n < 2:
        return 0.0
    return float(np.std(samples, ddof=1) / np.sqrt(n))


# ---------------------------------------------------------------------------
# channel sources


@dataclass(frozen=True)
class SyntheticSource:
    """Fresh channel draws from a synthetic model."""

    model: ChannelModel

    @property
    def num_antennas(self) -> int:
        return self.model.num_antennas

    @property
    def num_freqs(self) -> int:
        return self.model.num_freqs

    @property
    def geometry(self) -> ArrayGeometry:
        return canonical_numbering("ula", 1, self.model.num_antennas)


@dataclass(frozen=True)
class DatasetSource:
    """Measured (or pre-generated) channels from a dataset directory."""

    manifest: DatasetManifest
    reader: DatasetReader
    virtual_snapshots: int = VIRTUAL_LOCATION_SNAPSHOTS

    @property
    def num_antennas(self) -> int:
        return self.manifest.array.num_elements

    @property
    def num_freqs(self) -> int:
        return self.manifest.num_freqs

    @property
    def geometry(self) -> ArrayGeometry:
        return self.manifest.array


def _dataset_location_samples(source: DatasetSource) -> list[np.ndarray]:
    """Per-(virtual) location arrays of normalized channel vectors (S, M).

    Each position is normalized over its full tensor, then split into
    non-overlapping virtual locations of `virtual_snapshots` snapshots; the
    (n, f) axes are flattened into a single sample axis per location.
    Positions shorter than one virtual location count as one location whole.
    """
    locations = []
    for pid in source.reader.position_ids():
        tensor = source.reader.load(pid)
        norm = metrics.normalize(tensor).data
        length = source.virtual_snapshots
        n = norm.shape[0]
        if n < length:
            segments = [norm]
        else:
            segments = [norm[i * length:(i + 1) * length] for i in range(n // length)]
        for seg in segments:
            locations.append(seg.reshape(-1, seg.shape[2]))
    return locations


def _draw_location_vectors(locations: list[np.ndarray], trials: int,
                           per_draw: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `per_draw` distinct-location channel vectors per trial -> (trials, per_draw, M)."""
    num_locs = len(locations)
    if num_locs < per_draw:
        raise InsufficientDataError(
            f"need at least {per_draw} locations, dataset provides {num_locs}")
    m = locations[0].shape[1]
    counts = np.array([loc.shape[0] for loc in locations])
    out = np.empty((trials, per_draw, m), dtype=np.complex128)
    for t in range(trials):
        locs = rng.permutation(num_locs)[:per_draw]
        for d, li in enumerate(locs):
            out[t, d] = locations[li][rng.integers(counts[li])]
    return out


# ---------------------------------------------------------------------------
# hardening


@dataclass(frozen=True)
class HardeningResult:
    std_curve: MetricCurve       # mean per-window gain std (unit-mean subsets)
    hardening_curve: MetricCurve  # 10*log10(sigma_1 / sigma_m), dB


def _window_subset_stds(power: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-window gain std for each prefix antenna count.

    power: (windows, L, F, M) channel gains. Returns (windows, len(counts)).
    Each subset's gains are renormalized to unit mean inside its window.
    """
    csum = np.cumsum(power, axis=3)
    out = np.empty((power.shape[0], counts.size))
    for i, m in enumerate(counts):
        gains = csum[:, :, :, m - 1] / m  # (windows, L, F)
        mu = np.mean(gains, axis=(1, 2))
        sigma = np.std(gains.reshape(gains.shape[0], -1), axis=1)
        out[:, i] = sigma / mu
    return out


def run_hardening_curve(source, window_length: int, antenna_counts, trials: int,
                        seed: RngSeed) -> HardeningResult:
    """Gain-std versus antenna count over fixed-length windows.

    For synthetic sources, `trials` independent windows are drawn; for a
    dataset every complete window of every position is used and `trials`
    is an upper bound.
    """
    counts = np.asarray(sorted(set(int(m) for m in antenna_counts)), dtype=np.int64)
    if counts.size == 0 or counts[0] < 1 or counts[-1] > source.num_antennas:
        raise InvalidInputError("antenna_counts must lie in [1, M]")
    with_one = np.insert(counts, 0, 1) if counts[0] != 1 else counts

    std_rows = []
    if isinstance(source, SyntheticSource):
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
        batch = max(1, min(trials, 1_000_000 // max(window_length * model.num_freqs, 1)))
        done = 0
        stream = 0
        while done < trials:
            take = min(batch, trials - done)
            block = np.empty((take, window_length, model.num_freqs, model.num_antennas))
            for b in range(take):
                tensor = generate(model, seed.spawn(stream), position_id=f"w{stream}")
                block[b] = np.abs(tensor.data) ** 2
                stream += 1
            std_rows.append(_window_subset_stds(block, with_one))
            done += take
    else:
        for pid in source.reader.position_ids():
            tensor = source.reader.load(pid)
            windows = segment_windows(tensor, window_length)
            for w in windows:
                power = np.abs(tensor.data[w.start:w.stop]) ** 2
                std_rows.append(_window_subset_stds(power[None], with_one))
    if not std_rows:
        raise InsufficientDataError("no complete window available")

    stds = np.concatenate(std_rows, axis=0)  # (windows, len(with_one))
    keep = np.array([np.searchsorted(with_one, m) for m in counts])
    mean_std = np.mean(stds, axis=0)
    se_std = np.array([_stderr(stds[:, i]) for i in range(with_one.size)])
    n_windows = stds.shape[0]

    sigma_one = mean_std[0]
    hard_db = np.full(counts.size, np.nan)
    hard_se = np.full(counts.size, np.nan)
    for i, col in enumerate(keep):
        if mean_std[col] > DB_FLOOR and sigma_one > DB_FLOOR:
            hard_db[i] = 10.0 * np.log10(sigma_one / mean_std[col])
            rel = np.hypot(se_std[0] / sigma_one, se_std[col] / mean_std[col])
            hard_se[i] = 10.0 / np.log(10.0) * rel
    trials_arr = np.full(counts.size, n_windows)
    return HardeningResult(
        std_curve=MetricCurve(counts, mean_std[keep], se_std[keep], trials_arr,
                              "gain_std", "linear"),
        hardening_curve=MetricCurve(counts, hard_db, hard_se, trials_arr,
                                    "hardening_db", "dB"),
    )


# ---------------------------------------------------------------------------
# correlation coefficient


@dataclass(frozen=True)
class CorrelationResult:
    delta_curve: MetricCurve     # mean correlation coefficient
    delta_sq_curve: MetricCurve  # mean squared correlation coefficient


def _prefix_delta(hi: np.ndarray, hj: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Correlation coefficient of the first-m antenna prefixes -> (trials, len(counts))."""
    inner = np.cumsum(np.conj(hi) * hj, axis=1)
    pi = np.cumsum(np.abs(hi) ** 2, axis=1)
    pj = np.cumsum(np.abs(hj) ** 2, axis=1)
    idx = counts - 1
    out = np.abs(inner[:, idx]) / np.sqrt(pi[:, idx] * pj[:, idx])
    out[:, counts == 1] = 1.0  # single-antenna channels are always parallel
    return out


def run_correlation_curve(source, antenna_counts, trials: int,
                          seed: RngSeed) -> CorrelationResult:
    """Mean correlation coefficient (and its square) versus antenna count.

    Each trial draws channel vectors of two distinct locations at one random
    (snapshot, frequency) per location; the prefix of the first m canonical
    antennas is evaluated for every requested m in a single pass.
    """
    counts = np.asarray(sorted(set(int(m) for m in antenna_counts)), dtype=np.int64)
    if counts.size == 0 or counts[0] < 1 or counts[-1] > source.num_antennas:
        raise InvalidInputError("antenna_counts must lie in [1, M]")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")

    if isinstance(source, SyntheticSource):
        rng = make_rng(seed)
        hi = complex_normal(rng, (trials, source.num_antennas))
        hj = complex_normal(rng, (trials, source.num_antennas))
    else:
        locations = _dataset_location_samples(source)
        if len(locations) < 2:
            raise InsufficientDataError("correlation draws need at least 2 locations")
        pairs = _draw_location_vectors(locations, trials, 2, make_rng(seed))
        hi, hj = pairs[:, 0, :], pairs[:, 1, :]

    delta = _prefix_delta(hi, hj, counts)
    delta_sq = delta**2
    trials_arr = np.full(counts.size, trials)
    return CorrelationResult(
        delta_curve=MetricCurve(
            counts, np.mean(delta, axis=0),
            np.array([_stderr(delta[:, i]) for i in range(counts.size)]),
            trials_arr, "correlation_delta", "linear"),
        delta_sq_curve=MetricCurve(
            counts, np.mean(delta_sq, axis=0),
            np.array([_stderr(delta_sq[:, i]) for i in range(counts.size)]),
            trials_arr, "correlation_delta_sq", "linear"),
    )


# ---------------------------------------------------------------------------
# inverse condition number


@dataclass(frozen=True)
class ConditionResult:
    curve: MetricCurve               # mean inverse condition number vs K
    cdfs: dict                       # K -> EmpiricalCdf of inverse condition number


def _batched_inv_condition(stacks: np.ndarray) -> np.ndarray:
    """Inverse condition number per trial for stacks of shape (trials, M, K)."""
    grams = np.einsum("tmk,tml->tkl", np.conj(stacks), stacks)
    grams = (grams + np.conj(np.swapaxes(grams, 1, 2))) / 2.0
    vals = np.linalg.eigvalsh(grams)  # ascending per trial
    lam_max = vals[:, -1]
    lam_min = vals[:, 0]
    clamp = EIG_CLAMP_REL * np.maximum(lam_max, 0.0)
    lam_min = np.where(lam_min < clamp, 0.0, lam_min)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(lam_min == 0.0, 0.0, lam_min / lam_max)
    return out


def run_condition_curve(source, node_counts, antenna_count: int, trials: int,
                        seed: RngSeed) -> ConditionResult:
    """Mean inverse condition number for K stacked locations, plus per-K CDFs."""
    ks = sorted(set(int(k) for k in node_counts))
    if not ks or ks[0] < 1:
        raise InvalidInputError("node_counts must be positive")
    if not (1 <= antenna_count <= source.num_antennas):
        raise InvalidInputError("antenna_count out of range")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")

    locations = None
    if isinstance(source, DatasetSource):
        locations = _dataset_location_samples(source)
        if len(locations) < max(ks):
            raise InsufficientDataError(
                f"condition draws need {max(ks)} locations, "
                f"dataset provides {len(locations)}")

    means, ses, cdfs = [], [], {}
    for i, k in enumerate(ks):
        sub_seed = seed.spawn(i)
        if locations is None:
            rng = make_rng(sub_seed)
            stacks = complex_normal(rng, (trials, antenna_count, k))
        else:
            drawn = _draw_location_vectors(locations, trials, k, make_rng(sub_seed))
            stacks = np.swapaxes(drawn[:, :, :antenna_count], 1, 2)
        samples = _batched_inv_condition(stacks)
        means.append(np.mean(samples))
        ses.append(_stderr(samples))
        cdfs[k] = EmpiricalCdf(samples)
    curve = MetricCurve(np.asarray(ks), np.asarray(means), np.asarray(ses),
                        np.full(len(ks), trials), "inverse_condition_number", "linear")
    return ConditionResult(curve=curve, cdfs=cdfs)


# ---------------------------------------------------------------------------
# eigenstructure and chordal distance


@dataclass(frozen=True)
class EigenAnalysis:
    eigenvalues_db: np.ndarray       # (windows, M) descending; NaN below dB floor
    energy_fractions: np.ndarray     # (windows,) mass of the p dominant directions
    window_groups: tuple             # group label per window
    chordal_curves: dict             # (group_a, group_b) -> MetricCurve over m
    skipped: int                     # windows with rank below p


def _group_mean_correlation(tensors_windows, f: int) -> np.ndarray:
    rs = [metrics.correlation_matrix(norm, w, f) for norm, w in tensors_windows]
    return np.mean(rs, axis=0)


def run_eigen_analysis(source, window_length: int, p: int,
                       antenna_counts=None, seed: RngSeed | None = None,
                       num_windows: int = 100, freq_index: int = 0) -> EigenAnalysis:
    """Per-window eigenvalue spectra plus chordal distances between window groups.

    Dataset windows are grouped by position path_label (falling back to the
    position id); synthetic windows are split into two halves "A" and "B".
    The chordal distance compares the p-dominant eigenspaces of each group's
    mean correlation matrix, restricted to the first m canonical antennas.
    """
    if window_length < p:
        raise InvalidInputError("window_length must be >= p")
    m_total = source.num_antennas
    counts = (np.asarray(sorted(set(int(m) for m in antenna_counts)), dtype=np.int64)
              if antenna_counts is not None
              else np.arange(max(p, 2), m_total + 1, dtype=np.int64))

    grouped = []  # (group_label, normalized tensor, window)
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
        for i in range(num_windows):
            tensor = generate(model, seed.spawn(i), position_id=f"w{i}")
            label = "A" if i < num_windows // 2 else "B"
            norm = metrics.normalize(tensor)
            grouped.append((label, norm, segment_windows(tensor, window_length)[0]))
    else:
        for pid in source.reader.position_ids():
            info = source.manifest.position(pid)
            label = info.path_label or pid
            tensor = source.reader.load(pid)
            norm = metrics.normalize(tensor)
            for w in segment_windows(tensor, window_length):
                grouped.append((label, norm, w))
    if not grouped:
        raise InsufficientDataError("no complete window available")

    eig_rows, fractions, labels = [], [], []
    skipped = 0
    for label, norm, w in grouped:
        spec = linalg.eigh(metrics.correlation_matrix(norm, w, freq_index))
        if int(np.count_nonzero(spec.values > 0.0)) < p:
            skipped += 1
            continue
        with np.errstate(divide="ignore"):
            row = np.where(spec.values < DB_FLOOR, np.nan,
                           10.0 * np.log10(np.maximum(spec.values, DB_FLOOR)))
        eig_rows.append(row)
        fractions.append(metrics.eigen_energy_fraction(spec, p))
        labels.append(label)

    chordal_curves = {}
    group_names = sorted(set(lbl for lbl, _, _ in grouped))
    group_r = {
        g: _group_mean_correlation(
            [(norm, w) for lbl, norm, w in grouped if lbl == g], freq_index)
        for g in group_names
    }
    for a_i in range(len(group_names)):
        for b_i in range(a_i + 1, len(group_names)):
            ga, gb = group_names[a_i], group_names[b_i]
            dists = np.full(counts.size, np.nan)
            for ci, m in enumerate(counts):
                if m < p:
                    continue
                spec_a = linalg.eigh(group_r[ga][:m, :m])
                spec_b = linalg.eigh(group_r[gb][:m, :m])
                if min(np.count_nonzero(spec_a.values > 0),
                       np.count_nonzero(spec_b.values > 0)) < p:
                    continue
                dists[ci] = metrics.chordal_distance(
                    metrics.dominant_eigenspace(spec_a, p),
                    metrics.dominant_eigenspace(spec_b, p))
            chordal_curves[(ga, gb)] = MetricCurve(
                counts, dists, np.zeros(counts.size), np.ones(counts.size),
                f"chordal_{ga}_{gb}", "linear")

    return EigenAnalysis(
        eigenvalues_db=np.asarray(eig_rows) if eig_rows else np.empty((0, m_total)),
        energy_fractions=np.asarray(fractions),
        window_groups=tuple(labels),
        chordal_curves=chordal_curves,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# output files


def write_curve_csv(curve: MetricCurve, path) -> None:
    """CSV with header x,mean,stderr,trials; NaNs are written as NA."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean", "stderr", "trials"])
        for i in range(curve.x.size):
            mean = "NA" if not np.isfinite(curve.mean[i]) else repr(float(curve.mean[i]))
            se = "NA" if not np.isfinite(curve.stderr[i]) else repr(float(curve.stderr[i]))
            writer.writerow([int(curve.x[i]), mean, se, int(curve.trials[i])])


def write_cdf_csv(cdf: EmpiricalCdf, path) -> None:
    """CSV with header value,cdf over the sorted sample values."""
    n = cdf.values.size
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "cdf"])
        for i, v in enumerate(cdf.values):
            writer.writerow([repr(float(v)), repr((i + 1) / n)])


def curve_summary(curve: MetricCurve) -> dict:
    return {
        "metric": curve.metric_name,
        "scale": curve.scale,
        "x": curve.x.tolist(),
        "mean": [None if not np.isfinite(v) else float(v) for v in curve.mean],
        "stderr": [None if not np.isfinite(v) else float(v) for v in curve.stderr],
        "trials": curve.trials.tolist(),
    }
