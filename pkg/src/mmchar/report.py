"""Render figures from the CSV outputs of an analysis run.

Reads the delimited curve/CDF files written by the CLI `analyze` command
and saves matplotlib figures next to them. Plotting is entirely decoupled
from the metric pipeline: figures are regenerated from the files alone.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_curve(path: Path):
    xs, means, errs = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["mean"] == "NA":
                continue
            xs.append(float(row["x"]))
            means.append(float(row["mean"]))
            errs.append(0.0 if row["stderr"] == "NA" else float(row["stderr"]))
    return np.asarray(xs), np.asarray(means), np.asarray(errs)


def _read_cdf(path: Path):
    vals, cdf = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals.append(float(row["value"]))
            cdf.append(float(row["cdf"]))
    return np.asarray(vals), np.asarray(cdf)


def _plot_curve(path: Path, out: Path, ylabel: str, logy: bool = False,
                reference=None):
    x, mean, err = _read_curve(path)
    if x.size == 0:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(x, mean, yerr=err, marker="o", markersize=3, capsize=2)
    if reference is not None:
        ax.plot(x, reference(x), "k--", linewidth=1, label="i.i.d. reference")
        ax.legend()
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("number of antennas M" if "condition" not in path.stem else "number of nodes K")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_report(out_dir) -> list[Path]:
    """Render a PNG for every recognized CSV in `out_dir`; returns paths written."""
    out_dir = Path(out_dir)
    written = []

    spec = {
        "hardening_std.csv": ("gain std (linear)", True, None),
        "hardening_db.csv": ("hardening (dB)", False,
                             lambda m: 5.0 * np.log10(m)),
        "correlation_delta.csv": ("mean correlation coefficient", True, None),
        "correlation_delta_sq.csv": ("mean squared correlation coefficient", True,
                                     lambda m: 1.0 / m),
        "condition_mean.csv": ("mean inverse condition number", False, None),
    }
    for name, (ylabel, logy, ref) in spec.items():
        path = out_dir / name
        if path.is_file():
            out = _plot_curve(path, path.with_suffix(".png"), ylabel, logy, ref)
            if out:
                written.append(out)

    cdf_paths = sorted(out_dir.glob("condition_cdf_K*.csv"))
    if cdf_paths:
        fig, ax = plt.subplots(figsize=(6, 4))
        for path in cdf_paths:
            vals, cdf = _read_cdf(path)
            label = path.stem.replace("condition_cdf_", "")
            ax.plot(vals, cdf, label=label)
        ax.set_xlabel("inverse condition number")
        ax.set_ylabel("empirical CDF")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        out = out_dir / "condition_cdf.png"
        fig.savefig(out, dpi=150)
        plt.close(fig)
        written.append(out)

    eig_path = out_dir / "eigen_values_db.csv"
    if eig_path.is_file():
        rows = []
        with open(eig_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                rows.append([np.nan if v == "NA" else float(v) for v in row[1:]])
        if rows:
            arr = np.asarray(rows)
            fig, ax = plt.subplots(figsize=(6, 4))
            order = np.arange(1, arr.shape[1] + 1)
            mean = np.nanmean(arr, axis=0)
            lo = np.nanpercentile(arr, 5, axis=0)
            hi = np.nanpercentile(arr, 95, axis=0)
            ax.fill_between(order, lo, hi, alpha=0.3, label="5th-95th percentile")
            ax.plot(order, mean, marker="o", markersize=3, label="mean")
            ax.set_xlabel("eigenvalue index (descending)")
            ax.set_ylabel("eigenvalue (dB)")
            ax.grid(True, alpha=0.4)
            ax.legend()
            fig.tight_layout()
            out = out_dir / "eigen_values_db.png"
            fig.savefig(out, dpi=150)
            plt.close(fig)
            written.append(out)

    chordal_paths = sorted(out_dir.glob("eigen_chordal_*.csv"))
    if chordal_paths:
        fig, ax = plt.subplots(figsize=(6, 4))
        for path in chordal_paths:
            x, mean, _ = _read_curve(path)
            ax.plot(x, mean, marker="o", markersize=3,
                    label=path.stem.replace("eigen_chordal_", ""))
        ax.set_xlabel("number of antennas M")
        ax.set_ylabel("chordal distance")
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        out = out_dir / "eigen_chordal.png"
        fig.savefig(out, dpi=150)
        plt.close(fig)
        written.append(out)

    return written
