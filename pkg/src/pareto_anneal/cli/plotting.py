"""Figure-of-merit plots from aggregate CSV files.

The SVG output is a pure function of the inputs: matplotlib's id salt is
fixed, the date stamp is omitted and text is emitted as ``<text>`` rather
than glyph paths.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..fileio import atomic_write_text

CSV_HEADER = ["time_s", "mean_fom", "min_fom", "max_fom"]


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledBand:
    label: str
    times: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def read_band_csv(path: str | Path) -> LabeledBand:
    """Parse an aggregate CSV; the label defaults to the file stem."""
    path = Path(path)
    label = path.stem
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "label" and value:
                label = value.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
        raise CsvFormatError(f"{path}: expected header {','.join(CSV_HEADER)}")
    if len(rows) < 2:
        raise CsvFormatError(f"{path}: no data rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        raise CsvFormatError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 4:
        raise CsvFormatError(f"{path}: every row needs 4 columns")
    if not np.all(np.isfinite(data)) or np.any(data[:, 0] <= 0):
        raise CsvFormatError(f"{path}: times must be positive and values finite")
    return LabeledBand(label, data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def plot_bands(bands: list[LabeledBand], path: str | Path, title: str = "") -> None:
    """Log-log figure of merit against cumulative modeled time, one band per input."""
    if not bands:
        raise ValueError("need at least one band to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "pareto-anneal", "svg.fonttype": "none",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for i, b in enumerate(bands):
            color = f"C{i % 10}"
            ax.fill_between(b.times, b.lo, b.hi, step="post", color=color, alpha=0.25, linewidth=0)
            ax.plot(b.times, b.mean, drawstyle="steps-post", color=color, label=b.label)
        ax.axhline(1.0, color="0.5", linestyle=":", linewidth=0.8)
        ax.set_xscale("log")
        ax.set_yscale("log")
        top = max(float(np.max(b.hi)) for b in bands)
        ax.set_ylim(0.8, max(top * 1.5, 2.0))
        ax.set_xlabel("cumulative model time (s)")
        ax.set_ylabel("HV_max - HV + 1")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    atomic_write_text(path, buf.getvalue())
