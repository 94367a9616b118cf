"""CSV and figure emission for the experiment drivers.

CSVs are the record: 12 significant digits, deterministic byte-for-byte for
identical inputs.  Figures are conveniences rendered with matplotlib to SVG
files next to the CSVs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

plt.rcParams["svg.hashsalt"] = "plasmonqe"


def format_field(value) -> str:
    """One CSV field; absent values become empty fields."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    return f"{value:.12g}"


def write_csv(path, header: str, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format_field(v) for v in row) + "\n")
    return path


def line_figure(
    path,
    x,
    series,
    xlabel: str,
    ylabel: str,
    title: str | None = None,
    logy: bool = False,
) -> Path:
    """Render up to two (label, y) series against x and save as SVG."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    styles = ("-", "--")
    for (label, y), style in zip(series, styles):
        ax.plot(x, y, style, lw=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def scatter_figure(path, x, y, xlabel, ylabel, hline=None, title=None) -> Path:
    """Point series with an optional horizontal reference line, saved as SVG."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if hline is not None:
        ax.axhline(hline, color="gray", lw=0.8)
    ax.plot(x, y, "o-", lw=1.0, ms=4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path
