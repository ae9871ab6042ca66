"""Plot-data emission and figure rendering for the CLI report path.

Every report quantity leaves twice: a two-column text file that downstream
tooling can consume, and a rendered PNG next to it.  Rendering is headless
(Agg) and deliberately plain; the delimited file is the interface, the
figure is for eyeballs.
"""

from __future__ import annotations

import csv
import io
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIG_SIZE = (6.4, 4.0)
DPI = 140


def write_xy(directory: str, name: str, xs, ys, header: str = "x y") -> str:
    """Two-column whitespace-delimited data file; returns the path."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name + ".dat")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x):.16e} {float(y):.16e}\n")
    return path


def render_xy(directory: str, name: str, xs, ys, title: str = "",
              xlabel: str = "x", ylabel: str = "y", logy: bool = False) -> str:
    """PNG figure rendered alongside the matching .dat file."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name + ".png")
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(xs, ys, marker="o", markersize=3.5, linewidth=1.0)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def emit_series(directory: str, name: str, xs, ys, title: str, xlabel: str,
                ylabel: str, logy: bool = False) -> list[str]:
    """Write the .dat file and render its figure; returns both paths."""
    dat = write_xy(directory, name, xs, ys, header=f"{xlabel} {ylabel}")
    png = render_xy(directory, name, xs, ys, title=title, xlabel=xlabel,
                    ylabel=ylabel, logy=logy)
    return [dat, png]


def rows_to_csv(rows: list[dict]) -> str:
    """CSV text for a homogeneous list of flat dictionaries."""
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
