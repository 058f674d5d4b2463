"""Figure rendering for CLI reports.

Renders the same long-format series data the CLI writes as CSV.  Figures
are PNG files produced with the Agg backend, no display required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_series_figure(rows, path, title: str = "", xlabel: str = "x",
                       ylabel: str = "value") -> None:
    """Plot long-format ``(x, series, value)`` rows, one line per series."""
    series: dict[str, tuple[list, list]] = {}
    for x, name, value in rows:
        xs, ys = series.setdefault(str(name), ([], []))
        xs.append(float(x))
        ys.append(float(value))
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for name in sorted(series):
        xs, ys = series[name]
        if len(xs) > 1:
            ax.plot(xs, ys, marker=".", markersize=4, linewidth=1.2, label=name)
        else:
            ax.plot(xs, ys, marker="o", linestyle="none", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_modulus_figure(moduli, path, title: str = "pointwise moduli") -> None:
    """Bar chart of per-sample pointwise moduli from a report."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    xs = [entry["sample"] for entry in moduli]
    ys = [entry["modulus"] for entry in moduli]
    ax.bar(xs, ys, width=0.8)
    ax.set_xlabel("sample")
    ax.set_ylabel("modulus")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
