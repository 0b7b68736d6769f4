"""Minimal SVG line plots for the emitted CSV files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..errors import TripodError  # noqa: E402
from .outputs import read_series_csv  # noqa: E402

__all__ = ["render_plot"]

# Deterministic SVG output (stable element ids, no timestamps).
matplotlib.rcParams["svg.hashsalt"] = "tripodsim"


def _save(fig, out_path: Path) -> Path:
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def _plot_boundary(header: list[str], data, out_path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    tau = data[:, 0]
    ax.plot(tau, data[:, header.index("abs_omega1")], label="|Omega1|", lw=1.2)
    ax.plot(tau, data[:, header.index("re_omega1")], label="Re Omega1", lw=0.8, alpha=0.6)
    ax.set_xlabel("tau [1/Gamma]")
    ax.set_ylabel("Omega1 at exit [Gamma]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, out_path)


def _plot_summary(header: list[str], data, out_path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    x = data[:, header.index("value")]
    order = x.argsort(kind="stable")
    x = x[order]
    released = data[order, header.index("released_peak_ratio")]
    predicted = data[order, header.index("predicted_ratio")]
    z_ratio = data[order, header.index("z_peak_ratio")]
    ax.plot(x, released, "o-", label="released peak ratio")
    ax.plot(x, predicted, "--", label="predicted ratio")
    ax.plot(x, z_ratio, "s-", label="trapped Z ratio", alpha=0.7)
    ax.set_xlabel("parameter value")
    ax.set_ylabel("ratio")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, out_path)


def _plot_generic(header: list[str], data, out_path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for col in range(1, data.shape[1]):
        ax.plot(data[:, 0], data[:, col], label=header[col], lw=1.0)
    ax.set_xlabel(header[0])
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, out_path)


def render_plot(csv_path: str | Path, out_path: str | Path | None = None) -> Path:
    """Render one of this package's CSV files to an SVG next to it."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise TripodError(f"no such file: {csv_path}")
    header, data = read_series_csv(csv_path)
    if data.size == 0:
        raise TripodError(f"{csv_path}: no data rows to plot")
    target = Path(out_path) if out_path is not None else csv_path.with_suffix(".svg")
    target.parent.mkdir(parents=True, exist_ok=True)
    if header[0] == "tau_invGamma":
        return _plot_boundary(header, data, target)
    if "released_peak_ratio" in header:
        return _plot_summary(header, data, target)
    return _plot_generic(header, data, target)
