"""Optional figures for scan reports (needs matplotlib)."""
from __future__ import annotations

import os

import numpy as np

from .errors import InvalidParameter


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise InvalidParameter("--figures needs matplotlib (pip install matplotlib)") from exc
    return plt


def scan_figure(scan, directory: str) -> str:
    """Histogram of log10 ratios for one scan; returns the file path."""
    plt = _pyplot()
    os.makedirs(directory, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(np.log10(scan.ratios[scan.ratios > 0]), bins=80)
    ax.set_xlabel("log10(kernel / bound)")
    ax.set_ylabel("samples")
    ax.set_title(f"{scan.name}: [{scan.min_ratio:.4g}, {scan.max_ratio:.4g}]")
    path = os.path.join(directory, f"{scan.name}.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def ort4_figure(values: dict, directory: str) -> str:
    plt = _pyplot()
    os.makedirs(directory, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(values["extents"], values["max_discrepancy"], "o-", label="literature / sharp")
    ax.loglog(values["extents"], values["max_sharp_ratio"], "s-", label="kernel / sharp bound")
    ax.set_xlabel("grid extent E")
    ax.set_ylabel("max ratio")
    ax.legend()
    path = os.path.join(directory, "ort4-inconsistency.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
