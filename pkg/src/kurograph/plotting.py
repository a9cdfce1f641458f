"""Figures written next to the CSV outputs (matplotlib, non-interactive)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no date stamp keep SVG output byte-stable between runs
matplotlib.rcParams["svg.hashsalt"] = "kurograph"
matplotlib.rcParams["figure.figsize"] = (5.5, 3.6)
matplotlib.rcParams["axes.spines.top"] = False
matplotlib.rcParams["axes.spines.right"] = False


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if path.suffix == ".svg" else {}
    fig.tight_layout()
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    return path


def branch_compare(K, measured, predicted, path, kc=None, title="") -> Path:
    fig, ax = plt.subplots()
    ax.plot(K, measured, "o", ms=4, label="measured")
    Kf = np.asarray(K, float)
    if predicted is not None:
        ax.plot(Kf, predicted, "-", lw=1.2, label="predicted")
    if kc is not None:
        ax.axvline(kc, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("K")
    ax.set_ylabel("mean |h|")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(frameon=False)
    return _save(fig, path)


def series(t, curves: dict, path, logy=False, ylabel="", title="") -> Path:
    fig, ax = plt.subplots()
    for name, y in curves.items():
        ax.plot(t, y, lw=1.0, label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    if len(curves) > 1:
        ax.legend(frameon=False)
    return _save(fig, path)


def phases(x, theta, path, locked=None, title="") -> Path:
    fig, ax = plt.subplots()
    th = np.mod(theta, 2 * np.pi)
    if locked is None:
        ax.plot(x, th, ".", ms=1.5)
    else:
        ax.plot(x[~locked], th[~locked], ".", ms=1.5, color="0.7", label="drifting")
        ax.plot(x[locked], th[locked], ".", ms=1.5, color="C3", label="locked")
        ax.legend(frameon=False, markerscale=5)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 2 * np.pi)
    ax.set_xlabel("x")
    ax.set_ylabel("theta mod 2 pi")
    if title:
        ax.set_title(title, fontsize=10)
    return _save(fig, path)


def spectrum(eigenvalues, path, title="") -> Path:
    fig, ax = plt.subplots()
    mu = np.asarray(eigenvalues, float)
    ax.stem(np.arange(mu.size), mu, basefmt=" ")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("index")
    ax.set_ylabel("mu")
    if title:
        ax.set_title(title, fontsize=10)
    return _save(fig, path)
