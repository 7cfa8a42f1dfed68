"""Figure rendering for the CLI report path.

Each writer takes the same data that went into a CSV and renders a PNG next
to it.  Headless (Agg) backend; the numerical core never imports this
module.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_profile(r, values, path, title="covariogram profile"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(r, values, "-", lw=1.2)
    ax.set_xlabel("r")
    ax.set_ylabel("g(r theta)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_curve(p, values, path, title="normalized mean curve"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(p, values, "o-", lw=1.2, ms=4)
    ax.set_xlabel("p")
    ax.set_ylabel("T(p)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_star_values(dirs, values, path, title="radial samples", label="rho"):
    """Polar plot in the plane, index plot otherwise."""
    vecs = np.asarray(dirs)
    fig = plt.figure(figsize=(4.6, 4.2))
    if vecs.shape[1] == 2:
        ang = np.arctan2(vecs[:, 1], vecs[:, 0])
        order = np.argsort(ang)
        ax = fig.add_subplot(projection="polar")
        theta = np.append(ang[order], ang[order][0] + 2 * np.pi)
        rho = np.append(values[order], values[order][0])
        ax.plot(theta, rho, "-", lw=1.2)
    else:
        ax = fig.add_subplot()
        ax.plot(values, ".", ms=3)
        ax.set_xlabel("direction index")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    ax.set_title(title)
    return _save(fig, path)


def plot_chain(dirs, table, labels, path, title="inclusion chain"):
    vecs = np.asarray(dirs)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    if vecs.shape[1] == 2:
        x = np.arctan2(vecs[:, 1], vecs[:, 0])
        order = np.argsort(x)
        x = x[order]
        xlabel = "direction angle"
    else:
        x = np.arange(len(vecs))
        order = x
        xlabel = "direction index"
    for j, lab in enumerate(labels):
        ax.plot(x, table[order, j], lw=1.0, label=lab)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("scaled radial value")
    ax.set_title(title)
    ax.legend(fontsize=6)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_scalar_bound(lhs, rhs, labels, path, title):
    fig, ax = plt.subplots(figsize=(3.6, 3.2))
    ax.bar([0, 1], [lhs, rhs], width=0.55, color=["#336", "#8ab"])
    ax.set_xticks([0, 1], labels)
    ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    return _save(fig, path)
