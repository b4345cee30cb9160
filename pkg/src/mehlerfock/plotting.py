"""Figures written to files with the non-interactive Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .mft import RadialFunction, Spectrum  # noqa: E402

__all__ = [
    "plot_transform",
    "plot_roundtrip",
    "plot_polar_density",
    "plot_embedding",
    "plot_distance_matrix",
    "plot_saturation",
    "plot_image_strip",
]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_transform(obj, path, title: str = "") -> None:
    """Line plot of a Spectrum against kappa or a RadialFunction against tau."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(obj.grid.nodes, obj.values, lw=1.2)
    if isinstance(obj, Spectrum):
        ax.set_xlabel(r"$\kappa$")
        ax.set_ylabel(r"$c(\kappa)$")
    elif isinstance(obj, RadialFunction):
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel(r"$f(\tau)$")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_roundtrip(original: RadialFunction, recovered: RadialFunction, path) -> None:
    fig, (ax, ax_err) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    tau = original.grid.nodes
    ax.semilogy(tau, np.abs(original.values), label="input")
    ax.semilogy(tau, np.abs(recovered.values), "--", label="forward then inverse")
    ax.legend()
    ax.set_ylabel("|f|")
    ax_err.semilogy(tau, np.abs(recovered.values - original.values) + 1e-300)
    ax_err.set_xlabel(r"$\tau$")
    ax_err.set_ylabel("abs. error")
    _save(fig, path)


def plot_polar_density(values, tau, path, title: str = "") -> None:
    """Density sampled on (phi_i = 2 pi i / n_phi, tau_j), drawn on the Poincare disk."""
    values = np.asarray(values)
    n_phi = values.shape[0]
    phi = 2 * np.pi * np.arange(n_phi + 1) / n_phi
    r = np.tanh(np.asarray(tau) / 2)
    R, P = np.meshgrid(r, phi)
    closed = np.vstack([values, values[:1]])
    fig, ax = plt.subplots(figsize=(5, 5))
    mesh = ax.pcolormesh(R * np.cos(P), R * np.sin(P), closed, shading="gouraud", cmap="viridis")
    ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, color="k", lw=0.8))
    ax.set_aspect("equal")
    ax.set_xlim(-1.02, 1.02)
    ax.set_ylim(-1.02, 1.02)
    ax.set_title(title)
    fig.colorbar(mesh, ax=ax, shrink=0.8)
    _save(fig, path)


def plot_embedding(ids, coords, path) -> None:
    coords = np.asarray(coords)
    y = coords[:, 1] if coords.shape[1] > 1 else np.zeros(len(ids))
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(coords[:, 0], y)
    for label, xv, yv in zip(ids, coords[:, 0], y):
        ax.annotate(str(label), (xv, yv), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("MDS axis 1")
    ax.set_ylabel("MDS axis 2")
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_distance_matrix(D, ids, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(D, cmap="magma")
    ax.set_xticks(range(len(ids)), [str(i) for i in ids], rotation=90, fontsize=7)
    ax.set_yticks(range(len(ids)), [str(i) for i in ids], fontsize=7)
    fig.colorbar(im, ax=ax)
    _save(fig, path)


def plot_saturation(times, means, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(times, means, "o-")
    ax.set_xlabel("heat time t")
    ax.set_ylabel("mean saturation radius")
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_image_strip(images, labels, path) -> None:
    """Row of RGB images with captions."""
    n = len(images)
    fig, axes = plt.subplots(1, n, figsize=(1.6 * n, 1.9), squeeze=False)
    for ax, img, label in zip(axes[0], images, labels):
        ax.imshow(img)
        ax.set_title(label, fontsize=7)
        ax.axis("off")
    _save(fig, path)
