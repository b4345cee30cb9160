"""
Color desaturation by heat flow on local saturation distributions.

Chroma C = |(a, b)| is scaled into the disk as r = min(C / C_ref, r_max)
with C_ref the 99th chroma percentile. Around each pixel the radii of a
window form a zonal kernel density; its spectrum is damped by the heat
multiplier, synthesized on the tau grid, and the pixel's new radius is the
mode of the smoothed density (per unit hyperbolic area). Lightness and hue
are kept.

The window mean commutes with the (linear) transform chain, so each pixel's
synthesized kernel bump is computed once per time step and then averaged
over the window.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..density import RadialKernel, kernel_weights, tabulated_zonal
from ..mft import (
    DEFAULT_RADIAL_GRID,
    DEFAULT_SPECTRAL_GRID,
    RadialGrid,
    SpectralGrid,
    conical_matrix,
    heat_factors,
    plancherel_weights,
)
from .color import ColorImage, cielab_to_srgb, srgb_to_cielab

__all__ = [
    "DesaturationConfig",
    "DesaturationResult",
    "default_schedule",
    "chroma_radii",
    "desaturate",
    "NEUTRAL_CHROMA",
]

# chroma below this is treated as gray: no hue, saturation stays 0
NEUTRAL_CHROMA = 1e-6
_BLOCK_ROWS = 32


def default_schedule(dt: float = 0.05, n_steps: int = 16) -> list:
    """Cumulative times of n_steps intervals: n_steps - 1 of length dt, the last of 2 dt."""
    if dt < 0 or n_steps < 1:
        raise ValueError("need dt >= 0 and n_steps >= 1")
    return [k * dt for k in range(1, n_steps)] + [(n_steps + 1) * dt]


@dataclass(frozen=True)
class DesaturationConfig:
    s: float = 4.0
    percentile: float = 99.0
    r_max: float = 0.999
    sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID
    rgrid: RadialGrid = DEFAULT_RADIAL_GRID
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.percentile <= 100:
            raise ValueError("percentile must lie in (0, 100]")
        if not 0 < self.r_max < 1:
            raise ValueError("r_max must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class DesaturationResult:
    """Output images per time step with their disk radii and CIELAB values."""

    times: list
    images: list
    radii: list = field(repr=False)
    lab: list = field(repr=False)
    initial_radii: np.ndarray = field(repr=False)
    chroma_ref: float = 0.0

    @property
    def mean_saturation(self) -> list:
        return [float(r.mean()) for r in self.radii]


def chroma_radii(lab, percentile: float = 99.0, r_max: float = 0.999):
    """Disk radii min(C / C_ref, r_max), the reference chroma C_ref and the neutral mask."""
    chroma = np.hypot(lab[..., 1], lab[..., 2])
    neutral = chroma < NEUTRAL_CHROMA
    if neutral.all():
        return np.zeros(chroma.shape), 0.0, neutral
    c_ref = float(np.percentile(chroma, percentile))
    if c_ref < NEUTRAL_CHROMA:
        c_ref = float(chroma.max())
    r = np.where(neutral, 0.0, np.minimum(chroma / c_ref, r_max))
    return r, c_ref, neutral


def _window_bounds(n: int, window: int):
    i = np.arange(n)
    lo = np.maximum(0, i - window // 2)
    hi = np.minimum(n, i - window // 2 + window)
    return lo, hi


def _box_mean(values, window: int, row_lo, row_hi):
    """Mean over clipped windows; ``values`` has shape (rows, width, T), row bounds index into it."""
    _, width, _ = values.shape
    col_lo, col_hi = _window_bounds(width, window)
    cs = np.concatenate([np.zeros((1,) + values.shape[1:]), np.cumsum(values, axis=0)], axis=0)
    rows = cs[row_hi] - cs[row_lo]
    cs = np.concatenate([np.zeros((rows.shape[0], 1, rows.shape[2])), np.cumsum(rows, axis=1)], axis=1)
    sums = cs[:, col_hi] - cs[:, col_lo]
    counts = (row_hi - row_lo)[:, None] * (col_hi - col_lo)[None, :]
    return sums / counts[:, :, None]


def desaturate(img: ColorImage, window: int = 10, time_steps=None,
               config: DesaturationConfig = DesaturationConfig()) -> DesaturationResult:
    """Heat-flow desaturation; one output image per entry of ``time_steps`` (cumulative times).

    Gray pixels keep their original sRGB bytes, so a grayscale image is a
    fixed point.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    times = default_schedule() if time_steps is None else [float(t) for t in time_steps]
    if any(t < 0 for t in times):
        raise ValueError("time steps must be nonnegative")
    lab = srgb_to_cielab(img.rgb)
    r, c_ref, neutral = chroma_radii(lab, config.percentile, config.r_max)
    if neutral.all():
        zeros = np.zeros(r.shape)
        return DesaturationResult(times, [ColorImage(img.rgb.copy()) for _ in times],
                                  [zeros.copy() for _ in times], [lab.copy() for _ in times], zeros, 0.0)

    sgrid, rgrid = config.sgrid, config.rgrid
    tau_clip = 2.0 * math.atanh(config.r_max)
    n_nodes = int(np.searchsorted(rgrid.nodes, tau_clip, side="right"))
    nodes = rgrid.nodes[:n_nodes]
    synth = conical_matrix(sgrid, rgrid, 0)[:, :n_nodes]
    c = kernel_weights(RadialKernel(config.s), 0, sgrid, rgrid).values
    # per time step: kernel-spectrum times heat factor times quadrature weight, against P(tau_node)
    step_mats = [(c * heat_factors(sgrid, t) * plancherel_weights(sgrid))[:, None] * synth for t in times]

    height, width = r.shape
    tau = 2.0 * np.arctanh(r)
    row_lo, row_hi = _window_bounds(height, window)

    def block(r0):
        r1 = min(height, r0 + _BLOCK_ROWS)
        s0, s1 = int(row_lo[r0]), int(row_hi[r1 - 1])
        p = tabulated_zonal(tau[s0:s1].ravel(), sgrid)  # (pixels, K)
        out = np.empty((len(times), r1 - r0, width), dtype=int)
        for i, mat in enumerate(step_mats):
            dens = (p @ mat).reshape(s1 - s0, width, n_nodes)
            smooth = _box_mean(dens, window, row_lo[r0:r1] - s0, row_hi[r0:r1] - s0)
            out[i] = np.argmax(smooth, axis=-1)  # first maximum: ties go to smaller tau
        return out

    starts = list(range(0, height, _BLOCK_ROWS))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            modes = list(pool.map(block, starts))
    else:
        modes = [block(s) for s in starts]
    modes = np.concatenate(modes, axis=1)

    hue = np.arctan2(lab[..., 2], lab[..., 1])
    images, radii, labs = [], [], []
    for i in range(len(times)):
        new_r = np.where(neutral, 0.0, np.tanh(nodes[modes[i]] / 2))
        chroma = new_r * c_ref
        out_lab = np.stack([lab[..., 0], chroma * np.cos(hue), chroma * np.sin(hue)], axis=-1)
        rgb = cielab_to_srgb(out_lab)
        rgb[neutral] = img.rgb[neutral]
        out_lab[neutral] = lab[neutral]
        images.append(ColorImage(rgb))
        radii.append(new_r)
        labs.append(out_lab)
    return DesaturationResult(times, images, radii, labs, r, c_ref)
