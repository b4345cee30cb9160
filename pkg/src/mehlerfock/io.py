"""CSV and image file formats."""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .mft import RadialFunction, RadialGrid, SpectralGrid, Spectrum
from .pipelines.color import ColorImage
from .pipelines.texture import GrayImage

__all__ = [
    "FormatError",
    "write_transform_csv",
    "read_transform_csv",
    "write_polar_dump",
    "write_labeled_matrix",
    "read_gray_image",
    "read_color_image",
    "write_png",
    "IMAGE_SUFFIXES",
]

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")
_HEADER = re.compile(r"^#\s*kind=(spectrum|radial),\s*n=(\d+),\s*max=([^\s,]+)\s*$")


class FormatError(ValueError):
    """A file does not follow its declared format."""


def write_transform_csv(obj, path) -> None:
    """Write a Spectrum or RadialFunction as `index,coordinate,value` rows under a kind header."""
    if isinstance(obj, Spectrum):
        kind, n, top = "spectrum", obj.grid.n_kappa, obj.grid.kappa_max
    elif isinstance(obj, RadialFunction):
        kind, n, top = "radial", obj.grid.n_tau, obj.grid.tau_max
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    nodes = obj.grid.nodes
    with open(path, "w", newline="") as fh:
        fh.write(f"# kind={kind}, n={n}, max={top:.16e}\n")
        for i, (x, v) in enumerate(zip(nodes, obj.values)):
            fh.write(f"{i},{x:.16e},{v:.16e}\n")


def read_transform_csv(path):
    """Read a file written by :func:`write_transform_csv`; returns Spectrum or RadialFunction."""
    path = Path(path)
    with open(path, newline="") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file")
    match = _HEADER.match(lines[0])
    if not match:
        raise FormatError(f"{path}: first line must be '# kind=spectrum|radial, n=<int>, max=<float>'")
    kind, n = match.group(1), int(match.group(2))
    try:
        top = float(match.group(3))
        grid = SpectralGrid(top, n) if kind == "spectrum" else RadialGrid(top, n)
    except ValueError as exc:
        raise FormatError(f"{path}: bad header: {exc}") from None
    rows = list(csv.reader(lines[1:]))
    if len(rows) != n:
        raise FormatError(f"{path}: header declares n={n} but {len(rows)} rows follow")
    values = np.empty(n)
    nodes = grid.nodes
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise FormatError(f"{path}: row {i + 1} must have 3 fields")
        try:
            idx, x, v = int(row[0]), float(row[1]), float(row[2])
        except ValueError:
            raise FormatError(f"{path}: row {i + 1} is not numeric") from None
        if idx != i or abs(x - nodes[i]) > 1e-9 * max(1.0, top):
            raise FormatError(f"{path}: row {i + 1} does not match the uniform grid")
        if not np.isfinite(v):
            raise FormatError(f"{path}: row {i + 1} has a non-finite value")
        values[i] = v
    return Spectrum(grid, values) if kind == "spectrum" else RadialFunction(grid, values)


def write_polar_dump(values, path) -> None:
    """Contour-grid dump: rows `phi_index,tau_index,value` of an (n_phi, n_tau) array."""
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        fh.write("phi_index,tau_index,value\n")
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                fh.write(f"{i},{j},{values[i, j]:.16e}\n")


def write_labeled_matrix(path, row_labels, columns, values) -> None:
    """CSV with a header `id,<columns>` and one labeled row per entry."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["id", *columns])
        for label, row in zip(row_labels, values):
            out.writerow([label, *(f"{v:.16e}" for v in row)])


def _open_image(path) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    try:
        im = Image.open(path)
        im.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"{path}: cannot decode image ({exc})") from None
    return im


def read_gray_image(path) -> GrayImage:
    """8-bit grayscale image; color input is converted to luminance."""
    im = _open_image(path)
    return GrayImage(np.asarray(im.convert("L"), dtype=np.uint8))


def read_color_image(path) -> ColorImage:
    im = _open_image(path)
    return ColorImage(np.asarray(im.convert("RGB"), dtype=np.uint8))


def write_png(rgb_or_gray, path) -> None:
    arr = np.asarray(rgb_or_gray)
    if arr.dtype != np.uint8:
        arr = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")
