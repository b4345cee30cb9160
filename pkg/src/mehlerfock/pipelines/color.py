"""sRGB (D65, 8 bit) to CIELAB and back."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ColorImage", "srgb_to_cielab", "cielab_to_srgb", "SRGB_TO_XYZ", "WHITE_XYZ"]

SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
XYZ_TO_SRGB = np.linalg.inv(SRGB_TO_XYZ)
# white as the image of linear (1, 1, 1) so that white maps to a = b = 0
WHITE_XYZ = SRGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


def _linearize(c):
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _gamma(c):
    c = np.clip(c, 0.0, 1.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1 / 2.4) - 0.055)


def _f(t):
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3 * _DELTA**2) + 4.0 / 29.0)


def _f_inv(t):
    return np.where(t > _DELTA, t**3, 3 * _DELTA**2 * (t - 4.0 / 29.0))


def srgb_to_cielab(rgb) -> np.ndarray:
    """CIELAB of 8-bit sRGB values; accepts shape (..., 3), returns float (..., 3)."""
    rgb = np.asarray(rgb)
    if rgb.shape[-1] != 3:
        raise ValueError("expected a trailing axis of length 3")
    lin = _linearize(rgb.astype(float) / 255.0)
    xyz = lin @ SRGB_TO_XYZ.T / WHITE_XYZ
    fx, fy, fz = _f(xyz[..., 0]), _f(xyz[..., 1]), _f(xyz[..., 2])
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def cielab_to_srgb(lab) -> np.ndarray:
    """8-bit sRGB of CIELAB values; out-of-gamut channels are clamped."""
    lab = np.asarray(lab, dtype=float)
    if lab.shape[-1] != 3:
        raise ValueError("expected a trailing axis of length 3")
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_f_inv(fx), _f_inv(fy), _f_inv(fz)], axis=-1) * WHITE_XYZ
    lin = xyz @ XYZ_TO_SRGB.T
    return np.round(_gamma(lin) * 255.0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class ColorImage:
    """8-bit sRGB image of shape (height, width, 3)."""

    rgb: np.ndarray = field(repr=False)

    def __post_init__(self):
        rgb = np.asarray(self.rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError("color pixels must have shape (height, width, 3)")
        if rgb.dtype != np.uint8:
            if np.any((rgb < 0) | (rgb > 255)) or np.any(rgb != np.round(rgb)):
                raise ValueError("color pixels must be integers in 0..255")
            rgb = rgb.astype(np.uint8)
        object.__setattr__(self, "rgb", rgb)

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def lab(self) -> np.ndarray:
        return srgb_to_cielab(self.rgb)
