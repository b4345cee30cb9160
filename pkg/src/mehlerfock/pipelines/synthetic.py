"""Seeded synthetic test images: noisy gratings and color patches."""

from __future__ import annotations

import numpy as np

from .color import ColorImage
from .texture import GrayImage

__all__ = ["noisy_texture", "two_tone_image", "noisy_color_image"]


def noisy_texture(size: int, amplitude: float, rng: np.random.Generator, period: float = 32.0) -> GrayImage:
    """Diagonal sine grating plus uniform noise of the given peak-to-peak amplitude."""
    y, x = np.mgrid[0:size, 0:size]
    base = 0.5 + 0.2 * np.sin(2 * np.pi * (x + y) / period)
    noise = amplitude * (rng.random((size, size)) - 0.5)
    return GrayImage(np.clip(base + noise, 0.0, 1.0))


def two_tone_image(size: int = 64, left=(200, 60, 60), right=(60, 120, 200)) -> ColorImage:
    """Left half one color, right half another."""
    rgb = np.empty((size, size, 3), dtype=np.uint8)
    rgb[:, : size // 2] = left
    rgb[:, size // 2 :] = right
    return ColorImage(rgb)


def noisy_color_image(size: int, rng: np.random.Generator, spread: float = 40.0) -> ColorImage:
    """Two-tone image with per-pixel uniform jitter of +-spread/2 per channel."""
    base = two_tone_image(size).rgb.astype(float)
    jitter = spread * (rng.random(base.shape) - 0.5)
    return ColorImage(np.clip(np.round(base + jitter), 0, 255).astype(np.uint8))
