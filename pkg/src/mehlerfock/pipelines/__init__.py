"""Texture ordering and color desaturation built on the disk transforms."""

from .color import ColorImage, cielab_to_srgb, srgb_to_cielab
from .desaturate import DesaturationConfig, DesaturationResult, chroma_radii, default_schedule, desaturate
from .synthetic import noisy_color_image, noisy_texture, two_tone_image
from .texture import (
    EdgeResponse,
    GrayImage,
    TextureConfig,
    TextureDescriptor,
    TextureRanking,
    classical_mds,
    descriptor_distance_matrix,
    dihedral_edge_filter,
    texture_density,
    texture_rank,
    zonal_descriptor,
)

__all__ = [
    "ColorImage",
    "cielab_to_srgb",
    "srgb_to_cielab",
    "DesaturationConfig",
    "DesaturationResult",
    "chroma_radii",
    "default_schedule",
    "desaturate",
    "noisy_color_image",
    "noisy_texture",
    "two_tone_image",
    "EdgeResponse",
    "GrayImage",
    "TextureConfig",
    "TextureDescriptor",
    "TextureRanking",
    "classical_mds",
    "descriptor_distance_matrix",
    "dihedral_edge_filter",
    "texture_density",
    "texture_rank",
    "zonal_descriptor",
]
