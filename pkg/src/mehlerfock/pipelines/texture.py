"""
Texture roughness ordering from edge-orientation densities on the disk.

Each 2x2 block of a grayscale image yields an edge vector (dx, dy). Its polar
form is mapped into the unit disk by r = tanh(gain * rho), the responses of a
whole image define a kernel density there, and the rotation invariant (m = 0)
part of that density's spectrum is the texture descriptor. Pairwise
Plancherel distances between descriptors are embedded by classical MDS and
textures are sorted along the first axis.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..density import DiskDensity, RadialKernel, SampleSet, density_normalize, kde_spectral
from ..mft import (
    DEFAULT_RADIAL_GRID,
    DEFAULT_SPECTRAL_GRID,
    GridMismatchError,
    RadialGrid,
    SpectralGrid,
    Spectrum,
    parseval_distance,
)

__all__ = [
    "GrayImage",
    "EdgeResponse",
    "TextureDescriptor",
    "TextureConfig",
    "TextureRanking",
    "dihedral_edge_filter",
    "texture_density",
    "zonal_descriptor",
    "descriptor_distance_matrix",
    "classical_mds",
    "texture_rank",
]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Grayscale image with pixel values in [0, 1], indexed [row, column]."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError("grayscale pixels must be a 2-D array")
        if px.dtype == np.uint8:
            px = px / 255.0
        px = np.clip(np.asarray(px, dtype=float), 0.0, 1.0)
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel values must be finite")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class EdgeResponse:
    """Edge vectors of all 2x2 blocks, flattened in row-major block order."""

    dx: np.ndarray = field(repr=False)
    dy: np.ndarray = field(repr=False)
    gain: float = 1.0

    def __len__(self) -> int:
        return self.dx.size

    @property
    def rho(self) -> np.ndarray:
        return np.hypot(self.dx, self.dy)

    @property
    def phi(self) -> np.ndarray:
        """Orientation atan2(dy, dx) in [0, 2 pi)."""
        return np.mod(np.arctan2(self.dy, self.dx), 2 * np.pi)

    @property
    def r(self) -> np.ndarray:
        return np.tanh(self.gain * self.rho)

    @property
    def tau(self) -> np.ndarray:
        # 2 artanh(tanh(g rho)) without the round trip, which saturates for large g rho
        return 2.0 * self.gain * self.rho

    def samples(self, rotation: float = 0.0) -> SampleSet:
        """Disk samples (phi + rotation, tau), uniformly weighted."""
        return SampleSet(self.phi + rotation, self.tau)


@dataclass(frozen=True, eq=False)
class TextureDescriptor:
    texture_id: str
    spectrum: Spectrum


def dihedral_edge_filter(img: GrayImage, gain: float = 1.0) -> EdgeResponse:
    """Apply the filter pair (1,1,-1,-1)/2 and (1,-1,-1,1)/2 to every 2x2 block, stride 1.

    Block pixels are taken clockwise from the top left: (tl, tr, br, bl).
    """
    if img.width < 2 or img.height < 2:
        raise ValueError("image must be at least 2x2")
    if not gain > 0:
        raise ValueError("gain must be positive")
    p = img.pixels
    tl, tr = p[:-1, :-1], p[:-1, 1:]
    bl, br = p[1:, :-1], p[1:, 1:]
    dx = 0.5 * (tl + tr - br - bl)
    dy = 0.5 * (tl - tr - br + bl)
    return EdgeResponse(dx.ravel(), dy.ravel(), float(gain))


def texture_density(responses: EdgeResponse, k: RadialKernel = RadialKernel(), m_max: int = 32,
                    sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID, rgrid: RadialGrid = DEFAULT_RADIAL_GRID,
                    cfg=None, rotation: float = 0.0) -> DiskDensity:
    """Normalized spectral KDE of the responses' disk points."""
    if len(responses) == 0:
        raise ValueError("no edge responses")
    d = kde_spectral(responses.samples(rotation), k, m_max, sgrid, rgrid, cfg)
    return density_normalize(d)


def zonal_descriptor(d: DiskDensity, texture_id: str = "") -> TextureDescriptor:
    """The m = 0 spectrum, invariant under rotations of the disk."""
    return TextureDescriptor(texture_id, d.zonal())


def descriptor_distance_matrix(descriptors) -> np.ndarray:
    """Symmetric matrix of Plancherel distances between descriptor spectra."""
    descriptors = list(descriptors)
    if len(descriptors) < 2:
        raise ValueError("need at least two descriptors")
    grid = descriptors[0].spectrum.grid
    for d in descriptors[1:]:
        if d.spectrum.grid != grid:
            raise GridMismatchError(f"descriptor {d.texture_id!r} uses a different spectral grid")
    n = len(descriptors)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = parseval_distance(descriptors[i].spectrum, descriptors[j].spectrum)
    return D


def classical_mds(D, dim: int = 2, tol: float = 1e-9) -> np.ndarray:
    """Torgerson scaling: coordinates from the top eigenpairs of -1/2 J D^2 J.

    Eigenvalues down to ``-tol * max(1, largest)`` count as zero. Each axis is
    flipped so that its largest-magnitude coordinate is positive.

    Raises
    ------
    ValueError
        If D is not a symmetric zero-diagonal matrix, or fewer than ``dim``
        eigenvalues are nonnegative.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if D.ndim != 2 or D.shape != (n, n):
        raise ValueError("distance matrix must be square")
    scale = max(1.0, float(np.abs(D).max(initial=0.0)))
    if not np.allclose(D, D.T, rtol=0, atol=1e-12 * scale) or np.any(np.abs(np.diag(D)) > 1e-12 * scale):
        raise ValueError("distance matrix must be symmetric with zero diagonal")
    if not 1 <= dim <= n:
        raise ValueError(f"dim must lie in 1..{n}")
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:dim]
    lam, vec = evals[order], evecs[:, order]
    floor = tol * max(1.0, float(abs(evals).max()))
    if np.any(lam < -floor):
        raise ValueError(f"only {int(np.sum(evals >= -floor))} nonnegative eigenvalues, need {dim}")
    X = vec * np.sqrt(np.clip(lam, 0.0, None))
    for j in range(dim):
        i = np.argmax(np.abs(X[:, j]))
        if X[i, j] < 0:
            X[:, j] = -X[:, j]
    return X


@dataclass(frozen=True)
class TextureConfig:
    gain: float = 1.0
    s: float = 4.0
    m_max: int = 32
    sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID
    rgrid: RadialGrid = DEFAULT_RADIAL_GRID
    threads: int = 1


@dataclass(frozen=True, eq=False)
class TextureRanking:
    """Result of :func:`texture_rank`; arrays are indexed like ``ids`` (sorted by id)."""

    ids: list
    distances: np.ndarray
    embedding: np.ndarray
    densities: list
    descriptors: list

    @property
    def order(self) -> list:
        """Texture ids sorted by first-axis coordinate, ties by id."""
        return [self.ids[i] for i in np.lexsort((np.arange(len(self.ids)), self.embedding[:, 0]))]

    @property
    def first_axis(self) -> dict:
        return {tid: float(x) for tid, x in zip(self.ids, self.embedding[:, 0])}


def texture_rank(images, config: TextureConfig = TextureConfig()) -> TextureRanking:
    """Edge filter, density, zonal descriptor, distances, 2-D MDS for a set of textures.

    ``images`` is a mapping or a sequence of ``(texture_id, GrayImage)``
    pairs. Processing order is by texture id, so the result does not depend
    on input order or on ``config.threads``.
    """
    items = list(images.items()) if hasattr(images, "items") else list(images)
    ids = [str(tid) for tid, _ in items]
    if len(items) < 2:
        raise ValueError("need at least two images")
    if len(set(ids)) != len(ids):
        raise ValueError("texture ids must be unique")
    items = sorted(((str(t), im) for t, im in items), key=lambda it: it[0])
    k = RadialKernel(config.s)

    def work(item):
        tid, im = item
        resp = dihedral_edge_filter(im, config.gain)
        d = texture_density(resp, k, config.m_max, config.sgrid, config.rgrid)
        return d, zonal_descriptor(d, tid)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(it) for it in items]
    densities = [r[0] for r in results]
    descriptors = [r[1] for r in results]
    D = descriptor_distance_matrix(descriptors)
    X = classical_mds(D, dim=min(2, len(items)))
    return TextureRanking([t for t, _ in items], D, X, densities, descriptors)
