"""
Mehler-Fock transform of sampled radial functions.

Forward:  c(kappa) = int_0^inf f(tau) P_{-1/2+i kappa}(cosh tau) sinh(tau) dtau
Inverse:  f(tau)   = int_0^inf kappa tanh(pi kappa) P_{-1/2+i kappa}(cosh tau) c(kappa) dkappa

Both integrals use the composite trapezoid rule on uniform grids. The
forward integrand is odd in tau with derivative f(0) at the origin, so the
O(h^2) end term of the Euler-Maclaurin expansion is known exactly and added.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .conical import DEFAULT_QUADRATURE, QuadratureConfig, conical_p_orders, recommended_n_theta

__all__ = [
    "RadialGrid",
    "SpectralGrid",
    "RadialFunction",
    "Spectrum",
    "TruncationWarning",
    "GridMismatchError",
    "DEFAULT_RADIAL_GRID",
    "DEFAULT_SPECTRAL_GRID",
    "TRUNCATION_TOL",
    "conical_matrix",
    "plancherel_weights",
    "radial_transform",
    "spectral_synthesis",
    "mft_forward",
    "mft_inverse",
    "parseval_inner",
    "parseval_distance",
    "radial_inner",
    "heat_factors",
    "heat_multiplier",
    "relative_l2_error",
]

TRUNCATION_TOL = 1e-5


class TruncationWarning(UserWarning):
    """The sampled function has not decayed at the end of its grid."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    """Uniform tau nodes j * tau_max / (n_tau - 1) on [0, tau_max]."""

    tau_max: float = 12.0
    n_tau: int = 600

    def __post_init__(self):
        if not self.tau_max > 0:
            raise ValueError("tau_max must be positive")
        if int(self.n_tau) != self.n_tau or self.n_tau < 32:
            raise ValueError("n_tau must be an integer >= 32")
        object.__setattr__(self, "tau_max", float(self.tau_max))
        object.__setattr__(self, "n_tau", int(self.n_tau))

    @property
    def step(self) -> float:
        return self.tau_max / (self.n_tau - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.n_tau)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_tau, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform kappa nodes on [0, kappa_max]."""

    kappa_max: float = 20.0
    n_kappa: int = 400

    def __post_init__(self):
        if not self.kappa_max > 0:
            raise ValueError("kappa_max must be positive")
        if int(self.n_kappa) != self.n_kappa or self.n_kappa < 32:
            raise ValueError("n_kappa must be an integer >= 32")
        object.__setattr__(self, "kappa_max", float(self.kappa_max))
        object.__setattr__(self, "n_kappa", int(self.n_kappa))

    @property
    def step(self) -> float:
        return self.kappa_max / (self.n_kappa - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.kappa_max, self.n_kappa)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_kappa, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w


DEFAULT_RADIAL_GRID = RadialGrid()
DEFAULT_SPECTRAL_GRID = SpectralGrid()


def _checked_values(values, n, what):
    v = np.asarray(values, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{what}: expected {n} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what}: values must be finite")
    return v


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Samples f(tau_j) of a radial function on a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_values(self.values, self.grid.n_tau, "RadialFunction"))

    @classmethod
    def from_callable(cls, func, grid: RadialGrid = DEFAULT_RADIAL_GRID) -> "RadialFunction":
        return cls(grid, func(grid.nodes))

    def __mul__(self, a: float) -> "RadialFunction":
        return RadialFunction(self.grid, a * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Samples c(kappa_i) of a Mehler-Fock spectrum on a :class:`SpectralGrid`."""

    grid: SpectralGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_values(self.values, self.grid.n_kappa, "Spectrum"))

    @classmethod
    def zeros(cls, grid: SpectralGrid = DEFAULT_SPECTRAL_GRID) -> "Spectrum":
        return cls(grid, np.zeros(grid.n_kappa))

    def _same(self, other: "Spectrum"):
        if self.grid != other.grid:
            raise GridMismatchError(f"spectral grids differ: {self.grid} vs {other.grid}")

    def __add__(self, other: "Spectrum") -> "Spectrum":
        self._same(other)
        return Spectrum(self.grid, self.values + other.values)

    def __sub__(self, other: "Spectrum") -> "Spectrum":
        self._same(other)
        return Spectrum(self.grid, self.values - other.values)

    def __mul__(self, a: float) -> "Spectrum":
        return Spectrum(self.grid, a * self.values)

    __rmul__ = __mul__


def _quadrature_for(kappa_max: float, tau_max: float, cfg: QuadratureConfig | None) -> QuadratureConfig:
    cfg = cfg or DEFAULT_QUADRATURE
    need = recommended_n_theta(kappa_max, tau_max, floor=cfg.n_theta)
    return cfg if need == cfg.n_theta else cfg.with_n_theta(need)


@lru_cache(maxsize=16)
def _cached_matrix(m: int, sgrid: SpectralGrid, tau_key: tuple, cfg: QuadratureConfig):
    tau = np.asarray(tau_key)
    mat = conical_p_orders([m], sgrid.nodes, tau, cfg)[0]
    mat.setflags(write=False)
    return mat


def conical_matrix(sgrid: SpectralGrid, rgrid: RadialGrid, m: int = 0,
                   cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Read-only matrix [i, j] = P^m_{-1/2+i kappa_i}(cosh tau_j), cached per grid pair.

    The node count of the theta rule is raised to what the grid corner
    (kappa_max, tau_max) requires.
    """
    cfg = _quadrature_for(sgrid.kappa_max, rgrid.tau_max, cfg)
    return _cached_matrix(int(m), sgrid, tuple(rgrid.nodes.tolist()), cfg)


def plancherel_weights(sgrid: SpectralGrid) -> np.ndarray:
    """Trapezoid weights times the Plancherel density kappa tanh(pi kappa)."""
    k = sgrid.nodes
    return sgrid.weights * k * np.tanh(np.pi * k)


def radial_transform(values, rgrid: RadialGrid, sgrid: SpectralGrid, m: int = 0,
                     cfg: QuadratureConfig | None = None, truncation_tol: float = TRUNCATION_TOL) -> np.ndarray:
    """Trapezoid of f(tau) P^m(cosh tau) sinh(tau) over the radial grid, per kappa node.

    ``values`` may be 1-D (n_tau,) or 2-D (batch, n_tau).
    """
    values = np.asarray(values, dtype=float)
    mat = conical_matrix(sgrid, rgrid, m, cfg)
    tau = rgrid.nodes
    sh = np.sinh(tau)
    out = (values * (rgrid.weights * sh)) @ mat.T
    if m == 0:
        # integrand f P sinh is odd with slope f(0) at tau = 0
        out = out + (rgrid.step**2 / 12.0) * values[..., :1]
    # relative to the result where that exceeds 1: P^m carries Gamma-ratio factors of order m!
    tail = np.max(np.abs(values[..., -1:] * sh[-1] * mat[:, -1]) / np.maximum(1.0, np.abs(out)))
    if tail > truncation_tol:
        warnings.warn(
            f"radial integrand is {tail:.3g} at tau_max={rgrid.tau_max} (relative to max(1, |transform|)); "
            "transform is truncated",
            TruncationWarning,
            stacklevel=3,
        )
    return out


def spectral_synthesis(spec_values, sgrid: SpectralGrid, rgrid: RadialGrid, m: int = 0,
                       cfg: QuadratureConfig | None = None, truncation_tol: float = TRUNCATION_TOL) -> np.ndarray:
    """Trapezoid of kappa tanh(pi kappa) P^m(cosh tau_j) c(kappa) over the spectral grid.

    ``spec_values`` may be real or complex, 1-D or batched along the first axis.
    """
    spec_values = np.asarray(spec_values)
    tail = np.max(np.abs(spec_values[..., -1])) * sgrid.kappa_max
    if tail > truncation_tol:
        warnings.warn(
            f"spectrum is {tail:.3g} (times kappa) at kappa_max={sgrid.kappa_max}; inverse is truncated",
            TruncationWarning,
            stacklevel=3,
        )
    mat = conical_matrix(sgrid, rgrid, m, cfg)
    return (spec_values * plancherel_weights(sgrid)) @ mat


def mft_forward(f: RadialFunction, sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID,
                cfg: QuadratureConfig | None = None, truncation_tol: float = TRUNCATION_TOL) -> Spectrum:
    """Forward Mehler-Fock transform of a sampled radial function."""
    return Spectrum(sgrid, radial_transform(f.values, f.grid, sgrid, 0, cfg, truncation_tol))


def mft_inverse(c: Spectrum, rgrid: RadialGrid = DEFAULT_RADIAL_GRID,
                cfg: QuadratureConfig | None = None, truncation_tol: float = TRUNCATION_TOL) -> RadialFunction:
    """Inverse Mehler-Fock transform, sampled on ``rgrid``."""
    return RadialFunction(rgrid, spectral_synthesis(c.values, c.grid, rgrid, 0, cfg, truncation_tol))


def parseval_inner(c1: Spectrum, c2: Spectrum) -> float:
    """int c1(kappa) c2(kappa) kappa tanh(pi kappa) dkappa (trapezoid)."""
    c1._same(c2)
    return float(np.sum(c1.values * c2.values * plancherel_weights(c1.grid)))


def parseval_distance(c1: Spectrum, c2: Spectrum) -> float:
    """Plancherel-weighted L2 distance between two spectra."""
    d = c1 - c2
    return math.sqrt(max(0.0, parseval_inner(d, d)))


def radial_inner(f: RadialFunction, g: RadialFunction) -> float:
    """int f g sinh(tau) dtau = int_1^inf f g dx, trapezoid in tau."""
    if f.grid != g.grid:
        raise GridMismatchError("radial grids differ")
    tau = f.grid.nodes
    return float(np.sum(f.values * g.values * np.sinh(tau) * f.grid.weights))


def relative_l2_error(approx: RadialFunction, exact: RadialFunction) -> float:
    """||approx - exact|| / ||exact|| in L2(sinh tau dtau)."""
    diff = RadialFunction(exact.grid, approx.values - exact.values)
    return math.sqrt(radial_inner(diff, diff) / radial_inner(exact, exact))


def heat_factors(sgrid: SpectralGrid, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("heat time t must be nonnegative")
    k = sgrid.nodes
    return np.exp(-(0.25 + k * k) * t)


def heat_multiplier(c: Spectrum, t: float) -> Spectrum:
    """Heat flow for time t: multiply by exp(-(1/4 + kappa^2) t)."""
    return Spectrum(c.grid, heat_factors(c.grid, t) * c.values)
