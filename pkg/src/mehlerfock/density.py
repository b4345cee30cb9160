"""
Kernel density estimation on the hyperbolic disk.

Densities are taken with respect to the invariant area element
sinh(tau) dtau dphi. A radial kernel k(cosh d) centred on a sample enters the
spectral estimator through two separate factors:

* the kernel's zonal Mehler-Fock spectrum, independent of the data, and
* per angular order m the data coefficients
  gamma_m(kappa) = sum_l w_l exp(-i m phi_l) P^{-m}(cosh tau_l),
  independent of the kernel.

The addition formula turns the sum over samples into
rho(tau, phi) = sum_m (-1)^m e^{i m phi} int kappa tanh(pi kappa) P^m(cosh tau) c(kappa) gamma_m(kappa) dkappa.
The factor (-1)^m appears because the addition formula is stated for
cosh tau_l cosh tau + sinh tau_l sinh tau cos(theta), while the distance
between the coset points has a minus sign in front of the cosine.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .conical import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    _real_part,
    gamma_ratio,
    legendre_integral,
    recommended_n_theta,
)
from .hypgeo import DiskPoint, relative_cosh
from .mft import (
    DEFAULT_RADIAL_GRID,
    DEFAULT_SPECTRAL_GRID,
    RadialFunction,
    RadialGrid,
    SpectralGrid,
    _quadrature_for,
    Spectrum,
    conical_matrix,
    plancherel_weights,
    radial_transform,
)

__all__ = [
    "RadialKernel",
    "SampleSet",
    "DiskDensity",
    "kernel_weights",
    "data_coefficients",
    "separated_kernel_transform",
    "kde_direct",
    "kde_spectral",
    "density_mass",
    "density_normalize",
    "tabulated_zonal",
    "EXACT_SAMPLE_LIMIT",
]

# sample sets larger than this use tabulated conical functions by default
EXACT_SAMPLE_LIMIT = 512
TABLE_STEP = 0.005
# serializes cache fills so worker threads share one table instead of each building it
_TABLE_LOCK = threading.Lock()


@dataclass(frozen=True)
class RadialKernel:
    """Power-of-cosh kernel normalization * (cosh d)^(-s), a pdf for sinh(tau) dtau dphi."""

    s: float = 4.0
    family: str = "PowerCosh"

    def __post_init__(self):
        if self.family != "PowerCosh":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if not self.s > 1:
            raise ValueError("kernel exponent s must exceed 1")
        object.__setattr__(self, "s", float(self.s))

    @property
    def normalization(self) -> float:
        return (self.s - 1.0) / (2.0 * math.pi)

    def __call__(self, x):
        """Kernel value at x = cosh(distance) >= 1."""
        return self.normalization * np.asarray(x, dtype=float) ** (-self.s)

    def radial(self, rgrid: RadialGrid = DEFAULT_RADIAL_GRID) -> RadialFunction:
        return RadialFunction(rgrid, self(np.cosh(rgrid.nodes)))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Weighted disk samples in coset coordinates (phi_l, tau_l)."""

    phi: np.ndarray
    tau: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if phi.shape != tau.shape or phi.ndim != 1 or phi.size == 0:
            raise ValueError("phi and tau must be nonempty 1-D arrays of equal length")
        if np.any(tau < 0) or not np.all(np.isfinite(tau)) or not np.all(np.isfinite(phi)):
            raise ValueError("tau must be finite and nonnegative")
        if self.weights is None:
            w = np.full(phi.size, 1.0 / phi.size)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != phi.shape or np.any(w < 0) or not w.sum() > 0:
                raise ValueError("weights must be nonnegative with positive sum")
            w = w / w.sum()
        object.__setattr__(self, "phi", np.mod(phi, 2 * np.pi))
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.phi.size

    @classmethod
    def from_points(cls, z, weights=None) -> "SampleSet":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(z) >= 1.0):
            raise ValueError("points must lie inside the unit disk")
        return cls(np.angle(z), 2.0 * np.arctanh(np.abs(z)), weights)

    def points(self) -> np.ndarray:
        return np.tanh(self.tau / 2) * np.exp(1j * self.phi)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["phi", "tau", "weight"])
            for row in zip(self.phi, self.tau, self.weights):
                out.writerow([f"{v:.16e}" for v in row])

    @classmethod
    def read_csv(cls, path) -> "SampleSet":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].lstrip().startswith("#"):
                    continue
                if rec[0].strip() == "phi":
                    continue
                if len(rec) not in (2, 3):
                    raise ValueError(f"{path}: expected phi,tau[,weight] rows, got {rec!r}")
                rows.append([float(v) for v in rec] + ([1.0] if len(rec) == 2 else []))
        if not rows:
            raise ValueError(f"{path}: no samples")
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])


def _signed_orders(integral, orders, kappa, cfg):
    """P^{orders}(cosh tau) from the shared |m| integrals, shape (M, K, T)."""
    out = np.empty(integral.shape)
    for i, m in enumerate(orders):
        out[i] = _real_part(gamma_ratio(int(m), kappa)[:, None] * integral[i], cfg, int(m))
    return out


@lru_cache(maxsize=8)
def _order_matrices(m_max: int, sgrid: SpectralGrid, tau_key: tuple, sign: int, cfg: QuadratureConfig):
    """P^{sign*m}(cosh tau) for m = 0..m_max at the given tau values, read-only."""
    tau = np.asarray(tau_key)
    cfg = _quadrature_for(sgrid.kappa_max, float(tau.max(initial=0.0)), cfg)
    orders = np.arange(m_max + 1)
    integral = legendre_integral(orders, -0.5 + 1j * sgrid.nodes, tau, cfg)
    mats = _signed_orders(integral, sign * orders, sgrid.nodes, cfg)
    mats.setflags(write=False)
    return mats


def kernel_weights(k: RadialKernel, m: int, sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID,
                   rgrid: RadialGrid = DEFAULT_RADIAL_GRID, cfg: QuadratureConfig | None = None) -> Spectrum:
    """w_m(kappa) = int k(cosh tau) P^m_{-1/2+i kappa}(cosh tau) sinh(tau) dtau.

    For m = 0 this is the forward transform of the kernel.
    """
    values = k(np.cosh(rgrid.nodes))
    return Spectrum(sgrid, radial_transform(values, rgrid, sgrid, m, cfg))


def data_coefficients(samples: SampleSet, m: int, sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID,
                      cfg: QuadratureConfig | None = None, aggregate: bool = True) -> np.ndarray:
    """gamma_{kappa m l} = exp(-i m phi_l) P^{-m}(cosh tau_l).

    Returns the weighted sum over samples, shape (n_kappa,), or with
    ``aggregate=False`` the per-sample array of shape (len(samples), n_kappa).
    """
    cfg = _quadrature_for(sgrid.kappa_max, float(samples.tau.max()), cfg)
    integral = legendre_integral([m], -0.5 + 1j * sgrid.nodes, samples.tau, cfg)
    p = _signed_orders(integral, [-m], sgrid.nodes, cfg)[0]
    gam = np.exp(-1j * m * samples.phi)[:, None] * p.T
    if aggregate:
        return samples.weights @ gam
    return gam


def separated_kernel_transform(k: RadialKernel, tau_l: float, theta: float, m_max: int,
                               sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID,
                               rgrid: RadialGrid = DEFAULT_RADIAL_GRID,
                               cfg: QuadratureConfig | None = None) -> np.ndarray:
    """sum_{|m| <= m_max} gamma_m w_m: the data/kernel separated form of

        int k(cosh tau) P_alpha(cosh tau_l cosh tau + sinh tau_l sinh tau cos theta) sinh(tau) dtau

    for a single datum at (theta, tau_l). Returns a real array over kappa.
    """
    single = SampleSet([theta], [tau_l])
    total = np.zeros(sgrid.n_kappa)
    for m in range(-m_max, m_max + 1):
        gam = data_coefficients(single, m, sgrid, cfg)
        w = kernel_weights(k, m, sgrid, rgrid, cfg).values
        total += (gam * w).real
    return total


def kde_direct(samples: SampleSet, k: RadialKernel, query):
    """sum_l w_l k(cosh d(sample_l, query)); ``query`` may be a point or an array of points."""
    if isinstance(query, DiskPoint):
        query = query.z
    q = np.asarray(query, dtype=complex)
    if np.any(np.abs(q) >= 1.0):
        raise ValueError("query points must lie inside the unit disk")
    tau_q = 2.0 * np.arctanh(np.abs(q))
    phi_q = np.angle(q)
    x = relative_cosh(samples.tau[:, None], samples.phi[:, None], tau_q.reshape(1, -1), phi_q.reshape(1, -1))
    val = samples.weights @ k(x)
    return float(val[0]) if q.ndim == 0 else val.reshape(q.shape)


@dataclass(frozen=True, eq=False)
class DiskDensity:
    """Spectral representation of a density on the disk.

    ``data[m]`` holds gamma_m(kappa) for m = 0..m_max; ``kernel_spectrum``
    holds the kernel's zonal transform. Negative orders follow from
    conjugation and are not stored.
    """

    sgrid: SpectralGrid
    rgrid: RadialGrid
    m_max: int
    kernel: RadialKernel
    kernel_spectrum: np.ndarray = field(repr=False)
    data: np.ndarray = field(repr=False)
    scale: float = 1.0
    cfg: QuadratureConfig = DEFAULT_QUADRATURE

    def spectrum(self, m: int) -> np.ndarray:
        """Complex order-m spectrum, scale * (-1)^m * c(kappa) * gamma_m(kappa), m >= 0."""
        if not 0 <= m <= self.m_max:
            raise ValueError(f"order {m} outside 0..{self.m_max}")
        sign = -1.0 if m % 2 else 1.0
        return self.scale * sign * self.kernel_spectrum * self.data[m]

    def spectra(self) -> np.ndarray:
        signs = np.where(np.arange(self.m_max + 1) % 2, -1.0, 1.0)
        return self.scale * signs[:, None] * self.kernel_spectrum[None, :] * self.data

    def zonal(self) -> Spectrum:
        """m = 0 spectrum; real because gamma_0 is real."""
        return Spectrum(self.sgrid, self.spectrum(0).real)

    def radial_components(self, tau) -> np.ndarray:
        """f_m(tau) = int kappa tanh(pi kappa) P^m(cosh tau) S_m(kappa) dkappa, shape (m_max+1, T)."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        mats = _order_matrices(self.m_max, self.sgrid, tuple(tau.tolist()), 1, self.cfg)
        weighted = self.spectra() * plancherel_weights(self.sgrid)
        return np.einsum("mk,mkt->mt", weighted, mats)

    def _sum_orders(self, comps, phi):
        m = np.arange(1, self.m_max + 1)
        rot = np.exp(1j * np.multiply.outer(phi, m))
        return comps[0].real + 2.0 * (rot * comps[1:].T).sum(axis=-1).real

    def polar_grid(self, tau, n_phi: int = 64, clip: bool = True) -> np.ndarray:
        """Density on a polar grid, shape (n_phi, len(tau)), phi_i = 2 pi i / n_phi."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        comps = self.radial_components(tau)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        m = np.arange(1, self.m_max + 1)
        rot = np.exp(1j * np.multiply.outer(phi, m))  # (P, M)
        vals = comps[0].real[None, :] + 2.0 * (rot @ comps[1:]).real
        return np.maximum(vals, 0.0) if clip else vals

    def evaluate(self, z, clip: bool = True):
        """Density at disk point(s) z."""
        if isinstance(z, DiskPoint):
            z = z.z
        q = np.asarray(z, dtype=complex)
        flat = q.reshape(-1)
        tau = 2.0 * np.arctanh(np.abs(flat))
        uniq, inv = np.unique(tau, return_inverse=True)
        comps = self.radial_components(uniq)[:, inv]
        m = np.arange(1, self.m_max + 1)
        rot = np.exp(1j * np.multiply.outer(np.angle(flat), m))
        vals = comps[0].real + 2.0 * (rot * comps[1:].T).sum(axis=-1).real
        if clip:
            vals = np.maximum(vals, 0.0)
        return float(vals[0]) if q.ndim == 0 else vals.reshape(q.shape)

    def zonal_radial(self) -> RadialFunction:
        """f_0 on the density's radial grid."""
        mat = conical_matrix(self.sgrid, self.rgrid, 0, self.cfg)
        vals = (self.spectrum(0).real * plancherel_weights(self.sgrid)) @ mat
        return RadialFunction(self.rgrid, vals)

    def write_csv(self, path) -> None:
        """Rows m,kappa_index,kappa,value_re,value_im for m = 0..m_max."""
        spectra = self.spectra()
        kap = self.sgrid.nodes
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["m", "kappa_index", "kappa", "value_re", "value_im"])
            for m in range(self.m_max + 1):
                for i in range(self.sgrid.n_kappa):
                    v = spectra[m, i]
                    out.writerow([m, i, f"{kap[i]:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}"])


def _lagrange_basis(tau, h: float, n_nodes: int):
    """Cubic Lagrange weights on nodes n*h: (indices, weights), each of shape (4, len(tau))."""
    x = np.asarray(tau, dtype=float) / h
    base = np.clip(np.floor(x).astype(int) - 1, 0, n_nodes - 4)
    u = x - base  # position relative to the 4 nodes base..base+3
    lag = np.stack([
        -(u - 1) * (u - 2) * (u - 3) / 6.0,
        u * (u - 2) * (u - 3) / 2.0,
        -u * (u - 1) * (u - 3) / 2.0,
        u * (u - 1) * (u - 2) / 6.0,
    ])
    idx = base[None, :] + np.arange(4)[:, None]
    return idx, lag


def _table(m_max: int, sgrid: SpectralGrid, tau_top: float, sign: int, cfg: QuadratureConfig | None,
           h: float = TABLE_STEP):
    """Cached P^{sign*m}(cosh(n h)) for m = 0..m_max on nodes covering [0, tau_top]."""
    top = max(1.0, math.ceil((tau_top + 3 * h) * 2.0) / 2.0)
    n_nodes = int(round(top / h)) + 1
    nodes = tuple((np.arange(n_nodes) * h).tolist())
    with _TABLE_LOCK:
        return _order_matrices(m_max, sgrid, nodes, sign, cfg or DEFAULT_QUADRATURE)


def tabulated_zonal(tau, sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID, cfg: QuadratureConfig | None = None,
                    h: float = TABLE_STEP) -> np.ndarray:
    """P_{-1/2+i kappa}(cosh tau) by cubic interpolation in a cached table, shape (len(tau), n_kappa)."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise ValueError("tau must be finite and nonnegative")
    table = _table(0, sgrid, float(tau.max()), 1, cfg, h)[0]
    idx, lag = _lagrange_basis(tau, h, table.shape[1])
    return np.einsum("jl,kjl->lk", lag, table[:, idx])


def _table_coefficients(samples: SampleSet, m_max: int, sgrid: SpectralGrid, cfg: QuadratureConfig | None,
                        h: float = TABLE_STEP) -> np.ndarray:
    table = _table(m_max, sgrid, float(samples.tau.max()), -1, cfg, h)
    n_nodes = table.shape[2]
    idx, lag = _lagrange_basis(samples.tau, h, n_nodes)
    flat_idx = idx.ravel()
    mom = np.zeros((m_max + 1, n_nodes), dtype=complex)
    for m in range(m_max + 1):
        # sum_l w_l exp(-i m phi_l) L_n(tau_l) per table node n
        coef = samples.weights * np.exp(-1j * m * samples.phi)
        contrib = (lag * coef[None, :]).ravel()
        mom[m] = np.bincount(flat_idx, contrib.real, n_nodes) + 1j * np.bincount(flat_idx, contrib.imag, n_nodes)
    return np.einsum("mkn,mn->mk", table, mom)


def _exact_coefficients(samples: SampleSet, m_max: int, sgrid: SpectralGrid, cfg: QuadratureConfig | None,
                        chunk: int = 64) -> np.ndarray:
    cfg = _quadrature_for(sgrid.kappa_max, float(samples.tau.max()), cfg)
    orders = np.arange(m_max + 1)
    alpha = -0.5 + 1j * sgrid.nodes
    out = np.zeros((m_max + 1, sgrid.n_kappa), dtype=complex)
    for lo in range(0, len(samples), chunk):
        sl = slice(lo, lo + chunk)
        integral = legendre_integral(orders, alpha, samples.tau[sl], cfg)
        p = _signed_orders(integral, -orders, sgrid.nodes, cfg)  # (M, K, L)
        rot = samples.weights[sl][None, :] * np.exp(-1j * np.multiply.outer(orders, samples.phi[sl]))
        out += np.einsum("mkl,ml->mk", p, rot)
    return out


def kde_spectral(samples: SampleSet, k: RadialKernel, m_max: int = 32,
                 sgrid: SpectralGrid = DEFAULT_SPECTRAL_GRID, rgrid: RadialGrid = DEFAULT_RADIAL_GRID,
                 cfg: QuadratureConfig | None = None, method: str = "auto") -> DiskDensity:
    """Spectral kernel density estimate with data and kernel factors kept apart.

    ``method`` selects how the data coefficients are computed: ``"exact"``
    evaluates the conical functions at every sample, ``"table"`` interpolates
    them (cubic, step 0.005 in tau) from a cached table, ``"auto"`` uses the
    table above ``EXACT_SAMPLE_LIMIT`` samples.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    if method == "auto":
        method = "table" if len(samples) > EXACT_SAMPLE_LIMIT else "exact"
    if method == "exact":
        data = _exact_coefficients(samples, m_max, sgrid, cfg)
    elif method == "table":
        data = _table_coefficients(samples, m_max, sgrid, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    c = kernel_weights(k, 0, sgrid, rgrid, cfg).values
    data.setflags(write=False)
    c.setflags(write=False)
    return DiskDensity(sgrid, rgrid, m_max, k, c, data, 1.0, cfg or DEFAULT_QUADRATURE)


def density_mass(d) -> float:
    """int density sinh(tau) dtau dphi; only the m = 0 part contributes."""
    f = d.zonal_radial() if isinstance(d, DiskDensity) else d
    tau = f.grid.nodes
    return float(2.0 * math.pi * np.sum(f.values * np.sinh(tau) * f.grid.weights))


def density_normalize(d):
    """Rescale a DiskDensity or a radial pdf (RadialFunction) to unit mass."""
    mass = density_mass(d)
    if not mass > 0 or not math.isfinite(mass):
        raise ValueError(f"cannot normalize a density of mass {mass!r}")
    if isinstance(d, DiskDensity):
        return replace(d, scale=d.scale / mass)
    return RadialFunction(d.grid, d.values / mass)
