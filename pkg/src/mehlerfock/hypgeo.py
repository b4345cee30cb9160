"""
SU(1,1) acting on the open unit disk by Moebius transforms.

Group elements are stored as the pair (a, b) of the matrix

    [[a,       b      ],
     [conj(b), conj(a)]]      with |a|^2 - |b|^2 = 1.

Disk points are identified with cosets SU(1,1)/K through the origin orbit
z = tanh(tau/2) exp(i phi).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# constructor tolerance on |a|^2 - |b|^2 - 1, relative to |a|^2 + |b|^2
GROUP_TOL = 1e-12
# disk points closer than this to the unit circle are rejected
BOUNDARY_MARGIN = 1e-9
# below this hyperbolic angle the last Cartan angle is undefined and set to 0
TAU_EPS = 1e-14


def _reduce_angle(x: float) -> float:
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod can return TWO_PI - tiny, which rounds back to TWO_PI after the add
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class MoebiusElement:
    """An element of SU(1,1), i.e. an orientation preserving disk isometry."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        aa, bb = abs(a) ** 2, abs(b) ** 2
        if abs(aa - bb - 1.0) > GROUP_TOL * max(1.0, aa + bb):
            raise ValueError(f"|a|^2 - |b|^2 = {aa - bb!r}, expected 1")

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(1.0, 0.0)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.a.conjugate()]])

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.a.conjugate(), -self.b)

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return compose(self, other)

    def __call__(self, z):
        return moebius_apply(self, z)


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not abs(z) < 1.0 - BOUNDARY_MARGIN:
            raise ValueError(f"|z| = {abs(z)!r} is not inside the open unit disk")
        object.__setattr__(self, "z", z)

    def __complex__(self) -> complex:
        return self.z


@dataclass(frozen=True)
class CartanAngles:
    """Cartan coordinates (phi, tau, psi) of g = k(phi) a(tau) k(psi)."""

    phi: float
    tau: float
    psi: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "phi", _reduce_angle(float(self.phi)))
        object.__setattr__(self, "psi", _reduce_angle(float(self.psi)))
        object.__setattr__(self, "tau", float(self.tau))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.phi, self.tau, self.psi


def _as_points(z):
    """Return (complex value(s), wrap) after checking the points lie in the disk."""
    if isinstance(z, DiskPoint):
        return z.z, DiskPoint
    arr = np.asarray(z, dtype=complex)
    if np.any(~(np.abs(arr) < 1.0 - BOUNDARY_MARGIN)):
        raise ValueError("points must lie inside the open unit disk")
    if arr.ndim == 0:
        return complex(arr), None
    return arr, None


def moebius_apply(M: MoebiusElement, z):
    """Apply ``M`` to disk point(s) ``z``: (a z + b) / (conj(b) z + conj(a)).

    Accepts a ``DiskPoint`` (returns a ``DiskPoint``), a complex scalar or an
    array of complex values.
    """
    w, wrap = _as_points(z)
    out = (M.a * w + M.b) / (M.b.conjugate() * w + M.a.conjugate())
    if wrap is DiskPoint:
        return DiskPoint(out)
    return out


def compose(M1: MoebiusElement, M2: MoebiusElement) -> MoebiusElement:
    """Matrix product M1 M2; acts as ``M1(M2(z))``."""
    a = M1.a * M2.a + M1.b * M2.b.conjugate()
    b = M1.a * M2.b + M1.b * M2.a.conjugate()
    return MoebiusElement(a, b)


def cartan_compose(phi: float, tau: float, psi: float) -> MoebiusElement:
    """Group element with Cartan coordinates (phi, tau, psi)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    a = math.cosh(tau / 2) * cmath.exp(0.5j * (phi + psi))
    b = math.sinh(tau / 2) * cmath.exp(0.5j * (phi - psi))
    return MoebiusElement(a, b)


def cartan_decompose(M: MoebiusElement) -> CartanAngles:
    """Cartan coordinates of ``M`` with angles reduced to [0, 2 pi).

    ``M`` and ``-M`` give the same reduced angles. For tau below 1e-14 the
    element is a pure rotation and psi is set to 0.
    """
    # asinh|b| keeps full relative precision for small tau
    tau = 2.0 * math.asinh(abs(M.b))
    s = cmath.phase(M.a)
    if tau < TAU_EPS:
        return CartanAngles(2.0 * s, 0.0, 0.0)
    d = cmath.phase(M.b)
    return CartanAngles(s + d, tau, s - d)


def disk_from_coset(phi: float, tau: float) -> DiskPoint:
    """Image of the origin under g(phi, tau, .): tanh(tau/2) exp(i phi)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return DiskPoint(math.tanh(tau / 2) * cmath.exp(1j * phi))


def coset_from_disk(z) -> tuple[float, float]:
    """Return (phi, tau) with z = tanh(tau/2) exp(i phi); phi = 0 at the origin."""
    w = complex(z) if isinstance(z, DiskPoint) else complex(DiskPoint(z))
    r = abs(w)
    if r == 0.0:
        return 0.0, 0.0
    return _reduce_angle(cmath.phase(w)), 2.0 * math.atanh(r)


def hyperbolic_distance(w, z):
    """Invariant distance 2 artanh |(z - w) / (1 - conj(z) w)|; broadcasts over arrays."""
    w, _ = _as_points(w)
    z, _ = _as_points(z)
    q = np.abs((z - w) / (1.0 - np.conj(z) * w))
    d = 2.0 * np.arctanh(q)
    return float(d) if np.ndim(d) == 0 else d


def relative_cosh(tau_l, phi_l, tau_0, phi_0):
    """cosh of the distance between the coset points (phi_l, tau_l) and (phi_0, tau_0).

    cosh tau_l cosh tau_0 - sinh tau_l sinh tau_0 cos(phi_l - phi_0), the
    hyperbolic law of cosines. Broadcasts over numpy arrays.
    """
    tau_l = np.asarray(tau_l, dtype=float)
    tau_0 = np.asarray(tau_0, dtype=float)
    if np.any(tau_l < 0) or np.any(tau_0 < 0):
        raise ValueError("tau must be nonnegative")
    # cosh(tl - t0) + sinh tl sinh t0 (1 - cos dphi) avoids cancellation near 1
    dphi = np.asarray(phi_l, dtype=float) - np.asarray(phi_0, dtype=float)
    val = np.cosh(tau_l - tau_0) + 2.0 * np.sinh(tau_l) * np.sinh(tau_0) * np.sin(dphi / 2) ** 2
    return float(val) if np.ndim(val) == 0 else val


def random_element(rng: np.random.Generator, tau_max: float = 3.0) -> MoebiusElement:
    """Random group element with Cartan angles uniform and tau uniform in [0, tau_max]."""
    phi, psi = rng.uniform(0.0, TWO_PI, size=2)
    return cartan_compose(phi, rng.uniform(0.0, tau_max), psi)
