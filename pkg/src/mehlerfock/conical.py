r"""
Conical (Mehler) functions :math:`P^m_{-1/2+i\kappa}(\cosh\tau)`.

The functions are evaluated from the Laplace-type integral

.. math::
    P^m_\alpha(\cosh\tau) = \frac{\Gamma(\alpha+m+1)}{2\pi\,\Gamma(\alpha+1)}
        \int_0^{2\pi} (\sinh\tau\cos\theta + \cosh\tau)^\alpha e^{im\theta}\,d\theta

with the periodic trapezoid rule. For large :math:`\tau` the integrand is
concentrated in a window of width :math:`e^{-\tau}` around :math:`\theta=\pi`,
so the rule is applied after the change of variables
:math:`\sinh\tau\cos\theta + \cosh\tau = e^{\tau\cos\beta}`, which is a smooth
bijection of the circle. In the new variable the integrand is
:math:`e^{(\alpha+1)\tau\cos\beta}\,W(\beta)\cos(m\theta(\beta))` with an
analytic weight :math:`W`, and the trapezoid rule converges geometrically
once ``n_theta`` exceeds :math:`|\alpha+1|\tau`.

Where the integral is much smaller than its integrand (large :math:`|m|`,
small :math:`\tau`) the same integral is summed from its Laurent series in
:math:`\tanh^2(\tau/2)` instead, which has no cancellation in that regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "DEFAULT_QUADRATURE",
    "gamma_ratio",
    "recommended_n_theta",
    "legendre_integral",
    "legendre_p",
    "conical_p",
    "conical_p_grid",
    "conical_p_orders",
    "addition_series",
]

# quadrature condition number above which the series route is tried
_SERIES_SWITCH = 1e5
_SERIES_MAX_TERMS = 4000
# the series is tried where tanh(tau/2)^2 is below this; it converges slowly beyond
_SERIES_T2_MAX = 0.5
# wider window for severe cancellation, which arises from the t^-m growth at high order
_SERIES_SEVERE = 1e6
_SERIES_T2_WIDE = 0.8
# entries per chunk of the (kappa, tau, beta) integrand array
_CHUNK = 1 << 22


class QuadratureError(ArithmeticError):
    """The theta quadrature did not produce a trustworthy real value."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class QuadratureConfig:
    """Node count of the periodic trapezoid rule and the realness tolerance.

    ``tolerance`` bounds ``|Im P| / max(1, |Re P|)``; larger imaginary parts
    raise :class:`QuadratureError`.
    """

    n_theta: int = 256
    tolerance: float = 1e-8

    def __post_init__(self):
        if int(self.n_theta) != self.n_theta or self.n_theta < 16 or self.n_theta % 2:
            raise ValueError("n_theta must be an even integer >= 16")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def with_n_theta(self, n_theta: int) -> "QuadratureConfig":
        return QuadratureConfig(int(n_theta), self.tolerance)


DEFAULT_QUADRATURE = QuadratureConfig()


def gamma_ratio(m: int, kappa) -> np.ndarray:
    """Gamma(alpha+m+1) / Gamma(alpha+1) for alpha = -1/2 + i kappa.

    Uses the finite product (alpha+1)...(alpha+m) for m >= 0 and the
    reciprocal of alpha(alpha-1)...(alpha+m+1) for m < 0. The result is
    complex; the real conical function comes out of the product with the
    (complex) integral.
    """
    alpha = -0.5 + 1j * np.asarray(kappa, dtype=float)
    out = np.ones_like(alpha)
    if m >= 0:
        for j in range(1, m + 1):
            out = out * (alpha + j)
    else:
        for j in range(m + 1, 1):
            out = out / (alpha + j)
    return out


def recommended_n_theta(kappa_max: float, tau_max: float, floor: int = 256) -> int:
    """Even node count giving a converged rule up to (kappa_max, tau_max)."""
    z = tau_max * math.hypot(0.5, kappa_max)
    n = int(math.ceil(z + 8.0 * z ** (1.0 / 3.0) + 16.0))
    n += n % 2
    return max(floor, n)


@lru_cache(maxsize=32)
def _beta_nodes(n_theta: int):
    half = n_theta // 2
    beta = np.pi * np.arange(half + 1) / half
    w = np.ones(half + 1)
    w[0] = w[-1] = 0.5
    # even integrand: the half-range rule is the full periodic rule
    w /= half
    for arr in (beta, w):
        arr.setflags(write=False)
    return beta, w


def _substitution(tau: np.ndarray, beta: np.ndarray):
    """Weight W(beta) and theta(beta) for each tau > 0, shapes (T, B)."""
    ch2 = np.cos(beta / 2) ** 2
    sh2 = np.sin(beta / 2) ** 2
    tt = tau[:, None]
    y1 = 2.0 * tt * ch2
    y2 = 2.0 * tt * sh2
    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = np.where(y1 > 0, np.expm1(y1) / y1, 1.0)
        h2 = np.where(y2 > 0, -np.expm1(-y2) / y2, 1.0)
        weight = 1.0 / np.sqrt(e1 * h2)
        denom = np.expm1(2.0 * tt)
        cos_half2 = np.expm1(y1) / denom
        sin_half2 = np.exp(y1) * np.expm1(y2) / denom
    theta = 2.0 * np.arctan2(np.sqrt(sin_half2), np.sqrt(cos_half2))
    return weight, theta


def _quadrature(alpha, orders, tau, n_theta):
    """Half-range trapezoid of the substituted integrand.

    Returns ``(integral, condition)`` of shape (M, K, T) where integral is
    (1/2pi) * the theta integral. tau must be strictly positive.
    """
    beta, w = _beta_nodes(n_theta)
    cosb = np.cos(beta)
    K, T, M = alpha.size, tau.size, orders.size
    out = np.empty((M, K, T), dtype=complex)
    cond = np.empty((M, K, T))
    step = max(1, _CHUNK // max(1, K * beta.size))
    for lo in range(0, T, step):
        sl = slice(lo, min(T, lo + step))
        weight, theta = _substitution(tau[sl], beta)
        expo = np.multiply.outer(alpha + 1.0, tau[sl])
        base = np.exp(expo[:, :, None] * cosb) * (weight * w)
        for i, m in enumerate(orders):
            if m == 0:
                f = base
            else:
                f = base * np.cos(m * theta)
            s = np.sum(f, axis=-1)
            out[i, :, sl] = s
            with np.errstate(divide="ignore", invalid="ignore"):
                cond[i, :, sl] = np.sum(np.abs(f), axis=-1) / np.abs(s)
    return out, cond


def _series(alpha, m, tau):
    """Laurent series of the same integral in t = tanh(tau/2), elementwise.

    (1/2pi) int u^alpha e^{im theta} = cosh(tau/2)^(2 alpha) t^|m|
        * sum_k C(alpha, k) C(alpha, k + |m|) t^(2k)
    with generalized binomial coefficients C.
    """
    m = np.abs(m)
    t = np.tanh(tau / 2)
    t2 = t * t
    ck = np.ones_like(alpha)
    ckm = np.ones_like(alpha)
    for j in range(int(m.max(initial=0))):
        active = j < m
        ckm = np.where(active, ckm * (alpha - j) / (j + 1), ckm)
    total = np.zeros_like(alpha)
    absum = np.zeros(alpha.shape)
    done = np.zeros(alpha.shape, dtype=bool)
    # entries still summing; converged ones drop out of the work arrays
    idx = np.arange(alpha.size)
    a, mm, q = alpha.copy(), m.copy(), t2.copy()
    power = np.ones(alpha.shape)
    for k in range(_SERIES_MAX_TERMS):
        term = ck * ckm * power
        total[idx] += term
        absum[idx] += np.abs(term)
        fin = (np.abs(term) <= 1e-18 * np.abs(total[idx])) & (k > 4)
        if fin.any():
            done[idx[fin]] = True
            keep = ~fin
            idx, a, mm, q = idx[keep], a[keep], mm[keep], q[keep]
            ck, ckm, power = ck[keep], ckm[keep], power[keep]
            if idx.size == 0:
                break
        ck = ck * (a - k) / (k + 1)
        ckm = ckm * (a - k - mm) / (k + mm + 1)
        power = power * q
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(done, absum / np.abs(total), np.inf)
    value = np.exp(2.0 * alpha * np.log(np.cosh(tau / 2))) * t**m * total
    return value, cond


def legendre_integral(orders, alpha, tau, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """(1/2pi) * int_0^{2pi} (sinh tau cos theta + cosh tau)^alpha e^{i m theta} dtheta.

    Parameters
    ----------
    orders : sequence of int
        Angular orders m; the integral depends on |m| only.
    alpha : array of complex
        Degrees.
    tau : array of float
        Nonnegative hyperbolic angles.

    Returns
    -------
    ndarray, shape (len(orders), len(alpha), len(tau)), complex
    """
    orders = np.abs(np.atleast_1d(np.asarray(orders, dtype=int)))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise ValueError("tau must be finite and nonnegative")
    # beyond |alpha + 1| tau nodes the rule has not resolved the oscillation
    need = np.multiply.outer(np.abs(alpha + 1.0), tau)
    if np.any(need > cfg.n_theta):
        k, j = np.unravel_index(np.argmax(need > cfg.n_theta), need.shape)
        raise QuadratureError(
            f"n_theta={cfg.n_theta} under-resolves |alpha+1| tau = {need[k, j]:.1f}; "
            f"use n_theta >= {recommended_n_theta(abs(alpha[k].imag), tau[j])}",
            index=(int(k), int(j)),
        )
    out = np.zeros((orders.size, alpha.size, tau.size), dtype=complex)
    out[:, :, tau == 0] = (orders == 0)[:, None, None]
    pos = np.flatnonzero(tau > 0)
    if pos.size == 0:
        return out
    vals, cond = _quadrature(alpha, orders, tau[pos], cfg.n_theta)
    t2 = np.tanh(tau[pos] / 2) ** 2
    bad = ((cond > _SERIES_SWITCH) & (t2 <= _SERIES_T2_MAX)) | ((cond > _SERIES_SEVERE) & (t2 <= _SERIES_T2_WIDE))
    if bad.any():
        mi, ki, ti = np.nonzero(bad)
        sv, sc = _series(alpha[ki], orders[mi], tau[pos][ti])
        better = sc < cond[mi, ki, ti]
        vals[mi[better], ki[better], ti[better]] = sv[better]
    out[:, :, pos] = vals
    return out


def legendre_p(m: int, alpha, tau, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Complex P^m_alpha(cosh tau) for arbitrary complex degree(s) alpha.

    The prefactor uses the Gamma-function product form, so alpha must avoid
    the poles of Gamma(alpha + m + 1) / Gamma(alpha + 1).
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    pref = np.ones_like(alpha)
    if m >= 0:
        for j in range(1, m + 1):
            pref = pref * (alpha + j)
    else:
        for j in range(m + 1, 1):
            pref = pref / (alpha + j)
    return pref[:, None] * legendre_integral([m], alpha, tau, cfg)[0]


def _real_part(values, cfg, m):
    scale = np.maximum(1.0, np.abs(values.real))
    leak = np.abs(values.imag) / scale
    if np.any(leak > cfg.tolerance):
        i, j = np.unravel_index(np.argmax(leak), leak.shape)
        raise QuadratureError(
            f"imaginary residue {leak[i, j]:.3g} exceeds tolerance {cfg.tolerance:g} "
            f"(m={m}, entry {(int(i), int(j))})",
            index=(int(i), int(j)),
        )
    return values.real.copy()


def conical_p_orders(orders, kappa_grid, tau_grid, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """P^m_{-1/2+i kappa}(cosh tau) for several orders sharing one integrand.

    Returns an array of shape (len(orders), len(kappa_grid), len(tau_grid)).
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=int))
    kappa = np.abs(np.atleast_1d(np.asarray(kappa_grid, dtype=float)))
    alpha = -0.5 + 1j * kappa
    integral = legendre_integral(orders, alpha, tau_grid, cfg)
    out = np.empty(integral.shape)
    for i, m in enumerate(orders):
        out[i] = _real_part(gamma_ratio(int(m), kappa)[:, None] * integral[i], cfg, int(m))
    return out


def conical_p_grid(m: int, kappa_grid, tau_grid, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Matrix [i, j] = P^m_{-1/2+i kappa_i}(cosh tau_j)."""
    return conical_p_orders([m], kappa_grid, tau_grid, cfg)[0]


def conical_p(m: int, kappa: float, tau: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Conical function P^m_{-1/2+i kappa}(cosh tau).

    ``kappa`` and ``-kappa`` give the same value; ``tau`` must be >= 0.

    >>> conical_p(0, 1.0, 0.0)
    1.0
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return float(conical_p_grid(m, [kappa], [tau], cfg)[0, 0])


def addition_series(kappa: float, tau_l: float, tau_0: float, theta: float, m_max: int,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Truncated addition series sum_{|m| <= m_max} P^{-m}(cosh tau_l) P^m(cosh tau_0) e^{-i m theta}.

    The full series equals P_alpha(cosh tau_l cosh tau_0 + sinh tau_l sinh tau_0 cos theta).
    Terms m and -m are conjugate, so the sum is real.

    Raises
    ------
    QuadratureError
        If the last included pair of terms exceeds ``cfg.tolerance``.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    orders = np.arange(m_max + 1)
    kappa = abs(float(kappa))
    integ = legendre_integral(orders, [-0.5 + 1j * kappa], [tau_l, tau_0], cfg)[:, 0, :]
    total = 0.0
    last = 0.0
    for m in orders:
        m = int(m)
        p_minus_l = (gamma_ratio(-m, kappa) * integ[m, 0]).real
        p_plus_0 = (gamma_ratio(m, kappa) * integ[m, 1]).real
        prod = p_minus_l * p_plus_0
        term = prod if m == 0 else 2.0 * prod * math.cos(m * theta)
        total += term
        last = abs(term)
    if m_max > 0 and last > cfg.tolerance:
        raise QuadratureError(f"addition series not converged: last term {last:.3g} at m={m_max}")
    return total
