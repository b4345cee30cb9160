"""Shared fixtures and independent oracles.

Oracles never call into the package's conical machinery: conical functions
come from mpmath's hypergeometric Legendre implementation and integrals from
adaptive quadrature.
"""

import math

import mpmath as mp
import numpy as np
import pytest


def mp_conical(m, kappa, tau, dps=30):
    """P^m_{-1/2+i kappa}(cosh tau) from mpmath (type 3 branch, real for x > 1)."""
    with mp.workdps(dps):
        val = mp.legenp(mp.mpf(-0.5) + 1j * mp.mpf(kappa), m, mp.cosh(mp.mpf(tau)), type=3)
        return float(mp.re(val))


def mp_kernel_transform(s, kappa, m=0, dps=20):
    """int_0^40 (cosh t)^(-s) P^m(cosh t) sinh t dt by mpmath adaptive quadrature."""
    with mp.workdps(dps):
        def f(t):
            # mpmath's order-m branch overflows as x -> 1, where the integrand vanishes for m != 0
            if m != 0 and t < mp.mpf("1e-6"):
                return mp.mpf(0)
            return mp.cosh(t) ** (-s) * mp.re(mp.legenp(-0.5 + 1j * kappa, m, mp.cosh(t), type=3)) * mp.sinh(t)

        return float(mp.quad(f, [0, 1, 3, 8, 20, 40]))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def kernel4():
    from mehlerfock.density import RadialKernel

    return RadialKernel(4.0)


def polar_query_grid(tau_max=3.0, n=32):
    tau = np.linspace(0.0, tau_max, n)
    phi = 2 * math.pi * np.arange(n) / n
    z = np.tanh(tau / 2)[None, :] * np.exp(1j * phi[:, None])
    return tau, phi, z
