"""Independent closed-form references used to freeze expected values.

Everything here is derived by hand from the constant-coefficient wave
equation and implemented with plain numpy/scipy only, on purpose sharing no
code with the package's propagation machinery.
"""
import math

import numpy as np
from scipy.optimize import brentq


def free_J(omega, a=1.0):
    """Outgoing-space Wronskian of the zero potential: -2 i w e^{-2 i w a}."""
    return -2j * omega * np.exp(-2j * omega * a)


def barrier_J_gamma(V0, omega, a=1.0):
    """Outgoing-space Wronskian of a square barrier, closed form.

    From f = cos(k xi) - (i w / k) sin(k xi), xi = x + a, matched to the
    right-end outgoing seed: J = -[(k^2 + w^2)/k] sin(2 a k) - 2 i w cos(2 a k).
    """
    k = np.sqrt(complex(omega) ** 2 - V0)
    return -((k * k + omega * omega) / k) * np.sin(2 * a * k) - 2j * omega * np.cos(2 * a * k)


def barrier_J_ttml(V0, omega, a=1.0):
    """Transmission Wronskian of a square barrier: (V0/k) sin(2 a k)."""
    k = np.sqrt(complex(omega) ** 2 - V0)
    return (V0 / k) * np.sin(2 * a * k)


def barrier_even_rate_condition(gamma, V0):
    """Even-sector zero-mode condition: alpha tanh(alpha) = gamma with
    alpha^2 = V0 + gamma^2 (unit half width)."""
    alpha = math.sqrt(V0 + gamma * gamma)
    return alpha * math.tanh(alpha) - gamma


def barrier_zero_mode_rates(V0, gmax=8.0, n=4000):
    """All decay rates gamma of even-sector zero modes, by dense bracketing."""
    gs = np.linspace(1e-6, gmax, n)
    vals = [barrier_even_rate_condition(g, V0) for g in gs]
    roots = []
    for i in range(n - 1):
        if vals[i] * vals[i + 1] < 0:
            roots.append(brentq(barrier_even_rate_condition, gs[i], gs[i + 1],
                                args=(V0,), xtol=1e-15))
    return roots


def barrier_merge_point():
    """Double-root condition forces gamma* = 1; V0* = alpha*^2 - 1 with
    alpha* tanh(alpha*) = 1."""
    alpha = brentq(lambda s: s * math.tanh(s) - 1.0, 1.0, 1.5, xtol=1e-15)
    return alpha * alpha - 1.0, 1.0


def barrier_mode_profile(V0, gamma, x):
    """Even zero-mode wavefunction cosh(alpha x)/cosh(alpha) on [-1, 1],
    normalized to 1 at x = -1."""
    alpha = math.sqrt(V0 + gamma * gamma)
    return np.cosh(alpha * np.asarray(x)) / math.cosh(alpha)
