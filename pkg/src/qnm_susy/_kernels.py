"""Inner propagation kernels.

Both engines integrate the frequency-domain wave equation

    phi'' = (V(x) - omega^2) phi

together with its first and second frequency-variation systems, carrying the
complex 6-vector

    y = (phi, phi', d_w phi, d_w phi', d2_w phi, d2_w phi')

where ' is d/dx and d_w is d/d omega.  The piecewise engine uses the exact
propagator of a constant-coefficient cell (trigonometric in the local wave
number), so it is accurate to rounding for any cell width; the sampled engine
is a fixed-step classical RK4 sweep over the stored grid of a linearly
interpolated potential.

numba JIT-compiles the kernels when available; the plain-Python definitions
are the (slow but exact) fallback.
"""
import cmath

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


_SERIES_CUT = 2.0
_OVERFLOW_LIMIT = 1e280


@njit(cache=True)
def trig_pair(w):
    """cos(sqrt w), sin(sqrt w)/sqrt w and their first two w-derivatives.

    All six functions are entire in w; a power series is used near w = 0
    where the closed forms lose digits to cancellation.
    """
    if abs(w) < _SERIES_CUT:
        A = 1.0 + 0j
        B = 1.0 + 0j
        A1 = 0j
        B1 = 0j
        A2 = 0j
        B2 = 0j
        wn = 1.0 + 0j
        sign = 1.0
        f2n = 1.0  # (2n)!
        for n in range(1, 20):
            wn *= w
            sign = -sign
            f2n *= (2 * n - 1) * (2 * n)
            f2n1 = f2n * (2 * n + 1)
            cA = sign / f2n
            cB = sign / f2n1
            A += cA * wn
            B += cB * wn
            A1 += cA * n * wn / w
            B1 += cB * n * wn / w
            if n >= 2:
                A2 += cA * n * (n - 1) * wn / (w * w)
                B2 += cB * n * (n - 1) * wn / (w * w)
        return A, B, A1, B1, A2, B2
    z = cmath.sqrt(w)
    A = cmath.cos(z)
    B = cmath.sin(z) / z
    A1 = -B / 2.0
    B1 = (A - B) / (2.0 * w)
    A2 = -B1 / 2.0
    B2 = ((A1 - B1) * w - (A - B)) / (2.0 * w * w)
    return A, B, A1, B1, A2, B2


@njit(cache=True)
def cell_step(y, v0, dx, omega):
    """Propagate the 6-vector across one constant-V cell of signed width dx."""
    w = dx * dx * (omega * omega - v0)
    A, B, A1, B1, A2, B2 = trig_pair(w)
    m00 = A
    m01 = dx * B
    m10 = -(w / dx) * B
    m11 = A
    n00 = A1
    n01 = dx * B1
    n10 = -(B + w * B1) / dx
    n11 = A1
    p00 = A2
    p01 = dx * B2
    p10 = -(2.0 * B1 + w * B2) / dx
    p11 = A2
    c1 = 2.0 * omega * dx * dx          # dw/domega
    c2 = 2.0 * dx * dx                  # d2w/domega2
    p, dp, u, du, q, dq = y[0], y[1], y[2], y[3], y[4], y[5]
    out = np.empty(6, dtype=np.complex128)
    out[0] = m00 * p + m01 * dp
    out[1] = m10 * p + m11 * dp
    out[2] = m00 * u + m01 * du + c1 * (n00 * p + n01 * dp)
    out[3] = m10 * u + m11 * du + c1 * (n10 * p + n11 * dp)
    out[4] = (m00 * q + m01 * dq + 2.0 * c1 * (n00 * u + n01 * du)
              + c2 * (n00 * p + n01 * dp) + c1 * c1 * (p00 * p + p01 * dp))
    out[5] = (m10 * q + m11 * dq + 2.0 * c1 * (n10 * u + n11 * du)
              + c2 * (n10 * p + n11 * dp) + c1 * c1 * (p10 * p + p11 * dp))
    return out


@njit(cache=True)
def pw_sweep(xs, vcell, emit, omega, y0, out):
    """Walk a piecewise-constant path, emitting the state at flagged nodes.

    xs       path abscissae in walk order (monotone either way), len m+1
    vcell    potential value on each path segment, len m
    emit     output row per path node, or -1 to skip
    out      preallocated (n_emit, 6) complex array

    Returns -1 on success, else the index of the last finite path node.
    """
    y = y0.copy()
    if emit[0] >= 0:
        for c in range(6):
            out[emit[0], c] = y[c]
    m = len(vcell)
    for i in range(m):
        dx = xs[i + 1] - xs[i]
        y = cell_step(y, vcell[i], dx, omega)
        mag = abs(y[0].real) + abs(y[0].imag) + abs(y[1].real) + abs(y[1].imag)
        if not np.isfinite(mag) or mag > _OVERFLOW_LIMIT:
            return i
        if emit[i + 1] >= 0:
            for c in range(6):
                out[emit[i + 1], c] = y[c]
    return -1


@njit(cache=True)
def _rhs(y, v, omega, out):
    f = v - omega * omega
    out[0] = y[1]
    out[1] = f * y[0]
    out[2] = y[3]
    out[3] = f * y[2] - 2.0 * omega * y[0]
    out[4] = y[5]
    out[5] = f * y[4] - 4.0 * omega * y[2] - 2.0 * y[0]


@njit(cache=True)
def rk4_sweep(vnode, vmid, h, omega, y0, out):
    """Fixed-step RK4 over the stored grid of a sampled potential.

    vnode   potential at the walk nodes, len n (in walk order)
    vmid    potential at midpoints between walk nodes, len n-1
    h       signed step (x_{i+1} - x_i in walk order)
    out     preallocated (n, 6) complex array; row 0 gets the seed

    Returns -1 on success, else the index of the last finite node.
    """
    n = len(vnode)
    y = y0.copy()
    for c in range(6):
        out[0, c] = y[c]
    k1 = np.empty(6, dtype=np.complex128)
    k2 = np.empty(6, dtype=np.complex128)
    k3 = np.empty(6, dtype=np.complex128)
    k4 = np.empty(6, dtype=np.complex128)
    yt = np.empty(6, dtype=np.complex128)
    for i in range(n - 1):
        va = vnode[i]
        vm = vmid[i]
        vb = vnode[i + 1]
        _rhs(y, va, omega, k1)
        for c in range(6):
            yt[c] = y[c] + 0.5 * h * k1[c]
        _rhs(yt, vm, omega, k2)
        for c in range(6):
            yt[c] = y[c] + 0.5 * h * k2[c]
        _rhs(yt, vm, omega, k3)
        for c in range(6):
            yt[c] = y[c] + h * k3[c]
        _rhs(yt, vb, omega, k4)
        for c in range(6):
            y[c] = y[c] + (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
        mag = abs(y[0].real) + abs(y[0].imag) + abs(y[1].real) + abs(y[1].imag)
        if not np.isfinite(mag) or mag > _OVERFLOW_LIMIT:
            return i
        for c in range(6):
            out[i + 1, c] = y[c]
    return -1
