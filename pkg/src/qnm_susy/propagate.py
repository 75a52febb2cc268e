"""One-sided solutions of the frequency-domain wave equation.

Solutions are seeded at one support edge with a unit value and a slope fixing
the wave character there (outgoing or incoming), then integrated across the
interval.  First and second frequency derivatives are integrated alongside
through the variational systems, so Wronskian derivatives never rely on
finite differences in omega.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import PropagationError, QnmSusyError
from .potential import DEFAULT_GRID_POINTS, PotentialSpec


class BoundaryKind(enum.Enum):
    """Seed conventions at the support edges.

    The outgoing kinds impose phi'/phi = +i omega at x = +a or -i omega at
    x = -a; incoming kinds are their omega -> -omega images.
    """

    OUTGOING_LEFT = "outgoing_left"    # phi(-a) = 1, phi'(-a) = -i omega
    OUTGOING_RIGHT = "outgoing_right"  # phi(+a) = 1, phi'(+a) = +i omega
    INCOMING_LEFT = "incoming_left"    # phi(-a) = 1, phi'(-a) = +i omega
    INCOMING_RIGHT = "incoming_right"  # phi(+a) = 1, phi'(+a) = -i omega

    @property
    def seeded_left(self) -> bool:
        return self in (BoundaryKind.OUTGOING_LEFT, BoundaryKind.INCOMING_LEFT)

    @property
    def slope_sign(self) -> int:
        """Sign s in the seed slope phi' = s * i * omega."""
        if self in (BoundaryKind.OUTGOING_LEFT, BoundaryKind.INCOMING_RIGHT):
            return -1
        return +1


def seed_vector(omega: complex, kind: BoundaryKind) -> np.ndarray:
    """Initial 6-vector (phi, phi', d_w phi, d_w phi', d2_w phi, d2_w phi')."""
    s = kind.slope_sign
    y0 = np.zeros(6, dtype=np.complex128)
    y0[0] = 1.0
    y0[1] = s * 1j * omega
    y0[3] = s * 1j
    return y0


@dataclass(frozen=True)
class WaveSolution:
    """A one-sided solution sampled on a grid spanning [-a, a]."""

    omega: complex
    kind: BoundaryKind
    grid: np.ndarray
    phi: np.ndarray
    dphi_dx: np.ndarray
    dphi_domega: np.ndarray
    ddphi_domega_dx: np.ndarray
    d2phi_domega2: np.ndarray
    d2dphi_domega2_dx: np.ndarray

    @property
    def half_width(self) -> float:
        return float(self.grid[-1])

    def value_at_index(self, i: int):
        return self.phi[i], self.dphi_dx[i]

    def state_at(self, x: float) -> np.ndarray:
        """6-vector at a grid node (x must coincide with one)."""
        i = int(np.argmin(np.abs(self.grid - x)))
        if abs(self.grid[i] - x) > 1e-9 * (1.0 + abs(x)):
            raise QnmSusyError(f"x={x} is not a grid node")
        return np.array([self.phi[i], self.dphi_dx[i], self.dphi_domega[i],
                         self.ddphi_domega_dx[i], self.d2phi_domega2[i],
                         self.d2dphi_domega2_dx[i]])


def _resolve_grid(V: PotentialSpec, grid) -> np.ndarray:
    if grid is None:
        return V.standard_grid(DEFAULT_GRID_POINTS)
    if isinstance(grid, (int, np.integer)):
        return V.standard_grid(int(grid))
    g = np.asarray(grid, dtype=float)
    a = V.half_width
    if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
        raise QnmSusyError("grid must be strictly increasing")
    if abs(g[0] + a) > 1e-12 * (1 + a) or abs(g[-1] - a) > 1e-12 * (1 + a):
        raise QnmSusyError("grid must span [-a, a]")
    return g


def _piecewise_states(V: PotentialSpec, omega: complex, kind: BoundaryKind,
                      grid: np.ndarray) -> np.ndarray:
    """States at all grid nodes via exact constant-cell propagators."""
    a = V.half_width
    edges = np.asarray(V.edges)
    inner = edges[1:-1]
    path = np.union1d(grid, inner[(inner > grid[0]) & (inner < grid[-1])])
    # walk order: from the seeded end
    if not kind.seeded_left:
        path = path[::-1]
    # cell potential: evaluate at segment midpoints of the path
    mids = 0.5 * (path[:-1] + path[1:])
    vcell = V.evaluate(mids)
    # map path nodes to output rows (grid order is ascending)
    emit = np.full(len(path), -1, dtype=np.int64)
    gi = np.searchsorted(grid, path)
    gi = np.clip(gi, 0, len(grid) - 1)
    on_grid = np.abs(grid[gi] - path) <= 1e-12 * (1.0 + np.abs(path))
    emit[on_grid] = gi[on_grid]
    out = np.empty((len(grid), 6), dtype=np.complex128)
    status = _kernels.pw_sweep(path, np.asarray(vcell, dtype=float), emit,
                               complex(omega), seed_vector(omega, kind), out)
    if status >= 0:
        raise PropagationError(
            f"non-finite state during propagation at omega={omega}",
            last_good_x=float(path[status]))
    return out


def _sampled_states(V: PotentialSpec, omega: complex, kind: BoundaryKind,
                    grid: np.ndarray) -> np.ndarray:
    """States at all grid nodes via fixed-step RK4 on the stored grid."""
    if len(grid) != len(V.sample_x) or not np.allclose(grid, V.sample_x, atol=1e-12):
        # integrate on the requested uniform grid; potential still comes from
        # the stored linear interpolant
        x = grid
    else:
        x = V.sample_x
    h = x[1] - x[0]
    if np.max(np.abs(np.diff(x) - h)) > 1e-9 * abs(h):
        raise QnmSusyError("sampled-potential integration requires a uniform grid")
    vnode = V.evaluate(x)
    vmid = V.evaluate(0.5 * (x[:-1] + x[1:]))
    if kind.seeded_left:
        vn, vm, step = vnode, vmid, h
    else:
        vn, vm, step = vnode[::-1].copy(), vmid[::-1].copy(), -h
    out = np.empty((len(x), 6), dtype=np.complex128)
    status = _kernels.rk4_sweep(vn, vm, float(step), complex(omega),
                                seed_vector(omega, kind), out)
    if status >= 0:
        xs = x if kind.seeded_left else x[::-1]
        raise PropagationError(
            f"non-finite state during propagation at omega={omega}",
            last_good_x=float(xs[status]))
    if not kind.seeded_left:
        out = out[::-1].copy()
    return out


def solve(V: PotentialSpec, omega: complex, kind: BoundaryKind,
          grid: Union[None, int, np.ndarray] = None) -> WaveSolution:
    """Integrate from the seeded end across [-a, a].

    ``grid`` may be None (standard grid), a node count, or an explicit array
    of ascending abscissae spanning the support.
    """
    g = _resolve_grid(V, grid)
    if V.is_piecewise:
        states = _piecewise_states(V, omega, kind, g)
    else:
        states = _sampled_states(V, omega, kind, g)
    return WaveSolution(omega=complex(omega), kind=kind, grid=g,
                        phi=states[:, 0], dphi_dx=states[:, 1],
                        dphi_domega=states[:, 2], ddphi_domega_dx=states[:, 3],
                        d2phi_domega2=states[:, 4], d2dphi_domega2_dx=states[:, 5])


def state_at(V: PotentialSpec, omega: complex, kind: BoundaryKind,
             x_target: float) -> np.ndarray:
    """6-vector at one abscissa, without storing a full grid solution.

    For piecewise potentials this touches only segment boundaries; for
    sampled potentials it sweeps the stored grid up to the nearest node.
    """
    a = V.half_width
    if V.is_piecewise:
        x0 = -a if kind.seeded_left else a
        lo, hi = (x0, x_target) if x0 < x_target else (x_target, x0)
        edges = np.asarray(V.edges)
        inner = edges[(edges > lo + 1e-15) & (edges < hi - 1e-15)]
        path = np.concatenate([[x0], inner if kind.seeded_left else inner[::-1], [x_target]])
        if abs(x_target - x0) < 1e-15:
            path = np.array([x0])
            return seed_vector(omega, kind)
        mids = 0.5 * (path[:-1] + path[1:])
        vcell = V.evaluate(mids)
        emit = np.full(len(path), -1, dtype=np.int64)
        emit[-1] = 0
        out = np.empty((1, 6), dtype=np.complex128)
        status = _kernels.pw_sweep(path, np.asarray(vcell, dtype=float), emit,
                                   complex(omega), seed_vector(omega, kind), out)
        if status >= 0:
            raise PropagationError(
                f"non-finite state during propagation at omega={omega}",
                last_good_x=float(path[status]))
        return out[0]
    x = V.sample_x
    i = int(np.argmin(np.abs(x - x_target)))
    if abs(x[i] - x_target) > 1e-9 * (1 + abs(x_target)):
        raise QnmSusyError("matching abscissa must be a sample node")
    h = x[1] - x[0]
    vnode = V.sample_v
    vmid = 0.5 * (vnode[:-1] + vnode[1:])
    if kind.seeded_left:
        vn = vnode[: i + 1]
        vm = vmid[:i]
        step = h
    else:
        vn = vnode[i:][::-1].copy()
        vm = vmid[i:][::-1].copy()
        step = -h
    out = np.empty((len(vn), 6), dtype=np.complex128)
    status = _kernels.rk4_sweep(np.asarray(vn, dtype=float), np.asarray(vm, dtype=float),
                                float(step), complex(omega), seed_vector(omega, kind), out)
    if status >= 0:
        raise PropagationError(
            f"non-finite state during propagation at omega={omega}",
            last_good_x=float(x[i]))
    return out[-1]


def segment_step(V0: float, omega: complex, dx: float) -> np.ndarray:
    """Exact 2x2 propagator of a constant-V cell: (phi, phi') -> (phi, phi').

    M = [[cos(k dx), sin(k dx)/k], [-k sin(k dx), cos(k dx)]] with
    k = sqrt(omega^2 - V0); the k -> 0 limit is handled by series.  Both
    entries are even in k, so the branch of the square root is immaterial.
    Written out directly (independently of the sweep kernels) so composed
    steps can serve as a cross-check of ``solve``.
    """
    if dx <= 0:
        raise QnmSusyError("dx must be positive")
    z2 = dx * dx * (complex(omega) ** 2 - V0)  # (k dx)^2
    if abs(z2) < 1e-6:
        # cos and sinc by series; enough terms for full precision here
        c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0 - z2 ** 3 / 720.0
        s = 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 ** 3 / 5040.0
    else:
        z = np.sqrt(z2)
        c = np.cos(z)
        s = np.sin(z) / z
    return np.array([[c, dx * s], [-(z2 / dx) * s, c]], dtype=np.complex128)


def solution_reality_check(sol: WaveSolution) -> float:
    """Max |Im phi| over the grid; valid only for purely imaginary omega."""
    if abs(sol.omega.real) > 1e-12 * (1.0 + abs(sol.omega)):
        raise QnmSusyError("reality check requires Re omega = 0")
    return float(np.max(np.abs(sol.phi.imag)))
