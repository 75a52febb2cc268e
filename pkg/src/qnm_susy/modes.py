"""Mode-level algebra: generalized norms, the bilinear pairing, expansions.

Outgoing eigenfunctions are not square integrable, so the usual inner
product is replaced by a symmetric bilinear map with surface terms at the
support edges.  Everything here is phrased in terms of grid samples of the
mode and (for two-component states) its time derivative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import JordanBlockError, QnmSusyError
from .potential import PotentialSpec
from .propagate import BoundaryKind, WaveSolution, solve
from .spectrum import TOL_AXIS, Classification, classify

_DEADBAND = 1e-9


@dataclass(frozen=True)
class ModeFunction:
    """An eigenfunction sampled on a grid over [-a, a]."""

    omega: complex
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    classification: Optional[Classification] = None
    norm: Optional[complex] = None

    @property
    def half_width(self) -> float:
        return float(self.grid[-1])

    def left_value(self) -> complex:
        return complex(self.phi[0])

    def right_value(self) -> complex:
        return complex(self.phi[-1])

    def scaled(self, c: complex) -> "ModeFunction":
        return replace(self, phi=self.phi * c, dphi=self.dphi * c,
                       norm=None if self.norm is None else self.norm * c * c)


@dataclass(frozen=True)
class TwoComponentState:
    """A state (psi, d_t psi) sampled on a grid over [-a, a]."""

    grid: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    dpsi1: Optional[np.ndarray] = None  # spatial derivative, when known
    dpsi2: Optional[np.ndarray] = None

    def dpsi1_edges(self):
        """d_x psi1 at the two support edges (stored or one-sided FD)."""
        if self.dpsi1 is not None:
            return complex(self.dpsi1[0]), complex(self.dpsi1[-1])
        g, y = self.grid, self.psi1
        hl = g[1] - g[0]
        hr = g[-1] - g[-2]
        dl = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * hl)
        dr = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * hr)
        return complex(dl), complex(dr)

    def gamma_membership_residual(self) -> float:
        """Max violation of the outgoing-space conditions psi2 = -+ d_x psi1."""
        dl, dr = self.dpsi1_edges()
        scale = max(np.max(np.abs(self.psi2)), np.max(np.abs(self.psi1)), 1e-300)
        return float(max(abs(self.psi2[0] - dl), abs(self.psi2[-1] + dr)) / scale)


def mode_from_solution(sol: WaveSolution, classification=None,
                       tol_axis: float = TOL_AXIS) -> ModeFunction:
    if classification is None:
        try:
            classification = classify(sol.omega, tol_axis)
        except QnmSusyError:
            classification = None
    return ModeFunction(omega=sol.omega, grid=sol.grid, phi=sol.phi.copy(),
                        dphi=sol.dphi_dx.copy(), classification=classification)


def eigenmode(V: PotentialSpec, omega: complex, grid=None,
              kind: BoundaryKind = BoundaryKind.OUTGOING_LEFT,
              classification=None) -> ModeFunction:
    """The one-sided solution at an eigenfrequency, as a mode function."""
    return mode_from_solution(solve(V, omega, kind, grid), classification)


def two_component(m: ModeFunction) -> TwoComponentState:
    """Eigenstate vector (phi, -i omega phi)."""
    return TwoComponentState(grid=m.grid, psi1=m.phi, psi2=-1j * m.omega * m.phi,
                             dpsi1=m.dphi, dpsi2=-1j * m.omega * m.dphi)


def _tail_grid(x0: float, x1: float, h: float) -> np.ndarray:
    n = max(8, int(math.ceil(abs(x1 - x0) / h)))
    if n % 2:
        n += 1
    return np.linspace(x0, x1, n + 1)


def qnm_norm(m: ModeFunction, V: PotentialSpec,
             b_minus: float = None, b_plus: float = None) -> complex:
    """Generalized norm 2 w int phi^2 dx + i [phi(b-)^2 + phi(b+)^2].

    The evaluation interval may be widened beyond the support; outside
    [-a, a] the mode continues as the exact outgoing exponential matched at
    the edges, and the tail integrals are done by quadrature so that the
    shift invariance of the norm is a genuine numerical check.  Infinite
    b's are allowed for bound states, where the surface terms vanish.
    """
    a = m.half_width
    w = m.omega
    b_minus = -a if b_minus is None else float(b_minus)
    b_plus = a if b_plus is None else float(b_plus)
    if b_minus > -a or b_plus < a:
        raise QnmSusyError("evaluation boundaries must lie outside the support")
    val = 2.0 * w * simpson(m.phi * m.phi, x=m.grid)
    h = float(m.grid[1] - m.grid[0])
    # right side
    if math.isinf(b_plus):
        if w.imag <= 0:
            raise QnmSusyError("infinite boundary requires a bound state (Im w > 0)")
        # analytic tail integral plus a vanishing surface term
        val += 1j * m.right_value() ** 2
    elif b_plus == a:
        val += 1j * m.right_value() ** 2
    else:
        xg = _tail_grid(a, b_plus, h)
        tail = m.right_value() * np.exp(1j * w * (xg - a))
        val += 2.0 * w * simpson(tail * tail, x=xg) + 1j * tail[-1] ** 2
    # left side
    if math.isinf(b_minus):
        if w.imag <= 0:
            raise QnmSusyError("infinite boundary requires a bound state (Im w > 0)")
        val += 1j * m.left_value() ** 2
    elif b_minus == -a:
        val += 1j * m.left_value() ** 2
    else:
        xg = _tail_grid(b_minus, -a, h)
        tail = m.left_value() * np.exp(-1j * w * (xg + a))
        val += 2.0 * w * simpson(tail * tail, x=xg) + 1j * tail[0] ** 2
    return complex(val)


def bilinear_map(psi: TwoComponentState, phi: TwoComponentState) -> complex:
    """Symmetric pairing i { int (psi1 phi2 + psi2 phi1) + surface terms }."""
    if len(psi.grid) != len(phi.grid) or not np.allclose(psi.grid, phi.grid):
        raise QnmSusyError("states live on different grids")
    integ = simpson(psi.psi1 * phi.psi2 + psi.psi2 * phi.psi1, x=psi.grid)
    surf = psi.psi1[0] * phi.psi1[0] + psi.psi1[-1] * phi.psi1[-1]
    return complex(1j * (integ + surf))


def mode_pairing(m1: ModeFunction, m2: ModeFunction) -> complex:
    """Bilinear pairing of two eigenstates; equals the norm when m1 is m2."""
    return bilinear_map(two_component(m1), two_component(m2))


def normalize(m: ModeFunction, V: PotentialSpec) -> ModeFunction:
    """Scale so the self-pairing is 2 omega, with phi(-a) real positive
    whenever the required factor is real."""
    n0 = qnm_norm(m, V)
    if abs(n0) == 0.0:
        raise JordanBlockError("zero-norm mode cannot be normalized")
    scale2 = 2.0 * m.omega / n0
    c = np.sqrt(scale2 + 0j)
    ref = c * m.left_value()
    if ref.real < 0 or (ref.real == 0 and ref.imag < 0):
        c = -c
    out = m.scaled(c)
    return replace(out, norm=2.0 * m.omega)


def hamiltonian_action(state: TwoComponentState, V: PotentialSpec) -> TwoComponentState:
    """First-order evolution operator i (psi2, (d_x^2 - V) psi1).

    The second spatial derivative uses interior central differences with
    second-order one-sided stencils at the edges; intended for symmetry and
    residual checks, not for propagation.
    """
    g = state.grid
    y = state.psi1
    h = g[1] - g[0]
    if np.max(np.abs(np.diff(g) - h)) > 1e-9 * h:
        raise QnmSusyError("hamiltonian_action requires a uniform grid")
    d2 = np.empty_like(y)
    d2[1:-1] = (y[:-2] - 2.0 * y[1:-1] + y[2:]) / (h * h)
    d2[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h * h)
    d2[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / (h * h)
    v = V.evaluate(g)
    return TwoComponentState(grid=g, psi1=1j * state.psi2, psi2=1j * (d2 - v * y))


def expansion_coeffs(state: TwoComponentState, modes: Sequence[ModeFunction],
                     V: PotentialSpec) -> np.ndarray:
    """Expansion coefficients a_j = (phi_j, psi) / (phi_j, phi_j)."""
    out = np.empty(len(modes), dtype=complex)
    for j, m in enumerate(modes):
        nj = m.norm if m.norm is not None else qnm_norm(m, V)
        scale = 2.0 * abs(m.omega) * float(simpson(np.abs(m.phi) ** 2, x=m.grid))
        if abs(nj) <= 1e-10 * max(scale, 1e-300):
            raise JordanBlockError(
                f"mode at omega={m.omega} has vanishing norm; "
                "expand with the Jordan-block basis instead")
        out[j] = bilinear_map(two_component(m), state) / nj
    return out


def reconstruct(modes: Sequence[ModeFunction], coeffs: Sequence[complex]) -> np.ndarray:
    """Partial sum of the first component of the eigenmode expansion."""
    total = np.zeros_like(modes[0].phi)
    for m, c in zip(modes, coeffs):
        total = total + c * m.phi
    return total


def first_order_shift(m: ModeFunction, V: PotentialSpec, dV: PotentialSpec) -> complex:
    """Predicted change of omega^2 under V -> V + dV."""
    nj = qnm_norm(m, V)
    scale = 2.0 * abs(m.omega) * float(simpson(np.abs(m.phi) ** 2, x=m.grid))
    if abs(nj) <= 1e-10 * max(scale, 1e-300):
        raise JordanBlockError("zero-norm mode: perturbation theory degenerates")
    num = simpson(m.phi * m.phi * dV.evaluate(m.grid), x=m.grid)
    return complex(num / nj)


def sign_changes(values: np.ndarray, deadband: float) -> int:
    """Strict sign changes of a real sequence, ignoring a dead band."""
    live = values[np.abs(values) > deadband]
    if len(live) < 2:
        return 0
    s = np.sign(live)
    return int(np.sum(s[:-1] * s[1:] < 0))


class NodeCount(NamedTuple):
    nodes: int
    antinodes: int
    boundary_node: bool


def _phase_fixed(m: ModeFunction):
    ref = m.left_value()
    if abs(ref) == 0.0:
        return m.phi, m.dphi, True
    rot = np.exp(-1j * np.angle(ref))
    return m.phi * rot, m.dphi * rot, False


def count_nodes_antinodes(m: ModeFunction, deadband: float = _DEADBAND) -> NodeCount:
    """Interior sign changes of phi (nodes) and phi' (antinodes).

    Purely imaginary-frequency modes are rotated to a real gauge first.
    For complex-frequency modes the count is taken per real component and
    the smaller count reported; see also ``joint_zero_crossings`` for the
    coincident-zero notion, which is the one constrained by flux arguments.
    """
    phi, dphi, boundary = _phase_fixed(m)
    band_phi = deadband * float(np.max(np.abs(phi)))
    band_dphi = deadband * float(np.max(np.abs(dphi)))
    interior = slice(1, -1)
    if float(np.max(np.abs(phi.imag))) <= band_phi:
        n = sign_changes(phi.real[interior], band_phi)
        an = sign_changes(dphi.real[interior], band_dphi)
        return NodeCount(n, an, boundary)
    n = min(sign_changes(phi.real[interior], band_phi),
            sign_changes(phi.imag[interior], band_phi))
    an = min(sign_changes(dphi.real[interior], band_dphi),
             sign_changes(dphi.imag[interior], band_dphi))
    return NodeCount(n, an, boundary)


def joint_zero_crossings(values: np.ndarray, deadband: float = _DEADBAND) -> int:
    """Grid cells where the real and imaginary parts change sign together.

    This detects zeros of the complex function itself, the notion entering
    the at-most-one-node statements for complex-frequency modes.  Real
    arrays (imaginary part everywhere inside the dead band) fall back to
    plain sign changes.
    """
    band = deadband * float(np.max(np.abs(values)))
    re, im = values.real, values.imag
    if float(np.max(np.abs(im))) <= band:
        return sign_changes(re[1:-1], band)
    s_re = np.sign(re[1:-1])
    s_im = np.sign(im[1:-1])
    flips = (s_re[:-1] * s_re[1:] < 0) & (s_im[:-1] * s_im[1:] < 0)
    hits = np.abs(values[1:-1]) <= band
    return int(np.sum(flips)) + int(np.sum(hits))


def zero_mode_surface_identity(m1: ModeFunction, m2: ModeFunction) -> float:
    """Residual of the orthogonality identity specialized to two zero modes:

        -(g1 + g2) int phi1 phi2 dx + [phi1 phi2(-a) + phi1 phi2(+a)] = 0.
    """
    for m in (m1, m2):
        if m.omega.imag >= 0 or abs(m.omega.real) > TOL_AXIS * (1 + abs(m.omega)):
            raise QnmSusyError("both inputs must be zero modes (omega = -i gamma)")
    if abs(m1.omega - m2.omega) < 1e-12 * (1 + abs(m1.omega)):
        raise QnmSusyError("identity applies to two distinct zero modes")

    def realized(m):
        phi, _, _ = _phase_fixed(m)
        if np.max(np.abs(phi.imag)) > 1e-8 * np.max(np.abs(phi)):
            raise QnmSusyError("zero-mode wavefunction is not real after phase fixing")
        return phi.real

    p1 = realized(m1)
    p2 = realized(m2)
    g1 = -m1.omega.imag
    g2 = -m2.omega.imag
    val = (-(g1 + g2) * simpson(p1 * p2, x=m1.grid)
           + p1[0] * p2[0] + p1[-1] * p2[-1])
    return float(abs(val))
