"""Higher-order Wronskian zeros and the two-function basis living there.

At a double zero the eigenfunction's self-pairing vanishes and a second
basis function is needed; the frequency derivative of the one-sided
solution supplies it, up to an admixture of the eigenfunction fixed by a
normalization policy.  The relations verified here: the inhomogeneous
eigenvalue equation of the second function, the vanishing self-pairings,
the block normalization computed through the bilinear map and (separately)
through Wronskian derivatives, and the behavior of the pair under the
reverse SUSY map.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .errors import ConsistencyError, QnmSusyError, RootSearchError
from .modes import ModeFunction, mode_from_solution, qnm_norm
from .potential import PotentialSpec
from .propagate import BoundaryKind, WaveSolution, solve
from .spectrum import (Rect, SpectrumReport, WronskianKind, count_zeros,
                       wronskian_from_states)
from .susy import Generator

#: two simple roots closer than this (times 1 + |omega|) are treated as a
#: single candidate block and refined together
COALESCENCE_GAP = 1e-4


def detect_blocks(report: SpectrumReport) -> List[Tuple[complex, int]]:
    """Roots of multiplicity >= 2 in a completed spectrum report."""
    return [(r.omega, r.multiplicity) for r in report.roots if r.multiplicity >= 2]


def _pair_at(grid: np.ndarray, f: np.ndarray, g: np.ndarray, omega: complex) -> complex:
    """Single-frequency pairing 2 w int f g dx + i [fg(-a) + fg(+a)]."""
    return complex(2.0 * omega * simpson(f * g, x=grid) + 1j * (f[0] * g[0] + f[-1] * g[-1]))


def _overlap(grid: np.ndarray, f: np.ndarray, g: np.ndarray) -> complex:
    return complex(simpson(f * g, x=grid))


def jordan_pair_10(grid, psi1, psi0, omega_b) -> complex:
    """(Psi_1, Psi_0) with the block's second components.

    Psi_0 is an eigenstate at omega_b; Psi_1 carries the extra -i Psi_0 in
    its time derivative, which adds the plain overlap of Psi_0 with itself.
    """
    return _pair_at(grid, psi1, psi0, omega_b) + _overlap(grid, psi0, psi0)


def jordan_pair_11(grid, psi1, psi0, omega_b) -> complex:
    """(Psi_1, Psi_1) with the block's second components."""
    return _pair_at(grid, psi1, psi1, omega_b) + 2.0 * _overlap(grid, psi1, psi0)


def _fd2(y: np.ndarray, h: float) -> np.ndarray:
    d2 = np.empty_like(y)
    d2[1:-1] = (y[:-2] - 2.0 * y[1:-1] + y[2:]) / (h * h)
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    return d2


def _fd1(y: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[:2] = d[2]
    d[-2:] = d[-3]
    return d


@dataclass(frozen=True)
class JordanBlockBasis:
    omega: complex               # block frequency (the doubled zero)
    order: int                   # block size M; only M = 2 is constructed
    grid: np.ndarray
    psi0: ModeFunction           # the surviving eigenfunction
    psi1: np.ndarray             # second basis function (values)
    dpsi1: np.ndarray            # its spatial derivative
    psi1_second: np.ndarray      # second component -i(omega psi1 + psi0)
    alpha: complex
    alpha_other: complex
    alpha_policy: str
    scale: complex
    block_norm: complex          # (Psi_1, Psi_0)
    psi0_self_pairing: complex   # (Psi_0, Psi_0): vanishes at a double zero
    psi1_self_pairing: complex   # (Psi_1, Psi_1): zero under the null policy
    eq_second_residual: float    # inhomogeneous eigenvalue relation residual
    owc_defect_first_order: float  # outgoing defect of the pair at x = +a


def _interior_mask(V: PotentialSpec, grid: np.ndarray) -> np.ndarray:
    """Interior nodes away from any potential step, where FD stencils are valid."""
    mask = np.ones(len(grid), dtype=bool)
    mask[:2] = False
    mask[-2:] = False
    if V.is_piecewise:
        h = grid[1] - grid[0]
        for b in V.interior_breakpoints():
            mask &= np.abs(grid - b) > 2.5 * h
    return mask


def block_equation_residual(V: PotentialSpec, omega_b: complex, psi1: np.ndarray,
                            psi0: np.ndarray, grid: np.ndarray) -> float:
    """Relative residual of (H - omega_b^2) Psi_1 = 2 omega_b Psi_0.

    The second derivative is taken by finite differences of the stored
    samples, so the relation is tested rather than rebuilt from the
    integrator's own right-hand side.
    """
    h = float(grid[1] - grid[0])
    lhs = -_fd2(psi1, h) + (V.evaluate(grid) - omega_b ** 2) * psi1
    rhs = 2.0 * omega_b * psi0
    mask = _interior_mask(V, grid)
    scale = float(np.max(np.abs(rhs))) + float(np.max(np.abs(psi1))) * abs(omega_b) ** 2
    return float(np.max(np.abs(lhs[mask] - rhs[mask])) / max(scale, 1e-300))


def jordan_owc_defect(psi0_a: complex, psi1_a: complex, dpsi1_a: complex,
                      omega_b: complex) -> float:
    """Normalized defect of the first-order outgoing condition at x = +a.

    The pair (Psi_0, Psi_1) radiates freely on the right iff
    Psi_1'(a) = i omega_b Psi_1(a) + i Psi_0(a); for a simple zero the
    defect is finite, for a double zero it vanishes.
    """
    defect = dpsi1_a - 1j * omega_b * psi1_a - 1j * psi0_a
    scale = abs(dpsi1_a) + abs(omega_b * psi1_a) + abs(psi0_a)
    return float(abs(defect) / max(scale, 1e-300))


def build_block_basis(V_tilde: PotentialSpec, omega: complex,
                      alpha_policy: str = "null",
                      kind: WronskianKind = WronskianKind.GAMMA,
                      scale: complex = 1.0,
                      grid=None,
                      confirm: bool = True) -> JordanBlockBasis:
    """Construct the order-2 basis at a confirmed double zero.

    Psi_0 is the one-sided solution at the block frequency; Psi_1 is its
    frequency derivative (from the variational system) plus alpha times
    Psi_0.  Policy "null" solves the quadratic making (Psi_1, Psi_1) = 0
    and keeps the smaller-|alpha| root; policy "plain" sets alpha = 0.
    """
    if alpha_policy not in ("null", "plain"):
        raise QnmSusyError(f"unknown alpha policy {alpha_policy!r}")
    if confirm:
        n = count_zeros(V_tilde, Rect.around(omega, 1e-3 * (1.0 + abs(omega))), kind)
        if n != 2:
            raise RootSearchError(f"contour count at {omega} is {n}, not a double zero")
    sol = solve(V_tilde, omega, kind.left_boundary, grid)
    g = sol.grid
    Z = scale * sol.phi
    dZ = scale * sol.dphi_dx
    U = scale * sol.dphi_domega
    dU = scale * sol.ddphi_domega_dx
    p00 = jordan_pair_10(g, Z, Z, omega) - _overlap(g, Z, Z)  # = (Psi0, Psi0)
    # quadratic in alpha for (Psi1, Psi1) = 0
    A2 = p00
    B2 = 2.0 * _pair_at(g, U, Z, omega) + 2.0 * _overlap(g, Z, Z)
    C2 = _pair_at(g, U, U, omega) + 2.0 * _overlap(g, U, Z)
    if alpha_policy == "plain":
        alpha, alpha_other = 0.0 + 0j, complex("nan")
    else:
        if abs(A2) < 1e-14 * (abs(B2) + abs(C2)):
            alpha = -C2 / B2
            alpha_other = complex("inf")
        else:
            rts = np.roots([A2, B2, C2])
            rts = sorted(rts, key=abs)
            alpha, alpha_other = complex(rts[0]), complex(rts[1])
    psi1 = U + alpha * Z
    dpsi1 = dU + alpha * dZ
    mode0 = ModeFunction(omega=omega, grid=g, phi=Z, dphi=dZ)
    res = block_equation_residual(V_tilde, omega, psi1, Z, g)
    defect = jordan_owc_defect(complex(Z[-1]), complex(psi1[-1]), complex(dpsi1[-1]), omega) \
        if kind is WronskianKind.GAMMA else float("nan")
    return JordanBlockBasis(
        omega=complex(omega), order=2, grid=g, psi0=mode0,
        psi1=psi1, dpsi1=dpsi1,
        psi1_second=-1j * (omega * psi1 + Z),
        alpha=alpha, alpha_other=alpha_other, alpha_policy=alpha_policy,
        scale=complex(scale),
        block_norm=jordan_pair_10(g, psi1, Z, omega),
        psi0_self_pairing=p00,
        psi1_self_pairing=jordan_pair_11(g, psi1, Z, omega),
        eq_second_residual=res,
        owc_defect_first_order=defect)


def _mapped_six(gen: Generator, sol: WaveSolution, W: np.ndarray):
    """Image of a one-sided solution and its frequency derivatives under the
    intertwiner, with spatial derivatives eliminated analytically."""
    w = sol.omega
    c = W * W + gen.omega_sq - w * w
    P = sol.dphi_dx + W * sol.phi
    DP = c * sol.phi + W * sol.dphi_dx
    U = sol.ddphi_domega_dx + W * sol.dphi_domega
    DU = c * sol.dphi_domega - 2.0 * w * sol.phi + W * sol.ddphi_domega_dx
    Q = sol.d2dphi_domega2_dx + W * sol.d2phi_domega2
    DQ = (c * sol.d2phi_domega2 - 4.0 * w * sol.dphi_domega - 2.0 * sol.phi
          + W * sol.d2dphi_domega2_dx)
    return P, DP, U, DU, Q, DQ


@dataclass(frozen=True)
class BlockNormResult:
    omega: complex
    expected: complex            # 2 omega_b, i.e. -2 Omega
    ratio_bilinear: complex
    ratio_wronskian: complex
    source_norm: complex         # (Psi_j, Psi_j) in the base system
    source_norm_wronskian: complex  # -dJ/dw at the simple zero


def block_norm(basis: JordanBlockBasis, V: PotentialSpec, gen: Generator,
               tol: float = 1e-6) -> BlockNormResult:
    """(Psi_1, Psi_0) / (Psi_j, Psi_j) computed two independent ways.

    The source mode Psi_j is the base system's one-sided solution at the
    block frequency (a simple zero there); the block pair is its image
    under the intertwiner, carrying the source's left-edge value as overall
    scale.  Route one evaluates the bilinear map by quadrature; route two
    uses -1/2 J_u'' of the mapped Wronskian against -J' of the base system.
    Both must equal twice the block frequency.
    """
    omega_b = basis.omega
    f = solve(V, omega_b, BoundaryKind.OUTGOING_LEFT, basis.grid)
    gsol = solve(V, omega_b, BoundaryKind.OUTGOING_RIGHT, basis.grid)
    from .susy import _W_on
    W = _W_on(gen, V, f.grid)
    P, DP, U, DU, Q, DQ = _mapped_six(gen, f, W)

    source = mode_from_solution(f)
    n_src = qnm_norm(source, V)
    _, dJ, _ = wronskian_from_states(f.state_at(0.0), gsol.state_at(0.0))
    ratio_bil = jordan_pair_10(f.grid, U, P, omega_b) / n_src

    Pg, DPg, Ug, DUg, Qg, DQg = _mapped_six(gen, gsol, W)
    i0 = int(np.argmin(np.abs(f.grid)))
    map_f = np.array([P[i0], DP[i0], U[i0], DU[i0], Q[i0], DQ[i0]])
    map_g = np.array([Pg[i0], DPg[i0], Ug[i0], DUg[i0], Qg[i0], DQg[i0]])
    Ju, dJu, d2Ju = wronskian_from_states(map_f, map_g)
    ratio_wron = (-0.5 * d2Ju) / (-dJ)

    expected = 2.0 * omega_b
    if abs(ratio_bil - ratio_wron) > tol * abs(expected):
        raise ConsistencyError(
            f"block norm routes disagree: {ratio_bil} vs {ratio_wron}")
    return BlockNormResult(omega=omega_b, expected=expected,
                           ratio_bilinear=complex(ratio_bil),
                           ratio_wronskian=complex(ratio_wron),
                           source_norm=n_src, source_norm_wronskian=complex(-dJ))


@dataclass(frozen=True)
class ReverseAnnihilationReport:
    annihilation_residual: float     # |adjoint image of Psi_0| / scale
    back_map_rel_error: float        # adjoint image of Psi_1 vs 2 w_b Psi_j
    back_map_constant: complex       # fitted constant, should be 2 omega_b
    preimage_owc_defect: float       # frequency-derivative preimage, not outgoing
    partner_owc_defect: float        # the mapped pair: outgoing to first order
    eigen_residual_back: float       # (H - Omega^2) on the back-mapped Psi_1

    def all_pass(self, tol_annihilate: float = 1e-8, tol_back: float = 1e-6,
                 min_defect: float = 1e-3) -> bool:
        return (self.annihilation_residual <= tol_annihilate
                and self.back_map_rel_error <= tol_back
                and self.preimage_owc_defect >= min_defect
                and self.partner_owc_defect <= 1e-6)


def reverse_annihilation(gen: Generator, basis: JordanBlockBasis,
                         source: ModeFunction) -> ReverseAnnihilationReport:
    """Behavior of the block pair under the adjoint intertwiner.

    The eigen member maps to zero; the second member maps back onto the
    source eigenfunction with constant twice the block frequency; and the
    frequency-derivative preimage in the base system violates the outgoing
    condition while the mapped pair satisfies it to first order.
    """
    omega_b = basis.omega
    V = gen.potential
    f = solve(V, omega_b, BoundaryKind.OUTGOING_LEFT, basis.grid)
    from .susy import _W_on
    W = _W_on(gen, V, f.grid)
    P, DP, U, DU, _, _ = _mapped_six(gen, f, W)
    h = float(f.grid[1] - f.grid[0])
    mask = _interior_mask(V, f.grid)

    # adjoint applied with finite-difference derivatives of the mapped values
    adj0 = -_fd1(P, h) + W * P
    scale0 = float(np.max(np.abs(P)) * (1.0 + abs(omega_b)))
    r_annihilate = float(np.max(np.abs(adj0[mask])) / max(scale0, 1e-300))

    adj1 = -_fd1(U, h) + W * U
    target = 2.0 * omega_b * f.phi
    scale1 = float(np.max(np.abs(target)))
    r_back = float(np.max(np.abs(adj1[mask] - target[mask])) / max(scale1, 1e-300))
    # least-squares constant in adj1 = c * f (robust against nodes of f)
    c_fit = complex(np.sum(adj1[mask] * np.conj(f.phi[mask]))
                    / np.sum(np.abs(f.phi[mask]) ** 2))

    # eigenfunction residual of the back-mapped function (no t-prefactor left)
    lhs = -_fd2(adj1, h) + (V.evaluate(f.grid) - omega_b ** 2) * adj1
    mask2 = mask.copy()
    mask2[:3] = False
    mask2[-3:] = False
    r_eigen = float(np.max(np.abs(lhs[mask2])) / max(np.max(np.abs(adj1)) * abs(omega_b) ** 2, 1e-300))

    d_pre = jordan_owc_defect(complex(f.phi[-1]), complex(f.dphi_domega[-1]),
                              complex(f.ddphi_domega_dx[-1]), omega_b)
    d_post = jordan_owc_defect(complex(P[-1]), complex(U[-1]), complex(DU[-1]), omega_b)
    return ReverseAnnihilationReport(
        annihilation_residual=r_annihilate,
        back_map_rel_error=r_back,
        back_map_constant=c_fit,
        preimage_owc_defect=d_pre,
        partner_owc_defect=d_post,
        eigen_residual_back=r_eigen)


@dataclass(frozen=True)
class ProportionalityResult:
    from_left: complex
    from_right: complex
    surface_identity: complex
    agree: bool


def proportionality_constant(gen: Generator, source: ModeFunction,
                             rel_tol: float = 1e-8) -> ProportionalityResult:
    """Ratio of the mapped source to the reversed generator, both edges.

    At coalescence (source frequency opposite the generator's) the two edge
    evaluations 2 i W s(-a) Phi(-a) and -2 i W s(+a) Phi(+a) agree, which is
    the surface-term orthogonality of the source and generator states.
    """
    Omega = gen.omega
    phi = gen.phi
    vl = 2j * Omega * source.left_value() * phi.left_value()
    vr = -2j * Omega * source.right_value() * phi.right_value()
    surf = 1j * (source.left_value() * phi.left_value()
                 + source.right_value() * phi.right_value())
    scale = max(abs(vl), abs(vr), 1e-300)
    return ProportionalityResult(from_left=vl, from_right=vr,
                                 surface_identity=surf,
                                 agree=abs(vl - vr) <= rel_tol * scale)


def time_prefactor_residuals(basis: JordanBlockBasis, V_tilde: PotentialSpec) -> Tuple[float, float]:
    """Residuals of the two time-coefficient equations for the evolving pair
    (Psi_1 - i t Psi_0) e^{-i omega_b t}: the eigen relation for Psi_0 and
    the inhomogeneous relation for Psi_1."""
    g = basis.grid
    h = float(g[1] - g[0])
    mask = _interior_mask(V_tilde, g)
    v = V_tilde.evaluate(g)
    z = basis.psi0.phi
    r0 = -_fd2(z, h) + (v - basis.omega ** 2) * z
    res0 = float(np.max(np.abs(r0[mask])) / max(np.max(np.abs(z)) * max(abs(basis.omega) ** 2, 1.0), 1e-300))
    res1 = block_equation_residual(V_tilde, basis.omega, basis.psi1, z, g)
    return res0, res1
