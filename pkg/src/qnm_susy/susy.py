"""Partner-potential construction and state mapping.

A nodeless eigenfunction at negative real omega^2 generates a first-order
intertwiner A = d_x + W with W = -Phi'/Phi.  The partner potential is
assembled algebraically as 2(W^2 + Omega^2) - V, which avoids numerical
differentiation of W and automatically carries any edge discontinuity of V
over with opposite sign.  The asymptotic signs of W classify the
transformation (chi = +1, -1, 0) and fix the bookkeeping of states created
and destroyed at the two privileged frequencies +- i K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ConsistencyError, ExcludedSubspaceError,
                     IneligibleGeneratorError, QnmSusyError)
from .modes import ModeFunction, TwoComponentState, mode_from_solution, qnm_norm
from .potential import DEFAULT_GRID_POINTS, PotentialSpec
from .propagate import BoundaryKind, solve
from .spectrum import (Rect, WronskianKind, count_zeros, imaginary_axis_scan,
                       wronskian)

_MIXED_TOL = 1e-6
_EXCLUDE_TOL = 1e-6


@dataclass(frozen=True)
class Generator:
    """A validated SUSY generator and its derived data on the standard grid."""

    phi: ModeFunction          # the generating eigenfunction, real gauge
    potential: PotentialSpec   # the system it was built from
    omega: complex             # generator eigenfrequency (purely imaginary)
    omega_sq: float            # Omega^2 = -K^2 < 0
    K: float
    grid: np.ndarray
    W: np.ndarray              # real, -Phi'/Phi on the grid
    W_plus: float              # snapped to +-K
    W_minus: float
    end_types: Tuple[str, str]  # ('D'|'I', 'D'|'I') for (left, right)
    chi: int
    seed_kind: BoundaryKind = BoundaryKind.OUTGOING_LEFT


@dataclass(frozen=True)
class SpectralLedger:
    """State-count changes at the privileged frequencies +- i K."""

    chi: int
    delta_plus: int   # Delta(+iK)
    delta_minus: int  # Delta(-iK)
    counts: dict      # raw contour counts backing the deltas


@dataclass(frozen=True)
class CandidateGenerator:
    mode: ModeFunction
    space: WronskianKind
    end_types: Tuple[str, str]
    chi: int


def _seed_kind(mode: ModeFunction) -> BoundaryKind:
    """Which left-edge seed family the stored mode belongs to."""
    ratio = complex(mode.dphi[0] / mode.phi[0])
    if abs(ratio - (-1j * mode.omega)) <= abs(ratio - (1j * mode.omega)):
        return BoundaryKind.OUTGOING_LEFT
    return BoundaryKind.INCOMING_LEFT


def _end_types_from_W(w_minus: float, w_plus: float) -> Tuple[str, str]:
    # Right end: Phi ~ e^{-Kx} (D) gives W = +K; increasing gives -K.
    # Left end: Phi ~ e^{+Kx} (decaying toward -inf, D) gives W = -K.
    left = "D" if w_minus < 0 else "I"
    right = "D" if w_plus > 0 else "I"
    return left, right


def _chi_from_W(w_minus: float, w_plus: float) -> int:
    return int(round(0.5 * (math.copysign(1.0, w_plus) - math.copysign(1.0, w_minus))))


def build_generator(V: PotentialSpec, mode: ModeFunction,
                    mixed_tol: float = _MIXED_TOL) -> Generator:
    """Validate a candidate mode and derive W, the end types and chi.

    Rejects modes with nodes, with omega^2 not negative real, or with a
    mixed (growing plus decaying) asymptotic at either end, which would give
    the partner an exponential tail.
    """
    w = mode.omega
    if abs(w.real) > 1e-8 * (1.0 + abs(w)):
        raise IneligibleGeneratorError("generator eigenvalue must be purely imaginary")
    omega_sq = -(w.imag ** 2)
    if omega_sq >= 0.0:
        raise IneligibleGeneratorError("generator requires Omega^2 < 0")
    K = abs(w.imag)
    # real gauge
    ref = mode.left_value()
    if abs(ref) == 0.0:
        raise IneligibleGeneratorError("generator vanishes at the left edge")
    rot = np.exp(-1j * np.angle(ref))
    phi_c = mode.phi * rot
    dphi_c = mode.dphi * rot
    scale = float(np.max(np.abs(phi_c)))
    if float(np.max(np.abs(phi_c.imag))) > 1e-8 * scale:
        raise IneligibleGeneratorError("generator wavefunction is not real on the axis")
    phi = phi_c.real
    dphi = dphi_c.real
    if float(np.min(np.abs(phi))) <= 1e-9 * scale or np.any(phi[:-1] * phi[1:] < 0):
        raise IneligibleGeneratorError("generator has a node on [-a, a]")
    W = -dphi / phi
    w_minus = float(W[0])
    w_plus = float(W[-1])
    for wend, label in ((w_minus, "left"), (w_plus, "right")):
        if abs(wend * wend + omega_sq) > mixed_tol * K * K:
            raise IneligibleGeneratorError(
                f"mixed asymptotic type at the {label} end: |W|^2 != K^2")
    left, right = _end_types_from_W(w_minus, w_plus)
    chi = _chi_from_W(w_minus, w_plus)
    # snap the boundary constants exactly onto +-K
    w_minus = math.copysign(K, w_minus)
    w_plus = math.copysign(K, w_plus)
    W = W.copy()
    W[0] = w_minus
    W[-1] = w_plus
    gauge_mode = replace(mode, phi=phi.astype(complex), dphi=dphi.astype(complex))
    return Generator(phi=gauge_mode, potential=V, omega=w, omega_sq=omega_sq, K=K,
                     grid=mode.grid, W=W, W_plus=w_plus, W_minus=w_minus,
                     end_types=(left, right), chi=chi, seed_kind=_seed_kind(mode))


def candidate_generators(V: PotentialSpec,
                         gamma_range: Tuple[float, float] = (1e-2, 8.0),
                         samples: int = 241) -> List[CandidateGenerator]:
    """Scan all three spaces along the imaginary axis for admissible
    generators (purely imaginary eigenvalue, nodeless wavefunction)."""
    out: List[CandidateGenerator] = []
    seen = set()
    for kind in (WronskianKind.GAMMA, WronskianKind.TTM_L, WronskianKind.TTM_R):
        for upper in (False, True):
            try:
                gammas = imaginary_axis_scan(V, kind, gamma_range, samples, upper=upper)
            except QnmSusyError:
                continue
            for g in gammas:
                w = 1j * g if upper else -1j * g
                key = (kind, round(w.imag, 10))
                if key in seen:
                    continue
                seen.add(key)
                sol = solve(V, w, kind.left_boundary)
                mode = mode_from_solution(sol)
                try:
                    gen = build_generator(V, mode)
                except IneligibleGeneratorError:
                    continue
                out.append(CandidateGenerator(mode=gen.phi, space=kind,
                                              end_types=gen.end_types, chi=gen.chi))
    return out


def partner_potential(gen: Generator, V: Optional[PotentialSpec] = None,
                      n_points: int = DEFAULT_GRID_POINTS) -> PotentialSpec:
    """The partner 2 (W^2 + Omega^2) - V as a new potential spec.

    Smooth cases (no interior discontinuity in V) are emitted as a sampled
    potential on the standard grid.  When V carries interior steps they are
    reproduced exactly by emitting a piecewise-constant spec whose cells are
    the standard grid refined with V's breakpoints and whose values are the
    exact partner at cell midpoints; a sampled (linear) form would smear the
    inherited steps and shift the partner spectrum far beyond tolerance.
    """
    if V is None:
        V = gen.potential
    elif V != gen.potential:
        raise QnmSusyError("generator was not built from this potential")
    a = V.half_width
    nodes = np.linspace(-a, a, n_points)
    has_steps = V.is_piecewise and len(V.interior_breakpoints()) > 0
    if not has_steps:
        W = _W_on(gen, V, nodes)
        vt = 2.0 * (W * W + gen.omega_sq) - V.evaluate(nodes)
        return PotentialSpec(half_width=a, sample_x=nodes, sample_v=vt)
    edges = np.union1d(nodes, V.interior_breakpoints())
    mids = 0.5 * (edges[:-1] + edges[1:])
    W = _W_on(gen, V, mids)
    vt = 2.0 * (W * W + gen.omega_sq) - V.evaluate(mids)
    return PotentialSpec(half_width=a, edges=edges, values=vt)


def _W_on(gen: Generator, V: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """W = -Phi'/Phi at the requested abscissae, recomputed from V.

    The log-derivative is gauge independent, so re-solving the one-sided
    equation in the generator's seed family reproduces the stored W exactly
    and extends it to abscissae between the stored nodes.
    """
    if (len(x) == len(gen.grid)) and np.allclose(x, gen.grid, atol=1e-12):
        return gen.W
    if V.is_piecewise:
        grid = np.union1d(x, np.array([-V.half_width, V.half_width]))
        sol = solve(V, gen.omega, gen.seed_kind, grid=grid)
        ratio = -(sol.dphi_dx / sol.phi).real
        idx = np.searchsorted(grid, x)
        W = ratio[idx]
        W[np.isclose(x, -V.half_width)] = gen.W_minus
        W[np.isclose(x, V.half_width)] = gen.W_plus
        return W
    # sampled source: interpolate the stored log-derivative
    return np.interp(x, gen.grid, gen.W)


def map_state(gen: Generator, m: ModeFunction) -> ModeFunction:
    """Apply the intertwiner: phi -> phi' + W phi.

    The spatial derivative of the image is produced analytically, using the
    wave equation for phi'' and the Riccati relation for W', so no grid
    differentiation enters.  Mapping the generator itself yields the zero
    function (annihilation), which is a signal rather than an error.
    """
    if len(m.grid) != len(gen.grid) or not np.allclose(m.grid, gen.grid):
        raise QnmSusyError("mode and generator live on different grids")
    W = gen.W
    w2 = m.omega * m.omega
    phi_t = m.dphi + W * m.phi
    dphi_t = (W * W + gen.omega_sq - w2) * m.phi + W * m.dphi
    return ModeFunction(omega=m.omega, grid=m.grid, phi=phi_t, dphi=dphi_t,
                        classification=m.classification)


def is_annihilated(mapped: ModeFunction, original: ModeFunction,
                   rel_tol: float = 1e-9) -> bool:
    """Whether the mapped state vanished, relative to the input's scale."""
    scale = float(np.max(np.abs(original.phi)) * (1.0 + abs(original.omega))
                  + np.max(np.abs(original.dphi)))
    peak = float(max(np.max(np.abs(mapped.phi)), np.max(np.abs(mapped.dphi))))
    return peak <= rel_tol * scale


def map_state_normalized(gen: Generator, m: ModeFunction) -> ModeFunction:
    """Norm-preserving map N (phi' + W phi) with N^-2 = omega^2 - Omega^2."""
    if min(abs(m.omega - 1j * gen.K), abs(m.omega + 1j * gen.K)) < _EXCLUDE_TOL:
        raise ExcludedSubspaceError(
            "normalized map is undefined on the privileged frequencies +- iK")
    N = 1.0 / np.sqrt(m.omega * m.omega - gen.omega_sq + 0j)
    return map_state(gen, m).scaled(N)


def map_twocomponent(gen: Generator, state: TwoComponentState) -> TwoComponentState:
    """Apply the intertwiner to both components of a two-component state."""
    if len(state.grid) != len(gen.grid) or not np.allclose(state.grid, gen.grid):
        raise QnmSusyError("state and generator live on different grids")
    W = gen.W
    d1 = state.dpsi1 if state.dpsi1 is not None else _fd(state.grid, state.psi1)
    d2 = state.dpsi2 if state.dpsi2 is not None else _fd(state.grid, state.psi2)
    return TwoComponentState(grid=state.grid,
                             psi1=d1 + W * state.psi1,
                             psi2=d2 + W * state.psi2)


def map_twocomponent_adjoint(gen: Generator, state: TwoComponentState) -> TwoComponentState:
    """Apply the adjoint intertwiner (-d_x + W) to both components."""
    W = gen.W
    d1 = state.dpsi1 if state.dpsi1 is not None else _fd(state.grid, state.psi1)
    d2 = state.dpsi2 if state.dpsi2 is not None else _fd(state.grid, state.psi2)
    return TwoComponentState(grid=state.grid,
                             psi1=-d1 + W * state.psi1,
                             psi2=-d2 + W * state.psi2)


def _fd(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.gradient(y, x, edge_order=2)


def reverse_generator(gen: Generator, partner: Optional[PotentialSpec] = None) -> Generator:
    """The generator 1/Phi of the transformation from the partner back.

    Its SUSY potential is -W, the end types swap D <-> I, and chi flips
    sign.  For chi = +-1 the eigenfrequency mirrors across the origin; a
    chi = 0 generator reverses into the opposite-handed transmission mode
    at the same frequency.
    """
    if partner is None:
        partner = partner_potential(gen)
    phi_inv = 1.0 / gen.phi.phi
    dphi_inv = -gen.phi.dphi / (gen.phi.phi ** 2)
    if gen.chi == 1:
        w_new = -1j * gen.K
    elif gen.chi == -1:
        w_new = 1j * gen.K
    else:
        w_new = gen.omega
    mode = ModeFunction(omega=w_new, grid=gen.grid, phi=phi_inv, dphi=dphi_inv)
    W_new = -np.asarray(gen.W)
    left, right = gen.end_types
    swap = {"D": "I", "I": "D"}
    return Generator(phi=mode, potential=partner, omega=w_new,
                     omega_sq=gen.omega_sq, K=gen.K, grid=gen.grid, W=W_new,
                     W_plus=-gen.W_plus, W_minus=-gen.W_minus,
                     end_types=(swap[left], swap[right]), chi=-gen.chi)


def spectral_ledger(gen: Generator, partner: Optional[PotentialSpec] = None,
                    contour_radius: Optional[float] = None) -> SpectralLedger:
    """Delta(+iK) = chi and Delta(-iK) = -chi, cross-checked by independent
    contour counts of the outgoing-space Wronskian on both systems."""
    V = gen.potential
    if partner is None:
        partner = partner_potential(gen)
    K = gen.K
    r = contour_radius if contour_radius is not None else 0.05 * K
    counts = {}
    for label, omega0 in (("plus", 1j * K), ("minus", -1j * K)):
        rect = Rect.around(omega0, r)
        counts[f"n_{label}"] = count_zeros(V, rect, WronskianKind.GAMMA)
        counts[f"n_tilde_{label}"] = count_zeros(partner, rect, WronskianKind.GAMMA)
    delta_plus = counts["n_plus"] - counts["n_tilde_plus"]
    delta_minus = counts["n_minus"] - counts["n_tilde_minus"]
    if delta_plus != gen.chi or delta_minus != -gen.chi:
        raise ConsistencyError(
            f"contour ledger ({delta_plus}, {delta_minus}) contradicts chi={gen.chi}: "
            f"counts {counts}")
    return SpectralLedger(chi=gen.chi, delta_plus=delta_plus,
                          delta_minus=delta_minus, counts=counts)


def intertwining_residual(V: PotentialSpec, V_tilde: PotentialSpec, gen: Generator,
                          omega_samples: Sequence[complex],
                          workers: int = 0) -> float:
    """Max relative residual of (w - O) J_tilde(w) = (w + O) J(w), O = i chi K.

    J_tilde is computed by solving the partner potential independently, so
    this genuinely tests that the two spectra stand in the claimed relation.
    Samples too close to the privileged frequencies or to spectrum points
    (detected by small |J|) are skipped.
    """
    from .parallel import parallel_map

    Omega = 1j * gen.chi * gen.K

    def residual(w: complex) -> float:
        if min(abs(w - 1j * gen.K), abs(w + 1j * gen.K)) < 1e-3:
            return -1.0
        J = wronskian(V, w)[0]
        Jt = wronskian(V_tilde, w)[0]
        denom = (w + Omega) * J
        if abs(denom) < 1e-12:
            return -1.0
        return abs((w - Omega) * Jt - denom) / abs(denom)

    vals = parallel_map(residual, list(omega_samples), workers)
    vals = [v for v in vals if v >= 0.0]
    if not vals:
        raise QnmSusyError("no usable intertwining samples")
    return float(max(vals))


def verify_intertwining(V: PotentialSpec, V_tilde: PotentialSpec, gen: Generator,
                        omega_samples: Sequence[complex], workers: int = 0) -> float:
    """Alias with the operation name used by the reports."""
    return intertwining_residual(V, V_tilde, gen, omega_samples, workers)


def mapped_wronskian_fd(gen: Generator, omega: complex, grid=None) -> Tuple[complex, complex]:
    """Unnormalized partner Wronskian from mapped one-sided solutions.

    The image functions are formed on the grid and differentiated by
    five-point finite differences at the matching abscissa, so the result
    tests the mapped values themselves rather than an algebraic identity.
    Returns (J_tilde_unnormalized, J of the base system).
    """
    V = gen.potential
    f = solve(V, omega, BoundaryKind.OUTGOING_LEFT, grid)
    g = solve(V, omega, BoundaryKind.OUTGOING_RIGHT, grid)
    W = gen.W if grid is None else _W_on(gen, V, f.grid)
    ft = f.dphi_dx + W * f.phi
    gt = g.dphi_dx + W * g.phi
    n = len(f.grid)
    i0 = n // 2
    h = f.grid[1] - f.grid[0]

    def d5(y):
        return (y[i0 - 2] - 8.0 * y[i0 - 1] + 8.0 * y[i0 + 1] - y[i0 + 2]) / (12.0 * h)

    Jt = d5(ft) * gt[i0] - ft[i0] * d5(gt)
    J = f.dphi_dx[i0] * g.phi[i0] - f.phi[i0] * g.dphi_dx[i0]
    return complex(Jt), complex(J)


def norm_ratio(gen: Generator, m: ModeFunction, V: Optional[PotentialSpec] = None) -> complex:
    """(A phi, A phi) / (phi, phi) for an eigenstate of the base system."""
    V = gen.potential if V is None else V
    mapped = map_state(gen, m)
    return qnm_norm(mapped, V) / qnm_norm(m, V)
