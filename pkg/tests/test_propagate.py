import numpy as np
import pytest

from qnm_susy.errors import PropagationError, QnmSusyError
from qnm_susy.potential import PotentialSpec
from qnm_susy.propagate import (BoundaryKind, segment_step, solution_reality_check,
                                solve, state_at)

from oracles import barrier_mode_profile

OMEGAS = [1.3 - 0.7j, -2.0 - 0.2j, 0.4 + 0.9j, 3.0 - 2.5j]


def test_free_field_closed_form(free):
    for om in OMEGAS:
        sol = solve(free, om, BoundaryKind.OUTGOING_LEFT, grid=257)
        exact = np.exp(-1j * om * (sol.grid + 1.0))
        assert np.max(np.abs(sol.phi - exact)) < 1e-12 * np.max(np.abs(exact))
        assert np.max(np.abs(sol.dphi_dx + 1j * om * exact)) < 1e-11 * np.max(np.abs(exact))


def test_free_field_omega_derivatives(free):
    om = 1.1 - 0.4j
    sol = solve(free, om, BoundaryKind.OUTGOING_LEFT, grid=257)
    xi = sol.grid + 1.0
    exact = np.exp(-1j * om * xi)
    assert np.max(np.abs(sol.dphi_domega - (-1j * xi) * exact)) < 1e-12
    assert np.max(np.abs(sol.d2phi_domega2 - (-1j * xi) ** 2 * exact)) < 1e-11


@pytest.mark.parametrize("kind,sign", [
    (BoundaryKind.OUTGOING_LEFT, -1), (BoundaryKind.INCOMING_LEFT, +1),
    (BoundaryKind.OUTGOING_RIGHT, +1), (BoundaryKind.INCOMING_RIGHT, -1),
])
def test_seed_conditions(barrier, kind, sign):
    om = 0.7 - 0.5j
    sol = solve(barrier, om, kind, grid=129)
    i = 0 if kind.seeded_left else -1
    assert sol.phi[i] == 1.0
    assert sol.dphi_dx[i] == sign * 1j * om
    # omega-derivative arrays vanish at the seeded end except d_w phi' = s i
    assert sol.dphi_domega[i] == 0.0
    assert sol.ddphi_domega_dx[i] == sign * 1j
    assert sol.d2phi_domega2[i] == 0.0
    assert sol.d2dphi_domega2_dx[i] == 0.0


def test_eigenmode_satisfies_right_owc(barrier, barrier_gammas):
    om = -1j * barrier_gammas[0]
    sol = solve(barrier, om, BoundaryKind.OUTGOING_LEFT, grid=257)
    ratio = sol.dphi_dx[-1] / sol.phi[-1]
    assert abs(ratio - 1j * om) < 1e-10


def test_eigenmode_profile_matches_cosh(barrier, barrier_gammas):
    # wavefunction inside the barrier is cosh(alpha x) with alpha^2 = V0 + g^2
    g = barrier_gammas[0]
    sol = solve(barrier, -1j * g, BoundaryKind.OUTGOING_LEFT, grid=257)
    prof = barrier_mode_profile(0.16, g, sol.grid)
    phi = sol.phi.real / sol.phi.real[0] * prof[0]
    assert np.max(np.abs(phi - prof)) < 1e-9


def test_segment_step_free_drift_limit():
    M = segment_step(0.0, 1e-9, 0.25)
    assert M[0, 0] == pytest.approx(1.0)
    assert M[0, 1] == pytest.approx(0.25)
    assert M[1, 0] == pytest.approx(0.0, abs=1e-18)


def test_segment_step_zero_potential_form():
    om = 1.7 - 0.3j
    dx = 0.4
    M = segment_step(0.0, om, dx)
    assert M[0, 0] == pytest.approx(np.cos(om * dx))
    assert M[0, 1] == pytest.approx(np.sin(om * dx) / om)
    assert M[1, 0] == pytest.approx(-om * np.sin(om * dx))


@pytest.mark.parametrize("V0,om,dx", [
    (0.16, 0.9 - 0.4j, 0.3), (-10.0, 2.0 - 1.0j, 0.05), (4.0, 2.0, 0.7),
    (1.0, 1.0, 0.5),  # kappa = 0 exactly
])
def test_segment_step_unimodular(V0, om, dx):
    M = segment_step(V0, om, dx)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    assert abs(det - 1.0) < 1e-13


def test_composed_segment_steps_reproduce_solve(multistep):
    om = 1.2 - 0.8j
    y = np.array([1.0, -1j * om])
    pieces = [(-1.0, -0.1, 1.0), (-0.1, 0.1, -10.0), (0.1, 1.0, 1.0)]
    for lo, hi, v in pieces:
        M = segment_step(v, om, hi - lo)
        y = M @ y
    sol = solve(multistep, om, BoundaryKind.OUTGOING_LEFT, grid=129)
    assert abs(y[0] - sol.phi[-1]) < 1e-12 * abs(y[0])
    assert abs(y[1] - sol.dphi_dx[-1]) < 1e-12 * abs(y[1])


@pytest.mark.parametrize("kind", [BoundaryKind.OUTGOING_LEFT, BoundaryKind.OUTGOING_RIGHT])
def test_omega_derivatives_match_finite_differences(multistep, kind):
    om = 0.9 - 0.6j
    h = 1e-5
    s0 = solve(multistep, om, kind, grid=129)
    sp = solve(multistep, om + h, kind, grid=129)
    sm = solve(multistep, om - h, kind, grid=129)
    fd1 = (sp.phi - sm.phi) / (2 * h)
    scale = np.max(np.abs(s0.dphi_domega))
    assert np.max(np.abs(fd1 - s0.dphi_domega)) < 1e-8 * scale + 1e-9
    # second difference at a larger step, where truncation dominates roundoff
    h = 1e-4
    sp = solve(multistep, om + h, kind, grid=129)
    sm = solve(multistep, om - h, kind, grid=129)
    fd2 = (sp.phi - 2 * s0.phi + sm.phi) / (h * h)
    scale2 = np.max(np.abs(s0.d2phi_domega2))
    assert np.max(np.abs(fd2 - s0.d2phi_domega2)) < 1e-5 * scale2


def test_omega_derivative_error_is_second_order(multistep):
    # centered-difference mismatch shrinks by ~4 when h halves
    om = 1.1 - 0.5j
    errs = []
    s0 = solve(multistep, om, BoundaryKind.OUTGOING_LEFT, grid=129)
    for h in (2e-3, 1e-3):
        sp = solve(multistep, om + h, BoundaryKind.OUTGOING_LEFT, grid=129)
        sm = solve(multistep, om - h, BoundaryKind.OUTGOING_LEFT, grid=129)
        fd1 = (sp.phi - sm.phi) / (2 * h)
        errs.append(np.max(np.abs(fd1 - s0.dphi_domega)))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_incoming_is_outgoing_at_reversed_frequency(multistep):
    om = 1.4 - 0.3j
    a = solve(multistep, -om, BoundaryKind.OUTGOING_LEFT, grid=129)
    b = solve(multistep, om, BoundaryKind.INCOMING_LEFT, grid=129)
    assert np.array_equal(a.phi, b.phi)
    assert np.array_equal(a.dphi_dx, b.dphi_dx)


def test_reality_on_imaginary_axis(barrier, free, barrier_gammas):
    sol = solve(free, -0.5j, BoundaryKind.OUTGOING_LEFT, grid=129)
    assert solution_reality_check(sol) < 1e-14
    sol = solve(barrier, -1j * barrier_gammas[0], BoundaryKind.OUTGOING_LEFT)
    assert solution_reality_check(sol) < 1e-12
    sol = solve(barrier, 0.0, BoundaryKind.OUTGOING_LEFT, grid=129)
    assert solution_reality_check(sol) == 0.0


def test_reality_check_rejects_complex_frequency(barrier):
    sol = solve(barrier, 1.0 - 0.5j, BoundaryKind.OUTGOING_LEFT, grid=129)
    with pytest.raises(QnmSusyError):
        solution_reality_check(sol)


def test_state_at_matches_grid_solution(multistep):
    om = 2.2 - 1.1j
    sol = solve(multistep, om, BoundaryKind.OUTGOING_RIGHT, grid=129)
    st = state_at(multistep, om, BoundaryKind.OUTGOING_RIGHT, 0.0)
    assert np.max(np.abs(st - sol.state_at(0.0))) < 1e-12 * max(1, np.max(np.abs(st)))


def test_sampled_engine_matches_piecewise_rendering():
    # the same smooth profile stored two ways, solved by the two engines
    x = np.linspace(-1, 1, 4097)
    profile = lambda t: 0.3 * np.exp(-4 * t * t)
    Vs = PotentialSpec.sampled(x, profile(x))
    edges = np.linspace(-1, 1, 8193)
    Vp = PotentialSpec(half_width=1.0, edges=edges,
                       values=profile(0.5 * (edges[:-1] + edges[1:])))
    om = 1.3 - 0.7j
    a = solve(Vs, om, BoundaryKind.OUTGOING_LEFT)
    b = solve(Vp, om, BoundaryKind.OUTGOING_LEFT, grid=4097)
    assert np.max(np.abs(a.phi - b.phi)) < 1e-6


def test_overflow_reports_last_good_abscissa(barrier):
    with pytest.raises(PropagationError) as err:
        solve(barrier, -800j, BoundaryKind.OUTGOING_LEFT, grid=257)
    assert err.value.last_good_x is not None
    assert -1.0 <= err.value.last_good_x <= 1.0


def test_grid_validation(barrier):
    with pytest.raises(QnmSusyError):
        solve(barrier, 1.0, BoundaryKind.OUTGOING_LEFT,
              grid=np.linspace(-0.5, 1.0, 65))
