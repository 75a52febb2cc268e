import numpy as np
import pytest

from qnm_susy.errors import ContourError, QnmSusyError, RootSearchError, UnclassifiableError
from qnm_susy.potential import PotentialSpec
from qnm_susy.spectrum import (DEFAULT_REGION, Classification, Rect, WronskianKind,
                               classify, count_zeros, find_coalescence, find_roots,
                               imaginary_axis_scan, wronskian)

from oracles import (barrier_J_gamma, barrier_J_ttml, barrier_merge_point,
                     barrier_zero_mode_rates, free_J)


# -- Wronskian values ---------------------------------------------------------

def test_free_field_wronskian_closed_form(free):
    for re in np.linspace(-5, 5, 7):
        for im in np.linspace(-3, 1, 5):
            om = complex(re, im)
            if abs(om) < 0.2:
                continue
            J, _, _ = wronskian(free, om)
            assert abs(J - free_J(om)) < 1e-11 * abs(free_J(om))


def test_barrier_wronskian_closed_form(barrier):
    for om in (0.7 - 0.9j, -2.3 - 0.4j, 1.9 + 0.2j, -0.5j):
        J, _, _ = wronskian(barrier, om)
        ref = barrier_J_gamma(0.16, om)
        assert abs(J - ref) < 1e-12 * abs(ref)


def test_barrier_ttml_wronskian_closed_form(barrier):
    for om in (1.1 - 0.6j, -0.8j, 2.4 - 0.1j):
        J, _, _ = wronskian(barrier, om, WronskianKind.TTM_L)
        ref = barrier_J_ttml(0.16, om)
        assert abs(J - ref) < 1e-12 * abs(ref)


def test_wronskian_position_independent(multistep):
    om = 1.7 - 1.2j
    vals = [wronskian(multistep, om, x_match=x)[0] for x in (-1.0, -0.35, 0.0, 0.6, 1.0)]
    for v in vals[1:]:
        assert abs(v - vals[0]) <= 1e-10 * abs(vals[0])


def test_wronskian_derivative_matches_finite_difference(multistep):
    om = 0.8 - 0.9j
    h = 1e-5
    J0, dJ, d2J = wronskian(multistep, om)
    Jp = wronskian(multistep, om + h)[0]
    Jm = wronskian(multistep, om - h)[0]
    assert abs((Jp - Jm) / (2 * h) - dJ) < 1e-8 * abs(dJ)
    assert abs((Jp - 2 * J0 + Jm) / (h * h) - d2J) < 1e-4 * abs(d2J)


def test_barrier_zero_mode_is_wronskian_zero(barrier, barrier_gammas):
    # paper's quoted eigenvalues -0.181i and -2.500i
    assert barrier_gammas[0] == pytest.approx(0.181, abs=2e-3)
    assert barrier_gammas[1] == pytest.approx(2.500, abs=2e-3)
    J, _, _ = wronskian(barrier, -1j * barrier_gammas[0])
    scale = abs(wronskian(barrier, -1j * 0.5)[0])
    assert abs(J) < 1e-10 * scale


# -- counting -----------------------------------------------------------------

def test_count_around_slow_zero_mode(barrier):
    assert count_zeros(barrier, Rect.around(-0.181j, 0.05)) == 1


def test_count_free_field_region_away_from_zero(free):
    assert count_zeros(free, Rect(-3.0, 3.0, -2.5, -0.5)) == 0


def test_count_is_additive(barrier):
    whole = Rect(-3.0, 3.0, -3.2, 0.3)
    n = count_zeros(barrier, whole)
    left = Rect(-3.0, 0.4, -3.2, 0.3)
    right = Rect(0.4, 3.0, -3.2, 0.3)
    assert count_zeros(barrier, left) + count_zeros(barrier, right) == n


def test_count_rejects_root_on_contour(barrier, barrier_gammas):
    rect = Rect(-0.05, 0.05, -barrier_gammas[0], -0.01)  # root sits on the edge
    with pytest.raises(ContourError):
        count_zeros(barrier, rect)


def test_merged_root_counts_two(merged_barrier):
    B, res = merged_barrier
    assert count_zeros(B, Rect.around(res.omega, 0.02)) == 2


# -- find_roots ---------------------------------------------------------------

def test_barrier_spectrum_complete(barrier_spectrum):
    rep = barrier_spectrum
    assert rep.complete
    assert rep.counting_total == sum(r.multiplicity for r in rep.roots)


def test_barrier_spectrum_contains_paper_roots(barrier_spectrum):
    oms = barrier_spectrum.omegas()
    assert np.min(np.abs(oms - (-0.181j))) < 2e-3
    assert np.min(np.abs(oms - (-2.500j))) < 2e-3


def test_barrier_spectrum_residuals_and_ordering(barrier_spectrum):
    for r in barrier_spectrum.roots:
        assert r.wronskian_residual < 1e-9
    ims = [r.omega.imag for r in barrier_spectrum.roots]
    assert ims == sorted(ims)


def test_root_pairing(barrier_spectrum):
    oms = barrier_spectrum.omegas()
    for r in barrier_spectrum.roots:
        if abs(r.omega.real) > 1e-6:
            assert np.min(np.abs(oms - (-np.conj(r.omega)))) < 1e-7


def test_free_field_rootfree_region(free):
    rep = find_roots(free, Rect(0.5, 4.0, -2.0, -0.2))
    assert rep.roots == []
    assert rep.counting_total == 0


def test_multistep_ttm_root(multistep):
    rep = find_roots(multistep, Rect(-0.4, 0.4, -1.4, -0.5), WronskianKind.TTM_L)
    assert len(rep.roots) == 1
    assert abs(rep.roots[0].omega - (-0.990j)) < 1e-2
    assert rep.roots[0].classification is Classification.TTM


def test_spectrum_report_serializes(barrier_spectrum):
    d = barrier_spectrum.to_json_dict()
    assert d["kind"] == "gamma"
    assert len(d["roots"]) == len(barrier_spectrum.roots)


# -- classification -----------------------------------------------------------

def test_classify_examples():
    assert classify(0.3j) is Classification.NM
    assert classify(-0.181j) is Classification.ZERO_MODE
    assert classify(2.1 - 0.4j) is Classification.QNM
    assert classify(-2.1 - 0.4j) is Classification.QNM


def test_classify_rejects_origin():
    with pytest.raises(UnclassifiableError):
        classify(1e-12 + 1e-13j)


# -- imaginary axis scan ------------------------------------------------------

def test_scan_matches_transcendental_oracle(barrier_gammas):
    oracle = barrier_zero_mode_rates(0.16)
    assert len(oracle) == 2
    assert barrier_gammas[0] == pytest.approx(oracle[0], abs=1e-12)
    assert barrier_gammas[1] == pytest.approx(oracle[1], abs=1e-12)


def test_scan_free_field_no_sign_change(free):
    assert imaginary_axis_scan(free, gamma_range=(0.1, 5.0)) == []


def test_scan_rootfree_window_is_empty(barrier):
    # oracle: alpha tanh alpha = gamma has no roots beyond 2.5005 for V0=0.16
    assert imaginary_axis_scan(barrier, gamma_range=(3.0, 5.0)) == []


def test_scan_validates_range(barrier):
    with pytest.raises(QnmSusyError):
        imaginary_axis_scan(barrier, gamma_range=(-1.0, 2.0))


# -- coalescence --------------------------------------------------------------

def test_coalescence_matches_oracle(merged_barrier):
    _, res = merged_barrier
    v0_star, gamma_star = barrier_merge_point()
    assert res.parameter == pytest.approx(v0_star, abs=1e-6)
    assert res.omega == pytest.approx(-1j * gamma_star, abs=1e-6)
    assert res.multiplicity == 2
    assert res.dJ_abs <= 1e-8 * abs(res.d2J)


def test_no_coalescence_below_merge_height():
    fam = lambda v0: PotentialSpec.constant(1.0, v0)
    with pytest.raises(RootSearchError):
        find_coalescence(fam, (0.16, 0.2))


def test_two_roots_at_low_height(barrier_gammas):
    # at V0 = 0.16 the modes are well separated: no block
    assert barrier_gammas[1] - barrier_gammas[0] > 2.0


# -- grid refinement ----------------------------------------------------------

def test_sampled_roots_stable_under_grid_halving():
    x = np.linspace(-1, 1, 2049)
    v = 0.5 * np.exp(-3 * x * x)
    V_coarse = PotentialSpec.sampled(x, v)
    x2 = np.linspace(-1, 1, 4097)
    V_fine = PotentialSpec.sampled(x2, 0.5 * np.exp(-3 * x2 * x2))
    g1 = imaginary_axis_scan(V_coarse, gamma_range=(0.05, 3.0))
    g2 = imaginary_axis_scan(V_fine, gamma_range=(0.05, 3.0))
    assert len(g1) == len(g2) != 0
    for a, b in zip(g1, g2):
        assert abs(a - b) < 1e-6
