import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qnm_susy import modes as modes_mod
from qnm_susy import spectrum as spectrum_mod
from qnm_susy import susy as susy_mod
from qnm_susy.potential import PotentialSpec

V0_BARRIER = 0.16
MULTISTEP_SEGMENTS = [(-1.0, -0.1, 1.0), (-0.1, 0.1, -10.0), (0.1, 1.0, 1.0)]


@pytest.fixture(scope="session")
def barrier():
    return PotentialSpec.constant(1.0, V0_BARRIER)


@pytest.fixture(scope="session")
def multistep():
    return PotentialSpec.piecewise(1.0, MULTISTEP_SEGMENTS)


@pytest.fixture(scope="session")
def free():
    return PotentialSpec.constant(1.0, 0.0)


@pytest.fixture(scope="session")
def barrier_gammas(barrier):
    """Decay rates of the two square-barrier zero modes."""
    g = spectrum_mod.imaginary_axis_scan(barrier, gamma_range=(0.01, 5.0))
    assert len(g) == 2
    return g


@pytest.fixture(scope="session")
def barrier_spectrum(barrier):
    return spectrum_mod.find_roots(barrier, spectrum_mod.DEFAULT_REGION)


@pytest.fixture(scope="session")
def barrier_gen(barrier, barrier_gammas):
    """chi = -1 generator from the slow zero mode."""
    mode = modes_mod.eigenmode(barrier, -1j * barrier_gammas[0])
    return susy_mod.build_generator(barrier, mode)


@pytest.fixture(scope="session")
def barrier_partner(barrier_gen):
    return susy_mod.partner_potential(barrier_gen)


@pytest.fixture(scope="session")
def multistep_gen(multistep):
    """chi = 0 generator: the leftward-incoming transmission mode."""
    g = spectrum_mod.imaginary_axis_scan(multistep, spectrum_mod.WronskianKind.TTM_L,
                                         (0.05, 5.0))
    assert len(g) == 1
    mode = modes_mod.eigenmode(multistep, -1j * g[0],
                               kind=spectrum_mod.WronskianKind.TTM_L.left_boundary)
    return susy_mod.build_generator(multistep, mode)


@pytest.fixture(scope="session")
def multistep_partner(multistep_gen):
    return susy_mod.partner_potential(multistep_gen)


@pytest.fixture(scope="session")
def merged_barrier():
    """The barrier height at which the two zero modes form a double zero."""
    res = spectrum_mod.find_coalescence(
        lambda v0: PotentialSpec.constant(1.0, v0), (0.16, 0.6))
    return PotentialSpec.constant(1.0, res.parameter), res


@pytest.fixture(scope="session")
def jordan_setup(merged_barrier):
    """Reverse-transform arrangement realizing the doubled frequency.

    The merged barrier B carries the double zero at -i.  Its partner P has
    a bound state at +i and a simple mode at -i; the reverse generator maps
    P back onto B, which is the configuration the block relations address.
    """
    from qnm_susy import jordan as jordan_mod

    B, res = merged_barrier
    gen_B = susy_mod.build_generator(B, modes_mod.eigenmode(B, res.omega))
    P = susy_mod.partner_potential(gen_B, n_points=32769)
    gen_P = susy_mod.reverse_generator(gen_B, P)
    basis = jordan_mod.build_block_basis(B, res.omega, alpha_policy="null")
    source = modes_mod.eigenmode(P, res.omega, grid=basis.grid)
    return dict(B=B, P=P, gen_B=gen_B, gen_P=gen_P, basis=basis,
                source=source, omega_b=res.omega, result=res)
