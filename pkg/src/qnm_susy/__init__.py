"""Outgoing-wave spectra of finite-support 1-D potentials and their
supersymmetric partners: complex eigenfrequencies of the three
boundary-condition spaces, generalized norms, partner construction, and
Jordan-block analysis at spectral coalescence."""

from .potential import DEFAULT_GRID_POINTS, PotentialSpec, evaluate, perturb, reflect
from .propagate import (BoundaryKind, WaveSolution, segment_step, solution_reality_check,
                        solve)
from .spectrum import (Classification, Rect, SpectrumReport, WronskianKind, classify,
                       count_zeros, find_coalescence, find_roots, imaginary_axis_scan,
                       wronskian)
from .modes import (ModeFunction, TwoComponentState, bilinear_map, count_nodes_antinodes,
                    eigenmode, expansion_coeffs, first_order_shift, hamiltonian_action,
                    mode_pairing, normalize, qnm_norm, two_component,
                    zero_mode_surface_identity)
from .susy import (Generator, SpectralLedger, build_generator, candidate_generators,
                   map_state, map_state_normalized, map_twocomponent, partner_potential,
                   reverse_generator, spectral_ledger, verify_intertwining)
from .jordan import (JordanBlockBasis, block_norm, build_block_basis, detect_blocks,
                     proportionality_constant, reverse_annihilation)

__version__ = "0.1.0"

__all__ = [
    "BoundaryKind", "Classification", "DEFAULT_GRID_POINTS", "Generator",
    "JordanBlockBasis", "ModeFunction", "PotentialSpec", "Rect", "SpectralLedger",
    "SpectrumReport", "TwoComponentState", "WaveSolution", "WronskianKind",
    "bilinear_map", "block_norm", "build_block_basis", "build_generator",
    "candidate_generators", "classify", "count_nodes_antinodes", "count_zeros",
    "detect_blocks", "eigenmode", "evaluate", "expansion_coeffs",
    "find_coalescence", "find_roots", "first_order_shift", "hamiltonian_action",
    "imaginary_axis_scan", "map_state", "map_state_normalized", "map_twocomponent",
    "mode_pairing", "normalize", "partner_potential", "perturb",
    "proportionality_constant", "qnm_norm", "reflect", "reverse_annihilation",
    "reverse_generator", "segment_step", "solution_reality_check", "solve",
    "spectral_ledger", "two_component", "verify_intertwining", "wronskian",
    "zero_mode_surface_identity",
]
