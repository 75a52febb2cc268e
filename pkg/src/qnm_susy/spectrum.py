"""Wronskians of the three boundary-condition spaces and their zeros.

The Wronskian of the two one-sided solutions is analytic in omega and
position-independent; its zeros are the eigenvalues of the chosen space.
Zeros are counted by the argument principle on rectangular contours, located
by recursive subdivision plus Newton refinement, and every reported root is
re-verified by a tight contour count that also yields its multiplicity.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import ContourError, QnmSusyError, RootSearchError, UnclassifiableError
from .potential import PotentialSpec
from .propagate import BoundaryKind, state_at

# default thresholds (relative, scale-free)
TOL_ROOT = 1e-10
TOL_AXIS = 1e-8
#: default search window covering the worked examples
DEFAULT_REGION = None  # set below once Rect is defined

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)  # map to [0, 1]
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


class WronskianKind(enum.Enum):
    """Which pair of one-sided solutions forms the Wronskian."""

    GAMMA = "gamma"    # outgoing both sides: zeros are NMs / QNMs
    TTM_L = "ttm_l"    # incoming left, outgoing right: zeros ~ e^{+i omega x}
    TTM_R = "ttm_r"    # outgoing left, incoming right: zeros ~ e^{-i omega x}

    @property
    def left_boundary(self) -> BoundaryKind:
        if self is WronskianKind.TTM_L:
            return BoundaryKind.INCOMING_LEFT
        return BoundaryKind.OUTGOING_LEFT

    @property
    def right_boundary(self) -> BoundaryKind:
        if self is WronskianKind.TTM_R:
            return BoundaryKind.INCOMING_RIGHT
        return BoundaryKind.OUTGOING_RIGHT


class Classification(enum.Enum):
    NM = "NM"
    QNM = "QNM"
    ZERO_MODE = "ZeroMode"
    TTM = "TTM"


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the complex omega plane."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise QnmSusyError("degenerate rectangle")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_lo - pad <= z.real <= self.re_hi + pad
                and self.im_lo - pad <= z.imag <= self.im_hi + pad)

    def corners(self) -> List[complex]:
        return [complex(self.re_lo, self.im_lo), complex(self.re_hi, self.im_lo),
                complex(self.re_hi, self.im_hi), complex(self.re_lo, self.im_hi)]

    @staticmethod
    def around(z: complex, half_size: float) -> "Rect":
        return Rect(z.real - half_size, z.real + half_size,
                    z.imag - half_size, z.imag + half_size)


DEFAULT_REGION = Rect(-15.0, 15.0, -8.0, 0.5)


@dataclass(frozen=True)
class RootRecord:
    omega: complex
    multiplicity: int
    classification: Optional[Classification]
    wronskian_residual: float
    dJ_domega: complex


@dataclass
class SpectrumReport:
    kind: WronskianKind
    region: Rect
    roots: List[RootRecord]
    counting_total: int
    complete: bool = True

    def omegas(self) -> np.ndarray:
        return np.array([r.omega for r in self.roots])

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "contour": {"re": [self.region.re_lo, self.region.re_hi],
                        "im": [self.region.im_lo, self.region.im_hi]},
            "roots": [
                {
                    "re": r.omega.real,
                    "im": r.omega.imag,
                    "multiplicity": r.multiplicity,
                    "class": r.classification.value if r.classification else "unclassified",
                    "residual": r.wronskian_residual,
                }
                for r in self.roots
            ],
            "counting_total": self.counting_total,
            "complete": self.complete,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def wronskian(V: PotentialSpec, omega: complex, kind: WronskianKind = WronskianKind.GAMMA,
              x_match: float = 0.0) -> Tuple[complex, complex, complex]:
    """J = f' g - f g' at the matching abscissa, with dJ/dw and d2J/dw2.

    The derivative values come from the variational systems carried by the
    propagation, combined by the product rule.
    """
    fl = state_at(V, omega, kind.left_boundary, x_match)
    gr = state_at(V, omega, kind.right_boundary, x_match)
    return wronskian_from_states(fl, gr)


def wronskian_from_states(fl: np.ndarray, gr: np.ndarray) -> Tuple[complex, complex, complex]:
    p, dp, u, du, q, dq = fl
    P, DP, U, DU, Q, DQ = gr
    J = dp * P - p * DP
    dJ = du * P + dp * U - u * DP - p * DU
    d2J = dq * P + 2.0 * du * U + dp * Q - q * DP - 2.0 * u * DU - p * DQ
    return J, dJ, d2J


def classify(omega: complex, tol_axis: float = TOL_AXIS) -> Classification:
    """NM (upper half), zero mode (lower imaginary axis) or generic QNM."""
    scale = tol_axis * (1.0 + abs(omega))
    if abs(omega) <= scale:
        raise UnclassifiableError(f"omega={omega} is too close to zero to classify")
    if omega.imag > 0:
        return Classification.NM
    if omega.imag < 0:
        if abs(omega.real) <= scale:
            return Classification.ZERO_MODE
        return Classification.QNM
    raise UnclassifiableError(f"omega={omega} lies on the real axis")


class _WronskianCache:
    """Memoized J evaluations along one search; tracks the evaluation budget."""

    def __init__(self, V: PotentialSpec, kind: WronskianKind, budget: int = 400_000,
                 x_match: float = 0.0):
        self.V = V
        self.kind = kind
        self.x_match = x_match
        self.budget = budget
        self.evals = 0
        self._cache: dict = {}

    def __call__(self, z: complex) -> Tuple[complex, complex, complex]:
        z = complex(z)
        hit = self._cache.get(z)
        if hit is not None:
            return hit
        if self.evals >= self.budget:
            raise RootSearchError("evaluation budget exhausted")
        self.evals += 1
        val = wronskian(self.V, z, self.kind, self.x_match)
        self._cache[z] = val
        return val


def _edge_winding(fn: _WronskianCache, za: complex, zb: complex,
                  floor: float, max_depth: int = 48) -> complex:
    """Integral of J'/J along the segment [za, zb].

    Panels are split until the change of log J across each panel is safely
    below pi/2 in phase and e^2 in magnitude.  Three triggers guard against
    phase aliasing: the wrapped endpoint phase jump, an endpoint estimate
    of the logarithmic derivative times the panel width, and the computed
    panel integral itself (which is Delta log J and therefore reveals any
    full winding the endpoints cannot see).
    """

    def gl_panel(za, zb):
        total = 0.0 + 0.0j
        for t, wgt in zip(_GL_NODES, _GL_WEIGHTS):
            z = za + t * (zb - za)
            J, dJ, _ = fn(z)
            if abs(J) < floor:
                raise ContourError(f"|J| below safety floor at {z}: root on contour?")
            total += wgt * dJ / J
        return total * (zb - za)

    def recurse(za, Ja, dJa, zb, Jb, dJb, depth):
        if abs(Ja) < floor or abs(Jb) < floor:
            raise ContourError(f"|J| below safety floor near {za}: root on contour?")
        ratio = Jb / Ja
        width = abs(zb - za)
        rate = max(abs(dJa / Ja), abs(dJb / Jb)) * width
        need_split = (abs(np.angle(ratio)) > 0.5 * math.pi
                      or abs(math.log(abs(ratio))) > 2.0
                      or rate > 1.5)
        val = None
        if not need_split:
            val = gl_panel(za, zb)
            if abs(val.imag) > 0.5 * math.pi + 0.1 or abs(val.real) > 2.2:
                need_split = True
        if need_split:
            if depth >= max_depth:
                raise ContourError("contour subdivision limit reached")
            zm = 0.5 * (za + zb)
            Jm, dJm, _ = fn(zm)
            return (recurse(za, Ja, dJa, zm, Jm, dJm, depth + 1)
                    + recurse(zm, Jm, dJm, zb, Jb, dJb, depth + 1))
        return val

    Ja, dJa, _ = fn(za)
    Jb, dJb, _ = fn(zb)
    return recurse(za, Ja, dJa, zb, Jb, dJb, 0)


def _contour_count(fn: _WronskianCache, rect: Rect,
                   panels_per_edge: int = 4) -> Tuple[int, float]:
    """Winding number of J around 0 along the rectangle boundary (ccw)."""
    corners = rect.corners()
    samples = []
    for i in range(4):
        za, zb = corners[i], corners[(i + 1) % 4]
        for k in range(panels_per_edge):
            samples.append(za + (k / panels_per_edge) * (zb - za))
    mags = np.array([abs(fn(z)[0]) for z in samples])
    scale = float(np.median(mags))
    if scale == 0.0:
        raise ContourError("Wronskian vanished on the contour")
    floor = 1e-13 * scale
    total = 0.0 + 0.0j
    for i in range(4):
        za, zb = corners[i], corners[(i + 1) % 4]
        for k in range(panels_per_edge):
            z0 = za + (k / panels_per_edge) * (zb - za)
            z1 = za + ((k + 1) / panels_per_edge) * (zb - za)
            total += _edge_winding(fn, z0, z1, floor)
    n_float = (total / (2j * math.pi)).real
    n = int(round(n_float))
    if abs(n_float - n) > 0.05:
        raise ContourError(f"winding integral {n_float:.4f} not close to an integer")
    return n, n_float


def count_zeros(V: PotentialSpec, region: Rect,
                kind: WronskianKind = WronskianKind.GAMMA,
                budget: int = 200_000) -> int:
    """Number of Wronskian zeros inside the rectangle, by the argument
    principle on a winding +1 contour."""
    fn = _WronskianCache(V, kind, budget)
    n, _ = _contour_count(fn, region)
    return n


# -- root search -------------------------------------------------------------


def _newton(fn: _WronskianCache, z0: complex, tol_abs: float,
            region: Rect, max_iter: int = 60) -> Optional[Tuple[complex, complex]]:
    """Newton on J; returns (root, dJ) or None."""
    z = complex(z0)
    for _ in range(max_iter):
        J, dJ, _ = fn(z)
        if abs(J) <= tol_abs:
            return z, dJ
        if dJ == 0 or not np.isfinite(abs(dJ)):
            return None
        step = J / dJ
        z = z - step
        if not region.contains(z, pad=0.5 * region.diameter):
            return None
        if abs(step) < 1e-16 * (1.0 + abs(z)):
            J, dJ, _ = fn(z)
            if abs(J) <= tol_abs:
                return z, dJ
            return None
    J, dJ, _ = fn(z)
    if abs(J) <= tol_abs:
        return z, dJ
    return None


def _newton_on_derivative(fn: _WronskianCache, z0: complex,
                          max_iter: int = 60) -> Optional[complex]:
    """Newton on dJ/dw; converges to a stationary point of J (double zeros)."""
    z = complex(z0)
    for _ in range(max_iter):
        _, dJ, d2J = fn(z)
        if d2J == 0:
            return None
        step = dJ / d2J
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            return z
    return z


_SPLIT_FRACTIONS = [(0.5, 0.5), (0.53, 0.48), (0.46, 0.55), (0.515, 0.52)]


def _split(rect: Rect, fx: float, fy: float) -> List[Rect]:
    xm = rect.re_lo + fx * (rect.re_hi - rect.re_lo)
    ym = rect.im_lo + fy * (rect.im_hi - rect.im_lo)
    return [Rect(rect.re_lo, xm, rect.im_lo, ym), Rect(xm, rect.re_hi, rect.im_lo, ym),
            Rect(rect.re_lo, xm, ym, rect.im_hi), Rect(xm, rect.re_hi, ym, rect.im_hi)]


def find_roots(V: PotentialSpec, region: Rect,
               kind: WronskianKind = WronskianKind.GAMMA,
               budget: int = 400_000,
               tol_root: float = TOL_ROOT,
               tol_axis: float = TOL_AXIS,
               merge_threshold: float = 1e-4) -> SpectrumReport:
    """Locate all Wronskian zeros in the region.

    Recursive quadrisection isolates cells holding at most one zero (counted
    by the argument principle), Newton refines each, and a tight contour
    around every accepted root re-verifies its multiplicity.  Cells smaller
    than ``merge_threshold`` (times the local frequency scale) that still
    hold several zeros are treated as one multiple root and refined by
    Newton on dJ/dw.
    """
    fn = _WronskianCache(V, kind, budget)
    complete = True
    try:
        total, _ = _contour_count(fn, region)
    except RootSearchError:
        raise
    # scale for the absolute root tolerance: median |J| on the region boundary
    corners = region.corners()
    probe = []
    for i in range(4):
        za, zb = corners[i], corners[(i + 1) % 4]
        probe.extend(za + t * (zb - za) for t in np.linspace(0.0, 1.0, 9)[:-1])
    scale_J = float(np.median([abs(fn(z)[0]) for z in probe]))
    tol_abs = tol_root * scale_J

    found: List[Tuple[complex, int, complex]] = []  # (omega, multiplicity, dJ)

    def is_duplicate(z: complex) -> bool:
        return any(abs(z - z0) <= 1e-7 * (1.0 + abs(z0)) for z0, _, _ in found)

    def count_cell(cell: Rect) -> int:
        n, _ = _contour_count(fn, cell)
        return n

    stack: List[Tuple[Rect, int]] = [(region, total)]
    try:
        while stack:
            cell, n = stack.pop()
            if n == 0:
                continue
            small = cell.diameter <= merge_threshold * (1.0 + abs(cell.center))
            if n >= 2 and small:
                z = _newton_on_derivative(fn, cell.center)
                if z is None or not cell.contains(z, pad=cell.diameter):
                    z = cell.center
                J, dJ, _ = fn(z)
                if not is_duplicate(z):
                    found.append((z, n, dJ))
                continue
            if n == 1:
                res = _newton(fn, cell.center, tol_abs, region)
                if res is not None:
                    z, dJ = res
                    inside = cell.contains(z, pad=1e-9 * (1.0 + abs(z)))
                    if inside:
                        if not is_duplicate(z):
                            found.append((z, 1, dJ))
                        # else: this cell's zero was already recorded
                        continue
                # Newton escaped the cell: subdivide to corner the root
            for fx, fy in _SPLIT_FRACTIONS:
                try:
                    children = _split(cell, fx, fy)
                    counts = [count_cell(c) for c in children]
                    break
                except ContourError:
                    continue
            else:
                raise ContourError(f"could not split cell around {cell.center}")
            for c, cn in zip(children, counts):
                if cn:
                    stack.append((c, cn))
    except RootSearchError:
        complete = False

    # tight-contour verification and classification
    records: List[RootRecord] = []
    omegas = [z for z, _, _ in found]
    for z, n, dJ in found:
        others = [abs(z - z2) for z2 in omegas if z2 is not z and abs(z - z2) > 0]
        r_max = 0.45 * min(others) if others else 1e-3 * (1.0 + abs(z))
        r = min(max(1e-7 * (1.0 + abs(z)), 1e-5), r_max, 1e-3 * (1.0 + abs(z)))
        mult = n
        try:
            mult, _ = _contour_count(fn, Rect.around(z, r))
        except (ContourError, RootSearchError):
            pass
        if mult <= 0:
            mult = n
        if kind is WronskianKind.GAMMA:
            try:
                cls = classify(z, tol_axis)
            except UnclassifiableError:
                cls = None
        else:
            cls = Classification.TTM
        J_here = fn(z)[0]
        records.append(RootRecord(omega=z, multiplicity=mult, classification=cls,
                                  wronskian_residual=abs(J_here) / scale_J,
                                  dJ_domega=dJ))
    records.sort(key=lambda r: (r.omega.imag, r.omega.real))
    if sum(r.multiplicity for r in records) != total:
        complete = False
    return SpectrumReport(kind=kind, region=region, roots=records,
                          counting_total=total, complete=complete)


def imaginary_axis_scan(V: PotentialSpec, kind: WronskianKind = WronskianKind.GAMMA,
                        gamma_range: Tuple[float, float] = (1e-2, 8.0),
                        samples: int = 241, upper: bool = False) -> List[float]:
    """Roots of J on the imaginary axis (lower half by default).

    For a real potential J(-i gamma) is real (asserted); sign changes are
    bracketed on a uniform scan and refined by bisection.  Returns the
    decay rates gamma of the located roots, ascending; with ``upper`` the
    scan runs over omega = +i gamma (bound-state frequencies).
    """
    lo, hi = gamma_range
    if not (0 < lo < hi):
        raise QnmSusyError("gamma_range must satisfy 0 < lo < hi")
    sgn = 1j if upper else -1j
    gammas = np.linspace(lo, hi, samples)
    vals = []
    for g in gammas:
        J, _, _ = wronskian(V, sgn * g, kind)
        if abs(J.imag) > 1e-10 * max(abs(J), 1e-300):
            raise QnmSusyError(f"J not real on the imaginary axis at gamma={g}: {J}")
        vals.append(J.real)
    vals = np.array(vals)

    def jr(g: float) -> float:
        return wronskian(V, sgn * g, kind)[0].real

    roots = []
    for i in range(len(gammas) - 1):
        if vals[i] == 0.0:
            roots.append(float(gammas[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(float(brentq(jr, gammas[i], gammas[i + 1], xtol=1e-14, rtol=8.9e-16)))
    if vals[-1] == 0.0:
        roots.append(float(gammas[-1]))
    return roots


@dataclass(frozen=True)
class CoalescenceResult:
    parameter: float
    omega: complex
    multiplicity: int
    dJ_abs: float
    d2J: complex


def find_coalescence(family: Callable[[float], PotentialSpec],
                     param_range: Tuple[float, float],
                     kind: WronskianKind = WronskianKind.GAMMA,
                     gamma_range: Tuple[float, float] = (1e-2, 8.0),
                     samples: int = 241) -> CoalescenceResult:
    """Tune a family parameter until two imaginary-axis roots merge.

    Between the two roots J(-i gamma) has an interior stationary point; the
    stationary value crosses zero exactly at the merge, so the parameter is
    bisected on that value.  The merged root is verified by a tight contour
    count of 2.
    """
    p_lo, p_hi = param_range

    roots0 = imaginary_axis_scan(family(p_lo), kind, gamma_range, samples)
    if len(roots0) < 2:
        raise RootSearchError("family must start with two separated imaginary-axis roots")
    if len(roots0) == 2:
        g1, g2 = roots0
    else:
        gaps = np.diff(roots0)
        i = int(np.argmin(gaps))
        g1, g2 = roots0[i], roots0[i + 1]

    bracket = [g1, g2]

    def stationary_gamma(V: PotentialSpec) -> float:
        def slope(g: float) -> float:
            # J(-i gamma) is real; its gamma-derivative is Im dJ/dw there
            _, dJ, _ = wronskian(V, -1j * g, kind)
            return dJ.imag

        blo, bhi = bracket
        slo, shi = slope(blo), slope(bhi)
        width = bhi - blo
        tries = 0
        while slo * shi > 0 and tries < 60:
            blo = max(1e-6, blo - 0.5 * width)
            bhi = bhi + 0.5 * width
            slo, shi = slope(blo), slope(bhi)
            tries += 1
        if slo * shi > 0:
            raise RootSearchError("lost the stationary point of J on the axis")
        g = brentq(slope, blo, bhi, xtol=1e-14, rtol=8.9e-16)
        spread = max(0.05 * (bracket[1] - bracket[0]), 1e-4)
        bracket[0] = max(1e-6, g - max(spread, g - bracket[0]))
        bracket[1] = g + max(spread, bracket[1] - g)
        return g

    def stationary_value(p: float) -> float:
        V = family(p)
        g = stationary_gamma(V)
        return wronskian(V, -1j * g, kind)[0].real

    m_lo = stationary_value(p_lo)
    m_hi = stationary_value(p_hi)
    if m_lo * m_hi > 0:
        raise RootSearchError(
            f"roots do not merge inside the parameter range [{p_lo}, {p_hi}]")
    p_star = brentq(stationary_value, p_lo, p_hi, xtol=1e-14, rtol=8.9e-16)
    V_star = family(p_star)
    g_star = stationary_gamma(V_star)
    omega_star = -1j * g_star
    _, dJ, d2J = wronskian(V_star, omega_star, kind)
    mult = count_zeros(V_star, Rect.around(omega_star, 1e-2 * (1.0 + g_star)), kind)
    if mult != 2:
        raise RootSearchError(f"merged root has contour count {mult}, expected 2")
    return CoalescenceResult(parameter=float(p_star), omega=omega_star,
                             multiplicity=2, dJ_abs=float(abs(dJ)), d2J=d2J)
