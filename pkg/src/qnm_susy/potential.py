"""Finite-support real potentials on the interval [-a, a].

Two storage forms are supported: an ordered list of constant segments tiling
[-a, a], and a uniform sample grid with linear interpolation between points.
Either way the potential is identically zero outside the support interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PotentialError

#: Default node count for derived (sampled) potentials; power of two plus one
#: so that halving-grid convergence checks have a natural refinement chain.
DEFAULT_GRID_POINTS = 4097

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """A real potential supported on [-half_width, +half_width].

    Exactly one of the two forms is populated:

    * piecewise: ``edges`` (len m+1, ascending, first -a, last +a) and
      ``values`` (len m), constant on each cell.  Evaluation uses the
      half-open convention [x_lo, x_hi) with the last cell closed, so that
      the value at a step point is single-valued.
    * sampled: ``sample_x`` (uniform, len n, first -a, last +a) and
      ``sample_v`` (len n), linear interpolation between nodes.
    """

    half_width: float
    edges: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    sample_x: Optional[np.ndarray] = None
    sample_v: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise PotentialError("half_width must be positive and finite")
        if (self.edges is None) == (self.sample_x is None):
            raise PotentialError("exactly one of piecewise/sampled form required")
        a = self.half_width
        if self.edges is not None:
            edges = np.asarray(self.edges, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if edges.ndim != 1 or values.ndim != 1 or len(edges) != len(values) + 1:
                raise PotentialError("piecewise form needs m+1 edges for m values")
            if np.any(np.diff(edges) <= 0):
                raise PotentialError("segment edges must be strictly increasing")
            if abs(edges[0] + a) > _EDGE_TOL * max(1.0, a) or abs(edges[-1] - a) > _EDGE_TOL * max(1.0, a):
                raise PotentialError("segments must tile [-a, a] exactly")
            if not np.all(np.isfinite(values)):
                raise PotentialError("segment values must be finite reals")
            edges = edges.copy()
            edges[0] = -a
            edges[-1] = a
            edges.setflags(write=False)
            values = values.copy()
            values.setflags(write=False)
            object.__setattr__(self, "edges", edges)
            object.__setattr__(self, "values", values)
        else:
            x = np.asarray(self.sample_x, dtype=float)
            v = np.asarray(self.sample_v, dtype=float)
            if x.ndim != 1 or v.shape != x.shape or len(x) < 2:
                raise PotentialError("sampled form needs matching 1-d abscissae and values")
            if np.any(np.diff(x) <= 0):
                raise PotentialError("sample abscissae must be strictly increasing")
            if abs(x[0] + a) > _EDGE_TOL * max(1.0, a) or abs(x[-1] - a) > _EDGE_TOL * max(1.0, a):
                raise PotentialError("samples must span [-a, a] exactly")
            h = np.diff(x)
            if np.max(h) - np.min(h) > 1e-9 * np.max(h):
                raise PotentialError("sample grid must be uniform")
            if not np.all(np.isfinite(v)):
                raise PotentialError("sample values must be finite reals")
            x = x.copy()
            x[0] = -a
            x[-1] = a
            x.setflags(write=False)
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, "sample_x", x)
            object.__setattr__(self, "sample_v", v)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def piecewise(half_width: float, segments: Sequence[Sequence[float]]) -> "PotentialSpec":
        """Build from (x_lo, x_hi, value) triples; they must tile [-a, a]."""
        segs = sorted((float(lo), float(hi), float(v)) for lo, hi, v in segments)
        if not segs:
            raise PotentialError("at least one segment required")
        edges = [segs[0][0]]
        values = []
        for lo, hi, v in segs:
            if abs(lo - edges[-1]) > _EDGE_TOL * max(1.0, half_width):
                raise PotentialError("segments must tile without gaps or overlaps")
            if hi <= lo:
                raise PotentialError("segment with non-positive width")
            edges.append(hi)
            values.append(v)
        return PotentialSpec(half_width=half_width, edges=np.array(edges), values=np.array(values))

    @staticmethod
    def constant(half_width: float, value: float) -> "PotentialSpec":
        """Single constant segment on [-a, a] (a square barrier or well)."""
        return PotentialSpec.piecewise(half_width, [(-half_width, half_width, value)])

    @staticmethod
    def sampled(x: np.ndarray, v: np.ndarray) -> "PotentialSpec":
        x = np.asarray(x, dtype=float)
        return PotentialSpec(half_width=float(x[-1]), sample_x=x, sample_v=np.asarray(v, dtype=float))

    # -- basic queries -------------------------------------------------------

    @property
    def is_piecewise(self) -> bool:
        return self.edges is not None

    def interior_breakpoints(self) -> np.ndarray:
        """Abscissae of interior cell boundaries (piecewise form only)."""
        if not self.is_piecewise:
            return np.empty(0)
        return np.asarray(self.edges[1:-1])

    def standard_grid(self, n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, n)

    def evaluate(self, x):
        """Potential value at x (scalar or array); exactly 0 outside support."""
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        x_arr = np.atleast_1d(x_arr)
        out = np.zeros_like(x_arr)
        a = self.half_width
        inside = (x_arr >= -a) & (x_arr <= a)
        if self.is_piecewise:
            # half-open cells, last cell closed at +a
            idx = np.searchsorted(self.edges, x_arr[inside], side="right") - 1
            idx = np.clip(idx, 0, len(self.values) - 1)
            out[inside] = self.values[idx]
        else:
            out[inside] = np.interp(x_arr[inside], self.sample_x, self.sample_v)
        return float(out[0]) if scalar else out

    def __eq__(self, other):
        if not isinstance(other, PotentialSpec):
            return NotImplemented
        if self.half_width != other.half_width or self.is_piecewise != other.is_piecewise:
            return False
        if self.is_piecewise:
            return np.array_equal(self.edges, other.edges) and np.array_equal(self.values, other.values)
        return np.array_equal(self.sample_x, other.sample_x) and np.array_equal(self.sample_v, other.sample_v)

    def __hash__(self):
        if self.is_piecewise:
            return hash((self.half_width, self.edges.tobytes(), self.values.tobytes()))
        return hash((self.half_width, self.sample_x.tobytes(), self.sample_v.tobytes()))


def evaluate(V: PotentialSpec, x):
    """Module-level alias for ``V.evaluate(x)``."""
    return V.evaluate(x)


def reflect(V: PotentialSpec) -> PotentialSpec:
    """The spatially reversed potential V(-x); an involution."""
    if V.is_piecewise:
        return PotentialSpec(half_width=V.half_width,
                             edges=-V.edges[::-1], values=V.values[::-1])
    return PotentialSpec(half_width=V.half_width,
                         sample_x=-V.sample_x[::-1], sample_v=V.sample_v[::-1])


def perturb(V: PotentialSpec, dV: PotentialSpec) -> PotentialSpec:
    """Pointwise sum V + dV.  The perturbation support must not exceed V's."""
    if dV.half_width > V.half_width * (1 + _EDGE_TOL):
        raise PotentialError("perturbation support exceeds the base support")
    if V.is_piecewise and dV.is_piecewise:
        inner = np.concatenate([np.asarray(V.edges), np.asarray(dV.edges)])
        edges = np.unique(inner)
        edges = edges[(edges >= -V.half_width) & (edges <= V.half_width)]
        mids = 0.5 * (edges[:-1] + edges[1:])
        values = V.evaluate(mids) + dV.evaluate(mids)
        return PotentialSpec(half_width=V.half_width, edges=edges, values=values)
    if not V.is_piecewise and not dV.is_piecewise:
        if len(V.sample_x) == len(dV.sample_x) and np.allclose(V.sample_x, dV.sample_x):
            return PotentialSpec(half_width=V.half_width, sample_x=V.sample_x,
                                 sample_v=V.sample_v + dV.sample_v)
        v = V.sample_v + dV.evaluate(V.sample_x)
        return PotentialSpec(half_width=V.half_width, sample_x=V.sample_x, sample_v=v)
    raise PotentialError("cannot sum potentials of different storage forms")


def load_samples(path) -> PotentialSpec:
    """Read a two-column (x, V) text file in increasing x."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] < 2:
        raise PotentialError(f"{path}: expected two columns (x, V)")
    return PotentialSpec.sampled(data[:, 0], data[:, 1])
