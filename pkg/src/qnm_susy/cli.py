"""Batch front end: parse a config, orchestrate computations, write reports.

One config file describes one run.  All outputs are UTF-8 JSON or CSV in the
chosen output directory; re-running a config byte-reproduces them.  Exit
status: 0 success, 1 computation error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import jordan as jordan_mod
from . import modes as modes_mod
from . import spectrum as spectrum_mod
from . import susy as susy_mod
from .errors import ConfigError, QnmSusyError
from .parallel import resolve_workers
from .potential import DEFAULT_GRID_POINTS, PotentialSpec, load_samples
from .spectrum import Rect, WronskianKind

TASKS = ("spectrum", "generators", "partner", "verify", "jordan", "sweep", "emit-figure")


@dataclass
class RunConfig:
    potential: PotentialSpec
    task: str
    region: Rect
    grid: int = DEFAULT_GRID_POINTS
    kind: WronskianKind = WronskianKind.GAMMA
    tol_root: float = spectrum_mod.TOL_ROOT
    tol_axis: float = spectrum_mod.TOL_AXIS
    output: Path = Path("out")
    generator_space: WronskianKind = WronskianKind.GAMMA
    generator_omega_im: Optional[float] = None
    verify_samples: int = 64
    verify_seed: int = 7
    sweep_segment: int = 0
    sweep_range: tuple = (0.0, 1.0)
    sweep_points: int = 21
    workers: int = 0


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _parse_potential(tbl: dict, base: Path) -> PotentialSpec:
    _require(isinstance(tbl, dict), "missing [potential] table")
    if "segments" in tbl:
        segs = tbl["segments"]
        _require(isinstance(segs, list) and segs, "potential.segments must be a list")
        a = float(tbl.get("half_width", max(abs(float(s[0])) for s in segs)))
        return PotentialSpec.piecewise(a, [(float(s[0]), float(s[1]), float(s[2]))
                                           for s in segs])
    if "samples" in tbl:
        path = Path(tbl["samples"])
        if not path.is_absolute():
            path = base / path
        _require(path.exists(), f"sample file {path} not found")
        return load_samples(path)
    raise ConfigError("potential needs either 'segments' or 'samples'")


def load_config(path: Path, task: Optional[str] = None,
                out_dir: Optional[str] = None, grid: Optional[int] = None,
                tol_root: Optional[float] = None) -> RunConfig:
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    pot = _parse_potential(raw.get("potential"), Path(path).resolve().parent)

    task = task or raw.get("task")
    _require(task in TASKS, f"task must be one of {TASKS}, got {task!r}")

    reg = raw.get("region", {})
    re_lo, re_hi = reg.get("re", (-15.0, 15.0))
    im_lo, im_hi = reg.get("im", (-8.0, 0.5))
    _require(re_lo < re_hi and im_lo < im_hi, "region bounds must satisfy lo < hi")
    region = Rect(float(re_lo), float(re_hi), float(im_lo), float(im_hi))

    n = int(grid if grid is not None else raw.get("grid", DEFAULT_GRID_POINTS))
    _require(n >= 129 and (n - 1) & (n - 2) == 0, "grid must be a power of two plus one, >= 129")

    tols = raw.get("tolerances", {})
    tr = float(tol_root if tol_root is not None else tols.get("tol_root", spectrum_mod.TOL_ROOT))
    ta = float(tols.get("tol_axis", spectrum_mod.TOL_AXIS))
    _require(0 < tr < 1e-2 and 0 < ta < 1e-2, "tolerances out of range")

    try:
        kind = WronskianKind(raw.get("kind", "gamma"))
    except ValueError as exc:
        raise ConfigError(f"unknown wronskian kind: {raw.get('kind')}") from exc

    gen_tbl = raw.get("generator", {})
    try:
        gspace = WronskianKind(gen_tbl.get("space", "gamma"))
    except ValueError as exc:
        raise ConfigError(f"unknown generator space: {gen_tbl.get('space')}") from exc
    g_im = gen_tbl.get("omega_im")

    ver = raw.get("verify", {})
    sw = raw.get("sweep", {})
    sweep_range = tuple(float(x) for x in sw.get("range", (0.0, 1.0)))
    _require(len(sweep_range) == 2 and sweep_range[0] < sweep_range[1],
             "sweep.range must be [lo, hi] with lo < hi")

    out = Path(out_dir if out_dir is not None else raw.get("output", "out"))
    workers = int(raw.get("parallel", {}).get("workers", 0))
    return RunConfig(potential=pot, task=task, region=region, grid=n, kind=kind,
                     tol_root=tr, tol_axis=ta, output=out,
                     generator_space=gspace,
                     generator_omega_im=None if g_im is None else float(g_im),
                     verify_samples=int(ver.get("samples", 64)),
                     verify_seed=int(ver.get("seed", 7)),
                     sweep_segment=int(sw.get("segment", 0)),
                     sweep_range=sweep_range,
                     sweep_points=int(sw.get("points", 21)),
                     workers=workers)


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _select_generator(cfg: RunConfig) -> susy_mod.Generator:
    cands = susy_mod.candidate_generators(cfg.potential)
    cands = [c for c in cands if c.space is cfg.generator_space]
    if not cands:
        raise QnmSusyError(f"no admissible generator in space {cfg.generator_space.value}")
    if cfg.generator_omega_im is not None:
        cands.sort(key=lambda c: abs(c.mode.omega.imag - cfg.generator_omega_im))
    return susy_mod.build_generator(cfg.potential, cands[0].mode)


def _generator_payload(gen: susy_mod.Generator) -> dict:
    return {
        "omega": {"re": gen.omega.real, "im": gen.omega.imag},
        "chi": gen.chi,
        "type": "".join(gen.end_types),
    }


def _task_spectrum(cfg: RunConfig) -> int:
    rep = spectrum_mod.find_roots(cfg.potential, cfg.region, cfg.kind,
                                  tol_root=cfg.tol_root, tol_axis=cfg.tol_axis)
    _write_json(cfg.output / "spectrum.json", rep.to_json_dict())
    return 0


def _task_generators(cfg: RunConfig) -> int:
    cands = susy_mod.candidate_generators(cfg.potential)
    payload = {
        "candidates": [
            {
                "space": c.space.value,
                "omega": {"re": c.mode.omega.real, "im": c.mode.omega.imag},
                "chi": c.chi,
                "type": "".join(c.end_types),
            }
            for c in cands
        ]
    }
    _write_json(cfg.output / "generators.json", payload)
    return 0


def _task_partner(cfg: RunConfig) -> int:
    gen = _select_generator(cfg)
    partner = susy_mod.partner_potential(gen, n_points=cfg.grid)
    ledger = susy_mod.spectral_ledger(gen, partner)
    xs = cfg.potential.standard_grid(cfg.grid)
    vt = partner.evaluate(xs)
    lines = [f"{float(x)!r} {float(v)!r}" for x, v in zip(xs, vt)]
    (cfg.output / "partner_potential.txt").write_text("\n".join(lines) + "\n")
    _write_json(cfg.output / "partner_manifest.json", {
        "generator": _generator_payload(gen),
        "ledger": {"delta_plus": ledger.delta_plus, "delta_minus": ledger.delta_minus},
    })
    return 0


def _task_verify(cfg: RunConfig) -> int:
    gen = _select_generator(cfg)
    partner = susy_mod.partner_potential(gen, n_points=cfg.grid)
    rng = np.random.default_rng(cfg.verify_seed)
    samples = []
    while len(samples) < cfg.verify_samples:
        w = complex(rng.uniform(cfg.region.re_lo, cfg.region.re_hi),
                    rng.uniform(cfg.region.im_lo, cfg.region.im_hi))
        if min(abs(w - 1j * gen.K), abs(w + 1j * gen.K)) > 0.05:
            samples.append(w)
    residual = susy_mod.intertwining_residual(cfg.potential, partner, gen,
                                              samples, cfg.workers)
    _write_json(cfg.output / "verify.json", {
        "generator": _generator_payload(gen),
        "samples": len(samples),
        "max_relative_residual": residual,
    })
    return 0


def _task_jordan(cfg: RunConfig) -> int:
    rep = spectrum_mod.find_roots(cfg.potential, cfg.region, cfg.kind,
                                  tol_root=cfg.tol_root, tol_axis=cfg.tol_axis)
    blocks = jordan_mod.detect_blocks(rep)
    payload = {"blocks": []}
    for omega, order in blocks:
        entry = {"omega": {"re": omega.real, "im": omega.imag}, "M": order}
        if order == 2 and cfg.kind is WronskianKind.GAMMA:
            basis = jordan_mod.build_block_basis(cfg.potential, omega, confirm=False)
            entry["alpha"] = {"re": basis.alpha.real, "im": basis.alpha.imag,
                              "root_choice": "smaller_modulus"}
            entry["block_norm"] = {"re": basis.block_norm.real,
                                   "im": basis.block_norm.imag}
            entry["checks"] = {
                "eq_second_residual": basis.eq_second_residual,
                "psi0_self_pairing": abs(basis.psi0_self_pairing),
                "psi1_self_pairing": abs(basis.psi1_self_pairing),
                "owc_defect_first_order": basis.owc_defect_first_order,
            }
        payload["blocks"].append(entry)
    _write_json(cfg.output / "jordan.json", payload)
    return 0


def _sweep_family(cfg: RunConfig):
    V = cfg.potential
    if not V.is_piecewise:
        raise ConfigError("sweep requires a piecewise potential")
    edges = np.asarray(V.edges)
    values = np.asarray(V.values)
    idx = cfg.sweep_segment
    _require(0 <= idx < len(values), "sweep.segment out of range")

    def family(p: float) -> PotentialSpec:
        v = values.copy()
        v[idx] = p
        return PotentialSpec(half_width=V.half_width, edges=edges, values=v)

    return family


def _task_sweep(cfg: RunConfig) -> int:
    family = _sweep_family(cfg)
    lo, hi = cfg.sweep_range
    rows = ["parameter,gamma_1,gamma_2"]
    for p in np.linspace(lo, hi, cfg.sweep_points):
        roots = spectrum_mod.imaginary_axis_scan(family(float(p)), cfg.kind)
        pair = sorted(roots)[:2]
        cells = [repr(float(p))] + [repr(g) for g in pair]
        while len(cells) < 3:
            cells.append("")
        rows.append(",".join(cells))
    (cfg.output / "sweep_trajectory.csv").write_text("\n".join(rows) + "\n")
    result = spectrum_mod.find_coalescence(family, (lo, hi), cfg.kind)
    _write_json(cfg.output / "sweep_merge.json", {
        "parameter": result.parameter,
        "omega": {"re": result.omega.real, "im": result.omega.imag},
        "multiplicity": result.multiplicity,
        "dJ_abs": result.dJ_abs,
    })
    return 0


def _task_emit_figure(cfg: RunConfig) -> int:
    gen = _select_generator(cfg)
    partner = susy_mod.partner_potential(gen, n_points=cfg.grid)
    xs = cfg.potential.standard_grid(cfg.grid)
    v = cfg.potential.evaluate(xs)
    vt = partner.evaluate(xs)
    rows = ["x,V,V_partner"]
    rows += [f"{float(x)!r},{float(a)!r},{float(b)!r}" for x, a, b in zip(xs, v, vt)]
    (cfg.output / "potential_profile.csv").write_text("\n".join(rows) + "\n")

    rep_v = spectrum_mod.find_roots(cfg.potential, cfg.region, cfg.kind,
                                    tol_root=cfg.tol_root, tol_axis=cfg.tol_axis)
    rep_t = spectrum_mod.find_roots(partner, cfg.region, cfg.kind,
                                    tol_root=cfg.tol_root, tol_axis=cfg.tol_axis)
    match_tol = 1e-5
    rows = ["re,im,class,membership"]
    entries = []
    t_oms = rep_t.omegas() if rep_t.roots else np.empty(0, dtype=complex)
    v_oms = rep_v.omegas() if rep_v.roots else np.empty(0, dtype=complex)
    for r in rep_v.roots:
        near = len(t_oms) and np.min(np.abs(t_oms - r.omega)) < match_tol * (1 + abs(r.omega))
        entries.append((r.omega, r.classification, "both" if near else "base_only"))
    for r in rep_t.roots:
        near = len(v_oms) and np.min(np.abs(v_oms - r.omega)) < match_tol * (1 + abs(r.omega))
        if not near:
            entries.append((r.omega, r.classification, "partner_only"))
    entries.sort(key=lambda e: (e[0].imag, e[0].real))
    for omega, cls, member in entries:
        rows.append(f"{omega.real!r},{omega.imag!r},"
                    f"{cls.value if cls else 'unclassified'},{member}")
    (cfg.output / "spectrum_map.csv").write_text("\n".join(rows) + "\n")
    return 0


_TASK_FN = {
    "spectrum": _task_spectrum,
    "generators": _task_generators,
    "partner": _task_partner,
    "verify": _task_verify,
    "jordan": _task_jordan,
    "sweep": _task_sweep,
    "emit-figure": _task_emit_figure,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured task; returns the process exit status."""
    cfg.output.mkdir(parents=True, exist_ok=True)
    try:
        return _TASK_FN[cfg.task](cfg)
    except QnmSusyError as exc:
        _write_json(cfg.output / "error.json", {
            "error": type(exc).__name__,
            "message": str(exc),
        })
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qnm-susy",
        description="Outgoing-wave spectra of finite-support potentials "
                    "and their SUSY partners")
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", required=True, help="TOML run description")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--grid", type=int, default=None,
                        help="grid point count (power of two plus one)")
    parser.add_argument("--tol-root", type=float, default=None,
                        help="relative root tolerance")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(Path(args.config), task=args.task, out_dir=args.out,
                          grid=args.grid, tol_root=args.tol_root)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status = run(cfg)
    if status != 0:
        print(f"computation failed; see {cfg.output / 'error.json'}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
