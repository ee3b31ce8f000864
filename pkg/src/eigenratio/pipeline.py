"""Fixture registry, per-pair analysis and JSON/CSV report assembly."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from . import __version__, fem, inequality as ineq, meshio
from .mesh import (SurfaceMesh, TetMesh, center_at_area_centroid, gen_ball_tet, gen_cube_surface,
                   gen_cube_tet, gen_icosphere, gen_solid_torus_tet, gen_torus)
from .spectra import SurfaceSpectrum, VolumeSpectrum, dirichlet_spectrum, surface_spectrum


def data_path(name: str):
    return resources.files("eigenratio") / "data" / name


@dataclass(frozen=True)
class Fixture:
    name: str
    surface: Callable[[], SurfaceMesh]
    solid: Callable[[], TetMesh] | None = None
    params: dict = field(default_factory=dict)


def _ball_pair(refinement):
    def surface():
        return gen_ball_tet(1.0, refinement).boundary_surface()
    return surface


FIXTURES = {
    "sphere-s3": Fixture("sphere-s3", lambda: gen_icosphere(1.0, 3), lambda: gen_ball_tet(1.0, 4),
                         dict(radius=1.0, subdivisions=3, ball_refinement=4)),
    "sphere-s4": Fixture("sphere-s4", lambda: gen_icosphere(1.0, 4), lambda: gen_ball_tet(1.0, 4),
                         dict(radius=1.0, subdivisions=4, ball_refinement=4)),
    "sphere-s5": Fixture("sphere-s5", lambda: gen_icosphere(1.0, 5), lambda: gen_ball_tet(1.0, 4),
                         dict(radius=1.0, subdivisions=5, ball_refinement=4)),
    "ball": Fixture("ball", _ball_pair(4), lambda: gen_ball_tet(1.0, 4),
                    dict(radius=1.0, refinement=4)),
    "cube": Fixture("cube", lambda: gen_cube_surface(1.0, 16), lambda: gen_cube_tet(1.0, 16),
                    dict(edge=1.0, n=16)),
    "torus": Fixture("torus", lambda: gen_torus(2.0, 1.0, 64, 32),
                     lambda: gen_solid_torus_tet(2.0, 1.0, 48, 6, 24),
                     dict(major_radius=2.0, minor_radius=1.0, nu=64, nv=32, solid=(48, 6, 24))),
    "genus2": Fixture("genus2", lambda: meshio.load_surface(data_path("genus2_plate.off")),
                      lambda: meshio.load_tet(data_path("genus2_plate.node")),
                      dict(file="genus2_plate")),
}

DEFAULT_SUITE = ["sphere-s3", "sphere-s4", "sphere-s5", "cube", "torus", "ball"]


@dataclass
class PairAnalysis:
    """Everything computed for one surface, optionally with its solid."""

    name: str
    surface_mesh: SurfaceMesh
    surface: SurfaceSpectrum
    solid_mesh: TetMesh | None = None
    volume: VolumeSpectrum | None = None
    checks: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    c_emp: float = 0.0
    c_emp_k: int = 1
    k_g: dict | None = None


def analyze(surface_mesh: SurfaceMesh, solid_mesh: TetMesh | None = None, k: int = 10,
            C: float | None = None, tolerance: float = 1e-8, max_iterations: int = 200,
            name: str = "input", verbose: bool = False, dirichlet_lumped: bool = False) -> PairAnalysis:
    """Run every applicable check on a surface and, when given, its solid.

    The Dirichlet side defaults to the consistent mass matrix: conforming P1
    with consistent mass is a Ritz method, so its eigenvalues bound the exact
    ones from above and lower-bound checks such as Faber-Krahn cannot fail
    through discretization error alone.
    """
    surface = surface_spectrum(surface_mesh, k, tolerance=tolerance,
                               max_iterations=max_iterations, verbose=verbose)
    summary = surface.summary
    g = summary.genus
    lam1 = surface[1]
    out = PairAnalysis(name, surface_mesh, surface, solid_mesh)
    checks = out.checks
    checks.append(ineq.check_reilly(summary.area, lam1, summary.volume))
    checks.append(ineq.check_yang_yau(lam1, summary.area, g))
    checks.append(ineq.check_isoperimetric(summary.area, summary.volume))
    centered = center_at_area_centroid(surface_mesh)
    checks.append(ineq.check_rayleigh_trace(
        centered, fem.assemble_surface_stiffness(centered), fem.assemble_surface_mass(centered), lam1))
    out.c_emp, out.c_emp_k = ineq.korevaar_envelope(surface.eigenvalues, summary.area, g)

    if solid_mesh is None:
        for name_ in ("faber_krahn", "li_yau_pointwise", "li_yau_average", "polya_dirichlet",
                      "genus0_optimal", "main_ratio"):
            out.skipped.append(dict(name=name_, reason="no solid provided"))
        return out

    vol = dirichlet_spectrum(solid_mesh, k, lumped=dirichlet_lumped, tolerance=tolerance,
                             max_iterations=max_iterations, verbose=verbose)
    out.volume = vol
    checks.append(ineq.check_faber_krahn(vol[1], vol.volume))
    for j in range(1, len(vol.eigenvalues) + 1):
        checks.append(ineq.check_li_yau_pointwise(vol[j], j, vol.volume))
    checks.append(ineq.check_li_yau_average(vol.eigenvalues, vol.volume))
    for j in range(1, len(vol.eigenvalues) + 1):
        checks.append(ineq.check_polya_dirichlet(vol[j], j, vol.volume))
    if g == 0:
        checks.append(ineq.check_genus0_optimal(vol[1], lam1, g))
    else:
        out.skipped.append(dict(name="genus0_optimal", reason=f"genus {g} > 0"))
    kmax = min(len(surface.eigenvalues), len(vol.eigenvalues))
    out.ratios = [ineq.main_ratio(surface, vol, j) for j in range(1, kmax + 1)]
    if C is not None:
        out.k_g = dict(C=C, genus=g, value=ineq.k_g(C, g))
        for j in range(1, kmax + 1):
            checks.extend(ineq.proof_chain(surface, vol, j, g, C))
    return out


def _check_dict(r: ineq.InequalityReport, gap_threshold: float, fixture: str) -> dict:
    d = r.as_dict()
    d["within_discretization"] = r.within_discretization
    d["near_equality"] = r.near_equality(gap_threshold)
    d["fixture"] = fixture
    return d


def _finite(x):
    return x if math.isfinite(x) else None


def _clean(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _meta(config: dict, mesh_hash, timestamp: bool) -> dict:
    return dict(
        version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat() if timestamp else None,
        config=config,
        mesh_hash=mesh_hash,
    )


def _spectra_block(analyses) -> dict:
    surface, dirichlet, residuals = [], [], []
    for a in analyses:
        surface.append(dict(fixture=a.name, zero_mode=a.surface.zero_value,
                            eigenvalues=a.surface.eigenvalues.tolist()))
        residuals += [dict(fixture=a.name, spectrum="surface", index=i, residual=float(r))
                      for i, r in enumerate(a.surface.residuals, 1)]
        if a.volume is not None:
            dirichlet.append(dict(fixture=a.name, eigenvalues=a.volume.eigenvalues.tolist()))
            residuals += [dict(fixture=a.name, spectrum="dirichlet", index=i, residual=float(r))
                          for i, r in enumerate(a.volume.residuals, 1)]
    return dict(surface=surface, dirichlet=dirichlet, residuals=residuals)


def _geometry(a: PairAnalysis) -> dict:
    g = a.surface.summary.as_dict()
    g["area_centroid"] = list(g["area_centroid"])
    g["fixture"] = a.name
    if a.volume is not None:
        g["solid_volume"] = a.volume.volume
        g["solid_boundary_area"] = a.volume.boundary_area
    return g


def build_report(analyses: list[PairAnalysis], config: dict, gap_threshold: float = ineq.EQUALITY_GAP_THRESHOLD,
                 timestamp: bool = True) -> dict:
    """JSON-ready report; a single analysis gives an object-valued ``geometry``."""
    hashes = {}
    for a in analyses:
        hashes[a.name] = a.surface_mesh.digest() + (":" + a.solid_mesh.digest() if a.solid_mesh is not None else "")
    checks, ratios, skipped = [], [], []
    for a in analyses:
        checks += [_check_dict(r, gap_threshold, a.name) for r in a.checks]
        ratios += [dict(r.as_dict(), fixture=a.name) for r in a.ratios]
        skipped += [dict(s, fixture=a.name) for s in a.skipped]
    per_fixture = [dict(fixture=a.name, genus=a.surface.summary.genus, c_emp=a.c_emp, k=a.c_emp_k)
                   for a in analyses]
    c_max = max(p["c_emp"] for p in per_fixture)
    korevaar = dict(c_emp_max=c_max, k_0_at_c_emp_max=ineq.k_g(c_max, 0), per_fixture=per_fixture)
    single = len(analyses) == 1
    rep = dict(
        meta=_meta(config, hashes[analyses[0].name] if single else hashes, timestamp),
        geometry=_geometry(analyses[0]) if single else [_geometry(a) for a in analyses],
        spectra=_spectra_block(analyses),
        checks=checks,
        ratio=ratios,
        korevaar=korevaar,
        skipped=skipped,
    )
    k_gs = [dict(a.k_g, fixture=a.name) for a in analyses if a.k_g is not None]
    if k_gs:
        rep["k_g"] = k_gs
    return _clean(rep)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(data_path("report_schema.json").read_text())


SWEEP_COLUMNS = ["fixture", "genus", "k", "lambda_k", "lambda_kD", "ratio", "c_emp",
                 "reilly_margin", "yang_yau_margin", "isoperimetric_margin", "rayleigh_trace_margin",
                 "faber_krahn_margin", "li_yau_pointwise_margin", "polya_dirichlet_margin",
                 "genus0_optimal_margin"]


def sweep_rows(analyses: list[PairAnalysis]) -> list[dict]:
    rows = []
    for a in analyses:
        g = a.surface.summary.genus
        area = a.surface.summary.area
        by_name = {}
        for r in a.checks:
            key = r.name if "k" not in r.inputs else (r.name, r.inputs["k"])
            by_name[key] = r.margin
        kmax = len(a.surface.eigenvalues) if a.volume is None else len(a.ratios)
        for j in range(1, kmax + 1):
            lam = a.surface[j]
            row = dict(fixture=a.name, genus=g, k=j, lambda_k=lam,
                       lambda_kD=a.volume[j] if a.volume is not None else None,
                       ratio=a.ratios[j - 1].ratio if a.ratios else None,
                       c_emp=ineq.korevaar_estimate(lam, j, area, g))
            for name in ("reilly", "yang_yau", "isoperimetric", "rayleigh_trace", "faber_krahn",
                         "genus0_optimal"):
                row[f"{name}_margin"] = by_name.get(name)
            for name in ("li_yau_pointwise", "polya_dirichlet"):
                row[f"{name}_margin"] = by_name.get((name, j))
            rows.append(row)
    return rows


def rows_csv(rows: list[dict], columns=SWEEP_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else (repr(float(row[c])) if isinstance(row[c], float) else row[c])
                    for c in columns])
    return buf.getvalue()


def run_sweep(names: list[str], k: int = 5, C: float | None = None, tolerance: float = 1e-8,
              max_iterations: int = 200, verbose: bool = False) -> list[PairAnalysis]:
    """Analyze fixtures in list order; rows keep that order."""
    unknown = [n for n in names if n not in FIXTURES]
    if unknown:
        raise KeyError(f"unknown fixtures: {', '.join(unknown)}")
    out = []
    for n in names:
        fx = FIXTURES[n]
        solid = fx.solid() if fx.solid is not None else None
        out.append(analyze(fx.surface(), solid, k=k, C=C, tolerance=tolerance,
                           max_iterations=max_iterations, name=n, verbose=verbose))
    return out
