"""Command-line driver: ``eigenratio {gen,spectrum,dirichlet,check,sweep}``.

Exit codes: 0 success, 1 validation or computation error, 2 usage error.
Options may also come from a flat ``key=value`` file given by ``--config``;
flags on the command line win.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import meshio, pipeline
from .eigen import EigenError
from .inequality import EQUALITY_GAP_THRESHOLD, InequalityError
from .mesh import (MeshError, gen_ball_tet, gen_cube_surface, gen_cube_tet, gen_icosphere,
                   gen_solid_torus_tet, gen_torus)
from .spectra import dirichlet_spectrum, spectrum_csv, surface_spectrum

SURFACE_SHAPES = ("icosphere", "torus", "cube")
SOLID_SHAPES = ("ball", "cube-solid", "solid-torus")

log = logging.getLogger("eigenratio")


@dataclass
class RunConfig:
    command: str
    source: dict = field(default_factory=dict)
    k: int = 10
    tolerance: float = 1e-8
    max_iterations: int = 200
    out: str | None = None
    fmt: str = "json"
    C: float | None = None
    gap_threshold: float = EQUALITY_GAP_THRESHOLD
    verbose: bool = False
    timestamp: bool = True

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("timestamp")
        return d


def read_config_file(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment; dashes map to underscores."""
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _add_common(p, k_default=10, fmt_default="json"):
    p.add_argument("--config", help="key=value file, overridden by flags")
    p.add_argument("--k", type=int, default=k_default, help="number of eigenvalues")
    p.add_argument("--tol", type=float, default=1e-8, help="relative residual tolerance")
    p.add_argument("--max-iter", type=int, default=200, help="Lanczos block steps")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
    p.add_argument("--C", type=float, default=None, help="candidate universal constant")
    p.add_argument("--gap-threshold", type=float, default=EQUALITY_GAP_THRESHOLD)
    p.add_argument("--no-timestamp", action="store_true", help="leave meta.timestamp null")
    p.add_argument("--verbose", "-v", action="store_true")


def _add_shape_params(p):
    g = p.add_argument_group("generator parameters")
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--subdiv", type=int, default=3)
    g.add_argument("--major", type=float, default=2.0)
    g.add_argument("--minor", type=float, default=1.0)
    g.add_argument("--nu", type=int, default=32)
    g.add_argument("--nv", type=int, default=16)
    g.add_argument("--nr", type=int, default=4)
    g.add_argument("--edge", type=float, default=1.0)
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--refine", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenratio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated mesh")
    p.add_argument("--config")
    p.add_argument("--shape", required=True, choices=SURFACE_SHAPES + SOLID_SHAPES)
    p.add_argument("--out", required=True, help="surface: .off/.obj file; solid: base path for .node/.ele")
    p.add_argument("--verbose", "-v", action="store_true")
    _add_shape_params(p)

    p = sub.add_parser("spectrum", help="Laplace-Beltrami spectrum of a closed surface")
    p.add_argument("--in", dest="input", help="OFF or OBJ file")
    p.add_argument("--shape", choices=SURFACE_SHAPES)
    p.add_argument("--consistent", action="store_true", help="consistent instead of lumped mass")
    _add_common(p, fmt_default="csv")
    _add_shape_params(p)

    p = sub.add_parser("dirichlet", help="Dirichlet spectrum of a tetrahedral solid")
    p.add_argument("--in", dest="input", help="node/ele base path")
    p.add_argument("--shape", choices=SOLID_SHAPES)
    p.add_argument("--consistent", action="store_true", help="consistent instead of lumped mass")
    _add_common(p, fmt_default="csv")
    _add_shape_params(p)

    p = sub.add_parser("check", help="run every applicable inequality")
    p.add_argument("--fixture", choices=sorted(pipeline.FIXTURES))
    p.add_argument("--in", dest="input", help="surface file")
    p.add_argument("--shape", choices=SURFACE_SHAPES)
    p.add_argument("--solid", help="node/ele base path of the enclosed solid")
    _add_common(p)
    _add_shape_params(p)

    p = sub.add_parser("sweep", help="ratio and margin table over a fixture list")
    p.add_argument("--fixtures", default=",".join(pipeline.DEFAULT_SUITE),
                   help=f"comma-separated subset of: {', '.join(sorted(pipeline.FIXTURES))}")
    _add_common(p, k_default=5)
    return parser


def _surface_from_shape(a):
    if a.shape == "icosphere":
        return gen_icosphere(a.radius, a.subdiv)
    if a.shape == "torus":
        return gen_torus(a.major, a.minor, a.nu, a.nv)
    return gen_cube_surface(a.edge, a.n)


def _solid_from_shape(a):
    if a.shape == "ball":
        return gen_ball_tet(a.radius, a.refine)
    if a.shape == "cube-solid":
        return gen_cube_tet(a.edge, a.n)
    return gen_solid_torus_tet(a.major, a.minor, a.nu, a.nr, a.nv)


def _shape_params(a) -> dict:
    keys = ("radius", "subdiv", "major", "minor", "nu", "nv", "nr", "edge", "n", "refine")
    return {k: getattr(a, k) for k in keys if hasattr(a, k)}


def _config(a) -> RunConfig:
    if getattr(a, "fixture", None):
        source = dict(fixture=a.fixture)
    elif getattr(a, "input", None):
        source = dict(path=a.input)
    elif getattr(a, "shape", None):
        source = dict(shape=a.shape, **_shape_params(a))
    elif a.command == "sweep":
        source = dict(fixtures=[s for s in a.fixtures.split(",") if s.strip()])
    else:
        source = {}
    if getattr(a, "solid", None):
        source["solid"] = a.solid
    return RunConfig(
        command=a.command, source=source, k=a.k, tolerance=a.tol, max_iterations=a.max_iter,
        out=a.out, fmt=a.format, C=a.C, gap_threshold=a.gap_threshold, verbose=a.verbose,
        timestamp=not a.no_timestamp,
    )


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(a) -> int:
    if a.shape in SURFACE_SHAPES:
        mesh = _surface_from_shape(a)
        meshio.save_surface(mesh, a.out)
        log.info("wrote %d vertices, %d faces to %s", mesh.n_vertices, mesh.n_faces, a.out)
    else:
        tet = _solid_from_shape(a)
        meshio.save_tet(tet, a.out)
        log.info("wrote %d vertices, %d tets to %s.node/.ele", tet.n_vertices, len(tet.tets), a.out)
    return 0


def cmd_spectrum(a, cfg: RunConfig) -> int:
    mesh = meshio.load_surface(a.input) if a.input else _surface_from_shape(a)
    spec = surface_spectrum(mesh, cfg.k, lumped=not a.consistent, tolerance=cfg.tolerance,
                            max_iterations=cfg.max_iterations, verbose=cfg.verbose)
    if cfg.fmt == "csv":
        values = [spec.zero_value, *spec.eigenvalues]
        residuals = [spec.zero_residual, *spec.residuals]
        _emit(spectrum_csv(values, residuals, start=0), cfg.out)
        return 0
    report = pipeline._clean(dict(
        meta=pipeline._meta(cfg.echo(), mesh.digest(), cfg.timestamp),
        geometry=dict(spec.summary.as_dict(), area_centroid=list(spec.summary.area_centroid)),
        spectra=dict(surface=[dict(fixture="input", zero_mode=spec.zero_value,
                                   eigenvalues=spec.eigenvalues.tolist())],
                     dirichlet=[],
                     residuals=[dict(fixture="input", spectrum="surface", index=i, residual=float(r))
                                for i, r in enumerate(spec.residuals, 1)]),
        checks=[], ratio=[],
    ))
    _emit(pipeline.dumps(report), cfg.out)
    return 0


def cmd_dirichlet(a, cfg: RunConfig) -> int:
    tet = meshio.load_tet(a.input) if a.input else _solid_from_shape(a)
    spec = dirichlet_spectrum(tet, cfg.k, lumped=not a.consistent, tolerance=cfg.tolerance,
                              max_iterations=cfg.max_iterations, verbose=cfg.verbose)
    if cfg.fmt == "csv":
        _emit(spectrum_csv(spec.eigenvalues, spec.residuals), cfg.out)
        return 0
    report = pipeline._clean(dict(
        meta=pipeline._meta(cfg.echo(), tet.digest(), cfg.timestamp),
        geometry=dict(volume=spec.volume, boundary_area=spec.boundary_area),
        spectra=dict(surface=[], dirichlet=[dict(fixture="input", eigenvalues=spec.eigenvalues.tolist())],
                     residuals=[dict(fixture="input", spectrum="dirichlet", index=i, residual=float(r))
                                for i, r in enumerate(spec.residuals, 1)]),
        checks=[], ratio=[],
    ))
    _emit(pipeline.dumps(report), cfg.out)
    return 0


def cmd_check(a, cfg: RunConfig) -> int:
    if a.fixture:
        fx = pipeline.FIXTURES[a.fixture]
        surface, name = fx.surface(), a.fixture
        solid = fx.solid() if fx.solid is not None else None
    else:
        surface = meshio.load_surface(a.input) if a.input else _surface_from_shape(a)
        solid, name = None, "input"
    if a.solid:
        solid = meshio.load_tet(a.solid)
    analysis = pipeline.analyze(surface, solid, k=cfg.k, C=cfg.C, tolerance=cfg.tolerance,
                                max_iterations=cfg.max_iterations, name=name, verbose=cfg.verbose)
    report = pipeline.build_report([analysis], cfg.echo(), cfg.gap_threshold, cfg.timestamp)
    if cfg.fmt == "csv":
        _emit(pipeline.rows_csv(pipeline.sweep_rows([analysis])), cfg.out)
    else:
        _emit(pipeline.dumps(report), cfg.out)
    return 0


def cmd_sweep(a, cfg: RunConfig) -> int:
    names = cfg.source["fixtures"]
    analyses = pipeline.run_sweep(names, k=cfg.k, C=cfg.C, tolerance=cfg.tolerance,
                                  max_iterations=cfg.max_iterations, verbose=cfg.verbose)
    report = pipeline.build_report(analyses, cfg.echo(), cfg.gap_threshold, cfg.timestamp)
    rows = pipeline.sweep_rows(analyses)
    report["table"] = pipeline._clean(rows)
    if cfg.out:
        base = Path(cfg.out)
        base = base.with_suffix("") if base.suffix in (".json", ".csv") else base
        base.with_suffix(".csv").write_text(pipeline.rows_csv(rows))
        base.with_suffix(".json").write_text(pipeline.dumps(report))
    elif cfg.fmt == "csv":
        sys.stdout.write(pipeline.rows_csv(rows))
    else:
        sys.stdout.write(pipeline.dumps(report))
    return 0


def _coerce_config(parser, sub, values: dict) -> dict:
    """Convert config-file strings with the matching subparser action's type."""
    out = {}
    actions = {act.dest: act for act in sub._actions}
    for key, raw in values.items():
        dest = {"tol": "tol", "in": "input", "max_iter": "max_iter"}.get(key, key)
        act = actions.get(dest)
        if act is None:
            parser.error(f"unknown config key {key!r}")
        if act.nargs == 0:
            out[dest] = raw.lower() in ("1", "true", "yes", "on")
        else:
            out[dest] = act.type(raw) if act.type else raw
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    a = parser.parse_args(argv)
    if getattr(a, "config", None):
        sub = parser._subparsers._group_actions[0].choices[a.command]
        try:
            values = read_config_file(a.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        sub.set_defaults(**_coerce_config(parser, sub, values))
        a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(a, "verbose", False) else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)

    if a.command in ("spectrum", "dirichlet", "check"):
        sources = [bool(getattr(a, "input", None)), bool(getattr(a, "shape", None)),
                   bool(getattr(a, "fixture", None))]
        if sum(sources) != 1:
            parser.error("give exactly one mesh source (--in, --shape or --fixture)")
    if a.command in ("spectrum", "dirichlet", "check", "sweep") and a.k < 1:
        parser.error("--k must be at least 1")
    if a.command == "sweep":
        names = [s.strip() for s in a.fixtures.split(",") if s.strip()]
        if not names:
            parser.error("empty fixture list")
        unknown = [s for s in names if s not in pipeline.FIXTURES]
        if unknown:
            parser.error(f"unknown fixtures: {', '.join(unknown)}")

    try:
        if a.command == "gen":
            return cmd_gen(a)
        cfg = _config(a)
        handler = dict(spectrum=cmd_spectrum, dirichlet=cmd_dirichlet, check=cmd_check, sweep=cmd_sweep)
        return handler[a.command](a, cfg)
    except (MeshError, EigenError, InequalityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
