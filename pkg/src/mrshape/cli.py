"""Command-line front end.

Configuration files are plain ``key = value`` lines with ``[section]``
headers and ``#`` comments. Keys inside a section are prefixed with the
section name, so ``[material]`` followed by ``nu = 0.3`` is the same as a
top-level ``material.nu = 0.3``. ``loads.dirichlet`` and ``loads.traction``
may repeat::

    [grid]
    origin = 0 0
    counts = 100 100
    h = 0.02

    [material]
    E = 100
    nu = 0.4
    model = plane_strain

    [loads]
    dirichlet = 0 0 0.1 0 xy        # box x0 y0 x1 y1, components
    traction = 0.5 2 1.5 2 0 -1     # box x0 y0 x1 y1, tx ty
    pin =                           # rigid modes to pin: any of x, y, r

    [io]
    boundary = hole.crv             # movable loops
    fixed =                         # immovable loops
    output = out
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, MrShapeError

# key -> (type, default); REQUIRED marks mandatory keys
REQUIRED = object()
_SCHEMA = {
    "grid.origin": ("floats2", REQUIRED),
    "grid.counts": ("ints2", REQUIRED),
    "grid.h": ("float", REQUIRED),
    "material.E": ("float", REQUIRED),
    "material.nu": ("float", REQUIRED),
    "material.model": ("str", "plane_strain"),
    "nitsche.gamma": ("float", None),
    "fem.degree": ("int", 2),
    "opt.level_max": ("int", 0),
    "opt.level_c": ("int", 0),
    "opt.level_start": ("int", None),
    "opt.tolerance": ("float", None),
    "opt.max_iters": ("int", 200),
    "opt.max_inner_iters": ("int", 50),
    "opt.step": ("float", 0.05),
    "opt.step_decay": ("float", 0.5),
    "opt.area_min": ("float", None),
    "opt.area_growth": ("float", None),
    "opt.area_mode": ("str", "min"),
    "opt.rho_L": ("float", 0.0),
    "opt.immerse_control": ("bool", False),
    "opt.min_distance": ("float", None),
    "io.boundary": ("paths", ()),
    "io.fixed": ("paths", ()),
    "io.output": ("str", "out"),
    "io.checkpoint_every": ("int", 0),
    "loads.dirichlet": ("dirichlet*", ()),
    "loads.traction": ("traction*", ()),
    "loads.body_force": ("floats2", (0.0, 0.0)),
    "loads.pin": ("str", ""),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    base_dir: str = "."

    def __getitem__(self, key):
        return self.values[key]

    def path(self, p):
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    # -- builders ----------------------------------------------------------
    def grid(self):
        from .immersion import CartesianGrid
        h = self["grid.h"]
        return CartesianGrid(self["grid.origin"], (h, h), self["grid.counts"])

    def material(self):
        from .fem import Material
        return Material(self["material.E"], self["material.nu"], self["material.model"])

    def loads(self):
        from .fem import Box, Dirichlet, LoadSpec, Traction
        dirichlet = [Dirichlet(Box(b[:2], b[2:4]), c) for b, c in self["loads.dirichlet"]]
        tractions = [Traction(Box(b[:2], b[2:4]), t) for b, t in self["loads.traction"]]
        return LoadSpec(dirichlet, tractions, tuple(self["loads.body_force"]), self["loads.pin"])

    def gamma(self):
        g = self["nitsche.gamma"]
        return 10.0 * self["material.E"] if g is None else g

    def problem(self):
        from .geometry.io import read_mesh
        from .optimizer import Problem
        fixed = [read_mesh(self.path(p)) for p in self["io.fixed"]]
        return Problem(self.grid(), self.material(), self.loads(), fixed)

    def boundary(self):
        from .geometry.io import read_mesh
        return [read_mesh(self.path(p)) for p in self["io.boundary"]]

    def analysis_meshes(self):
        """Boundary loops brought to ``opt.level_c``, as the optimiser would solve them."""
        from .geometry import subdivide_n
        from .optimizer import _immersed
        opt = self.optimization()
        out = []
        for m in self.boundary():
            if m.level < opt.level_c:
                m = subdivide_n(m, opt.level_c - m.level)
            out.append(_immersed(m, opt))
        return out

    def optimization(self):
        from .optimizer import OptimizationConfig
        kw = {k[4:]: v for k, v in self.values.items() if k.startswith("opt.")}
        kw["degree"] = self["fem.degree"]
        kw["gamma"] = self.gamma()
        kw["checkpoint_every"] = self["io.checkpoint_every"]
        kw["checkpoint_dir"] = self.path(self["io.output"])
        return OptimizationConfig(**kw)


def _number(text, kind, lineno, key):
    try:
        v = int(text) if kind == "int" else float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r} for {key}", lineno) from None
    if kind == "float" and not math.isfinite(v):
        raise ConfigError(f"non-finite value for {key}", lineno)
    return v


def _convert(key, kind, text, lineno):
    parts = text.split()
    if kind in ("float", "int"):
        if len(parts) != 1:
            raise ConfigError(f"{key} expects one number", lineno)
        return _number(parts[0], kind, lineno, key)
    if kind in ("floats2", "ints2"):
        if len(parts) != 2:
            raise ConfigError(f"{key} expects two numbers", lineno)
        return tuple(_number(p, kind[:-1].rstrip("s"), lineno, key) for p in parts)
    if kind == "bool":
        if text.lower() in ("true", "yes", "1"):
            return True
        if text.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key} expects true or false", lineno)
    if kind == "paths":
        return tuple(parts)
    if kind == "dirichlet*":
        if len(parts) != 5 or not set(parts[4]) <= set("xy") or not parts[4]:
            raise ConfigError("dirichlet expects 'x0 y0 x1 y1 components'", lineno)
        return (tuple(_number(p, "float", lineno, key) for p in parts[:4]), parts[4])
    if kind == "traction*":
        if len(parts) != 6:
            raise ConfigError("traction expects 'x0 y0 x1 y1 tx ty'", lineno)
        v = [_number(p, "float", lineno, key) for p in parts]
        return (tuple(v[:4]), tuple(v[4:]))
    return text.strip()


def _validate(values, lines):
    def bad(key, msg):
        raise ConfigError(f"{key}: {msg}", lines.get(key))

    if any(c < 1 for c in values["grid.counts"]):
        bad("grid.counts", "cell counts must be positive")
    if values["grid.h"] <= 0:
        bad("grid.h", "cell size must be positive")
    if values["material.E"] <= 0:
        bad("material.E", "Young's modulus must be positive")
    model = values["material.model"]
    if model not in ("plane_strain", "plane_stress"):
        bad("material.model", "expected plane_strain or plane_stress")
    nu = values["material.nu"]
    if model == "plane_strain" and not -1.0 < nu < 0.5:
        bad("material.nu", "plane strain needs -1 < nu < 0.5")
    if model == "plane_stress" and not -1.0 < nu <= 0.5:
        bad("material.nu", "plane stress needs -1 < nu <= 0.5")
    if values["nitsche.gamma"] is not None and values["nitsche.gamma"] <= 0:
        bad("nitsche.gamma", "must be positive")
    if values["fem.degree"] not in (1, 2, 3):
        bad("fem.degree", "supported degrees are 1, 2 and 3")
    if not 0 <= values["opt.level_max"] <= values["opt.level_c"]:
        bad("opt.level_max", "need 0 <= opt.level_max <= opt.level_c")
    if values["opt.tolerance"] is not None and values["opt.tolerance"] <= 0:
        bad("opt.tolerance", "must be positive")
    if values["opt.step"] <= 0:
        bad("opt.step", "must be positive")
    if values["opt.area_mode"] not in ("min", "equal"):
        bad("opt.area_mode", "expected min or equal")
    if values["opt.rho_L"] < 0:
        bad("opt.rho_L", "must be nonnegative")
    if not set(values["loads.pin"]) <= set("xyr"):
        bad("loads.pin", "rigid modes are a subset of 'xyr'")


def parse_text(text, base_dir="."):
    values, lines = {}, {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if section and not key.startswith(section + "."):
            key = f"{section}.{key}"
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        kind = _SCHEMA[key][0]
        v = _convert(key, kind, value, lineno)
        if kind.endswith("*"):
            values.setdefault(key, [])
            if isinstance(values[key], tuple):
                values[key] = []
            values[key].append(v)
        elif key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        else:
            values[key] = v
        lines[key] = lineno
    for key, (kind, default) in _SCHEMA.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigError(f"missing required key {key!r}")
            values[key] = list(default) if kind.endswith("*") else default
    _validate(values, lines)
    for key in values:
        if _SCHEMA[key][0].endswith("*"):
            values[key] = tuple(values[key])
    return RunConfig(values, base_dir)


def parse_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_text(text, os.path.dirname(os.path.abspath(path)))
    except ConfigError as exc:
        err = ConfigError(f"{path}: {exc}")
        err.line = exc.line
        raise err from None


def _fmt(kind, v):
    if kind in ("float", "int"):
        return repr(v)
    if kind in ("floats2", "ints2"):
        return " ".join(repr(x) for x in v)
    if kind == "bool":
        return "true" if v else "false"
    if kind == "paths":
        return " ".join(v)
    return str(v)


def serialize(config):
    """Canonical text form; ``parse_text(serialize(c))`` reproduces ``c``."""
    out, section = [], None
    for key, (kind, _) in _SCHEMA.items():
        v = config.values[key]
        sec, name = key.split(".", 1)
        if sec != section:
            if section is not None:
                out.append("")
            out.append(f"[{sec}]")
            section = sec
        if kind == "dirichlet*":
            out += [f"{name} = {' '.join(repr(x) for x in b)} {c}" for b, c in v]
        elif kind == "traction*":
            out += [f"{name} = {' '.join(repr(x) for x in b + t)}" for b, t in v]
        elif v is None:
            continue
        else:
            out.append(f"{name} = {_fmt(kind, v)}".rstrip())
    return "\n".join(out) + "\n"


# -- subcommands -------------------------------------------------------------

def _out(config, name):
    d = config.path(config["io.output"])
    os.makedirs(d, exist_ok=True)
    return os.path.join(d, name)


def cmd_subdivide(args):
    from .geometry import subdivide_n
    from .geometry.io import read_mesh, write_mesh
    mesh = subdivide_n(read_mesh(args.input), args.levels)
    write_mesh(args.output, mesh)
    print(f"vertices={mesh.n_vertices}")


def cmd_coarsen(args):
    from .geometry import coarsen, unrefine_topology
    from .geometry.io import read_mesh, write_mesh
    fine = read_mesh(args.input)
    coarse = coarsen(fine, unrefine_topology(fine))
    write_mesh(args.output, coarse)
    print(f"vertices={coarse.n_vertices}")


def cmd_analyze(args):
    from .geometry import analyze
    from .geometry.io import read_mesh, write_archive
    model = analyze(read_mesh(args.input), args.base_level)
    write_archive(args.output, model)
    print(f"levels={model.base_level}..{model.top_level}")


def cmd_synthesize(args):
    from .geometry import synthesize
    from .geometry.io import read_archive, write_mesh
    model = read_archive(args.input)
    level = model.top_level if args.level is None else args.level
    mesh = synthesize(model, level)
    write_mesh(args.output, mesh)
    print(f"vertices={mesh.n_vertices}")


def _solve(config):
    from .fem import solve
    problem = config.problem()
    loops = config.analysis_meshes() + list(problem.fixed_loops)
    sol = solve(loops, problem.grid, problem.material, problem.loads,
                config["fem.degree"], config.gamma())
    return problem, sol


def cmd_solve(args):
    from .fem import write_vtk_solution
    config = parse_config(args.config)
    _, sol = _solve(config)
    path = args.output or _out(config, "solution.vtk")
    write_vtk_solution(path, sol)
    print(f"compliance={sol.compliance!r}")


def cmd_gradient(args):
    from .geometry.io import write_crv
    from .sensitivity import shape_kernel, vertex_gradient
    config = parse_config(args.config)
    problem, sol = _solve(config)
    bq = sol.immersion.boundary
    for k, mesh in enumerate(config.analysis_meshes()):
        sel = bq.loop == k
        g = np.zeros(len(bq))
        g[sel] = shape_kernel(sol, bq.points[sel], problem.loads, bq.cells[sel])
        G = vertex_gradient(mesh, g, bq, loop=k)
        path = _out(config, f"gradient_{k}.crv")
        write_crv(path, mesh, vectors=G.vectors)
        print(f"loop={k} grad_norm={G.norm()!r} file={path}")


def cmd_topo(args):
    from .fem import sample_points
    from .immersion import solid_mask
    from .sensitivity import topology_derivative, write_vtk_points
    config = parse_config(args.config)
    problem, sol = _solve(config)
    pts = sample_points(problem.grid, args.per_cell)
    if sol.immersion.field.loops:
        pts = pts[solid_mask(pts, sol.immersion.field.loops)]
    dt = topology_derivative(sol, problem.material, pts)
    path = args.output or _out(config, "topology.vtk")
    write_vtk_points(path, dt.points, dt.values)
    p, v = dt.minimum()
    print(f"min_DT={v!r} at={p[0]!r},{p[1]!r}")


def cmd_optimize(args):
    from .fem import write_vtk_solution
    from .geometry import MultiresModel, analyze, synthesize
    from .geometry.io import write_archive, write_mesh
    from .optimizer import evaluate, run
    config = parse_config(args.config)
    problem = config.problem()
    opt = config.optimization()
    models = []
    for mesh in config.boundary():
        models.append(analyze(mesh, 0) if mesh.level > 0 else MultiresModel(mesh, []))
    trace, final = run(models, problem, opt)
    trace.write_csv(_out(config, "trace.csv"))
    meshes = []
    for k, m in enumerate(final):
        write_archive(_out(config, f"final_{k}"), m)
        mesh = synthesize(m, m.top_level)
        write_mesh(_out(config, f"final_{k}.crv"), mesh)
        meshes.append(mesh)
    ev = evaluate(meshes, problem, opt, gradient=False)
    write_vtk_solution(_out(config, "final.vtk"), ev.solution)
    print(f"{trace.message}; cost={trace.records[-1].cost!r}")


def cmd_insert_hole(args):
    from .geometry import MultiresModel, analyze
    from .geometry.io import read_mesh, write_mesh
    from .optimizer import insert_hole
    config = parse_config(args.config)
    problem = config.problem()
    models = [analyze(m, 0) if m.level > 0 else MultiresModel(m, []) for m in config.boundary()]
    out = insert_hole(models, read_mesh(args.hole), problem.grid,
                      degree=config["fem.degree"], fixed_loops=problem.fixed_loops)
    path = args.output or _out(config, "hole.crv")
    write_mesh(path, out[-1].base)
    print(f"loops={len(out)} hole={path}")


EXIT_CODES = {
    "ConfigError": 2, "TopologyError": 3, "SizeError": 4, "StructuralError": 5,
    "LevelRangeError": 6, "NumericalError": 7, "GeometryError": 8,
    "DomainTooThinError": 9, "DefinitenessError": 10, "ContractError": 11,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="mrshape",
        description="Multiresolution subdivision geometry, immersed elasticity and "
                    "shape optimisation. Config defaults: fem.degree = 2, "
                    "nitsche.gamma = 10 * material.E, material.model = plane_strain, "
                    "opt.tolerance = 1e-4 * initial cost.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("subdivide", help="refine a control mesh")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--levels", type=int, default=1)
    s.add_argument("--out", dest="output", required=True)
    s.set_defaults(func=cmd_subdivide)

    s = sub.add_parser("coarsen", help="least-squares coarsening by one level")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", dest="output", required=True)
    s.set_defaults(func=cmd_coarsen)

    s = sub.add_parser("analyze", help="decompose a mesh into base and details")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--base-level", type=int, default=0)
    s.add_argument("--out", dest="output", required=True, help="archive directory")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synthesize", help="reconstruct a mesh from an archive")
    s.add_argument("--in", dest="input", required=True, help="archive directory")
    s.add_argument("--level", type=int)
    s.add_argument("--out", dest="output", required=True)
    s.set_defaults(func=cmd_synthesize)

    for name, func, help_ in (("solve", cmd_solve, "solve the elasticity problem"),
                              ("gradient", cmd_gradient, "shape gradient of compliance"),
                              ("topo", cmd_topo, "topology derivative field"),
                              ("optimize", cmd_optimize, "run the shape optimiser")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        if name in ("solve", "topo"):
            s.add_argument("--out", dest="output")
        if name == "topo":
            s.add_argument("--per-cell", type=int, default=1)
        s.set_defaults(func=func)

    s = sub.add_parser("insert-hole", help="validate and add a hole polygon")
    s.add_argument("--config", required=True)
    s.add_argument("--hole", required=True)
    s.add_argument("--out", dest="output")
    s.set_defaults(func=cmd_insert_hole)
    return p


def _one_line_warning(message, category, filename, lineno, line=None):
    return f"mrshape: {category.__name__}: {message}\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    warnings.formatwarning = _one_line_warning
    try:
        args.func(args)
    except MrShapeError as exc:
        print(f"mrshape {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CODES.get(type(exc).__name__, 1)
    except (OSError, ValueError) as exc:
        print(f"mrshape {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
