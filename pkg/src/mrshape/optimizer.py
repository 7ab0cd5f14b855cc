"""Multiresolution shape optimisation driver with area and perimeter constraints."""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError, GeometryError, NumericalError, SizeError
from .fem.solve import solve
from .geometry.io import write_archive
from .geometry.measures import enclosed_measure, measure_gradient, perimeter_and_gradient
from .geometry.mesh import CLOSED, ControlMesh
from .geometry.multires import (MultiresModel, analyze, level_operators, refine_with_details,
                                synthesize, synthesize_from)
from .immersion import (boundary_polylines, check_self_intersection, immerse, signed_loop_area,
                        solid_mask)
from .sensitivity import ShapeGradient, project_to_level, shape_kernel, vertex_gradient

log = logging.getLogger(__name__)


@dataclass
class OptimizationConfig:
    level_max: int = 0          # maximum optimisation level
    level_c: int = 0            # computational level
    level_start: int | None = None
    tolerance: float | None = None   # absolute; default 1e-4 * initial cost
    max_iters: int = 200
    max_inner_iters: int = 50
    step: float = 0.05          # max vertex displacement at the starting level
    step_decay: float = 0.5     # per level
    backtrack: float = 0.5
    armijo: float = 1e-4
    max_halvings: int = 20
    area_min: object = None     # scalar or per-loop list; None disables
    area_growth: float | None = None  # area_min = growth * initial area
    area_mode: str = "min"      # "min" or "equal"
    rho_L: float = 0.0
    degree: int = 2
    gamma: float | None = None
    immerse_control: bool = False   # immerse the control polygon instead of limit points
    min_distance: float | None = None   # between movable loops; default 3h
    checkpoint_every: int = 0
    checkpoint_dir: str | None = None

    def __post_init__(self):
        if not 0 <= self.level_max <= self.level_c:
            raise ValueError("need 0 <= level_max <= level_c")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.area_mode not in ("min", "equal"):
            raise ValueError("area_mode must be 'min' or 'equal'")


@dataclass
class IterationRecord:
    iteration: int
    level: int
    cost: float
    area: float
    perimeter: float
    step: float
    grad_norm: float
    compliance: float = 0.0


@dataclass
class OptimizationTrace:
    records: list = field(default_factory=list)
    models: list = field(default_factory=list)
    evaluations: int = 0
    message: str = ""

    @property
    def costs(self):
        return np.array([r.cost for r in self.records])

    @property
    def levels(self):
        return np.array([r.level for r in self.records])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "level", "cost", "area", "perimeter", "step", "grad_norm"])
            for r in self.records:
                w.writerow([r.iteration, r.level, repr(r.cost), repr(r.area),
                            repr(r.perimeter), repr(r.step), repr(r.grad_norm)])


def hole_area(mesh):
    """Area enclosed by a loop, positive for holes (clockwise) and solids alike."""
    a = enclosed_measure(mesh)
    return abs(a)


def hole_area_gradient(mesh):
    return np.sign(enclosed_measure(mesh)) * measure_gradient(mesh)


@dataclass
class Problem:
    """Everything fixed during a run: grid, material, loads and the static boundary."""

    grid: object
    material: object
    loads: object
    fixed_loops: list = field(default_factory=list)   # non-movable closed curves


@dataclass
class Evaluation:
    meshes: list          # computational-level meshes of the movable loops
    cost: float
    compliance: float
    perimeter: float
    areas: list
    grads: list = None    # per-loop gradients at the computational level
    solution: object = None


def _immersed(mesh, config):
    if config.immerse_control:
        return ControlMesh(mesh.vertices, CLOSED, corners=range(mesh.n_vertices))
    return mesh


def evaluate(meshes, problem, config, gradient=True):
    loops = [_immersed(m, config) for m in meshes] + list(problem.fixed_loops)
    imm = immerse(loops, problem.grid, degree=config.degree)
    if len(meshes) > 1:
        dmin = config.min_distance if config.min_distance is not None else 3.0 * problem.grid.h
        _check_distance(imm, meshes, dmin)
    sol = solve(None, problem.grid, problem.material, problem.loads, config.degree,
                config.gamma, immersion=imm)
    perims = [perimeter_and_gradient(m) for m in meshes]
    P = sum(p for p, _ in perims)
    cost = sol.compliance + config.rho_L * P * P
    areas = [hole_area(m) for m in meshes]
    ev = Evaluation(list(meshes), cost, sol.compliance, P, areas, solution=sol)
    if gradient:
        bq = imm.boundary
        grads = []
        for k, m in enumerate(meshes):
            sel = bq.loop == k
            g = np.zeros(len(bq))
            g[sel] = shape_kernel(sol, bq.points[sel], problem.loads, bq.cells[sel])
            G = vertex_gradient(m, g, bq, loop=k).vectors
            G = G + 2.0 * config.rho_L * P * perims[k][1]
            G[m.frozen] = 0.0
            grads.append(G)
        ev.grads = grads
    return ev


def _check_distance(imm, meshes, dmin):
    bq = imm.boundary
    pts = [bq.points[bq.loop == k] for k in range(len(meshes))]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if len(pts[i]) and len(pts[j]):
                d = np.sqrt(((pts[i][:, None] - pts[j][None]) ** 2).sum(-1)).min()
                if d < dmin:
                    raise GeometryError(f"loops {i} and {j} closer than {dmin:g}")


class _Runner:
    def __init__(self, models, problem, config):
        self.problem = problem
        self.config = config
        self.models = [m.padded(config.level_c) for m in models]
        self.trace = OptimizationTrace()

    def synth(self, xs):
        return [synthesize_from(x, m, self.config.level_c) for x, m in zip(xs, self.models)]

    def eval(self, xs, gradient=True):
        self.trace.evaluations += 1
        return evaluate(self.synth(xs), self.problem, self.config, gradient)

    def project(self, vectors, k, level):
        g = ShapeGradient(self.config.level_c, vectors)
        return project_to_level(g, self.models[k], level).vectors

    def restore_area(self, xs, level, targets):
        """Move each constrained loop along its projected area gradient onto the bound."""
        cfg = self.config
        out = list(xs)
        for k, (x, target) in enumerate(zip(xs, targets)):
            if target is None:
                continue
            xc = synthesize_from(x, self.models[k], cfg.level_c)
            A = hole_area(xc)
            if cfg.area_mode == "min" and A >= target:
                continue
            direction = self.project(hole_area_gradient(xc), k, level)
            direction[x.frozen] = 0.0
            if not np.any(direction):
                raise NumericalError("area gradient vanishes on the movable vertices")
            mu, xk = 0.0, x
            for _ in range(30):
                xc = synthesize_from(xk, self.models[k], cfg.level_c)
                r = hole_area(xc) - target
                if abs(r) <= 1e-8 * abs(target):
                    break
                ops_dir = direction
                for lv in range(level, cfg.level_c):
                    ops_dir = level_operators(self.models[k].template(lv)).S @ ops_dir
                slope = float((hole_area_gradient(xc) * ops_dir).sum())
                if slope == 0.0:
                    raise NumericalError("area restoration stalled")
                mu -= r / slope
                xk = x.with_vertices(x.vertices + mu * direction)
            else:
                raise NumericalError("area restoration did not converge")
            out[k] = xk
        return out

    def targets(self, xs):
        cfg = self.config
        n = len(xs)
        if cfg.area_min is None and cfg.area_growth is None:
            return [None] * n
        if cfg.area_growth is not None:
            base = [hole_area(synthesize_from(x, m, cfg.level_c)) for x, m in zip(xs, self.models)]
            return [cfg.area_growth * a for a in base]
        if np.ndim(cfg.area_min) == 0:
            return [float(cfg.area_min)] * n
        return [None if a is None else float(a) for a in cfg.area_min]


def constrained_update(x, g, step, area_fn=None, area_grad=None, area_min=None,
                       mode="min", frozen=None):
    """Projected steepest-descent update of one vertex array.

    ``x - step * g / max|g|`` followed, if the area bound is violated (or
    ``mode == "equal"``), by a 1D Newton correction along ``area_grad`` so
    that ``area_fn(x_new) == area_min``. Frozen entries never move.
    """
    x = np.asarray(x, float)
    g = np.array(g, float)
    if frozen is not None:
        g[frozen] = 0.0
    gmax = np.abs(g).max() if g.size else 0.0
    xn = x - step * g / gmax if gmax > 0 else x.copy()
    if area_fn is None or area_min is None:
        return xn
    A = area_fn(xn)
    if mode == "min" and A >= area_min:
        return xn
    d = np.array(area_grad(xn), float)
    if frozen is not None:
        d[frozen] = 0.0
    mu = 0.0
    for _ in range(30):
        xt = xn + mu * d
        r = area_fn(xt) - area_min
        if abs(r) <= 1e-8 * abs(area_min):
            return xt
        slope = float((np.asarray(area_grad(xt)) * d).sum())
        if slope == 0.0:
            break
        mu -= r / slope
    raise NumericalError("area restoration did not converge")


def run(models, problem, config, callback=None):
    """Optimise the movable loops level by level.

    ``models`` is a MultiresModel or a list of them (one per movable loop).
    Returns ``(trace, final_models)``.
    """
    if isinstance(models, MultiresModel):
        models = [models]
    cfg = config
    runner = _Runner(models, problem, cfg)
    start = cfg.level_start if cfg.level_start is not None else min(m.base_level for m in models)
    level = start
    xs = [synthesize(m, level) for m in runner.models]
    targets = runner.targets(xs)
    xs = runner.restore_area(xs, level, targets)
    movable = any(np.any(~x.frozen) for x in xs)
    ev = runner.eval(xs)
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-4 * abs(ev.cost)
    trace = runner.trace
    it = 0

    def record(ev, step, gnorm):
        trace.records.append(IterationRecord(it, level, ev.cost, float(sum(ev.areas)),
                                             ev.perimeter, step, gnorm, ev.compliance))
        if callback is not None:
            callback(trace.records[-1])
        if cfg.checkpoint_every and cfg.checkpoint_dir and it % cfg.checkpoint_every == 0:
            for k, m in enumerate(ev.meshes):
                write_archive(os.path.join(cfg.checkpoint_dir, f"iter{it:04d}_loop{k}"),
                              analyze(m, runner.models[k].base_level))

    grads_o = [runner.project(G, k, level) for k, G in enumerate(ev.grads)]
    record(ev, 0.0, float(math.sqrt(sum((g ** 2).sum() for g in grads_o))))
    if not movable:
        trace.message = "no movable vertices"
        return trace, _final(runner, ev)

    while level <= cfg.level_max and it < cfg.max_iters:
        base_step = cfg.step * cfg.step_decay ** (level - start)
        step = base_step
        inner = 0
        while inner < cfg.max_inner_iters and it < cfg.max_iters:
            grads_o = [runner.project(G, k, level) for k, G in enumerate(ev.grads)]
            for g, x in zip(grads_o, xs):
                g[x.frozen] = 0.0
            gmax = max(np.abs(g).max() for g in grads_o)
            gnorm = float(math.sqrt(sum((g ** 2).sum() for g in grads_o)))
            if gmax == 0.0:
                break
            accepted = None
            s = step
            for _ in range(cfg.max_halvings + 1):
                trial = [x.with_vertices(x.vertices - s * g / gmax) for x, g in zip(xs, grads_o)]
                try:
                    trial = runner.restore_area(trial, level, targets)
                    new = runner.eval(trial)
                except (GeometryError, NumericalError) as exc:
                    log.debug("trial rejected: %s", exc)
                    s *= cfg.backtrack
                    continue
                pred = sum(float((G * (a.vertices - b.vertices)).sum())
                           for G, a, b in zip(ev.grads, ev.meshes, new.meshes))
                if new.cost <= ev.cost - cfg.armijo * max(pred, 0.0) and new.cost <= ev.cost:
                    accepted = (trial, new, s)
                    break
                s *= cfg.backtrack
            if accepted is None:
                break
            xs, new, s = accepted
            decrease = ev.cost - new.cost
            ev = new
            it += 1
            inner += 1
            record(ev, s, gnorm)
            step = min(base_step, 2.0 * s) if s == step else s
            if decrease < tol:
                break
        if level == cfg.level_max:
            break
        # next level: one subdivision plus stored details
        level += 1
        xs = [refine_with_details(x, m.detail(level - 1)) for x, m in zip(xs, runner.models)]
    trace.message = f"finished at level {level} after {it} accepted steps"
    return trace, _final(runner, ev)


def _final(runner, ev):
    out = []
    for k, m in enumerate(ev.meshes):
        out.append(analyze(m, runner.models[k].base_level))
    runner.trace.models = out
    return out


def minimum_hole_size(h, degree=2, dim=2):
    return 2.0 * math.sqrt(dim) * (degree + 1) * h


def insert_hole(models, hole, grid, existing_loops=(), degree=2, fixed_loops=()):
    """Add ``hole`` (closed polygon) as a new multiresolution loop.

    The polygon is reoriented clockwise if needed. It must be larger than
    the minimum resolvable hole size and must not intersect other loops;
    it may cross the grid boundary.
    """
    if isinstance(models, MultiresModel):
        models = [models]
    if hole.kind != CLOSED or hole.dim != 2:
        raise ContractError("hole must be a closed planar polygon")
    V = hole.vertices
    diam = float(np.sqrt(((V[:, None] - V[None]) ** 2).sum(-1)).max())
    bound = minimum_hole_size(grid.h, degree)
    if diam < bound:
        raise SizeError(f"hole diameter {diam:.4f} below minimum size {bound:.4f}")
    if len(V) < 4:
        # split edges so the loop can be subdivided; corners keep the shape
        mids = 0.5 * (V + np.roll(V, -1, axis=0))
        V = np.stack([V, mids], axis=1).reshape(-1, 2)
        hole = ControlMesh(V, CLOSED, corners=range(0, len(V), 2),
                           frozen=np.repeat(hole.frozen, 2, axis=0))
    if signed_loop_area(V) > 0:
        n = len(V)
        hole = ControlMesh(V[::-1], CLOSED, corners=[n - 1 - c for c in hole.corners],
                           frozen=hole.frozen[::-1])
    current = [synthesize(m, m.top_level) for m in models] + list(fixed_loops)
    loops = boundary_polylines(current) + boundary_polylines([hole])
    check_self_intersection(loops)
    others = boundary_polylines(current)
    if others:
        inside = solid_mask(hole.vertices, others)
        if not inside.all():
            raise GeometryError("hole polygon leaves the solid")
    return list(models) + [MultiresModel(hole.with_vertices(hole.vertices, level=0), [])]
