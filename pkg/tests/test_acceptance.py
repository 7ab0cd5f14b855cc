"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.interpolate import BSpline

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from conftest import random_quad_mesh, star_curve  # noqa: E402

from mrshape.benchmarks import (biaxial_plate, circle_control_polygon,  # noqa: E402
                                plate_with_hole, uniaxial_plate)
from mrshape.fem import Box, Dirichlet, LoadSpec, Material, Traction, field_eval, solve  # noqa: E402
from mrshape.geometry import (OPEN, ControlMesh, MultiresModel, analyze,  # noqa: E402
                              enclosed_measure, level_operators, limit_position_matrix,
                              measure_gradient, perimeter_and_gradient, subdivide, subdivide_n,
                              synthesize)
from mrshape.immersion import CartesianGrid  # noqa: E402
from mrshape.optimizer import OptimizationConfig, hole_area, run  # noqa: E402
from mrshape.sensitivity import (shape_kernel, topology_derivative,  # noqa: E402
                                 vertex_gradient)

RESULTS = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    if _CAPTURE:
        with _CAPTURE[0].global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    return ok


_CAPTURE = []


@pytest.fixture(autouse=True)
def _uncaptured(request):
    # verdict lines should reach the terminal even when the test passes
    _CAPTURE[:] = [request.config.pluginmanager.getplugin("capturemanager")]
    yield


@contextmanager
def timed():
    box = {}
    t = time.perf_counter()
    yield box
    box["s"] = time.perf_counter() - t


# -- 1 ------------------------------------------------------------------------

def round_trip_error(base, levels, rng):
    """Max of |R S - I| over all level templates and the relative analysis/synthesis error."""
    rs = 0.0
    mesh = base
    for _ in range(levels):
        ops = level_operators(mesh)
        I = np.eye(mesh.n_vertices)
        rs = max(rs, np.abs(ops.restrict(ops.S @ I) - I).max())
        mesh = subdivide(mesh)
    fine = mesh.with_vertices(mesh.vertices + 0.02 * rng.normal(size=mesh.vertices.shape))
    model = analyze(fine, 0)
    rec = synthesize(model, levels)
    rel = np.abs(rec.vertices - fine.vertices).max() / np.abs(fine.vertices).max()
    return rs, rel


def test_criterion_01_round_trip_identities():
    rng = np.random.default_rng(2024)
    worst_rs = worst_rt = 0.0
    with timed() as t:
        for k in range(200):
            c = star_curve(rng, int(rng.integers(4, 16)))
            if k % 4 == 3:
                c = ControlMesh(c.vertices, OPEN)
            rs, rt = round_trip_error(c, int(rng.integers(1, 4)), rng)
            worst_rs, worst_rt = max(worst_rs, rs), max(worst_rt, rt)
        for _ in range(20):
            rs, rt = round_trip_error(random_quad_mesh(rng), int(rng.integers(1, 4)), rng)
            worst_rs, worst_rt = max(worst_rs, rs), max(worst_rt, rt)
    ok = worst_rs <= 1e-9 and worst_rt <= 1e-9 and t["s"] < 30
    report(1, ok, f"max|RS-I|={worst_rs:.2e} max rel round trip={worst_rt:.2e} "
                  f"(tol 1e-9), {t['s']:.1f}s (<30s)")
    assert ok


# -- 2 ------------------------------------------------------------------------

def periodic_spline(P):
    n = len(P)
    t = np.arange(-5.0, n + 6.0)
    coef = P[(np.arange(len(t) - 4) - 3) % n]
    return BSpline(t, coef, 3)


def hausdorff_to_spline(P, level):
    """Hausdorff distance between the level-``level`` control polygon and the limit spline."""
    bs = periodic_spline(P)
    d1, d2 = bs.derivative(), bs.derivative(2)
    poly = subdivide_n(ControlMesh(P), level).vertices
    m = len(poly)
    step = 1.0 / 2 ** level
    a, b = poly, np.roll(poly, -1, axis=0)
    k = 48
    s = (np.arange(k) + 0.5) / k

    def seg_dist(pts, j):
        # distance of pts (m, k, 2) to segments j-1, j, j+1
        best = np.full(pts.shape[:2], np.inf)
        for off in (-1, 0, 1):
            jj = (j + off) % m
            A, B = a[jj][:, None], b[jj][:, None]
            d = B - A
            tt = np.clip(((pts - A) * d).sum(-1) / (d * d).sum(-1), 0, 1)
            best = np.minimum(best, np.linalg.norm(pts - A - tt[..., None] * d, axis=-1))
        return best

    j = np.arange(m)
    # curve -> polygon: arc j lives over parameters [j, j + 1] * step
    tc = (j[:, None] + s[None]) * step
    curve_side = seg_dist(bs(tc), j).max()
    # polygon -> curve: Newton projection started from the matching parameter
    pts = a[:, None] + s[None, :, None] * (b - a)[:, None]
    tp = tc.copy()
    for _ in range(8):
        r = bs(tp) - pts
        f = (r * d1(tp)).sum(-1)
        fp = (d1(tp) ** 2).sum(-1) + (r * d2(tp)).sum(-1)
        tp = tp - f / fp
    poly_side = np.linalg.norm(bs(tp) - pts, axis=-1).max()
    return max(curve_side, poly_side)


def test_criterion_02_spline_limit_convergence():
    rng = np.random.default_rng(7)
    with timed() as t:
        P = star_curve(rng, 9).vertices
        H = [hausdorff_to_spline(P, lv) for lv in range(2, 7)]
        ratios = [H[i] / H[i + 1] for i in range(len(H) - 1)]
    ok = min(ratios) >= 3.5 and t["s"] < 10
    report(2, ok, "contraction factors " + ", ".join(f"{r:.3f}" for r in ratios)
           + f" (>=3.5), {t['s']:.1f}s (<10s)")
    assert ok


# -- 3 ------------------------------------------------------------------------

def patch_case(a, b, grid, degree, supported):
    solid = ControlMesh([[a, -1], [b, -1], [b, 2], [a, 2]], corners=range(4))
    mat = Material(100.0, 0.3)
    right = Traction(Box((b, -1), (b, 2)), (1.0, 0.0))
    if supported:
        loads = LoadSpec([Dirichlet(Box((a, -1), (a, 2)), "x")], [right], pin="y")
    else:
        loads = LoadSpec([], [right, Traction(Box((a, -1), (a, 2)), (-1.0, 0.0))], pin="xyr")
    sol = solve(solid, grid, mat, loads, degree)
    pts = np.column_stack([np.linspace(a + 1e-3, b - 1e-3, 101),
                           np.linspace(grid.origin[1] + 1e-3, grid.upper[1] - 1e-3, 101)])
    _, _, sig, _ = field_eval(sol, pts)
    err = max(np.abs(sig[:, 0, 0] - 1).max(), np.abs(sig[:, 0, 1]).max(),
              np.abs(sig[:, 1, 1]).max())
    if supported:
        exact = (1 - mat.nu ** 2) / mat.E * (b - a)
        err = max(err, abs(sol.compliance - exact) / exact)
    return err


@pytest.mark.filterwarnings("ignore:boundary extends")
def test_criterion_03_immersed_patch_test():
    cases = [
        (np.sqrt(2) / 10, np.sqrt(2) / 10 + 1 + np.pi / 70,
         CartesianGrid.box((0, 0), (1.6, 1.0), (16, 10)), 2, True),
        (np.e / 20, 1.5 - 1 / np.sqrt(7), CartesianGrid.box((0, 0), (1.6, 1.0), (23, 13)), 3, True),
        (1 / np.pi, 1 + np.sqrt(3) / 5, CartesianGrid.box((0, 0), (1.6, 1.0), (19, 11)), 2, False),
        (np.sqrt(5) / 9, 1.4 - np.log(2) / 9, CartesianGrid.box((0, 0), (1.6, 1.0), (31, 7)), 1, True),
    ]
    with timed() as t:
        errs = [patch_case(*c) for c in cases]
    ok = max(errs) <= 1e-8 and t["s"] < 20
    report(3, ok, "max relative stress/compliance error "
           + ", ".join(f"{e:.1e}" for e in errs) + f" (tol 1e-8), {t['s']:.1f}s (<20s)")
    assert ok


# -- 4 ------------------------------------------------------------------------

def test_criterion_04_plate_initial_compliance():
    with timed() as t:
        problem, hole = plate_with_hole(100)
        control = ControlMesh(hole.vertices, corners=range(hole.n_vertices))
        c1 = solve(control, problem.grid, problem.material, problem.loads).compliance
        fine = synthesize(MultiresModel(hole, []).padded(4), 4)
        c2 = solve(fine, problem.grid, problem.material, problem.loads).compliance
    ok1 = abs(c1 - 0.073) <= 0.1 * 0.073
    ok2 = abs(c2 - 0.065) <= 0.1 * 0.065
    ok = ok1 and ok2 and t["s"] < 240
    report(4, ok, f"C1={c1:.5f} (0.073+-10%: {'ok' if ok1 else 'out'}), "
                  f"C2/C3={c2:.5f} (0.065+-10%: {'ok' if ok2 else 'out'}), "
                  f"ratio C1/C2={c1 / c2:.3f} (reference 1.123), {t['s']:.1f}s")
    assert ok


# -- 5 ------------------------------------------------------------------------

def plate_schedule(start):
    problem, hole = plate_with_hole(100)
    model = MultiresModel(hole, [])
    if start > 0:
        model = analyze(synthesize(model.padded(start), start), 0)
    cfg = OptimizationConfig(level_max=4, level_c=4, level_start=start, area_min=math.pi / 4,
                             max_iters=200)
    return run(model, problem, cfg)[0]


def test_criterion_05_multiresolution_superiority():
    with timed() as t:
        c2 = plate_schedule(4)
        c3 = plate_schedule(0)
    lv = c3.levels
    staircase = bool(np.all(np.diff(lv) >= 0)) and lv[-1] == 4 and lv[0] == 0
    better = c3.costs[-1] <= c2.costs[-1]
    ok = staircase and better and t["s"] < 1800
    steps = [int((lv == k).sum()) for k in range(5)]
    report(5, ok, f"final J: C3={c3.costs[-1]:.7f} C2={c2.costs[-1]:.7f} "
                  f"(J0={c3.costs[0]:.5f}); C3 steps per level {steps}, "
                  f"staircase={'yes' if staircase else 'no'}, {t['s']:.0f}s (<1800s)")
    assert ok


# -- 6, 7 ---------------------------------------------------------------------

def biaxial_run(alpha, rho_L=0.0):
    problem, hole = biaxial_plate(alpha)
    cfg = OptimizationConfig(level_max=3, level_c=3, area_min=math.pi / 4, area_mode="equal",
                             rho_L=rho_L, max_iters=300)
    trace, final = run(MultiresModel(hole, []), problem, cfg)
    mesh = synthesize(final[0], 3)
    return trace, limit_position_matrix(mesh) @ mesh.vertices


def fitted_axes(P):
    d = P - P.mean(axis=0)
    s = np.linalg.lstsq(np.column_stack([d[:, 0] ** 2, d[:, 1] ** 2]), np.ones(len(d)),
                        rcond=None)[0]
    return 1 / np.sqrt(s[0]), 1 / np.sqrt(s[1])


def radius_modes(P, kmax=6):
    d = P - P.mean(axis=0)
    th = np.arctan2(d[:, 1], d[:, 0])
    r = np.hypot(d[:, 0], d[:, 1])
    o = np.argsort(th)
    grid = np.linspace(-np.pi, np.pi, 512, endpoint=False)
    ru = np.interp(grid, th[o], r[o], period=2 * np.pi)
    c = np.fft.rfft(ru) / len(ru)
    return np.abs(c[:kmax + 1]), r


def test_criterion_06_optimal_hole_shapes():
    with timed() as t:
        _, P = biaxial_run(0.5)
        rx, ry = fitted_axes(P)
        _, Q = biaxial_run(1.0)
        rq = np.hypot(*(Q - Q.mean(axis=0)).T)
        dev = np.abs(rq - rq.mean()).max() / rq.mean()
    ratio = rx / ry
    ok_a = abs(ratio - 0.5) <= 0.05
    ok_b = dev <= 0.03
    ok = ok_a and ok_b and t["s"] < 2700
    report(6, ok, f"alpha=0.5 fitted r_x/r_y={ratio:.4f} (0.5+-10%), alpha=1 max radial "
                  f"deviation={100 * dev:.2f}% (<3%), {t['s']:.0f}s (<2700s)")
    assert ok


def test_criterion_07_negative_ratio_quadrilateral():
    with timed() as t:
        _, P = biaxial_run(-1.0, rho_L=1e-3)
        modes, _ = radius_modes(P)
    ok = modes[4] > modes[2] and modes[4] > modes[3] and t["s"] < 2700
    report(7, ok, f"radius Fourier |c2|={modes[2]:.2e} |c3|={modes[3]:.2e} "
                  f"|c4|={modes[4]:.2e} (c4 dominant), {t['s']:.0f}s (<2700s)")
    assert ok


# -- 8 ------------------------------------------------------------------------

def test_criterion_08_shape_gradient_vs_finite_difference():
    rng = np.random.default_rng(3)
    m = subdivide_n(circle_control_polygon((1.0, 1.0), 1.0), 4)
    th = np.arctan2(m.vertices[:, 1] - 1, m.vertices[:, 0] - 1)
    dv = np.zeros_like(m.vertices)
    for k in range(1, 4):
        a, b = rng.normal(size=2)
        dv += np.column_stack([np.cos(th), np.sin(th)]) * (a * np.cos(k * th)
                                                          + b * np.sin(k * th))[:, None]
    dv /= np.abs(dv).max()
    errs = []
    with timed() as t:
        for n in (25, 50, 100):
            problem, _ = plate_with_hole(n)
            args = (problem.grid, problem.material, problem.loads)
            sol = solve(m, *args)
            bq = sol.immersion.boundary
            g = np.zeros(len(bq))
            on = bq.on_curves
            g[on] = shape_kernel(sol, bq.points[on], problem.loads, bq.cells[on])
            pred = float((vertex_gradient(m, g, bq).vectors * dv).sum())
            eps = 1e-3
            jp = solve(m.with_vertices(m.vertices + eps * dv), *args).compliance
            jm = solve(m.with_vertices(m.vertices - eps * dv), *args).compliance
            fd = (jp - jm) / (2 * eps)
            errs.append(abs(pred - fd) / abs(fd))
    ok = errs[-1] <= 0.10 and errs[0] > errs[1] > errs[2] and t["s"] < 900
    report(8, ok, "relative discrepancy at h=1/25,1/50,1/100: "
           + ", ".join(f"{100 * e:.2f}%" for e in errs) + f" (<10% and shrinking), {t['s']:.1f}s")
    assert ok


# -- 9 ------------------------------------------------------------------------

def test_criterion_09_topology_derivative_limit():
    with timed() as t:
        problem = uniaxial_plate(100)
        args = (problem.grid, problem.material, problem.loads)
        probe = (1.0 + 3e-4 * np.sqrt(2), 0.5 + 1e-3 / np.pi)
        base = solve([], *args)
        dt = topology_derivative(base, problem.material, [probe]).values[0]
        h = problem.grid.h
        radii = np.array([4, 6, 8]) * h
        q = []
        for r in radii:
            hole = subdivide_n(circle_control_polygon(probe, 2 * r, 16), 3)
            q.append((solve(hole, *args).compliance - base.compliance) / (np.pi * r * r))
        # q(r) = D_T + c r^2 + ...
        limit = np.linalg.lstsq(np.column_stack([np.ones(3), radii ** 2]), q, rcond=None)[0][0]
    err = abs(limit - dt) / abs(dt)
    ok = err <= 0.15 and t["s"] < 1200
    report(9, ok, f"extrapolated {limit:.5f} vs D_T {dt:.5f}: {100 * err:.2f}% (<15%), "
                  f"{t['s']:.1f}s")
    assert ok


# -- 10 -----------------------------------------------------------------------

def test_criterion_10_constraint_machinery():
    rng = np.random.default_rng(11)
    worst = 0.0
    with timed() as t:
        for k in range(10):
            c = subdivide_n(star_curve(rng, 8, clockwise=k % 2 == 1), k % 3)
            X = c.vertices
            d = rng.normal(size=X.shape)
            eps = 1e-6
            for f, g in ((enclosed_measure, measure_gradient(c)),
                         (lambda m: perimeter_and_gradient(m)[0], perimeter_and_gradient(c)[1])):
                fd = (f(c.with_vertices(X + eps * d)) - f(c.with_vertices(X - eps * d))) / (2 * eps)
                worst = max(worst, abs(fd - (g * d).sum()) / abs(fd))
        problem, hole = plate_with_hole(20)
        a_min = 0.8
        cfg = OptimizationConfig(level_max=1, level_c=2, area_min=a_min, max_iters=6,
                                 max_inner_iters=3)
        trace, final = run(MultiresModel(hole, []), problem, cfg)
        areas = np.array([r.area for r in trace.records])
        feas = float((a_min - areas).max() / a_min)
        final_area = hole_area(synthesize(final[0].padded(2), 2))
    ok = worst <= 1e-6 and feas <= 1e-6 and final_area >= a_min * (1 - 1e-6) \
        and t["s"] < 5
    report(10, ok, f"gradient FD rel err {worst:.1e} (<=1e-6), worst area violation "
                   f"{max(feas, 0):.1e} over {len(areas)} iterates (<=1e-6), final area "
                   f"{final_area:.6f} (A_min {a_min}), {t['s']:.1f}s (<5s)")
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion")]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError:
            failed += 1
    print("\nsummary")
    print("\n".join(RESULTS[k] for k in sorted(RESULTS)))
    sys.exit(1 if failed else 0)
