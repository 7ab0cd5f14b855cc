import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import BSpline

from mrshape.benchmarks import biaxial_plate, circle_control_polygon
from mrshape.errors import DefinitenessError, DomainTooThinError, StructuralError
from mrshape.fem import (Basis1D, Box, BsplineSpace, Dirichlet, Extension, LoadSpec, Material,
                         Traction, field_eval, solve)
from mrshape.geometry import ControlMesh, subdivide_n
from mrshape.immersion import CartesianGrid, immerse

A = np.sqrt(2) / 10          # irrational offsets relative to the grid
B = A + 1 + np.pi / 70


def strip(y0=-1.0, y1=2.0):
    return ControlMesh([[A, y0], [B, y0], [B, y1], [A, y1]], corners=range(4))


def test_material_constants():
    m = Material(100.0, 0.25)
    assert np.isclose(m.mu, 40.0)
    assert np.isclose(m.lam, 40.0)
    ps = Material(100.0, 0.25, "plane_stress")
    assert np.isclose(ps.lam, 100 * 0.25 / (1 - 0.0625))
    eps = np.array([[1e-3, 2e-4], [2e-4, -5e-4]])
    sig = m.stress(eps)
    assert np.isclose(sig[0, 1], 2 * m.mu * 2e-4)
    assert np.isclose(np.trace(sig), 2 * (m.lam + m.mu) * np.trace(eps))
    with pytest.raises(ValueError):
        Material(100.0, 0.5)
    Material(100.0, 0.5, "plane_stress")
    with pytest.raises(ValueError):
        Material(-1.0, 0.3)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_basis_matches_scipy(p):
    b = Basis1D(0.3, 0.25, 7, p)
    x = np.linspace(0.3, 0.3 + 1.75, 97)
    N, dN = b.local(x)
    cells = b.cell_of(x)
    for k in range(b.n_funcs):
        c = np.zeros(b.n_funcs)
        c[k] = 1.0
        ref = BSpline(b.knots, c, p)
        r = k - cells
        ok = (r >= 0) & (r <= p)
        val = np.where(ok, N[np.arange(len(x)), np.clip(r, 0, p)], 0.0)
        der = np.where(ok, dN[np.arange(len(x)), np.clip(r, 0, p)], 0.0)
        assert np.allclose(val, ref(x), atol=1e-14)
        assert np.allclose(der, ref.derivative()(x), atol=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_cell_matrices_against_dense_quadrature(p):
    b = Basis1D(0.0, 0.5, 4, p)
    M, D, C = b.cell_matrices()
    xg, wg = np.polynomial.legendre.leggauss(12)
    for c in range(4):
        x = 0.5 * c + 0.25 * (xg + 1)
        N, dN = b.local(x, np.full(12, c))
        w = 0.25 * wg
        assert np.allclose(M[c], (w[:, None, None] * N[:, :, None] * N[:, None, :]).sum(0))
        assert np.allclose(D[c], (w[:, None, None] * dN[:, :, None] * dN[:, None, :]).sum(0))
        assert np.allclose(C[c], (w[:, None, None] * dN[:, :, None] * N[:, None, :]).sum(0))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_extrapolation_reproduces_polynomials(p, seed):
    rng = np.random.default_rng(seed)
    b = Basis1D(0.0, 1.0, 8, p)
    coef = rng.normal(size=p + 1)
    # coefficients of a global polynomial from its blossom-free interpolation at dense points
    x = np.linspace(0, 8, 60)
    vals = np.polyval(coef, x)
    Bmat = np.zeros((len(x), b.n_funcs))
    N, _ = b.local(x)
    cells = b.cell_of(x)
    for r in range(p + 1):
        Bmat[np.arange(len(x)), cells + r] = N[:, r]
    c = np.linalg.lstsq(Bmat, vals, rcond=None)[0]
    cell = int(rng.integers(0, 8 - p))
    k = int(rng.integers(0, b.n_funcs))
    w = b.extrapolation_weights(k, cell)
    assert np.isclose(w @ c[cell:cell + p + 1], c[k], atol=1e-8 * max(1, np.abs(c).max()))


def test_extension_keeps_polynomial_fields():
    grid = CartesianGrid.box((0, 0), (2, 2), (20, 20))
    imm = immerse(circle_control_polygon((1, 1), 1.0), grid)
    space = BsplineSpace(grid, 2)
    ext = Extension(space, imm.labels)
    assert ext.n_active < space.n_funcs
    # quadratic field x^2 + xy: coefficients from Greville-based blossoms are exact
    g = space.greville()
    gx, gy = space.bx.greville(), space.by.greville()
    # b-spline coefficients of x^2 are blossoms t_{k+1} t_{k+2}
    kx = space.bx.knots
    bx2 = np.array([kx[k + 1] * kx[k + 2] for k in range(space.nfx)])
    full = (bx2[:, None] + gx[:, None] * gy[None, :]).ravel()
    c = ext.candidate
    assert np.allclose((ext.matrix @ full[ext.active])[c], full[c], atol=1e-10)
    assert not (ext.matrix @ full[ext.active])[~c].any()
    assert g.shape == (space.n_funcs, 2)


def test_domain_too_thin():
    grid = CartesianGrid.box((0, 0), (1, 1), (10, 10))
    sliver = ControlMesh([[0.11, 0.11], [0.89, 0.11], [0.89, 0.17], [0.11, 0.17]],
                         corners=range(4))
    imm = immerse(sliver, grid)
    with pytest.raises(DomainTooThinError):
        Extension(BsplineSpace(grid, 2), imm.labels)


def patch_loads(value=1.0):
    return LoadSpec(dirichlet=[Dirichlet(Box((A, -1), (A, 2)), "x")],
                    tractions=[Traction(Box((B, -1), (B, 2)), (value, 0.0))], pin="y")


@pytest.mark.parametrize("degree", [1, 2, 3])
@pytest.mark.filterwarnings("ignore:boundary extends")
def test_patch_test_constant_stress(degree):
    grid = CartesianGrid.box((0, 0), (1.6, 1.0), (16, 10))
    mat = Material(100.0, 0.3)
    sol = solve(strip(), grid, mat, patch_loads(), degree)
    pts = np.column_stack([np.linspace(A + 0.01, B - 0.01, 50), np.linspace(0.02, 0.98, 50)])
    _, _, sig, _ = field_eval(sol, pts)
    assert np.abs(sig[:, 0, 0] - 1.0).max() < 1e-8
    assert np.abs(sig[:, 1, 1]).max() < 1e-8 and np.abs(sig[:, 0, 1]).max() < 1e-8
    exact = (1 - mat.nu ** 2) / mat.E * (B - A)   # plane strain, unit width
    assert abs(sol.compliance - exact) < 1e-8 * exact
    assert sol.residual < 1e-10


@pytest.mark.filterwarnings("ignore:boundary extends")
def test_body_force_bar_is_exact_for_quadratics():
    """nu = 0 bar under axial gravity: u = f (L x - x^2 / 2) / E is in the space."""
    grid = CartesianGrid.box((0, 0), (1.6, 1.0), (16, 10))
    mat = Material(50.0, 0.0)
    f = 2.0
    loads = LoadSpec(dirichlet=[Dirichlet(Box((A, -1), (A, 2)), "x")], body_force=(f, 0.0),
                     pin="y")
    sol = solve(strip(), grid, mat, loads)
    x = np.linspace(A + 0.05, B - 0.05, 20)
    pts = np.column_stack([x, np.full(20, 0.5)])
    u, _ = sol.evaluate(pts)
    L = B - A
    s = x - A
    assert np.allclose(u[:, 0], f * (L * s - s ** 2 / 2) / mat.E, atol=1e-9)


def test_compliance_equals_strain_energy_without_dirichlet():
    problem, hole = biaxial_plate(0.5, h=0.1)
    sol = solve(hole, problem.grid, problem.material, problem.loads)
    assert np.isclose(sol.compliance, sol.strain_energy(), rtol=1e-10)


@pytest.mark.filterwarnings("ignore:boundary extends")
def test_unsupported_body_is_indefinite():
    grid = CartesianGrid.box((0, 0), (1.6, 1.0), (16, 10))
    loads = LoadSpec(tractions=[Traction(Box((B, -1), (B, 2)), (1.0, 0.0))])
    with pytest.raises(DefinitenessError):
        solve(strip(), grid, Material(100.0, 0.3), loads)


@pytest.mark.filterwarnings("ignore:boundary extends")
def test_unbalanced_load_with_pinned_modes():
    grid = CartesianGrid.box((0, 0), (1.6, 1.0), (16, 10))
    loads = LoadSpec(tractions=[Traction(Box((B, -1), (B, 2)), (1.0, 0.0))], pin="xy")
    with pytest.raises(StructuralError):
        solve(strip(), grid, Material(100.0, 0.3), loads)


def test_mesh_convergence_of_compliance():
    vals = []
    for n in (20, 40, 80):
        grid = CartesianGrid.box((0, 0), (2, 2), (n, n))
        loads = LoadSpec(dirichlet=[Dirichlet(Box((0, 0), (0, 2)), "xy")],
                         tractions=[Traction(Box((2, 0.5), (2, 1.5)), (0.0, -1.0))])
        hole = subdivide_n(circle_control_polygon((1.0, 1.0), 0.8), 4)
        vals.append(solve(hole, grid, Material(100.0, 0.3), loads).compliance)
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    assert d2 < 0.5 * d1
