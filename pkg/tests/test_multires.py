import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cube_mesh, grid_patch, star_curve, torus_mesh
from mrshape.errors import ConfigError, LevelRangeError, NumericalError, StructuralError
from mrshape.geometry import (ControlMesh, analyze, coarsen, level_operators, local_frames,
                              restrict_field, subdivide, subdivide_n, subdivision_operator,
                              synthesize, synthesize_from)
from mrshape.geometry.io import (read_archive, read_crv, read_mesh, read_obj, write_archive,
                                 write_crv, write_obj)
from mrshape.geometry.multires import from_frame, to_frame


def test_restriction_is_left_inverse(rng):
    for mesh in (star_curve(rng, 9), torus_mesh(), grid_patch(3), subdivide(cube_mesh())):
        ops = level_operators(mesh)
        RS = ops.restrict(ops.S @ np.eye(mesh.n_vertices))
        assert np.allclose(RS, np.eye(mesh.n_vertices), atol=1e-10)


def test_bare_cube_has_subdivision_null_space(cube):
    # the alternating +-1 pattern on the cube's corners refines to zero
    s = np.array([1 - 2 * (bin(i).count("1") % 2) for i in range(8)], float)
    S = subdivision_operator(cube).matrix
    assert np.abs(S @ s).max() < 1e-14
    with pytest.raises(NumericalError):
        coarsen(subdivide(cube), cube)


def test_coarsen_recovers_exact_refinement(rng):
    c = star_curve(rng, 12)
    assert np.allclose(coarsen(subdivide(c), c).vertices, c.vertices, atol=1e-12)


def test_coarsen_rejects_mismatched_topology(rng):
    c = star_curve(rng, 12)
    with pytest.raises(StructuralError):
        coarsen(subdivide(c), star_curve(rng, 10))


def test_detail_frames_round_trip(rng):
    m = subdivide_n(cube_mesh(), 2)
    F = local_frames(m)
    v = rng.normal(size=m.vertices.shape)
    assert np.allclose(from_frame(F, to_frame(F, v)), v)


def test_details_rotate_with_the_base(rng):
    """A rigid motion of the base carries the details along."""
    c3 = subdivide_n(star_curve(rng, 8), 3)
    c3 = c3.with_vertices(c3.vertices + 0.02 * rng.normal(size=c3.vertices.shape))
    model = analyze(c3, 0)
    a = 0.7
    Q = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    moved = model.with_base(model.base.with_vertices(model.base.vertices @ Q.T + [1.0, -2.0]))
    assert np.allclose(synthesize(moved, 3).vertices, c3.vertices @ Q.T + [1.0, -2.0],
                       atol=1e-12)


def test_zero_details_for_pure_refinement(rng):
    c = star_curve(rng, 9)
    model = analyze(subdivide_n(c, 3), 0)
    assert all(np.abs(d).max() < 1e-12 for d in model.details)
    assert np.allclose(model.base.vertices, c.vertices, atol=1e-12)


def test_level_range_errors(rng):
    c = subdivide_n(star_curve(rng, 8), 2)
    model = analyze(c, 1)
    with pytest.raises(LevelRangeError):
        synthesize(model, 3)
    with pytest.raises(LevelRangeError):
        synthesize(model, 0)
    with pytest.raises(LevelRangeError):
        analyze(c, 3)
    padded = model.padded(4)
    assert padded.top_level == 4
    assert np.allclose(synthesize(padded, 4).vertices, subdivide_n(c, 2).vertices)


def test_restrict_field_drops_fine_detail(rng):
    c = star_curve(rng, 10)
    model = analyze(subdivide_n(c, 2), 0)
    coarse = rng.normal(size=(10, 2))
    fine = level_operators(model.template(1)).S @ (level_operators(model.template(0)).S @ coarse)
    assert np.allclose(restrict_field(fine, model, 2, 0), coarse)


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 14), st.integers(1, 3), st.integers(0, 2**32 - 1), st.booleans())
def test_analysis_synthesis_round_trip(n, levels, seed, closed):
    rng = np.random.default_rng(seed)
    c = star_curve(rng, n)
    if not closed:
        c = ControlMesh(c.vertices, "open")
    fine = subdivide_n(c, levels)
    fine = fine.with_vertices(fine.vertices + 0.05 * rng.normal(size=fine.vertices.shape))
    for base in range(levels + 1):
        model = analyze(fine, base)
        rec = synthesize(model, levels)
        assert np.abs(rec.vertices - fine.vertices).max() <= 1e-9 * np.abs(fine.vertices).max()


def test_synthesize_from_intermediate_level(rng):
    fine = subdivide_n(star_curve(rng, 8), 3)
    fine = fine.with_vertices(fine.vertices + 0.01 * rng.normal(size=fine.vertices.shape))
    model = analyze(fine, 0)
    mid = synthesize(model, 1)
    assert np.allclose(synthesize_from(mid, model, 3).vertices, fine.vertices)


# -- file formats -------------------------------------------------------------

def test_crv_round_trip_is_bitwise(tmp_path, rng):
    c = ControlMesh(rng.normal(size=(9, 2)) * np.pi, corners=[2, 5],
                    frozen={1: "x", 3: "xy"}, level=2)
    p = tmp_path / "c.crv"
    vec = rng.normal(size=(9, 2))
    write_crv(p, c, vectors=vec)
    back, v2 = read_crv(p, with_vectors=True)
    assert np.array_equal(back.vertices, c.vertices)
    assert np.array_equal(v2, vec)
    assert back.corners == c.corners and back.level == 2
    assert np.array_equal(back.frozen, c.frozen)


def test_obj_round_trip_is_bitwise(tmp_path, rng):
    m = grid_patch(3)
    m = m.with_vertices(m.vertices + rng.normal(size=m.vertices.shape) / 3)
    p = str(tmp_path / "m.obj")
    write_obj(p, m)
    back = read_obj(p)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.faces, m.faces)
    assert back.corners == m.corners
    assert read_mesh(p).n_vertices == m.n_vertices


def test_archive_round_trip(tmp_path, rng):
    fine = subdivide_n(subdivide(cube_mesh()), 2)
    fine = fine.with_vertices(fine.vertices + 0.01 * rng.normal(size=fine.vertices.shape))
    model = analyze(fine, 1)
    d = tmp_path / "arch"
    write_archive(str(d), model)
    back = read_archive(str(d))
    assert back.base_level == 1 and back.top_level == 3
    assert np.array_equal(synthesize(back, 3).vertices, synthesize(model, 3).vertices)


def test_malformed_crv_reports_line(tmp_path):
    p = tmp_path / "bad.crv"
    p.write_text("crv 2 4 1\n0 0\n1 0\n1 oops\n0 1\n")
    with pytest.raises(ConfigError) as err:
        read_crv(p)
    assert "line 4" in str(err.value)


def test_operator_cache_respects_level(rng):
    """Same-shaped curves at different levels must not share templates."""
    c = star_curve(rng, 16)
    level_operators(c)
    lifted = subdivide(star_curve(rng, 8))
    assert level_operators(lifted).fine_template.level == 2
    assert synthesize(analyze(subdivide(lifted), 1), 2).n_vertices == 32
