"""Geometry kernel: curves, regions, triangulation, extrusion, Booleans."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skexcraft.geom_kernel import (
    EmptyResult,
    FaceRegion,
    SelfIntersecting,
    StepSolid,
    ZeroHeight,
    arc_params,
    circle_params,
    circle_segment_count,
    classify_composed,
    classify_composed_batch,
    classify_point,
    csg_surface_sample,
    discretize_arc,
    discretize_circle,
    extrude_region,
    extrude_step,
    face_area,
    face_region,
    loop_to_ring,
    mesh_area,
    mesh_volume,
    meshes_to_obj,
    point_in_face,
    point_in_solid,
    ring_area,
    ring_signed_distance,
    sample_mesh_surface,
    sketch_to_svg,
    triangulate,
)

SQUARE = [
    ("line", [(0.0, 0.0), (1.0, 0.0)]),
    ("line", [(1.0, 0.0), (1.0, 1.0)]),
    ("line", [(1.0, 1.0), (0.0, 1.0)]),
    ("line", [(0.0, 1.0), (0.0, 0.0)]),
]


def square_spec(x0, y0, x1, y1):
    return [
        ("line", [(x0, y0), (x1, y0)]),
        ("line", [(x1, y0), (x1, y1)]),
        ("line", [(x1, y1), (x0, y1)]),
        ("line", [(x0, y1), (x0, y0)]),
    ]


def unit_cube_solid():
    return StepSolid([face_region(SQUARE)], 0.0, 1.0)


# ---------------------------------------------------------------------------
# curves


def test_arc_params_semicircle():
    center, radius, a0, sweep = arc_params((0, 0), (1, 1), (2, 0))
    assert center == pytest.approx((1.0, 0.0))
    assert radius == pytest.approx(1.0)
    assert sweep == pytest.approx(-math.pi)  # start->up->end is clockwise


def test_arc_params_quarter_ccw():
    _, radius, _, sweep = arc_params((1, 0), (math.sqrt(0.5), math.sqrt(0.5)), (0, 1))
    assert radius == pytest.approx(1.0)
    assert sweep == pytest.approx(math.pi / 2)


def test_arc_params_collinear_raises():
    with pytest.raises(ValueError):
        arc_params((0, 0), (1, 1), (2, 2))


def test_circle_fit_recovers_exact_circle():
    # circles are stored as two diametral point pairs, so the centroid is the
    # exact center and the mean distance the exact radius
    a = 0.3
    pts = [
        (3 + 2 * math.cos(t), -1 + 2 * math.sin(t))
        for t in (a, a + math.pi / 2, a + math.pi, a + 3 * math.pi / 2)
    ]
    center, radius = circle_params(pts)
    assert center == pytest.approx((3.0, -1.0), abs=1e-9)
    assert radius == pytest.approx(2.0, abs=1e-9)


def test_unit_circle_chord_tolerance_needs_71_segments():
    assert circle_segment_count(1.0, 1e-3) >= 71
    ring = discretize_circle(
        [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)], 1e-3
    )
    assert len(ring) >= 71


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.1, 5.0),
    st.floats(0.2, 2 * math.pi - 0.2),
    st.floats(0.0, 2 * math.pi),
)
def test_arc_discretization_respects_chord_tolerance(radius, sweep, a0):
    tol = 1e-3
    s = (radius * math.cos(a0), radius * math.sin(a0))
    m = (radius * math.cos(a0 + sweep / 2), radius * math.sin(a0 + sweep / 2))
    e = (radius * math.cos(a0 + sweep), radius * math.sin(a0 + sweep))
    poly = discretize_arc(s, m, e, tol)
    assert poly[0] == s and poly[-1] == e
    for (x0, y0), (x1, y1) in zip(poly, poly[1:]):
        mid = ((x0 + x1) / 2, (y0 + y1) / 2)
        # chord midpoint must stay within tol of the arc
        assert abs(math.hypot(*mid) - radius) <= tol + 1e-9


def test_straight_arc_degrades_to_segment():
    poly = discretize_arc((0, 0), (0.5, 0.5), (1, 1), 1e-3)
    assert poly == [(0, 0), (1, 1)]


def test_loop_to_ring_chains_without_duplicates():
    ring = loop_to_ring(SQUARE, 1e-3)
    assert len(ring) == 4
    assert ring_area(np.asarray(ring)) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# regions


def test_face_area_with_hole():
    region = face_region(SQUARE, [square_spec(0.25, 0.25, 0.75, 0.75)])
    assert face_area(region) == pytest.approx(1.0 - 0.25)
    assert ring_area(region.outer) > 0  # outer forced counterclockwise
    assert ring_area(region.holes[0]) < 0  # holes forced clockwise


def test_point_in_face_even_odd():
    region = face_region(SQUARE, [square_spec(0.25, 0.25, 0.75, 0.75)])
    assert point_in_face((0.1, 0.1), region)
    assert not point_in_face((0.5, 0.5), region)  # inside the hole
    assert not point_in_face((1.5, 0.5), region)


def test_ring_signed_distance_signs():
    region = face_region(SQUARE)
    assert ring_signed_distance((0.5, 0.5), region.rings()) == pytest.approx(-0.5)
    assert ring_signed_distance((2.0, 0.5), region.rings()) == pytest.approx(1.0)
    assert ring_signed_distance((1.0, 0.5), region.rings()) == pytest.approx(0.0)


def test_circle_face_area_converges():
    circle = [("circle", [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])]
    region = face_region(circle, tol=1e-4)
    assert face_area(region) == pytest.approx(math.pi, rel=1e-3)


# ---------------------------------------------------------------------------
# triangulation


def test_triangulate_square():
    verts, tris = triangulate(face_region(SQUARE))
    assert len(tris) == 2
    total = 0.0
    for t in tris:
        a, b, c = verts[t[0]], verts[t[1]], verts[t[2]]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        assert cross >= 0  # counterclockwise
        total += cross / 2
    assert total == pytest.approx(1.0)


def test_triangulate_with_hole_covers_region_area():
    region = face_region(SQUARE, [square_spec(0.25, 0.25, 0.75, 0.75)])
    verts, tris = triangulate(region)
    total = 0.0
    for t in tris:
        a, b, c = verts[t[0]], verts[t[1]], verts[t[2]]
        total += ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2
    assert total == pytest.approx(face_area(region))


def test_triangulate_two_holes():
    region = face_region(
        SQUARE,
        [square_spec(0.1, 0.1, 0.3, 0.3), square_spec(0.6, 0.6, 0.9, 0.9)],
    )
    verts, tris = triangulate(region)
    total = sum(
        ((verts[b][0] - verts[a][0]) * (verts[c][1] - verts[a][1])
         - (verts[b][1] - verts[a][1]) * (verts[c][0] - verts[a][0])) / 2
        for a, b, c in tris
    )
    assert total == pytest.approx(face_area(region))


def test_triangulate_concave_polygon():
    lshape = [
        ("line", [(0, 0), (2, 0)]),
        ("line", [(2, 0), (2, 1)]),
        ("line", [(2, 1), (1, 1)]),
        ("line", [(1, 1), (1, 2)]),
        ("line", [(1, 2), (0, 2)]),
        ("line", [(0, 2), (0, 0)]),
    ]
    verts, tris = triangulate(face_region(lshape))
    total = sum(
        ((verts[b][0] - verts[a][0]) * (verts[c][1] - verts[a][1])
         - (verts[b][1] - verts[a][1]) * (verts[c][0] - verts[a][0])) / 2
        for a, b, c in tris
    )
    assert total == pytest.approx(3.0)


def test_bowtie_raises_self_intersecting():
    bowtie = FaceRegion(np.asarray([(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]))
    with pytest.raises(SelfIntersecting):
        triangulate(bowtie)


def test_crossing_hole_raises_self_intersecting():
    region = face_region(SQUARE, [square_spec(0.5, 0.25, 1.5, 0.75)])
    with pytest.raises(SelfIntersecting):
        triangulate(region)


# ---------------------------------------------------------------------------
# extrusion meshes


def edge_pairing(mesh):
    """Map from undirected edge to list of directed occurrences."""
    edges = {}
    for f in mesh.faces:
        for i in range(3):
            a, b = int(f[i]), int(f[(i + 1) % 3])
            edges.setdefault(frozenset((a, b)), []).append((a, b))
    return edges


def assert_watertight(mesh):
    for edge, occ in edge_pairing(mesh).items():
        assert len(occ) == 2, f"edge {edge} appears {len(occ)} times"
        assert occ[0] == (occ[1][1], occ[1][0]), "edge orientations must oppose"


def test_unit_cube_mesh_is_exact():
    mesh = extrude_region(face_region(SQUARE), 0.0, 1.0)
    assert len(mesh.vertices) == 8
    assert len(mesh.faces) == 12
    assert_watertight(mesh)
    assert mesh_area(mesh) == pytest.approx(6.0, abs=1e-6)
    assert mesh_volume(mesh) == pytest.approx(1.0, abs=1e-6)


def test_mesh_with_hole_is_watertight():
    region = face_region(SQUARE, [square_spec(0.25, 0.25, 0.75, 0.75)])
    mesh = extrude_region(region, 0.0, 0.5)
    assert_watertight(mesh)
    assert mesh_volume(mesh) == pytest.approx(0.75 * 0.5, abs=1e-9)


def test_cylinder_mesh_volume_approaches_pi():
    circle = [("circle", [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])]
    mesh = extrude_region(face_region(circle, tol=1e-4), 0.0, 1.0)
    assert_watertight(mesh)
    assert mesh_volume(mesh) == pytest.approx(math.pi, rel=1e-3)


def test_zero_height_raises():
    with pytest.raises(ZeroHeight):
        extrude_region(face_region(SQUARE), 0.5, 0.5)


def test_extrude_step_applies_placement():
    rot = np.asarray([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    solid = StepSolid([face_region(SQUARE)], 0.0, 1.0, rot, np.asarray([10.0, 0.0, 0.0]))
    mesh = extrude_step(solid)
    assert mesh_volume(mesh) == pytest.approx(1.0, abs=1e-9)
    # corner (1,0,0) maps to rot@(1,0,0)+t = (10,1,0)
    assert any(np.allclose(v, [10.0, 1.0, 0.0]) for v in mesh.vertices)


# ---------------------------------------------------------------------------
# membership and classification, cross-checked against a winding-number oracle


def winding_inside(mesh, pt):
    """Generalized winding number test (solid angle sum over triangles)."""
    v = mesh.vertices - np.asarray(pt, dtype=np.float64)
    a = v[mesh.faces[:, 0]]
    b = v[mesh.faces[:, 1]]
    c = v[mesh.faces[:, 2]]
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", a, c) * lb
    )
    w = np.sum(2 * np.arctan2(num, den)) / (4 * math.pi)
    return abs(w) > 0.5


def test_point_in_solid_matches_winding_oracle():
    rot = np.asarray([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
    solid = StepSolid(
        [face_region(SQUARE, [square_spec(0.25, 0.25, 0.75, 0.75)])],
        -0.25,
        0.5,
        rot,
        np.asarray([0.1, -0.2, 0.3]),
    )
    mesh = extrude_step(solid)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.5, 1.5, size=(250, 3))
    for p in pts:
        assert point_in_solid(solid, p) == winding_inside(mesh, p)


def test_classify_point_three_way():
    solid = unit_cube_solid()
    assert classify_point(solid, (0.5, 0.5, 0.5)) == 1
    assert classify_point(solid, (0.5, 0.5, 1.0)) == 0
    assert classify_point(solid, (1.0, 1.0, 0.5)) == 0
    assert classify_point(solid, (1.5, 0.5, 0.5)) == -1


# ---------------------------------------------------------------------------
# Boolean composition


def shifted_cube(dx, boolean):
    return StepSolid(
        [face_region(SQUARE)], 0.0, 1.0, np.eye(3), np.asarray([dx, 0.0, 0.0]), boolean
    )


def test_union_classification():
    solids = [shifted_cube(0.0, "U"), shifted_cube(0.5, "U")]
    assert classify_composed(solids, (1.2, 0.5, 0.5)) == 1  # only in second
    assert classify_composed(solids, (0.9, 0.5, 0.5)) == 1  # in both
    # the shared wall x=1 is interior to the union
    assert classify_composed(solids, (1.0, 0.5, 0.5)) == 1
    assert classify_composed(solids, (1.5, 0.5, 0.5)) == 0  # far wall survives


def test_subtract_classification():
    inner = StepSolid(
        [face_region(square_spec(0.25, 0.25, 0.75, 0.75))],
        -0.5,
        1.5,
        boolean="S",
    )
    solids = [unit_cube_solid(), inner]
    assert classify_composed(solids, (0.5, 0.5, 0.5)) == -1  # carved away
    assert classify_composed(solids, (0.1, 0.1, 0.5)) == 1  # remaining material
    # the cutter wall inside the cube becomes surface of the result
    assert classify_composed(solids, (0.25, 0.5, 0.5)) == 0
    # the cutter wall outside the cube is nothing
    assert classify_composed(solids, (0.25, 0.5, 1.2)) == -1


def test_intersect_classification():
    solids = [unit_cube_solid(), shifted_cube(0.5, "I")]
    assert classify_composed(solids, (0.75, 0.5, 0.5)) == 1
    assert classify_composed(solids, (0.25, 0.5, 0.5)) == -1
    assert classify_composed(solids, (0.5, 0.5, 0.5)) == 0  # cutter wall
    assert classify_composed(solids, (1.0, 0.5, 0.5)) == 0  # kept wall


def test_csg_surface_sample_cube_with_through_hole():
    cutter = StepSolid(
        [face_region(square_spec(0.25, 0.25, 0.75, 0.75))],
        -0.5,
        1.5,
        boolean="S",
    )
    solids = [unit_cube_solid(), cutter]
    rng = np.random.default_rng(3)
    pts = csg_surface_sample(solids, 500, rng)
    assert pts.shape == (500, 3)
    cls = classify_composed_batch(solids, pts)
    assert (cls == 0).all()
    # some points must come from the cutter's walls (the new inner surface)
    inner = (
        (np.isclose(pts[:, 0], 0.25) | np.isclose(pts[:, 0], 0.75))
        & (pts[:, 1] > 0.25) & (pts[:, 1] < 0.75)
    ) | (
        (np.isclose(pts[:, 1], 0.25) | np.isclose(pts[:, 1], 0.75))
        & (pts[:, 0] > 0.25) & (pts[:, 0] < 0.75)
    )
    assert inner.any()
    # no point may sit strictly inside the removed channel
    in_channel = (
        (pts[:, 0] > 0.26) & (pts[:, 0] < 0.74)
        & (pts[:, 1] > 0.26) & (pts[:, 1] < 0.74)
    )
    assert not in_channel.any()


def test_csg_empty_result():
    eraser = StepSolid(
        [face_region(square_spec(-1.0, -1.0, 2.0, 2.0))], -1.0, 2.0, boolean="S"
    )
    solids = [unit_cube_solid(), eraser]
    with pytest.raises(EmptyResult):
        csg_surface_sample(solids, 100, np.random.default_rng(0), max_rounds=2)


def test_sample_mesh_surface_is_on_surface():
    mesh = extrude_region(face_region(SQUARE), 0.0, 1.0)
    pts = sample_mesh_surface(mesh, 400, np.random.default_rng(1))
    d = np.stack([
        np.abs(pts).min(axis=1),
        np.abs(1 - pts).min(axis=1),
    ]).min(axis=0)
    assert (d < 1e-9).all()


# ---------------------------------------------------------------------------
# export


def test_svg_color_codes_curves():
    curves = [
        ("line", [(0.0, 0.0), (32.0, 0.0)]),
        ("arc", [(32.0, 0.0), (48.0, 16.0), (32.0, 32.0)]),
        ("circle", [(40.0, 32.0), (32.0, 40.0), (24.0, 32.0), (32.0, 24.0)]),
    ]
    svg = sketch_to_svg(curves)
    assert 'viewBox="0 0 64 64"' in svg
    assert svg.count("<path") == 2
    assert "#000000" in svg and "#007f00" in svg and "#cc0000" in svg
    assert "<circle" in svg


def test_svg_flips_y():
    svg = sketch_to_svg([("line", [(0.0, 0.0), (10.0, 0.0)])])
    assert "M 0 64 L 10 64" in svg


def test_obj_export_roundtrip():
    mesh = extrude_region(face_region(SQUARE), 0.0, 1.0)
    obj = meshes_to_obj([mesh, mesh])
    v_lines = [l for l in obj.splitlines() if l.startswith("v ")]
    f_lines = [l for l in obj.splitlines() if l.startswith("f ")]
    assert len(v_lines) == 16 and len(f_lines) == 24
    idx = [int(p) for l in f_lines for p in l.split()[1:]]
    assert min(idx) == 1 and max(idx) == 16


# ---------------------------------------------------------------------------
# bridge from the quantized model


def test_evaluate_quantized_cube():
    from skexcraft.geom_kernel.evaluate import (
        evaluate_model,
        model_meshes,
        model_to_obj,
        model_to_svgs,
        sample_model_surface,
    )
    from skexcraft.seq_core import loads_model
    from pathlib import Path

    model = loads_model((Path(__file__).parent / "data" / "cube.json").read_text())
    solids = evaluate_model(model)
    assert len(solids) == 1
    s = solids[0]
    assert (s.lo, s.hi) == (-0.5, 0.5)
    # bins 0..63 dequantize to a (63/64)-wide square of bin centers
    side = 63.0 / 64.0
    mesh = model_meshes(model)[0]
    assert mesh_volume(mesh) == pytest.approx(side * side * 1.0, abs=1e-9)
    assert point_in_solid(s, (0.5, 0.5, 0.0))
    assert not point_in_solid(s, (0.5, 0.5, 0.7))

    obj = model_to_obj(model)
    assert obj.startswith("o step0")
    assert len([l for l in obj.splitlines() if l.startswith("v ")]) == 8

    svgs = model_to_svgs(model)
    assert len(svgs) == 1 and svgs[0].count("<path") == 4

    pts = sample_model_surface(model, 200, np.random.default_rng(0))
    assert pts.shape == (200, 3)


def test_evaluate_applies_scale_about_center():
    from skexcraft.geom_kernel.evaluate import step_solid
    from skexcraft.seq_core import (
        ExtrudeParams,
        Face,
        IDENTITY_ROTATION,
        Loop,
        Sketch,
        curve,
    )

    loop = Loop(
        (
            curve("line", [(0, 0), (63, 0)]),
            curve("line", [(63, 0), (63, 63)]),
            curve("line", [(63, 63), (0, 63)]),
            curve("line", [(0, 63), (0, 0)]),
        )
    )
    # factor bin 15 -> 0.5: half-size square about the grid center
    ext = ExtrudeParams((48, 16), IDENTITY_ROTATION, (32, 32, 32), (32, 32, 15), "U")
    s = step_solid(Sketch((Face(loop),)), ext)
    got = face_area(s.regions[0])
    assert got == pytest.approx((63 / 64 * 0.5) ** 2, abs=1e-12)
