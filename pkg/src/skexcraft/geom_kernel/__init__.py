"""Continuous geometry kernel: curves, regions, extrusion, Booleans, export.

Everything here works on real coordinates.  The `evaluate` submodule (not
re-exported) bridges from the quantized sequence representation.
"""

from .csg import (
    classify_composed,
    classify_composed_batch,
    composed_meshes,
    csg_surface_sample,
)
from .curves import (
    arc_params,
    circle_params,
    circle_segment_count,
    discretize_arc,
    discretize_circle,
    is_straight,
    loop_to_ring,
)
from .errors import EmptyResult, GeomError, SelfIntersecting, ZeroHeight
from .export import meshes_to_obj, sketch_to_svg
from .region import (
    DEFAULT_CHORD_TOL,
    FaceRegion,
    face_area,
    face_region,
    point_in_face,
    point_in_rings,
    points_in_rings,
    ring_area,
    ring_signed_distance,
    rings_signed_distance,
)
from .solid import (
    StepSolid,
    TriMesh,
    classify_point,
    classify_points,
    extrude_region,
    extrude_step,
    mesh_area,
    mesh_volume,
    point_in_solid,
    sample_mesh_surface,
    solid_area,
    solid_signed_distance,
    solids_signed_distance,
)
from .triangulate import check_simple, triangulate

__all__ = [
    "DEFAULT_CHORD_TOL",
    "EmptyResult",
    "FaceRegion",
    "GeomError",
    "SelfIntersecting",
    "StepSolid",
    "TriMesh",
    "ZeroHeight",
    "arc_params",
    "check_simple",
    "circle_params",
    "circle_segment_count",
    "classify_composed",
    "classify_composed_batch",
    "classify_point",
    "classify_points",
    "composed_meshes",
    "csg_surface_sample",
    "discretize_arc",
    "discretize_circle",
    "extrude_region",
    "extrude_step",
    "face_area",
    "face_region",
    "is_straight",
    "loop_to_ring",
    "mesh_area",
    "mesh_volume",
    "meshes_to_obj",
    "point_in_face",
    "point_in_rings",
    "point_in_solid",
    "points_in_rings",
    "ring_area",
    "ring_signed_distance",
    "rings_signed_distance",
    "sample_mesh_surface",
    "sketch_to_svg",
    "solid_area",
    "solid_signed_distance",
    "solids_signed_distance",
    "triangulate",
]
