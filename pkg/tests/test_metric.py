import copy
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexcap import generate
from convexcap.errors import DegenerateTriangle, GluingMismatch, InvalidDisk, NotADisk, ParseError
from convexcap.metric import (
    approx_boundary_distance,
    disk_from_dict,
    edge_graph_distances,
    load_disk,
    require_solvable,
    save_disk,
    validate_convexity,
    vertex_angles,
)

from conftest import planar_disk, random_disk

SQRT2, SQRT3 = math.sqrt(2), math.sqrt(3)


def angle_of(disk, vid):
    return next(a for a in vertex_angles(disk) if a.vertex == vid)


def hexagon_fan():
    """Six unit equilateral triangles around a flat interior vertex."""
    pts = [(0.0, 0.0)] + [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
    tris = [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)]
    return planar_disk(pts, tris, [False] + [True] * 6)


def reflex_corner_disk():
    """Three right-angled corners at boundary vertex 0: total angle 3pi/2."""
    pts = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)]
    tris = [(0, 1, 2), (0, 2, 3), (0, 3, 4)]
    return planar_disk(pts, tris, [True] * 5)


class TestLoading:
    def test_square_pyramid(self, pyramid):
        assert pyramid.n_vertices == 5
        assert len(pyramid.boundary_vertices) == 4
        assert pyramid.interior == (0,)
        for lengths in pyramid.triangulation.lengths:
            assert sorted(lengths) == pytest.approx([SQRT3, SQRT3, 2.0], rel=1e-15)

    def test_wall_wedge_multi_edge(self, wall_wedge):
        assert wall_wedge.n_vertices == 3
        assert wall_wedge.interior == (0,)
        assert len(wall_wedge.triangulation.interior_edges()) == 2

    def test_gluing_length_mismatch(self):
        data = generate.doubled_polygon_dict((2.0, SQRT2, SQRT2))
        data["triangles"][1]["lengths"] = [2.0, 1.0, SQRT2]
        with pytest.raises(GluingMismatch):
            disk_from_dict(data)

    def test_length_tolerance_is_relative(self):
        data = generate.wall_wedge_dict()
        data["triangles"][1]["lengths"][1] *= 1 + 1e-11
        disk_from_dict(data)
        data["triangles"][1]["lengths"][1] *= 1 + 1e-8
        with pytest.raises(GluingMismatch):
            disk_from_dict(data)

    def test_degenerate_triangle(self):
        data = generate.wall_wedge_dict()
        data["triangles"][0]["lengths"] = [1.0, 1.0, 2.0]
        with pytest.raises(DegenerateTriangle):
            disk_from_dict(data)

    def test_disconnected_complex(self):
        data = {
            "vertices": [{"id": i, "boundary": True} for i in range(6)],
            "triangles": [
                {"corners": [0, 1, 2], "lengths": [1, 1, 1]},
                {"corners": [3, 4, 5], "lengths": [1, 1, 1]},
            ],
            "gluings": [],
        }
        with pytest.raises(NotADisk):
            disk_from_dict(data)

    def test_closed_surface_rejected(self):
        # two triangles glued along all three sides form a sphere
        data = {
            "vertices": [{"id": i, "boundary": False} for i in range(3)],
            "triangles": [
                {"corners": [0, 1, 2], "lengths": [1, 1, 1]},
                {"corners": [0, 2, 1], "lengths": [1, 1, 1]},
            ],
            "gluings": [[[0, 0], [1, 0]], [[0, 1], [1, 2]], [[0, 2], [1, 1]]],
        }
        with pytest.raises(NotADisk):
            disk_from_dict(data)

    def test_wrong_boundary_flag(self):
        data = generate.square_pyramid_dict()
        data["vertices"][0]["boundary"] = True
        with pytest.raises(NotADisk):
            disk_from_dict(data)

    def test_side_glued_twice(self):
        data = generate.square_pyramid_dict()
        data["gluings"].append([list(data["gluings"][0][0]), [0, 0]])
        with pytest.raises(NotADisk):
            disk_from_dict(data)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("vertices"),
            lambda d: d["triangles"][0].update(corners=[0, 1]),
            lambda d: d["triangles"][0].update(lengths=[1, "x", 1]),
            lambda d: d["triangles"][0].update(corners=[0, 1, 99]),
            lambda d: d["triangles"][0].update(lengths=[-1, 1, 1]),
            lambda d: d["gluings"].append([[0, 7], [1, 1]]),
            lambda d: d["vertices"][0].update(boundary="no"),
        ],
    )
    def test_malformed_input(self, mutate):
        data = generate.square_pyramid_dict()
        mutate(data)
        with pytest.raises(ParseError):
            disk_from_dict(data)

    def test_bad_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_disk(path)

    def test_orientation_is_repaired(self):
        # the same pyramid with one triangle listed clockwise
        data = generate.square_pyramid_dict()
        t = data["triangles"][2]
        t["corners"] = [t["corners"][0], t["corners"][2], t["corners"][1]]
        t["lengths"] = [t["lengths"][0], t["lengths"][2], t["lengths"][1]]
        for g in data["gluings"]:
            for side in g:
                if side[0] == 2 and side[1] != 0:
                    side[1] = 3 - side[1]
        disk = disk_from_dict(data)
        assert angle_of(disk, 0).cone_angle == pytest.approx(4 * math.acos(1 / 3), abs=1e-12)

    def test_save_load_round_trip(self, tmp_path, pyramid, wall_wedge):
        for disk in (pyramid, wall_wedge, random_disk(3, 12)[0]):
            path = tmp_path / "disk.json"
            save_disk(disk, path)
            assert load_disk(path) == disk
            assert json.loads(path.read_text(encoding="utf-8")) == disk.to_dict()


class TestAngles:
    def test_pyramid_apex(self, pyramid):
        a = angle_of(pyramid, 0)
        assert a.cone_angle == pytest.approx(4 * math.acos(1 / 3), abs=1e-12)
        assert a.cone_angle == pytest.approx(4.9239, abs=1e-4)
        assert a.defect == pytest.approx(1.3593, abs=1e-4)

    def test_flat_interior_vertex(self):
        a = angle_of(hexagon_fan(), 0)
        assert a.cone_angle == pytest.approx(2 * math.pi, abs=1e-12)
        assert a.defect == pytest.approx(0.0, abs=1e-12)

    def test_wall_wedge_vertex(self, wall_wedge):
        a = angle_of(wall_wedge, 0)
        assert a.cone_angle == pytest.approx(math.pi / 3 + math.pi / 2, abs=1e-12)
        assert a.defect == pytest.approx(2 * math.pi - (math.pi / 3 + math.pi / 2), abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(5, 14))
    def test_angle_sums_match(self, seed, n):
        disk, _ = random_disk(seed, n)
        tri = disk.triangulation
        corner_total = sum(sum(tri.corner_angles(t)) for t in range(tri.n_faces))
        vertex_total = sum(a.cone_angle for a in vertex_angles(disk))
        assert corner_total == pytest.approx(vertex_total, abs=1e-12)
        assert corner_total == pytest.approx(math.pi * tri.n_faces, abs=1e-12)


class TestConvexity:
    def test_pyramid_is_convex(self, pyramid):
        assert validate_convexity(pyramid).violations == ()

    def test_wall_wedge_is_convex(self, wall_wedge):
        assert validate_convexity(wall_wedge).convex

    def test_reflex_boundary_vertex_reported(self):
        disk = reflex_corner_disk()
        rep = validate_convexity(disk)
        assert [a.vertex for a in rep.violations] == [0]
        assert rep.violations[0].cone_angle == pytest.approx(1.5 * math.pi)

    def test_require_solvable(self, pyramid):
        require_solvable(pyramid)
        with pytest.raises(InvalidDisk, match="not convex at vertices 0"):
            require_solvable(reflex_corner_disk())
        with pytest.raises(InvalidDisk, match="no interior singularity"):
            require_solvable(hexagon_fan())
        with pytest.raises(InvalidDisk, match="no boundary singularity"):
            require_solvable(generate.doubled_rectangle_disk())


class TestBoundaryDistance:
    def test_pyramid_apex(self, pyramid):
        d0 = approx_boundary_distance(pyramid, 0)
        assert d0[0] == pytest.approx(SQRT3, abs=1e-12)
        prev = d0[0]
        for r in range(1, 7):
            d = approx_boundary_distance(pyramid, r)[0]
            assert 1.0 - 1e-12 <= d <= prev + 1e-12
            prev = d
        # the surface geodesic is the slant height of a lateral face
        assert prev == pytest.approx(SQRT2, abs=1e-12)

    def test_boundary_vertices_are_zero(self, pyramid):
        d = approx_boundary_distance(pyramid, 3)
        assert np.all(d[list(pyramid.boundary_vertices)] == 0.0)

    def test_wall_wedge_vertex(self, wall_wedge):
        d = approx_boundary_distance(wall_wedge, 8)[0]
        assert 1.0 - 1e-12 <= d <= 1.0 + 1e-2

    def test_negative_refinement(self, pyramid):
        with pytest.raises(ValueError):
            approx_boundary_distance(pyramid, -1)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(5, 12))
    def test_monotone_and_below_edge_paths(self, seed, n):
        disk, _ = random_disk(seed, n)
        prev = approx_boundary_distance(disk, 0)
        for r in (1, 2, 3):
            cur = approx_boundary_distance(disk, r)
            assert np.all(cur <= prev + 1e-12)
            prev = cur
        for i in disk.interior:
            graph = edge_graph_distances(disk, i)
            for b in disk.boundary_vertices:
                assert prev[i] <= graph[b] + 1e-12


def test_disk_dict_is_not_mutated():
    data = generate.square_pyramid_dict()
    before = copy.deepcopy(data)
    disk_from_dict(data)
    assert data == before
