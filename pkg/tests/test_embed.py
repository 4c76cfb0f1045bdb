import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from convexcap import generate
from convexcap.capspace import feasibility
from convexcap.embed import develop, export_obj, obj_text, read_obj, verify_isometry
from convexcap.errors import ClosureFailure
from convexcap.metric import disk_from_dict
from convexcap.solver import maximize

from conftest import random_disk


def solved(disk):
    res = maximize(disk)
    return res, develop(res.cap, res.classification)


def pyramid_points():
    return np.array([(0, 0, 1), (1, 1, 0), (-1, 1, 0), (-1, -1, 0), (1, -1, 0)], float)


class TestKnownCaps:
    def test_pyramid_coordinates(self, pyramid):
        _, emb = solved(pyramid)
        assert emb.upper[:, 2].tolist() == pytest.approx([1, 0, 0, 0, 0], abs=1e-8)
        got = sorted(pdist(emb.upper))
        want = sorted(pdist(pyramid_points()))
        np.testing.assert_allclose(got, want, atol=1e-8)
        assert emb.wall_faces == [] and len(emb.upper_faces) == 4
        assert len(emb.base_face) == 4

    def test_wall_wedge_congruent(self, wall_wedge):
        _, emb = solved(wall_wedge)
        assert len(emb.points) == 4
        want = np.array([(0, 0, 1), (1, 0, 0), (0, 1, 0), (0, 0, 0)], float)
        np.testing.assert_allclose(sorted(pdist(emb.points)), sorted(pdist(want)), atol=1e-9)
        assert emb.labels[-1] == ("base", 0)
        assert len(emb.wall_faces) >= 1
        rep = verify_isometry(emb, wall_wedge)
        assert rep.ok()

    def test_doubled_triangle_is_flat(self):
        disk = generate.doubled_triangle_disk()
        _, emb = solved(disk)
        assert emb.flat2d and emb.upper_faces == []
        np.testing.assert_allclose(emb.points[:, 1], 0.0, atol=1e-12)
        assert obj_text(emb) == "v 0 0 1\nv 1 0 0\nv -1 0 0\nf 3 2 1\n"
        assert verify_isometry(emb, disk).max_length_error <= 1e-9

    def test_not_classical_refused(self, pyramid):
        cap = feasibility(pyramid, {0: 0.5})
        with pytest.raises(ClosureFailure):
            develop(cap, "NotClassical")
        with pytest.raises(ClosureFailure):
            develop(cap, "ClassicalCap3D")


class TestRandomCaps:
    @pytest.mark.parametrize("seed", range(4))
    def test_isometry_and_convexity(self, seed):
        disk, truth = random_disk(seed, 10)
        res, emb = solved(disk)
        rep = verify_isometry(emb, disk)
        assert rep.ok()
        assert rep.max_dihedral <= math.pi + 1e-9
        np.testing.assert_allclose(emb.upper[:, 2], truth, atol=1e-6)
        # upper faces look up
        for f in emb.upper_faces:
            a, b, c = emb.points[list(f)]
            assert np.cross(b - a, c - a)[2] >= -1e-12

    @pytest.mark.parametrize("seed", range(3))
    def test_seed_independent(self, seed):
        disk, _ = random_disk(seed + 20, 9)
        res, emb = solved(disk)
        tri = res.cap.triangulation
        layouts = [develop(res.cap, res.classification, seed=t) for t in range(tri.n_faces)]
        for other in layouts:
            np.testing.assert_allclose(pdist(other.upper), pdist(emb.upper), atol=1e-8)

    def test_perturbation_is_flagged(self):
        disk, _ = random_disk(4, 10)
        _, emb = solved(disk)
        assert verify_isometry(emb, disk).ok()
        v = disk.interior[0]
        emb.points[v, 2] += 1e-3
        assert not verify_isometry(emb, disk).ok()

    def test_extracted_metric_solves_back(self):
        disk, _ = random_disk(8, 10)
        res, emb = solved(disk)
        tri = res.cap.triangulation
        data = generate.metric_from_cap(emb.upper, tri.corners, list(disk.boundary))
        again = maximize(disk_from_dict(data))
        np.testing.assert_allclose(again.cap.heights, res.cap.heights, atol=1e-7)


class TestObj:
    def test_pyramid_file(self, pyramid, tmp_path):
        _, emb = solved(pyramid)
        path = tmp_path / "cap.obj"
        export_obj(emb, path)
        text = path.read_text(encoding="utf-8")
        assert sum(line.startswith("v ") for line in text.splitlines()) == 5
        assert sum(line.startswith("f ") for line in text.splitlines()) == 5
        verts, faces = read_obj(path)
        np.testing.assert_allclose(verts, emb.points, atol=1e-11)
        assert faces == emb.faces()

    def test_deterministic(self, tmp_path):
        disk, _ = random_disk(6, 10)
        blobs = []
        for k in range(2):
            _, emb = solved(disk)
            export_obj(emb, tmp_path / f"{k}.obj")
            blobs.append((tmp_path / f"{k}.obj").read_bytes())
        assert blobs[0] == blobs[1]
        assert b"\r" not in blobs[0] and b"-0 " not in blobs[0]

    def test_missing_directory(self, pyramid, tmp_path):
        _, emb = solved(pyramid)
        with pytest.raises(OSError):
            export_obj(emb, tmp_path / "nowhere" / "cap.obj")
