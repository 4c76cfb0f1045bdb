import math

import numpy as np
import pytest

from convexcap import generate
from convexcap.capspace import FLAT_TOL, feasibility
from convexcap.errors import InfeasibleHeights
from convexcap.metric import disk_from_dict
from convexcap.triangulation import Triangulation


def random_disk(seed, n):
    """A random cap's metric and its true heights (array by vertex index)."""
    data, truth = generate.random_cap(np.random.default_rng(seed), n)
    disk = disk_from_dict(data)
    return disk, np.array([truth[i] for i in disk.ids])


def interior_sample(disk, truth, rng, margin=1e-4, max_tries=200):
    """Feasible heights near a scaled copy of ``truth`` whose cap has no flat
    edge, no steep prism and the disk's own triangulation, so that small
    perturbations of every interior height stay feasible without flips."""
    interior = list(disk.interior)
    for _ in range(max_tries):
        h = rng.uniform(0.3, 0.9) * truth
        h[interior] *= 1 + 0.02 * rng.standard_normal(len(interior))
        try:
            cap = feasibility(disk, h)
        except InfeasibleHeights:
            continue
        if cap.triangulation != disk.triangulation:
            continue
        if max(cap.slopes()) > 1 - margin:
            continue
        if any(th > math.pi - margin for th in cap.theta.values()):
            continue
        return cap
    raise RuntimeError("no interior sample found")


def feasible_sample(disk, truth, rng, max_tries=200):
    """Any feasible heights near the segment from 0 to ``truth``."""
    interior = list(disk.interior)
    for _ in range(max_tries):
        h = rng.uniform(0.0, 1.0) * truth
        h[interior] *= 1 + 0.05 * rng.standard_normal(len(interior))
        h = np.maximum(h, 0.0)
        try:
            return feasibility(disk, h)
        except InfeasibleHeights:
            continue
    raise RuntimeError("no feasible sample found")


def shuffled_triangulation(tri, rng, n_flips):
    """Apply random flips (good or bad) to a triangulation."""
    for _ in range(n_flips):
        sides = [s for s, _ in tri.interior_edges() if tri.is_flippable(s, slack=1e-6)]
        if not sides:
            break
        tri = tri.flip(sides[int(rng.integers(len(sides)))])
    return tri


def planar_disk(points, triangles, boundary):
    pts = [(x, y, 0.0) for x, y in points]
    return disk_from_dict(generate.metric_from_cap(pts, triangles, boundary))


def single_triangulation(corners, lengths, gluings=()):
    return Triangulation.build(corners, lengths, list(gluings))


@pytest.fixture
def pyramid():
    return generate.square_pyramid_disk()


@pytest.fixture
def wall_wedge():
    return generate.wall_wedge_disk()


@pytest.fixture
def ring():
    return generate.ring_disk()
