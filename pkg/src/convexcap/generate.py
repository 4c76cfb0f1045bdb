"""Test metrics: closed-form examples and random convex caps built forward from
3D coordinates, whose heights are known exactly."""

import math

import numpy as np
from scipy.spatial import ConvexHull

from .metric import disk_from_dict

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def _vertices(n, boundary):
    return [{"id": i, "boundary": bool(boundary[i])} for i in range(n)]


def _glue_by_endpoints(corners):
    """Pair sides that share an unordered pair of endpoints (no multi-edges)."""
    seen = {}
    gluings = []
    for t, c in enumerate(corners):
        for s in range(3):
            key = frozenset((c[(s + 1) % 3], c[(s + 2) % 3]))
            if key in seen:
                gluings.append([list(seen.pop(key)), [t, s]])
            else:
                seen[key] = (t, s)
    return gluings


def metric_from_cap(points, triangles, boundary):
    """Disk dict of the polyhedral surface with the given 3D ``points`` and
    ``triangles``; intrinsic lengths are 3D distances."""
    pts = np.asarray(points, dtype=float)
    tris = []
    for c in triangles:
        c = [int(v) for v in c]
        lengths = [float(np.linalg.norm(pts[c[(s + 1) % 3]] - pts[c[(s + 2) % 3]])) for s in range(3)]
        tris.append({"corners": c, "lengths": lengths})
    return {
        "vertices": _vertices(len(pts), boundary),
        "triangles": tris,
        "gluings": _glue_by_endpoints([t["corners"] for t in tris]),
    }


def square_pyramid_dict():
    """Apex 0 over the centre of the square with corners (+-1, +-1, 0), height 1."""
    pts = [(0, 0, 1), (1, 1, 0), (-1, 1, 0), (-1, -1, 0), (1, -1, 0)]
    tris = [(0, k, k % 4 + 1) for k in range(1, 5)]
    return metric_from_cap(pts, tris, [False, True, True, True, True])


def square_pyramid_disk():
    return disk_from_dict(square_pyramid_dict())


def wall_wedge_dict():
    """Upper boundary of the lower hull of (0,0,1), (1,0,0), (0,1,0).

    Vertex 0 is the interior singularity, 1 and 2 the boundary ones.  The
    equilateral top face and the vertical right-angled wall are glued along
    the two edges at vertex 0.
    """
    return {
        "vertices": _vertices(3, [False, True, True]),
        "triangles": [
            {"corners": [0, 1, 2], "lengths": [SQRT2, SQRT2, SQRT2]},
            {"corners": [0, 1, 2], "lengths": [2.0, SQRT2, SQRT2]},
        ],
        "gluings": [[[0, 1], [1, 1]], [[0, 2], [1, 2]]],
    }


def wall_wedge_disk():
    return disk_from_dict(wall_wedge_dict())


def doubled_polygon_dict(lengths):
    """Two copies of a triangle glued along the sides at corner 0.

    Its cap is the triangle standing vertically on side 0 (all prisms degenerate).
    """
    return {
        "vertices": _vertices(3, [False, True, True]),
        "triangles": [
            {"corners": [0, 1, 2], "lengths": list(lengths)},
            {"corners": [0, 2, 1], "lengths": list(lengths)},
        ],
        "gluings": [[[0, 1], [1, 2]], [[0, 2], [1, 1]]],
    }


def doubled_triangle_disk(base=2.0, height=1.0):
    side = math.hypot(base / 2, height)
    return disk_from_dict(doubled_polygon_dict((base, side, side)))


def doubled_rectangle_dict(a=2.0, b=1.0):
    """Two a x b rectangles glued along three sides; the side of length ``a``
    between vertices 0 and 1 stays open.

    The corners on the open side have total angle pi, so this disk has no
    boundary singularities.
    """
    d = math.hypot(a, b)
    return {
        "vertices": _vertices(4, [True, True, False, False]),
        "triangles": [
            {"corners": [0, 1, 2], "lengths": [b, d, a]},
            {"corners": [0, 2, 3], "lengths": [a, b, d]},
            {"corners": [0, 2, 1], "lengths": [b, a, d]},
            {"corners": [0, 3, 2], "lengths": [a, d, b]},
        ],
        "gluings": [
            [[0, 1], [1, 2]],
            [[2, 2], [3, 1]],
            [[0, 0], [2, 0]],
            [[1, 0], [3, 0]],
            [[1, 1], [3, 2]],
        ],
    }


def doubled_rectangle_disk(a=2.0, b=1.0):
    return disk_from_dict(doubled_rectangle_dict(a, b))


def ring_dict(ring_height=0.8, apex_height=1.0):
    """Centre vertex over a hexagonal ring over a hexagonal boundary.

    Vertex 0 is the centre, 1..6 the ring (interior), 7..12 the boundary.
    """
    pts = [(0.0, 0.0, apex_height)]
    for k in range(6):
        a = k * math.pi / 3
        pts.append((math.cos(a), math.sin(a), ring_height))
    for k in range(6):
        a = k * math.pi / 3
        pts.append((2 * math.cos(a), 2 * math.sin(a), 0.0))
    tris = []
    for k in range(6):
        r0, r1 = 1 + k, 1 + (k + 1) % 6
        b0, b1 = 7 + k, 7 + (k + 1) % 6
        tris.append((0, r0, r1))
        tris.append((r0, b0, b1))
        tris.append((r0, b1, r1))
    return metric_from_cap(pts, tris, [False] * 7 + [True] * 6)


def ring_disk():
    return disk_from_dict(ring_dict())


def random_cap(rng, n, min_defect=1e-3, max_tries=1000):
    """Random convex cap with ``n`` sampled points.

    Points are uniform in [-1, 1]^2; those on the planar hull get height 0
    (the base) and the rest a height in (0, 1].  The upper hull is the cap.
    Samples with no interior vertex, or with a vertex whose angle defect is
    below ``min_defect``, are redrawn.

    Returns ``(disk_dict, heights)`` where heights are keyed by vertex id.
    """
    from .metric import defects

    for _ in range(max_tries):
        xy = rng.uniform(-1.0, 1.0, size=(n, 2))
        z = 1.0 - rng.uniform(0.0, 1.0, size=n)  # in (0, 1]
        planar = ConvexHull(xy)
        on_hull = np.zeros(n, dtype=bool)
        on_hull[planar.vertices] = True
        if on_hull.all():
            continue
        z[on_hull] = 0.0
        pts = np.column_stack([xy, z])
        hull = ConvexHull(pts)
        upper = [
            tuple(int(v) for v in simplex)
            for simplex, eq in zip(hull.simplices, hull.equations)
            if eq[2] > 1e-12
        ]
        used = sorted({v for tri in upper for v in tri})
        if not any(not on_hull[v] for v in used):
            continue
        remap = {v: k for k, v in enumerate(used)}
        tris = []
        for tri in upper:
            a, b, c = (pts[v] for v in tri)
            if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0:
                tri = (tri[0], tri[2], tri[1])
            tris.append(tuple(remap[v] for v in tri))
        sub = pts[used]
        data = metric_from_cap(sub, tris, [bool(on_hull[v]) for v in used])
        disk = disk_from_dict(data)
        if np.min(defects(disk)) < min_defect:
            continue
        heights = {i: float(sub[i, 2]) for i in range(len(used))}
        return data, heights
    raise RuntimeError("could not sample a valid random cap")
