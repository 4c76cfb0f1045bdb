"""Realize a classical cap in R^3 and export it as a mesh.

The non-degenerate part is developed into the plane triangle by triangle using
projected edge lengths, then every vertex is lifted to its height.  Degenerate
prisms become vertical walls hanging from the ridge edges where they meet the
non-degenerate part.
"""

from collections import deque
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import ConvexHull

from . import _geom
from .errors import ClosureFailure
from .functional import curvatures
from .metric import vertex_angles

CLOSURE_TOL = 1e-6
COPLANAR_TOL = 1e-9


@dataclass
class EmbeddedCap:
    """Coordinates and faces of a realized cap.

    ``points`` holds the upper vertices in vertex-index order followed by the
    base points (projections of raised ridge vertices); faces index ``points``.
    """

    cap: object
    points: np.ndarray
    labels: list  # ("upper", id) or ("base", id) per point
    upper_faces: list
    wall_faces: list
    base_face: tuple
    flat2d: bool = False
    base_cycle: list = field(default_factory=list)  # point indices, counterclockwise

    @property
    def upper(self):
        """Upper vertex coordinates, by vertex index."""
        return self.points[: self.cap.disk.n_vertices]

    def coordinates(self):
        """Upper vertex coordinates keyed by vertex id."""
        ids = self.cap.disk.ids
        return {ids[v]: tuple(float(x) for x in self.upper[v]) for v in range(len(ids))}

    def faces(self):
        return list(self.upper_faces) + list(self.wall_faces) + [self.base_face]


def _place_across(pos, tri, proj, side):
    """Position of the apex of the triangle glued to ``side``."""
    u, v = tri.partner(side)
    a, b = tri.endpoints(side)
    apex = tri.corners[u][v]
    # in u the shared side runs b -> a and the apex lies on its left
    r_b = proj[u][(v + 2) % 3]
    r_a = proj[u][(v + 1) % 3]
    return apex, _geom.place_point(pos[b], pos[a], r_b, r_a, left=True)


def _develop_plane(cap, triangles, seed=None):
    """BFS layout of the projected triangles in ``triangles`` (a sorted list),
    starting from ``seed`` (default: the first of them)."""
    tri = cap.triangulation
    proj = [p.projected for p in cap.prisms]
    allowed = set(triangles)
    pos = {}
    if seed is None:
        seed = triangles[0]
    elif seed not in allowed:
        raise ValueError(f"seed triangle {seed} is not available for the layout")
    pts = _geom.layout(proj[seed])
    for k, v in enumerate(tri.corners[seed]):
        pos[v] = pts[k]
    scale = max(max(l) for l in tri.lengths)
    done = {seed}
    queue = deque([seed])
    while queue:
        t = queue.popleft()
        for s in range(3):
            p = tri.partner((t, s))
            if p is None or p[0] not in allowed or p[0] in done:
                continue
            apex, x = _place_across(pos, tri, proj, (t, s))
            if apex in pos:
                if np.linalg.norm(pos[apex] - x) > CLOSURE_TOL * scale:
                    raise ClosureFailure(
                        f"development does not close at vertex {cap.disk.ids[apex]} "
                        f"(gap {np.linalg.norm(pos[apex] - x):.3e})"
                    )
            else:
                pos[apex] = x
            done.add(p[0])
            queue.append(p[0])
    return pos, done


def _place_remaining(cap, pos):
    """Place vertices that only touch degenerate prisms (collinear placement)."""
    tri = cap.triangulation
    proj = [p.projected for p in cap.prisms]
    changed = True
    while changed:
        changed = False
        for t in range(tri.n_faces):
            c = tri.corners[t]
            for s in range(3):
                a, b = c[(s + 1) % 3], c[(s + 2) % 3]
                if c[s] in pos or a not in pos or b not in pos:
                    continue
                x = _geom.place_point(pos[a], pos[b], proj[t][(s + 2) % 3], proj[t][(s + 1) % 3], left=True)
                pos[c[s]] = x
                changed = True


def develop(cap, classification, seed=None):
    """Explicit coordinates for a classical cap (3D or flat).

    ``seed`` picks the non-degenerate triangle the layout starts from; the
    result is the same up to a planar motion.
    """
    kind = getattr(classification, "kind", classification)
    if kind not in ("ClassicalCap3D", "ClassicalCapFlat2D"):
        raise ClosureFailure(f"cannot embed a cap classified as {classification}")
    disk, tri = cap.disk, cap.triangulation
    deg = set(cap.degenerate_triangles())
    if kind == "ClassicalCapFlat2D":
        return _develop_flat(cap)
    deg_vertices = cap.degenerate_vertices()
    for v, k in zip(disk.interior, curvatures(cap)):
        if v not in deg_vertices and abs(k) > CLOSURE_TOL:
            raise ClosureFailure(
                f"vertex {disk.ids[v]} has curvature {k:.3e}; its development cannot close"
            )
    nondeg = [t for t in range(tri.n_faces) if t not in deg]
    pos, _ = _develop_plane(cap, nondeg, seed)
    _place_remaining(cap, pos)
    n = disk.n_vertices
    upper = np.array([[pos[v][0], pos[v][1], cap.heights[v]] for v in range(n)])
    labels = [("upper", disk.ids[v]) for v in range(n)]

    # ridge edges: sides of non-degenerate triangles glued to degenerate ones
    ridges = []
    for t in nondeg:
        for s in range(3):
            p = tri.partner((t, s))
            if p is not None and p[0] in deg:
                ridges.append(tri.endpoints((t, s)))
    base_index = {}
    extra = []
    for v in sorted({v for e in ridges for v in e}):
        if cap.heights[v] > 0.0:
            base_index[v] = n + len(extra)
            extra.append([upper[v][0], upper[v][1], 0.0])
            labels.append(("base", disk.ids[v]))
    points = np.vstack([upper, np.array(extra).reshape(-1, 3)])

    def foot(v):
        return base_index.get(v, v)

    upper_faces = [tuple(tri.corners[t]) for t in nondeg]
    wall_faces = _walls(points, ridges, foot)

    # base outline: boundary sides of the non-degenerate part and wall feet
    edges = [tri.endpoints(side) for side in tri.boundary_sides() if side[0] not in deg]
    edges = [(a, b) for a, b in edges] + [(foot(a), foot(b)) for a, b in ridges]
    nxt = {}
    for a, b in edges:
        if a != b:
            nxt[a] = b
    start = min(nxt)
    cycle = [start]
    while True:
        w = nxt[cycle[-1]]
        if w == start:
            break
        cycle.append(w)
        if len(cycle) > len(nxt):
            raise ClosureFailure("base outline is not a single cycle")
    base_face = tuple(reversed(cycle))
    return EmbeddedCap(cap, points, labels, upper_faces, wall_faces, base_face, False, cycle)


def _walls(points, ridges, foot):
    """Vertical faces under ridge edges, merging consecutive coplanar ones."""
    def normal(e):
        d = points[e[1]][:2] - points[e[0]][:2]
        d = d / np.linalg.norm(d)
        return np.array([d[1], -d[0]])

    by_start = {a: (a, b) for a, b in ridges}
    has_pred = {b for _, b in ridges}
    chains, seen = [], set()
    order = [e for e in ridges if e[0] not in has_pred] + list(ridges)
    for e in order:
        if e in seen:
            continue
        chain = [e]
        seen.add(e)
        while chain[-1][1] in by_start and by_start[chain[-1][1]] not in seen:
            nxt = by_start[chain[-1][1]]
            chain.append(nxt)
            seen.add(nxt)
        chains.append(chain)
    faces = []
    for chain in chains:
        group = [chain[0]]
        for e in chain[1:]:
            if np.linalg.norm(normal(e) - normal(group[-1])) <= COPLANAR_TOL:
                group.append(e)
            else:
                faces.append(_wall_polygon(points, group, foot))
                group = [e]
        faces.append(_wall_polygon(points, group, foot))
    return faces


def _wall_polygon(points, group, foot):
    top = [group[0][0]] + [e[1] for e in group]
    first, last = top[0], top[-1]
    poly = [first]
    if foot(first) != first:
        poly.append(foot(first))
    if foot(last) != last:
        poly.append(foot(last))
    poly.extend(reversed(top[1:]))
    return tuple(poly)


def _develop_flat(cap):
    disk, tri = cap.disk, cap.triangulation
    pos, _ = _develop_plane(cap, list(range(tri.n_faces)))
    _place_remaining(cap, pos)
    n = disk.n_vertices
    # all projections are collinear: stand the polygon in the xz-plane
    origin = pos[tri.corners[0][0]]
    far = max(range(n), key=lambda v: np.linalg.norm(pos[v] - origin))
    axis = pos[far] - origin
    axis = axis / np.linalg.norm(axis) if np.linalg.norm(axis) > 0 else np.array([1.0, 0.0])
    xs = [float((pos[v] - origin) @ axis) for v in range(n)]
    points = np.array([[xs[v], 0.0, cap.heights[v]] for v in range(n)])
    hull = ConvexHull(points[:, [0, 2]])
    face = tuple(int(v) for v in hull.vertices)
    labels = [("upper", disk.ids[v]) for v in range(n)]
    # a single polygon, emitted once as the base face
    return EmbeddedCap(cap, points, labels, [], [], face, True, list(face))


@dataclass
class IsometryReport:
    max_length_error: float  # relative
    max_cone_error: float
    max_kappa_error: float
    max_dihedral_error: float
    max_dihedral: float
    edges_checked: int
    worst_edge: tuple = ()

    def ok(self, length_tol=1e-7, angle_tol=1e-7):
        return (
            self.max_length_error <= length_tol
            and self.max_cone_error <= angle_tol
            and self.max_kappa_error <= angle_tol
            and self.max_dihedral_error <= angle_tol
            and self.max_dihedral <= math.pi + angle_tol
        )

    def lines(self):
        return [
            f"max_edge_err={self.max_length_error:.3e}",
            f"max_cone_err={self.max_cone_error:.3e}",
            f"max_kappa_err={self.max_kappa_error:.3e}",
            f"max_dihedral_err={self.max_dihedral_error:.3e}",
            f"edges={self.edges_checked}",
        ]


def _angle(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = float(u @ v) / (nu * nv)
    s = float(np.linalg.norm(np.cross(u, v))) / (nu * nv)
    return math.atan2(s, c)


def _outline_arclength(emb):
    """Arclength position of every base point along the counterclockwise outline."""
    pts = emb.points
    cyc = emb.base_cycle
    pos = {}
    acc = 0.0
    for k, p in enumerate(cyc):
        pos[p] = acc
        acc += float(np.linalg.norm(pts[cyc[(k + 1) % len(cyc)]][:2] - pts[p][:2]))
    return pos, acc


def _foot_index(emb, v):
    target = ("base", emb.cap.disk.ids[v])
    for k in range(emb.cap.disk.n_vertices, len(emb.labels)):
        if emb.labels[k] == target:
            return k
    return v


def _wall_lengths(emb):
    """Intrinsic side lengths of degenerate triangles measured in unfolded wall
    coordinates (arclength along the outline, height)."""
    cap = emb.cap
    tri = cap.triangulation
    arc, perimeter = _outline_arclength(emb)
    out = {}
    for t in cap.degenerate_triangles():
        proj = cap.prisms[t].projected
        long_side = int(np.argmax(proj))
        for s in range(3):
            x, y = tri.endpoints((t, s))
            fx, fy = _foot_index(emb, x), _foot_index(emb, y)
            if fx not in arc or fy not in arc:
                continue
            if s == long_side:
                run = (arc[fy] - arc[fx]) % perimeter
            else:
                run = (arc[fx] - arc[fy]) % perimeter
            dz = cap.heights[x] - cap.heights[y]
            out[(t, s)] = math.hypot(run, dz)
    return out


def verify_isometry(emb, disk):
    """Compare the realization with the intrinsic metric of ``disk``."""
    cap = emb.cap
    tri = cap.triangulation
    P = emb.upper
    deg = set(cap.degenerate_triangles())
    walls = {} if emb.flat2d else _wall_lengths(emb)
    measured = {}
    worst, worst_edge, count = 0.0, (), 0
    for t in range(tri.n_faces):
        for s in range(3):
            a, b = tri.endpoints((t, s))
            if t in deg and not emb.flat2d:
                if (t, s) not in walls:
                    continue
                got = walls[(t, s)]
            else:
                got = float(np.linalg.norm(P[a] - P[b]))
            measured[(t, s)] = got
            want = tri.length((t, s))
            err = abs(got - want) / want
            count += 1
            if err > worst:
                worst, worst_edge = err, (disk.ids[a], disk.ids[b])

    cone_err = kappa_err = dih_err = 0.0
    max_dih = 0.0
    if not emb.flat2d:
        # cone angles from measured side lengths
        intrinsic = {va.vertex: va.cone_angle for va in vertex_angles(disk)}
        cone = np.zeros(disk.n_vertices)
        proj_angle = np.zeros(disk.n_vertices)
        for t in range(tri.n_faces):
            c = tri.corners[t]
            ls = [measured.get((t, s), tri.length((t, s))) for s in range(3)]
            ang = _geom.corner_angles(ls)
            for k in range(3):
                cone[c[k]] += ang[k]
                u = P[c[(k + 1) % 3]][:2] - P[c[k]][:2]
                w = P[c[(k + 2) % 3]][:2] - P[c[k]][:2]
                if t in deg:
                    proj_angle[c[k]] += math.pi if k == _middle(cap.prisms[t]) else 0.0
                else:
                    proj_angle[c[k]] += _angle(np.append(u, 0.0), np.append(w, 0.0))
        kap = curvatures(cap)
        for v, kv in zip(disk.interior, kap):
            cone_err = max(cone_err, abs(cone[v] - intrinsic[disk.ids[v]]))
            kappa_err = max(kappa_err, abs((2 * math.pi - proj_angle[v]) - kv))
        # dihedral angles at edges touching the non-degenerate part
        for (sa, sb), th in cap.theta.items():
            ta, tb = sa[0], sb[0]
            if ta in deg and tb in deg:
                continue
            a, b = tri.endpoints(sa)
            got = _dihedral(P, tri, sa, sb, ta in deg, tb in deg)
            dih_err = max(dih_err, abs(got - th))
            max_dih = max(max_dih, got)
    return IsometryReport(worst, cone_err, kappa_err, dih_err, max_dih, count, worst_edge)


def _middle(prism):
    return int(np.argmax(prism.projected))


def _face_normal(P, corners):
    a, b, c = (P[v] for v in corners)
    n = np.cross(b - a, c - a)
    return n / np.linalg.norm(n)


def _dihedral(P, tri, sa, sb, a_deg, b_deg):
    """Interior dihedral angle along the edge of sides ``sa``/``sb``."""
    a, b = tri.endpoints(sa)

    def outward(side, is_deg):
        if not is_deg:
            return _face_normal(P, tri.corners[side[0]])
        # vertical wall under the edge, facing away from the upper face
        x, y = tri.endpoints(side)
        d = P[y][:2] - P[x][:2]
        d = d / np.linalg.norm(d)
        return np.array([-d[1], d[0], 0.0])

    na = outward(sa, a_deg)
    nb = outward(sb, b_deg)
    return math.pi - _angle(na, nb)


def _fmt(x):
    return "%.12g" % (float(x) + 0.0)


def obj_text(emb):
    lines = [f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}" for p in emb.points]
    for f in emb.faces():
        lines.append("f " + " ".join(str(i + 1) for i in f))
    return "\n".join(lines) + "\n"


def export_obj(emb, path):
    """Write the mesh as Wavefront OBJ (upper faces, walls, base)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(obj_text(emb))


def read_obj(path):
    """Vertices and 0-based faces of an OBJ written by :func:`export_obj`."""
    verts, faces = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append(tuple(int(x.split("/")[0]) - 1 for x in parts[1:]))
    return np.array(verts), faces
