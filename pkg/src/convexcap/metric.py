"""Convex Euclidean polyhedral metrics on a disk, given as glued triangles.

Disk files are UTF-8 JSON::

    {"vertices": [{"id": 0, "boundary": false}, ...],
     "triangles": [{"corners": [0, 1, 2], "lengths": [l0, l1, l2]}, ...],
     "gluings": [[[t, s], [t, s]], ...]}

Side ``s`` of a triangle is opposite ``corners[s]``.  Triangles may be listed in
either orientation; they are reoriented consistently on load.  Glued sides are
matched by their endpoint ids, except for loop sides (equal endpoints), which
are taken to be glued with opposite directions.
"""

from dataclasses import dataclass
import heapq
import json
import math
from pathlib import Path

import numpy as np

from . import _geom
from .errors import DegenerateTriangle, GluingMismatch, InvalidDisk, NotADisk, ParseError
from .triangulation import Triangulation

LENGTH_REL_TOL = 1e-9
ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class VertexAngles:
    vertex: int  # vertex id
    boundary: bool
    cone_angle: float
    defect: float


@dataclass(frozen=True)
class ConvexityReport:
    angles: tuple
    violations: tuple  # VertexAngles entries breaking the convexity bounds

    @property
    def convex(self):
        return not self.violations


class MetricDisk:
    """A validated disk.  Vertices are addressed internally by index; ``ids``
    maps indices back to the file's vertex ids."""

    def __init__(self, ids, boundary, triangulation):
        self.ids = tuple(int(i) for i in ids)
        self.boundary = np.asarray(boundary, dtype=bool)
        self.triangulation = triangulation
        self.index = {v: k for k, v in enumerate(self.ids)}
        self.interior = tuple(k for k in range(len(self.ids)) if not self.boundary[k])
        self.boundary_vertices = tuple(k for k in range(len(self.ids)) if self.boundary[k])

    @property
    def n_vertices(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, MetricDisk):
            return NotImplemented
        return (
            self.ids == other.ids
            and bool(np.array_equal(self.boundary, other.boundary))
            and self.triangulation == other.triangulation
        )

    def __repr__(self):
        return (
            f"MetricDisk(vertices={self.n_vertices}, interior={len(self.interior)}, "
            f"triangles={self.triangulation.n_faces})"
        )

    def perimeter(self):
        t = self.triangulation
        return sum(t.length(s) for s in t.boundary_sides())

    def to_dict(self):
        tri = self.triangulation
        return {
            "vertices": [
                {"id": i, "boundary": bool(b)} for i, b in zip(self.ids, self.boundary)
            ],
            "triangles": triangles_to_json(tri, self.ids),
            "gluings": tri.gluings(),
        }


def triangles_to_json(tri, ids):
    return [
        {"corners": [ids[v] for v in c], "lengths": list(l)}
        for c, l in zip(tri.corners, tri.lengths)
    ]


def _fail(msg):
    raise ParseError(msg)


def _parse_triangles(data, index):
    tris = data.get("triangles")
    if not isinstance(tris, list) or not tris:
        _fail("'triangles' must be a non-empty list")
    corners, lengths = [], []
    for n, tr in enumerate(tris):
        if not isinstance(tr, dict):
            _fail(f"triangle {n} is not an object")
        c, l = tr.get("corners"), tr.get("lengths")
        if not (isinstance(c, list) and len(c) == 3 and isinstance(l, list) and len(l) == 3):
            _fail(f"triangle {n} needs three corners and three lengths")
        try:
            cc = [index[int(v)] for v in c]
        except (KeyError, TypeError, ValueError):
            _fail(f"triangle {n} references an unknown vertex id")
        try:
            ll = [float(x) for x in l]
        except (TypeError, ValueError):
            _fail(f"triangle {n} has a non-numeric length")
        if not all(math.isfinite(x) and x > 0 for x in ll):
            _fail(f"triangle {n} lengths must be positive and finite")
        a, b, cc_ = sorted(ll)
        if not a + b > cc_:
            raise DegenerateTriangle(f"triangle {n} violates the strict triangle inequality: {ll}")
        corners.append(cc)
        lengths.append(ll)
    return corners, lengths


def _parse_gluings(data, n_tri):
    raw = data.get("gluings", [])
    if not isinstance(raw, list):
        _fail("'gluings' must be a list")
    out, seen = [], set()
    for g in raw:
        try:
            (t1, s1), (t2, s2) = g
            s_a, s_b = (int(t1), int(s1)), (int(t2), int(s2))
        except (TypeError, ValueError):
            _fail(f"malformed gluing {g!r}")
        for t, s in (s_a, s_b):
            if not (0 <= t < n_tri and 0 <= s < 3):
                _fail(f"gluing {g!r} references a missing side")
        if s_a == s_b:
            _fail(f"gluing {g!r} identifies a side with itself")
        for side in (s_a, s_b):
            if side in seen:
                raise NotADisk(f"side {side} appears in more than one gluing")
            seen.add(side)
        out.append((s_a, s_b))
    return out


def _orient(corners, lengths, gluings):
    """Flip triangles so every gluing joins sides of opposite direction."""
    n = len(corners)

    def ends(t, s):
        c = corners[t]
        return c[(s + 1) % 3], c[(s + 2) % 3]

    # relation: 0 = orientations agree, 1 = one must be reversed
    adj = [[] for _ in range(n)]
    for sa, sb in gluings:
        a1, b1 = ends(*sa)
        a2, b2 = ends(*sb)
        if {a1, b1} != {a2, b2}:
            raise NotADisk(f"glued sides {sa} and {sb} join different vertices")
        if a1 == b1:
            rel = 0
        else:
            rel = 0 if (a1, b1) == (b2, a2) else 1
        adj[sa[0]].append((sb[0], rel))
        adj[sb[0]].append((sa[0], rel))
    sign = [None] * n
    for root in range(n):
        if sign[root] is not None:
            continue
        sign[root] = 0
        stack = [root]
        while stack:
            t = stack.pop()
            for u, rel in adj[t]:
                want = sign[t] ^ rel
                if sign[u] is None:
                    sign[u] = want
                    stack.append(u)
                elif sign[u] != want:
                    raise NotADisk("the glued complex is not orientable")
    # reversing swaps corners/sides 1 and 2
    swap = [0, 2, 1]
    new_c, new_l = [], []
    for t in range(n):
        if sign[t]:
            new_c.append([corners[t][k] for k in swap])
            new_l.append([lengths[t][k] for k in swap])
        else:
            new_c.append(list(corners[t]))
            new_l.append(list(lengths[t]))
    new_g = []
    for (t1, s1), (t2, s2) in gluings:
        new_g.append(
            ((t1, swap[s1] if sign[t1] else s1), (t2, swap[s2] if sign[t2] else s2))
        )
    return new_c, new_l, new_g


def _check_topology(tri, n_vertices, boundary_flags, ids):
    # vertex links: each vertex must be a single open or closed fan
    visited = set()
    link_open = {}
    for t in range(tri.n_faces):
        for k in range(3):
            if (t, k) in visited:
                continue
            v = tri.corners[t][k]
            if v in link_open:
                raise NotADisk(f"vertex {ids[v]} has a disconnected link (not a manifold point)")
            # walk counterclockwise: leave corner k of t across side (k+1)%3
            orbit = []
            cur = (t, k)
            closed = False
            while True:
                orbit.append(cur)
                nxt = tri.partner((cur[0], (cur[1] + 1) % 3))
                if nxt is None:
                    break
                cur = (nxt[0], (nxt[1] + 1) % 3)
                if cur == (t, k):
                    closed = True
                    break
            if not closed:
                # walk clockwise from the start to the other boundary side
                cur = (t, k)
                while True:
                    prv = tri.partner((cur[0], (cur[1] + 2) % 3))
                    if prv is None:
                        break
                    cur = (prv[0], (prv[1] + 2) % 3)
                    orbit.append(cur)
            visited.update(orbit)
            link_open[v] = not closed
    for v in range(n_vertices):
        if v not in link_open:
            raise NotADisk(f"vertex {ids[v]} is not a corner of any triangle")
        if link_open[v] != bool(boundary_flags[v]):
            kind = "boundary" if link_open[v] else "interior"
            raise NotADisk(f"vertex {ids[v]} is flagged inconsistently; its link makes it {kind}")

    # boundary must be one cycle
    bsides = tri.boundary_sides()
    if not bsides:
        raise NotADisk("the complex has no boundary")
    out_of = {}
    for side in bsides:
        a, _ = tri.endpoints(side)
        out_of[a] = side
    start = bsides[0]
    cur, count = start, 0
    while True:
        count += 1
        _, b = tri.endpoints(cur)
        cur = out_of[b]
        if cur == start or count > len(bsides):
            break
    if count != len(bsides):
        raise NotADisk("the boundary is not a single cycle")

    # connectivity and Euler characteristic
    parent = list(range(tri.n_faces))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sa, sb in tri.interior_edges():
        parent[find(sa[0])] = find(sb[0])
    if len({find(t) for t in range(tri.n_faces)}) != 1:
        raise NotADisk("the complex is disconnected")
    n_edges = len(tri.interior_edges()) + len(bsides)
    chi = n_vertices - n_edges + tri.n_faces
    if chi != 1:
        raise NotADisk(f"Euler characteristic is {chi}, a disk has 1")


def disk_from_dict(data):
    if not isinstance(data, dict):
        _fail("top level must be an object")
    verts = data.get("vertices")
    if not isinstance(verts, list) or not verts:
        _fail("'vertices' must be a non-empty list")
    ids, flags = [], []
    for v in verts:
        try:
            ids.append(int(v["id"]))
            b = v["boundary"]
        except (KeyError, TypeError, ValueError):
            _fail(f"malformed vertex entry {v!r}")
        if not isinstance(b, bool):
            _fail(f"vertex {v!r}: 'boundary' must be a boolean")
        flags.append(b)
    if len(set(ids)) != len(ids):
        _fail("duplicate vertex ids")
    index = {v: k for k, v in enumerate(ids)}
    corners, lengths = _parse_triangles(data, index)
    gluings = _parse_gluings(data, len(corners))
    for sa, sb in gluings:
        la, lb = lengths[sa[0]][sa[1]], lengths[sb[0]][sb[1]]
        if abs(la - lb) > LENGTH_REL_TOL * max(la, lb):
            raise GluingMismatch(f"sides {sa} and {sb} have lengths {la} and {lb}")
    corners, lengths, gluings = _orient(corners, lengths, gluings)
    tri = Triangulation.build(corners, lengths, gluings)
    _check_topology(tri, len(ids), flags, ids)
    return MetricDisk(ids, flags, tri)


def load_disk(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return disk_from_dict(data)


def save_disk(disk, path):
    Path(path).write_text(json.dumps(disk.to_dict(), indent=1) + "\n", encoding="utf-8")


def vertex_angles(disk):
    """Cone angle (interior) or total angle (boundary) and defect per vertex."""
    tri = disk.triangulation
    total = np.zeros(disk.n_vertices)
    for t in range(tri.n_faces):
        ang = tri.corner_angles(t)
        for k in range(3):
            total[tri.corners[t][k]] += ang[k]
    out = []
    for v in range(disk.n_vertices):
        full = math.pi if disk.boundary[v] else 2 * math.pi
        out.append(VertexAngles(disk.ids[v], bool(disk.boundary[v]), float(total[v]), full - float(total[v])))
    return out


def defects(disk):
    """Angle defects as an array indexed by internal vertex index."""
    return np.array([va.defect for va in vertex_angles(disk)])


def validate_convexity(disk, tol=ANGLE_TOL):
    angles = vertex_angles(disk)
    bad = tuple(a for a in angles if a.defect < -tol)
    return ConvexityReport(tuple(angles), bad)


def require_solvable(disk, tol=ANGLE_TOL):
    """Raise InvalidDisk unless the disk is convex with an interior and a
    boundary singularity."""
    rep = validate_convexity(disk, tol)
    if not rep.convex:
        names = ", ".join(str(a.vertex) for a in rep.violations)
        raise InvalidDisk(f"metric is not convex at vertices {names}")
    if not any(a.defect > tol for a in rep.angles if not a.boundary):
        raise InvalidDisk("disk has no interior singularity")
    if not any(a.defect > tol for a in rep.angles if a.boundary):
        raise InvalidDisk("disk has no boundary singularity")
    return rep


def approx_boundary_distance(disk, refinement=0):
    """Upper bound on the intrinsic distance from each vertex to the boundary.

    Shortest paths run through straight segments inside triangles between
    vertices and ``2**refinement - 1`` evenly spaced points on every edge.
    Nested subdivisions make the bound non-increasing in ``refinement``.
    Returns an array indexed by internal vertex index.
    """
    if refinement < 0:
        raise ValueError("refinement must be non-negative")
    tri = disk.triangulation
    m = 2 ** refinement  # segments per edge
    nodes = {}

    def node(key):
        if key not in nodes:
            nodes[key] = len(nodes)
        return nodes[key]

    for v in range(disk.n_vertices):
        node(("v", v))

    def edge_key(side):
        p = tri.partner(side)
        return side if p is None or side < p else p

    adj = {}

    def connect(i, j, w):
        if i == j:
            return
        adj.setdefault(i, []).append((j, w))
        adj.setdefault(j, []).append((i, w))

    sources = set(disk.boundary_vertices)
    source_nodes = {node(("v", v)) for v in sources}
    for t in range(tri.n_faces):
        pos = _geom.layout(tri.lengths[t])
        pts = []  # (node id, planar position)
        for k in range(3):
            pts.append((node(("v", tri.corners[t][k])), pos[k]))
        for s in range(3):
            side = (t, s)
            key = edge_key(side)
            p0, p1 = pos[(s + 1) % 3], pos[(s + 2) % 3]
            # parameter runs along the canonical side's direction
            forward = key == side
            for q in range(1, m):
                frac = q / m
                x = p0 + (frac if forward else 1 - frac) * (p1 - p0)
                n_id = node(("e", key, q))
                pts.append((n_id, x))
                if tri.partner(side) is None:
                    source_nodes.add(n_id)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                connect(pts[i][0], pts[j][0], float(np.linalg.norm(pts[i][1] - pts[j][1])))

    dist = [math.inf] * len(nodes)
    heap = []
    for s in source_nodes:
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, c in adj.get(u, ()):
            nd = d + c
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return np.array([dist[nodes[("v", v)]] for v in range(disk.n_vertices)])


def edge_graph_distances(disk, source):
    """Shortest-path distances from vertex ``source`` along triangulation edges."""
    tri = disk.triangulation
    adj = {}
    for side in tri.sides():
        a, b = tri.endpoints(side)
        w = tri.length(side)
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
    dist = np.full(disk.n_vertices, math.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, c in adj.get(u, ()):
            if d + c < dist[w]:
                dist[w] = d + c
                heapq.heappush(heap, (d + c, w))
    return dist
