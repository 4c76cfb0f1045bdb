"""Generalized convex caps as height vectors.

A height vector ``h`` (one entry per disk vertex, zero on the boundary) is a
generalized convex cap iff its piecewise-linear extension is concave for some
geodesic triangulation and has gradient at most 1 everywhere.  The concave
triangulation is found by the flip algorithm: repeatedly flip an edge across
which the extension is convex.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _geom
from .errors import (
    BoundaryHeightNonzero,
    ForbiddenDegeneracy,
    GradientBoundViolated,
    InfeasibleWitness,
    IterationCapExceeded,
    NoSuchPrism,
)
from .prism import DEGENERATE_SLOPE_TOL, SLOPE_SLACK, Degeneracy, angles_from_layout

CONCAVITY_SLACK = 1e-12
#: interior edges with total dihedral angle this close to pi count as flat
FLAT_TOL = 1e-10


@dataclass(frozen=True)
class Witness:
    """A violated inequality certifying that no concave extension exists.

    ``kind`` is ``"quad"`` for ``h_i >= ext_jkl(i)`` over a Euclidean quadrilateral
    with a reflex angle at ``i`` and ``"loop"`` for ``h_i >= h_j`` on a triangle
    ``jij``.  Vertices are disk vertex ids.
    """

    kind: str
    vertex: int
    others: tuple
    lhs: float
    rhs: float
    #: (vertex index, coefficient) pairs with sum(c * h[v]) >= 0 for every cap
    weights: tuple = ()

    def __str__(self):
        if self.kind == "loop":
            return f"loop inequality h[{self.vertex}] >= h[{self.others[0]}] fails: {self.lhs:.12g} < {self.rhs:.12g}"
        j, k, l = self.others
        return (
            f"quadrilateral inequality h[{self.vertex}] >= ext_{{{j},{k},{l}}} fails: "
            f"{self.lhs:.12g} < {self.rhs:.12g}"
        )


def _slack(tri, h, base=CONCAVITY_SLACK):
    scale = max(1.0, float(np.max(np.abs(h))), max(max(l) for l in tri.lengths))
    return base * scale


def edge_violation(tri, h, side):
    """Amount by which the PL extension is convex across the edge through ``side``.

    Positive values mean the edge is bad.  For a two-triangle edge this is
    ``h_d - ext_abc(d)`` over the developed quadrilateral; for a side glued to
    its own triangle (the loop configuration) it is ``h_j - h_i`` where ``i`` is
    the enclosed apex.
    """
    p = tri.partner(side)
    if p is None:
        raise ValueError(f"{side} is a boundary side")
    if p[0] == side[0]:
        t = side[0]
        k = 3 - side[1] - p[1]
        apex = tri.corners[t][k]
        other = tri.corners[t][(k + 1) % 3]
        return float(h[other] - h[apex])
    q = tri.quad_layout(side)
    a, b, c, d = q.ids
    ext = _geom.affine_value(q.points[:3], (h[a], h[b], h[c]), q.points[3])
    return float(h[d] - ext)


def is_bad_edge(tri, h, side, slack=None):
    h = np.asarray(h, dtype=float)
    tol = _slack(tri, h) if slack is None else slack
    return edge_violation(tri, h, side) > tol


def flip_edge(tri, side):
    return tri.flip(side)


def _witness(tri, h, side, ids):
    p = tri.partner(side)
    if p[0] == side[0]:
        t = side[0]
        k = 3 - side[1] - p[1]
        i = tri.corners[t][k]
        j = tri.corners[t][(k + 1) % 3]
        return Witness("loop", ids[i], (ids[j],), float(h[i]), float(h[j]), ((i, 1.0), (j, -1.0)))
    q = tri.quad_layout(side)
    a, b, c, d = q.ids
    pts = q.points
    if q.angle_a >= q.angle_b:
        i, j, i_pt, rest = a, b, pts[0], (1, 2, 3)
    else:
        i, j, i_pt, rest = b, a, pts[1], (0, 2, 3)
    vals = [h[q.ids[r]] for r in rest]
    ext = _geom.affine_value(pts[list(rest)], vals, i_pt)
    bary = [_geom.affine_value(pts[list(rest)], np.eye(3)[r], i_pt) for r in range(3)]
    weights = [(i, 1.0)] + [(q.ids[r], -float(w)) for r, w in zip(rest, bary)]
    return Witness(
        "quad", ids[i], (ids[j], ids[c], ids[d]), float(h[i]), float(ext), tuple(weights)
    )


def pl_extension(disk, h, tri=None, max_flips=None, slack=CONCAVITY_SLACK):
    """Triangulation on which the PL extension of ``h`` is concave.

    Starts from ``tri`` (default: the disk's own triangulation) and flips the
    worst bad edge until none is left.  Raises :class:`InfeasibleWitness` if a
    bad edge cannot be flipped and :class:`IterationCapExceeded` after
    ``max_flips`` flips (default ``10 * |F|**2``).  Edges count as bad when
    their violation exceeds ``slack`` times the problem scale.
    """
    h = np.asarray(h, dtype=float)
    tri = disk.triangulation if tri is None else tri
    cap = 10 * tri.n_faces ** 2 if max_flips is None else max_flips
    tol = _slack(tri, h, slack)
    for _ in range(cap + 1):
        worst, worst_side = tol, None
        for side, _p in tri.interior_edges():
            v = edge_violation(tri, h, side)
            if v > worst:
                worst, worst_side = v, side
        if worst_side is None:
            return tri
        if not tri.is_flippable(worst_side):
            w = _witness(tri, h, worst_side, disk.ids)
            raise InfeasibleWitness(f"no concave extension: {w}", witness=w)
        tri = tri.flip(worst_side)
    raise IterationCapExceeded(f"flip algorithm did not converge within {cap} flips")


@dataclass(frozen=True, eq=False)
class CapState:
    """A feasible height vector together with a concave triangulation and all
    prism angles.  Arrays are indexed by internal vertex / triangle index."""

    disk: object
    heights: np.ndarray
    triangulation: object
    layouts: tuple
    prisms: tuple
    theta: dict = field(repr=False)

    def alpha(self, side):
        return float(self.prisms[side[0]].alpha[side[1]])

    def degenerate_triangles(self):
        return [t for t, p in enumerate(self.prisms) if p.degenerate]

    def degenerate_vertices(self):
        """Interior vertices incident to a degenerate prism."""
        out = set()
        for t in self.degenerate_triangles():
            out.update(v for v in self.triangulation.corners[t] if not self.disk.boundary[v])
        return out

    def slopes(self):
        return np.array([p.slope for p in self.prisms])

    def heights_by_id(self):
        return {self.disk.ids[v]: float(self.heights[v]) for v in range(self.disk.n_vertices)}


def as_height_array(disk, h):
    """Accept an array indexed by vertex index or a mapping keyed by vertex id."""
    if isinstance(h, dict):
        arr = np.zeros(disk.n_vertices)
        for key, val in h.items():
            arr[disk.index[int(key)]] = float(val)
        return arr
    arr = np.array(h, dtype=float)
    if arr.shape != (disk.n_vertices,):
        raise ValueError(f"expected {disk.n_vertices} heights, got shape {arr.shape}")
    return arr


def build_state(disk, h, tri, degenerate_tol=DEGENERATE_SLOPE_TOL):
    """Prism data for ``h`` on a triangulation already known to be concave."""
    layouts, prisms = [], []
    for t in range(tri.n_faces):
        c = tri.corners[t]
        pts = _geom.layout(tri.lengths[t])
        hv = (h[c[0]], h[c[1]], h[c[2]])
        slope = np.linalg.norm(_geom.gradient(pts, hv))
        if slope > 1.0 + SLOPE_SLACK:
            names = [disk.ids[v] for v in c]
            raise GradientBoundViolated(
                f"triangle {t} (vertices {names}) has slope {slope:.12g} > 1",
                witness=t,
            )
        try:
            pa = angles_from_layout(pts, tri.lengths[t], hv, degenerate_tol)
        except NoSuchPrism as exc:  # pragma: no cover - guarded by the slope test
            raise GradientBoundViolated(str(exc), witness=t) from exc
        if pa.degeneracy in (Degeneracy.TYPE_B, Degeneracy.TYPE_C):
            raise ForbiddenDegeneracy(
                f"triangle {t} forms a degenerate prism of {pa.degeneracy.value}", witness=t
            )
        layouts.append(pts)
        prisms.append(pa)
    theta = {}
    for sa, sb in tri.interior_edges():
        theta[(sa, sb)] = float(prisms[sa[0]].alpha[sa[1]] + prisms[sb[0]].alpha[sb[1]])
    return CapState(disk, h, tri, tuple(layouts), tuple(prisms), theta)


def feasibility(disk, h, tri=None, degenerate_tol=DEGENERATE_SLOPE_TOL, slack=CONCAVITY_SLACK):
    """Decide whether ``h`` is a generalized convex cap; return its CapState."""
    h = as_height_array(disk, h)
    if not np.all(np.isfinite(h)):
        raise ValueError("heights must be finite")
    for v in disk.boundary_vertices:
        if h[v] != 0.0:
            raise BoundaryHeightNonzero(
                f"boundary vertex {disk.ids[v]} has height {h[v]!r}", witness=disk.ids[v]
            )
    tri = pl_extension(disk, h, tri, slack=slack)
    return build_state(disk, h, tri, degenerate_tol)


def is_feasible(disk, h, tri=None):
    try:
        feasibility(disk, h, tri)
    except (InfeasibleWitness, GradientBoundViolated, BoundaryHeightNonzero, ForbiddenDegeneracy):
        return False
    return True


@dataclass(frozen=True)
class GammaGraph:
    """Boundary edges plus the strictly convex interior edges of a cap."""

    edges: tuple  # (a, b) vertex index pairs, one per triangulation edge
    labels: np.ndarray  # component label per vertex
    components: tuple  # tuples of vertex indices
    touches_boundary: tuple  # bool per component

    @property
    def connected(self):
        return len(self.components) == 1

    def free_components(self):
        """Components disjoint from the boundary."""
        return [c for c, b in zip(self.components, self.touches_boundary) if not b]


def gamma_graph(cap, flat_tol=FLAT_TOL):
    disk, tri = cap.disk, cap.triangulation
    edges = []
    for side in tri.boundary_sides():
        edges.append(tri.endpoints(side))
    for e, th in cap.theta.items():
        if th < math.pi - flat_tol:
            edges.append(tri.endpoints(e[0]))
    n = disk.n_vertices
    if edges:
        rows, cols = zip(*edges)
    else:
        rows, cols = (), ()
    adj = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    # relabel by smallest member so output order is stable
    order = {}
    for v in range(n):
        order.setdefault(labels[v], len(order))
    labels = np.array([order[l] for l in labels])
    comps = [tuple(v for v in range(n) if labels[v] == c) for c in range(len(order))]
    touches = tuple(any(disk.boundary[v] for v in c) for c in comps)
    return GammaGraph(tuple(edges), labels, tuple(comps), touches)
