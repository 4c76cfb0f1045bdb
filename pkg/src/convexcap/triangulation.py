"""Combinatorial triangulations of a polyhedral disk with intrinsic edge lengths.

A triangle is a triple of vertex indices listed counterclockwise together with
the three side lengths; side ``s`` is opposite corner ``s`` and runs from corner
``s+1`` to corner ``s+2``.  Interior edges are pairs of glued sides.  Loops and
multiple edges are allowed, so adjacency is never inferred from vertex indices.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _geom
from .errors import NotFlippable

#: (triangle index, side index)
Side = tuple

CONVEX_QUAD_SLACK = 1e-12


@dataclass(frozen=True)
class QuadLayout:
    """Two triangles glued along ``side`` developed into the plane.

    ``a -> b`` is the shared edge in the orientation of the first triangle,
    ``c`` the apex of the first triangle (above the x axis) and ``d`` the apex of
    the second one (below).
    """

    side: Side
    partner: Side
    ids: tuple  # vertex indices (a, b, c, d)
    points: np.ndarray  # 4 x 2, same order
    angle_a: float  # total quad angle at a
    angle_b: float


@dataclass(frozen=True)
class Triangulation:
    corners: tuple
    lengths: tuple
    glue: tuple

    @classmethod
    def build(cls, corners, lengths, gluings):
        n = len(corners)
        glue = [[None, None, None] for _ in range(n)]
        for s1, s2 in gluings:
            glue[s1[0]][s1[1]] = tuple(s2)
            glue[s2[0]][s2[1]] = tuple(s1)
        return cls(
            tuple(tuple(int(v) for v in c) for c in corners),
            tuple(tuple(float(x) for x in l) for l in lengths),
            tuple(tuple(g) for g in glue),
        )

    @property
    def n_faces(self):
        return len(self.corners)

    def endpoints(self, side):
        t, s = side
        c = self.corners[t]
        return c[(s + 1) % 3], c[(s + 2) % 3]

    def length(self, side):
        return self.lengths[side[0]][side[1]]

    def partner(self, side):
        return self.glue[side[0]][side[1]]

    def sides(self):
        return [(t, s) for t in range(self.n_faces) for s in range(3)]

    def interior_edges(self):
        """Glued side pairs, each listed once with the smaller side first."""
        out = []
        for side in self.sides():
            p = self.partner(side)
            if p is not None and side < p:
                out.append((side, p))
        return out

    def boundary_sides(self):
        return [side for side in self.sides() if self.partner(side) is None]

    def gluings(self):
        return [[list(a), list(b)] for a, b in self.interior_edges()]

    def is_self_glued(self, side):
        p = self.partner(side)
        return p is not None and p[0] == side[0]

    def corner_angles(self, t):
        return _geom.corner_angles(self.lengths[t])

    def quad_layout(self, side):
        p = self.partner(side)
        if p is None:
            raise ValueError(f"side {side} is a boundary side")
        t, s = side
        u, v = p
        a, b = self.endpoints(side)
        c = self.corners[t][s]
        d = self.corners[u][v]
        lt, lu = self.lengths[t], self.lengths[u]
        ell = lt[s]
        pa = np.array([0.0, 0.0])
        pb = np.array([ell, 0.0])
        pc = _geom.place_point(pa, pb, lt[(s + 2) % 3], lt[(s + 1) % 3], left=True)
        pd = _geom.place_point(pa, pb, lu[(v + 1) % 3], lu[(v + 2) % 3], left=False)
        at = _geom.corner_angles(lt)
        au = _geom.corner_angles(lu)
        return QuadLayout(
            side=side,
            partner=p,
            ids=(a, b, c, d),
            points=np.array([pa, pb, pc, pd]),
            angle_a=at[(s + 1) % 3] + au[(v + 2) % 3],
            angle_b=at[(s + 2) % 3] + au[(v + 1) % 3],
        )

    def is_flippable(self, side, slack=CONVEX_QUAD_SLACK):
        p = self.partner(side)
        if p is None or p[0] == side[0]:
            return False
        q = self.quad_layout(side)
        return q.angle_a < math.pi - slack and q.angle_b < math.pi - slack

    def flip(self, side, slack=CONVEX_QUAD_SLACK):
        """Replace the edge through ``side`` by the other diagonal of its quad."""
        p = self.partner(side)
        if p is None:
            raise NotFlippable(f"side {side} is a boundary side")
        if p[0] == side[0]:
            raise NotFlippable(f"side {side} is glued to its own triangle")
        q = self.quad_layout(side)
        if not (q.angle_a < math.pi - slack and q.angle_b < math.pi - slack):
            raise NotFlippable(
                f"quad across side {side} is not strictly convex "
                f"(angles {q.angle_a:.15g}, {q.angle_b:.15g})"
            )
        t, s = side
        u, v = p
        a, b, c, d = q.ids
        diag = float(np.linalg.norm(q.points[2] - q.points[3]))

        # old outer sides -> new position
        remap = {
            (t, (s + 2) % 3): (t, 1),  # c -> a
            (u, (v + 1) % 3): (t, 2),  # a -> d
            (u, (v + 2) % 3): (u, 1),  # d -> b
            (t, (s + 1) % 3): (u, 2),  # b -> c
        }
        corners = list(self.corners)
        lengths = list(self.lengths)
        glue = [list(g) for g in self.glue]
        old_len = {k: self.length(k) for k in remap}
        old_partner = {k: self.partner(k) for k in remap}

        corners[t] = (a, d, c)
        corners[u] = (b, c, d)
        lengths[t] = (diag, old_len[(t, (s + 2) % 3)], old_len[(u, (v + 1) % 3)])
        lengths[u] = (diag, old_len[(u, (v + 2) % 3)], old_len[(t, (s + 1) % 3)])
        glue[t] = [(u, 0), None, None]
        glue[u] = [(t, 0), None, None]
        for old, new in remap.items():
            other = old_partner[old]
            if other is None:
                continue
            other_new = remap.get(other, other)
            glue[new[0]][new[1]] = other_new
            glue[other_new[0]][other_new[1]] = new
        return Triangulation(
            tuple(corners), tuple(lengths), tuple(tuple(g) for g in glue)
        )

    def vertex_corners(self, vertex):
        return [
            (t, k)
            for t, c in enumerate(self.corners)
            for k in range(3)
            if c[k] == vertex
        ]
