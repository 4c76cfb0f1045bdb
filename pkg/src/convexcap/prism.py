"""Angles of a single prism: the lower hull of a triangle lifted to three heights.

The upper base is a Euclidean triangle with sides ``l0, l1, l2`` (side ``s``
opposite corner ``s``); the lateral edges are vertical with lengths ``h0, h1, h2``.
All angles are derived from the gradient ``G`` of the height function on the
upper base, measured intrinsically.  ``|G|`` is the sine of the tilt of the
upper base, so a prism exists iff ``|G| <= 1`` and degenerates into a vertical
polygon when ``|G| = 1``.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from . import _geom
from .errors import HeightExceedsLength, NoSuchPrism

#: prisms whose upper base is this close to vertical count as degenerate
DEGENERATE_SLOPE_TOL = 1e-7
#: slack allowed on the gradient bound before a prism is rejected
SLOPE_SLACK = 1e-9


class Degeneracy(str, Enum):
    NON_DEGENERATE = "NonDegenerate"
    TYPE_A = "TypeA"  # vertical wall, middle vertex above the outer chord
    TYPE_B = "TypeB"  # vertical, middle vertex below the outer chord
    TYPE_C = "TypeC"  # an upper edge is itself vertical


@dataclass(frozen=True)
class PrismSpec:
    lengths: tuple  # (l_jk, l_ik, l_ij): side s opposite corner s
    heights: tuple  # (h_i, h_j, h_k)


@dataclass(frozen=True)
class PrismAngles:
    """Angles of one prism, indexed by corner ``a`` or by side ``s``.

    ``alpha[s]`` is the dihedral angle at the upper edge ``s`` between the upper
    base and the lateral face below it; ``eta[s] = alpha[s] - pi/2`` is the angle
    between upper and lower base there (meaningful when the edge lies in the
    base).  ``rho[a, b]`` is the angle at upper vertex ``a`` between edge ``ab``
    and the downward vertical.
    """

    alpha: np.ndarray
    cot_alpha: np.ndarray
    omega: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    projected: np.ndarray  # horizontal projections of the three sides
    slope: float  # |G|
    degeneracy: Degeneracy

    @property
    def degenerate(self):
        return self.degeneracy is not Degeneracy.NON_DEGENERATE

    def alpha_at(self, a, b):
        """Dihedral at the upper edge joining corners ``a`` and ``b``."""
        return float(self.alpha[3 - a - b])


def project_length(ell, h_a, h_b):
    dh = h_a - h_b
    if abs(dh) > ell:
        raise HeightExceedsLength(f"height difference {abs(dh)} exceeds edge length {ell}")
    return _geom.sqrt_diff_squares(ell, dh)


def rho(ell, h_a, h_b):
    """Angle at the upper end of ``a`` between edge ``ab`` and the downward vertical."""
    dh = h_a - h_b
    if abs(dh) > ell:
        raise HeightExceedsLength(f"height difference {abs(dh)} exceeds edge length {ell}")
    return math.atan2(_geom.sqrt_diff_squares(ell, dh), dh)


def _classify(projected, heights, slope, tol):
    if slope < 1.0 - tol:
        return Degeneracy.NON_DEGENERATE
    scale = max(projected)
    if min(projected) <= 1e-9 * scale:
        return Degeneracy.TYPE_C
    m = int(np.argmax(projected))  # corner opposite the longest projected side
    a, b = (m + 1) % 3, (m + 2) % 3
    am = projected[b]  # side opposite b joins a and m
    mb = projected[a]
    chord = heights[a] + (heights[b] - heights[a]) * am / (am + mb)
    return Degeneracy.TYPE_A if heights[m] > chord else Degeneracy.TYPE_B


def angles_from_layout(points, lengths, heights, degenerate_tol=DEGENERATE_SLOPE_TOL):
    """Prism angles given a counterclockwise planar layout of the upper base."""
    g = _geom.gradient(points, heights)
    g2 = float(g @ g)
    slope = math.sqrt(g2)
    if slope > 1.0 + SLOPE_SLACK:
        raise NoSuchPrism(f"upper base slope {slope!r} exceeds 1")
    projected = np.array(
        [
            _geom.sqrt_diff_squares(lengths[s], heights[(s + 2) % 3] - heights[(s + 1) % 3])
            for s in range(3)
        ]
    )
    # cosine of the tilt as an area ratio: unlike sqrt(1 - |G|^2) it keeps full
    # precision next to vertical prisms
    cos_tilt = min(1.0, _geom.heron_area(*projected) / _geom.heron_area(*lengths))

    alpha = np.empty(3)
    cot = np.empty(3)
    for s in range(3):
        a, b = (s + 1) % 3, (s + 2) % 3
        u = (points[b] - points[a]) / lengths[s]
        inward = np.array([-u[1], u[0]])
        gw = float(g @ inward)
        alpha[s] = math.atan2(cos_tilt, -gw)
        cot[s] = -gw / cos_tilt if cos_tilt > 0.0 else math.copysign(math.inf, -gw)
    omega = np.array(_geom.corner_angles(projected))
    rho_m = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            if a != b:
                s = 3 - a - b
                rho_m[a, b] = math.atan2(projected[s], heights[a] - heights[b])
    deg = _classify(projected, heights, slope, degenerate_tol)
    return PrismAngles(
        alpha=alpha,
        cot_alpha=cot,
        omega=omega,
        rho=rho_m,
        eta=alpha - math.pi / 2,
        projected=projected,
        slope=min(slope, 1.0),
        degeneracy=deg,
    )


def prism_angles(spec, degenerate_tol=DEGENERATE_SLOPE_TOL):
    lengths = tuple(float(x) for x in spec.lengths)
    heights = tuple(float(x) for x in spec.heights)
    if any(h < 0 for h in heights):
        raise NoSuchPrism("heights must be non-negative")
    a, b, c = sorted(lengths)
    if not a + b > c:
        raise NoSuchPrism(f"sides {lengths} do not form a triangle")
    for s in range(3):
        if abs(heights[(s + 1) % 3] - heights[(s + 2) % 3]) > lengths[s] * (1 + SLOPE_SLACK):
            raise NoSuchPrism(f"height difference exceeds side {s}")
    return angles_from_layout(_geom.layout(lengths), lengths, heights, degenerate_tol)
