"""Small planar-geometry kernels used throughout the package."""

import math

import numpy as np


def angle_from_sides(a, b, c):
    """Angle opposite side ``c`` of a triangle with sides ``a, b, c``.

    Kahan's needle-stable formula; degenerate triangles give exactly 0 or pi.
    """
    if a < b:
        a, b = b, a
    if b >= c:
        mu = c - (a - b)
    else:
        mu = b - (a - c)
    num = ((a - b) + c) * mu
    den = (a + (b + c)) * ((a - c) + b)
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return math.pi
    return 2.0 * math.atan(math.sqrt(num / den))


def heron_area(a, b, c):
    """Triangle area from side lengths (Kahan's ordering; 0 if degenerate)."""
    a, b, c = sorted((a, b, c), reverse=True)
    f = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(f) if f > 0.0 else 0.0


def corner_angles(lengths):
    """Angles at corners 0, 1, 2; side ``s`` is opposite corner ``s``."""
    l0, l1, l2 = lengths
    return (
        angle_from_sides(l1, l2, l0),
        angle_from_sides(l2, l0, l1),
        angle_from_sides(l0, l1, l2),
    )


def layout(lengths):
    """Planar positions of the corners, counterclockwise, corner 0 at the origin
    and corner 1 on the positive x axis."""
    l0, l1, l2 = lengths
    a0 = angle_from_sides(l1, l2, l0)
    return np.array(
        [[0.0, 0.0], [l2, 0.0], [l1 * math.cos(a0), l1 * math.sin(a0)]]
    )


def place_point(p, q, r_p, r_q, left=True):
    """Point at distance ``r_p`` from ``p`` and ``r_q`` from ``q``, on the left
    (or right) of the directed line p -> q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    base = math.hypot(d[0], d[1])
    ang = angle_from_sides(r_p, base, r_q)  # angle at p, opposite r_q
    u = d / base
    n = np.array([-u[1], u[0]])
    if not left:
        n = -n
    return p + r_p * (math.cos(ang) * u + math.sin(ang) * n)


def gradient(points, values):
    """Gradient of the affine function taking ``values`` at the three ``points``."""
    e1 = points[1] - points[0]
    e2 = points[2] - points[0]
    det = e1[0] * e2[1] - e1[1] * e2[0]
    d1 = values[1] - values[0]
    d2 = values[2] - values[0]
    return np.array(
        [(d1 * e2[1] - d2 * e1[1]) / det, (e1[0] * d2 - e2[0] * d1) / det]
    )


def affine_value(points, values, x):
    """Evaluate at ``x`` the affine function interpolating ``values`` on ``points``."""
    g = gradient(points, values)
    return values[0] + float(g @ (np.asarray(x) - points[0]))


def cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def sqrt_diff_squares(a, b):
    """sqrt(a^2 - b^2) for |b| <= a, clamped at zero."""
    b = abs(b)
    if b >= a:
        return 0.0
    return math.sqrt((a - b) * (a + b))
