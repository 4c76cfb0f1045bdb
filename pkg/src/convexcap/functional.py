"""Total scalar curvature of a generalized cap, its gradient and Hessian.

For a cap with heights ``h``::

    S = sum_i h_i kappa_i + sum_int l_e (pi - theta_e) + sum_bdry l_e (pi/2 - eta_e)

with ``kappa_i = 2 pi - omega_i``.  Its gradient is ``kappa`` and its Hessian is
the weighted graph Laplacian ``-L(a)`` where, for every non-flat interior edge,

    a_e = (cot alpha_e + cot alpha_-e) / (l_e sin^2 rho_e).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .capspace import FLAT_TOL, gamma_graph
from .errors import DegenerateAngle

TWO_PI = 2.0 * math.pi
RIGID_EIG_TOL = 1e-10


@dataclass
class CurvatureReport:
    S: float
    kappa: np.ndarray  # over ``interior``
    interior: tuple  # vertex indices indexing kappa
    a: dict  # (i, j) with i < j, vertex indices -> a_ij
    rows: tuple  # vertex indices indexing the hessian
    hessian: np.ndarray
    gamma: object = None
    nullspace: list = field(default_factory=list)
    nullspace_residual: float = 0.0
    eigenvalues: np.ndarray = None
    rigid: bool = None


def omega_sums(cap):
    """Total dihedral angle around the vertical edge under every vertex."""
    tri = cap.triangulation
    om = np.zeros(cap.disk.n_vertices)
    for t, pa in enumerate(cap.prisms):
        c = tri.corners[t]
        for k in range(3):
            om[c[k]] += pa.omega[k]
    return om


def curvatures(cap):
    """kappa_i for every interior vertex, in ``cap.disk.interior`` order."""
    om = omega_sums(cap)
    return np.array([TWO_PI - om[v] for v in cap.disk.interior])


def curvature_map(cap):
    """kappa keyed by vertex id."""
    return {cap.disk.ids[v]: float(k) for v, k in zip(cap.disk.interior, curvatures(cap))}


def total_scalar_curvature(cap):
    tri = cap.triangulation
    om = omega_sums(cap)
    s = 0.0
    for v in cap.disk.interior:
        s += cap.heights[v] * (TWO_PI - om[v])
    for e, th in cap.theta.items():
        s += tri.length(e[0]) * (math.pi - th)
    for side in tri.boundary_sides():
        eta = cap.prisms[side[0]].eta[side[1]]
        s += tri.length(side) * (math.pi / 2 - eta)
    return float(s)


def edge_weights(cap, fixed=(), flat_tol=FLAT_TOL):
    """Hessian weights ``a_ij`` summed over parallel edges, keyed by ``(i, j)``
    with ``i < j``.  Loops and flat edges contribute nothing.

    Weights whose both endpoints are boundary or ``fixed`` vertices are not
    needed by the Hessian; if they are singular they are skipped instead of
    raising :class:`DegenerateAngle`.
    """
    disk, tri = cap.disk, cap.triangulation
    fixed = set(fixed)
    a = {}
    for e, th in cap.theta.items():
        sa, sb = e
        i, j = tri.endpoints(sa)
        if i == j or th >= math.pi - flat_tol:
            continue
        needed = not (
            (disk.boundary[i] or i in fixed) and (disk.boundary[j] or j in fixed)
        )
        pa, pb = cap.prisms[sa[0]], cap.prisms[sb[0]]
        cot_sum = pa.cot_alpha[sa[1]] + pb.cot_alpha[sb[1]]
        proj = pa.projected[sa[1]]
        ell = tri.length(sa)
        if not math.isfinite(cot_sum) or proj <= 0.0:
            if needed:
                raise DegenerateAngle(
                    f"edge {disk.ids[i]}-{disk.ids[j]} has a degenerate dihedral or vertical "
                    f"direction (theta={th:.15g})"
                )
            continue
        w = cot_sum * ell / (proj * proj)
        key = (i, j) if i < j else (j, i)
        a[key] = a.get(key, 0.0) + w
    return a


def assemble_hessian(n_vertices, a, rows):
    """Matrix with off-diagonal a_ij and diagonal -sum_j a_ij over ``rows``."""
    pos = {v: k for k, v in enumerate(rows)}
    H = np.zeros((len(rows), len(rows)))
    for (i, j), w in sorted(a.items()):
        if i in pos:
            H[pos[i], pos[i]] -= w
        if j in pos:
            H[pos[j], pos[j]] -= w
        if i in pos and j in pos:
            H[pos[i], pos[j]] += w
            H[pos[j], pos[i]] += w
    return H


def hessian(cap, fixed=()):
    """Curvature report with S, kappa and the Hessian over the interior
    vertices not listed in ``fixed``."""
    fixed = set(fixed)
    a = edge_weights(cap, fixed)
    rows = tuple(v for v in cap.disk.interior if v not in fixed)
    H = assemble_hessian(cap.disk.n_vertices, a, rows)
    return CurvatureReport(
        S=total_scalar_curvature(cap),
        kappa=curvatures(cap),
        interior=cap.disk.interior,
        a=a,
        rows=rows,
        hessian=H,
    )


def quadratic_form_identity(a, x):
    """-sum_{i<j} a_ij (x_i - x_j)^2 for x indexed by vertex index."""
    return -sum(w * (x[i] - x[j]) ** 2 for (i, j), w in sorted(a.items()))


def rigidity_report(cap, flat_tol=FLAT_TOL):
    """Gamma components, predicted nullspace and Hessian spectrum.

    Vertices of the degenerate part (walls) are held fixed like boundary
    vertices; the cap is infinitesimally rigid iff every other interior vertex
    lies in a component of Gamma that reaches the boundary or a wall.
    """
    fixed = cap.degenerate_vertices()
    rep = hessian(cap, fixed)
    gam = gamma_graph(cap, flat_tol)
    rep.gamma = gam
    pos = {v: k for k, v in enumerate(rep.rows)}
    null = []
    for comp, touches in zip(gam.components, gam.touches_boundary):
        if touches or any(v in fixed for v in comp):
            continue
        vec = np.zeros(len(rep.rows))
        for v in comp:
            vec[pos[v]] = 1.0
        null.append(vec)
    rep.nullspace = null
    rep.nullspace_residual = max(
        (float(np.max(np.abs(rep.hessian @ v))) for v in null), default=0.0
    )
    if len(rep.rows):
        rep.eigenvalues = np.linalg.eigvalsh(rep.hessian)
    else:
        rep.eigenvalues = np.zeros(0)
    rep.rigid = not null
    return rep


def scaled_max_eigenvalue(rep):
    """Largest Hessian eigenvalue divided by the largest diagonal magnitude."""
    if rep.eigenvalues is None or not len(rep.eigenvalues):
        return -math.inf
    scale = float(np.max(np.abs(np.diag(rep.hessian))))
    if scale == 0.0:
        return 0.0
    return float(np.max(rep.eigenvalues)) / scale


def face_angles(cap, vertex, flat_tol=FLAT_TOL):
    """Angles at an interior ``vertex`` of the faces of the cap (regions between
    consecutive non-flat edges), summed from intrinsic corner angles."""
    tri = cap.triangulation
    start = next((t, k) for t, c in enumerate(tri.corners) for k in range(3) if c[k] == vertex)
    seq = []  # (corner angle, crossing-is-gamma-edge) going counterclockwise
    cur = start
    while True:
        t, k = cur
        ang = tri.corner_angles(t)[k]
        out_side = (t, (k + 1) % 3)
        nxt = tri.partner(out_side)
        if nxt is None:
            raise ValueError("face_angles expects an interior vertex")
        key = (out_side, nxt) if out_side < nxt else (nxt, out_side)
        seq.append((ang, cap.theta[key] < math.pi - flat_tol))
        cur = (nxt[0], (nxt[1] + 1) % 3)
        if cur == start:
            break
    cuts = [n for n, (_, g) in enumerate(seq) if g]
    if not cuts:
        return [sum(a for a, _ in seq)]
    out = []
    m = len(seq)
    for c0, c1 in zip(cuts, cuts[1:] + [cuts[0] + m]):
        out.append(sum(seq[(n % m)][0] for n in range(c0 + 1, c1 + 1)))
    return out


@dataclass
class DerivativeCheck:
    vertices: tuple  # vertex indices that were perturbed
    kappa: np.ndarray
    fd_gradient: np.ndarray
    hessian: np.ndarray
    fd_hessian: np.ndarray

    @property
    def gradient_error(self):
        return float(np.max(np.abs(self.kappa - self.fd_gradient), initial=0.0))

    @property
    def hessian_error(self):
        return float(np.max(np.abs(self.hessian - self.fd_hessian), initial=0.0))


def finite_difference_check(cap, eps=1e-6):
    """Central differences of S and kappa against kappa and the Hessian.

    Only interior vertices off the degenerate part are perturbed; every
    perturbed height vector must be feasible (raises InfeasibleHeights if not).
    """
    from .capspace import feasibility

    disk = cap.disk
    fixed = cap.degenerate_vertices()
    rep = hessian(cap, fixed)
    rows = rep.rows
    col = {v: k for k, v in enumerate(disk.interior)}
    kap = np.array([rep.kappa[col[v]] for v in rows])
    fd_g = np.zeros(len(rows))
    fd_h = np.zeros((len(rows), len(rows)))
    for j, v in enumerate(rows):
        states = []
        for sign in (1.0, -1.0):
            h = cap.heights.copy()
            h[v] += sign * eps
            states.append(feasibility(disk, h, cap.triangulation))
        plus, minus = states
        fd_g[j] = (total_scalar_curvature(plus) - total_scalar_curvature(minus)) / (2 * eps)
        kp, km = curvatures(plus), curvatures(minus)
        fd_h[:, j] = [(kp[col[u]] - km[col[u]]) / (2 * eps) for u in rows]
    return DerivativeCheck(rows, kap, fd_g, rep.hessian, fd_h)
