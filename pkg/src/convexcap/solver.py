"""Maximize the total scalar curvature over the space of generalized caps.

Damped Newton ascent with an active set: vertices incident to a degenerate
(vertical) prism are held fixed while their curvature is non-negative.  Every
iterate is feasible; the step length is capped by the largest feasible step
along the search direction and then backtracked until S increases.
"""

from dataclasses import dataclass, field
import math
import sys

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import lsq_linear

from .capspace import as_height_array, feasibility
from .errors import (
    ConvexFaceViolation,
    DegenerateAngle,
    InfeasibleHeights,
    InfeasibleWitness,
    InternalInfeasible,
)
from .functional import curvatures, face_angles, hessian, total_scalar_curvature
from .metric import require_solvable
from . import _geom

ARMIJO = 1e-4
MIN_STEP = 1e-14
FACE_ANGLE_SLACK = 1e-9
PROBE_LIMIT = 50
#: iterates are kept this far inside the concavity constraints, well below the
#: slack used when probing for new constraints
ITERATE_SLACK = 1e-14
PROBE_STEPS = (1e-7, 1e-5)
#: relative margin demanded on tight concavity cuts when a tangent direction
#: stalls; the cuts linearize curved constraints
CUT_MARGIN = 0.05

INTERIOR_OPTIMUM = "InteriorOptimum"
BOUNDARY_OPTIMUM = "BoundaryOptimum"
MAX_ITERATIONS = "MaxIterations"


@dataclass
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 10000
    method: str = "newton"
    shrink: float = 0.5
    initial: object = None  # heights keyed by id, or an array by vertex index
    verbose: bool = False
    log: object = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.method not in ("newton", "gradient"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")


@dataclass(frozen=True)
class Classification:
    kind: str  # ClassicalCap3D, ClassicalCapFlat2D or NotClassical
    reason: str = ""

    def __str__(self):
        return f"{self.kind}({self.reason})" if self.reason else self.kind


@dataclass
class SolveResult:
    cap: object
    status: str
    kkt_residual: float
    classification: Classification
    active: tuple  # vertex ids
    iterations: int
    S: float
    kappa: dict  # vertex id -> curvature
    history: list = field(default_factory=list, repr=False)  # S per iterate


def kkt_residual(cap, active=None, kappa=None):
    """Max of |kappa| over inactive interior vertices and of max(0, -kappa)
    over active ones.  ``active`` holds vertex indices (default: none)."""
    active = set() if active is None else set(active)
    k = curvatures(cap) if kappa is None else kappa
    r = 0.0
    for v, kv in zip(cap.disk.interior, k):
        r = max(r, max(0.0, -kv) if v in active else abs(kv))
    return float(r)


def active_set(cap, kappa):
    """Interior vertices on a degenerate prism whose curvature is non-negative."""
    deg = cap.degenerate_vertices()
    return {v for v, k in zip(cap.disk.interior, kappa) if v in deg and k >= 0.0}


def degenerate_part(cap):
    """Interior vertices joined to the boundary through degenerate prisms."""
    tri, disk = cap.triangulation, cap.disk
    adj = {}
    for t in cap.degenerate_triangles():
        c = tri.corners[t]
        for a in c:
            adj.setdefault(a, set()).update(c)
    seen = {v for v in disk.boundary_vertices if v in adj}
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return {v for v in seen if not disk.boundary[v]}


def check_convex_faces(cap, kappa):
    """Abort if a vertex with non-positive curvature has a face angle >= pi."""
    defect = 2 * math.pi - np.array([sum(cap.triangulation.corner_angles(t)[k]
                                         for t, k in cap.triangulation.vertex_corners(v))
                                     for v in cap.disk.interior])
    for v, k, dv in zip(cap.disk.interior, kappa, defect):
        if k > 0.0 or dv <= 1e-9:
            continue
        for ang in face_angles(cap, v):
            if ang >= math.pi + FACE_ANGLE_SLACK:
                raise ConvexFaceViolation(
                    f"vertex {cap.disk.ids[v]} has curvature {k:.3g} <= 0 but a face "
                    f"angle {ang:.15g} >= pi"
                )


def classify(cap, residual, tol=1e-8):
    """Classical-cap test on a converged maximizer."""
    n_deg = len(cap.degenerate_triangles())
    if n_deg == cap.triangulation.n_faces:
        return Classification("ClassicalCapFlat2D")
    bound = max(residual, tol) * (1 + 1e-9) + 1e-15
    walls = degenerate_part(cap)
    for v, k in zip(cap.disk.interior, curvatures(cap)):
        vid = cap.disk.ids[v]
        if v in walls:
            if k < -bound:
                return Classification("NotClassical", f"vertex {vid} on a wall has kappa={k:.3g} < 0")
        elif abs(k) > bound:
            return Classification("NotClassical", f"vertex {vid} has kappa={k:.3g} != 0")
    return Classification("ClassicalCap3D")


def _try_state(disk, h, tri):
    try:
        return feasibility(disk, h, tri, slack=ITERATE_SLACK)
    except InfeasibleHeights:
        return None


def _slope_limit(cap, d):
    """Smallest t > 0 with |grad(h + t d)| = 1 on some triangle of the current
    triangulation (inf if none)."""
    best = math.inf
    h = cap.heights
    for t, pts in enumerate(cap.layouts):
        c = cap.triangulation.corners[t]
        g0 = _geom.gradient(pts, h[list(c)])
        g1 = _geom.gradient(pts, d[list(c)])
        a = float(g1 @ g1)
        if a <= 0.0:
            continue
        b = 2.0 * float(g0 @ g1)
        cc = float(g0 @ g0) - 1.0
        disc = b * b - 4 * a * cc
        if disc < 0:
            continue
        root = (-b + math.sqrt(disc)) / (2 * a)
        if root >= 0.0:
            best = min(best, root)
    return best


def max_feasible_step(cap, d):
    """Largest t in (0, 1] with h + t d feasible, with its state; (0, None) if
    no positive step is feasible."""
    disk, h, tri = cap.disk, cap.heights, cap.triangulation
    st = _try_state(disk, h + d, tri)
    if st is not None:
        return 1.0, st
    hi = 1.0
    tq = _slope_limit(cap, d)
    if tq < 1.0:
        st = _try_state(disk, h + tq * d, tri)
        if st is not None:
            return tq, st
        hi = tq
    lo, lo_state = 0.0, None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        st = _try_state(disk, h + mid * d, lo_state.triangulation if lo_state else tri)
        if st is not None:
            lo, lo_state = mid, st
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi or hi < MIN_STEP:
            break
    return lo, lo_state


def _newton_factor(cap, free, fixed):
    """Cholesky factor of -H over ``free`` (None when -H is not positive definite)."""
    rep = hessian(cap, fixed)
    H = rep.hessian
    if not np.all(np.isfinite(H)):
        return None
    try:
        return np.linalg.cholesky(-H)
    except np.linalg.LinAlgError:
        return None


def _direction(kappa_full, free, factor, rows, n):
    """Maximizer of k.d - d.M.d/2 subject to w.d >= 0 for ``rows``, with d = 0
    off ``free``; M = L L^T from ``factor`` or the identity."""
    F = list(free)
    g = kappa_full[F]
    L = np.eye(len(F)) if factor is None else factor
    b = solve_triangular(L, g, lower=True)
    r = b
    if rows:
        A = np.array([w[F] for w in rows])
        B = solve_triangular(L, A.T, lower=True)
        # dual of the direction QP: min |b + B mu| over mu >= 0
        mu = lsq_linear(B, -b, bounds=(0.0, np.inf), method="bvls", tol=1e-14).x
        r = b + B @ mu
    dF = solve_triangular(L.T, r, lower=False)
    d = np.zeros(n)
    d[F] = dF
    return d


def _margin_direction(kappa_full, free, factor, rows, margins, n):
    """Like :func:`_direction` with ``w.d >= c`` for the given margins: shift by
    a particular solution d_c of A d_c = c and solve for the remainder."""
    F = list(free)
    A = np.array([w[F] for w in rows])
    c = np.asarray(margins, dtype=float)
    dc, *_ = np.linalg.lstsq(A, c, rcond=None)
    if not np.allclose(A @ dc, c, rtol=1e-9, atol=1e-14):
        return None
    M = np.eye(len(F)) if factor is None else factor @ factor.T
    shifted = np.zeros(n)
    shifted[F] = kappa_full[F] - M @ dc
    e = _direction(shifted, free, factor, rows, n)
    e[F] += dc
    return e


def _slope_rows(cap):
    """Linearized gradient bound on every degenerate prism: G . grad(d) <= 0,
    written as coefficient vectors w with w . d >= 0."""
    rows = []
    n = cap.disk.n_vertices
    for t in cap.degenerate_triangles():
        c = cap.triangulation.corners[t]
        pts = cap.layouts[t]
        g = _geom.gradient(pts, cap.heights[list(c)])
        w = np.zeros(n)
        for k in range(3):
            w[c[k]] -= float(g @ _geom.gradient(pts, np.eye(3)[k]))
        rows.append(w)
    return rows


def _probe(cap, d):
    """Coefficients of a concavity inequality that a short step along ``d``
    breaks, or None.  Only inequalities actually decreasing along ``d`` count."""
    scale = max(1.0, float(np.max(np.abs(cap.heights))))
    dmax = float(np.max(np.abs(d)))
    for rel in PROBE_STEPS:
        eps = rel * scale / dmax
        try:
            feasibility(cap.disk, cap.heights + eps * d, cap.triangulation, slack=ITERATE_SLACK)
        except InfeasibleWitness as exc:
            w = np.zeros(cap.disk.n_vertices)
            for v, c in exc.witness.weights:
                w[v] += c
            if float(w @ d) < -1e-13 * np.linalg.norm(w) * np.linalg.norm(d):
                return w
        except InfeasibleHeights:
            return None
    return None


def _line_search(cap, S, kappa_full, d, shrink, residual=None):
    """Backtracking from the largest feasible step.  Returns (t, state, S_new)
    or None when no acceptable step exists."""
    slope = float(kappa_full @ d)
    if not slope > 0.0:
        return None
    t, st = max_feasible_step(cap, d)
    if st is None or not t > 0.0:
        return None
    noise = 1e-12 * (1.0 + abs(S))
    if t * slope < noise:
        # S cannot resolve the gain; accept the whole step if S does not drop
        # and the optimality residual clearly improves
        s_new = total_scalar_curvature(st)
        if s_new < S - noise or residual is None:
            return None
        k_new = curvatures(st)
        if kkt_residual(st, active_set(st, k_new), k_new) < 0.5 * residual:
            return t, st, s_new
        return None
    while t >= MIN_STEP:
        if st is None:
            st = _try_state(cap.disk, cap.heights + t * d, cap.triangulation)
        if st is not None:
            s_new = total_scalar_curvature(st)
            if s_new >= S + ARMIJO * t * slope:
                return t, st, s_new
        t *= shrink
        st = None
    return None


def _log(opts, it, S, res, step, n_active):
    if not opts.verbose:
        return
    out = opts.log if opts.log is not None else sys.stderr
    print(f"iter={it} S={S:.12g} kkt={res:.3e} step={step:.3e} active={n_active}", file=out)


def maximize(disk, opts=None):
    """Maximize S over the caps with upper boundary ``disk``."""
    opts = SolveOptions() if opts is None else opts
    require_solvable(disk)
    h = np.zeros(disk.n_vertices) if opts.initial is None else as_height_array(disk, opts.initial)
    cap = feasibility(disk, h)
    S = total_scalar_curvature(cap)
    history = [S]
    cuts, cut_keys = [], set()  # valid concavity inequalities met so far
    step = 0.0
    status = MAX_ITERATIONS
    it = 0
    while True:
        kappa = curvatures(cap)
        active = active_set(cap, kappa)
        res = kkt_residual(cap, active, kappa)
        check_convex_faces(cap, kappa)
        _log(opts, it, S, res, step, len(active))
        if res <= opts.tol:
            status = BOUNDARY_OPTIMUM if active else INTERIOR_OPTIMUM
            break
        if it >= opts.max_iter:
            break
        it += 1
        free = [v for v in disk.interior if v not in active]
        kappa_full = np.zeros(disk.n_vertices)
        for v, k in zip(disk.interior, kappa):
            kappa_full[v] = k
        scale = max(1.0, float(np.max(np.abs(cap.heights))))
        tight = [w for w in cuts if float(w @ cap.heights) <= 1e-10 * scale]
        slope_rows = _slope_rows(cap)
        tight += slope_rows
        found = None
        kinds = ("newton", "gradient", "coupled") if opts.method == "newton" else ("gradient", "coupled")
        for kind in kinds:
            factor = None
            # "coupled" frees the wall vertices too; the linearized slope rows
            # then let several of them move down together
            free_k = list(disk.interior) if kind == "coupled" else free
            if kind == "newton":
                try:
                    factor = _newton_factor(cap, free, active)
                except DegenerateAngle:
                    factor = None
                if factor is None:
                    continue
            rows = list(tight)
            d = None
            for _ in range(PROBE_LIMIT):
                d = _direction(kappa_full, free_k, factor, rows, disk.n_vertices)
                if not float(kappa_full @ d) > 0.0:
                    d = None
                    break
                w = _probe(cap, d)
                if w is None:
                    break
                rows.append(w)
                key = tuple(np.round(w, 12))
                if key not in cut_keys:
                    cut_keys.add(key)
                    cuts.append(w)
            if d is None:
                continue
            found = _line_search(cap, S, kappa_full, d, opts.shrink, res)
            if found is not None:
                break
            cut_rows = tight[: len(tight) - len(slope_rows)] + rows[len(tight):]
            if cut_rows:
                dn = float(np.linalg.norm(d))
                margins = [CUT_MARGIN * float(np.linalg.norm(w)) * dn for w in cut_rows]
                margins += [0.0] * len(slope_rows)
                dm = _margin_direction(
                    kappa_full, free_k, factor, cut_rows + slope_rows, margins, disk.n_vertices
                )
                if dm is not None and float(kappa_full @ dm) > 0.0:
                    found = _line_search(cap, S, kappa_full, dm, opts.shrink, res)
                    if found is not None:
                        break
        if found is None:
            raise InternalInfeasible(
                f"no feasible ascent step of length >= {MIN_STEP:g} at iteration {it} "
                f"(kkt residual {res:.3e})"
            )
        step, cap, S = found
        history.append(S)
    kappa = curvatures(cap)
    active = active_set(cap, kappa)
    res = kkt_residual(cap, active, kappa)
    return SolveResult(
        cap=cap,
        status=status,
        kkt_residual=res,
        classification=classify(cap, res, opts.tol),
        active=tuple(sorted(disk.ids[v] for v in active)),
        iterations=it,
        S=S,
        kappa={disk.ids[v]: float(k) for v, k in zip(disk.interior, kappa)},
        history=history,
    )
