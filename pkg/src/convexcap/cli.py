"""Command-line interface: ``convexcap <command> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capfile import load_cap, save_cap
from .capspace import feasibility
from .embed import develop, export_obj, verify_isometry
from .errors import ConvexCapError, ParseError
from .functional import curvatures, finite_difference_check, rigidity_report, scaled_max_eigenvalue
from .generate import random_cap
from .metric import disk_from_dict, load_disk, validate_convexity
from .solver import MAX_ITERATIONS, SolveOptions, active_set, classify, kkt_residual, maximize

EMBED_CLASSIFY_TOL = 1e-6


def _g(x):
    return "%.12g" % (float(x) + 0.0)


def _cmd_validate(args, out):
    disk = load_disk(args.disk)
    rep = validate_convexity(disk)
    print(f"vertices={disk.n_vertices} interior={len(disk.interior)} "
          f"triangles={disk.triangulation.n_faces}", file=out)
    for a in rep.angles:
        kind = "boundary" if a.boundary else "interior"
        print(f"vertex {a.vertex} {kind} angle={_g(a.cone_angle)} defect={_g(a.defect)}", file=out)
    if rep.convex:
        print("convex=yes", file=out)
        return 0
    names = " ".join(str(a.vertex) for a in rep.violations)
    print(f"convex=no violations={names}", file=out)
    return 1


def _cmd_solve(args, out):
    disk = load_disk(args.disk)
    log = sys.stderr if args.verbose else None
    opts = SolveOptions(tol=args.tol, max_iter=args.max_iter, method=args.method,
                        verbose=args.verbose, log=log)
    res = maximize(disk, opts)
    save_cap(res.cap, args.output)
    print(f"status={res.status}", file=out)
    print(f"classification={res.classification}", file=out)
    print(f"S={_g(res.S)}", file=out)
    print(f"kkt={res.kkt_residual:.3e}", file=out)
    print(f"iterations={res.iterations}", file=out)
    print("active=" + ",".join(str(v) for v in res.active), file=out)
    heights = res.cap.heights_by_id()
    for vid, k in res.kappa.items():
        print(f"vertex {vid} h={_g(heights[vid])} kappa={_g(k)}", file=out)
    if res.status == MAX_ITERATIONS:
        print(f"error: no convergence within {args.max_iter} iterations", file=sys.stderr)
        return 1
    return 0


def _cmd_embed(args, out):
    disk = load_disk(args.disk)
    cap = load_cap(disk, args.cap)
    kappa = curvatures(cap)
    res = kkt_residual(cap, active_set(cap, kappa), kappa)
    cls = classify(cap, 0.0, EMBED_CLASSIFY_TOL)
    print(f"classification={cls} kkt={res:.3e}", file=out)
    emb = develop(cap, cls)
    export_obj(emb, args.output)
    rep = verify_isometry(emb, disk)
    print(f"flat2d={'yes' if emb.flat2d else 'no'} points={len(emb.points)} "
          f"faces={len(emb.faces())}", file=out)
    for line in rep.lines():
        print(line, file=out)
    ok = rep.ok()
    print(f"isometric={'yes' if ok else 'no'}", file=out)
    return 0 if ok else 1


def _cmd_rigidity(args, out):
    disk = load_disk(args.disk)
    cap = load_cap(disk, args.cap)
    rep = rigidity_report(cap)
    ids = disk.ids
    eig = rep.eigenvalues
    print("rows=" + ",".join(str(ids[v]) for v in rep.rows), file=out)
    if len(eig):
        print(f"eigenvalue_min={_g(eig.min())} eigenvalue_max={_g(eig.max())} "
              f"scaled_max={_g(scaled_max_eigenvalue(rep))}", file=out)
    gam = rep.gamma
    print(f"gamma_components={len(gam.components)}", file=out)
    for comp, touches in zip(gam.components, gam.touches_boundary):
        names = ",".join(str(ids[v]) for v in sorted(comp))
        print(f"component boundary={'yes' if touches else 'no'} vertices={names}", file=out)
    print(f"nullspace_dim={len(rep.nullspace)} nullspace_residual={rep.nullspace_residual:.3e}",
          file=out)
    print(f"rigid={'yes' if rep.rigid else 'no'}", file=out)
    return 0


def _read_heights(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(data, dict) and isinstance(data.get("heights"), dict):
        data = data["heights"]
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected an object mapping vertex ids to heights")
    try:
        return {int(k): float(v) for k, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _cmd_check_derivatives(args, out):
    disk = load_disk(args.disk)
    cap = feasibility(disk, _read_heights(args.heights))
    chk = finite_difference_check(cap, args.eps)
    ids = disk.ids
    print("vertex kappa fd_gradient error", file=out)
    for k, v in enumerate(chk.vertices):
        err = abs(chk.kappa[k] - chk.fd_gradient[k])
        print(f"{ids[v]} {_g(chk.kappa[k])} {_g(chk.fd_gradient[k])} {err:.3e}", file=out)
    print("row col hessian fd_jacobian error", file=out)
    for a, v in enumerate(chk.vertices):
        for b, w in enumerate(chk.vertices):
            err = abs(chk.hessian[a, b] - chk.fd_hessian[a, b])
            print(f"{ids[v]} {ids[w]} {_g(chk.hessian[a, b])} {_g(chk.fd_hessian[a, b])} {err:.3e}",
                  file=out)
    print(f"max_gradient_err={chk.gradient_error:.3e}", file=out)
    print(f"max_hessian_err={chk.hessian_error:.3e}", file=out)
    return 0


def roundtrip_trial(seed_seq, n, tol=1e-10):
    """One forward-construct / solve / embed cycle; returns (height error, edge error, solve result)."""
    rng = np.random.default_rng(seed_seq)
    data, truth = random_cap(rng, n)
    disk = disk_from_dict(data)
    res = maximize(disk, SolveOptions(tol=tol))
    z = np.array([truth[i] for i in disk.ids])
    h_err = float(np.max(np.abs(res.cap.heights - z)) / np.max(np.abs(z)))
    emb = develop(res.cap, res.classification)
    rep = verify_isometry(emb, disk)
    return h_err, rep.max_length_error, res


def _cmd_roundtrip(args, out):
    seeds = np.random.SeedSequence(args.seed).spawn(args.trials)
    worst_h = worst_e = 0.0
    failed = 0
    for k, ss in enumerate(seeds):
        try:
            h_err, e_err, res = roundtrip_trial(ss, args.n)
        except ConvexCapError as exc:
            failed += 1
            print(f"trial {k} error={type(exc).__name__}: {exc}", file=out)
            continue
        worst_h, worst_e = max(worst_h, h_err), max(worst_e, e_err)
        print(f"trial {k} status={res.status} vertices={res.cap.disk.n_vertices} "
              f"iterations={res.iterations} height_err={h_err:.3e} edge_err={e_err:.3e}", file=out)
    print(f"max_height_err={worst_h:.3e}", file=out)
    print(f"max_edge_err={worst_e:.3e}", file=out)
    print(f"failed={failed}", file=out)
    return 0 if failed == 0 and worst_h <= 1e-6 and worst_e <= 1e-7 else 1


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="convexcap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("validate", help="print the angle and convexity report of a disk")
    s.add_argument("disk")
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("solve", help="find the cap of a disk and write a cap file")
    s.add_argument("disk")
    s.add_argument("-o", "--output", required=True, help="cap file to write")
    s.add_argument("--tol", type=_positive_float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--method", choices=("newton", "gradient"), default="newton")
    s.add_argument("--verbose", action="store_true", help="log iterations to stderr")
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("embed", help="realize a solved cap in 3D and export OBJ")
    s.add_argument("cap")
    s.add_argument("--disk", required=True)
    s.add_argument("-o", "--output", required=True, help="OBJ file to write")
    s.set_defaults(func=_cmd_embed)

    s = sub.add_parser("rigidity", help="Hessian spectrum and Gamma components of a cap")
    s.add_argument("cap")
    s.add_argument("--disk", required=True)
    s.set_defaults(func=_cmd_rigidity)

    s = sub.add_parser("check-derivatives", help="finite-difference check of kappa and the Hessian")
    s.add_argument("disk")
    s.add_argument("--heights", required=True, help="JSON object mapping vertex ids to heights")
    s.add_argument("--eps", type=_positive_float, default=1e-6)
    s.set_defaults(func=_cmd_check_derivatives)

    s = sub.add_parser("roundtrip", help="solve random caps and compare with the truth")
    s.add_argument("--n", type=_positive_int, required=True, help="points per random cap")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--trials", type=_positive_int, required=True)
    s.set_defaults(func=_cmd_roundtrip)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_iter", 0) < 0:
        parser.error("--max-iter must be non-negative")
    if args.command == "roundtrip" and args.n < 4:
        parser.error("--n must be at least 4")
    try:
        return args.func(args, sys.stdout)
    except ConvexCapError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
