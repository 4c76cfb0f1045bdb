"""Cap files: the solver's output, read back by the embed and rigidity commands.

UTF-8 JSON::

    {"heights": {"<id>": h, ...},
     "triangulation": {"triangles": [...], "gluings": [...]},
     "theta": {"t:s/t:s": angle, ...},
     "kappa": {"<id>": curvature, ...},
     "S": total scalar curvature}

Triangles use disk vertex ids, with the same layout as disk files.
"""

import json
from pathlib import Path

from .capspace import feasibility
from .errors import ParseError
from .functional import curvatures, total_scalar_curvature
from .metric import _parse_gluings, _parse_triangles, triangles_to_json
from .triangulation import Triangulation


def cap_to_dict(cap):
    disk, tri = cap.disk, cap.triangulation
    kappa = curvatures(cap)
    return {
        "heights": {str(disk.ids[v]): float(cap.heights[v]) for v in range(disk.n_vertices)},
        "triangulation": {
            "triangles": triangles_to_json(tri, disk.ids),
            "gluings": tri.gluings(),
        },
        "theta": {
            f"{sa[0]}:{sa[1]}/{sb[0]}:{sb[1]}": float(th) for (sa, sb), th in cap.theta.items()
        },
        "kappa": {str(disk.ids[v]): float(k) for v, k in zip(disk.interior, kappa)},
        "S": total_scalar_curvature(cap),
    }


def save_cap(cap, path):
    text = json.dumps(cap_to_dict(cap), indent=1) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def cap_from_dict(disk, data):
    """Rebuild the cap state on ``disk``; the stored triangulation is the
    starting point of the concavity check, so no flips happen for solver output."""
    if not isinstance(data, dict) or "heights" not in data or "triangulation" not in data:
        raise ParseError("cap file needs 'heights' and 'triangulation'")
    try:
        heights = {int(k): float(v) for k, v in data["heights"].items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed heights: {exc}") from exc
    unknown = set(heights) - set(disk.ids)
    if unknown:
        raise ParseError(f"heights for unknown vertices {sorted(unknown)}")
    tdata = data["triangulation"]
    corners, lengths = _parse_triangles(tdata, disk.index)
    gluings = _parse_gluings(tdata, len(corners))
    tri = Triangulation.build(corners, lengths, gluings)
    return feasibility(disk, heights, tri)


def load_cap(disk, path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return cap_from_dict(disk, data)
