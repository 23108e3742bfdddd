"""Projection of R^4 polylines to R^3 and OBJ/PLY writers."""
from __future__ import annotations

import numpy as np

PROJECTIONS = ("drop_w", "stereographic")


def pole_for(points, scale=1.0, factor=10.0):
    """Projection pole on the w axis through the box centre, at distance >= factor*scale from the box."""
    pts = np.asarray(points, float).reshape(-1, 4)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    c = 0.5 * (lo + hi)
    return np.array([c[0], c[1], c[2], hi[3] + factor * max(scale, float(np.max(hi - lo)))])


def project(points, mode="drop_w", pole=None, scale=1.0):
    """Map (..., 4) points to (..., 3).

    ``stereographic`` is the central projection from ``pole`` onto the
    hyperplane w = w_c through the box centre.
    """
    pts = np.asarray(points, float)
    if mode == "drop_w":
        return pts[..., :3].copy()
    if mode != "stereographic":
        raise ValueError(f"projection must be one of {PROJECTIONS}")
    if pole is None:
        pole = pole_for(pts, scale)
    flat = pts.reshape(-1, 4)
    wc = 0.5 * (flat[:, 3].min() + flat[:, 3].max())
    t = (pole[3] - wc) / (pole[3] - pts[..., 3])
    return pole[:3] + (pts[..., :3] - pole[:3]) * t[..., None]


def polylines_from_surface(surface, include_spine=True):
    """Polylines (each (k, 4)) of a discrete dual slice, translated by its offset."""
    out = []
    if include_spine:
        out.append(surface.spine.polyline()[1] + surface.offset)
    for c in surface.curves:
        out.append(c.polyline()[1] + surface.offset)
    return out


def write_obj(path, polylines, mode="drop_w", scale=1.0):
    """One "l" element per polyline; returns the vertex count."""
    allp = np.concatenate(polylines, axis=0)
    pole = pole_for(allp, scale) if mode == "stereographic" else None
    with open(path, "w") as fh:
        fh.write(f"# projection {mode}\n")
        base = 1
        for pl in polylines:
            for v in project(pl, mode, pole):
                fh.write("v %.17g %.17g %.17g\n" % tuple(v))
        for pl in polylines:
            idx = range(base, base + len(pl))
            fh.write("l " + " ".join(map(str, idx)) + "\n")
            base += len(pl)
    return base - 1


def write_ply(path, polylines, mode="drop_w", scale=1.0):
    """ASCII PLY with vertex and edge elements; returns the vertex count."""
    allp = np.concatenate(polylines, axis=0)
    pole = pole_for(allp, scale) if mode == "stereographic" else None
    verts = np.concatenate([project(pl, mode, pole) for pl in polylines], axis=0)
    edges = []
    base = 0
    for pl in polylines:
        edges.extend((base + i, base + i + 1) for i in range(len(pl) - 1))
        base += len(pl)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"comment projection {mode}\n")
        fh.write(f"element vertex {len(verts)}\nproperty double x\nproperty double y\nproperty double z\n")
        fh.write(f"element edge {len(edges)}\nproperty int vertex1\nproperty int vertex2\nend_header\n")
        for v in verts:
            fh.write("%.17g %.17g %.17g\n" % tuple(v))
        for a, b in edges:
            fh.write(f"{a} {b}\n")
    return len(verts)
