"""Convex polygon primitives used by the power diagram construction.

Polygons are lists of (x, y) tuples in counterclockwise order.  Clipping
carries a parallel list of edge labels so each edge of a finished cell
remembers whether it came from the domain boundary or from the bisector
against a particular neighbor.
"""

import math

DOMAIN_EDGE = -1  # edge label for pieces of the domain boundary


def polygon_area(verts):
    """Signed shoelace area; positive for counterclockwise order."""
    n = len(verts)
    if n < 3:
        return 0.0
    acc = 0.0
    for t in range(n):
        x0, y0 = verts[t]
        x1, y1 = verts[(t + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def polygon_centroid(verts):
    """Area centroid of a simple polygon (undefined for zero area)."""
    n = len(verts)
    a = 0.0
    cx = 0.0
    cy = 0.0
    for t in range(n):
        x0, y0 = verts[t]
        x1, y1 = verts[(t + 1) % n]
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if a == 0.0:
        raise ValueError("centroid of a degenerate polygon")
    return (cx / (3.0 * a), cy / (3.0 * a))


def is_convex_ccw(verts, tol=1e-12):
    """True if the vertex list is convex and counterclockwise.

    Uses cross products of consecutive edges; collinear runs are allowed
    within ``tol`` scaled by the polygon extent.
    """
    n = len(verts)
    if n < 3:
        return False
    scale = max(abs(c) for v in verts for c in v) or 1.0
    eps = tol * scale * scale
    for t in range(n):
        x0, y0 = verts[t]
        x1, y1 = verts[(t + 1) % n]
        x2, y2 = verts[(t + 2) % n]
        cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if cross < -eps:
            return False
    return True


def clip_halfplane(verts, labels, ax, ay, b, new_label):
    """Clip a convex polygon against the half-plane ax*x + ay*y >= b.

    ``labels[t]`` labels the edge verts[t] -> verts[t+1].  The single new
    edge created along the clip line gets ``new_label``.  Returns the
    clipped (verts, labels); both empty when nothing survives.
    """
    n = len(verts)
    if n == 0:
        return [], []
    vals = [ax * vx + ay * vy - b for (vx, vy) in verts]
    if all(v >= 0.0 for v in vals):
        return verts, labels
    if all(v < 0.0 for v in vals):
        return [], []
    out_v = []
    out_l = []
    for t in range(n):
        tn = (t + 1) % n
        vc, vn = vals[t], vals[tn]
        cur, nxt = verts[t], verts[tn]
        if vc >= 0.0:
            out_v.append(cur)
            if vn >= 0.0:
                out_l.append(labels[t])
            else:
                out_l.append(labels[t])
                out_v.append(_intersect(cur, nxt, vc, vn))
                out_l.append(new_label)
        elif vn >= 0.0:
            out_v.append(_intersect(cur, nxt, vc, vn))
            out_l.append(labels[t])
    out_v, out_l = _drop_null_edges(out_v, out_l)
    if len(out_v) < 3:
        return [], []
    return out_v, out_l


def _intersect(p, q, vp, vq):
    # vp >= 0 > vq or vq >= 0 > vp; linear interpolation along the edge
    t = vp / (vp - vq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def _drop_null_edges(verts, labels):
    # vertices repeated exactly (from clips through a vertex) carry
    # zero-length edges; drop the edge, keep the later vertex's label
    n = len(verts)
    out_v = []
    out_l = []
    for t in range(n):
        if verts[t] != verts[(t + 1) % n]:
            out_v.append(verts[t])
            out_l.append(labels[t])
        else:
            # zero-length edge: re-home the waiting vertex to the next slot
            continue
    return out_v, out_l


def segment_length(p, q):
    return math.hypot(q[0] - p[0], q[1] - p[1])
