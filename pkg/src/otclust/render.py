"""Deterministic SVG pictures of cell tessellations.

Layer order is fixed (cells, samples, facet walls, site dots) and every
coordinate is formatted identically, so the same diagram always renders
to the same bytes — reruns can be compared with a plain file diff.
"""

import numpy as np

from otclust.errors import UnsupportedRenderError

PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)

_PAD_FRACTION = 0.02


def _color(index, labels):
    key = int(labels[index]) if labels is not None else index
    return PALETTE[key % len(PALETTE)]


def render_svg(diagram, samples=None, path=None, size=640, labels=None):
    """Draw a diagram (plus optional sample scatter) as an SVG string.

    ``labels``, when given, colors each site (and its cell) by class
    instead of by index.  ``size`` is the pixel width; height follows the
    domain's aspect ratio.  If ``path`` is set the string is also written
    there.  Only 2D data can be drawn.
    """
    pos = diagram.positions
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise UnsupportedRenderError(f"can only draw 2D diagrams, got {pos.shape[1]}D sites")
    pts = None
    if samples is not None:
        pts = np.asarray(samples, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise UnsupportedRenderError(
                f"can only draw 2D samples, got shape {pts.shape}"
            )
    if size < 16:
        raise UnsupportedRenderError("svg size must be at least 16 pixels")

    corners = [v for cell in diagram.cells for v in cell.vertices]
    xs = [v[0] for v in corners] + list(pos[:, 0])
    ys = [v[1] for v in corners] + list(pos[:, 1])
    if pts is not None and pts.size:
        xs += list(pts[:, 0])
        ys += list(pts[:, 1])
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = _PAD_FRACTION * max(x1 - x0, y1 - y0, 1e-9)
    x0 -= pad
    x1 += pad
    y0 -= pad
    y1 += pad
    scale = size / (x1 - x0)
    height = (y1 - y0) * scale

    def sx(x):
        return f"{(x - x0) * scale:.3f}"

    def sy(y):
        return f"{(y1 - y) * scale:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{height:.3f}" viewBox="0 0 {size} {height:.3f}">',
        f'<rect width="{size}" height="{height:.3f}" fill="#ffffff"/>',
    ]
    for cell in diagram.cells:
        if cell.is_empty:
            continue
        coords = " ".join(f"{sx(x)},{sy(y)}" for x, y in cell.vertices)
        fill = _color(cell.index, labels)
        out.append(
            f'<polygon class="cell" points="{coords}" fill="{fill}" '
            f'fill-opacity="0.35" stroke="none"/>'
        )
    if pts is not None:
        for x, y in pts:
            out.append(
                f'<circle class="sample" cx="{sx(x)}" cy="{sy(y)}" r="1.5" '
                f'fill="#777777" fill-opacity="0.6"/>'
            )
    for pair in sorted(diagram.facet_segments):
        for (px, py), (qx, qy) in diagram.facet_segments[pair]:
            out.append(
                f'<line class="facet" x1="{sx(px)}" y1="{sy(py)}" '
                f'x2="{sx(qx)}" y2="{sy(qy)}" stroke="#333333" stroke-width="1"/>'
            )
    for j in range(pos.shape[0]):
        out.append(
            f'<circle class="centroid" cx="{sx(pos[j, 0])}" cy="{sy(pos[j, 1])}" '
            f'r="4" fill="{_color(j, labels)}" stroke="#111111" stroke-width="1"/>'
        )
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
