"""SVG rendering of gasket models: one element per edge.

Straight edges become <line> elements.  Harmonic-image edges are curves;
they become <polyline> elements through their dyadic sample points,
projected from the plane Z to two dimensions in the (q_1, q'_1) basis.
Output bytes are a pure function of the model and options.
"""

from __future__ import annotations

import numpy as np

from gasketlab.geometry import GasketError, GasketModel

_POLYLINE_DEPTH = 4


def _coord(x: float) -> str:
    return "%.8f" % x


def _project_plane(points: np.ndarray) -> np.ndarray:
    from gasketlab import harmonic

    st = harmonic.harmonic_structure()
    basis = np.stack([st.corner_axes[:, 0], st.corner_perps[:, 0]], axis=1)
    return points @ basis


def _model_segments(model: GasketModel) -> list[np.ndarray]:
    """Per edge, an (k, 2) array of polyline vertices in drawing coordinates."""
    if model.variant != "harmonic":
        return [np.array([e.p, e.q]) for e in model.edges]
    from gasketlab import harmonic

    segments = []
    for e in model.edges:
        # harmonic models enumerate edges word-major, so id mod 3 is the
        # local edge index
        pts = harmonic.edge_polyline(e.word, e.id % 3 + 1, _POLYLINE_DEPTH)
        segments.append(_project_plane(pts))
    return segments


def render_svg(model: GasketModel, width: int = 800) -> str:
    """Render to an SVG document string."""
    if width <= 0:
        raise GasketError("width must be positive")
    segments = _model_segments(model)
    if segments:
        allpts = np.concatenate(segments)
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
    else:
        lo = np.zeros(2)
        hi = np.ones(2)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * span.max()
    lo = lo - margin
    span = span + 2 * margin
    scale = width / span[0]
    height = int(round(span[1] * scale))

    def to_pixels(pts: np.ndarray) -> np.ndarray:
        out = (pts - lo) * scale
        out[:, 1] = height - out[:, 1]          # SVG y axis points down
        return out

    stroke = max(width / 1600.0, 0.25)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<g stroke="black" stroke-width="{_coord(stroke)}" fill="none">',
    ]
    for seg in segments:
        px = to_pixels(seg.copy())
        if len(px) == 2:
            lines.append(
                f'<line x1="{_coord(px[0, 0])}" y1="{_coord(px[0, 1])}" '
                f'x2="{_coord(px[1, 0])}" y2="{_coord(px[1, 1])}"/>'
            )
        else:
            coords = " ".join(f"{_coord(p[0])},{_coord(p[1])}" for p in px)
            lines.append(f'<polyline points="{coords}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_svg(model: GasketModel, path: str, width: int = 800) -> None:
    """Write the rendering to a file."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(render_svg(model, width))
