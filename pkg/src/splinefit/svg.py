"""Minimal SVG rendering of data points and a fitted curve."""

import numpy as np

from .geometry import BSplineCurve, evaluate_many


def render_svg(path, points, curve: BSplineCurve = None, width: int = 800,
               curve_samples: int = 512, point_radius: float = 2.5):
    """Write an SVG with one marker per data point and the curve polyline."""
    pts = np.asarray(points, dtype=np.float64)
    layers = [pts]
    cpts = None
    if curve is not None:
        ts = np.linspace(0.0, 1.0, curve_samples)
        cpts = evaluate_many(curve, ts)
        layers.append(cpts)
    allp = np.vstack(layers)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    margin = 0.05 * float(span.max())
    lo -= margin
    hi += margin
    span = hi - lo
    scale = width / span[0]
    height = int(round(span[1] * scale))

    def to_px(p):
        x = (p[:, 0] - lo[0]) * scale
        y = height - (p[:, 1] - lo[1]) * scale  # flip y-axis
        return x, y

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if cpts is not None:
        x, y = to_px(cpts)
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{coords}" fill="none" '
                   'stroke="#d62728" stroke-width="1.5"/>')
    x, y = to_px(pts)
    for a, b in zip(x, y):
        out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{point_radius}" '
                   'fill="#1f77b4" fill-opacity="0.7"/>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
