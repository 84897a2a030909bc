"""Deterministic SVG rendering of a run report.

Pure string assembly from the report document: identical reports give
byte-identical output.  The main panel shows the parameter box, fold curves
(member curves highlighted), codimension-2 glyphs and the boundary folds;
for one-dimensional states an inset shows the lifted S/Z branch.
"""

from __future__ import annotations

import numpy as np

W, H = 760, 560
MARGIN = 56
INSET_W, INSET_H = 190, 132

_MEMBER_COLOR = "#c0392b"
_OTHER_COLOR = "#8a8a8a"
_GLYPH = {
    "cusp_standard": ("circle", "#1a6fb5"),
    "cusp_dual": ("circle-open", "#1a6fb5"),
    "bogdanov_takens": ("square", "#7d3c98"),
    "fold_hopf": ("diamond", "#1e8449"),
}


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _polyline(points, stroke, width, dash=None, opacity=1.0) -> str:
    d = "M" + " L".join(f"{_fmt(px)} {_fmt(py)}" for px, py in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<path d="{d}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}" opacity="{_fmt(opacity)}"{dash_attr}/>')


def _glyph(kind: str, px: float, py: float) -> str:
    shape, color = _GLYPH[kind]
    if shape == "circle":
        return (f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="5" '
                f'fill="{color}" stroke="white" stroke-width="1.2"/>')
    if shape == "circle-open":
        return (f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="5" fill="white" '
                f'stroke="{color}" stroke-width="2"/>')
    if shape == "square":
        return (f'<rect x="{_fmt(px - 4.5)}" y="{_fmt(py - 4.5)}" width="9" '
                f'height="9" fill="{color}" stroke="white" stroke-width="1"/>')
    pts = f"{_fmt(px)},{_fmt(py - 6)} {_fmt(px + 6)},{_fmt(py)} " \
          f"{_fmt(px)},{_fmt(py + 6)} {_fmt(px - 6)},{_fmt(py)}"
    return f'<polygon points="{pts}" fill="{color}" stroke="white" stroke-width="1"/>'


def render_svg(report, options=None) -> str:
    """Render the report to an SVG document string."""
    data = report.data if hasattr(report, "data") else report
    fambox = data["family"]["box"]
    lo = np.array(fambox["lo"], dtype=float)
    hi = np.array(fambox["hi"], dtype=float)
    span = hi - lo
    dim = data["family"]["dim"]

    def to_px(theta):
        t = (np.asarray(theta, dtype=float) - lo) / span
        px = MARGIN + t[0] * (W - 2 * MARGIN)
        py = H - MARGIN - t[1] * (H - 2 * MARGIN)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
    ]
    # parameter box
    corners = [to_px((lo[0], lo[1])), to_px((hi[0], lo[1])),
               to_px((hi[0], hi[1])), to_px((lo[0], hi[1]))]
    parts.append(_polyline(corners + [corners[0]], "#222222", 1.4))
    # highlight the S/Z edge
    edge = fambox["sz_edge"]
    edge_pts = {
        "left": [(lo[0], lo[1]), (lo[0], hi[1])],
        "right": [(hi[0], lo[1]), (hi[0], hi[1])],
        "bottom": [(lo[0], lo[1]), (hi[0], lo[1])],
        "top": [(lo[0], hi[1]), (hi[0], hi[1])],
    }[edge]
    parts.append(_polyline([to_px(p) for p in edge_pts], "#e67e22", 3.5,
                           opacity=0.85))

    # axis annotations
    parts.append(
        f'<text x="{_fmt(W / 2)}" y="{_fmt(H - 14)}" font-family="monospace" '
        f'font-size="12" text-anchor="middle">theta1: {_fmt(lo[0])} .. {_fmt(hi[0])}'
        f'</text>')
    parts.append(
        f'<text x="16" y="{_fmt(H / 2)}" font-family="monospace" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 16 {_fmt(H / 2)})">'
        f'theta2: {_fmt(lo[1])} .. {_fmt(hi[1])}</text>')

    # fold curves
    for curve in data.get("curves", []):
        pts = curve.get("points", [])
        if len(pts) < 2:
            continue
        theta_pts = [to_px(p[-2:]) for p in pts]
        if curve.get("member"):
            parts.append(_polyline(theta_pts, _MEMBER_COLOR, 2.2))
        else:
            parts.append(_polyline(theta_pts, _OTHER_COLOR, 1.4, dash="5 4"))

    # boundary folds
    sz = data.get("sz")
    if sz:
        for fp in sz.get("folds", []):
            px, py = to_px(fp["theta"])
            pts = f"{_fmt(px)},{_fmt(py - 6)} {_fmt(px + 5)},{_fmt(py + 4)} " \
                  f"{_fmt(px - 5)},{_fmt(py + 4)}"
            parts.append(f'<polygon points="{pts}" fill="#e67e22" '
                         f'stroke="white" stroke-width="1"/>')

    # codim-2 glyphs
    for c2 in data.get("codim2", []):
        px, py = to_px(c2["theta"])
        parts.append(_glyph(c2["kind"], px, py))

    # verdict caption
    verdict = data.get("verdict")
    if verdict:
        if verdict["fh_found"]:
            text = "fold-Hopf present: disjunction satisfied"
        else:
            sat = "satisfied" if verdict["theorem_satisfied"] else "NOT satisfied"
            text = (f'cusps on saddle-component boundary: '
                    f'{verdict["cusp_count_total"]} ({verdict["parity"]}) - {sat}')
        parts.append(
            f'<text x="{_fmt(W / 2)}" y="24" font-family="monospace" '
            f'font-size="13" text-anchor="middle">{text}</text>')

    # inset: lifted S/Z branch for scalar states
    if sz and dim == 1 and sz.get("arcs"):
        x0 = W - MARGIN - INSET_W
        y0 = MARGIN * 0.6
        parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{INSET_W}" '
                     f'height="{INSET_H}" fill="#fbfbfb" stroke="#bbbbbb"/>')
        all_pts = [p for arc in sz["arcs"] for p in arc["points"]]
        if len(all_pts) >= 2:
            arr = np.asarray(all_pts, dtype=float)
            s_lo, s_hi = arr[:, 0].min(), arr[:, 0].max()
            x_lo, x_hi = arr[:, 1].min(), arr[:, 1].max()
            s_span = max(s_hi - s_lo, 1e-12)
            x_span = max(x_hi - x_lo, 1e-12)

            def inset_px(s, x):
                return (x0 + 6 + (s - s_lo) / s_span * (INSET_W - 12),
                        y0 + INSET_H - 6 - (x - x_lo) / x_span * (INSET_H - 12))

            colors = {"attractor": "#2c6fbb", "1-saddle": "#c0392b"}
            for arc in sz["arcs"]:
                pts = [inset_px(p[0], p[1]) for p in arc["points"]]
                if len(pts) >= 2:
                    parts.append(_polyline(
                        pts, colors.get(arc["stability"], "#555555"), 1.6))
            parts.append(
                f'<text x="{_fmt(x0 + INSET_W / 2)}" y="{_fmt(y0 + INSET_H + 14)}" '
                f'font-family="monospace" font-size="10" text-anchor="middle">'
                f'branch over {sz["edge"]} edge (x vs edge coord)</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
