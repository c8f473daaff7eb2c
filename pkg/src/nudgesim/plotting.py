"""Minimal single-panel SVG line charts (no plotting dependency)."""

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#0072bd", "#d95319", "#edb120", "#7e2f8e", "#77ac30", "#4dbeee", "#a2142f"]
_DASHES = ["", "6,4", "2,3", "8,3,2,3"]


def line_chart(series, title="", xlabel="", ylabel="", width=640, height=360, legend=True):
    """Render ``{name: y_values}`` against the step index as an SVG string."""
    names = list(series)
    ys = [np.asarray(series[k], dtype=float) for k in names]
    n_pts = max(len(y) for y in ys)
    lo = min(float(np.min(y)) for y in ys)
    hi = max(float(np.max(y)) for y in ys)
    if hi - lo < 1e-12:
        hi = lo + 1.0
    left, right, top, bottom = 60, 20, 30, 45
    pw = width - left - right
    ph = height - top - bottom

    def sx(i):
        return left + pw * i / max(n_pts - 1, 1)

    def sy(v):
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for frac in np.linspace(0, 1, 5):
        v = lo + frac * (hi - lo)
        y = sy(v)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    step = max(1, (n_pts - 1) // 10)
    for i in range(0, n_pts, step):
        out.append(f'<text x="{sx(i):.2f}" y="{top + ph + 16}" text-anchor="middle">{i}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{top + ph / 2:.1f}" transform="rotate(-90 14 {top + ph / 2:.1f})" '
            f'text-anchor="middle">{escape(ylabel)}</text>'
        )
    for k, (name, y) in enumerate(zip(names, ys)):
        color = _COLORS[k % len(_COLORS)]
        dash = _DASHES[(k // len(_COLORS)) % len(_DASHES)] if len(names) > 4 else _DASHES[k % 2]
        pts = " ".join(f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(y))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>')
        if legend:
            ly = top + 14 + 16 * k
            lx = left + pw - 150
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}"{dash_attr}/>')
            out.append(f'<text x="{lx + 30}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
