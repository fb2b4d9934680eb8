"""Minimal deterministic SVG plots of sweep-shaped tables."""
from __future__ import annotations

import math
from html import escape

from .exceptions import MolbecError
from .sweep import SweepResult, format_float

__all__ = ["render_svg", "svg_text"]

WIDTH, HEIGHT = 640, 480
MARGIN = 64

# viridis-like stops, interpolated linearly
_STOPS = [
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
]


def _colour(t: float) -> str:
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_STOPS, _STOPS[1:]):
        if t <= t1:
            s = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + s * (b - a)) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#fde725"


def _num(x: float) -> str:
    return f"{x:.2f}"


def _span(values):
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = 0.5 if lo == 0 else abs(lo) * 0.05
        return lo - pad, hi + pad
    return lo, hi


def _value_column(result: SweepResult, value: str | None) -> str:
    if value is not None:
        if value not in result.columns:
            raise MolbecError(f"no column named {value!r}")
        return value
    for name, typ in zip(result.columns, result.types):
        if name not in result.axes and typ in ("float", "int"):
            return name
    raise MolbecError("result has no numeric output column to plot")


def svg_text(result: SweepResult, value: str | None = None, title: str = "") -> str:
    """SVG document for a 1-axis (line) or 2-axis (heat map) result."""
    if len(result.axes) == 0 or len(result.axes) > 2:
        raise MolbecError(f"can only plot 1 or 2 axes, result has {len(result.axes)}")
    if not result.rows:
        raise MolbecError("refusing to plot an empty result")
    col = _value_column(result, value)
    vi = result.columns.index(col)
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        head.append(f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>')
    body = _line(result, vi, col) if len(result.axes) == 1 else _heat(result, vi, col)
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _axes_labels(xlab: str, ylab: str, xr, yr) -> list:
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 16}" text-anchor="middle" font-size="14">{escape(xlab)}</text>',
        f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {(y0 + y1) // 2})">{escape(ylab)}</text>',
        f'<text x="{x0}" y="{y0 + 18}" text-anchor="middle" font-size="11">{format_float(xr[0])[:8]}</text>',
        f'<text x="{x1}" y="{y0 + 18}" text-anchor="middle" font-size="11">{format_float(xr[1])[:8]}</text>',
        f'<text x="{x0 - 6}" y="{y0}" text-anchor="end" font-size="11">{format_float(yr[0])[:8]}</text>',
        f'<text x="{x0 - 6}" y="{y1}" text-anchor="end" font-size="11">{format_float(yr[1])[:8]}</text>',
    ]


def _line(result: SweepResult, vi: int, col: str) -> list:
    pts = [
        (float(r[0]), float(r[vi]))
        for r in result.rows
        if r[vi] is not None and math.isfinite(float(r[vi]))
    ]
    if not pts:
        raise MolbecError(f"column {col!r} has no finite values to plot")
    xr, yr = _span([p[0] for p in pts]), _span([p[1] for p in pts])
    w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x, y):
        return (
            MARGIN + (x - xr[0]) / (xr[1] - xr[0]) * w,
            HEIGHT - MARGIN - (y - yr[0]) / (yr[1] - yr[0]) * h,
        )

    out = _axes_labels(result.axes[0], col, xr, yr)
    coords = [px(x, y) for x, y in pts]
    if len(coords) == 1:
        cx, cy = coords[0]
        out.append(f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="4" fill="#3b528b"/>')
    else:
        path = " ".join(f"{_num(x)},{_num(y)}" for x, y in coords)
        out.append(f'<polyline fill="none" stroke="#3b528b" stroke-width="1.5" points="{path}"/>')
    return out


def _heat(result: SweepResult, vi: int, col: str) -> list:
    xs = sorted({float(r[0]) for r in result.rows})
    ys = sorted({float(r[1]) for r in result.rows})
    cells = {}
    for r in result.rows:
        v = r[vi]
        if v is not None and math.isfinite(float(v)):
            cells[(float(r[0]), float(r[1]))] = float(v)
    if not cells:
        raise MolbecError(f"column {col!r} has no finite values to plot")
    lo, hi = min(cells.values()), max(cells.values())
    w = (WIDTH - 2 * MARGIN) / len(xs)
    h = (HEIGHT - 2 * MARGIN) / len(ys)
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    out = []
    for (x, y), v in sorted(cells.items()):
        t = 0.5 if hi == lo else (v - lo) / (hi - lo)
        rx = MARGIN + xi[x] * w
        ry = HEIGHT - MARGIN - (yi[y] + 1) * h
        out.append(
            f'<rect x="{_num(rx)}" y="{_num(ry)}" width="{_num(w)}" height="{_num(h)}" '
            f'fill="{_colour(t)}" data-x="{format_float(x)}" data-y="{format_float(y)}" '
            f'data-value="{format_float(v)}"/>'
        )
    out += _axes_labels(result.axes[0], result.axes[1], (xs[0], xs[-1]), (ys[0], ys[-1]))
    return out


def render_svg(result: SweepResult, path, value: str | None = None, title: str = "") -> None:
    text = svg_text(result, value, title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
