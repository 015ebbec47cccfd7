"""Plain SVG line charts (no plotting dependency)."""

from __future__ import annotations

from typing import Mapping, Sequence

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]

Series = tuple[str, Mapping[float, float]]


def _escape(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _fmt(x: float) -> str:
    return f"{x:.1f}"


def _panel(
    title: str,
    series: Sequence[Series],
    left: float,
    top: float,
    width: float,
    height: float,
    x_label: str,
    y_label: str,
    y_range: tuple[float, float],
    reference: float | None,
    categorical_x: bool,
) -> list[str]:
    xs = sorted({x for _, pts in series for x in pts})
    y_lo, y_hi = y_range
    pad_l, pad_r, pad_t, pad_b = 55, 15, 30, 40
    x0, x1 = left + pad_l, left + width - pad_r
    y0, y1 = top + height - pad_b, top + pad_t

    def px(x: float) -> float:
        if len(xs) == 1:
            return (x0 + x1) / 2
        if categorical_x:
            return x0 + xs.index(x) * (x1 - x0) / (len(xs) - 1)
        return x0 + (x - xs[0]) * (x1 - x0) / (xs[-1] - xs[0])

    def py(y: float) -> float:
        return y0 - (y - y_lo) * (y0 - y1) / (y_hi - y_lo)

    out = [f'<g class="panel" data-title="{_escape(title)}">']
    out.append(
        f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(top + 18)}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">{_escape(title)}</text>'
    )
    out.append(f'<path d="M{_fmt(x0)},{_fmt(y1)} V{_fmt(y0)} H{_fmt(x1)}" stroke="#333" fill="none"/>')
    for k in range(5):
        y = y_lo + k * (y_hi - y_lo) / 4
        out.append(
            f'<text x="{_fmt(x0 - 6)}" y="{_fmt(py(y) + 4)}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{y:.2f}</text>'
        )
    for x in xs:
        out.append(
            f'<text x="{_fmt(px(x))}" y="{_fmt(y0 + 14)}" text-anchor="middle" font-size="10" '
            f'font-family="sans-serif">{x:g}</text>'
        )
    out.append(
        f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(y0 + 32)}" text-anchor="middle" font-size="11" '
        f'font-family="sans-serif">{_escape(x_label)}</text>'
    )
    out.append(
        f'<text x="{_fmt(left + 14)}" y="{_fmt((y0 + y1) / 2)}" text-anchor="middle" font-size="11" '
        f'font-family="sans-serif" transform="rotate(-90 {_fmt(left + 14)} {_fmt((y0 + y1) / 2)})">'
        f"{_escape(y_label)}</text>"
    )
    if reference is not None and y_lo <= reference <= y_hi:
        out.append(
            f'<path d="M{_fmt(x0)},{_fmt(py(reference))} H{_fmt(x1)}" stroke="#999" '
            'stroke-dasharray="4 3" fill="none"/>'
        )
    for i, (label, pts) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        coords = [(px(x), py(y)) for x, y in sorted(pts.items()) if y == y]  # skip NaN
        if coords:
            d = "M" + " L".join(f"{_fmt(a)},{_fmt(b)}" for a, b in coords)
            out.append(f'<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>')
            for a, b in coords:
                out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2.5" fill="{color}"/>')
        ly = top + pad_t + 4 + 14 * i
        out.append(f'<path d="M{_fmt(x1 - 70)},{_fmt(ly)} h14" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{_fmt(x1 - 52)}" y="{_fmt(ly + 4)}" font-size="10" font-family="sans-serif">'
            f"{_escape(label)}</text>"
        )
    out.append("</g>")
    return out


def panel_chart_svg(
    panels: Sequence[tuple[str, Sequence[Series]]],
    x_label: str,
    y_label: str,
    y_range: tuple[float, float] = (0.0, 1.0),
    reference: float | None = None,
    columns: int = 3,
    categorical_x: bool = True,
) -> str:
    """Grid of line-chart panels, each a (title, [(series label, {x: y})]) pair."""
    if not panels:
        raise ValueError("no panels to draw")
    pw, ph = 360, 260
    cols = min(columns, len(panels))
    rows = -(-len(panels) // cols)
    width, height = cols * pw, rows * ph
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
    ]
    for k, (title, series) in enumerate(panels):
        r, c = divmod(k, cols)
        lines += _panel(
            title, series, c * pw, r * ph, pw, ph, x_label, y_label, y_range, reference, categorical_x
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def line_chart_svg(
    title: str,
    series: Sequence[Series],
    x_label: str,
    y_label: str,
    y_range: tuple[float, float] | None = None,
) -> str:
    """Single-panel chart with a continuous x axis."""
    if y_range is None:
        ys = [y for _, pts in series for y in pts.values() if y == y]
        lo, hi = min(ys), max(ys)
        span = (hi - lo) or 1.0
        y_range = (lo - 0.05 * span, hi + 0.05 * span)
    return panel_chart_svg([(title, series)], x_label, y_label, y_range, columns=1, categorical_x=False)
