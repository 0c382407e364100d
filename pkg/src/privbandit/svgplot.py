"""Minimal self-contained SVG line charts (no plotting dependencies)."""

from __future__ import annotations

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 160, 50, 60

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def line_chart(series: dict, xlabel: str = "", ylabel: str = "", title: str = "") -> str:
    """Render {label: [(x, y), ...]} as an SVG document string.

    One polyline per series, linear axes over the data range, legend on the
    right.  The output embeds no external assets.
    """
    pts = [p for s in series.values() for p in s]
    if not pts:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * plot_w

    def sy(y):
        return MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="18" '
        f'font-family="sans-serif">{title}</text>',
    ]
    # axes
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T + plot_h}" x2="{MARGIN_L + plot_w}" '
               f'y2="{MARGIN_T + plot_h}" stroke="black"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
               f'y2="{MARGIN_T + plot_h}" stroke="black"/>')
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = y0 + i * (y1 - y0) / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{MARGIN_T + plot_h + 22}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif">{xv:.3g}</text>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{sy(yv) + 4:.1f}" text-anchor="end" '
                   f'font-size="12" font-family="sans-serif">{yv:.3g}</text>')
        out.append(f'<line x1="{MARGIN_L}" y1="{sy(yv):.1f}" x2="{MARGIN_L + plot_w}" '
                   f'y2="{sy(yv):.1f}" stroke="#dddddd"/>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
               f'font-size="14" font-family="sans-serif">{xlabel}</text>')
    out.append(f'<text x="22" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
               f'font-size="14" font-family="sans-serif" '
               f'transform="rotate(-90 22 {MARGIN_T + plot_h / 2:.1f})">{ylabel}</text>')
    for idx, (label, points) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(points))
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in points:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = MARGIN_T + 20 + 22 * idx
        lx = MARGIN_L + plot_w + 16
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly}" font-size="13" '
                   f'font-family="sans-serif">{label}</text>')
    out.append("</svg>")
    return "\n".join(out)
