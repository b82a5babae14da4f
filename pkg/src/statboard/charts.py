"""Deterministic server-side SVG rendering for report blocks.

Output is plain SVG 1.1 text assembled with fixed-precision coordinates,
so identical inputs always yield byte-identical documents (reports are
diffed and golden-tested as text). Chart types:

  * bar charts for frequency tables and Likert profiles
  * line + limit-line charts for X-bar and R control charts
  * scatter for PCA scores and a bar chart for explained variance (scree)

Markers carry stable CSS classes ("bar", "pt", "limit") that tests and
the web client key on.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH = 480
HEIGHT = 260
MARGIN_LEFT = 52
MARGIN_RIGHT = 16
MARGIN_TOP = 28
MARGIN_BOTTOM = 40

PALETTE = {
    "bar": "#4878a8",
    "bar_violation": "#c0392b",
    "line": "#34495e",
    "limit": "#c0392b",
    "center": "#27ae60",
    "point": "#34495e",
    "violation": "#c0392b",
}


class ChartError(ValueError):
    """Unsupported block kind or unrenderable result."""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _header(title: str) -> list[str]:
    return [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" fill="#222222">{escape(title)}</text>',
    ]


def _axes(x0, y0, x1, y1) -> str:
    return (
        f'<path d="M {_fmt(x0)} {_fmt(y0)} L {_fmt(x0)} {_fmt(y1)} L {_fmt(x1)} {_fmt(y1)}" '
        'stroke="#555555" fill="none" stroke-width="1"/>'
    )


def _value_span(values):
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.08
    return lo - pad, hi + pad


def render_bar_chart(labels, values, title: str, *, value_format: str = "{:g}") -> str:
    """Vertical bar chart; one <rect class="bar"> per category."""
    if len(labels) != len(values):
        raise ChartError("labels and values must have equal length")
    parts = _header(title)
    x0, y1 = MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM
    x1, y0 = WIDTH - MARGIN_RIGHT, MARGIN_TOP
    parts.append(_axes(x0, y0, x1, y1))
    top = max([*values, 0]) or 1
    span_x = x1 - x0
    n = len(values)
    if n:
        slot = span_x / n
        bar_w = slot * 0.6
        for i, (label, value) in enumerate(zip(labels, values)):
            h = (value / top) * (y1 - y0)
            bx = x0 + slot * i + (slot - bar_w) / 2
            parts.append(
                f'<rect class="bar" x="{_fmt(bx)}" y="{_fmt(y1 - h)}" '
                f'width="{_fmt(bar_w)}" height="{_fmt(h)}" fill="{PALETTE["bar"]}"/>'
            )
            parts.append(
                f'<text x="{_fmt(bx + bar_w / 2)}" y="{_fmt(y1 + 14)}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10" fill="#333333">{escape(str(label))}</text>'
            )
            parts.append(
                f'<text x="{_fmt(bx + bar_w / 2)}" y="{_fmt(y1 - h - 4)}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10" fill="#333333">'
                f'{escape(value_format.format(value))}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_control_chart(points, lcl: float, cl: float, ucl: float, violations, title: str) -> str:
    """Run chart with center line and control limits.

    One <circle class="pt"> marker per subgroup point and exactly three
    horizontal reference lines (<line class="limit">): LCL, CL, UCL.
    Violating points are re-marked in the violation colour.
    """
    if not points:
        raise ChartError("control chart needs at least one point")
    parts = _header(title)
    x0, y1 = MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM
    x1, y0 = WIDTH - MARGIN_RIGHT, MARGIN_TOP
    lo, hi = _value_span([*points, lcl, ucl])
    span = hi - lo

    def sy(v):
        return y1 - (v - lo) / span * (y1 - y0)

    def sx(i):
        if len(points) == 1:
            return (x0 + x1) / 2
        return x0 + i / (len(points) - 1) * (x1 - x0)

    parts.append(_axes(x0, y0, x1, y1))
    for value, color, name in ((lcl, PALETTE["limit"], "LCL"), (cl, PALETTE["center"], "CL"),
                               (ucl, PALETTE["limit"], "UCL")):
        y = sy(value)
        parts.append(
            f'<line class="limit" x1="{_fmt(x0)}" y1="{_fmt(y)}" x2="{_fmt(x1)}" y2="{_fmt(y)}" '
            f'stroke="{color}" stroke-width="1" stroke-dasharray="5,3"/>'
        )
        parts.append(
            f'<text x="{_fmt(x0 - 4)}" y="{_fmt(y + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="9" fill="{color}">{name} {value:.4g}</text>'
        )
    path = " ".join(
        f'{"M" if i == 0 else "L"} {_fmt(sx(i))} {_fmt(sy(v))}' for i, v in enumerate(points)
    )
    parts.append(f'<path d="{path}" stroke="{PALETTE["line"]}" fill="none" stroke-width="1"/>')
    bad = set(violations)
    for i, v in enumerate(points):
        color = PALETTE["violation"] if i in bad else PALETTE["point"]
        parts.append(
            f'<circle class="pt" cx="{_fmt(sx(i))}" cy="{_fmt(sy(v))}" r="2.5" fill="{color}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_scatter(xs, ys, title: str, *, x_label: str = "", y_label: str = "") -> str:
    """Scatter plot; one <circle class="pt"> per observation."""
    if len(xs) != len(ys):
        raise ChartError("xs and ys must have equal length")
    if not xs:
        raise ChartError("scatter needs at least one point")
    parts = _header(title)
    x0, y1 = MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM
    x1, y0 = WIDTH - MARGIN_RIGHT, MARGIN_TOP
    lo_x, hi_x = _value_span(xs)
    lo_y, hi_y = _value_span(ys)
    parts.append(_axes(x0, y0, x1, y1))
    for x, y in zip(xs, ys):
        px = x0 + (x - lo_x) / (hi_x - lo_x) * (x1 - x0)
        py = y1 - (y - lo_y) / (hi_y - lo_y) * (y1 - y0)
        parts.append(
            f'<circle class="pt" cx="{_fmt(px)}" cy="{_fmt(py)}" r="2.5" fill="{PALETTE["point"]}"/>'
        )
    if x_label:
        parts.append(
            f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10" fill="#333333">{escape(x_label)}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="14" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10" fill="#333333" '
            f'transform="rotate(-90 14 {(y0 + y1) / 2:.0f})">{escape(y_label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_scree(explained, title: str) -> str:
    """Explained-variance bar chart, one bar per component."""
    labels = [f"PC{i + 1}" for i in range(len(explained))]
    return render_bar_chart(labels, [round(v, 6) for v in explained], title,
                            value_format="{:.1%}")


def render_chart_svg(kind: str, result) -> dict[str, str]:
    """Render the charts for one computed block; maps chart name -> SVG text.

    frequency/likert -> one bar chart; xbar_r -> one chart per series
    (xbar, r); pca -> scores scatter plus scree. summary and crosstab are
    table-only kinds and raise ChartError.
    """
    if kind in ("frequency", "likert"):
        table = result["table"] if isinstance(result, dict) else result
        d = table.as_dict() if hasattr(table, "as_dict") else table
        return {"bars": render_bar_chart(d["categories"], d["counts"], "Frequencies")}
    if kind == "xbar_r":
        d = result.as_dict() if hasattr(result, "as_dict") else result
        return {
            "xbar": render_control_chart(
                d["xbar_points"], d["xbar_limits"]["lcl"], d["xbar_limits"]["cl"],
                d["xbar_limits"]["ucl"], d["xbar_violations"], "X-bar chart"),
            "r": render_control_chart(
                d["r_points"], d["r_limits"]["lcl"], d["r_limits"]["cl"],
                d["r_limits"]["ucl"], d["r_violations"], "R chart"),
        }
    if kind == "pca":
        d = result.as_dict() if hasattr(result, "as_dict") else result
        scores = d["scores"]
        xs = [row[0] for row in scores]
        ys = [row[1] if len(row) > 1 else 0.0 for row in scores]
        return {
            "scores": render_scatter(xs, ys, "Component scores", x_label="PC1", y_label="PC2"),
            "scree": render_scree(d["explained"], "Explained variance"),
        }
    raise ChartError(f"no chart renderer for block kind {kind!r}")
