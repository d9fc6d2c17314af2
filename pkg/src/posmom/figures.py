"""
Minimal SVG line plots of posmom densities.

Each curve is a ``<polyline>`` whose ``data-x``/``data-y`` attributes carry
the plotted values in data coordinates, so a figure can be checked by
parsing it back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .quadrature import QuadratureConfig
from .scan import DensityTable, scan_density

__all__ = ["Curve", "FigureSpec", "FIGURES", "figure_tables", "figure_curves", "render_svg"]

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=140, top=36, bottom=48)

DASH = {"solid": None, "dotted": "2,3", "dashed": "8,5"}
PALETTE = ("#1f3b73", "#b5472b", "#2e7d32", "#6a1b9a")


@dataclass(frozen=True)
class FigureSpec:
    number: int
    m_values: tuple
    sectors: bool  # draw sector curves as well as totals
    positive_only: bool = False
    title: str = ""


FIGURES = {
    1: FigureSpec(1, (0, 2), True, title="m = 0, 2"),
    2: FigureSpec(2, (4,), True, title="m = 4"),
    3: FigureSpec(3, (6,), True, title="m = 6"),
    4: FigureSpec(4, (1, 3, 5), False, title="m = 1, 3, 5"),
    5: FigureSpec(5, (40,), True, positive_only=True, title="m = 40"),
    6: FigureSpec(6, (41,), True, positive_only=True, title="m = 41"),
}


@dataclass
class Curve:
    label: str
    m: int
    series: str
    style: str
    x: np.ndarray
    y: np.ndarray
    color: str = PALETTE[0]
    extra: dict = field(default_factory=dict)


def figure_tables(number: int, step: float = 0.01,
                  cfg: QuadratureConfig = QuadratureConfig()) -> dict[int, DensityTable]:
    """Full-line density tables for every m shown in a figure, on a shared range."""
    spec = FIGURES[number]
    half = max(0.5 * abs(m) + 6.0 for m in spec.m_values)
    return {m: scan_density(m, -half, half, step, cfg) for m in spec.m_values}


def figure_curves(number: int, tables: dict[int, DensityTable]) -> list[Curve]:
    """Totals are solid; |alpha|^2 / |mu|^2 dotted and |beta|^2 / |nu|^2 dashed."""
    spec = FIGURES[number]
    curves = []
    for k, m in enumerate(spec.m_values):
        t = tables[m].restrict(lo=0.0) if spec.positive_only else tables[m]
        color = PALETTE[k % len(PALETTE)]
        curves.append(Curve(f"p (m={m})", m, "p", "solid", t.lambdas, t.p, color))
        if not spec.sectors or m == 0:
            continue
        if m % 2 == 0:
            pairs = (("alpha2", "|alpha|^2", "dotted", t.alpha2), ("beta2", "|beta|^2", "dashed", t.beta2))
        else:
            pairs = (("mu2", "|mu|^2", "dotted", t.mu2), ("nu2", "|nu|^2", "dashed", t.nu2))
        for series, name, style, y in pairs:
            curves.append(Curve(f"{name} (m={m})", m, series, style, t.lambdas, y, color))
    return curves


def _nice_ticks(lo: float, hi: float, target: int = 6) -> np.ndarray:
    span = hi - lo
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    return np.arange(first, hi + 1e-9 * span, step)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_svg(curves: list[Curve], title: str = "", xlabel: str = "lambda",
               ylabel: str = "density") -> str:
    """Render curves into a self-contained SVG 1.1 document."""
    xmin = min(float(c.x.min()) for c in curves)
    xmax = max(float(c.x.max()) for c in curves)
    ymax = max(float(c.y.max()) for c in curves)
    ymin = 0.0
    ymax = ymax * 1.05 if ymax > 0 else 1.0

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (np.asarray(x) - xmin) / (xmax - xmin) * pw

    def sy(y):
        return MARGIN["top"] + (1.0 - (np.asarray(y) - ymin) / (ymax - ymin)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-xmin="{_fmt(xmin)}" data-xmax="{_fmt(xmax)}" '
        f'data-ymin="{_fmt(ymin)}" data-ymax="{_fmt(ymax)}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    # axes and ticks
    x0, x1 = MARGIN["left"], MARGIN["left"] + pw
    y0, y1 = MARGIN["top"] + ph, MARGIN["top"]
    out.append(f'<g class="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="11">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>')
    for t in _nice_ticks(xmin, xmax):
        px = float(sx(t))
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 4}"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 17}" text-anchor="middle" stroke="none">{_fmt(t)}</text>')
    for t in _nice_ticks(ymin, ymax):
        py = float(sy(t))
        out.append(f'<line x1="{x0 - 4}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}"/>')
        out.append(f'<text x="{x0 - 7}" y="{py + 4:.2f}" text-anchor="end" stroke="none">{_fmt(t)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 10}" text-anchor="middle" stroke="none">'
               f"{escape(xlabel)}</text>")
    out.append(f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" stroke="none" '
               f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="22" text-anchor="middle" stroke="none" '
               f'font-size="14">{escape(title)}</text>')
    out.append("</g>")

    for k, c in enumerate(curves):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(c.x), sy(c.y)))
        dash = DASH[c.style]
        attrs = [
            f'class="curve {c.style}"',
            f"data-label={quoteattr(c.label)}",
            f'data-m="{c.m}"',
            f'data-series="{c.series}"',
            f'data-style="{c.style}"',
            f'data-x="{" ".join(_fmt(v) for v in c.x)}"',
            f'data-y="{" ".join(_fmt(v) for v in c.y)}"',
            f'fill="none" stroke="{c.color}" stroke-width="{1.6 if c.style == "solid" else 1.2}"',
        ]
        if dash:
            attrs.append(f'stroke-dasharray="{dash}"')
        out.append(f'<polyline {" ".join(attrs)} points="{pts}"/>')

        ly = MARGIN["top"] + 14 + 16 * k
        lx = WIDTH - MARGIN["right"] + 10
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{c.color}" '
                   f'stroke-width="1.4"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-family="sans-serif" font-size="10">'
                   f"{escape(c.label)}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
