"""Deterministic SVG 1.1 rendering: square markers for point sets, one
polyline per CSV series.  Output bytes are a pure function of the input."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .geometry import PointSet

_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _dec(x) -> str:
    """Fixed decimal rendering: six places, exact rounding, no trailing zeros."""
    q = round(Fraction(x) * 10 ** 6)  # ties to even, deterministic
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole, frac = divmod(q, 10 ** 6)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{str(frac).zfill(6).rstrip('0')}"


def points_svg(ps: PointSet, marker: Fraction | None = None) -> str:
    """Scatter of a point set as filled squares, y axis pointing up."""
    if len(ps) == 0:
        return (_HEADER
                + '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                  'viewBox="0 0 1 1"/>\n')
    if marker is None:
        marker = Fraction(2, 5 * ps.denom)
    half = marker / 2
    pts = [ps.to_fraction(p) for p in ps.numerators()]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    pad = max(marker, Fraction(1, ps.denom))
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    view = f"{_dec(x0)} {_dec(-y1)} {_dec(x1 - x0)} {_dec(y1 - y0)}"
    out = [_HEADER,
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{view}">\n']
    for x, y in pts:
        out.append(f'<rect x="{_dec(x - half)}" y="{_dec(-y - half)}" '
                   f'width="{_dec(marker)}" height="{_dec(marker)}"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def series_svg(series: Sequence[tuple[str, Sequence[tuple[float, float]]]],
               width: int = 640, height: int = 480) -> str:
    """One polyline per named series, mapped into a fixed pixel viewport."""
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f", "#bcbd22")
    all_pts = [p for _, pts in series for p in pts]
    if not all_pts:
        return (_HEADER
                + f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                  f'viewBox="0 0 {width} {height}"/>\n')
    xs = [p[0] for p in all_pts]
    ys = [p[1] for p in all_pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (x1 - x0) or 1.0
    sy = (y1 - y0) or 1.0
    margin = 20.0

    def to_px(p):
        px = margin + (p[0] - x0) / sx * (width - 2 * margin)
        py = height - margin - (p[1] - y0) / sy * (height - 2 * margin)
        return f"{px:.6f},{py:.6f}"

    out = [_HEADER,
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'viewBox="0 0 {width} {height}">\n']
    for i, (name, pts) in enumerate(series):
        color = palette[i % len(palette)]
        coords = " ".join(to_px(p) for p in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{coords}"><title>{name}</title></polyline>\n')
    out.append("</svg>\n")
    return "".join(out)
