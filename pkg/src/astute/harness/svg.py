"""Minimal polyline SVG charts; plain text output, no plotting dependency."""
from __future__ import annotations

from pathlib import Path

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 640, 440
_MARGIN = 60


def _fmt(v: float) -> str:
    return format(v, ".6g")


def polyline_chart(path, series, title: str, xlabel: str, ylabel: str) -> Path:
    """Write one chart; ``series`` is a list of (label, xs, ys) tuples.

    Axes span the data range (x and y both padded to include 0..1, the
    natural range for normalised-lambda astuteness curves).
    """
    xs_all = [float(x) for _, xs, _ in series for x in xs]
    ys_all = [float(y) for _, _, ys in series for y in ys]
    x_lo, x_hi = min(0.0, *xs_all), max(1.0, *xs_all)
    y_lo, y_hi = min(0.0, *ys_all), max(1.0, *ys_all)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return _MARGIN + (float(x) - x_lo) / x_span * (_W - 2 * _MARGIN)

    def sy(y):
        return _H - _MARGIN - (float(y) - y_lo) / y_span * (_H - 2 * _MARGIN)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{_H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_H - _MARGIN}" '
        f'stroke="black"/>',
    ]
    for i, tick in enumerate((0.0, 0.25, 0.5, 0.75, 1.0)):
        tx = sx(x_lo + tick * x_span)
        ty = sy(y_lo + tick * y_span)
        lines.append(
            f'<text x="{_fmt(tx)}" y="{_H - _MARGIN + 16}" text-anchor="middle" '
            f'font-size="10">{_fmt(x_lo + tick * x_span)}</text>'
        )
        lines.append(
            f'<text x="{_MARGIN - 8}" y="{_fmt(ty + 3)}" text-anchor="end" '
            f'font-size="10">{_fmt(y_lo + tick * y_span)}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        lines.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}"/>'
        )
        ly = _MARGIN + 16 * idx
        lines.append(
            f'<rect x="{_W - _MARGIN - 130}" y="{ly - 9}" width="12" height="12" '
            f'fill="{color}"/>'
        )
        lines.append(
            f'<text x="{_W - _MARGIN - 112}" y="{ly + 2}" font-size="12">{label}</text>'
        )
    lines.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
