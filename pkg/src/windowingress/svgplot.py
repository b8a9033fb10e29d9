"""Self-contained SVG line charts of a mission log."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .nav import parse_log_csv

PLOT_COLUMNS = ("y", "est_psi_deg", "opening_total_px", "opening_left_px", "opening_right_px")

_W, _H = 640, 300
_MARGIN = dict(left=64, right=130, top=34, bottom=46)
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


class PlotInputError(ValueError):
    pass


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * span:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _range(values: np.ndarray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -1.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo < 1e-9:
        pad = max(abs(lo) * 0.1, 1.0)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_chart(title: str, x: np.ndarray, series, x_label: str, y_label: str, y_offset: float = 0.0) -> str:
    """One chart as an SVG group. ``series`` is a list of ``(name, y values)``.

    Non-finite points break a line; isolated points are drawn as dots.
    """
    x = np.asarray(x, dtype=np.float64)
    left, top = _MARGIN["left"], _MARGIN["top"]
    pw = _W - _MARGIN["left"] - _MARGIN["right"]
    ph = _H - _MARGIN["top"] - _MARGIN["bottom"]
    x0, x1 = _range(x)
    y0, y1 = _range(np.concatenate([np.asarray(v, dtype=np.float64) for _, v in series]) if series else np.array([]))

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - v) / (y1 - y0) * ph

    parts = [f'<g transform="translate(0,{_fmt(y_offset)})">']
    parts.append(f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    parts.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>')
    for t in _ticks(x0, x1):
        X = px(t)
        parts.append(f'<line x1="{_fmt(X)}" y1="{top + ph}" x2="{_fmt(X)}" y2="{top + ph + 4}" stroke="#000"/>')
        parts.append(f'<text x="{_fmt(X)}" y="{top + ph + 16}" text-anchor="middle" font-size="10">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        parts.append(f'<line x1="{left - 4}" y1="{_fmt(Y)}" x2="{left}" y2="{_fmt(Y)}" stroke="#000"/>')
        parts.append(f'<line x1="{left}" y1="{_fmt(Y)}" x2="{left + pw}" y2="{_fmt(Y)}" stroke="#ddd"/>')
        parts.append(f'<text x="{left - 6}" y="{_fmt(Y + 3)}" text-anchor="end" font-size="10">{_fmt(t)}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{_H - 8}" text-anchor="middle" font-size="11">{escape(x_label)}</text>')
    parts.append(
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {top + ph / 2})">{escape(y_label)}</text>'
    )
    for i, (name, values) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        values = np.asarray(values, dtype=np.float64)
        ok = np.isfinite(values) & np.isfinite(x)
        runs, run = [], []
        for k in range(len(values)):
            if ok[k]:
                run.append((px(x[k]), py(values[k])))
            elif run:
                runs.append(run)
                run = []
        if run:
            runs.append(run)
        for r in runs:
            if len(r) == 1:
                parts.append(f'<circle cx="{_fmt(r[0][0])}" cy="{_fmt(r[0][1])}" r="2.5" fill="{color}"/>')
            else:
                pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in r)
                parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 12 + 16 * i
        parts.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 28}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 32}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    parts.append("</g>")
    return "\n".join(parts)


def _floats(cols: dict[str, list[str]], name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in cols[name]], dtype=np.float64)
    except ValueError as exc:
        raise PlotInputError(f"column {name}: {exc}") from None


def mission_svg(csv_text: str) -> str:
    """The angle and opening-width charts of a mission CSV in one SVG document.

    Raises :class:`PlotInputError` naming any missing column.
    """
    try:
        cols = parse_log_csv(csv_text)
    except ValueError as exc:
        raise PlotInputError(str(exc)) from None
    missing = [c for c in PLOT_COLUMNS if c not in cols]
    if missing:
        raise PlotInputError(f"missing columns: {', '.join(missing)}")
    y = _floats(cols, "y")
    psi = _floats(cols, "est_psi_deg")
    series = [("estimated", psi)]
    if "true_psi_deg" in cols:
        series.append(("ground truth", _floats(cols, "true_psi_deg")))
    x_label = "Y-position (increases in right and decreases in left motion)"
    angle = line_chart("Convergence of the estimated relative angle", y, series, x_label, "relative angle psi (deg)")
    widths = line_chart(
        "Opening width of the ingress target",
        y,
        [("total", _floats(cols, "opening_total_px")), ("left side", _floats(cols, "opening_left_px")),
         ("right side", _floats(cols, "opening_right_px"))],
        x_label,
        "width (px)",
        y_offset=_H,
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{2 * _H}" '
        f'viewBox="0 0 {_W} {2 * _H}" font-family="sans-serif">\n'
        f'<rect width="{_W}" height="{2 * _H}" fill="#fff"/>\n{angle}\n{widths}\n</svg>\n'
    )
