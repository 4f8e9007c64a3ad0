"""Deterministic SVG charts for metrics CSVs. No rendering dependency:
the files are assembled as text, so identical inputs give identical bytes.

Three kinds:
  value_curve     loss against iteration, one polyline per CSV
  variance_curve  log10 squared filtered gradient (component 0) per CSV
  trajectory2d    (param_0, param_1) paths over contours of the benchmark
                  surface, with the start point marked
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError
from .harness import read_metrics_csv
from .problems import START_POINT, eval_f

__all__ = ["emit_svg_plot", "PLOT_KINDS"]

PLOT_KINDS = ("value_curve", "variance_curve", "trajectory2d")

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 64, 150, 24, 48  # margins; right holds the legend
_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)
_MAX_POINTS = 2000  # polylines are strided down to this many vertices

_CONTOUR_LEVELS = (-3.0, -1.5, 0.0, 2.0, 5.0, 10.0, 15.0, 22.0, 30.0, 40.0)
_CONTOUR_BOUNDS = ((-6.0, 6.0), (-6.0, 6.0))
_CONTOUR_RES = 121


def _fmt(v) -> str:
    return format(float(v), ".2f")


def _series_name(path) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _stride(n: int) -> int:
    return max(1, -(-n // _MAX_POINTS))


class _Frame:
    """Linear data-to-pixel mapping over the plot rectangle."""

    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def px(self, x):
        return _ML + (x - self.xlo) / (self.xhi - self.xlo) * (_W - _ML - _MR)

    def py(self, y):
        return (_H - _MB) - (y - self.ylo) / (self.yhi - self.ylo) * (
            _H - _MT - _MB
        )


def _ticks(lo, hi, count=5):
    return np.linspace(lo, hi, count)


def _axes_svg(frame: _Frame, xlabel: str, ylabel: str):
    left, right = _ML, _W - _MR
    top, bottom = _MT, _H - _MB
    parts = [
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="#ffffff"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" '
        f'stroke="#000000"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" '
        f'stroke="#000000"/>',
    ]
    for x in _ticks(frame.xlo, frame.xhi):
        px = frame.px(x)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{bottom}" x2="{_fmt(px)}" '
            f'y2="{bottom + 5}" stroke="#000000"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{bottom + 18}" font-size="11" '
            f'font-family="sans-serif" text-anchor="middle">'
            f"{format(x, '.3g')}</text>"
        )
    for y in _ticks(frame.ylo, frame.yhi):
        py = frame.py(y)
        parts.append(
            f'<line x1="{left - 5}" y1="{_fmt(py)}" x2="{left}" '
            f'y2="{_fmt(py)}" stroke="#000000"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(py + 4)}" font-size="11" '
            f'font-family="sans-serif" text-anchor="end">'
            f"{format(y, '.3g')}</text>"
        )
    parts.append(
        f'<text x="{(left + right) // 2}" y="{_H - 10}" font-size="13" '
        f'font-family="sans-serif" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(top + bottom) // 2}" font-size="13" '
        f'font-family="sans-serif" text-anchor="middle" '
        f'transform="rotate(-90 16 {(top + bottom) // 2})">{ylabel}</text>'
    )
    return parts


def _legend_svg(names):
    parts = []
    x = _W - _MR + 12
    for i, name in enumerate(names):
        color = _PALETTE[i % len(_PALETTE)]
        y = _MT + 16 + 18 * i
        parts.append(
            f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x + 24}" y="{y + 4}" font-size="11" '
            f'font-family="sans-serif">{name}</text>'
        )
    return parts


def _polyline(xs, ys, frame, color):
    pts = " ".join(
        f"{_fmt(frame.px(x))},{_fmt(frame.py(y))}" for x, y in zip(xs, ys)
    )
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
        f'points="{pts}"/>'
    )


def _wrap(parts):
    body = "\n".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}">\n{body}\n</svg>\n'
    )


def _load_all(csv_paths):
    if not csv_paths:
        raise ConfigError("no metrics files given")
    loaded = []
    schema = None
    for p in csv_paths:
        names, data = read_metrics_csv(p)
        if schema is None:
            schema = names
        elif names != schema:
            raise ConfigError(
                f"schema mismatch: {p} has columns {names}, expected {schema}"
            )
        if data.shape[0] == 0:
            raise ConfigError(f"{p}: no rows to plot")
        loaded.append((_series_name(p), names, data))
    return loaded


def _column(names, data, wanted, path_hint):
    if wanted not in names:
        raise ConfigError(f"{path_hint}: missing column {wanted!r}")
    return data[:, names.index(wanted)]


def _curve_svg(loaded, ycol, ylabel, transform=None):
    series = []
    for name, names, data in loaded:
        t = _column(names, data, "t", name)
        y = _column(names, data, ycol, name)
        if transform is not None:
            y = transform(y)
        step = _stride(t.size)
        series.append((name, t[::step], y[::step]))
    xlo = min(s[1].min() for s in series)
    xhi = max(s[1].max() for s in series)
    ylo = min(s[2].min() for s in series)
    yhi = max(s[2].max() for s in series)
    frame = _Frame(xlo, xhi, ylo, yhi)
    parts = _axes_svg(frame, "iteration", ylabel)
    for i, (name, xs, ys) in enumerate(series):
        parts.append(_polyline(xs, ys, frame, _PALETTE[i % len(_PALETTE)]))
    parts += _legend_svg([s[0] for s in series])
    return _wrap(parts)


def _marching_squares(grid_x, grid_y, values, level):
    """Line segments of one iso-level on a regular grid.

    Classic 16-case cell walk with linear interpolation along edges;
    the ambiguous saddle cases fall back to the two-segment split, which
    only affects cosmetics.
    """
    segs = []
    nx, ny = values.shape

    def interp(pa, pb, va, vb):
        t = 0.5 if vb == va else (level - va) / (vb - va)
        return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))

    for i in range(nx - 1):
        for j in range(ny - 1):
            v00 = values[i, j]
            v10 = values[i + 1, j]
            v01 = values[i, j + 1]
            v11 = values[i + 1, j + 1]
            idx = ((1 if v00 > level else 0)
                   | (2 if v10 > level else 0)
                   | (4 if v11 > level else 0)
                   | (8 if v01 > level else 0))
            if idx in (0, 15):
                continue
            p00 = (grid_x[i], grid_y[j])
            p10 = (grid_x[i + 1], grid_y[j])
            p01 = (grid_x[i], grid_y[j + 1])
            p11 = (grid_x[i + 1], grid_y[j + 1])
            bottom = interp(p00, p10, v00, v10)
            right = interp(p10, p11, v10, v11)
            top = interp(p01, p11, v01, v11)
            left = interp(p00, p01, v00, v01)
            edges = {
                1: [(left, bottom)], 2: [(bottom, right)],
                3: [(left, right)], 4: [(right, top)],
                5: [(left, top), (bottom, right)],
                6: [(bottom, top)], 7: [(left, top)],
                8: [(top, left)], 9: [(bottom, top)],
                10: [(bottom, left), (top, right)],
                11: [(top, right)], 12: [(right, left)],
                13: [(bottom, right)], 14: [(left, bottom)],
            }
            segs.extend(edges[idx])
    return segs


def _trajectory_svg(loaded):
    (xlo, xhi), (ylo, yhi) = _CONTOUR_BOUNDS
    frame = _Frame(xlo, xhi, ylo, yhi)
    parts = _axes_svg(frame, "x", "y")
    gx = np.linspace(xlo, xhi, _CONTOUR_RES)
    gy = np.linspace(ylo, yhi, _CONTOUR_RES)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    zz = eval_f(np.stack([xx, yy]))
    for level in _CONTOUR_LEVELS:
        for (xa, ya), (xb, yb) in _marching_squares(gx, gy, zz, level):
            parts.append(
                f'<line x1="{_fmt(frame.px(xa))}" y1="{_fmt(frame.py(ya))}" '
                f'x2="{_fmt(frame.px(xb))}" y2="{_fmt(frame.py(yb))}" '
                f'stroke="#cccccc" stroke-width="0.6"/>'
            )
    names = []
    for i, (name, cols, data) in enumerate(loaded):
        xs = _column(cols, data, "param_0", name)
        ys = _column(cols, data, "param_1", name)
        step = _stride(xs.size)
        parts.append(
            _polyline(xs[::step], ys[::step], frame,
                      _PALETTE[i % len(_PALETTE)])
        )
        names.append(name)
    sx, sy = START_POINT
    parts.append(
        f'<circle cx="{_fmt(frame.px(sx))}" cy="{_fmt(frame.py(sy))}" '
        f'r="4" fill="#000000"/>'
    )
    parts.append(
        f'<text x="{_fmt(frame.px(sx) + 7)}" y="{_fmt(frame.py(sy) - 6)}" '
        f'font-size="11" font-family="sans-serif">start (5, 5)</text>'
    )
    parts += _legend_svg(names)
    return _wrap(parts)


def emit_svg_plot(csv_paths, kind: str, path) -> None:
    """Render one chart from metrics CSVs sharing a schema.

    Long series are strided down to a bounded vertex count, which keeps
    files small without changing which run they depict.
    """
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}, expected {PLOT_KINDS}")
    loaded = _load_all(csv_paths)
    if kind == "value_curve":
        svg = _curve_svg(loaded, "loss", "loss")
    elif kind == "variance_curve":
        svg = _curve_svg(
            loaded,
            "filtered_grad_sq_0",
            "log10 squared filtered gradient [0]",
            transform=lambda y: np.log10(np.maximum(y, 1e-20)),
        )
    else:
        svg = _trajectory_svg(loaded)
    with open(path, "w", newline="\n") as fh:
        fh.write(svg)
