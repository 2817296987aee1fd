"""Self-contained SVG output: sweep line plots and beam-pattern heatmaps.

No plotting dependency; files are plain hand-built SVG with one root
element so they embed anywhere. Colors cycle through a fixed palette so
repeated runs are byte-identical.
"""
from __future__ import annotations

import math

import numpy as np

from .channel import los_channel, placement_from_xy
from .experiments import mean_series

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

AXIS_LABELS = {"p_dbm": "transmit power (dBm)",
               "epsilon": "information power fraction"}


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mag * mult >= raw:
            step = mag * mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


def _fmt_tick(x: float) -> str:
    return "%g" % round(x, 10)


def emit_plot(rows: list, path: str, title: str = "",
              series: list | None = None) -> str:
    """Line plot of per-series mean min secrecy rate (bits) vs sweep value.

    rows come from run_sweep / read_csv_rows; series optionally restricts
    to named (scheme, mode) pairs formatted as "scheme/mode".
    """
    data = mean_series(rows)
    if not data:
        raise ValueError("no finite result rows to plot")
    keys = sorted(data)
    if series is not None:
        want = []
        names = {f"{s}/{m}": (s, m) for s, m in keys}
        for name in series:
            if name not in names:
                raise ValueError(
                    f"series {name!r} not in results; available: "
                    + ", ".join(sorted(names)))
            want.append(names[name])
        keys = want
    sweep_var = rows[0].sweep_var

    width, height = 640, 420
    ml, mr, mt, mb = 62, 160, 40, 48
    pw, ph = width - ml - mr, height - mt - mb

    xs = [x for k in keys for x, _ in data[k]]
    ys = [y for k in keys for _, y in data[k]]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys + [0.0]), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_pad = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="22" text-anchor="middle"'
                   f' font-size="14">{_esc(title)}</text>')

    for t in _ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line x1="{px:.1f}" y1="{mt}" x2="{px:.1f}" '
                   f'y2="{mt + ph}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{px:.1f}" y="{mt + ph + 16}" '
                   f'text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        py = sy(t)
        out.append(f'<line x1="{ml}" y1="{py:.1f}" x2="{ml + pw}" '
                   f'y2="{py:.1f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{ml - 6}" y="{py + 4:.1f}" '
                   f'text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="#404040"/>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" '
               f'text-anchor="middle">'
               f'{_esc(AXIS_LABELS.get(sweep_var, sweep_var))}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">'
               f'min secrecy rate (bits/s/Hz)</text>')

    for i, key in enumerate(keys):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data[key])
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        for x, y in data[key]:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                       f'fill="{color}"/>')
        ly = mt + 14 + 18 * i
        lx = ml + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}">'
                   f'{_esc(key[0] + "/" + key[1])}</text>')

    out.append("</svg>")
    _write(path, "\n".join(out) + "\n")
    return path


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc}") from exc


def _viridis(u: float) -> str:
    # coarse 6-anchor approximation, linearly interpolated
    anchors = ((68, 1, 84), (59, 82, 139), (33, 145, 140),
               (94, 201, 98), (170, 220, 50), (253, 231, 37))
    u = min(max(u, 0.0), 1.0) * (len(anchors) - 1)
    i = min(int(u), len(anchors) - 2)
    f = u - i
    rgb = [round(a + (b - a) * f)
           for a, b in zip(anchors[i], anchors[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def beam_pattern_grid(scenario, state, grid=(60, 60)):
    """Received signal and AN powers (watts) over a grid of candidate
    positions in the cell, using the same line-of-sight response the
    channels were built from.

    Returns (x_axis, y_axis, signal, an) with signal/an shaped (ny, nx).
    """
    nx, ny = int(grid[0]), int(grid[1])
    cx, cy = scenario.cell
    x_axis = np.linspace(0.0, cx, nx)
    y_axis = np.linspace(0.0, cy, ny)
    eps_s = state.eps_s
    eps_a = state.eps_a
    sig = np.zeros((ny, nx))
    an = np.zeros((ny, nx))
    for iy, y in enumerate(y_axis):
        for ix, x in enumerate(x_axis):
            if (abs(x - scenario.bs_xy[0]) < 1e-9
                    and abs(y - scenario.bs_xy[1]) < 1e-9):
                sig[iy, ix] = np.nan
                an[iy, ix] = np.nan
                continue
            pl = placement_from_xy(scenario.bs_xy, (x, y))
            h = los_channel(scenario.geom, pl)
            sig[iy, ix] = eps_s * float(np.sum(np.abs(h @ state.w) ** 2))
            an[iy, ix] = eps_a * float(np.real(
                np.vdot(h @ state.v, h @ state.v)))
    return x_axis, y_axis, sig, an


def _raster_csv(path: str, x_axis, y_axis, field):
    lines = ["x\\y," + ",".join("%.9g" % y for y in y_axis)]
    for ix, x in enumerate(x_axis):
        lines.append("%.9g," % x
                     + ",".join("%.9g" % field[iy, ix]
                                for iy in range(len(y_axis))))
    _write(path, "\n".join(lines) + "\n")


def emit_beam_pattern(scenario, state, out_prefix: str, grid=(60, 60),
                      fmt: str = "both") -> list:
    """Spatial power maps for a solved state.

    Writes <prefix>_signal.csv / <prefix>_an.csv rasters (watts) and/or
    <prefix>.svg heatmaps in dB with BS and user markers; returns the
    file list.
    """
    x_axis, y_axis, sig, an = beam_pattern_grid(scenario, state, grid)
    written = []
    if fmt in ("csv", "both"):
        for name, field in (("signal", sig), ("an", an)):
            p = f"{out_prefix}_{name}.csv"
            _raster_csv(p, x_axis, y_axis, field)
            written.append(p)
    if fmt in ("svg", "both"):
        p = f"{out_prefix}.svg"
        _heatmap_svg(p, scenario, x_axis, y_axis, sig, an)
        written.append(p)
    return written


def _heatmap_svg(path: str, scenario, x_axis, y_axis, sig, an):
    panels = (("signal power (dB)", sig), ("AN power (dB)", an))
    pw, ph = 260, 260
    ml, mt, gap = 50, 46, 60
    width = ml + 2 * pw + gap + 40
    height = mt + ph + 50
    cx, cy = scenario.cell
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for ip, (label, field) in enumerate(panels):
        x0 = ml + ip * (pw + gap)
        db = 10.0 * np.log10(np.maximum(field, 1e-30))
        finite = db[np.isfinite(db)]
        if finite.size == 0:
            lo, hi = -1.0, 0.0
        else:
            hi = float(np.max(finite))
            lo = max(float(np.min(finite)), hi - 60.0)
        if hi <= lo:
            lo = hi - 1.0   # constant field (e.g. AN panel at eps = 1)
        nx, ny = len(x_axis), len(y_axis)
        cw, chh = pw / nx, ph / ny
        for iy in range(ny):
            for ix in range(nx):
                v = db[iy, ix]
                u = 0.0 if not np.isfinite(v) else (v - lo) / (hi - lo)
                px = x0 + ix * cw
                # y axis points up: row 0 is the cell's south edge
                py = mt + ph - (iy + 1) * chh
                out.append(f'<rect x="{px:.2f}" y="{py:.2f}" '
                           f'width="{cw + 0.5:.2f}" height="{chh + 0.5:.2f}"'
                           f' fill="{_viridis(u)}"/>')

        def mx(wx):
            return x0 + wx / cx * pw

        def my(wy):
            return mt + ph - wy / cy * ph

        bx, by = scenario.bs_xy
        out.append(f'<rect x="{mx(bx) - 4:.1f}" y="{my(by) - 4:.1f}" '
                   f'width="8" height="8" fill="white" stroke="black"/>')
        for ux, uy in np.atleast_2d(scenario.lue_xy):
            out.append(f'<circle cx="{mx(ux):.1f}" cy="{my(uy):.1f}" r="4" '
                       f'fill="none" stroke="white" stroke-width="1.6"/>')
        for ux, uy in np.atleast_2d(scenario.eue_xy):
            px, py = mx(ux), my(uy)
            out.append(f'<path d="M {px - 4:.1f} {py - 4:.1f} L {px + 4:.1f}'
                       f' {py + 4:.1f} M {px - 4:.1f} {py + 4:.1f} '
                       f'L {px + 4:.1f} {py - 4:.1f}" stroke="red" '
                       f'stroke-width="1.6"/>')
        out.append(f'<rect x="{x0}" y="{mt}" width="{pw}" height="{ph}" '
                   f'fill="none" stroke="#404040"/>')
        out.append(f'<text x="{x0 + pw / 2:.1f}" y="{mt - 10}" '
                   f'text-anchor="middle">{label} '
                   f'[{lo:.0f}, {hi:.0f}]</text>')
        out.append(f'<text x="{x0 + pw / 2:.1f}" y="{mt + ph + 18}" '
                   f'text-anchor="middle">x (m)</text>')
        out.append(f'<text x="{x0 - 28}" y="{mt + ph / 2:.1f}" '
                   f'text-anchor="middle" transform="rotate(-90 '
                   f'{x0 - 28} {mt + ph / 2:.1f})">y (m)</text>')
    out.append("</svg>")
    _write(path, "\n".join(out) + "\n")
    return path
