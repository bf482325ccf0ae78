"""Deterministic SVG plots of joint spectra and sweep maps.

Every coordinate is written with a fixed number of decimals, so the same
input always yields the same bytes.
"""
from __future__ import annotations

from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from spdcsim.biphoton import BiphotonGrid
from spdcsim.contour import marching_squares

MARGIN_LEFT = 70.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 30.0
MARGIN_BOTTOM = 55.0
PLOT_SIZE = 360.0
FONT = 'font-family="sans-serif" font-size="12"'

# five-stop perceptual ramp, dark to light
_RAMP = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _check_finite(values: np.ndarray, what: str) -> None:
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        raise ValueError(f"{what} has non-finite cells at indices {bad.tolist()}")


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions inside [lo, hi]."""
    if hi < lo:
        lo, hi = hi, lo
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = np.ceil(lo / step) * step
    ticks = np.arange(first, hi + 0.5 * step, step)
    return [float(np.round(t / step) * step) for t in ticks if lo - 1e-9 * span <= t <= hi + 1e-9 * span]


def _tick_label(v: float) -> str:
    v = v + 0.0
    if abs(v) < 1e-12:
        return "0"
    return f"{v:.0f}" if abs(v - round(v)) < 1e-9 else f"{v:g}"


def ramp_color(t: float) -> str:
    """Hex colour for ``t`` in [0, 1] on the built-in ramp."""
    t = min(1.0, max(0.0, float(t)))
    pos = t * (len(_RAMP) - 1)
    k = min(int(pos), len(_RAMP) - 2)
    u = pos - k
    rgb = [round(a + (b - a) * u) for a, b in zip(_RAMP[k], _RAMP[k + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


class _Panel:
    """Maps data coordinates onto a square plotting area."""

    def __init__(self, x0: float, y0: float, xlim, ylim):
        self.x0, self.y0 = x0, y0
        self.xlim, self.ylim = xlim, ylim

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (np.asarray(x) - lo) / (hi - lo) * PLOT_SIZE

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + PLOT_SIZE - (np.asarray(y) - lo) / (hi - lo) * PLOT_SIZE

    def polyline(self, xs, ys, style: str) -> str:
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(self.px(xs), self.py(ys)))
        return f'<polyline points="{pts}" fill="none" {style}/>'

    def frame(self, xlabel: str, ylabel: str, title: str) -> list[str]:
        x0, y0, s = self.x0, self.y0, PLOT_SIZE
        out = [f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(s)}" height="{_f(s)}" '
               f'fill="none" stroke="black"/>']
        for t in nice_ticks(*self.xlim):
            x = float(self.px(t))
            out.append(f'<line x1="{_f(x)}" y1="{_f(y0 + s)}" x2="{_f(x)}" y2="{_f(y0 + s + 5)}" stroke="black"/>')
            out.append(f'<text x="{_f(x)}" y="{_f(y0 + s + 18)}" text-anchor="middle" {FONT}>{_tick_label(t)}</text>')
        for t in nice_ticks(*self.ylim):
            y = float(self.py(t))
            out.append(f'<line x1="{_f(x0 - 5)}" y1="{_f(y)}" x2="{_f(x0)}" y2="{_f(y)}" stroke="black"/>')
            out.append(f'<text x="{_f(x0 - 8)}" y="{_f(y + 4)}" text-anchor="end" {FONT}>{_tick_label(t)}</text>')
        out.append(f'<text x="{_f(x0 + s / 2)}" y="{_f(y0 + s + 40)}" text-anchor="middle" {FONT}>{xlabel}</text>')
        out.append(f'<text x="{_f(x0 - 52)}" y="{_f(y0 + s / 2)}" text-anchor="middle" {FONT} '
                   f'transform="rotate(-90 {_f(x0 - 52)} {_f(y0 + s / 2)})">{ylabel}</text>')
        out.append(f'<text x="{_f(x0 + s / 2)}" y="{_f(y0 - 10)}" text-anchor="middle" {FONT}>{escape(title)}</text>')
        return out


def _document(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
            f'viewBox="0 0 {_f(width)} {_f(height)}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _nm(omega):
    return 2 * np.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float) * 1e9


def render_grid_svg(psi: BiphotonGrid, tau: Optional[float] = None,
                    levels: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9),
                    title: str = "|psi| contours") -> str:
    """Contour plot of |psi| over signal and idler wavelengths (nm).

    Levels are fractions of the peak. When ``tau`` is given the pump centre
    line ws + wi = 2 w0 is drawn solid and the lines shifted by +/- 1/tau
    dashed.

    Raises:
        ValueError: if the amplitude has non-finite cells.
    """
    amp = np.abs(np.asarray(psi.amplitude))
    _check_finite(amp, "grid")
    ws, wi = psi.grid.omega_s, psi.grid.omega_i
    lam_s, lam_i = _nm(ws), _nm(wi)
    panel = _Panel(MARGIN_LEFT, MARGIN_TOP, (lam_s.min(), lam_s.max()), (lam_i.min(), lam_i.max()))
    body = [f'<rect x="{_f(MARGIN_LEFT)}" y="{_f(MARGIN_TOP)}" width="{_f(PLOT_SIZE)}" '
            f'height="{_f(PLOT_SIZE)}" fill="#f4f4f4"/>']
    peak = amp.max()
    if peak > 0:
        for level in levels:
            shade = ramp_color(level)
            for line in marching_squares(ws, wi, amp / peak, level):
                body.append(panel.polyline(_nm(line[:, 0]), _nm(line[:, 1]),
                                           f'stroke="{shade}" stroke-width="1.5"'))
    if tau is not None:
        total = 2 * psi.omega0
        for shift, dash in ((0.0, ""), (1 / tau, ' stroke-dasharray="6,4"'), (-1 / tau, ' stroke-dasharray="6,4"')):
            s = np.linspace(ws[0], ws[-1], 65)
            i = total + shift - s
            keep = (i >= wi[0]) & (i <= wi[-1])
            if keep.sum() >= 2:
                body.append(panel.polyline(_nm(s[keep]), _nm(i[keep]),
                                           f'stroke="green" stroke-width="1"{dash}'))
    body += panel.frame("signal wavelength (nm)", "idler wavelength (nm)", title)
    return _document(MARGIN_LEFT + PLOT_SIZE + MARGIN_RIGHT, MARGIN_TOP + PLOT_SIZE + MARGIN_BOTTOM, body)


def _cells(panel: _Panel, x, y, colors) -> list[str]:
    def edges(v):
        mid = 0.5 * (v[1:] + v[:-1])
        return np.concatenate([[v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]])

    ex, ey = edges(np.asarray(x, float)), edges(np.asarray(y, float))
    out = []
    for i in range(len(x)):
        for j in range(len(y)):
            x0, x1 = panel.px(ex[i]), panel.px(ex[i + 1])
            y0, y1 = panel.py(ey[j + 1]), panel.py(ey[j])
            out.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
                       f'fill="{colors[i][j]}"/>')
    return out


def _layer_status(values: np.ndarray, what: str) -> bool:
    """True when a layer can be drawn, False when it was not computed at all."""
    finite = np.isfinite(values)
    if not finite.any():
        return False
    _check_finite(values, what)
    return True


def render_sweep_svg(result, r_levels: Optional[Sequence[float]] = None) -> str:
    """Two-panel map over (2 w_p, 2 w_f) in um.

    Left: eta as grey shading with labelled r iso-lines. Right: log10 R_c
    colour map with its colour bar. Layers whose metric was not computed
    (all NaN) are left out.

    Raises:
        ValueError: if a computed layer has non-finite cells.
    """
    x, y = result.wp_diameters, result.wf_diameters
    r = result.field("r")
    _check_finite(r, "r")
    eta = result.field("eta")
    rc = result.field("rate_c")
    span = ((x[0] - 0.5 * (x[1] - x[0]), x[-1] + 0.5 * (x[-1] - x[-2])),
            (y[0] - 0.5 * (y[1] - y[0]), y[-1] + 0.5 * (y[-1] - y[-2])))
    left = _Panel(MARGIN_LEFT, MARGIN_TOP, *span)
    right_x0 = MARGIN_LEFT + PLOT_SIZE + MARGIN_LEFT
    right = _Panel(right_x0, MARGIN_TOP, *span)
    body = []

    if _layer_status(eta, "eta"):
        grey = [[_grey(v) for v in row] for row in eta]
        body += _cells(left, x, y, grey)
    if r_levels is None:
        r_levels = [k / 10 for k in range(-9, 10)]
    for level in r_levels:
        for line in marching_squares(x, y, r, level):
            body.append(left.polyline(line[:, 0], line[:, 1], 'stroke="black" stroke-width="1"'))
            mid = line[len(line) // 2]
            body.append(f'<text x="{_f(float(left.px(mid[0])))}" y="{_f(float(left.py(mid[1])) - 3)}" '
                        f'text-anchor="middle" font-family="sans-serif" font-size="9">{level:.1f}</text>')
    body += left.frame("pump diameter 2w_p (um)", "fibre mode diameter 2w_f (um)",
                       "eta (shading), r (lines)")

    if _layer_status(rc, "R_c"):
        if np.any(rc <= 0):
            raise ValueError(f"R_c has non-positive cells at indices {np.argwhere(rc <= 0).tolist()}")
        log_rc = np.log10(rc)
        lo, hi = float(log_rc.min()), float(log_rc.max())
        scale = (hi - lo) if hi > lo else 1.0
        colors = [[ramp_color((v - lo) / scale) for v in row] for row in log_rc]
        body += _cells(right, x, y, colors)
        body += right.frame("pump diameter 2w_p (um)", "fibre mode diameter 2w_f (um)", "log10 R_c")
        body += _colorbar(right_x0 + PLOT_SIZE + 20, MARGIN_TOP, lo, hi)
    width = right_x0 + PLOT_SIZE + 90
    return _document(width, MARGIN_TOP + PLOT_SIZE + MARGIN_BOTTOM, body)


def _grey(v: float) -> str:
    g = round(255 - 175 * min(1.0, max(0.0, float(v))))
    return f"#{g:02x}{g:02x}{g:02x}"


def _colorbar(x0: float, y0: float, lo: float, hi: float, steps: int = 32) -> list[str]:
    h = PLOT_SIZE / steps
    out = []
    for k in range(steps):
        t = (k + 0.5) / steps
        y = y0 + PLOT_SIZE - (k + 1) * h
        out.append(f'<rect x="{_f(x0)}" y="{_f(y)}" width="16.00" height="{_f(h + 0.5)}" '
                   f'fill="{ramp_color(t)}"/>')
    out.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="16.00" height="{_f(PLOT_SIZE)}" '
               f'fill="none" stroke="black"/>')
    for v, y in ((hi, y0 + 4), (lo, y0 + PLOT_SIZE)):
        out.append(f'<text x="{_f(x0 + 20)}" y="{_f(y)}" {FONT}>{v:.2f}</text>')
    return out


def write_svg(text: str, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
