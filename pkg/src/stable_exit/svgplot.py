"""Minimal static SVG log-log plots (no plotting dependency).

Draws estimate points with CI bars plus labeled reference lines for the
fitted slope and the predicted slope.
"""

import math

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _LogAxes:
    def __init__(self, xs, ys):
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        if self.x0 == self.x1:
            self.x0, self.x1 = self.x0 / 2.0, self.x1 * 2.0
        if self.y0 == self.y1:
            self.y0, self.y1 = self.y0 / 2.0, self.y1 * 2.0
        self.lx0, self.lx1 = math.log10(self.x0), math.log10(self.x1)
        self.ly0, self.ly1 = math.log10(self.y0), math.log10(self.y1)
        pad_x = 0.06 * (self.lx1 - self.lx0) or 0.1
        pad_y = 0.06 * (self.ly1 - self.ly0) or 0.1
        self.lx0 -= pad_x
        self.lx1 += pad_x
        self.ly0 -= pad_y
        self.ly1 += pad_y

    def px(self, x):
        return _ML + (math.log10(x) - self.lx0) / (self.lx1 - self.lx0) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (math.log10(y) - self.ly0) / (self.ly1 - self.ly0) * (_H - _MT - _MB)


def _ticks(lo, hi):
    out = []
    k = math.floor(math.log10(lo))
    while 10.0**k <= hi * 1.0001:
        if 10.0**k >= lo * 0.9999:
            out.append(10.0**k)
        k += 1
    return out or [lo, hi]


def loglog_plot(path, points, lines, title, xlabel, ylabel):
    """Write a log-log SVG scatter.

    points: sequence of (x, y, y_lo, y_hi); lines: sequence of
    (label, slope, anchor_x, anchor_y, color) drawn as y = anchor_y *
    (x / anchor_x)^slope across the x-range.
    """
    pts = [p for p in points if p[1] > 0.0]
    if not pts:
        raise ValueError("nothing to plot: no positive estimates")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts] + [p[2] for p in pts if p[2] > 0] + [p[3] for p in pts]
    ax = _LogAxes(xs, ys)
    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="18" text-anchor="middle">{_esc(title)}</text>',
    ]
    # frame and ticks
    el.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        'fill="none" stroke="black"/>'
    )
    for tx in _ticks(ax.x0, ax.x1):
        px = ax.px(tx)
        el.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" y2="{_H - _MB + 5}" stroke="black"/>')
        el.append(f'<text x="{px:.1f}" y="{_H - _MB + 18}" text-anchor="middle">{tx:g}</text>')
    for ty in _ticks(ax.y0, ax.y1):
        py = ax.py(ty)
        el.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="black"/>')
        el.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end">{ty:g}</text>')
    el.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    el.append(
        f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2:.1f})">{_esc(ylabel)}</text>'
    )
    # reference lines
    for i, (label, slope, ax_x, ax_y, color) in enumerate(lines):
        x_a, x_b = ax.x0 * 1.05, ax.x1 / 1.05
        y_a = ax_y * (x_a / ax_x) ** slope
        y_b = ax_y * (x_b / ax_x) ** slope
        el.append(
            f'<line x1="{ax.px(x_a):.1f}" y1="{ax.py(y_a):.1f}" x2="{ax.px(x_b):.1f}" '
            f'y2="{ax.py(y_b):.1f}" stroke="{color}" stroke-width="1.5"/>'
        )
        el.append(
            f'<text x="{_ML + 10}" y="{_MT + 18 + 16 * i}" fill="{color}">{_esc(label)}</text>'
        )
    # CI bars and points
    for x, y, lo, hi in pts:
        px = ax.px(x)
        if hi > 0 and lo > 0:
            el.append(
                f'<line x1="{px:.1f}" y1="{ax.py(lo):.1f}" x2="{px:.1f}" '
                f'y2="{ax.py(hi):.1f}" stroke="black" stroke-width="1"/>'
            )
        el.append(f'<circle cx="{px:.1f}" cy="{ax.py(y):.1f}" r="3" fill="black"/>')
    el.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(el) + "\n")
