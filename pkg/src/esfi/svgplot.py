"""Minimal hand-rolled SVG charts (polylines, bars, axes, legends).

Deliberately tiny: the plots are run artifacts, not a charting product.
Output is deterministic -- no timestamps, no randomness -- so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 78, 24, 46, 58

LINE_COLORS = ("#d62728", "#8e44ad", "#1a1a1a", "#2077b4", "#e8991c", "#2c9f4b")
STAR_COLORS = ("#e8991c", "#2c9f4b", "#2077b4")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


class _Canvas:
    def __init__(self, title: str, x_label: str, y_label: str,
                 x_range, y_range, x_ticks: bool = True):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text x="{WIDTH/2:.1f}" y="26" text-anchor="middle" font-size="16">{title}</text>',
        ]
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        if self.x_hi <= self.x_lo:
            self.x_hi = self.x_lo + 1.0
        if self.y_hi <= self.y_lo:
            self.y_hi = self.y_lo + 1.0
        self._axes(x_label, y_label, x_ticks)

    def px(self, x: float) -> float:
        span = self.x_hi - self.x_lo
        return MARGIN_L + (x - self.x_lo) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        span = self.y_hi - self.y_lo
        return HEIGHT - MARGIN_B - (y - self.y_lo) / span * (HEIGHT - MARGIN_T - MARGIN_B)

    def _axes(self, x_label: str, y_label: str, x_ticks: bool) -> None:
        x0, x1 = MARGIN_L, WIDTH - MARGIN_R
        y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
        add = self.parts.append
        for t in _nice_ticks(self.x_lo, self.x_hi) if x_ticks else ():
            px = self.px(t)
            add(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y1}" stroke="#e6e6e6"/>')
            add(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="#333333"/>')
            add(f'<text x="{px:.2f}" y="{y0 + 20}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
        for t in _nice_ticks(self.y_lo, self.y_hi):
            py = self.py(t)
            add(f'<line x1="{x0}" y1="{py:.2f}" x2="{x1}" y2="{py:.2f}" stroke="#e6e6e6"/>')
            add(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="#333333"/>')
            add(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
        add(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#333333"/>')
        add(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" font-size="13">{x_label}</text>')
        add(f'<text x="20" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 20 {(y0 + y1) / 2:.1f})">{y_label}</text>')

    def polyline(self, xs, ys, color: str, width: float = 1.8, dash: str = "") -> None:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'
        )

    def star(self, x: float, y: float, color: str, r: float = 5.0) -> None:
        cx, cy = self.px(x), self.py(y)
        pts = []
        for k in range(10):
            rad = r if k % 2 == 0 else 0.45 * r
            ang = -math.pi / 2 + k * math.pi / 5
            pts.append(f"{cx + rad * math.cos(ang):.2f},{cy + rad * math.sin(ang):.2f}")
        self.parts.append(f'<polygon points="{" ".join(pts)}" fill="{color}"/>')

    def bar(self, x_center: float, value: float, half_width: float, color: str) -> None:
        x = self.px(x_center - half_width)
        w = self.px(x_center + half_width) - x
        y_zero, y_val = self.py(0.0), self.py(value)
        top, height = (y_val, y_zero - y_val) if value >= 0 else (y_zero, y_val - y_zero)
        self.parts.append(
            f'<rect x="{x:.2f}" y="{top:.2f}" width="{w:.2f}" height="{height:.2f}" '
            f'fill="{color}" stroke="#333333" stroke-width="0.5"/>'
        )

    def hline(self, y: float, color: str = "#888888", dash: str = "5,4") -> None:
        self.parts.append(
            f'<line x1="{MARGIN_L}" y1="{self.py(y):.2f}" x2="{WIDTH - MARGIN_R}" '
            f'y2="{self.py(y):.2f}" stroke="{color}" stroke-dasharray="{dash}"/>'
        )

    def legend(self, entries) -> None:
        # entries: (label, color, kind) with kind "line" or "star"
        x = WIDTH - MARGIN_R - 170
        y = MARGIN_T + 14
        add = self.parts.append
        add(f'<rect x="{x - 8}" y="{y - 14}" width="178" height="{18 * len(entries) + 8}" '
            f'fill="#ffffff" fill-opacity="0.85" stroke="#cccccc"/>')
        for label, color, kind in entries:
            if kind == "star":
                add(f'<circle cx="{x + 9}" cy="{y - 3}" r="4.5" fill="{color}"/>')
            else:
                add(f'<line x1="{x}" y1="{y - 3}" x2="{x + 18}" y2="{y - 3}" '
                    f'stroke="{color}" stroke-width="2.5"/>')
            add(f'<text x="{x + 24}" y="{y}" font-size="12">{label}</text>')
            y += 18

    def render(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def _write(destination, text: str) -> None:
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _data_range(arrays, pad: float = 0.05):
    lo = min(float(min(a)) for a in arrays if len(a))
    hi = max(float(max(a)) for a in arrays if len(a))
    if hi == lo:
        hi = lo + 1.0
    span = hi - lo
    return lo - pad * span if lo < 0 or lo - pad * span > 0 else 0.0, hi + pad * span


def line_chart(destination, title, x_label, y_label, curves, markers=()) -> None:
    """curves: (label, xs, ys) triples drawn as lines; markers drawn as stars."""
    all_x = [c[1] for c in curves] + [m[1] for m in markers]
    all_y = [c[2] for c in curves] + [m[2] for m in markers]
    canvas = _Canvas(title, x_label, y_label, _data_range(all_x), _data_range(all_y))
    entries = []
    for k, (label, xs, ys) in enumerate(curves):
        color = LINE_COLORS[k % len(LINE_COLORS)]
        canvas.polyline(xs, ys, color)
        entries.append((label, color, "line"))
    for k, (label, xs, ys) in enumerate(markers):
        color = STAR_COLORS[k % len(STAR_COLORS)]
        for x, y in zip(xs, ys):
            canvas.star(x, y, color)
        entries.append((label, color, "star"))
    canvas.legend(entries)
    _write(destination, canvas.render())


def bar_chart(destination, title, y_label, categories, values,
              y_range=(-1.0, 1.0), thresholds=(0.2, 0.4)) -> None:
    """One bar per category, horizontal guide lines at +-thresholds."""
    canvas = _Canvas(title, "", y_label, (-0.5, len(categories) - 0.5), y_range,
                     x_ticks=False)
    for t in thresholds:
        canvas.hline(t)
        canvas.hline(-t)
    canvas.hline(0.0, color="#333333", dash="")
    for k, (cat, val) in enumerate(zip(categories, values)):
        canvas.bar(k, val, 0.32, "#4c8fbd" if val >= 0 else "#c0604c")
        py = HEIGHT - MARGIN_B + 20
        canvas.parts.append(
            f'<text x="{canvas.px(k):.2f}" y="{py}" text-anchor="middle" font-size="11">{cat}</text>'
        )
    _write(destination, canvas.render())
