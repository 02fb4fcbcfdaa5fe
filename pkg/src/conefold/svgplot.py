"""Minimal hand-emitted SVG: polylines, filled regions, axes and labels.

No plotting dependency; the CSV outputs are canonical and the SVG is a
static derivative.
"""

from __future__ import annotations


class SvgCanvas:
    def __init__(self, width=640, height=480, margin=56):
        self.width = width
        self.height = height
        self.margin = margin
        self.body = []
        self._window = None

    def set_window(self, xmin, xmax, ymin, ymax):
        if xmax <= xmin or ymax <= ymin:
            raise ValueError("degenerate plot window")
        self._window = (xmin, xmax, ymin, ymax)

    def _map(self, x, y):
        xmin, xmax, ymin, ymax = self._window
        px = self.margin + (x - xmin) / (xmax - xmin) * (self.width - 2 * self.margin)
        py = self.height - self.margin - (y - ymin) / (ymax - ymin) * (self.height - 2 * self.margin)
        return px, py

    def polyline(self, pts, color="#1f4e98", width=1.5, dash=None):
        if len(pts) < 2:
            return
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in (self._map(x, y) for x, y in pts))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.body.append(f'<polyline fill="none" stroke="{color}" '
                         f'stroke-width="{width}"{dash_attr} points="{coords}"/>')

    def polygon(self, pts, fill="#dce7f5", opacity=0.8):
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in (self._map(x, y) for x, y in pts))
        self.body.append(f'<polygon fill="{fill}" fill-opacity="{opacity}" '
                         f'stroke="none" points="{coords}"/>')

    def marker(self, x, y, color="#b02020", r=3.0):
        px, py = self._map(x, y)
        self.body.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="{color}"/>')

    def text(self, x, y, label, color="#222222", size=12, anchor="start"):
        px, py = self._map(x, y)
        self.body.append(f'<text x="{px:.2f}" y="{py:.2f}" font-size="{size}" '
                         f'fill="{color}" text-anchor="{anchor}" '
                         f'font-family="sans-serif">{label}</text>')

    def axes(self, xlabel="", ylabel="", ticks=5):
        xmin, xmax, ymin, ymax = self._window
        m = self.margin
        w, h = self.width, self.height
        ax = [f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" '
              'fill="none" stroke="#444444" stroke-width="1"/>']
        for k in range(ticks + 1):
            xv = xmin + (xmax - xmin) * k / ticks
            yv = ymin + (ymax - ymin) * k / ticks
            px, _ = self._map(xv, ymin)
            _, py = self._map(xmin, yv)
            ax.append(f'<line x1="{px:.2f}" y1="{h - m}" x2="{px:.2f}" '
                      f'y2="{h - m + 5}" stroke="#444444"/>')
            ax.append(f'<text x="{px:.2f}" y="{h - m + 18}" font-size="10" '
                      f'fill="#444444" text-anchor="middle" '
                      f'font-family="sans-serif">{xv:.3g}</text>')
            ax.append(f'<line x1="{m - 5}" y1="{py:.2f}" x2="{m}" '
                      f'y2="{py:.2f}" stroke="#444444"/>')
            ax.append(f'<text x="{m - 8}" y="{py + 3:.2f}" font-size="10" '
                      f'fill="#444444" text-anchor="end" '
                      f'font-family="sans-serif">{yv:.3g}</text>')
        if xlabel:
            ax.append(f'<text x="{w / 2:.1f}" y="{h - 8}" font-size="12" '
                      f'fill="#222222" text-anchor="middle" '
                      f'font-family="sans-serif">{xlabel}</text>')
        if ylabel:
            ax.append(f'<text x="14" y="{h / 2:.1f}" font-size="12" fill="#222222" '
                      f'text-anchor="middle" font-family="sans-serif" '
                      f'transform="rotate(-90 14 {h / 2:.1f})">{ylabel}</text>')
        self.body = ax + self.body

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">')
        bg = f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>'
        return "\n".join([head, bg, *self.body, "</svg>"]) + "\n"
