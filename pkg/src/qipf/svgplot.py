"""Minimal static SVG charts: polylines, bands, ROC curves.

No external renderer; coordinates are formatted with fixed precision so a
rerun of the same data produces a byte-identical file.
"""

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
           "#393b79", "#637939")

WIDTH = 640
HEIGHT = 400
MARGIN_L = 52
MARGIN_R = 16
MARGIN_T = 28
MARGIN_B = 40


def _fmt(v) -> str:
    return f"{v:.2f}"


def _tick_label(v) -> str:
    return f"{v:.4g}"


class _Frame:
    """Data-to-pixel mapping with padded bounds and tick positions."""

    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        pad_x = 0.02 * (xhi - xlo)
        pad_y = 0.05 * (yhi - ylo)
        self.xlo, self.xhi = xlo - pad_x, xhi + pad_x
        self.ylo, self.yhi = ylo - pad_y, yhi + pad_y

    def px(self, x):
        t = (x - self.xlo) / (self.xhi - self.xlo)
        return MARGIN_L + t * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y):
        t = (y - self.ylo) / (self.yhi - self.ylo)
        return HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B)

    def ticks(self, lo, hi, count=5):
        return np.linspace(lo, hi, count)


def _axes(frame, parts):
    x0, x1 = frame.px(frame.xlo), frame.px(frame.xhi)
    y0, y1 = frame.py(frame.ylo), frame.py(frame.yhi)
    parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}"'
                 f' height="{_fmt(y0 - y1)}" fill="none" stroke="#333"'
                 ' stroke-width="1"/>')
    for tx in frame.ticks(frame.xlo, frame.xhi):
        px = frame.px(tx)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y0)}" x2="{_fmt(px)}"'
                     f' y2="{_fmt(y0 + 4)}" stroke="#333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_fmt(y0 + 16)}"'
                     f' font-size="10" text-anchor="middle"'
                     f' fill="#333">{_tick_label(tx)}</text>')
    for ty in frame.ticks(frame.ylo, frame.yhi):
        py = frame.py(ty)
        parts.append(f'<line x1="{_fmt(x0 - 4)}" y1="{_fmt(py)}" x2="{_fmt(x0)}"'
                     f' y2="{_fmt(py)}" stroke="#333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(x0 - 6)}" y="{_fmt(py + 3)}"'
                     f' font-size="10" text-anchor="end"'
                     f' fill="#333">{_tick_label(ty)}</text>')


def _polyline(frame, x, y, color, dashed=False, width=1.5):
    pts = " ".join(f"{_fmt(frame.px(a))},{_fmt(frame.py(b))}"
                   for a, b in zip(x, y))
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{color}"'
            f' stroke-width="{width}"{dash}/>')


def _legend(entries, parts):
    y = MARGIN_T + 4
    for label, color, dashed in entries:
        x = WIDTH - MARGIN_R - 150
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        parts.append(f'<line x1="{_fmt(x)}" y1="{_fmt(y)}" x2="{_fmt(x + 22)}"'
                     f' y2="{_fmt(y)}" stroke="{color}" stroke-width="2"{dash}/>')
        parts.append(f'<text x="{_fmt(x + 28)}" y="{_fmt(y + 3)}"'
                     f' font-size="10" fill="#333">{label}</text>')
        y += 14


def _document(parts, title):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}"'
            f' height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    title_el = (f'<text x="{WIDTH // 2}" y="18" font-size="12"'
                f' text-anchor="middle" fill="#111">{title}</text>')
    return "\n".join([head, title_el] + parts + ["</svg>"]) + "\n"


def line_chart(x, series, labels=None, dashed=None, title="") -> str:
    """Overlaid polylines sharing an x axis.

    series is a list of y arrays; dashed flags series drawn dashed.
    """
    x = np.asarray(x, dtype=np.float64)
    series = [np.asarray(s, dtype=np.float64) for s in series]
    if not series or any(s.size != x.size for s in series):
        raise ValueError("series must be non-empty and match x in length")
    if x.size < 2:
        raise ValueError("need at least two points to draw a line")
    ylo = min(float(s.min()) for s in series)
    yhi = max(float(s.max()) for s in series)
    frame = _Frame(float(x.min()), float(x.max()), ylo, yhi)
    parts = []
    _axes(frame, parts)
    legend = []
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        is_dashed = bool(dashed[i]) if dashed else False
        parts.append(_polyline(frame, x, s, color, is_dashed))
        if labels:
            legend.append((labels[i], color, is_dashed))
    if legend:
        _legend(legend, parts)
    return _document(parts, title)


def band_chart(x, center, half_width, points=None, title="",
               labels=("mean", "spread band")) -> str:
    """Center line with a symmetric shaded band; optional scatter overlay.

    points is an optional (x, y) pair drawn as small circles.
    """
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    h = np.asarray(half_width, dtype=np.float64)
    if x.size != c.size or x.size != h.size or x.size < 2:
        raise ValueError("band inputs must share length >= 2")
    lo, hi = c - h, c + h
    ylo, yhi = float(lo.min()), float(hi.max())
    if points is not None:
        ylo = min(ylo, float(np.min(points[1])))
        yhi = max(yhi, float(np.max(points[1])))
    frame = _Frame(float(x.min()), float(x.max()), ylo, yhi)
    parts = []
    _axes(frame, parts)
    ring = list(zip(x, hi)) + list(zip(x[::-1], lo[::-1]))
    pts = " ".join(f"{_fmt(frame.px(a))},{_fmt(frame.py(b))}" for a, b in ring)
    parts.append(f'<polygon points="{pts}" fill="{PALETTE[0]}"'
                 ' fill-opacity="0.25" stroke="none"/>')
    parts.append(_polyline(frame, x, c, PALETTE[0]))
    if points is not None:
        for a, b in zip(np.asarray(points[0]).ravel(),
                        np.asarray(points[1]).ravel()):
            parts.append(f'<circle cx="{_fmt(frame.px(a))}"'
                         f' cy="{_fmt(frame.py(b))}" r="2.2"'
                         f' fill="{PALETTE[1]}"/>')
    _legend([(labels[0], PALETTE[0], False), (labels[1], PALETTE[0], False)],
            parts)
    return _document(parts, title)


def roc_chart(curves, title="receiver operating characteristic") -> str:
    """Overlaid ROC curves with the chance diagonal.

    curves is a list of (fpr, tpr, label, auc) tuples.
    """
    if not curves:
        raise ValueError("no curves to draw")
    frame = _Frame(0.0, 1.0, 0.0, 1.0)
    parts = []
    _axes(frame, parts)
    parts.append(_polyline(frame, np.array([0.0, 1.0]), np.array([0.0, 1.0]),
                           "#999999", dashed=True, width=1.0))
    legend = []
    for i, (fpr, tpr, label, auc) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(frame, np.asarray(fpr), np.asarray(tpr), color))
        legend.append((f"{label} (AUC {auc:.3f})", color, False))
    _legend(legend, parts)
    return _document(parts, title)


def write_svg(svg_text, path):
    with open(path, "w", newline="") as fh:
        fh.write(svg_text)
