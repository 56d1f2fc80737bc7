"""Standalone SVG figures written without a plotting library.

Output is a pure function of the input data (no randomness, fixed number
formatting), so identical inputs give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=40, bottom=50)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
MAX_TRAJECTORIES = 50


def _num(v: float) -> str:
    return f"{v:.2f}"


def freedman_diaconis_edges(x: np.ndarray) -> np.ndarray:
    """Histogram bin edges with width ``2 * IQR / n**(1/3)``."""
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        return np.array([lo - 0.5, hi + 0.5])
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) / len(x) ** (1 / 3)
    if width <= 0:
        n_bins = int(np.ceil(np.sqrt(len(x))))
    else:
        n_bins = int(np.ceil((hi - lo) / width))
    n_bins = min(max(n_bins, 1), 200)
    return np.linspace(lo, hi, n_bins + 1)


class _Canvas:
    def __init__(self, xlim, ylim, title, xlabel, ylabel, logx=False):
        self.logx = logx
        x0, x1 = (np.log10(xlim[0]), np.log10(xlim[1])) if logx else xlim
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        y0, y1 = ylim
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        self.xr, self.yr = (x0, x1), (y0, y1)
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15" font-family="sans-serif">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)
        self.legend = []

    def px(self, x):
        x = np.log10(x) if self.logx else np.asarray(x, dtype=float)
        a, b = self.xr
        return MARGIN["left"] + (x - a) / (b - a) * (WIDTH - MARGIN["left"] - MARGIN["right"])

    def py(self, y):
        a, b = self.yr
        return HEIGHT - MARGIN["bottom"] - (np.asarray(y, dtype=float) - a) / (b - a) * (HEIGHT - MARGIN["top"] - MARGIN["bottom"])

    def _axes(self, xlabel, ylabel):
        L, R = MARGIN["left"], WIDTH - MARGIN["right"]
        Tp, B = MARGIN["top"], HEIGHT - MARGIN["bottom"]
        p = self.parts
        p.append(f'<g id="axes" stroke="black" stroke-width="1"><line x1="{L}" y1="{B}" x2="{R}" y2="{B}"/><line x1="{L}" y1="{B}" x2="{L}" y2="{Tp}"/></g>')
        for v in np.linspace(*self.xr, 5):
            label = 10**v if self.logx else v
            x = L + (v - self.xr[0]) / (self.xr[1] - self.xr[0]) * (R - L)
            p.append(f'<text x="{_num(x)}" y="{B + 16}" text-anchor="middle" font-size="11" font-family="sans-serif">{label:.4g}</text>')
        for v in np.linspace(*self.yr, 5):
            y = self.py(v)
            p.append(f'<text x="{L - 6}" y="{_num(y + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">{v:.4g}</text>')
        p.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12" font-family="sans-serif">{escape(xlabel)}</text>')
        p.append(f'<text x="16" y="{(Tp + B) / 2}" text-anchor="middle" font-size="12" font-family="sans-serif" transform="rotate(-90 16 {(Tp + B) / 2})">{escape(ylabel)}</text>')

    def polyline(self, xs, ys, color, label=None, width=1.2, opacity=1.0):
        pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(self.px(xs), self.py(ys)))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}"/>')
        if label:
            self.legend.append((label, color))

    def bars(self, edges, counts, color, label=None):
        y0 = self.py(0.0)
        rects = []
        for a, b, c in zip(edges[:-1], edges[1:], counts):
            xa, xb, yc = self.px(a), self.px(b), self.py(c)
            rects.append(f'<rect x="{_num(xa)}" y="{_num(yc)}" width="{_num(max(xb - xa, 0.0))}" height="{_num(y0 - yc)}"/>')
        self.parts.append(f'<g class="histogram" fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5">' + "".join(rects) + "</g>")
        if label:
            self.legend.append((label, color))

    def render(self) -> str:
        x = WIDTH - MARGIN["right"] + 12
        out = list(self.parts)
        if self.legend:
            out.append('<g id="legend" font-size="11" font-family="sans-serif">')
            for i, (label, color) in enumerate(self.legend):
                y = MARGIN["top"] + 14 + 16 * i
                out.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/><text x="{x + 16}" y="{y}">{escape(label)}</text>')
            out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"


def loss_histogram(series: dict[str, np.ndarray], title="Superhedging performance", xlabel="V_T - H") -> str:
    """Overlaid normalised histograms, one per named sample set."""
    if not series or any(len(v) == 0 for v in series.values()):
        raise ValueError("loss histogram needs non-empty data")
    edges_all, dens_all = [], []
    for v in series.values():
        e = freedman_diaconis_edges(v)
        c, _ = np.histogram(v, bins=e, density=True)
        edges_all.append(e)
        dens_all.append(c)
    xlim = (min(e[0] for e in edges_all), max(e[-1] for e in edges_all))
    ylim = (0.0, max(float(c.max()) for c in dens_all) * 1.05)
    cv = _Canvas(xlim, ylim, title, xlabel, "density")
    for i, (name, e, c) in enumerate(zip(series, edges_all, dens_all)):
        cv.bars(e, c, PALETTE[i % len(PALETTE)], name)
    return cv.render()


def price_process(trajectories: np.ndarray, title="Superhedging price process", ylabel="U_t") -> str:
    """Up to 50 trajectories (rows of ``trajectories``) against time."""
    y = np.asarray(trajectories, dtype=float)
    if y.ndim != 2 or y.size == 0:
        raise ValueError("price-process plot needs a non-empty (paths, times) array")
    if len(y) > MAX_TRAJECTORIES:
        y = y[np.linspace(0, len(y) - 1, MAX_TRAJECTORIES).astype(int)]
    t = np.arange(y.shape[1])
    cv = _Canvas((0, max(t[-1], 1)), (float(y.min()), float(y.max())), title, "t", ylabel)
    for i, row in enumerate(y):
        cv.polyline(t, row, PALETTE[i % len(PALETTE)], width=0.9, opacity=0.8)
    return cv.render()


def lambda_curves(lambdas, prices, alphas, title="Impact of lambda") -> str:
    """Price and superhedging probability against lambda (log axis)."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.size == 0:
        raise ValueError("lambda-curves plot needs at least one point")
    prices = np.asarray(prices, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    lo = min(prices.min(), alphas.min(), 0.0)
    hi = max(prices.max(), alphas.max(), 1.0)
    cv = _Canvas((lam.min(), lam.max()), (lo, hi * 1.05), title, "lambda", "value", logx=lam.min() > 0)
    cv.polyline(lam, prices, PALETTE[0], "quantile hedging price", width=1.8)
    cv.polyline(lam, alphas, PALETTE[1], "alpha(lambda)", width=1.8)
    return cv.render()


def plot(kind: str, data, path=None, **kwargs) -> str:
    """Render ``kind`` in {loss-histogram, price-process, lambda-curves}; write to ``path`` if given."""
    if kind == "loss-histogram":
        svg = loss_histogram(data if isinstance(data, dict) else {"samples": np.asarray(data)}, **kwargs)
    elif kind == "price-process":
        svg = price_process(data, **kwargs)
    elif kind == "lambda-curves":
        svg = lambda_curves(data["lambda"], data["price"], data["alpha"], **kwargs)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    if path is not None:
        Path(path).write_text(svg)
    return svg
