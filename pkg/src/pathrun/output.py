"""CSV tables and small dependency-free SVG charts."""

from __future__ import annotations

import csv
from xml.sax.saxutils import escape


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _fmt(v):
    return f"{v:.4g}"


def svg_chart(series, title="", xlabel="", ylabel="", bars=False, logx=False, width=480, height=300):
    """Render ``{name: [(x, y), ...]}`` as a line (or bar) chart."""
    import math

    pad_l, pad_r, pad_t, pad_b = 56, 16, 28, 40
    pts = [p for s in series.values() for p in s]
    tx = (lambda v: math.log10(v)) if logx else (lambda v: float(v))
    xs = [tx(x) for x, _ in pts] or [0.0]
    ys = [float(y) for _, y in pts] or [0.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(v):
        return pad_l + (tx(v) - x0) / (x1 - x0) * pw

    def sy(v):
        return pad_t + ph - (float(v) - y0) / (y1 - y0) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
        f'<text x="{pad_l + pw / 2}" y="{height - 6}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
        f'<text x="12" y="{pad_t + ph / 2}" font-size="11" transform="rotate(-90 12 {pad_t + ph / 2})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
        f'<text x="{pad_l - 4}" y="{pad_t + 4}" text-anchor="end" font-size="10">{_fmt(y1)}</text>',
        f'<text x="{pad_l - 4}" y="{pad_t + ph}" text-anchor="end" font-size="10">{_fmt(y0)}</text>',
        f'<text x="{pad_l}" y="{pad_t + ph + 14}" text-anchor="middle" font-size="10">'
        f"{_fmt(10**x0 if logx else x0)}</text>",
        f'<text x="{pad_l + pw}" y="{pad_t + ph + 14}" text-anchor="middle" font-size="10">'
        f"{_fmt(10**x1 if logx else x1)}</text>",
    ]
    nser = max(len(series), 1)
    for k, (name, s) in enumerate(series.items()):
        c = colors[k % len(colors)]
        if bars and s:
            step = pw / max(len(s), 1)
            bw = max(step / nser * 0.8, 1.0)
            for x, y in s:
                left = sx(x) - step * 0.4 + k * bw
                top = min(sy(y), sy(0))
                out.append(
                    f'<rect x="{left:.2f}" y="{top:.2f}" width="{bw:.2f}" '
                    f'height="{abs(sy(0) - sy(y)):.2f}" fill="{c}"/>'
                )
        elif s:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s)
            out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{path}"/>')
        out.append(
            f'<text x="{pad_l + pw - 4}" y="{pad_t + 14 + 13 * k}" text-anchor="end" '
            f'font-size="11" fill="{c}">{escape(str(name))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, **kw):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg_chart(series, **kw))
