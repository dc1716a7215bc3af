"""Self-contained SVG charts for experiment CSVs.

Output depends only on the CSV contents: no timestamps, fixed number formatting.
Error-rate axes are logarithmic; zero rates are drawn on a floor line and
marked with an open symbol.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .experiments import read_csv

W, H = 640, 420
ML, MR, MT, MB = 70, 150, 40, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def _series(kind: str, rows: list[dict]):
    """(title, x label, y label, log y, {name: [(x, y)]})."""
    if kind == "ber_sweep":
        s = {
            "legit": [(float(r["p"]), float(r["percent_key_error_legit"])) for r in rows],
            "attacker": [(float(r["p"]), float(r["percent_key_error_attacker"])) for r in rows],
        }
        return "Raw-key error vs flip probability", "flip probability p", "key bit error (%)", True, s
    if kind in ("mc_failure", "decoder_compare"):
        col = "failure_rate" if kind == "mc_failure" else "block_error_rate"
        s: dict[str, list] = {}
        for r in rows:
            s.setdefault(r["decoder"], []).append((float(r["p"]), float(r[col])))
        title = "Regeneration failure rate" if kind == "mc_failure" else "Block error rate by decoder"
        return title, "flip probability p", col.replace("_", " "), True, s
    if kind == "timing":
        s = {r["decoder"]: [(float(i), float(r["median_of_means_s"]) * 1e3)]
             for i, r in enumerate(rows)}
        return "Regeneration time", "decoder", "median-of-means time (ms)", False, s
    raise ValueError(f"cannot plot CSV kind {kind!r}")


def _num(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick(v: float) -> str:
    return f"{v:.3g}"


def render_svg(text: str) -> str:
    kind, rows = read_csv(text)
    if not rows:
        raise ValueError("CSV has no data rows")
    title, xl, yl, logy, series = _series(kind, rows)
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    if any(not math.isfinite(v) for v in xs + ys):
        raise ValueError("CSV contains non-finite values")
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if logy:
        pos = [y for y in ys if y > 0]
        lo = math.floor(math.log10(min(pos))) - 1 if pos else -6
        hi = math.ceil(math.log10(max(pos))) if pos else 0
        hi = max(hi, lo + 1)
        floor = 10.0 ** lo

        def ty(y):
            v = math.log10(max(y, floor))
            return MT + (H - MT - MB) * (1 - (v - lo) / (hi - lo))
        yticks = [(10.0 ** e, ty(10.0 ** e)) for e in range(lo, hi + 1)]
    else:
        y1 = max(ys) * 1.1 or 1.0

        def ty(y):
            return MT + (H - MT - MB) * (1 - y / y1)
        yticks = [(y1 * i / 4, ty(y1 * i / 4)) for i in range(5)]

    def tx(x):
        return ML + (W - ML - MR) * (x - x0) / (x1 - x0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W // 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">'
        f"{escape(title)}</text>",
        f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>',
    ]
    for v, y in yticks:
        out.append(f'<line x1="{ML - 4}" y1="{_num(y)}" x2="{W - MR}" y2="{_num(y)}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{ML - 6}" y="{_num(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{_tick(v)}</text>')
    if kind == "timing":
        xt = [(x, name) for name, pts in series.items() for x, _ in pts]
    else:
        xt = [(x, _tick(x)) for x in sorted(set(xs))]
    for x, lab in xt:
        out.append(f'<text x="{_num(tx(x))}" y="{H - MB + 16}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">{escape(lab)}</text>')
    out.append(f'<text x="{(ML + W - MR) // 2}" y="{H - 10}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(xl)}</text>')
    out.append(f'<text x="16" y="{(MT + H - MB) // 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {(MT + H - MB) // 2})">{escape(yl)}</text>')
    for i, (name, pts) in enumerate(series.items()):
        col = COLORS[i % len(COLORS)]
        pts = sorted(pts)
        if len(pts) > 1:
            path = " ".join(f"{_num(tx(x))},{_num(ty(y))}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="2"/>')
        for x, y in pts:
            fill = col if (y > 0 or not logy) else "white"
            out.append(f'<circle cx="{_num(tx(x))}" cy="{_num(ty(y))}" r="3.5" fill="{fill}" '
                       f'stroke="{col}"/>')
        ly = MT + 18 * i + 10
        out.append(f'<rect x="{W - MR + 12}" y="{ly - 8}" width="12" height="10" fill="{col}"/>')
        out.append(f'<text x="{W - MR + 30}" y="{ly + 1}" font-family="sans-serif" font-size="11">'
                   f"{escape(name)}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path, svg_path) -> None:
    with open(csv_path) as fh:
        svg = render_svg(fh.read())
    with open(svg_path, "w") as fh:
        fh.write(svg)
