"""Standalone SVG figures drawn only from CSV files written by the experiments."""
import html
import json
import math
from pathlib import Path

from .io import read_csv

SIZE = 420
PAD = 30
POS = "#c0392b"
NEG = "#2c6fbb"


def _doc(body, config, title):
    comment = html.escape(json.dumps(config, sort_keys=True)).replace("--", "- -")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n<!-- config: {comment} -->\n'
            f'<title>{html.escape(title)}</title>\n'
            f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>\n' + "\n".join(body) + "\n</svg>\n")


def _mapper(lo, hi):
    span = hi - lo
    scale = (SIZE - 2 * PAD) / span

    def to_px(x, y):
        return PAD + (x - lo) * scale, SIZE - PAD - (y - lo) * scale

    return to_px, scale


def particle_trace_svg(particles_csv, teacher_csv, out_path, m, snapshot):
    """Particles at one snapshot; radius r is drawn at tanh(r), unit circle in black."""
    config, cols, rows = read_csv(particles_csv)
    _, tcols, trows = read_csv(teacher_csv)
    c = {k: i for i, k in enumerate(cols)}
    tc = {k: i for i, k in enumerate(tcols)}
    to_px, scale = _mapper(-1.1, 1.1)
    cx, cy = to_px(0.0, 0.0)
    body = [f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{math.tanh(1.0) * scale:.2f}" '
            'fill="none" stroke="black" stroke-width="1"/>']
    for row in trows:
        ux, uy = float(row[tc["dir_x"]]), float(row[tc["dir_y"]])
        x1, y1 = to_px(1.05 * ux, 1.05 * uy)
        body.append(f'<line x1="{cx:.2f}" y1="{cy:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
                    'stroke="black" stroke-dasharray="4,3"/>')
    for row in rows:
        if int(row[c["m"]]) != m or int(row[c["snapshot"]]) != snapshot:
            continue
        px, py = float(row[c["pos_x"]]), float(row[c["pos_y"]])
        r = math.hypot(px, py)
        s = math.tanh(r) / r if r > 0 else 0.0
        x, y = to_px(px * s, py * s)
        color = POS if int(row[c["sign"]]) > 0 else NEG
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
    Path(out_path).write_text(_doc(body, config, f"particles m={m} snapshot={snapshot}"))
    return out_path


def boundary_svg(data_csv, polyline_csv, out_path, repetition, mode):
    """Training points and the zero-level polyline of one trained network."""
    config, dcols, drows = read_csv(data_csv)
    _, pcols, prows = read_csv(polyline_csv)
    dc = {k: i for i, k in enumerate(dcols)}
    pc = {k: i for i, k in enumerate(pcols)}
    to_px, _ = _mapper(-0.5, 0.5)
    body = []
    for row in drows:
        if int(row[dc["repetition"]]) != repetition:
            continue
        x, y = to_px(float(row[dc["x_1"]]), float(row[dc["x_2"]]))
        if float(row[dc["y"]]) > 0:
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{POS}"/>')
        else:
            body.append(f'<path d="M{x - 3:.2f},{y - 3:.2f} L{x + 3:.2f},{y + 3:.2f} '
                        f'M{x - 3:.2f},{y + 3:.2f} L{x + 3:.2f},{y - 3:.2f}" stroke="{NEG}"/>')
    lines = {}
    for row in prows:
        if int(row[pc["repetition"]]) != repetition or row[pc["mode"]] != mode:
            continue
        lines.setdefault(int(row[pc["polyline"]]), []).append(
            to_px(float(row[pc["x"]]), float(row[pc["y"]])))
    for pts in lines.values():
        d = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        body.append(f'<polyline points="{d}" fill="none" stroke="black" stroke-width="1.5"/>')
    Path(out_path).write_text(_doc(body, config, f"boundary repetition={repetition} mode={mode}"))
    return out_path


def curve_svg(csv_path, out_path, x_col, y_col, group_col=None):
    """Line plot of ``y_col`` against ``x_col``, one line per value of ``group_col``
    (a single line labelled ``y_col`` when it is None)."""
    config, cols, rows = read_csv(csv_path)
    c = {k: i for i, k in enumerate(cols)}
    series = {}
    for row in rows:
        series.setdefault(y_col if group_col is None else row[c[group_col]], []).append((float(row[c[x_col]]), float(row[c[y_col]])))
    xs = [p[0] for s in series.values() for p in s] or [0.0, 1.0]
    ys = [p[1] for s in series.values() for p in s] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys + [0.0]), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    w = SIZE - 2 * PAD

    def px(x, y):
        return PAD + (x - x0) / (x1 - x0) * w, SIZE - PAD - (y - y0) / (y1 - y0) * w

    body = [f'<line x1="{PAD}" y1="{SIZE - PAD}" x2="{SIZE - PAD}" y2="{SIZE - PAD}" stroke="black"/>',
            f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{SIZE - PAD}" stroke="black"/>']
    palette = [POS, NEG, "#27ae60", "#8e44ad"]
    for k, (name, pts) in enumerate(sorted(series.items())):
        pts.sort()
        d = " ".join("{:.2f},{:.2f}".format(*px(x, y)) for x, y in pts)
        color = palette[k % len(palette)]
        body.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="2"/>')
        tx, ty = PAD + 8, PAD + 14 * (k + 1)
        body.append(f'<text x="{tx}" y="{ty}" fill="{color}" font-size="11">{html.escape(name)}</text>')
    Path(out_path).write_text(_doc(body, config, f"{y_col} vs {x_col}"))
    return out_path
