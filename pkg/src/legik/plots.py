"""Minimal standalone SVG line plots of bench artifacts."""
from __future__ import annotations

import logging
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import csvio

log = logging.getLogger(__name__)

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=80, right=20, top=40, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def line_plot_svg(x, series: dict, title: str, xlabel: str, ylabel: str, xlim=None) -> str:
    """SVG text of one or more polylines sharing the x axis."""
    x = np.asarray(x, dtype=float)
    x0, x1 = (float(x[0]), float(x[-1])) if xlim is None else (float(xlim[0]), float(xlim[1]))
    ys = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    ys = ys[np.isfinite(ys)]
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if y1 - y0 < 1e-300:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 <= x0:
        x1 = x0 + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        parts.append(f'<line x1="{px(t):.2f}" y1="{MARGIN["top"] + ph}" x2="{px(t):.2f}" '
                     f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(t):.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        parts.append(f'<line x1="{MARGIN["left"] - 5}" y1="{py(t):.2f}" x2="{MARGIN["left"]}" '
                     f'y2="{py(t):.2f}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN["left"] - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    parts.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    for k, (name, y) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN["top"] + 14 + 16 * k
        parts.append(f'<line x1="{MARGIN["left"] + pw - 90}" y1="{ly - 4}" x2="{MARGIN["left"] + pw - 70}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{MARGIN["left"] + pw - 65}" y="{ly}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(run_dir, out_dir=None) -> list:
    """Write ``<method>_joints.svg`` and ``<method>_error.svg`` for every method of a bench run.

    Methods whose artifacts are missing or empty are skipped with a warning.
    The x axis always spans ``[0, duration]`` of the run's plan.
    """
    run_dir = Path(run_dir)
    out_dir = run_dir / "plots" if out_dir is None else Path(out_dir)
    plan_path = run_dir / "plan.csv"
    duration = None
    if plan_path.is_file():
        t = csvio.read_plan(plan_path).sample_times
        duration = (0.0, float(t[-1] - t[0]))
    written = []
    for sub in sorted(p for p in run_dir.iterdir() if p.is_dir() and p != out_dir):
        method = sub.name
        joints, errors = sub / "joints.csv", sub / "errors.csv"
        if not joints.is_file() and not errors.is_file():
            continue
        out_dir.mkdir(parents=True, exist_ok=True)
        res = csvio.read_result(joints) if joints.is_file() else None
        if res is not None and len(res["t_s"]) > 0:
            t = res["t_s"] - res["t_s"][0]
            deg = np.degrees(res["joints"])
            svg = line_plot_svg(t, {f"theta{i + 1}": deg[:, i] for i in range(3)},
                                f"{method}: joint angles", "time [s]", "angle [deg]", duration or (0, t[-1]))
            path = out_dir / f"{method}_joints.svg"
            path.write_text(svg)
            written.append(path)
        else:
            log.warning("%s: joint trajectory missing or empty, skipped", method)
        err = csvio.read_errors(errors) if errors.is_file() else np.empty((0, 2))
        if len(err) > 0:
            t = err[:, 0] - err[:, 0][0]
            svg = line_plot_svg(t, {"error": err[:, 1]}, f"{method}: position error", "time [s]",
                                "error [m]", duration or (0, t[-1]))
            path = out_dir / f"{method}_error.svg"
            path.write_text(svg)
            written.append(path)
        else:
            log.warning("%s: error series missing or empty, skipped", method)
    return written
