"""Deterministic JSON, CSV and SVG output."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e17:
        return format(x, ".1f")
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _num(o)
        return json.dumps(o)
    return enc(_plain(obj), 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_csv(path, r, w, wp) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["r,w,wprime"]
    lines += [f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(map(float, r), map(float, w), map(float, wp))]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _figure():
    import matplotlib
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure
    matplotlib.rcParams["svg.hashsalt"] = "emdenfowler"
    fig = Figure(figsize=(7, 4))
    FigureCanvasSVG(fig)
    return fig


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def svg_trajectory(path, traj, title: str = "") -> Path:
    fig = _figure()
    ax = fig.add_subplot(111)
    r = np.linspace(0, traj.r_end, 2000)
    w = traj(r)[0]
    ax.plot(r, w, lw=1.2)
    ax.axhline(0, color="0.6", lw=0.6)
    term = traj.termination
    if term.kind == "BlowUp" and term.R_est is not None:
        ax.axvline(term.R_est, color="C3", ls="--", lw=0.8, label=f"R = {term.R_est:.6g}")
        ax.set_ylim(min(-1, float(np.min(w))), 10 * max(1.0, abs(traj.problem.a)))
        ax.legend(loc="best")
    ax.set_xlabel("r")
    ax.set_ylabel("w")
    ax.set_title(title)
    return _save(fig, path)


def svg_profile(path, profile, blowups=(), title: str = "", clip: float = 20.0) -> Path:
    """v against t for a piecewise profile with vertical asymptotes at the blow-up abscissae."""
    fig = _figure()
    ax = fig.add_subplot(111)
    for pc in profile.pieces:
        top = pc.r_top
        if pc.traj.termination.kind == "BlowUp":
            top = 0.999 * pc.traj.termination.r_stop
        rr = np.linspace(pc.r_lo, top, 1500)
        t, v, _, _ = pc.eval_r(rr, second="dense")
        ax.plot(t, np.clip(v, -clip, clip), lw=1.2)
    for b in blowups:
        if b is not None and math.isfinite(b):
            ax.axvline(b, color="C3", ls="--", lw=0.8)
    ax.axhline(0, color="0.6", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("v")
    ax.set_title(title)
    return _save(fig, path)
