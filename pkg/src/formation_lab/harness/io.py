"""CSV emission/parsing and a static SVG overlay.

Floats are written with ``repr`` so that reading a file back gives the
exact in-memory values.
"""
from __future__ import annotations

import csv
import io
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np

from ..motion import Trajectory, ideal_destinations
from .experiments import ComparisonRow, ExperimentRecord, SweepRow

TRAJECTORY_HEADER = ("slot", "robot_id", "x", "y")
SWEEP_HEADER = ("param", "mean_bias", "std_bias", "bound")
COMPARISON_HEADER = ("trial", "hungarian", "fixed", "random")
RECORD_HEADER = tuple(f.name for f in fields(ExperimentRecord))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _read(path_or_text, header):
    text = path_or_text
    if isinstance(path_or_text, Path) or "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != tuple(header):
        raise ValueError(f"expected header {','.join(header)}")
    return rows[1:]


def trajectory_rows(tr: Trajectory):
    for s in tr.states:
        for i, (x, y) in enumerate(s.positions):
            yield (s.slot, i, float(x), float(y))


def write_trajectory_csv(tr: Trajectory, path=None) -> str:
    return _write(path, TRAJECTORY_HEADER, trajectory_rows(tr))


def read_trajectory_csv(src) -> list:
    return [(int(a), int(b), float(c), float(d)) for a, b, c, d in _read(src, TRAJECTORY_HEADER)]


def write_sweep_csv(rows, path=None) -> str:
    return _write(path, SWEEP_HEADER, (astuple(r) for r in rows))


def read_sweep_csv(src) -> list:
    return [SweepRow(*map(float, r)) for r in _read(src, SWEEP_HEADER)]


def write_comparison_csv(rows, path=None) -> str:
    return _write(path, COMPARISON_HEADER, (astuple(r) for r in rows))


def read_comparison_csv(src) -> list:
    return [ComparisonRow(int(t), float(a), float(b), float(c)) for t, a, b, c in _read(src, COMPARISON_HEADER)]


def write_records_csv(records, path=None) -> str:
    return _write(path, RECORD_HEADER, (astuple(r) for r in records))


def read_records_csv(src) -> list:
    out = []
    for t, seed, e, p, b, k, c, ok in _read(src, RECORD_HEADER):
        out.append(ExperimentRecord(int(t), int(seed), float(e), float(p), float(b), int(k), int(c), bool(int(ok))))
    return out


def trajectory_svg(tr: Trajectory, path=None, size: int = 600, margin: float = 20.0) -> str:
    """Start positions (grey), paths (thin lines), final positions (blue) and
    the ideal formation slots (red crosses)."""
    pos = np.stack([s.positions for s in tr.states])  # slots x robots x 2
    ideal = ideal_destinations(tr.final)
    allp = np.concatenate([pos.reshape(-1, 2), ideal])
    lo, hi = allp.min(axis=0) - margin, allp.max(axis=0) + margin
    scale = size / max(hi - lo)

    def sx(p):
        # flip y so the picture matches the usual axes
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(pos.shape[1]):
        pts = " ".join("%.2f,%.2f" % sx(p) for p in pos[:, i])
        out.append(f'<polyline points="{pts}" fill="none" stroke="#999" stroke-width="0.8"/>')
    for p in pos[0]:
        x, y = sx(p)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#bbb"/>')
    for p in ideal:
        x, y = sx(p)
        out.append(f'<path d="M{x - 5:.2f},{y - 5:.2f}L{x + 5:.2f},{y + 5:.2f}'
                   f'M{x - 5:.2f},{y + 5:.2f}L{x + 5:.2f},{y - 5:.2f}" stroke="red" stroke-width="1.2"/>')
    for i, p in enumerate(pos[-1]):
        x, y = sx(p)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="#1f5fbf"/>')
        out.append(f'<text x="{x + 5:.2f}" y="{y - 5:.2f}" font-size="9" font-family="sans-serif">{i}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
