"""Skeleton rendering and the landmark interchange format.

Predictions travel as JSON lines, one object per frame:
``{"frame": k, "points": [[x, y], ... 17 pairs]}`` in pixel coordinates.
Rendering emits one standalone SVG per frame: the skeleton edge list as
lines plus one circle per landmark, with full-precision coordinates so the
drawing round-trips exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataio import N_LANDMARKS, SKELETON_EDGES

BONE_STYLE = 'stroke="#2a6f97" stroke-width="2"'
JOINT_STYLE = 'r="4" fill="#d1495b"'


def write_predictions(path, frames) -> None:
    """Write (frame_index, [17, 2] points) pairs as JSON lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for frame_idx, points in frames:
            pts = [[float(x), float(y)] for x, y in np.asarray(points)]
            fh.write(json.dumps({"frame": int(frame_idx), "points": pts}) + "\n")


def parse_predictions(path) -> list:
    """Read the JSON-lines landmark format; errors name the offending line."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                frame = int(obj["frame"])
                points = np.asarray(obj["points"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"line {lineno}: malformed prediction record ({exc})") from exc
            if points.shape != (N_LANDMARKS, 2):
                raise ValueError(
                    f"line {lineno}: expected {N_LANDMARKS} [x, y] points, got shape {points.shape}"
                )
            out.append((frame, points))
    return out


def pose_svg(points: np.ndarray, width: int, height: int) -> str:
    """One skeleton as a standalone SVG document string."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape != (N_LANDMARKS, 2):
        raise ValueError(f"expected [17, 2] points, got {points.shape}")
    pts = [(float(x), float(y)) for x, y in points]  # repr of python floats round-trips
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for i, j in SKELETON_EDGES:
        parts.append(
            f'  <line x1="{pts[i][0]!r}" y1="{pts[i][1]!r}" '
            f'x2="{pts[j][0]!r}" y2="{pts[j][1]!r}" {BONE_STYLE}/>'
        )
    for x, y in pts:
        parts.append(f'  <circle cx="{x!r}" cy="{y!r}" {JOINT_STYLE}/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_predictions(predictions_path, out_dir, width: int, height: int) -> list:
    """One SVG file per prediction line; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=False, exist_ok=True)
    written = []
    for frame_idx, points in parse_predictions(predictions_path):
        path = out / f"frame_{frame_idx:06d}.svg"
        path.write_text(pose_svg(points, width, height), encoding="utf-8")
        written.append(path)
    return written
