"""Percentage of Correct Keypoints, per joint and averaged.

A predicted joint counts as correct at threshold ``a`` when its Euclidean
distance to the ground-truth joint, divided by the frame's torso length
(ground-truth right-shoulder to left-hip distance), is <= a.  Thresholds
are given as percentages: PCK@50 means a = 0.5.

Note on the ratio: some write-ups of this metric print the numerator as a
squared norm; a squared distance over a length is not scale-invariant and
cannot produce the customary percentages, so the standard distance form is
used here.  Frames whose torso length is degenerate (below
``torso_epsilon``) are excluded from scoring rather than counted as misses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataio import KEYPOINT_NAMES, L_HIP, N_LANDMARKS, R_SHOULDER

DEFAULT_THRESHOLDS = (5.0, 10.0, 20.0, 30.0, 40.0, 50.0)


@dataclass
class PckConfig:
    thresholds: tuple = DEFAULT_THRESHOLDS  # percentages; a = value / 100
    torso_epsilon: float = 1e-6  # px

    def __post_init__(self):
        self.thresholds = tuple(float(t) for t in self.thresholds)
        if len(self.thresholds) == 0:
            raise ValueError("need at least one threshold")
        if any(not 0.0 < t <= 100.0 for t in self.thresholds):
            raise ValueError(f"thresholds must lie in (0, 100], got {self.thresholds}")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError(f"thresholds must be strictly increasing, got {self.thresholds}")


@dataclass
class PckReport:
    thresholds: tuple
    per_joint: np.ndarray  # [17, n_thresholds] percentages
    average: np.ndarray  # [n_thresholds]
    n_evaluated: int
    n_skipped_degenerate: int


def _validated(preds, gts):
    preds = np.asarray(preds, dtype=np.float64)
    gts = np.asarray(gts, dtype=np.float64)
    if preds.ndim != 3 or preds.shape[1:] != (N_LANDMARKS, 2) or preds.shape != gts.shape:
        raise ValueError(f"expected matching [N, 17, 2] arrays, got {preds.shape} and {gts.shape}")
    if preds.shape[0] < 1:
        raise ValueError("need at least one frame")
    return preds, gts


def correct_rate(preds, gts, a: float, torso_epsilon: float = 1e-6) -> np.ndarray:
    """Per-joint fraction of evaluable frames with normalized error <= a.

    ``a`` is the raw distance/torso ratio (not a percentage); useful for
    probing thresholds outside the standard report grid.
    """
    preds, gts = _validated(preds, gts)
    torso = np.linalg.norm(gts[:, R_SHOULDER] - gts[:, L_HIP], axis=-1)
    valid = torso >= torso_epsilon
    if not valid.any():
        raise ValueError("no evaluable frames")
    dist = np.linalg.norm(preds[valid] - gts[valid], axis=-1)
    return (dist / torso[valid][:, None] <= a).mean(axis=0)


def pck(preds: np.ndarray, gts: np.ndarray, cfg: PckConfig = None) -> PckReport:
    """Score [N, 17, 2] pixel predictions against ground truth.

    The torso normalizer is computed from the ground truth of each frame;
    correctness is inclusive (ratio <= a).  Raises ValueError when no frame
    has a usable torso.
    """
    if cfg is None:
        cfg = PckConfig()
    preds, gts = _validated(preds, gts)

    torso = np.linalg.norm(gts[:, R_SHOULDER] - gts[:, L_HIP], axis=-1)
    valid = torso >= cfg.torso_epsilon
    n_skipped = int((~valid).sum())
    if not valid.any():
        raise ValueError("no evaluable frames")

    dist = np.linalg.norm(preds[valid] - gts[valid], axis=-1)  # [N_valid, 17]
    ratio = dist / torso[valid][:, None]
    thr = np.asarray(cfg.thresholds) / 100.0
    correct = ratio[:, :, None] <= thr[None, None, :]
    per_joint = 100.0 * correct.mean(axis=0)
    return PckReport(
        thresholds=cfg.thresholds,
        per_joint=per_joint,
        average=per_joint.mean(axis=0),
        n_evaluated=int(valid.sum()),
        n_skipped_degenerate=n_skipped,
    )


def report_table(report: PckReport, joint_names=KEYPOINT_NAMES) -> str:
    """Fixed-width text table: one row per joint, Average last, two decimals."""
    if len(joint_names) != report.per_joint.shape[0]:
        raise ValueError("joint_names length does not match the report")
    name_w = max(len(n) for n in (*joint_names, "Keypoint", "Average")) + 2
    header = "Keypoint".ljust(name_w) + "".join(
        f"PCK@{t:g}".rjust(9) for t in report.thresholds
    )
    lines = [header]
    for name, row in zip(joint_names, report.per_joint):
        lines.append(name.ljust(name_w) + "".join(f"{v:9.2f}" for v in row))
    lines.append("Average".ljust(name_w) + "".join(f"{v:9.2f}" for v in report.average))
    return "\n".join(lines) + "\n"


def report_json(report: PckReport, joint_names=KEYPOINT_NAMES) -> str:
    """Machine-readable mirror of the text table."""
    payload = {
        "thresholds": list(report.thresholds),
        "per_joint": {name: row.tolist() for name, row in zip(joint_names, report.per_joint)},
        "average": report.average.tolist(),
        "n_evaluated": report.n_evaluated,
        "n_skipped_degenerate": report.n_skipped_degenerate,
    }
    return json.dumps(payload, indent=2)
