"""Dataset layout, frame/packet synchronization, and deterministic splits.

A dataset directory holds four files:

    manifest.json   UTF-8 JSON, the DatasetManifest fields below
    csi.f32         little-endian float32, sample-major [n, 3, 114, 32]
    keypoints.f32   little-endian float32, [n, 17, 2] pixel coordinates
    splits.json     {"train": [...], "val": [...], "test": [...]} int lists

The byte sizes of the two .f32 payloads are fully determined by the
manifest; any mismatch is treated as corruption.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetCorruptError

ANTENNAS = 3
SUBCARRIERS = 114
PACKETS_PER_FRAME = 32
N_LANDMARKS = 17

# Fixed joint order; indexes into the second-to-last axis of keypoints.f32.
KEYPOINT_NAMES = (
    "Nose",
    "L.Eye",
    "R.Eye",
    "L.Ear",
    "R.Ear",
    "L.Shoulder",
    "R.Shoulder",
    "L.Elbow",
    "R.Elbow",
    "L.Wrist",
    "R.Wrist",
    "L.Hip",
    "R.Hip",
    "L.Knee",
    "R.Knee",
    "L.Ankle",
    "R.Ankle",
)

R_SHOULDER = KEYPOINT_NAMES.index("R.Shoulder")  # 6
L_HIP = KEYPOINT_NAMES.index("L.Hip")  # 11

# Standard 17-joint skeleton edge list in the order above.
SKELETON_EDGES = (
    (15, 13), (13, 11), (16, 14), (14, 12), (11, 12),
    (5, 11), (6, 12), (5, 6), (5, 7), (6, 8),
    (7, 9), (8, 10), (1, 2), (0, 1), (0, 2),
    (1, 3), (2, 4), (3, 5), (4, 6),
)

FORMAT_VERSION = 1


@dataclass
class DatasetManifest:
    n_samples: int
    frame_width: int
    frame_height: int
    split_seed: int
    antennas: int = ANTENNAS
    subcarriers: int = SUBCARRIERS
    packets_per_frame: int = PACKETS_PER_FRAME
    format_version: int = FORMAT_VERSION

    def csi_nbytes(self) -> int:
        return self.n_samples * self.antennas * self.subcarriers * self.packets_per_frame * 4

    def keypoints_nbytes(self) -> int:
        return self.n_samples * N_LANDMARKS * 2 * 4


@dataclass
class SyncSample:
    """One synchronized pair: a CSI frame and its teacher annotation."""

    csi: np.ndarray  # [antennas, subcarriers, packets]
    annotation: np.ndarray  # [17, 2] pixels
    frame_index: int


@dataclass
class Dataset:
    csi: np.ndarray  # [n, antennas, subcarriers, packets] float32
    keypoints: np.ndarray  # [n, 17, 2] float32
    manifest: DatasetManifest
    splits: dict  # {"train": ndarray, "val": ndarray, "test": ndarray}

    def __len__(self) -> int:
        return self.manifest.n_samples

    def sample(self, i: int) -> SyncSample:
        return SyncSample(csi=self.csi[i], annotation=self.keypoints[i], frame_index=i)


def window_for_frame(frame_idx: int, packets_per_frame: int) -> tuple[int, int]:
    """Half-open packet range [k*P, (k+1)*P) synchronized to video frame k."""
    if packets_per_frame < 1:
        raise ValueError(f"packets_per_frame must be >= 1, got {packets_per_frame}")
    start = frame_idx * packets_per_frame
    return start, start + packets_per_frame


def split(
    n: int, val_frac: float = 0.2, test_frac: float = 0.2, seed: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic train/val/test partition of range(n).

    Sizes are val = ceil(val_frac*n), test = ceil(test_frac*n), train is the
    remainder; this sizing is what turns a 13377-sample corpus into
    8025/2676/2676 at the default fractions.  Membership comes from one
    seeded uniform shuffle.  Raises ValueError when any split would be empty.
    """
    if val_frac + test_frac >= 1.0:
        raise ValueError("val_frac + test_frac must be < 1")
    n_val = math.ceil(val_frac * n)
    n_test = math.ceil(test_frac * n)
    n_train = n - n_val - n_test
    if n_train <= 0 or n_val <= 0 or n_test <= 0:
        raise ValueError("cannot form three non-empty splits")
    perm = np.random.default_rng(seed).permutation(n)
    val_ids = np.sort(perm[:n_val])
    test_ids = np.sort(perm[n_val:n_val + n_test])
    train_ids = np.sort(perm[n_val + n_test:])
    return train_ids, val_ids, test_ids


def save_dataset(dataset: Dataset, dir_path) -> None:
    """Persist a dataset directory; see module docstring for the layout."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    m = dataset.manifest
    csi = np.ascontiguousarray(dataset.csi, dtype="<f4")
    kps = np.ascontiguousarray(dataset.keypoints, dtype="<f4")
    if csi.shape != (m.n_samples, m.antennas, m.subcarriers, m.packets_per_frame):
        raise ValueError(f"csi shape {csi.shape} inconsistent with manifest")
    if kps.shape != (m.n_samples, N_LANDMARKS, 2):
        raise ValueError(f"keypoints shape {kps.shape} inconsistent with manifest")
    csi.tofile(d / "csi.f32")
    kps.tofile(d / "keypoints.f32")
    (d / "manifest.json").write_text(json.dumps(asdict(m), indent=2), encoding="utf-8")
    splits_out = {k: np.asarray(v).tolist() for k, v in dataset.splits.items()}
    (d / "splits.json").write_text(json.dumps(splits_out), encoding="utf-8")


def load_dataset(dir_path) -> Dataset:
    """Load a dataset directory, verifying payload sizes against the manifest."""
    d = Path(dir_path)
    manifest_path = d / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no dataset manifest at {manifest_path}")
    m = DatasetManifest(**json.loads(manifest_path.read_text(encoding="utf-8")))

    csi_path = d / "csi.f32"
    kp_path = d / "keypoints.f32"
    for path, expected in ((csi_path, m.csi_nbytes()), (kp_path, m.keypoints_nbytes())):
        if not path.exists():
            raise FileNotFoundError(f"missing dataset payload {path}")
        actual = path.stat().st_size
        if actual != expected:
            raise DatasetCorruptError(
                f"{path.name} is {actual} bytes, manifest implies {expected}"
            )

    csi = np.fromfile(csi_path, dtype="<f4").reshape(
        m.n_samples, m.antennas, m.subcarriers, m.packets_per_frame
    )
    kps = np.fromfile(kp_path, dtype="<f4").reshape(m.n_samples, N_LANDMARKS, 2)
    splits_raw = json.loads((d / "splits.json").read_text(encoding="utf-8"))
    splits = {k: np.asarray(v, dtype=np.int64) for k, v in splits_raw.items()}
    return Dataset(csi=csi, keypoints=kps, manifest=m, splits=splits)
