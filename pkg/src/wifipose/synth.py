"""Synthetic scenes and their CSI observations.

Stands in for a physical transmitter/receiver/camera rig: a scene is a
seeded, smooth 17-landmark trajectory around a canonical standing skeleton,
and its CSI is rendered through an invented pose-to-multipath mapping — a
static line-of-sight path plus one reflection path per tracked body point,
evaluated with :mod:`wifipose.csi`.  None of the geometry below is
calibrated to real hardware; it exists so that pose information is encoded
in the amplitudes smoothly enough to be learnable, and so that every frame
has an exact closed-form channel oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import csi
from .dataio import ANTENNAS, N_LANDMARKS, PACKETS_PER_FRAME, SUBCARRIERS

SPEED_OF_LIGHT = 299792458.0
PIXEL_TO_METERS = 0.01
BODY_DEPTH_M = 1.2  # depth plane the landmarks are lifted onto
ANTENNA_SPACING_M = 0.06  # per-antenna receive offset, vertical axis
CENTER_SUBCARRIER = 57

# Landmarks that spawn reflection paths, in spawn order:
# shoulders, elbows, wrists, hips.  n_body_paths takes a prefix.
REFLECTOR_LANDMARKS = (5, 6, 7, 8, 9, 10, 11, 12)

# Canonical standing skeleton for a 640x480 frame, (x, y) pixels,
# image y pointing down.  Scaled proportionally for other frame sizes.
CANONICAL_POSE_640x480 = np.array(
    [
        (320.0, 120.0),  # Nose
        (330.0, 112.0), (310.0, 112.0),  # eyes
        (342.0, 118.0), (298.0, 118.0),  # ears
        (365.0, 168.0), (275.0, 168.0),  # shoulders
        (388.0, 232.0), (252.0, 232.0),  # elbows
        (398.0, 296.0), (242.0, 296.0),  # wrists
        (350.0, 292.0), (290.0, 292.0),  # hips
        (344.0, 370.0), (296.0, 370.0),  # knees
        (340.0, 444.0), (300.0, 444.0),  # ankles
    ]
)

# Per-joint wobble scale in pixels: how far each joint strays from the
# rigid-body motion on its own.  Arms move a lot, the head barely.
JOINT_WOBBLE_PX = np.array(
    [3, 3, 3, 3, 3, 4, 4, 14, 14, 26, 26, 4, 4, 6, 6, 4, 4], dtype=np.float64
)


@dataclass
class SceneConfig:
    seed: int
    n_frames: int
    frame_width: int = 640
    frame_height: int = 480
    n_body_paths: int = 6
    noise_sigma: float = 0.01
    carrier_hz: float = 5.32e9
    subcarrier_spacing_hz: float = 312.5e3
    tx_pos: tuple = (2.6, 0.0, 1.2)
    rx_pos: tuple = (3.8, 0.0, 1.2)

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ValueError("frame dimensions must be positive")
        if not 1 <= self.n_body_paths <= len(REFLECTOR_LANDMARKS):
            raise ValueError(
                f"n_body_paths must be in [1, {len(REFLECTOR_LANDMARKS)}], got {self.n_body_paths}"
            )


@dataclass
class Scene:
    landmarks_per_frame: np.ndarray  # [n_frames, 17, 2] pixels
    config: SceneConfig


def subcarrier_frequencies(config: SceneConfig) -> np.ndarray:
    """Frequency grid f_s = carrier + (s - 57) * spacing for s in [0, 114)."""
    s = np.arange(SUBCARRIERS, dtype=np.float64)
    return config.carrier_hz + (s - CENTER_SUBCARRIER) * config.subcarrier_spacing_hz


def make_scene(config: SceneConfig) -> Scene:
    """Deterministic smooth pose trajectory for ``config.n_frames`` frames.

    Every joint follows the canonical skeleton plus a shared whole-body
    drift (two sinusoids per axis) plus one small per-joint sinusoid, all
    drawn from the seeded generator; coordinates are clamped to the frame.
    """
    rng = np.random.default_rng(config.seed)
    sx = config.frame_width / 640.0
    sy = config.frame_height / 480.0
    canon = CANONICAL_POSE_640x480 * np.array([sx, sy])

    t = np.arange(config.n_frames, dtype=np.float64)

    def sinusoid(amp, cycles_per_frame, phase):
        return amp * np.sin(2.0 * np.pi * cycles_per_frame * t + phase)

    # Whole-body drift shared by all joints: wide horizontal sweep, slow
    # enough that consecutive frames stay within a couple of pixels.
    drift = np.zeros((config.n_frames, 2))
    for axis, (lo, hi) in ((0, (28.0, 45.0)), (1, (8.0, 14.0))):
        scale = sx if axis == 0 else sy
        for _ in range(2):
            amp = rng.uniform(lo, hi) * scale
            freq = rng.uniform(0.0012, 0.005)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            drift[:, axis] += sinusoid(amp, freq, phase)

    # Per-joint wobble, one sinusoid per axis.
    traj = np.empty((config.n_frames, N_LANDMARKS, 2))
    for j in range(N_LANDMARKS):
        for axis in range(2):
            scale = sx if axis == 0 else sy
            amp = JOINT_WOBBLE_PX[j] * rng.uniform(0.5, 1.0) * scale
            freq = rng.uniform(0.004, 0.015)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            traj[:, j, axis] = canon[j, axis] + drift[:, axis] + sinusoid(amp, freq, phase)

    traj[..., 0] = np.clip(traj[..., 0], 0.0, config.frame_width - 1e-6)
    traj[..., 1] = np.clip(traj[..., 1], 0.0, config.frame_height - 1e-6)
    return Scene(landmarks_per_frame=traj, config=config)


def _lift_to_world(landmarks_px: np.ndarray, config: SceneConfig) -> np.ndarray:
    """Pixel landmarks [..., 2] -> 3-D body points [..., 3] on a fixed depth plane."""
    x = landmarks_px[..., 0] * PIXEL_TO_METERS
    z = (config.frame_height - landmarks_px[..., 1]) * PIXEL_TO_METERS
    y = np.full_like(x, BODY_DEPTH_M)
    return np.stack([x, y, z], axis=-1)


def _packet_landmarks(scene: Scene, frame_idx: int) -> np.ndarray:
    """Landmarks for each of the 32 packets of one frame, [P, 17, 2].

    Packets sample the motion from this frame's pose toward the next
    frame's pose at fractions p/P; the last frame holds its pose.
    """
    lam0 = scene.landmarks_per_frame[frame_idx]
    if frame_idx + 1 < scene.config.n_frames:
        lam1 = scene.landmarks_per_frame[frame_idx + 1]
    else:
        lam1 = lam0
    frac = (np.arange(PACKETS_PER_FRAME) / PACKETS_PER_FRAME)[:, None, None]
    return lam0[None] + (lam1 - lam0)[None] * frac  # exact when the pose is static


def path_geometry(scene: Scene, frame_idx: int) -> tuple[np.ndarray, np.ndarray]:
    """Attenuations and delays of every path, per antenna and packet.

    Returns ``(alphas, taus)`` of shape [antennas, packets, 1 + n_body_paths];
    index 0 on the last axis is the line-of-sight path.  All path phase
    offsets are zero.  Attenuation is 1 / (1 + d_total^2).
    """
    cfg = scene.config
    if not 0 <= frame_idx < cfg.n_frames:
        raise ValueError(f"frame_idx {frame_idx} out of range [0, {cfg.n_frames})")
    lam = _packet_landmarks(scene, frame_idx)  # [P, 17, 2]
    points = _lift_to_world(lam[:, REFLECTOR_LANDMARKS[: cfg.n_body_paths], :], cfg)  # [P, L, 3]
    tx = np.asarray(cfg.tx_pos, dtype=np.float64)

    alphas = np.empty((ANTENNAS, PACKETS_PER_FRAME, 1 + cfg.n_body_paths))
    taus = np.empty_like(alphas)
    for a in range(ANTENNAS):
        rx = np.asarray(cfg.rx_pos, dtype=np.float64) + np.array([0.0, 0.0, ANTENNA_SPACING_M * a])
        d_los = np.linalg.norm(tx - rx)
        d_body = np.linalg.norm(points - tx, axis=-1) + np.linalg.norm(points - rx, axis=-1)
        d = np.concatenate([np.full((PACKETS_PER_FRAME, 1), d_los), d_body], axis=1)
        alphas[a] = 1.0 / (1.0 + d * d)
        taus[a] = d / SPEED_OF_LIGHT
    return alphas, taus


def paths_for(scene: Scene, frame_idx: int, antenna: int, packet: int) -> list[csi.PathComponent]:
    """The explicit path list behind one (antenna, packet) observation."""
    alphas, taus = path_geometry(scene, frame_idx)
    return [
        csi.PathComponent(alpha=float(al), phi=0.0, tau=float(ta))
        for al, ta in zip(alphas[antenna, packet], taus[antenna, packet])
    ]


def render_csi(scene: Scene, frame_idx: int) -> np.ndarray:
    """Amplitude tensor [3, 114, 32] observed for one video frame.

    Deterministic in (config.seed, frame_idx): the additive amplitude noise
    is drawn from a generator keyed on that pair, so frames may be rendered
    in any order or in parallel.  Amplitudes are clamped at zero.
    """
    cfg = scene.config
    alphas, taus = path_geometry(scene, frame_idx)
    freqs = subcarrier_frequencies(cfg)

    frame = np.empty((ANTENNAS, SUBCARRIERS, PACKETS_PER_FRAME))
    for a in range(ANTENNAS):
        # [S, P, L] phase grid; all path phase offsets are zero
        theta = -2.0 * np.pi * freqs[:, None, None] * taus[a][None, :, :]
        h = np.sum(alphas[a][None, :, :] * np.exp(1j * theta), axis=-1)
        frame[a] = np.abs(h)

    if cfg.noise_sigma > 0.0:
        rng = np.random.default_rng([cfg.seed & (2**64 - 1), frame_idx])
        frame = frame + rng.normal(0.0, cfg.noise_sigma, size=frame.shape)
    return np.maximum(frame, 0.0)
