"""Convolutional landmark regressor over square CSI input tensors.

The stack is a 3x3 stem, four stages of basic residual blocks
(counts 3/4/6/3, widths 64/64/128/256/512 at multiplier 1.0, stride-2
entry into stages 3-5 with 1x1 projection shortcuts), a 1x1 bottleneck
convolution down to 2 coordinate channels, and average pooling of the
resulting [2, L, L] map over one spatial axis to the [2, L] landmark
coordinates.  Normalization is stateless (GroupNorm with a single group),
so the named parameter tensors fully determine the forward pass.

Checkpoints are a directory holding ``manifest.json`` (config, seed, and
an ordered tensor name/shape table) and ``tensors.f32`` (the concatenated
little-endian float32 payload in table order); round-trips are bit-exact.
"""

from __future__ import annotations

import json
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

STAGE_WIDTH_FACTORS = (1, 1, 2, 4, 8)
MIN_CHANNELS = 4
COORD_CHANNELS = 2  # x row and y row of the prediction


@dataclass
class WpnetConfig:
    base_channels: int = 64
    block_counts: tuple = (3, 4, 6, 3)
    input_size: int = 136
    n_landmarks: int = 17
    width_multiplier: float = 1.0
    pool_axis: str = "last"  # which 17-axis of the [2, L, L] head map to average

    def __post_init__(self):
        self.block_counts = tuple(int(c) for c in self.block_counts)
        if len(self.block_counts) != 4 or any(c < 1 for c in self.block_counts):
            raise ValueError(f"block_counts must be four positive counts, got {self.block_counts}")
        if not 0.0 < self.width_multiplier <= 1.0:
            raise ValueError(f"width_multiplier must be in (0, 1], got {self.width_multiplier}")
        if self.pool_axis not in ("last", "first"):
            raise ValueError(f"pool_axis must be 'last' or 'first', got {self.pool_axis!r}")
        s = self.input_size
        for _ in range(3):
            s = (s + 1) // 2  # stride-2 3x3 conv with padding 1 halves (rounding up)
        if s != self.n_landmarks:
            raise ValueError(
                f"input_size {self.input_size} does not reduce to n_landmarks "
                f"{self.n_landmarks} after three stride-2 stages (got {s})"
            )

    def stage_channels(self) -> tuple:
        return tuple(
            max(MIN_CHANNELS, round(self.base_channels * f * self.width_multiplier))
            for f in STAGE_WIDTH_FACTORS
        )


class BasicBlock(nn.Module):
    """Two 3x3 convs with normalization; ReLU after the first and after the add."""

    def __init__(self, cin: int, cout: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cout, 3, stride, 1, bias=False)
        self.norm1 = nn.GroupNorm(1, cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, 1, 1, bias=False)
        self.norm2 = nn.GroupNorm(1, cout)
        if stride != 1 or cin != cout:
            self.proj = nn.Sequential(
                nn.Conv2d(cin, cout, 1, stride, bias=False), nn.GroupNorm(1, cout)
            )
        else:
            self.proj = None

    def forward(self, x):
        shortcut = x if self.proj is None else self.proj(x)
        out = torch.relu(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return torch.relu(out + shortcut)


class WPNet(nn.Module):
    def __init__(self, config: WpnetConfig):
        super().__init__()
        self.config = config
        self.seed = None
        c = config.stage_channels()
        self.stem = nn.Sequential(
            nn.Conv2d(1, c[0], 3, 1, 1, bias=False), nn.GroupNorm(1, c[0]), nn.ReLU()
        )
        cin = c[0]
        for i, (cout, count) in enumerate(zip(c[1:], config.block_counts)):
            stride = 1 if i == 0 else 2
            blocks = [BasicBlock(cin, cout, stride)]
            blocks += [BasicBlock(cout, cout) for _ in range(count - 1)]
            self.add_module(f"stage{i + 2}", nn.Sequential(*blocks))
            cin = cout
        self.bottleneck = nn.Conv2d(c[4], COORD_CHANNELS, 1, bias=True)

    def _check_input(self, x: torch.Tensor) -> tuple:
        s = self.config.input_size
        squeeze = x.dim() == 3
        shape = tuple(x.shape)
        if squeeze:
            ok = shape == (1, s, s)
        else:
            ok = x.dim() == 4 and shape[1:] == (1, s, s)
        if not ok:
            raise ValueError(
                f"input: expected a (1, {s}, {s}) tensor or a batch of them, got {shape}"
            )
        return squeeze

    def stage_outputs(self, x: torch.Tensor) -> "OrderedDict[str, torch.Tensor]":
        """Output tensor of every block boundary, including the pooled head."""
        squeeze = self._check_input(x)
        if squeeze:
            x = x.unsqueeze(0)
        outs = OrderedDict()
        h = x
        for name in ("stem", "stage2", "stage3", "stage4", "stage5", "bottleneck"):
            h = getattr(self, name)(h)
            outs[name] = h
        pooled = h.mean(dim=-1) if self.config.pool_axis == "last" else h.mean(dim=-2)
        outs["output"] = pooled
        if squeeze:
            outs = OrderedDict((k, v.squeeze(0)) for k, v in outs.items())
        return outs

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """[1, S, S] -> [2, L] landmark coordinates (or batched [B, ...])."""
        squeeze = self._check_input(x)
        if squeeze:
            x = x.unsqueeze(0)
        h = self.stem(x)
        h = self.stage2(h)
        h = self.stage3(h)
        h = self.stage4(h)
        h = self.stage5(h)
        h = self.bottleneck(h)
        out = h.mean(dim=-1) if self.config.pool_axis == "last" else h.mean(dim=-2)
        return out.squeeze(0) if squeeze else out


def preferred_memory_format(config: WpnetConfig) -> torch.memory_format:
    """channels_last is much faster on CPU, but this torch build's strided
    1x1 conv backward faults under it below 16 channels; stay contiguous
    for very narrow configs."""
    if min(config.stage_channels()) >= 16:
        return torch.channels_last
    return torch.contiguous_format


def build_wpnet(config: WpnetConfig, seed: int) -> WPNet:
    """Construct and deterministically initialize the regressor.

    Conv kernels are He fan-in normal draws from a generator seeded with
    ``seed``; normalization scales start at 1, all offsets/biases at 0.
    The same (config, seed) yields bitwise-identical parameters.
    """
    model = WPNet(config)
    gen = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for name, p in model.named_parameters():
            if p.dim() == 4:
                fan_in = p.shape[1] * p.shape[2] * p.shape[3]
                p.normal_(0.0, math.sqrt(2.0 / fan_in), generator=gen)
            elif name.endswith("weight"):
                p.fill_(1.0)
            else:
                p.fill_(0.0)
    model.seed = int(seed)
    return model


def save_checkpoint(model: WPNet, dir_path) -> None:
    d = Path(dir_path)
    d.mkdir(parents=False, exist_ok=True)
    sd = model.state_dict()
    table = [{"name": k, "shape": list(v.shape)} for k, v in sd.items()]
    manifest = {"config": asdict(model.config), "seed": model.seed, "tensors": table}
    payload = b"".join(
        v.detach().cpu().contiguous().numpy().astype("<f4").tobytes() for v in sd.values()
    )
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    (d / "tensors.f32").write_bytes(payload)


def load_checkpoint(dir_path) -> WPNet:
    d = Path(dir_path)
    manifest_path = d / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no checkpoint manifest at {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    config = WpnetConfig(**manifest["config"])
    model = WPNet(config)
    model.seed = manifest["seed"]

    raw = np.frombuffer((d / "tensors.f32").read_bytes(), dtype="<f4")
    expected = sum(int(np.prod(e["shape"])) for e in manifest["tensors"])
    if raw.size != expected:
        raise ValueError(
            f"checkpoint payload has {raw.size} floats, manifest implies {expected}"
        )
    sd = OrderedDict()
    offset = 0
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape))
        sd[entry["name"]] = torch.from_numpy(raw[offset:offset + n].reshape(shape).copy())
        offset += n
    model.load_state_dict(sd)
    return model


def pointwise_equiv_check(kernel_1x1, feature_map, tol: float = 1e-6) -> bool:
    """True when a 1x1 convolution equals the per-site linear map.

    ``kernel_1x1`` is [C_out, C_in] (or [C_out, C_in, 1, 1]); ``feature_map``
    is [C_in, H, W].  The convolution route runs through torch; the
    reference route applies the matrix independently at every spatial site.
    """
    k = np.asarray(kernel_1x1, dtype=np.float64)
    if k.ndim == 4:
        if k.shape[2:] != (1, 1):
            raise ValueError(f"kernel spatial extent must be 1x1, got {k.shape}")
        k = k[:, :, 0, 0]
    fm = np.asarray(feature_map, dtype=np.float64)

    conv = torch.conv2d(
        torch.from_numpy(fm).unsqueeze(0), torch.from_numpy(k).unsqueeze(-1).unsqueeze(-1)
    )[0].numpy()

    _, h, w = fm.shape
    sites = np.empty_like(conv)
    for y in range(h):
        for x in range(w):
            sites[:, y, x] = k @ fm[:, y, x]
    return bool(np.max(np.abs(conv - sites)) <= tol)


def sample_coordinates(params: dict, n: int, seed: int) -> list:
    """Uniform sample (without replacement) of ``n`` (tensor_name, flat_index) pairs."""
    flat = [(name, i) for name, p in params.items() for i in range(p.numel())]
    rng = np.random.default_rng(seed)
    if n >= len(flat):
        return flat
    picks = rng.choice(len(flat), size=n, replace=False)
    return [flat[i] for i in picks]


def numeric_gradient(loss_at, params: dict, epsilon: float, coords=None):
    """Central-difference gradient estimate (f(p+e) - f(p-e)) / 2e.

    ``params`` maps names to tensors; they are perturbed in place during
    probing and restored exactly afterwards.  With ``coords`` (a list of
    (name, flat_index) pairs) returns an array aligned with it; with
    ``coords=None`` probes every coordinate and returns a name -> array dict.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")

    def probe(name, idx):
        flat = params[name].detach().view(-1)
        orig = flat[idx].item()
        with torch.no_grad():
            flat[idx] = orig + epsilon
            up = float(loss_at(params))
            flat[idx] = orig - epsilon
            down = float(loss_at(params))
            flat[idx] = orig
        return (up - down) / (2.0 * epsilon)

    if coords is not None:
        return np.array([probe(name, idx) for name, idx in coords])
    return {
        name: np.array([probe(name, i) for i in range(p.numel())]).reshape(tuple(p.shape))
        for name, p in params.items()
    }
