"""Cross-modal training loop: MSE against teacher landmarks, SGD + momentum.

Targets are the teacher pixel annotations normalized to [0, 1] by frame
width/height; the schedule halves the learning rate every ``lr_step``
epochs; the returned parameters are the ones with the best validation
loss.  Given a seed and a single compute thread the loop is fully
deterministic.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
import torch

from . import preprocess
from .dataio import Dataset
from .errors import NonFiniteGradientError, TrainingDivergedError
from .wpnet import WpnetConfig, WPNet, build_wpnet, preferred_memory_format


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    lr0: float = 0.001
    momentum: float = 0.9
    lr_gamma: float = 0.5
    lr_step: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.lr_step < 1:
            raise ValueError("epochs, batch_size and lr_step must be positive")
        if self.lr0 <= 0 or self.momentum < 0:
            raise ValueError("lr0 must be > 0 and momentum >= 0")
        if not 0.0 < self.lr_gamma <= 1.0:
            raise ValueError(f"lr_gamma must be in (0, 1], got {self.lr_gamma}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)  # list[EpochStats]
    best_epoch: int = 0


def mse_loss(pred, target):
    """Mean over every batch/coordinate entry of the squared difference."""
    pred = torch.as_tensor(pred)
    target = torch.as_tensor(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {tuple(pred.shape)} vs target {tuple(target.shape)}")
    return ((pred - target) ** 2).mean()


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """Step schedule: lr0 * gamma^(epoch // lr_step)."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return cfg.lr0 * cfg.lr_gamma ** (epoch // cfg.lr_step)


def sgd_step(params: dict, grads: dict, velocity: dict, lr: float, momentum: float):
    """Classical momentum update: v <- momentum*v + g;  p <- p - lr*v.

    Updates in place and returns (params, velocity).  A non-finite gradient
    aborts the step before any tensor is touched.
    """
    for name, g in grads.items():
        if not bool(torch.isfinite(g).all()):
            raise NonFiniteGradientError(name)
    with torch.no_grad():
        for name, p in params.items():
            v = velocity[name]
            v.mul_(momentum).add_(grads[name])
            p.add_(v, alpha=-lr)
    return params, velocity


def shuffled_batches(n: int, batch_size: int, rng: np.random.Generator):
    """Seeded permutation of range(n) in batch_size chunks; the last partial batch is kept."""
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def normalized_targets(dataset: Dataset, n_landmarks: int) -> torch.Tensor:
    """Teacher annotations as [n, 2, L] in [0, 1]: row 0 is x/width, row 1 is y/height."""
    kp = dataset.keypoints[:, :n_landmarks, :].astype(np.float32)
    t = np.transpose(kp, (0, 2, 1)).copy()
    t[:, 0, :] /= dataset.manifest.frame_width
    t[:, 1, :] /= dataset.manifest.frame_height
    return torch.from_numpy(t)


def denormalize_predictions(pred: torch.Tensor, width: int, height: int) -> np.ndarray:
    """[..., 2, L] normalized coordinates -> [..., L, 2] pixel landmarks."""
    p = pred.detach().cpu().numpy()
    x = p[..., 0, :] * width
    y = p[..., 1, :] * height
    return np.stack([x, y], axis=-1)


def preprocess_all(
    dataset: Dataset, input_size: int, memory_format=torch.contiguous_format
) -> torch.Tensor:
    """Preprocess every sample once; [n, 1, size, size] float32."""
    out = np.empty((len(dataset), 1, input_size, input_size), dtype=np.float32)
    for i in range(len(dataset)):
        out[i] = preprocess.preprocess(dataset.csi[i], input_size)
    return torch.from_numpy(out).to(memory_format=memory_format)


def predict_batched(model: WPNet, inputs: torch.Tensor, batch_size: int = 64) -> torch.Tensor:
    """Forward a [n, 1, S, S] tensor in chunks without gradients; [n, 2, L]."""
    outs = []
    with torch.no_grad():
        for start in range(0, inputs.shape[0], batch_size):
            outs.append(model(inputs[start:start + batch_size]))
    return torch.cat(outs, dim=0)


def train(
    dataset: Dataset,
    splits: dict,
    net_cfg: WpnetConfig,
    train_cfg: TrainConfig,
    log_fn=None,
):
    """Run the full supervision loop; returns (best model, TrainHistory).

    ``splits`` needs "train" and "val" id arrays.  Every epoch visits each
    training sample exactly once in a seeded shuffled order; validation loss
    is evaluated every epoch and the best-epoch parameters are restored into
    the returned model.
    """
    train_ids = np.asarray(splits["train"], dtype=np.int64)
    val_ids = np.asarray(splits["val"], dtype=np.int64)
    if train_ids.size == 0:
        raise ValueError("empty train split")
    if val_ids.size == 0:
        raise ValueError("empty val split")

    fmt = preferred_memory_format(net_cfg)
    inputs = preprocess_all(dataset, net_cfg.input_size, memory_format=fmt)
    targets = normalized_targets(dataset, net_cfg.n_landmarks)

    model = build_wpnet(net_cfg, train_cfg.seed).to(memory_format=fmt)
    params = dict(model.named_parameters())
    velocity = {name: torch.zeros_like(p) for name, p in params.items()}
    rng = np.random.default_rng(train_cfg.seed)

    history = TrainHistory()
    best_val = float("inf")
    best_state = None
    for epoch in range(train_cfg.epochs):
        lr = lr_at(epoch, train_cfg)
        sq_err_sum = 0.0
        n_entries = 0
        for batch in shuffled_batches(train_ids.size, train_cfg.batch_size, rng):
            ids = train_ids[batch]
            pred = model(inputs[ids])
            loss = mse_loss(pred, targets[ids])
            loss_val = float(loss.detach())
            if not np.isfinite(loss_val):
                raise TrainingDivergedError(epoch, loss_val)
            model.zero_grad(set_to_none=True)
            loss.backward()
            grads = {name: p.grad for name, p in params.items()}
            sgd_step(params, grads, velocity, lr, train_cfg.momentum)
            sq_err_sum += loss_val * pred.numel()
            n_entries += pred.numel()
        train_loss = sq_err_sum / n_entries

        val_pred = predict_batched(model, inputs[val_ids])
        val_loss = float(mse_loss(val_pred, targets[val_ids]))
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(epoch, val_loss)

        history.epochs.append(EpochStats(epoch=epoch, train_loss=train_loss, val_loss=val_loss, lr=lr))
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
            history.best_epoch = epoch
        if log_fn is not None:
            log_fn(history.epochs[-1])

    model.load_state_dict(best_state)
    return model, history
