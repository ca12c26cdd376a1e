#!/usr/bin/env python3
"""Short probe of the desk-scale recipe: a few epochs, then test PCK."""

import argparse
import sys
import time

import numpy as np
import torch

from wifipose import dataio, metrics, synth
from wifipose.train import (
    TrainConfig,
    denormalize_predictions,
    predict_batched,
    preprocess_all,
    train,
)
from wifipose.wpnet import WpnetConfig, preferred_memory_format


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=1500)
    ap.add_argument("--epochs", type=int, default=6)
    ap.add_argument("--width", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--lr0", type=float, default=0.001)
    ap.add_argument("--batch-size", type=int, default=32)
    args = ap.parse_args()

    torch.set_num_threads(args.threads)
    t0 = time.time()

    cfg = synth.SceneConfig(seed=args.seed, n_frames=args.frames)
    scene = synth.make_scene(cfg)
    csi = np.stack([synth.render_csi(scene, k) for k in range(args.frames)]).astype(np.float32)
    kps = scene.landmarks_per_frame.astype(np.float32)
    tr, va, te = dataio.split(args.frames, seed=args.seed)
    manifest = dataio.DatasetManifest(
        n_samples=args.frames, frame_width=cfg.frame_width,
        frame_height=cfg.frame_height, split_seed=args.seed,
    )
    ds = dataio.Dataset(csi=csi, keypoints=kps, manifest=manifest,
                        splits={"train": tr, "val": va, "test": te})
    print(f"[{time.time()-t0:6.1f}s] synthesized {args.frames} frames", flush=True)

    net_cfg = WpnetConfig(width_multiplier=args.width)
    train_cfg = TrainConfig(epochs=args.epochs, seed=args.seed, lr0=args.lr0,
                            batch_size=args.batch_size)

    def log(row):
        print(f"[{time.time()-t0:6.1f}s] epoch {row.epoch} lr {row.lr:g} "
              f"train {row.train_loss:.5f} val {row.val_loss:.5f}", flush=True)

    model, history = train(ds, ds.splits, net_cfg, train_cfg, log_fn=log)

    fmt = preferred_memory_format(net_cfg)
    inputs = preprocess_all(ds, net_cfg.input_size, memory_format=fmt)
    pred = predict_batched(model, inputs[te])
    preds_px = denormalize_predictions(pred, cfg.frame_width, cfg.frame_height)
    report = metrics.pck(preds_px, kps[te].astype(np.float64))
    print(metrics.report_table(report))
    print(f"total {time.time()-t0:.0f}s")


if __name__ == "__main__":
    sys.exit(main())
