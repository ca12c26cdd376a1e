"""Operator entry point: synth / train / eval / infer / render subcommands.

Every run is driven by a JSON config file (``--config``) whose sections
mirror the library dataclasses — ``{"scene": {...}, "net": {...},
"train": {...}, "pck": {...}}`` — with any field overridable by a
command-line flag.  The environment variable ``WIFIPOSE_SEED`` overrides
the seed last.  Exit codes: 0 success, 1 usage or configuration problem,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np
import torch

from . import dataio, render, synth
from .errors import DatasetCorruptError, NonFiniteGradientError, TrainingDivergedError
from .metrics import PckConfig, pck, report_json, report_table
from .synth import SceneConfig
from .train import (
    TrainConfig,
    denormalize_predictions,
    predict_batched,
    preprocess_all,
    train,
)
from .wpnet import (
    WpnetConfig,
    build_wpnet,
    load_checkpoint,
    preferred_memory_format,
    save_checkpoint,
)

USAGE_ERROR = 1
RUNTIME_ERROR = 2

# (section, field, flag, parser) table driving both the CLI surface and the
# config-file override merge; help text carries the dataclass default.
def _csv_ints(s):
    return tuple(int(v) for v in s.split(","))


def _csv_floats(s):
    return tuple(float(v) for v in s.split(","))


_CONFIG_FIELDS = [
    ("scene", "seed", "--seed", int),
    ("scene", "n_frames", "--n-frames", int),
    ("scene", "frame_width", "--frame-width", int),
    ("scene", "frame_height", "--frame-height", int),
    ("scene", "n_body_paths", "--n-body-paths", int),
    ("scene", "noise_sigma", "--noise-sigma", float),
    ("scene", "carrier_hz", "--carrier-hz", float),
    ("scene", "subcarrier_spacing_hz", "--subcarrier-spacing-hz", float),
    ("scene", "tx_pos", "--tx-pos", _csv_floats),
    ("scene", "rx_pos", "--rx-pos", _csv_floats),
    ("net", "base_channels", "--base-channels", int),
    ("net", "block_counts", "--block-counts", _csv_ints),
    ("net", "input_size", "--input-size", int),
    ("net", "n_landmarks", "--n-landmarks", int),
    ("net", "width_multiplier", "--width-multiplier", float),
    ("net", "pool_axis", "--pool-axis", str),
    ("train", "epochs", "--epochs", int),
    ("train", "batch_size", "--batch-size", int),
    ("train", "lr0", "--lr0", float),
    ("train", "momentum", "--momentum", float),
    ("train", "lr_gamma", "--lr-gamma", float),
    ("train", "lr_step", "--lr-step", int),
    ("pck", "thresholds", "--thresholds", _csv_floats),
    ("pck", "torso_epsilon", "--torso-epsilon", float),
]

_SECTION_DEFAULTS = {
    "scene": {f.name: f.default for f in dataclasses.fields(SceneConfig)
              if f.default is not dataclasses.MISSING},
    "net": {f.name: f.default for f in dataclasses.fields(WpnetConfig)},
    "train": {f.name: f.default for f in dataclasses.fields(TrainConfig)},
    "pck": {f.name: f.default for f in dataclasses.fields(PckConfig)},
}
_SECTION_DEFAULTS["scene"].setdefault("seed", 0)
_SECTION_DEFAULTS["scene"].setdefault("n_frames", 100)


def _add_config_flags(parser, sections):
    for section, fieldname, flag, parse in _CONFIG_FIELDS:
        if section not in sections:
            continue
        default = _SECTION_DEFAULTS[section].get(fieldname)
        parser.add_argument(
            flag,
            dest=f"{section}.{fieldname}",
            type=parse,
            default=None,
            help=f"{section}.{fieldname} (default: {default})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wifipose",
        description="Synthetic-CSI human pose estimation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None, help="JSON config file (default: none)")
        p.add_argument("--threads", type=int, default=1,
                       help="compute threads; keep 1 for bit-reproducible runs (default: 1)")

    p = sub.add_parser("synth", help="generate a synthetic scene and persist its dataset")
    common(p)
    p.add_argument("--out", type=Path, required=True, help="dataset directory to create")
    p.add_argument("--val-frac", type=float, default=0.2, help="validation fraction (default: 0.2)")
    p.add_argument("--test-frac", type=float, default=0.2, help="test fraction (default: 0.2)")
    _add_config_flags(p, {"scene"})

    p = sub.add_parser("train", help="train the landmark regressor on a dataset")
    common(p)
    p.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    p.add_argument("--out", type=Path, required=True,
                   help="output directory for checkpoint/ and history.jsonl")
    p.add_argument("--seed", dest="train.seed", type=int, default=None,
                   help="train.seed (default: 0)")
    _add_config_flags(p, {"net", "train"})

    p = sub.add_parser("eval", help="PCK report for a checkpoint (or a predictions file)")
    common(p)
    p.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    p.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory")
    p.add_argument("--predictions-from-file", type=Path, default=None,
                   help="skip the network; score this JSON-lines landmark file instead")
    p.add_argument("--split", choices=("train", "val", "test", "all"), default="test",
                   help="dataset split to score (default: test)")
    p.add_argument("--out", type=Path, default=None,
                   help="directory for report.txt and report.json (default: print only)")
    _add_config_flags(p, {"pck"})

    p = sub.add_parser("infer", help="forward a dataset split and emit landmark JSON lines")
    common(p)
    p.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    p.add_argument("--checkpoint", type=Path, required=True, help="checkpoint directory")
    p.add_argument("--out", type=Path, required=True, help="output .jsonl path")
    p.add_argument("--split", choices=("train", "val", "test", "all"), default="test",
                   help="dataset split to run (default: test)")

    p = sub.add_parser("render", help="draw skeleton SVGs from a landmark JSON-lines file")
    common(p)
    p.add_argument("--predictions", type=Path, required=True, help="landmark JSON-lines file")
    p.add_argument("--out", type=Path, required=True, help="directory for the SVG files")
    p.add_argument("--frame-width", type=int, default=640, help="canvas width px (default: 640)")
    p.add_argument("--frame-height", type=int, default=480, help="canvas height px (default: 480)")

    return parser


def _merge_section(section: str, args, file_config: dict) -> dict:
    merged = dict(_SECTION_DEFAULTS[section])
    merged.update(file_config.get(section, {}))
    for sec, fieldname, _, _ in _CONFIG_FIELDS:
        if sec != section:
            continue
        value = getattr(args, f"{section}.{fieldname}", None)
        if value is not None:
            merged[fieldname] = value
    return merged


def _load_file_config(args) -> dict:
    if args.config is None:
        return {}
    if not args.config.exists():
        raise FileNotFoundError(f"config file not found: {args.config}")
    return json.loads(args.config.read_text(encoding="utf-8"))


def _seed_override(merged: dict) -> dict:
    env = os.environ.get("WIFIPOSE_SEED")
    if env is not None:
        merged["seed"] = int(env)
    return merged


def _split_ids(dataset: dataio.Dataset, which: str) -> np.ndarray:
    if which == "all":
        return np.arange(len(dataset), dtype=np.int64)
    ids = dataset.splits.get(which)
    if ids is None or len(ids) == 0:
        raise ValueError(f"split {which!r} is empty or missing")
    return ids


def cmd_synth(args) -> int:
    file_config = _load_file_config(args)
    scene_cfg = SceneConfig(**_seed_override(_merge_section("scene", args, file_config)))
    out: Path = args.out
    if not out.parent.exists():
        raise FileNotFoundError(f"output directory parent does not exist: {out.parent}")

    scene = synth.make_scene(scene_cfg)
    n = scene_cfg.n_frames
    csi = np.empty((n, dataio.ANTENNAS, dataio.SUBCARRIERS, dataio.PACKETS_PER_FRAME),
                   dtype=np.float32)
    for k in range(n):
        csi[k] = synth.render_csi(scene, k)
    kps = scene.landmarks_per_frame.astype(np.float32)

    train_ids, val_ids, test_ids = dataio.split(
        n, args.val_frac, args.test_frac, seed=scene_cfg.seed
    )
    manifest = dataio.DatasetManifest(
        n_samples=n,
        frame_width=scene_cfg.frame_width,
        frame_height=scene_cfg.frame_height,
        split_seed=scene_cfg.seed,
    )
    dataset = dataio.Dataset(
        csi=csi, keypoints=kps, manifest=manifest,
        splits={"train": train_ids, "val": val_ids, "test": test_ids},
    )
    dataio.save_dataset(dataset, out)
    print(f"wrote {n} samples to {out}")
    print(f"  csi.f32: {manifest.csi_nbytes()} bytes, keypoints.f32: {manifest.keypoints_nbytes()} bytes")
    print(f"  splits: train={len(train_ids)} val={len(val_ids)} test={len(test_ids)}")
    return 0


def cmd_train(args) -> int:
    file_config = _load_file_config(args)
    net_cfg = WpnetConfig(**_merge_section("net", args, file_config))
    train_section = _merge_section("train", args, file_config)
    train_section.setdefault("seed", 0)
    train_cfg = TrainConfig(**_seed_override(train_section))

    dataset = dataio.load_dataset(args.dataset)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    history_path = out / "history.jsonl"

    with open(history_path, "w", encoding="utf-8") as fh:
        def log_fn(row):
            fh.write(json.dumps(dataclasses.asdict(row)) + "\n")
            fh.flush()
            print(f"epoch {row.epoch:3d}  lr {row.lr:.6g}  "
                  f"train {row.train_loss:.6f}  val {row.val_loss:.6f}")

        model, history = train(dataset, dataset.splits, net_cfg, train_cfg, log_fn=log_fn)

    save_checkpoint(model, out / "checkpoint")
    print(f"best epoch {history.best_epoch} "
          f"(val {history.epochs[history.best_epoch].val_loss:.6f}); "
          f"checkpoint at {out / 'checkpoint'}")
    return 0


def _predictions_for_split(dataset, model, ids) -> np.ndarray:
    if model.config.n_landmarks != dataio.N_LANDMARKS:
        raise ValueError(
            f"checkpoint predicts {model.config.n_landmarks} landmarks; evaluation "
            f"and the interchange format require {dataio.N_LANDMARKS}"
        )
    fmt = preferred_memory_format(model.config)
    inputs = preprocess_all(dataset, model.config.input_size, memory_format=fmt)
    pred = predict_batched(model.to(memory_format=fmt), inputs[ids])
    return denormalize_predictions(
        pred, dataset.manifest.frame_width, dataset.manifest.frame_height
    )


def cmd_eval(args) -> int:
    file_config = _load_file_config(args)
    pck_cfg = PckConfig(**_merge_section("pck", args, file_config))
    dataset = dataio.load_dataset(args.dataset)

    if args.predictions_from_file is not None:
        records = render.parse_predictions(args.predictions_from_file)
        ids = np.array([k for k, _ in records], dtype=np.int64)
        preds = np.stack([p for _, p in records])
    elif args.checkpoint is not None:
        model = load_checkpoint(args.checkpoint)
        ids = _split_ids(dataset, args.split)
        preds = _predictions_for_split(dataset, model, ids)
    else:
        raise ValueError("need either --checkpoint or --predictions-from-file")

    report = pck(preds, dataset.keypoints[ids].astype(np.float64), pck_cfg)
    table = report_table(report)
    print(table, end="")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.txt").write_text(table, encoding="utf-8")
        (args.out / "report.json").write_text(report_json(report), encoding="utf-8")
        print(f"reports written to {args.out}")
    return 0


def cmd_infer(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    model = load_checkpoint(args.checkpoint)
    ids = _split_ids(dataset, args.split)
    preds = _predictions_for_split(dataset, model, ids)
    render.write_predictions(args.out, zip(ids.tolist(), preds))
    print(f"wrote {len(ids)} frames to {args.out}")
    return 0


def cmd_render(args) -> int:
    if not args.predictions.exists():
        raise FileNotFoundError(f"predictions file not found: {args.predictions}")
    written = render.render_predictions(
        args.predictions, args.out, args.frame_width, args.frame_height
    )
    print(f"wrote {len(written)} SVG files to {args.out}")
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "infer": cmd_infer,
    "render": cmd_render,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return 0 if exc.code in (0, None) else USAGE_ERROR

    torch.set_num_threads(max(1, args.threads))
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, NotADirectoryError, DatasetCorruptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (TrainingDivergedError, NonFiniteGradientError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
