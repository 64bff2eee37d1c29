"""Command-line entry point.

Subcommands: train, conceal, reveal, detect, evaluate, histogram.

Exit codes: 0 success, 2 configuration error, 3 data error (unreadable
files, bad checkpoints, undersized datasets), 4 numeric divergence during
training, 5 image dimension mismatch.

Runs are reproducible from (config file, seed): every command that writes
into an output directory also echoes its effective configuration there.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import torch

from .checkpoint import load_checkpoint
from .config import TrainConfig
from .data import IMAGE_EXTENSIONS, load_image, load_images, save_image
from .errors import (CheckpointError, ConfigError, DataError, DimensionError,
                     DivergenceError)
from .evaluation import (generate_eval_stegos, psnr_histogram,
                         report_from_scores, sweep_table)
from .inn import InnModel, ModelConfig
from .pipeline import conceal, detect, residual_augment, reveal
from .training import train

_SECTION_DEFAULTS = {
    "model": asdict(ModelConfig()),
    "train": {
        "learning_rate": 3e-5,
        "batch_size": 8,
        "epochs": 50,
        "crop_size": 224,
        "loss_weights": [1.0, 10.0, 5.0, 5.0],
        "seed": 0,
        "betas": [0.9, 0.999],
        "weight_decay": 0.0,
        "max_steps": None,
        "ra_enabled": True,
    },
    "paths": {"dataset_dir": None, "checkpoint": None, "output_dir": None},
    "eval": {"threshold_db": 25.0, "lam_mode": "zero", "lam": 0.0, "seed": 0},
}


def load_run_config(path) -> dict:
    """Read a run-config JSON file, applying defaults and rejecting unknown keys."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root in {path} must be a JSON object")
    raw = dict(raw)
    resolved = {}
    for section, defaults in _SECTION_DEFAULTS.items():
        given = raw.pop(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"config section {section!r} must be a JSON object")
        merged = dict(defaults)
        for key, value in given.items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {section}.{key}")
            merged[key] = value
        resolved[section] = merged
    if raw:
        raise ConfigError("unknown config section(s): " + ", ".join(sorted(raw)))
    return resolved


def default_run_config() -> dict:
    return {section: dict(values) for section, values in _SECTION_DEFAULTS.items()}


def build_train_config(resolved: dict) -> TrainConfig:
    model = ModelConfig(**resolved["model"])
    t = resolved["train"]
    return TrainConfig(learning_rate=t["learning_rate"], batch_size=t["batch_size"],
                       epochs=t["epochs"], crop_size=t["crop_size"],
                       loss_weights=tuple(t["loss_weights"]), seed=t["seed"],
                       model=model, betas=tuple(t["betas"]),
                       weight_decay=t["weight_decay"], max_steps=t["max_steps"],
                       ra_enabled=t["ra_enabled"])


def _echo_config(resolved: dict, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "effective_config.json"
    path.write_text(json.dumps(resolved, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _load_model(checkpoint_path) -> InnModel:
    model = load_checkpoint(checkpoint_path).to_model()
    model.eval()
    return model


def _generator(seed: int) -> torch.Generator:
    gen = torch.Generator()
    gen.manual_seed(int(seed))
    return gen


def _image_paths(target) -> list:
    target = Path(target)
    if target.is_dir():
        paths = sorted(p for p in target.iterdir()
                       if p.suffix.lower() in IMAGE_EXTENSIONS)
        if not paths:
            raise DataError(f"no image files in {target}")
        return paths
    if target.is_file():
        return [target]
    raise DataError(f"no such file or directory: {target}")


def cmd_train(args) -> int:
    resolved = load_run_config(args.config)
    if args.seed is not None:
        resolved["train"]["seed"] = args.seed
    if args.dataset is not None:
        resolved["paths"]["dataset_dir"] = str(args.dataset)
    if args.out is not None:
        resolved["paths"]["output_dir"] = str(args.out)
    dataset_dir = resolved["paths"]["dataset_dir"]
    out_dir = resolved["paths"]["output_dir"]
    if dataset_dir is None:
        raise ConfigError("paths.dataset_dir is required for training")
    if out_dir is None:
        raise ConfigError("paths.output_dir is required for training")
    cfg = build_train_config(resolved)
    out_dir = Path(out_dir)
    _echo_config(resolved, out_dir)
    ckpt = train(dataset_dir, cfg, out_dir)
    print(f"trained {ckpt.step} steps ({ckpt.epoch} epochs); "
          f"checkpoints in {out_dir}")
    return 0


def cmd_conceal(args) -> int:
    model = _load_model(args.checkpoint)
    cover = load_image(args.cover)
    secret = load_image(args.secret)
    if cover.shape != secret.shape:
        raise DimensionError(
            f"cover {tuple(cover.shape)} and secret {tuple(secret.shape)} differ")
    with torch.no_grad():
        init_stego = conceal(model, secret, cover)
        stego = residual_augment(cover, init_stego, args.lam)
    save_image(stego, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_reveal(args) -> int:
    model = _load_model(args.checkpoint)
    image = load_image(args.image)
    with torch.no_grad():
        recovered = reveal(model, image, _generator(args.seed))
    save_image(recovered, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_detect(args) -> int:
    model = _load_model(args.checkpoint)
    gen = _generator(args.seed)
    records = []
    with torch.no_grad():
        for path in _image_paths(args.target):
            result = detect(model, load_image(path), args.threshold, gen)
            records.append({"path": str(path), "psnr_db": result.psnr_db,
                            "verdict": result.verdict,
                            "threshold_db": result.threshold_db})
    if args.json:
        print(json.dumps(records, indent=2))
    else:
        for rec in records:
            print(f"{rec['path']}\t{rec['psnr_db']:.4f}\t{rec['verdict']}")
    return 0


def cmd_evaluate(args) -> int:
    resolved = load_run_config(args.config) if args.config else default_run_config()
    eval_cfg = resolved["eval"]
    if args.threshold is not None:
        eval_cfg["threshold_db"] = args.threshold
    if args.lam_mode is not None:
        eval_cfg["lam_mode"] = args.lam_mode
    if args.lam is not None:
        eval_cfg["lam"] = args.lam
    if args.seed is not None:
        eval_cfg["seed"] = args.seed
    out_dir = Path(args.out)
    resolved["paths"]["checkpoint"] = str(args.checkpoint)
    resolved["paths"]["output_dir"] = str(out_dir)
    _echo_config(resolved, out_dir)

    model = _load_model(args.checkpoint)
    covers = load_images(args.covers)
    secrets = load_images(args.secrets)
    threshold = float(eval_cfg["threshold_db"])
    gen = _generator(eval_cfg["seed"])

    stegos = generate_eval_stegos(
        model, covers, [secrets[i % len(secrets)] for i in range(len(covers))],
        lam_mode=eval_cfg["lam_mode"], generator=gen, lam=float(eval_cfg["lam"]))

    cover_rows = psnr_histogram(model, covers, gen)
    stego_rows = psnr_histogram(model, stegos, gen)
    cover_scores = [score for _, score in cover_rows]
    stego_scores = [score for _, score in stego_rows]
    report = report_from_scores(cover_scores, stego_scores, threshold)

    (out_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    with open(out_dir / "histogram.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("image_id", "label", "psnr_db"))
        for i, (_, score) in enumerate(cover_rows):
            writer.writerow((f"cover_{i:04d}", "cover", repr(score)))
        for i, (_, score) in enumerate(stego_rows):
            writer.writerow((f"stego_{i:04d}", "stego", repr(score)))
    with open(out_dir / "sweep.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("threshold_db", "balanced_accuracy"))
        for thr, acc in sweep_table(cover_scores, stego_scores,
                                    extra_thresholds=(threshold,)):
            writer.writerow((repr(thr), repr(acc)))
    print(f"accuracy {report.accuracy:.4f} at threshold {threshold:.2f} dB; "
          f"report in {out_dir}")
    return 0


def cmd_histogram(args) -> int:
    model = _load_model(args.checkpoint)
    paths = _image_paths(args.images)
    images = [load_image(p) for p in paths]
    rows = psnr_histogram(model, images, _generator(args.seed),
                          ids=[str(p) for p in paths])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "histogram.csv"
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("image_id", "label", "psnr_db"))
        for image_id, score in rows:
            writer.writerow((image_id, "unknown", repr(score)))
    scores = [s for _, s in rows]
    print(f"{len(rows)} images; mean psnr {sum(scores) / len(scores):.2f} dB; "
          f"wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zsiis",
        description="Invertible-network image hiding, revealing, and steganalysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a run-config JSON file")
    p.add_argument("--config", required=True, help="run-config JSON path")
    p.add_argument("--seed", type=int, default=None, help="override train.seed")
    p.add_argument("--dataset", default=None, help="override paths.dataset_dir")
    p.add_argument("--out", default=None, help="override paths.output_dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("conceal", help="hide a secret image inside a cover image")
    p.add_argument("checkpoint")
    p.add_argument("cover")
    p.add_argument("secret")
    p.add_argument("out")
    p.add_argument("--lam", type=float, default=0.0,
                   help="residual factor in [0,1]; 0 keeps the pure stego")
    p.set_defaults(func=cmd_conceal)

    p = sub.add_parser("reveal", help="recover hidden content from an image")
    p.add_argument("checkpoint")
    p.add_argument("image")
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("detect", help="classify images as cover or stego")
    p.add_argument("checkpoint")
    p.add_argument("target", help="image file or directory")
    p.add_argument("--threshold", type=float, default=25.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="emit a JSON array")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate",
                       help="detection accuracy over cover/secret directories")
    p.add_argument("checkpoint")
    p.add_argument("--covers", required=True, help="directory of cover images")
    p.add_argument("--secrets", required=True, help="directory of secret images")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", default=None, help="optional run-config JSON")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--lam-mode", choices=("zero", "uniform", "fixed"), default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("histogram", help="per-image reveal PSNR scores")
    p.add_argument("checkpoint")
    p.add_argument("images", help="image directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_histogram)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, CheckpointError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
