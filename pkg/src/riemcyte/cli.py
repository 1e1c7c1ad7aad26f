"""Command line front end.

Four subcommands: ``segment`` previews the nucleus mask for one image,
``train`` fits a classifier on a class-per-directory dataset, ``eval``
scores the held-out split and writes a confusion table (text, CSV, and
figure), ``predict`` labels a single image.

Exit codes: 0 success, 1 usage error, 2 data or decode error, 3 numeric
error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .classify import (
    MdrmModel,
    evaluate,
    load_model,
    mdrm_distances,
    mdrm_train,
    predict,
    save_model,
    tslda_scores,
    tslda_train,
)
from .config import PipelineConfig, load_config
from .dataset import scan_dataset, split_manifest
from .errors import DataError, DimensionMismatchError, NumericError, UsageError
from .imgio import load_image, save_mask
from .pipeline import descriptor_from_image, samples_from_paths, segment_image
from .report import (
    format_confusion_table,
    save_confusion_figure,
    save_segmentation_figure,
    write_confusion_csv,
)


class _Parser(argparse.ArgumentParser):
    """argparse terminates with status 2 on bad usage; we need 1."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="riemcyte",
        description="White blood cell image classification with region covariance "
        "descriptors and SPD-manifold classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="write the nucleus mask for one image")
    seg.add_argument("input", help="input image (.ppm or .png)")
    seg.add_argument("output", help="output mask image path")
    seg.add_argument("--config", help="pipeline config file")
    seg.add_argument("--figure", help="also render an overview figure to this path")
    seg.set_defaults(func=cmd_segment)

    train = sub.add_parser("train", help="fit a classifier on a dataset tree")
    train.add_argument("root", help="dataset root (one directory per class)")
    train.add_argument("--model", required=True, help="output model path")
    train.add_argument("--config", help="pipeline config file")
    train.add_argument("--seed", type=int, help="override the split seed")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="score the held-out split of a dataset")
    ev.add_argument("root", help="dataset root (one directory per class)")
    ev.add_argument("--model", required=True, help="trained model path")
    ev.add_argument("--config", help="pipeline config file")
    ev.add_argument("--seed", type=int, help="override the split seed")
    ev.add_argument(
        "--out",
        default=".",
        help="directory for confusion.csv and confusion.png (default: current)",
    )
    ev.set_defaults(func=cmd_eval)

    pred = sub.add_parser("predict", help="classify a single image")
    pred.add_argument("image", help="input image (.ppm or .png)")
    pred.add_argument("--model", required=True, help="trained model path")
    pred.add_argument("--config", help="pipeline config file")
    pred.set_defaults(func=cmd_predict)
    return parser


def _resolve_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg.validate()


def _check_model_compat(model, cfg: PipelineConfig) -> None:
    n = len(cfg.features)
    if model.n != n:
        raise DimensionMismatchError(
            f"model holds {model.n}x{model.n} descriptors but the config selects "
            f"{n} features; align the 'features' key with the trained model"
        )


def cmd_segment(args) -> int:
    cfg = _resolve_config(args)
    image = load_image(args.input)
    seg = segment_image(image, cfg)
    save_mask(args.output, seg.mask)
    if args.figure:
        save_segmentation_figure(args.figure, image, seg)
    print(f"regions: {len(seg.rois)}")
    for i, roi in enumerate(seg.rois):
        print(f"  roi {i}: bbox=({roi.x0},{roi.y0})-({roi.x1},{roi.y1}) area={roi.area}")
    print(f"mask written to {args.output}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    manifest = scan_dataset(args.root)
    train_pairs, _ = split_manifest(manifest, cfg.split_ratio, cfg.seed)
    samples = samples_from_paths(train_pairs, cfg)
    if cfg.classifier == "mdrm":
        model = mdrm_train(
            samples,
            class_names=manifest.class_names,
            eps=cfg.mean_eps,
            max_iters=cfg.mean_max_iters,
        )
    else:
        model = tslda_train(
            samples,
            gamma=cfg.gamma,
            class_names=manifest.class_names,
            eps=cfg.mean_eps,
            max_iters=cfg.mean_max_iters,
        )
    save_model(args.model, model)
    print("training samples per class:")
    for label, name in enumerate(manifest.class_names):
        count = sum(1 for _, lab in train_pairs if lab == label)
        print(f"  {name}: {count}")
    print(f"model written to {args.model}")
    return 0


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    manifest = scan_dataset(args.root)
    model = load_model(args.model)
    if tuple(model.class_names) != manifest.class_names:
        raise DataError(
            f"model classes {model.class_names} do not match dataset classes "
            f"{manifest.class_names}"
        )
    _check_model_compat(model, cfg)
    _, test_pairs = split_manifest(manifest, cfg.split_ratio, cfg.seed)
    samples = samples_from_paths(test_pairs, cfg)
    cm = evaluate(model, samples)
    print(format_confusion_table(cm))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "confusion.csv"
    fig_path = out_dir / "confusion.png"
    write_confusion_csv(csv_path, cm)
    save_confusion_figure(fig_path, cm)
    print(f"wrote {csv_path} and {fig_path}")
    return 0


def cmd_predict(args) -> int:
    cfg = _resolve_config(args)
    model = load_model(args.model)
    _check_model_compat(model, cfg)
    image = load_image(args.image)
    descriptor, _ = descriptor_from_image(image, cfg)
    label = predict(model, descriptor)
    print(f"predicted class: {model.class_names[label]}")
    if isinstance(model, MdrmModel):
        for name, dist in zip(model.class_names, mdrm_distances(model, descriptor)):
            print(f"  distance {name}: {dist:.6g}")
    else:
        for name, score in zip(model.class_names, tslda_scores(model, descriptor)):
            print(f"  score {name}: {score:.6g}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
