"""Command-line entry points for dataset synthesis, sweeps, renders, and
single-image object removal.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 degenerate
sweep.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    DataError,
    DegenerateMaskError,
    GenerationError,
    ParameterError,
    SweepError,
)
from .experiments import (
    ExperimentConfig,
    eval_one,
    gather_sources,
    render_figures,
    run_alpha_sweep,
    run_dilation_sweep,
    run_mask_family_contrast,
)
from .inpaint import BACKENDS
from .synth import generate_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SWEEP = 4


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


def _extents(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    shared.add_argument("--seed", type=int, help="master seed")
    shared.add_argument("--out", type=Path, help="output directory")
    shared.add_argument("--backend", choices=sorted(BACKENDS), help="inpainting backend")
    shared.add_argument("--jobs", type=int, help="parallel worker processes")
    shared.add_argument("--segment-id", type=int, dest="segment_id",
                        help="use this segment id instead of overlap selection")
    shared.add_argument("--masked-only", action="store_true", default=None,
                        help="restrict PSNR/SSIM to the masked region")
    shared.add_argument("--alpha-units", choices=("normalized", "pixels"), dest="alpha_units",
                        help="interpret alpha in normalized distance or pixels")
    shared.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(
        prog="inpaintmask",
        description="Object-removal mask synthesis, expansion, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[shared], help="generate a paired dataset")
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--scenes", type=int, help="number of procedural source scenes")
    p.add_argument("--extents", type=_extents, help="sample extents, HxW")
    p.add_argument("--sources", type=Path, dest="source_dir",
                   help="ingest annotated scenes (NAME.png + NAME_labels.png/.json) "
                        "instead of procedural ones")
    p.add_argument("--class-filter", type=int, dest="class_filter",
                   help="class id of segments to paste")

    p = sub.add_parser("sweep-dilate", parents=[shared], help="mask rescale sweep")
    p.add_argument("--dataset", type=Path, help="existing dataset directory")
    p.add_argument("--d-values", type=_int_list, dest="d_values",
                   help="comma-separated rescale distances; use the = form "
                        "for negatives, e.g. --d-values=-2,0,2,4,6,8")

    p = sub.add_parser("sweep-alpha", parents=[shared], help="expansion offset sweep")
    p.add_argument("--dataset", type=Path, help="existing dataset directory")
    p.add_argument("--alphas", type=_float_list, dest="alpha_values",
                   help="comma-separated offsets, e.g. 0,0.01,0.03,0.05,0.07")

    p = sub.add_parser("contrast-masks", parents=[shared],
                       help="object mask vs ratio-matched random mask")
    p.add_argument("--dataset", type=Path, help="existing dataset directory")

    p = sub.add_parser("render", parents=[shared], help="rescale panel and offset maps")
    p.add_argument("--dataset", type=Path, help="existing dataset directory")
    p.add_argument("--sample", type=int, dest="sample_index", help="sample index to render")
    p.add_argument("--alphas", type=_float_list, dest="alpha_values",
                   help="offsets to render, one PNG each")

    p = sub.add_parser("eval-one", parents=[shared], help="remove one object from one image")
    p.add_argument("--image", type=Path, required=True, help="input PNG")
    p.add_argument("--labels", type=Path, required=True,
                   help="segment-id PNG (16-bit) with JSON class sidecar")
    p.add_argument("--mask", type=Path, help="target mask PNG for overlap selection")
    p.add_argument("--gt", type=Path, help="ground-truth PNG for metrics")
    p.add_argument("--alpha", type=float, default=0.03, help="expansion offset")

    return parser


_CFG_FLAGS = (
    "seed",
    "backend",
    "jobs",
    "segment_id",
    "masked_only",
    "alpha_units",
    "d_values",
    "alpha_values",
    "sample_index",
)


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {}
    for name in _CFG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "dataset", None) is not None:
        overrides["dataset_dir"] = args.dataset
    if getattr(args, "n", None) is not None:
        overrides["n_samples"] = args.n
    if getattr(args, "scenes", None) is not None:
        overrides["num_scenes"] = args.scenes
    if getattr(args, "extents", None) is not None:
        overrides["extents"] = args.extents
    if getattr(args, "source_dir", None) is not None:
        overrides["source_dir"] = args.source_dir
    if getattr(args, "class_filter", None) is not None:
        overrides["class_filter"] = args.class_filter
    if args.config is not None:
        return ExperimentConfig.from_json_file(args.config, **overrides)
    return ExperimentConfig(**overrides)


def _cmd_synth(args) -> int:
    cfg = _build_config(args)
    out = cfg.out_dir
    manifest = generate_dataset(gather_sources(cfg), cfg.n_samples, cfg.ratio_bins,
                                seed=cfg.seed, out_dir=out, class_filter=cfg.class_filter)
    print(f"wrote {len(manifest['samples'])} samples to {out}")
    return EXIT_OK


def _cmd_sweep(args, runner, label: str) -> int:
    cfg = _build_config(args)
    result = runner(cfg)
    print(f"{label}: {len(result['records'])} records -> {cfg.out_dir}")
    return EXIT_OK


def _cmd_render(args) -> int:
    cfg = _build_config(args)
    result = render_figures(cfg)
    print(f"rendered sample {result['sample_id']}: {len(result['written'])} files")
    return EXIT_OK


def _cmd_eval_one(args) -> int:
    cfg = _build_config(args)
    report = eval_one(
        image_path=args.image,
        labels_path=args.labels,
        out_dir=cfg.out_dir,
        mask_path=args.mask,
        gt_path=args.gt,
        segment_id=cfg.segment_id,
        alpha=args.alpha,
        alpha_units=cfg.alpha_units,
        backend=cfg.backend,
        backend_params=cfg.backend_params,
        fill=cfg.fill,
    )
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "sweep-dilate":
            return _cmd_sweep(args, run_dilation_sweep, "sweep-dilate")
        if args.command == "sweep-alpha":
            return _cmd_sweep(args, run_alpha_sweep, "sweep-alpha")
        if args.command == "contrast-masks":
            return _cmd_sweep(args, run_mask_family_contrast, "contrast-masks")
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "eval-one":
            return _cmd_eval_one(args)
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, GenerationError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SweepError, DegenerateMaskError) as exc:
        print(f"sweep error: {exc}", file=sys.stderr)
        return EXIT_SWEEP


if __name__ == "__main__":
    raise SystemExit(main())
