"""Experiment harness: dataset synthesis, the mask-rescale sweep, the
expansion-offset sweep, object-vs-random mask contrast, and figure renders.

Each sweep iterates samples (optionally across a process pool), records
per-sample metrics, and writes deterministic CSV tables plus a JSON summary.
Per-sample seeds make results independent of worker count and ordering.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, DegenerateMaskError, SweepError
from .expansion import coverage_stats, expand_mask, segment_preview, select_segment
from .image import (
    BinaryMask,
    Image,
    apply_mask,
    load_image,
    load_label_map,
    load_mask,
    save_image,
    save_mask,
)
from .inpaint import BACKENDS, InpaintRequest, run_inpaint
from .losses import LossWeights
from .metrics import (
    MetricsRecord,
    aggregate,
    bin_for_ratio,
    psnr,
    ssim,
    write_aggregate_csv,
    write_records_csv,
)
from .morphology import dilate, erode, rescale_mask
from .sdf import level_contour, normalize_sdf, render_offset_map, signed_distance
from .synth import (
    DEFAULT_BINS,
    LoadedSample,
    build_procedural_sources,
    generate_dataset,
    load_dataset,
    load_scene_sources,
    random_irregular_mask,
)

log = logging.getLogger(__name__)

_PERTURB_SALT = 7919
_CONTRAST_SALT = 104729


@dataclass
class ExperimentConfig:
    """Everything a sweep needs; serializable to/from a JSON config block."""

    out_dir: Path = Path("out")
    dataset_dir: Path | None = None
    source_dir: Path | None = None
    n_samples: int = 200
    extents: tuple[int, int] = (128, 128)
    ratio_bins: tuple[tuple[float, float], ...] = DEFAULT_BINS
    num_scenes: int = 12
    class_filter: int = 1
    seed: int = 0
    backend: str = "diffusion"
    backend_params: dict = field(default_factory=dict)
    d_values: tuple[int, ...] = (-2, 0, 2, 4, 6, 8)
    alpha_values: tuple[float, ...] = (0.0, 0.01, 0.03, 0.05, 0.07)
    alpha_units: str = "normalized"
    weights: LossWeights = field(default_factory=LossWeights)
    jobs: int = 1
    masked_only: bool = False
    segment_id: int | None = None
    fill: float = 0.0
    perturb_max_erosion: int = 2
    perturb_flip_prob: float = 0.05
    sample_index: int = 0

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if self.dataset_dir is not None:
            self.dataset_dir = Path(self.dataset_dir)
        if self.source_dir is not None:
            self.source_dir = Path(self.source_dir)
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend '{self.backend}'")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.alpha_units not in ("normalized", "pixels"):
            raise ConfigError("alpha_units must be 'normalized' or 'pixels'")
        if not self.d_values or not self.alpha_values:
            raise ConfigError("sweep value lists must be non-empty")

    @classmethod
    def from_json_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if "weights" in raw and isinstance(raw["weights"], dict):
            raw["weights"] = LossWeights(**raw["weights"])
        for key in ("ratio_bins", "d_values", "alpha_values", "extents"):
            if key in raw:
                raw[key] = tuple(tuple(v) if isinstance(v, list) else v for v in raw[key]) \
                    if key == "ratio_bins" else tuple(raw[key])
        raw.update(overrides)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["out_dir"] = str(self.out_dir)
        d["dataset_dir"] = None if self.dataset_dir is None else str(self.dataset_dir)
        return d


def gather_sources(cfg: ExperimentConfig):
    """Scene corpus for synthesis: ingested from source_dir when set, else procedural."""
    if cfg.source_dir is not None:
        return load_scene_sources(cfg.source_dir)
    return build_procedural_sources(cfg.num_scenes, cfg.extents, seed=cfg.seed)


def ensure_dataset(cfg: ExperimentConfig) -> list[LoadedSample]:
    """Load the configured dataset, synthesizing the bundled suite if absent."""
    ddir = cfg.dataset_dir if cfg.dataset_dir is not None else cfg.out_dir / "dataset"
    if not (Path(ddir) / "manifest.json").exists():
        if cfg.dataset_dir is not None:
            raise DataError(f"dataset {cfg.dataset_dir} has no manifest.json")
        log.info("synthesizing %d-sample dataset under %s", cfg.n_samples, ddir)
        generate_dataset(gather_sources(cfg), cfg.n_samples, cfg.ratio_bins,
                         seed=cfg.seed, out_dir=ddir, class_filter=cfg.class_filter)
    samples = load_dataset(ddir)
    if not samples:
        raise DataError(f"dataset {ddir} is empty")
    return samples


def perturb_segment(
    mask: BinaryMask,
    rng: np.random.Generator,
    max_erosion: int = 2,
    flip_prob: float = 0.05,
) -> BinaryMask:
    """Imperfect-segmentation stand-in: random erosion plus boundary flip noise.

    Erosion radius is uniform on {0..max_erosion} (reduced if it would
    empty the mask); each pixel within 1 px of the eroded boundary then
    flips with probability flip_prob.
    """
    r = int(rng.integers(0, max_erosion + 1))
    m = mask
    while r > 0:
        candidate = erode(mask, r)
        if not candidate.is_empty():
            m = candidate
            break
        r -= 1
    band = dilate(m, 1).as_bool() & ~erode(m, 1).as_bool()
    flips = band & (rng.random(mask.extents) < flip_prob)
    out = m.as_bool() ^ flips
    if not out.any():
        return m
    return BinaryMask(out)


def _metrics_pair(sample: LoadedSample, inpainted: Image, masked_only: bool,
                  metric_mask: BinaryMask) -> tuple[float, float]:
    mask = metric_mask if masked_only else None
    return (
        psnr(sample.ground_truth, inpainted, mask=mask),
        ssim(sample.ground_truth, inpainted, mask=mask),
    )


def _inpaint_with(cfg_backend: str, params: dict, masked_input: Image, mask: BinaryMask) -> Image:
    req = InpaintRequest(masked_input=masked_input, mask=mask,
                         backend=cfg_backend, params=params)
    return run_inpaint(req)


# ---------------------------------------------------------------------------
# Mask-rescale (dilation/erosion) sweep
# ---------------------------------------------------------------------------


def _dilation_task(args) -> tuple[str, list[MetricsRecord] | None]:
    sample, cfg = args
    rescaled = {}
    try:
        for d in cfg.d_values:
            m = rescale_mask(sample.mask, d)
            if m.is_full():
                raise DegenerateMaskError(f"d={d} filled the frame")
            rescaled[d] = m
    except DegenerateMaskError:
        # one degenerate condition disqualifies the sample everywhere,
        # keeping per-condition populations identical
        return sample.id, None
    blabel = bin_for_ratio(sample.mask.ratio_percent(), cfg.ratio_bins)
    rows = []
    for d in cfg.d_values:
        m = rescaled[d]
        masked_input = apply_mask(sample.input, m, cfg.fill)
        out = _inpaint_with(cfg.backend, cfg.backend_params, masked_input, m)
        p, s = _metrics_pair(sample, out, cfg.masked_only, m)
        rows.append(
            MetricsRecord(
                sample_id=sample.id,
                condition=f"d={d}",
                bin_label=blabel,
                mask_ratio=sample.mask.ratio_percent(),
                psnr=p,
                ssim=s,
                coverage=coverage_stats(m, sample.mask),
            )
        )
    return sample.id, rows


def _run_tasks(task_fn, tasks, jobs: int) -> list:
    if jobs <= 1:
        return [task_fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task_fn, tasks))


def _ordered_cells(records, condition_order: list[str]):
    cells = aggregate(records)
    rank = {c: i for i, c in enumerate(condition_order)}
    return sorted(cells, key=lambda c: (rank.get(c.condition, len(rank)), c.bin_label))


def run_dilation_sweep(cfg: ExperimentConfig) -> dict:
    """Rescale every sample's mask by each d, inpaint, and tabulate PSNR/SSIM.

    Writes records_dilation.csv, sweep_dilation.csv, and
    summary_dilation.json under cfg.out_dir.
    """
    samples = ensure_dataset(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    results = _run_tasks(_dilation_task, [(s, cfg) for s in samples], cfg.jobs)

    skipped = sorted(sid for sid, rows in results if rows is None)
    for sid in skipped:
        log.warning("sample %s skipped: rescale degenerated", sid)
    records = [r for _, rows in results if rows is not None for r in rows]
    if not records:
        raise SweepError("every sample degenerated under the requested d values")

    order = [f"d={d}" for d in cfg.d_values]
    cells = _ordered_cells(records, order)
    write_records_csv(records, cfg.out_dir / "records_dilation.csv")
    write_aggregate_csv(cells, cfg.out_dir / "sweep_dilation.csv")
    summary = _dilation_summary(cells, cfg.d_values, skipped)
    (cfg.out_dir / "summary_dilation.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return {"records": records, "cells": cells, "summary": summary, "skipped": skipped}


def _dilation_summary(cells, d_values, skipped) -> dict:
    by_bin: dict[str, dict] = {}
    for cell in cells:
        d = int(cell.condition.split("=", 1)[1])
        by_bin.setdefault(cell.bin_label, {})[d] = cell.psnr_mean
    bins_out = {}
    for blabel, table in sorted(by_bin.items()):
        entry: dict = {"psnr_by_d": {str(d): table[d] for d in sorted(table)}}
        if {-2, 0, 2} <= set(table):
            entry["drop_erode2"] = table[0] - table[-2]
            entry["drop_dilate2"] = table[0] - table[2]
            entry["erosion_asymmetry"] = entry["drop_erode2"] > entry["drop_dilate2"]
        grow = [d for d in sorted(table) if d >= 0]
        diffs = [table[b] - table[a] for a, b in zip(grow, grow[1:])]
        inversions = [x for x in diffs if x > 0]
        entry["dilation_inversions"] = len(inversions)
        entry["max_inversion_db"] = max(inversions) if inversions else 0.0
        bins_out[blabel] = entry
    return {"d_values": list(d_values), "bins": bins_out, "skipped_samples": skipped}


# ---------------------------------------------------------------------------
# Expansion-offset (alpha) sweep
# ---------------------------------------------------------------------------


def _alpha_task(args) -> tuple[str, list[MetricsRecord]]:
    sample, cfg = args
    rng = np.random.default_rng([cfg.seed, _PERTURB_SALT, int(sample.id)])
    perturbed = perturb_segment(
        sample.mask, rng, cfg.perturb_max_erosion, cfg.perturb_flip_prob
    )
    blabel = bin_for_ratio(sample.mask.ratio_percent(), cfg.ratio_bins)
    rows = []
    for a in cfg.alpha_values:
        m = expand_mask(perturbed, a, cfg.alpha_units)
        if m.is_full():
            log.warning("sample %s alpha=%g expanded to the full frame; skipped", sample.id, a)
            continue
        masked_input = apply_mask(sample.input, m, cfg.fill)
        out = _inpaint_with(cfg.backend, cfg.backend_params, masked_input, m)
        p, s = _metrics_pair(sample, out, cfg.masked_only, m)
        rows.append(
            MetricsRecord(
                sample_id=sample.id,
                condition=f"alpha={a:g}",
                bin_label=blabel,
                mask_ratio=sample.mask.ratio_percent(),
                psnr=p,
                ssim=s,
                coverage=coverage_stats(m, sample.mask),
            )
        )
    return sample.id, rows


def run_alpha_sweep(cfg: ExperimentConfig) -> dict:
    """Perturb each ground-truth segment, expand at each alpha, inpaint, tabulate.

    Writes records_alpha.csv, sweep_alpha.csv, and summary_alpha.json.
    """
    samples = ensure_dataset(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    results = _run_tasks(_alpha_task, [(s, cfg) for s in samples], cfg.jobs)
    records = [r for _, rows in results for r in rows]
    if not records:
        raise SweepError("alpha sweep produced no usable samples")

    order = [f"alpha={a:g}" for a in cfg.alpha_values]
    cells = _ordered_cells(records, order)
    write_records_csv(records, cfg.out_dir / "records_alpha.csv")
    write_aggregate_csv(cells, cfg.out_dir / "sweep_alpha.csv")
    summary = _alpha_summary(records, cfg.alpha_values)
    (cfg.out_dir / "summary_alpha.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return {"records": records, "cells": cells, "summary": summary}


def _alpha_summary(records, alpha_values) -> dict:
    by_alpha: dict[str, list] = {}
    for r in records:
        by_alpha.setdefault(r.condition, []).append(r)
    table = {}
    for a in alpha_values:
        group = by_alpha.get(f"alpha={a:g}", [])
        if not group:
            continue
        finite = [r.psnr for r in group if not math.isinf(r.psnr)]
        table[f"{a:g}"] = {
            "psnr_mean": float(np.mean(finite)) if finite else math.inf,
            "ssim_mean": float(np.mean([r.ssim for r in group])),
            "missed_mean": float(np.mean([r.coverage.missed for r in group])),
            "excess_mean": float(np.mean([r.coverage.excess for r in group])),
        }
    best = max(table, key=lambda k: table[k]["psnr_mean"]) if table else None
    return {"alpha_values": [float(a) for a in alpha_values], "overall": table,
            "best_alpha": best}


# ---------------------------------------------------------------------------
# Object-mask vs random-mask contrast
# ---------------------------------------------------------------------------


def _contrast_task(args) -> tuple[str, list[MetricsRecord]]:
    sample, cfg = args
    blabel = bin_for_ratio(sample.mask.ratio_percent(), cfg.ratio_bins)
    random_mask = random_irregular_mask(
        sample.mask.extents,
        sample.mask.ratio_percent(),
        seed=[cfg.seed, _CONTRAST_SALT, int(sample.id)],
    )
    rows = []
    for condition, m in (("object", sample.mask), ("random", random_mask)):
        masked_input = apply_mask(sample.input, m, cfg.fill)
        out = _inpaint_with(cfg.backend, cfg.backend_params, masked_input, m)
        p, s = _metrics_pair(sample, out, cfg.masked_only, m)
        rows.append(
            MetricsRecord(
                sample_id=sample.id,
                condition=condition,
                bin_label=blabel,
                mask_ratio=m.ratio_percent(),
                psnr=p,
                ssim=s,
                coverage=coverage_stats(m, sample.mask),
            )
        )
    return sample.id, rows


def run_mask_family_contrast(cfg: ExperimentConfig) -> dict:
    """Inpaint each sample under its object mask and a ratio-matched random mask.

    Writes records_contrast.csv, sweep_contrast.csv, summary_contrast.json
    with per-bin metric deltas (object minus random).
    """
    samples = ensure_dataset(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    results = _run_tasks(_contrast_task, [(s, cfg) for s in samples], cfg.jobs)
    records = [r for _, rows in results for r in rows]
    if not records:
        raise SweepError("contrast run produced no records")

    cells = _ordered_cells(records, ["object", "random"])
    write_records_csv(records, cfg.out_dir / "records_contrast.csv")
    write_aggregate_csv(cells, cfg.out_dir / "sweep_contrast.csv")

    deltas = {}
    table = {(c.condition, c.bin_label): c for c in cells}
    for blabel in sorted({c.bin_label for c in cells}):
        obj = table.get(("object", blabel))
        rnd = table.get(("random", blabel))
        if obj and rnd:
            deltas[blabel] = {
                "psnr_delta": obj.psnr_mean - rnd.psnr_mean,
                "ssim_delta": obj.ssim_mean - rnd.ssim_mean,
            }
    summary = {"deltas_object_minus_random": deltas}
    (cfg.out_dir / "summary_contrast.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return {"records": records, "cells": cells, "summary": summary}


# ---------------------------------------------------------------------------
# Figure renders
# ---------------------------------------------------------------------------


def _hstack_panel(images: list[Image], gap: int = 2) -> Image:
    h = images[0].extents[0]
    parts = []
    for i, im in enumerate(images):
        arr = im.data if im.channels == 3 else np.repeat(im.data[:, :, None], 3, axis=2)
        parts.append(arr)
        if i < len(images) - 1:
            parts.append(np.ones((h, gap, 3), dtype=np.float32))
    return Image(np.concatenate(parts, axis=1))


def render_figures(cfg: ExperimentConfig) -> dict:
    """Render the rescale panel and the offset maps for one sample.

    The panel holds input, inpainted results at d = -2 / 0 / +2, and ground
    truth. One offset-map PNG (plus a contour overlay) is written per alpha.
    """
    samples = ensure_dataset(cfg)
    if not (0 <= cfg.sample_index < len(samples)):
        raise ConfigError(f"sample_index {cfg.sample_index} out of range 0..{len(samples) - 1}")
    sample = samples[cfg.sample_index]
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    panel_images = [sample.input]
    for d in (-2, 0, 2):
        m = rescale_mask(sample.mask, d)
        masked_input = apply_mask(sample.input, m, cfg.fill)
        panel_images.append(_inpaint_with(cfg.backend, cfg.backend_params, masked_input, m))
    panel_images.append(sample.ground_truth)
    panel_path = cfg.out_dir / "panel_dilation.png"
    save_image(_hstack_panel(panel_images), panel_path)
    written.append(str(panel_path))

    sdf = normalize_sdf(signed_distance(sample.mask))
    for a in cfg.alpha_values:
        offset = render_offset_map(sdf, a)
        opath = cfg.out_dir / f"offset_alpha_{a:g}.png"
        save_image(offset, opath)
        written.append(str(opath))
        overlay = np.array(offset.data, copy=True)
        overlay[level_contour(sdf, a).as_bool()] = 1.0
        cpath = cfg.out_dir / f"contour_alpha_{a:g}.png"
        save_image(Image(overlay), cpath)
        written.append(str(cpath))
    return {"written": written, "sample_id": sample.id}


# ---------------------------------------------------------------------------
# Single-image removal (user-facing path)
# ---------------------------------------------------------------------------


def eval_one(
    image_path: str | Path,
    labels_path: str | Path,
    out_dir: str | Path,
    mask_path: str | Path | None = None,
    gt_path: str | Path | None = None,
    segment_id: int | None = None,
    alpha: float = 0.03,
    alpha_units: str = "normalized",
    backend: str = "diffusion",
    backend_params: dict | None = None,
    fill: float = 0.0,
) -> dict:
    """Remove one object from one image.

    The segment comes either from --segment-id (the user's choice) or from
    the segment best overlapping a provided target mask. A color preview of
    all segments is always written to support the choice.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    img = load_image(image_path)
    labels = load_label_map(labels_path)
    if img.extents != labels.extents:
        raise DataError("image and label map extents differ")

    preview = segment_preview(labels)
    save_image(Image(preview.astype(np.float64) / 255.0), out_dir / "segments_preview.png")

    if segment_id is not None:
        segment = labels.segment_mask(segment_id)
    elif mask_path is not None:
        segment = select_segment(labels, load_mask(mask_path))
    else:
        raise ConfigError("eval-one needs either --segment-id or --mask")

    expanded = expand_mask(segment, alpha, alpha_units)
    masked_input = apply_mask(img, expanded, fill)
    inpainted = _inpaint_with(backend, backend_params or {}, masked_input, expanded)

    save_mask(expanded, out_dir / "mask.png")
    save_image(masked_input, out_dir / "masked_input.png")
    save_image(inpainted, out_dir / "inpainted.png")

    report: dict = {
        "segment_pixels": segment.count(),
        "expanded_pixels": expanded.count(),
        "alpha": alpha,
        "alpha_units": alpha_units,
        "backend": backend,
    }
    if mask_path is not None:
        cov = coverage_stats(expanded, load_mask(mask_path))
        report["coverage"] = {"missed": cov.missed, "excess": cov.excess,
                              "iou": cov.iou, "covered": cov.covered}
    if gt_path is not None:
        gt = load_image(gt_path)
        report["psnr"] = psnr(gt, inpainted)
        report["ssim"] = ssim(gt, inpainted)
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report
