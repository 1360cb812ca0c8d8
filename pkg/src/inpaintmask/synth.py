"""Paired-dataset synthesis by copy-paste superimposition.

A sample triplet is (input with pasted object, clean background, object
mask): the input equals the background everywhere off-mask, which gives
pixel-exact ground truth for object removal. A procedural scene corpus
(textured backgrounds plus labeled shapes in four size strata) ships with
the package so the full pipeline runs from a clean checkout; externally
annotated images load through the same PNG + JSON sidecar path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DataError, GenerationError, ParameterError, PlacementError, ShapeError
from .image import (
    BinaryMask,
    Image,
    LabelMap,
    load_image,
    load_label_map,
    load_mask,
    save_image,
    save_mask,
)

OBJECT_CLASS = 1
DEFAULT_BINS = ((0.0, 10.0), (10.0, 20.0), (20.0, 30.0), (30.0, 40.0))


@dataclass(frozen=True)
class ObjectCutout:
    """A segment cropped to its bounding box, ready for pasting."""

    patch: Image
    mask: BinaryMask
    class_id: int
    segment_id: int
    source_scene: int = -1

    def __post_init__(self):
        if self.patch.extents != self.mask.extents:
            raise ShapeError("cutout patch and mask extents differ")
        if self.mask.is_empty():
            raise ShapeError("cutout mask is empty")


@dataclass(frozen=True)
class SampleTriplet:
    """One generated sample: pasted input, clean background, and object mask."""

    input: Image
    ground_truth: Image
    mask: BinaryMask
    mask_ratio: float
    seed: int
    source_scene: int = -1
    source_segment: int = -1
    clipped: bool = False

    def __post_init__(self):
        if not (self.input.extents == self.ground_truth.extents == self.mask.extents):
            raise ShapeError("triplet extents differ")
        if self.mask.is_empty():
            raise ShapeError("triplet mask is empty")
        off = ~self.mask.as_bool()
        a, b = self.input.data, self.ground_truth.data
        same = (a[off] == b[off]).all() if a.ndim == 2 else (a[off, :] == b[off, :]).all()
        if not same:
            raise ShapeError("input differs from ground truth outside the mask")


def extract_objects(img: Image, labels: LabelMap, class_filter: int,
                    source_scene: int = -1) -> list[ObjectCutout]:
    """One cutout per segment of the requested class, cropped to its bounding box."""
    if img.extents != labels.extents:
        raise ShapeError("image and label map extents differ")
    cutouts = []
    for seg_id in labels.segment_ids():
        if labels.class_of[seg_id] != class_filter:
            continue
        sel = labels.data == seg_id
        rows = np.flatnonzero(sel.any(axis=1))
        cols = np.flatnonzero(sel.any(axis=0))
        r0, r1 = rows[0], rows[-1] + 1
        c0, c1 = cols[0], cols[-1] + 1
        patch = img.data[r0:r1, c0:c1] if img.channels == 1 else img.data[r0:r1, c0:c1, :]
        cutouts.append(
            ObjectCutout(
                patch=Image(patch),
                mask=BinaryMask(sel[r0:r1, c0:c1]),
                class_id=class_filter,
                segment_id=seg_id,
                source_scene=source_scene,
            )
        )
    return cutouts


def superimpose(bg: Image, obj: ObjectCutout, location: tuple[int, int],
                seed: int = 0) -> SampleTriplet:
    """Paste a cutout with its center at `location` (row, col) on the background.

    Placements may clip at the frame edge; a placement that keeps no mask
    pixel in frame is an error.
    """
    h, w = bg.extents
    ph, pw = obj.patch.extents
    top = location[0] - ph // 2
    left = location[1] - pw // 2
    r0, r1 = max(0, top), min(h, top + ph)
    c0, c1 = max(0, left), min(w, left + pw)
    if r0 >= r1 or c0 >= c1:
        raise PlacementError(f"placement at {location} falls entirely outside the frame")
    mrows = slice(r0 - top, r1 - top)
    mcols = slice(c0 - left, c1 - left)
    mask_crop = obj.mask.data[mrows, mcols]
    if not mask_crop.any():
        raise PlacementError(f"placement at {location} keeps no mask pixel in frame")

    out = np.array(bg.data, copy=True)
    sel = mask_crop.astype(bool)
    patch = obj.patch.data[mrows, mcols] if obj.patch.channels == 1 else obj.patch.data[mrows, mcols, :]
    if out.ndim == 2:
        out[r0:r1, c0:c1][sel] = patch[sel]
    else:
        out[r0:r1, c0:c1, :][sel] = patch[sel]

    full_mask = np.zeros((h, w), dtype=np.uint8)
    full_mask[r0:r1, c0:c1] = mask_crop
    placed = BinaryMask(full_mask)
    return SampleTriplet(
        input=Image(out),
        ground_truth=bg,
        mask=placed,
        mask_ratio=placed.ratio_percent(),
        seed=seed,
        source_scene=obj.source_scene,
        source_segment=obj.segment_id,
        clipped=placed.count() < obj.mask.count(),
    )


# ---------------------------------------------------------------------------
# Procedural scene corpus
# ---------------------------------------------------------------------------

_AREA_STRATA = ((0.02, 0.08), (0.10, 0.18), (0.20, 0.28), (0.30, 0.38))


def _background(rng: np.random.Generator, extents: tuple[int, int]) -> np.ndarray:
    h, w = extents
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    yy /= max(h - 1, 1)
    xx /= max(w - 1, 1)
    base = rng.uniform(0.18, 0.50, size=3)
    grad_dir = rng.uniform(0, 2 * np.pi)
    ramp = (np.cos(grad_dir) * xx + np.sin(grad_dir) * yy) * rng.uniform(0.08, 0.18)
    freq = rng.uniform(1.5, 4.0)
    phase = rng.uniform(0, 2 * np.pi)
    wave_dir = rng.uniform(0, 2 * np.pi)
    wave = 0.06 * np.sin(2 * np.pi * freq * (np.cos(wave_dir) * xx + np.sin(wave_dir) * yy) + phase)
    noise = ndimage.gaussian_filter(rng.normal(0.0, 1.0, size=(h, w)), 2.5) * 0.05
    img = np.empty((h, w, 3))
    for c in range(3):
        img[:, :, c] = base[c] + ramp + wave + noise * rng.uniform(0.6, 1.2)
    return np.clip(img, 0.05, 0.95)


def _shape_mask(rng: np.random.Generator, extents: tuple[int, int],
                area_frac: float) -> np.ndarray | None:
    h, w = extents
    area = area_frac * h * w
    kind = rng.choice(("ellipse", "rect", "blob"))
    aspect = rng.uniform(0.45, 1.0)
    theta = rng.uniform(0, np.pi)
    if kind == "rect":
        half_w = np.sqrt(area / aspect) / 2.0
        half_h = area / (4.0 * half_w)
        bound = np.hypot(half_w, half_h) * 1.05  # rotated corners
    else:
        half_w = np.sqrt(area / (np.pi * aspect))
        half_h = aspect * half_w
        # an ellipse never leaves max(a, b); blobs wobble up to sqrt(1.28)
        bound = max(half_w, half_h) * (1.20 if kind == "blob" else 1.02)
    if 2 * bound >= min(h, w):
        return None
    cy = rng.uniform(bound, h - bound)
    cx = rng.uniform(bound, w - bound)

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ry = (yy - cy) * np.cos(theta) - (xx - cx) * np.sin(theta)
    rx = (yy - cy) * np.sin(theta) + (xx - cx) * np.cos(theta)
    if kind == "rect":
        return (np.abs(rx) <= half_w) & (np.abs(ry) <= half_h)
    quad = (rx / half_w) ** 2 + (ry / half_h) ** 2
    if kind == "ellipse":
        return quad <= 1.0
    lobes = rng.integers(3, 7)
    phase = rng.uniform(0, 2 * np.pi)
    angle = np.arctan2(ry, rx)
    wobble = 1.0 + 0.28 * np.sin(lobes * angle + phase)
    return quad <= wobble


def _paint_object(rng: np.random.Generator, img: np.ndarray, sel: np.ndarray) -> None:
    hot = rng.integers(0, 3)
    color = rng.uniform(0.25, 0.55, size=3)
    color[hot] = rng.uniform(0.70, 0.95)
    ys, xs = np.nonzero(sel)
    cy, cx = ys.mean(), xs.mean()
    span = max(np.abs(ys - cy).max(), np.abs(xs - cx).max(), 1.0)
    shade = 0.12 * (ys - cy) / span
    for c in range(3):
        img[ys, xs, c] = np.clip(color[c] + shade + rng.normal(0, 0.015, size=ys.size), 0.02, 0.98)


def build_procedural_sources(count: int = 12, extents: tuple[int, int] = (128, 128),
                             seed: int = 2024) -> list[tuple[Image, LabelMap]]:
    """Deterministic labeled scenes: textured backgrounds plus contrasting shapes.

    Object areas rotate through four size strata so every mask-ratio bin up
    to 40% stays reachable during dataset generation.
    """
    if count < 1:
        raise ParameterError("need at least one scene")
    scenes = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        img = _background(rng, extents)
        labels = np.zeros(extents, dtype=np.int32)
        class_of = {0: 0}
        next_id = 1
        # place large objects first: they need empty canvas to clear the
        # overlap rejection
        strata = sorted(
            (_AREA_STRATA[(i + j) % len(_AREA_STRATA)] for j in range(3)),
            key=lambda s: -s[0],
        )
        for j, (lo, hi) in enumerate(strata):
            placed = False
            for _ in range(30):
                sel = _shape_mask(rng, extents, rng.uniform(lo, hi))
                if sel is None or not sel.any():
                    continue
                if (labels[sel] != 0).any():
                    continue
                _paint_object(rng, img, sel)
                labels[sel] = next_id
                class_of[next_id] = OBJECT_CLASS
                next_id += 1
                placed = True
                break
            if not placed and next_id == 1 and j == len(strata) - 1:
                raise GenerationError(f"could not place any object in scene {i}")
        scenes.append((Image(img), LabelMap(labels, class_of)))
    return scenes


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------


def generate_dataset(
    sources: list[tuple[Image, LabelMap]],
    n: int,
    ratio_bins=DEFAULT_BINS,
    seed: int = 0,
    out_dir: str | Path = "dataset",
    max_attempts: int = 100,
    class_filter: int = OBJECT_CLASS,
) -> dict:
    """Write n sample triplets as PNGs plus a manifest.json.

    Sample index i targets bin i mod len(bins) and uses seed + i as its own
    seed, so regeneration is byte-identical and order-independent.
    Placements are redrawn (up to max_attempts) until the pasted mask ratio
    lands in the target bin.
    """
    if not ratio_bins:
        raise ParameterError("need at least one ratio bin")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_cutouts: list[list[ObjectCutout]] = []
    for scene_id, (img, labels) in enumerate(sources):
        all_cutouts.append(extract_objects(img, labels, class_filter, source_scene=scene_id))
    if n > 0 and not any(all_cutouts):
        raise GenerationError(f"no source scene contains a class-{class_filter} object")

    samples = []
    for index in range(n):
        lo, hi = ratio_bins[index % len(ratio_bins)]
        rng = np.random.default_rng(seed + index)
        triplet = None
        for _ in range(max_attempts):
            scene_id = int(rng.integers(0, len(sources)))
            cuts = all_cutouts[scene_id]
            if not cuts:
                continue
            cut = cuts[int(rng.integers(0, len(cuts)))]
            bg = sources[scene_id][0]
            loc = (int(rng.integers(0, bg.extents[0])), int(rng.integers(0, bg.extents[1])))
            try:
                cand = superimpose(bg, cut, loc, seed=seed + index)
            except PlacementError:
                continue
            if lo <= cand.mask_ratio < hi:
                triplet = cand
                break
        if triplet is None:
            raise GenerationError(
                f"sample {index}: no placement reached bin [{lo}, {hi}) "
                f"within {max_attempts} attempts"
            )
        stem = f"{index:06d}"
        save_image(triplet.input, out_dir / f"{stem}_input.png")
        save_image(triplet.ground_truth, out_dir / f"{stem}_gt.png")
        save_mask(triplet.mask, out_dir / f"{stem}_mask.png")
        samples.append(
            {
                "id": stem,
                "input": f"{stem}_input.png",
                "gt": f"{stem}_gt.png",
                "mask": f"{stem}_mask.png",
                "seed": seed + index,
                "mask_ratio": triplet.mask_ratio,
                "bin": [lo, hi],
                "source_scene": triplet.source_scene,
                "source_segment": triplet.source_segment,
                "clipped": triplet.clipped,
            }
        )

    extents = list(sources[0][0].extents) if sources else [0, 0]
    manifest = {
        "extents": extents,
        "n": n,
        "seed": seed,
        "bins": [list(b) for b in ratio_bins],
        "class_filter": class_filter,
        "samples": samples,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


@dataclass(frozen=True)
class LoadedSample:
    id: str
    input: Image
    ground_truth: Image
    mask: BinaryMask
    seed: int
    mask_ratio: float
    bin: tuple[float, float]


def load_dataset(dataset_dir: str | Path) -> list[LoadedSample]:
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"no manifest.json under {dataset_dir}")
    manifest = json.loads(manifest_path.read_text())
    out = []
    for s in manifest["samples"]:
        out.append(
            LoadedSample(
                id=s["id"],
                input=load_image(dataset_dir / s["input"]),
                ground_truth=load_image(dataset_dir / s["gt"]),
                mask=load_mask(dataset_dir / s["mask"]),
                seed=int(s["seed"]),
                mask_ratio=float(s["mask_ratio"]),
                bin=tuple(s["bin"]),
            )
        )
    return out


def load_scene_sources(source_dir: str | Path) -> list[tuple[Image, LabelMap]]:
    """Ingest externally annotated scenes: NAME.png + NAME_labels.png + NAME_labels.json."""
    source_dir = Path(source_dir)
    scenes = []
    for img_path in sorted(source_dir.glob("*.png")):
        if img_path.stem.endswith("_labels"):
            continue
        label_path = source_dir / f"{img_path.stem}_labels.png"
        if not label_path.exists():
            continue
        scenes.append((load_image(img_path), load_label_map(label_path)))
    if not scenes:
        raise DataError(f"no scene pairs (image + _labels PNG/JSON) under {source_dir}")
    return scenes


# ---------------------------------------------------------------------------
# Random irregular masks (brush-stroke random walks)
# ---------------------------------------------------------------------------


def _disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    r = int(radius)
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    keep = dy ** 2 + dx ** 2 <= radius ** 2
    return dy[keep], dx[keep]


def random_irregular_mask(
    extents: tuple[int, int],
    target_ratio: float,
    seed: int,
    tolerance: float = 2.0,
    max_strokes: int = 10000,
) -> BinaryMask:
    """Union of random-walk brush strokes hitting target_ratio +- tolerance percent."""
    if not (0.0 < target_ratio < 100.0):
        raise ParameterError(f"target_ratio must be in (0, 100), got {target_ratio}")
    h, w = extents
    rng = np.random.default_rng(seed)
    canvas = np.zeros((h, w), dtype=bool)
    total = h * w

    def ratio() -> float:
        return 100.0 * canvas.sum() / total

    shrink = 1.0
    for _ in range(max_strokes):
        if ratio() >= target_ratio - tolerance:
            break
        width = max(1, int(rng.integers(1, 5) * shrink))
        length = max(2, int(rng.integers(4, 24) * shrink))
        y = float(rng.uniform(0, h))
        x = float(rng.uniform(0, w))
        angle = float(rng.uniform(0, 2 * np.pi))
        stroke = np.zeros_like(canvas)
        dy, dx = _disk_offsets(width)
        for _step in range(length):
            ys = np.clip(np.round(y + dy).astype(int), 0, h - 1)
            xs = np.clip(np.round(x + dx).astype(int), 0, w - 1)
            stroke[ys, xs] = True
            angle += float(rng.normal(0.0, 0.7))
            y = min(max(y + 1.6 * np.sin(angle), 0.0), h - 1.0)
            x = min(max(x + 1.6 * np.cos(angle), 0.0), w - 1.0)
        candidate = canvas | stroke
        if 100.0 * candidate.sum() / total <= target_ratio + tolerance:
            canvas = candidate
            shrink = min(1.0, shrink * 1.1)
        else:
            # overshooting stroke: discard it and try smaller ones
            shrink *= 0.7
    achieved = ratio()
    if abs(achieved - target_ratio) > tolerance:
        raise GenerationError(
            f"random mask reached {achieved:.2f}% after {max_strokes} strokes, "
            f"target {target_ratio}% +- {tolerance}"
        )
    return BinaryMask(canvas)
