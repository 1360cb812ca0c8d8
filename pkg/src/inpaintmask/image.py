"""Image and mask containers, color conversion, Canny edges, and PNG I/O.

All pixel data lives in numpy arrays: images are float32 in [0, 1]
(row-major, H x W or H x W x 3), binary masks are uint8 {0, 1}, label maps
are int32 segment ids. The containers validate their invariants on
construction and are treated as immutable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

from .errors import DomainError, ParameterError, ShapeError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Image:
    """A grayscale or RGB image with float32 values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] in (1, 3):
            if arr.shape[2] == 1:
                arr = arr[:, :, 0]
        else:
            raise ShapeError(f"image must be HxW or HxWx3, got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError("image must have at least one pixel")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ShapeError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)
        self.data.setflags(write=False)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    @property
    def extents(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel {0, 1} mask; 1 marks the region of interest."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ShapeError(f"mask must be HxW, got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError("mask must have at least one pixel")
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        else:
            arr = arr.astype(np.uint8, casting="unsafe")
            if not np.isin(np.asarray(self.data), (0, 1)).all():
                raise ShapeError("mask values must be exactly 0 or 1")
        object.__setattr__(self, "data", arr)
        self.data.setflags(write=False)

    @property
    def extents(self) -> tuple[int, int]:
        return self.data.shape

    def count(self) -> int:
        return int(self.data.sum())

    def is_empty(self) -> bool:
        return not self.data.any()

    def is_full(self) -> bool:
        return bool(self.data.all())

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def complement(self) -> "BinaryMask":
        return BinaryMask(1 - self.data)

    def ratio_percent(self) -> float:
        """Mask pixels as a percentage of the frame."""
        return 100.0 * self.count() / (self.data.shape[0] * self.data.shape[1])


@dataclass(frozen=True)
class LabelMap:
    """Segment id per pixel plus a segment-id -> class-id table.

    Segment ids must be contiguous from 0; class ids are free integers.
    """

    data: np.ndarray
    class_of: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.int32)
        if arr.ndim != 2:
            raise ShapeError(f"label map must be HxW, got {arr.shape}")
        if arr.min() < 0:
            raise ShapeError("segment ids must be non-negative")
        ids = np.unique(arr)
        if not np.array_equal(ids, np.arange(ids.size)):
            raise ShapeError("segment ids must be contiguous from 0")
        missing = [int(i) for i in ids if int(i) not in self.class_of]
        if missing:
            raise ShapeError(f"segments without a class id: {missing}")
        object.__setattr__(self, "data", arr)
        self.data.setflags(write=False)

    @property
    def extents(self) -> tuple[int, int]:
        return self.data.shape

    def segment_ids(self) -> list[int]:
        return [int(i) for i in np.unique(self.data)]

    def segment_mask(self, segment_id: int) -> BinaryMask:
        if segment_id not in self.class_of:
            raise DomainError(f"unknown segment id {segment_id}")
        return BinaryMask(self.data == segment_id)

    def class_map(self) -> np.ndarray:
        """Per-pixel class ids, via the segment -> class table."""
        n = int(self.data.max()) + 1
        lut = np.zeros(n, dtype=np.int32)
        for seg, cls in self.class_of.items():
            lut[seg] = cls
        return lut[self.data]


def _require_same_extents(a, b, what: str = "inputs"):
    if a.extents != b.extents:
        raise ShapeError(f"{what} extents differ: {a.extents} vs {b.extents}")


def to_grayscale(img: Image) -> Image:
    """Convert an RGB image to single-channel luma (0.299 R + 0.587 G + 0.114 B)."""
    if img.channels != 3:
        raise ShapeError(f"to_grayscale needs a 3-channel image, got {img.channels}")
    r, g, b = (img.data[:, :, i].astype(np.float64) for i in range(3))
    gray = GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * g + GRAY_WEIGHTS[2] * b
    return Image(np.clip(gray, 0.0, 1.0))


def apply_mask(img: Image, mask: BinaryMask, fill: float = 0.0) -> Image:
    """Replace masked pixels with a constant fill value.

    Produces the masked input image handed to inpainting backends.
    """
    _require_same_extents(img, mask, "image/mask")
    if not (0.0 <= fill <= 1.0):
        raise ParameterError(f"fill must be in [0, 1], got {fill}")
    out = np.array(img.data, copy=True)
    out[mask.as_bool()] = np.float32(fill)
    return Image(out)


def canny_edges(img: Image, sigma: float = 1.4, low: float = 0.1, high: float = 0.2) -> BinaryMask:
    """Canny edge mask of a grayscale image.

    The stages are the classical ones: Gaussian smoothing, central-difference
    gradient magnitude, non-maximum suppression along the quantized gradient
    direction (ties kept), then hysteresis between the low and high
    thresholds. Thresholds apply to gradient magnitudes of [0, 1] intensities.
    """
    if img.channels != 1:
        raise ShapeError("canny_edges needs a 1-channel image")
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    if not (0.0 < low < high):
        raise ParameterError(f"thresholds must satisfy 0 < low < high, got {low}, {high}")

    smoothed = ndimage.gaussian_filter(img.data.astype(np.float64), sigma, mode="nearest")
    gy, gx = np.gradient(smoothed)
    mag = np.hypot(gx, gy)
    if not mag.any():
        return BinaryMask(np.zeros(img.extents, dtype=np.uint8))

    # Quantize the gradient direction to 0/45/90/135 degrees.
    angle = np.mod(np.degrees(np.arctan2(gy, gx)), 180.0)
    sector = ((angle + 22.5) // 45).astype(np.int32) % 4

    padded = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    rows, cols = np.mgrid[0:h, 0:w]
    # Neighbor offsets along the gradient direction, per sector.
    offsets = np.array([(0, 1), (1, 1), (1, 0), (1, -1)])  # 0, 45, 90, 135 deg
    dr = offsets[sector][:, :, 0]
    dc = offsets[sector][:, :, 1]
    ahead = padded[rows + 1 + dr, cols + 1 + dc]
    behind = padded[rows + 1 - dr, cols + 1 - dc]
    keep = (mag >= ahead) & (mag >= behind)

    weak = keep & (mag >= low)
    strong = keep & (mag >= high)
    if not strong.any():
        return BinaryMask(np.zeros(img.extents, dtype=np.uint8))
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=np.uint8))
    keep_labels = np.unique(labels[strong])
    edges = weak & np.isin(labels, keep_labels)
    return BinaryMask(edges)


# ---------------------------------------------------------------------------
# PNG I/O. Images go to 8-bit RGB/gray (or 16-bit gray), masks to 8-bit
# {0, 255} gray, label maps to 16-bit gray plus a JSON class table sidecar.
# ---------------------------------------------------------------------------


def save_image(img: Image, path: str | Path, bit_depth: int = 8) -> None:
    path = Path(path)
    if bit_depth == 8:
        q = np.round(img.data.astype(np.float64) * 255.0).astype(np.uint8)
        PILImage.fromarray(q).save(path)
    elif bit_depth == 16:
        if img.channels != 1:
            raise ParameterError("16-bit PNG output is supported for 1-channel images only")
        q = np.round(img.data.astype(np.float64) * 65535.0).astype(np.uint16)
        PILImage.fromarray(q).save(path)
    else:
        raise ParameterError(f"bit_depth must be 8 or 16, got {bit_depth}")


def load_image(path: str | Path) -> Image:
    with PILImage.open(path) as im:
        if im.mode in ("I;16", "I"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif im.mode == "L":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        elif im.mode in ("RGB", "RGBA"):
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return Image(arr)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    PILImage.fromarray(mask.data * np.uint8(255)).save(Path(path))


def load_mask(path: str | Path) -> BinaryMask:
    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask(arr >= 128)


def save_label_map(labels: LabelMap, path: str | Path) -> None:
    """Write segment ids as 16-bit gray PNG and the class table as sidecar JSON."""
    path = Path(path)
    if labels.data.max() > 65535:
        raise ParameterError("label map has more segment ids than 16-bit PNG can hold")
    PILImage.fromarray(labels.data.astype(np.uint16)).save(path)
    sidecar = path.with_suffix(".json")
    table = {str(k): int(v) for k, v in sorted(labels.class_of.items())}
    sidecar.write_text(json.dumps({"class_of": table}, indent=2, sort_keys=True) + "\n")


def load_label_map(path: str | Path) -> LabelMap:
    path = Path(path)
    with PILImage.open(path) as im:
        arr = np.asarray(im, dtype=np.int32)
    sidecar = path.with_suffix(".json")
    table = json.loads(sidecar.read_text())["class_of"]
    class_of = {int(k): int(v) for k, v in table.items()}
    return LabelMap(arr, class_of)
