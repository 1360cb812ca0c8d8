"""Mask pipeline: pick the segment covering the target, expand it minimally
under the mask-expansion objective, and binarize for inpainting.

The expansion objective is linear in the soft mask, so its minimizer has a
closed form: keep exactly the pixels whose signed distance falls below the
offset alpha, which is the Euclidean dilation of the segment. The iterative
projected-descent path is kept alongside the closed form because its
descent and fixed-point behavior are part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoOverlapError, ParameterError, ShapeError
from .image import BinaryMask, LabelMap
from .losses import SoftMask
from .sdf import SignedDistanceField, signed_distance

ALPHA_UNITS = ("normalized", "pixels")


@dataclass(frozen=True)
class CoverageStats:
    """How well a working mask covers the target region."""

    missed: int
    excess: int
    iou: float
    covered: bool


def select_segment(labels: LabelMap, target: BinaryMask) -> BinaryMask:
    """Return the segment with the largest overlap with the target mask.

    Ties break toward the lowest segment id so results are reproducible.
    """
    if labels.extents != target.extents:
        raise ShapeError("label map and target extents differ")
    if target.is_empty():
        raise DomainError("target mask is empty")
    n = int(labels.data.max()) + 1
    overlaps = np.bincount(labels.data[target.as_bool()], minlength=n)
    if overlaps.max() == 0:
        raise NoOverlapError("no segment overlaps the target mask")
    seg_id = int(np.argmax(overlaps))
    return BinaryMask(labels.data == seg_id)


def optimize_soft_mask(
    sdf: SignedDistanceField,
    init: SoftMask,
    alpha: float,
    steps: int,
    step_size: float,
) -> SoftMask:
    """Projected gradient descent on the mask-expansion objective.

    Each step is m <- clamp(m - step_size * (phi - alpha), 0, 1). The loss
    never increases, and with enough steps every pixel saturates at the
    closed-form fixed point: 1 where phi < alpha, 0 where phi > alpha
    (pixels with phi == alpha keep their initial value).
    """
    if sdf.extents != init.extents:
        raise ShapeError("field and init extents differ")
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    if step_size <= 0:
        raise ParameterError("step_size must be positive")
    grad = sdf.data - alpha
    m = init.data.copy()
    for _ in range(steps):
        m = np.clip(m - step_size * grad, 0.0, 1.0)
    return SoftMask(m)


def binarize(m: SoftMask, threshold: float = 0.5) -> BinaryMask:
    """Hard mask with 1 wherever the soft value is >= threshold."""
    if not (0.0 < threshold < 1.0):
        raise ParameterError(f"threshold must be in (0, 1), got {threshold}")
    return BinaryMask(m.data >= threshold)


def expansion_radius(sdf: SignedDistanceField, alpha: float, units: str = "normalized") -> float:
    """Convert an expansion offset to pixels.

    In normalized units alpha is scaled by the field's maximum absolute
    distance (the normalization denominator); in pixel units it is used
    as-is.
    """
    if units not in ALPHA_UNITS:
        raise ParameterError(f"units must be one of {ALPHA_UNITS}")
    if alpha < 0:
        raise ParameterError("alpha must be >= 0")
    if units == "pixels":
        return float(alpha)
    peak = np.abs(sdf.data).max()
    return float(alpha * peak)


def expand_mask(segment: BinaryMask, alpha: float, units: str = "normalized") -> BinaryMask:
    """Minimal expansion of a segment: all pixels with phi <= r(alpha).

    This is the binarized minimizer of the mask-expansion objective and
    equals Euclidean dilation of the segment by r(alpha) pixels.
    """
    if segment.is_empty() or segment.is_full():
        raise DomainError("segment must be neither empty nor full")
    sdf = signed_distance(segment)
    r = expansion_radius(sdf, alpha, units)
    return BinaryMask(sdf.data <= r)


def expand_for_inpainting(
    labels: LabelMap, target: BinaryMask, alpha: float, units: str = "normalized"
) -> BinaryMask:
    """Segment selection followed by mask expansion; the mask fed to inpainting."""
    segment = select_segment(labels, target)
    if segment.is_full():
        raise DomainError("selected segment covers the whole frame")
    return expand_mask(segment, alpha, units)


def coverage_stats(m: BinaryMask, target: BinaryMask) -> CoverageStats:
    """Missed/excess pixel counts and IoU of a working mask against a target."""
    if m.extents != target.extents:
        raise ShapeError("mask and target extents differ")
    a = m.as_bool()
    b = target.as_bool()
    union = int(np.sum(a | b))
    if union == 0:
        raise DomainError("both masks are empty")
    inter = int(np.sum(a & b))
    missed = int(np.sum(b & ~a))
    excess = int(np.sum(a & ~b))
    return CoverageStats(missed=missed, excess=excess, iou=inter / union, covered=missed == 0)


def segment_preview(labels: LabelMap) -> np.ndarray:
    """Color preview of all segments (uint8 RGB), for picking a segment id by eye."""
    n = int(labels.data.max()) + 1
    rng = np.random.default_rng(12345)
    palette = rng.integers(40, 255, size=(n, 3), dtype=np.uint8)
    palette[0] = (20, 20, 20)
    return palette[labels.data]
