"""Exact Euclidean distance transforms and signed distance fields.

The sign convention: negative inside the mask, positive outside, and
``{p : phi(p) <= r}`` is exactly the Euclidean dilation of the mask by
radius r. Exterior values are distances to the nearest foreground pixel
center, interior values are minus the distance to the nearest background
pixel center, so |phi| >= 1 everywhere and phi never takes the value 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, ParameterError, ShapeError
from .image import BinaryMask, Image


@dataclass(frozen=True)
class SignedDistanceField:
    """Per-pixel signed distance to the mask boundary (pixels, or [-1, 1] if normalized)."""

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"distance field must be HxW, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("distance field contains non-finite values")
        if self.normalized and np.abs(arr).max() > 1.0 + 1e-12:
            raise ShapeError("normalized field must lie in [-1, 1]")
        object.__setattr__(self, "data", arr)
        self.data.setflags(write=False)

    @property
    def extents(self) -> tuple[int, int]:
        return self.data.shape

    def interior_mask(self) -> BinaryMask:
        """Recover the mask from the sign partition."""
        return BinaryMask(self.data < 0)


def euclidean_distance_to(mask: BinaryMask) -> np.ndarray:
    """Exact Euclidean distance from every pixel to the nearest mask pixel center."""
    if mask.is_empty():
        raise DomainError("distance to an empty mask is undefined")
    return ndimage.distance_transform_edt(1 - mask.data)


def signed_distance(mask: BinaryMask) -> SignedDistanceField:
    """Signed distance field of a mask: -dist to background inside, +dist to foreground outside."""
    if mask.is_empty() or mask.is_full():
        raise DomainError("signed distance needs a mask that is neither empty nor full")
    outside = ndimage.distance_transform_edt(1 - mask.data)
    inside = ndimage.distance_transform_edt(mask.data)
    phi = np.where(mask.as_bool(), -inside, outside)
    return SignedDistanceField(phi)


def normalize_sdf(sdf: SignedDistanceField) -> SignedDistanceField:
    """Divide by the maximum absolute distance so values land in [-1, 1]."""
    if sdf.normalized:
        raise ParameterError("field is already normalized")
    peak = np.abs(sdf.data).max()
    if peak == 0.0:
        raise DomainError("cannot normalize an all-zero field")
    return SignedDistanceField(sdf.data / peak, normalized=True)


def level_region(sdf: SignedDistanceField, alpha: float) -> BinaryMask:
    """Pixels where the offset field (phi - alpha) is negative."""
    return BinaryMask(sdf.data - alpha < 0)


def level_contour(sdf: SignedDistanceField, alpha: float) -> BinaryMask:
    """One-pixel ring marking the zero level set of (phi - alpha)."""
    region = (sdf.data - alpha < 0).astype(np.uint8)
    eroded = ndimage.binary_erosion(region, structure=np.ones((3, 3)), border_value=0)
    return BinaryMask(region.astype(bool) & ~eroded)


def render_offset_map(sdf: SignedDistanceField, alpha: float) -> Image:
    """Grayscale rendering of (phi - alpha), linearly mapped onto [0, 1].

    Interior (negative) values render darker than exterior ones; the region
    below the zero level set grows as alpha grows. Pair with level_contour
    for an explicit marking of the zero level set.
    """
    if not sdf.normalized:
        raise ParameterError("render_offset_map expects a normalized field")
    if alpha < 0:
        raise ParameterError("alpha must be non-negative")
    vals = sdf.data - alpha
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        raise DomainError("offset field is constant; nothing to render")
    return Image((vals - lo) / (hi - lo))
