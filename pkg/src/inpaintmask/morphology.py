"""Euclidean-disk dilation and erosion of binary masks.

The structuring element is the Euclidean disk of the given radius,
realized by thresholding the exact distance transform, so
dilate(m, r) == {p : phi_m(p) <= r} pixel-for-pixel. Pixels outside the
frame count as background: eroding a mask that touches the border eats
into it from the border side as well.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import DegenerateMaskError, ParameterError
from .image import BinaryMask


def dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Grow the mask by a Euclidean disk: out(p)=1 iff some mask pixel is within radius."""
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    if radius == 0 or mask.is_empty():
        return BinaryMask(mask.data)
    dist = ndimage.distance_transform_edt(1 - mask.data)
    return BinaryMask(dist <= radius)


def erode(mask: BinaryMask, radius: float) -> BinaryMask:
    """Shrink the mask by a Euclidean disk; dual of dilation on the complement.

    The complement extends beyond the frame, so border pixels erode away
    like any others.
    """
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    if radius == 0 or mask.is_empty():
        return BinaryMask(mask.data)
    pad = int(math.ceil(radius)) + 1
    padded = np.pad(mask.data, pad, mode="constant", constant_values=0)
    dist_to_bg = ndimage.distance_transform_edt(padded)
    kept = dist_to_bg > radius
    return BinaryMask(kept[pad:-pad, pad:-pad])


def rescale_mask(mask: BinaryMask, d: int) -> BinaryMask:
    """Dilate by d pixels when d >= 0, erode by |d| when d < 0.

    Raises DegenerateMaskError when erosion empties the mask, so callers
    can skip and log the sample instead of averaging over nothing.
    """
    if d >= 0:
        return dilate(mask, float(d))
    out = erode(mask, float(-d))
    if out.is_empty():
        raise DegenerateMaskError(f"erosion by {-d} px emptied the mask")
    return out
