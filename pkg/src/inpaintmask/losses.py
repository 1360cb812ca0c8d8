"""Loss functions: boundary, mask expansion, reconstruction, style, feature
matching, hinge adversarial, pixelwise cross entropy, and their weighted totals.

Everything here is a pure function over caller-supplied grids, feature
pyramids, or critic scores. The weighted-total helpers use plain Python
arithmetic, so exact types (fractions.Fraction) pass through unharmed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Collection, Mapping

import numpy as np

from .errors import ConfigError, DomainError, ShapeError
from .image import Image, to_grayscale
from .sdf import SignedDistanceField


@dataclass(frozen=True)
class SoftMask:
    """Relaxed mask with per-pixel values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"soft mask must be HxW, got {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ShapeError("soft mask values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)
        self.data.setflags(write=False)

    @property
    def extents(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class FeaturePyramid:
    """Per-level activation maps, each level a (channels, H, W) array."""

    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ShapeError("feature pyramid needs at least one level")
        clean = []
        for i, lv in enumerate(self.levels):
            arr = np.asarray(lv, dtype=np.float64)
            if arr.ndim != 3 or arr.size == 0:
                raise ShapeError(f"level {i} must be a non-empty (C, H, W) array")
            clean.append(arr)
        object.__setattr__(self, "levels", tuple(clean))

    def element_counts(self) -> tuple[int, ...]:
        return tuple(lv.size for lv in self.levels)


@dataclass(frozen=True)
class CriticScores:
    """Raw discriminator outputs; any shape, finite values."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.size == 0:
            raise ShapeError("critic scores must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("critic scores must be finite")
        object.__setattr__(self, "scores", arr)


@dataclass(frozen=True)
class LossWeights:
    """Weight constants for the loss totals, with the published defaults."""

    lambda_eg: float = 1.0
    lambda_ef: float = 10.0
    lambda_sg: float = 0.1
    lambda_sc: float = 1.0
    lambda_ig: float = 0.1
    lambda_if: float = 0.1
    lambda_is: float = 250.0
    lambda_ir: float = 1.0
    lambda_x: float = 1000.0
    alpha: float = 0.03

    def to_json(self) -> str:
        return json.dumps({f.name: getattr(self, f.name) for f in fields(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, blob: str) -> "LossWeights":
        raw = json.loads(blob)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown loss weight fields: {sorted(unknown)}")
        return cls(**raw)


def _check_extents(a, b, what: str):
    if a.extents != b.extents:
        raise ShapeError(f"{what}: extents differ, {a.extents} vs {b.extents}")


def boundary_loss(sdf: SignedDistanceField, m: SoftMask) -> float:
    """Distance-weighted area of the soft mask: sum_p phi(p) * m(p)."""
    _check_extents(sdf, m, "boundary_loss")
    return float(np.sum(sdf.data * m.data))


def mask_expansion_loss(
    sdf: SignedDistanceField, m: SoftMask, alpha: float
) -> tuple[float, np.ndarray]:
    """Boundary loss with the field lowered by alpha; returns (value, gradient).

    value = sum_p (phi(p) - alpha) * m(p); the gradient w.r.t. m(p) is
    phi(p) - alpha. With alpha = 0 this is exactly boundary_loss.
    """
    _check_extents(sdf, m, "mask_expansion_loss")
    if alpha < 0:
        raise ShapeError(f"alpha must be >= 0, got {alpha}")
    shifted = sdf.data - alpha
    return float(np.sum(shifted * m.data)), shifted


def reconstruction_loss(
    ref: Image, test: Image, n_masked: int, mask=None
) -> float:
    """L1 image difference divided by the masked-pixel count.

    The norm runs over all pixels and channels by default; pass a
    BinaryMask to restrict it to masked pixels instead.
    """
    _check_extents(ref, test, "reconstruction_loss")
    if ref.channels != test.channels:
        raise ShapeError("reconstruction_loss: channel counts differ")
    if n_masked < 1:
        raise DomainError(f"n_masked must be >= 1, got {n_masked}")
    diff = np.abs(ref.data.astype(np.float64) - test.data.astype(np.float64))
    if mask is not None:
        _check_extents(ref, mask, "reconstruction_loss mask")
        sel = mask.as_bool()
        diff = diff[sel] if diff.ndim == 2 else diff[sel, :]
    return float(np.sum(diff)) / n_masked


def gram(level: np.ndarray) -> np.ndarray:
    """Normalized Gram matrix of one activation level: F F^T / (C * H * W)."""
    arr = np.asarray(level, dtype=np.float64)
    if arr.size == 0:
        raise ShapeError("gram: empty level")
    if arr.ndim == 3:
        arr = arr.reshape(arr.shape[0], -1)
    elif arr.ndim != 2:
        raise ShapeError(f"gram: level must be (C, H, W) or (C, N), got {arr.shape}")
    return (arr @ arr.T) / arr.size


def _check_level_compat(a: FeaturePyramid, b: FeaturePyramid, what: str):
    if len(a.levels) != len(b.levels):
        raise ShapeError(f"{what}: pyramids have {len(a.levels)} vs {len(b.levels)} levels")
    for i, (la, lb) in enumerate(zip(a.levels, b.levels)):
        if la.shape != lb.shape:
            raise ShapeError(f"{what}: level {i} shapes differ, {la.shape} vs {lb.shape}")


def style_loss(a: FeaturePyramid, b: FeaturePyramid) -> float:
    """Sum over levels of the entrywise L1 distance between Gram matrices."""
    _check_level_compat(a, b, "style_loss")
    return float(sum(np.sum(np.abs(gram(la) - gram(lb))) for la, lb in zip(a.levels, b.levels)))


def feature_matching_loss(a: FeaturePyramid, b: FeaturePyramid) -> float:
    """Sum over levels of the mean absolute activation difference (1/N_i L1)."""
    _check_level_compat(a, b, "feature_matching_loss")
    return float(sum(np.sum(np.abs(la - lb)) / la.size for la, lb in zip(a.levels, b.levels)))


def hinge_gan_losses(real: CriticScores, fake: CriticScores) -> tuple[float, float]:
    """Hinge adversarial pair: (generator loss, discriminator loss)."""
    gen = -float(np.mean(fake.scores))
    disc = float(np.mean(np.maximum(0.0, 1.0 - real.scores))) + float(
        np.mean(np.maximum(0.0, 1.0 + fake.scores))
    )
    return gen, disc


def pixelwise_cross_entropy(pred: np.ndarray, gt_classes: np.ndarray) -> float:
    """Mean over pixels of -log p(true class), probabilities clamped at 1e-12.

    pred is (H, W, K) per-pixel class probabilities (rows summing to 1
    within 1e-5); gt_classes is an (H, W) integer class map.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt_classes = np.asarray(gt_classes)
    if pred.ndim != 3:
        raise ShapeError(f"pred must be (H, W, K), got {pred.shape}")
    if gt_classes.shape != pred.shape[:2]:
        raise ShapeError("gt class map extents do not match predictions")
    k = pred.shape[2]
    if gt_classes.min() < 0 or gt_classes.max() >= k:
        raise ShapeError(f"gt classes must lie in [0, {k}), got range "
                         f"[{gt_classes.min()}, {gt_classes.max()}]")
    sums = pred.sum(axis=2)
    if np.abs(sums - 1.0).max() > 1e-5:
        raise ShapeError("per-pixel probabilities must sum to 1 within 1e-5")
    picked = np.take_along_axis(pred, gt_classes[:, :, None].astype(np.int64), axis=2)[:, :, 0]
    return float(np.mean(-np.log(np.maximum(picked, 1e-12))))


# ---------------------------------------------------------------------------
# Weighted totals. Plain Python arithmetic throughout so rational inputs
# stay exact.
# ---------------------------------------------------------------------------


def edge_inpainter_loss(l_eg, l_ef, w: LossWeights):
    return w.lambda_eg * l_eg + w.lambda_ef * l_ef


def segmentation_inpainter_loss(l_sg, l_sc, w: LossWeights):
    return w.lambda_sg * l_sg + w.lambda_sc * l_sc


def image_inpainter_loss(l_ig, l_if, l_is, l_ir, w: LossWeights):
    return w.lambda_ig * l_ig + w.lambda_if * l_if + w.lambda_is * l_is + w.lambda_ir * l_ir


_TERM_WEIGHT = {
    "ps": None,  # unit weight
    "eg": "lambda_eg",
    "ef": "lambda_ef",
    "sg": "lambda_sg",
    "sc": "lambda_sc",
    "ig": "lambda_ig",
    "if": "lambda_if",
    "is": "lambda_is",
    "ir": "lambda_ir",
    "x": "lambda_x",
}


def total_loss(
    components: Mapping[str, float],
    w: LossWeights,
    absent: Collection[str] = (),
) -> float:
    """Full training objective: L_PS + L_E + L_S + L_I + lambda_x * L_X.

    components maps term names ("ps", "eg", "ef", "sg", "sc", "ig", "if",
    "is", "ir", "x") to their values. Terms that have no meaning in a given
    setting (e.g. anything produced by a network that is not running) must
    be listed in `absent`; they then contribute zero. A term that is
    missing, not flagged absent, and carries a nonzero weight is a
    configuration error.
    """
    unknown = set(components) | set(absent)
    unknown -= set(_TERM_WEIGHT)
    if unknown:
        raise ConfigError(f"unknown loss terms: {sorted(unknown)}")
    total = None
    for name, weight_field in _TERM_WEIGHT.items():
        weight = 1 if weight_field is None else getattr(w, weight_field)
        if name in components:
            term = weight * components[name]
        elif name in absent or weight == 0:
            continue
        else:
            raise ConfigError(f"loss term '{name}' has weight {weight} but no value "
                              f"and is not flagged absent")
        total = term if total is None else total + term
    return 0.0 if total is None else total


# ---------------------------------------------------------------------------
# Deterministic feature provider for exercising the style and
# feature-matching losses without any trained network: intensity plus
# horizontal/vertical gradients at dyadic scales.
# ---------------------------------------------------------------------------


def _pool2(x: np.ndarray) -> np.ndarray:
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[0::2, 1::2] + x[1::2, 0::2] + x[1::2, 1::2])


def build_feature_pyramid(img: Image, num_levels: int = 3) -> FeaturePyramid:
    """Handcrafted pyramid: {intensity, d/dx, d/dy} at num_levels dyadic scales."""
    if num_levels < 1:
        raise ShapeError("num_levels must be >= 1")
    base = to_grayscale(img).data if img.channels == 3 else img.data
    base = base.astype(np.float64)
    levels = []
    cur = base
    for _ in range(num_levels):
        if min(cur.shape) < 2:
            raise ShapeError("image too small for the requested pyramid depth")
        gy, gx = np.gradient(cur)
        levels.append(np.stack([cur, gx, gy]))
        cur = _pool2(cur)
    return FeaturePyramid(tuple(levels))
