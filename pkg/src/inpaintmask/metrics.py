"""PSNR/SSIM image quality metrics, per-sample records, and bin-wise tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import DomainError, ShapeError
from .expansion import CoverageStats
from .image import BinaryMask, Image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(ref: Image, test: Image, mask: BinaryMask | None = None) -> float:
    """Peak signal-to-noise ratio in dB with MAX = 1; +inf for identical inputs.

    With a mask, the MSE runs over masked pixels only.
    """
    if ref.extents != test.extents or ref.channels != test.channels:
        raise ShapeError("psnr inputs must share extents and channels")
    a = ref.data.astype(np.float64)
    b = test.data.astype(np.float64)
    if mask is not None:
        if mask.extents != ref.extents:
            raise ShapeError("psnr mask extents differ from images")
        sel = mask.as_bool()
        a = a[sel] if a.ndim == 2 else a[sel, :]
        b = b[sel] if b.ndim == 2 else b[sel, :]
        if a.size == 0:
            raise DomainError("psnr mask selects no pixels")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_taps(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _ssim_map_single(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    taps = _gaussian_taps(SSIM_WINDOW, SSIM_SIGMA)
    r = SSIM_WINDOW // 2

    def win(arr):
        # separable Gaussian window; crop to positions where it fits fully
        tmp = ndimage.correlate1d(arr, taps, axis=0, mode="constant")
        return ndimage.correlate1d(tmp, taps, axis=1, mode="constant")[r:-r, r:-r]

    mu_x = win(x)
    mu_y = win(y)
    e_xx = win(x * x)
    e_yy = win(y * y)
    e_xy = win(x * y)
    var_x = e_xx - mu_x * mu_x
    var_y = e_yy - mu_y * mu_y
    cov = e_xy - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim(ref: Image, test: Image, mask: BinaryMask | None = None) -> float:
    """Mean structural similarity over 11x11 Gaussian windows (sigma 1.5, L = 1).

    Channels are averaged. Windows are "valid": only positions where the
    full window fits contribute. With a mask, only windows centered on
    masked pixels are averaged.
    """
    if ref.extents != test.extents or ref.channels != test.channels:
        raise ShapeError("ssim inputs must share extents and channels")
    if min(ref.extents) < SSIM_WINDOW:
        raise ShapeError(f"images must be at least {SSIM_WINDOW} px on each side")
    r = SSIM_WINDOW // 2
    sel = None
    if mask is not None:
        if mask.extents != ref.extents:
            raise ShapeError("ssim mask extents differ from images")
        sel = mask.as_bool()[r:-r, r:-r]
        if not sel.any():
            raise DomainError("ssim mask selects no interior windows")
    vals = []
    for c in range(ref.channels):
        x = (ref.data if ref.channels == 1 else ref.data[:, :, c]).astype(np.float64)
        y = (test.data if test.channels == 1 else test.data[:, :, c]).astype(np.float64)
        smap = _ssim_map_single(x, y)
        vals.append(float(smap[sel].mean() if sel is not None else smap.mean()))
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# Records and aggregation
# ---------------------------------------------------------------------------

RECORD_FIELDS = (
    "sample_id",
    "condition",
    "bin",
    "mask_ratio",
    "psnr",
    "ssim",
    "missed",
    "excess",
    "iou",
)


@dataclass(frozen=True)
class MetricsRecord:
    sample_id: str
    condition: str
    bin_label: str
    mask_ratio: float
    psnr: float
    ssim: float
    coverage: CoverageStats | None = None

    def __post_init__(self):
        if not (-1.0 - 1e-9 <= self.ssim <= 1.0 + 1e-9):
            raise ShapeError(f"ssim out of [-1, 1]: {self.ssim}")
        if not (self.psnr > 0 or math.isinf(self.psnr)):
            raise ShapeError(f"psnr must be positive or +inf, got {self.psnr}")

    def csv_row(self) -> list[str]:
        cov = self.coverage
        return [
            self.sample_id,
            self.condition,
            self.bin_label,
            repr(float(self.mask_ratio)),
            repr(float(self.psnr)),
            repr(float(self.ssim)),
            "" if cov is None else str(cov.missed),
            "" if cov is None else str(cov.excess),
            "" if cov is None else repr(float(cov.iou)),
        ]


def bin_label(lo: float, hi: float) -> str:
    def fmt(v: float) -> str:
        return str(int(v)) if float(v).is_integer() else repr(float(v))

    return f"{fmt(lo)}-{fmt(hi)}"


def bin_for_ratio(ratio: float, bins: Sequence[tuple[float, float]]) -> str:
    """Half-open bin lookup: [lo, hi)."""
    for lo, hi in bins:
        if lo <= ratio < hi:
            return bin_label(lo, hi)
    raise DomainError(f"mask ratio {ratio} falls outside all bins {list(bins)}")


@dataclass(frozen=True)
class AggregateCell:
    condition: str
    bin_label: str
    count: int
    psnr_mean: float
    psnr_inf_count: int
    ssim_mean: float
    missed_mean: float | None
    excess_mean: float | None
    iou_mean: float | None


def aggregate(records: Iterable[MetricsRecord]) -> list[AggregateCell]:
    """Mean metrics per (condition, bin) cell.

    Infinite PSNR values are excluded from the mean and counted separately.
    Cells come back sorted by (condition, bin) for stable output.
    """
    records = list(records)
    if not records:
        raise DomainError("nothing to aggregate")
    cells: dict[tuple[str, str], list[MetricsRecord]] = {}
    for rec in records:
        cells.setdefault((rec.condition, rec.bin_label), []).append(rec)
    out = []
    for (cond, blabel) in sorted(cells):
        group = cells[(cond, blabel)]
        finite = [r.psnr for r in group if not math.isinf(r.psnr)]
        covs = [r.coverage for r in group if r.coverage is not None]
        out.append(
            AggregateCell(
                condition=cond,
                bin_label=blabel,
                count=len(group),
                psnr_mean=float(np.mean(finite)) if finite else math.inf,
                psnr_inf_count=sum(1 for r in group if math.isinf(r.psnr)),
                ssim_mean=float(np.mean([r.ssim for r in group])),
                missed_mean=float(np.mean([c.missed for c in covs])) if covs else None,
                excess_mean=float(np.mean([c.excess for c in covs])) if covs else None,
                iou_mean=float(np.mean([c.iou for c in covs])) if covs else None,
            )
        )
    return out


def write_records_csv(records: Sequence[MetricsRecord], path) -> None:
    lines = [",".join(RECORD_FIELDS)]
    for rec in sorted(records, key=lambda r: (r.sample_id, r.condition)):
        lines.append(",".join(rec.csv_row()))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_aggregate_csv(cells: Sequence[AggregateCell], path) -> None:
    header = "condition,bin,count,psnr_mean,psnr_inf_count,ssim_mean,missed_mean,excess_mean,iou_mean"
    lines = [header]
    for c in cells:
        lines.append(
            ",".join(
                [
                    c.condition,
                    c.bin_label,
                    str(c.count),
                    repr(float(c.psnr_mean)),
                    str(c.psnr_inf_count),
                    repr(float(c.ssim_mean)),
                    "" if c.missed_mean is None else repr(float(c.missed_mean)),
                    "" if c.excess_mean is None else repr(float(c.excess_mean)),
                    "" if c.iou_mean is None else repr(float(c.iou_mean)),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
