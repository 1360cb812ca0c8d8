import numpy as np
import pytest

from inpaintmask.image import BinaryMask
from inpaintmask.synth import build_procedural_sources, generate_dataset, load_dataset


def random_mask(rng: np.random.Generator, shape=(16, 16), p=0.3) -> BinaryMask:
    """Random non-degenerate mask (neither empty nor full)."""
    while True:
        m = rng.random(shape) < p
        if m.any() and not m.all():
            return BinaryMask(m)


def random_blob_mask(rng: np.random.Generator, shape=(32, 32)) -> BinaryMask:
    """Random connected-ish blob: a few stamped disks. Never empty or full."""
    h, w = shape
    canvas = np.zeros(shape, dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(int(rng.integers(1, 4))):
        cy, cx = rng.uniform(4, h - 4), rng.uniform(4, w - 4)
        r = rng.uniform(2, min(h, w) / 4)
        canvas |= (yy - cy) ** 2 + (xx - cx) ** 2 <= r ** 2
    if not canvas.any():
        canvas[h // 2, w // 2] = True
    canvas[0, 0] = False
    return BinaryMask(canvas)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A 16-sample 96x96 suite shared across tests (4 samples per ratio bin)."""
    root = tmp_path_factory.mktemp("ds") / "suite"
    sources = build_procedural_sources(6, (96, 96), seed=7)
    generate_dataset(sources, 16, seed=7, out_dir=root)
    return root, load_dataset(root)
