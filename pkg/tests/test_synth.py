import json

import numpy as np
import pytest

from inpaintmask.errors import GenerationError, ParameterError, PlacementError
from inpaintmask.image import Image, LabelMap
from inpaintmask.synth import (
    build_procedural_sources,
    extract_objects,
    generate_dataset,
    load_dataset,
    load_scene_sources,
    random_irregular_mask,
    superimpose,
)


def _toy_scene():
    img = np.zeros((20, 20, 3))
    img[:, :, 2] = 0.5
    labels = np.zeros((20, 20), dtype=np.int32)
    labels[2:8, 3:9] = 1   # 6x6 object
    labels[12:16, 12:18] = 2  # 4x6 object
    img[labels == 1] = (0.9, 0.2, 0.1)
    img[labels == 2] = (0.1, 0.9, 0.2)
    return Image(img), LabelMap(labels, {0: 0, 1: 1, 2: 1})


class TestExtract:
    def test_no_matching_class_empty_list(self):
        img, labels = _toy_scene()
        assert extract_objects(img, labels, class_filter=9) == []

    def test_cutout_sizes(self):
        img, labels = _toy_scene()
        cuts = extract_objects(img, labels, 1)
        assert len(cuts) == 2
        assert cuts[0].mask.count() == 36
        assert cuts[0].patch.extents == (6, 6)
        assert cuts[1].mask.count() == 24

    def test_disjoint_segments_disjoint_cutouts(self):
        img, labels = _toy_scene()
        cuts = extract_objects(img, labels, 1)
        placed = np.zeros((20, 20), dtype=int)
        placed[2:8, 3:9] += cuts[0].mask.data
        placed[12:16, 12:18] += cuts[1].mask.data
        assert placed.max() == 1


class TestSuperimpose:
    def test_off_mask_identity(self):
        img, labels = _toy_scene()
        cut = extract_objects(img, labels, 1)[0]
        bg = Image(np.full((20, 20, 3), 0.3))
        trip = superimpose(bg, cut, (10, 10), seed=5)
        off = ~trip.mask.as_bool()
        assert np.array_equal(trip.input.data[off], bg.data[off])
        assert trip.seed == 5

    def test_mask_ratio_arithmetic(self):
        img = np.zeros((10, 10, 3))
        labels = np.zeros((10, 10), dtype=np.int32)
        labels[0:5, 0:5] = 1
        cut = extract_objects(Image(img), LabelMap(labels, {0: 0, 1: 1}), 1)[0]
        bg = Image(np.full((100, 100, 3), 0.5))
        trip = superimpose(bg, cut, (50, 50))
        assert trip.mask_ratio == pytest.approx(25 / 10000 * 100)
        assert not trip.clipped

    def test_determinism(self):
        img, labels = _toy_scene()
        cut = extract_objects(img, labels, 1)[1]
        bg = Image(np.full((30, 30, 3), 0.4))
        a = superimpose(bg, cut, (7, 7), seed=3)
        b = superimpose(bg, cut, (7, 7), seed=3)
        assert np.array_equal(a.input.data, b.input.data)
        assert np.array_equal(a.mask.data, b.mask.data)

    def test_clipping_recorded(self):
        img, labels = _toy_scene()
        cut = extract_objects(img, labels, 1)[0]
        bg = Image(np.full((20, 20, 3), 0.4))
        trip = superimpose(bg, cut, (0, 0))
        assert trip.clipped
        assert trip.mask.count() < cut.mask.count()

    def test_fully_outside_rejected(self):
        img, labels = _toy_scene()
        cut = extract_objects(img, labels, 1)[0]
        bg = Image(np.full((20, 20, 3), 0.4))
        with pytest.raises(PlacementError):
            superimpose(bg, cut, (-50, -50))


class TestProceduralSources:
    def test_deterministic(self):
        a = build_procedural_sources(3, (64, 64), seed=9)
        b = build_procedural_sources(3, (64, 64), seed=9)
        for (ia, la), (ib, lb) in zip(a, b):
            assert np.array_equal(ia.data, ib.data)
            assert np.array_equal(la.data, lb.data)

    def test_every_scene_has_objects(self):
        for img, labels in build_procedural_sources(6, (96, 96), seed=1):
            cuts = extract_objects(img, labels, 1)
            assert len(cuts) >= 1


class TestGenerateDataset:
    def test_zero_samples(self, tmp_path):
        manifest = generate_dataset([], 0, seed=0, out_dir=tmp_path / "empty")
        assert manifest["samples"] == []
        assert (tmp_path / "empty" / "manifest.json").exists()

    def test_bins_and_offmask_identity(self, small_dataset):
        root, samples = small_dataset
        manifest = json.loads((root / "manifest.json").read_text())
        assert len(samples) == 16
        for entry, sample in zip(manifest["samples"], samples):
            lo, hi = entry["bin"]
            ratio = sample.mask.ratio_percent()
            assert lo <= ratio < hi
            off = ~sample.mask.as_bool()
            assert np.array_equal(sample.input.data[off, :], sample.ground_truth.data[off, :])

    def test_regeneration_byte_identical(self, tmp_path):
        sources = build_procedural_sources(4, (64, 64), seed=3)
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_dataset(sources, 8, seed=11, out_dir=a)
        generate_dataset(sources, 8, seed=11, out_dir=b)
        for name in sorted(p.name for p in a.iterdir()):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_unreachable_bin_errors(self, tmp_path):
        sources = build_procedural_sources(2, (64, 64), seed=4)
        with pytest.raises(GenerationError, match=r"\[90.0, 95.0\)"):
            generate_dataset(sources, 2, ratio_bins=((90.0, 95.0),), seed=0,
                             out_dir=tmp_path / "x", max_attempts=10)


class TestSceneIngestion:
    def test_png_json_sidecar_round_trip(self, tmp_path):
        from inpaintmask.image import save_image, save_label_map

        img, labels = _toy_scene()
        save_image(img, tmp_path / "scene0.png")
        save_label_map(labels, tmp_path / "scene0_labels.png")
        scenes = load_scene_sources(tmp_path)
        assert len(scenes) == 1
        assert np.array_equal(scenes[0][1].data, labels.data)
        assert scenes[0][1].class_of == labels.class_of


class TestRandomIrregularMask:
    def test_ratio_within_tolerance_100_draws(self):
        hits = 0
        for seed in range(100):
            target = 5 + (seed % 8) * 4.0  # 5..33
            m = random_irregular_mask((64, 64), target, seed=seed)
            assert abs(m.ratio_percent() - target) <= 2.0
            hits += 1
        assert hits == 100

    def test_same_seed_identical(self):
        a = random_irregular_mask((48, 48), 20.0, seed=42)
        b = random_irregular_mask((48, 48), 20.0, seed=42)
        assert np.array_equal(a.data, b.data)

    def test_area_monotone_in_target(self):
        lo = random_irregular_mask((64, 64), 5.0, seed=1)
        hi = random_irregular_mask((64, 64), 35.0, seed=1)
        assert hi.count() > lo.count()

    def test_bad_target_rejected(self):
        with pytest.raises(ParameterError):
            random_irregular_mask((32, 32), 0.0, seed=0)
        with pytest.raises(ParameterError):
            random_irregular_mask((32, 32), 100.0, seed=0)


class TestLoadDataset:
    def test_round_trip_fields(self, small_dataset):
        root, samples = small_dataset
        again = load_dataset(root)
        assert [s.id for s in again] == [s.id for s in samples]
        for a, b in zip(samples, again):
            assert np.array_equal(a.mask.data, b.mask.data)
            assert a.seed == b.seed
