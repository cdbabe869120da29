from __future__ import annotations

import json

import numpy as np
import pytest
from PIL import Image

from helpers import scene
from ovcd.dataset import (
    PairPaths,
    discover_pairs,
    load_class_map,
    load_image,
    load_pair,
    read_manifest,
    save_class_map,
)
from ovcd.errors import OvcdError, ValidationError


def write_png(path, array):
    Image.fromarray(array).save(path, format="PNG")


@pytest.fixture
def pair_tree(tmp_path):
    for sub in ("A", "B", "label"):
        (tmp_path / sub).mkdir()
    rng = np.random.default_rng(70)
    for name in ("p1.png", "p2.png"):
        write_png(tmp_path / "A" / name, rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
        write_png(tmp_path / "B" / name, rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
    write_png(tmp_path / "label" / "p1.png", np.zeros((8, 8), dtype=np.uint8))
    return tmp_path


class TestLoadImage:
    def test_rgb_round_trip(self, tmp_path):
        img = scene()
        write_png(tmp_path / "x.png", img)
        assert np.array_equal(load_image(tmp_path / "x.png"), img)

    def test_grayscale_gets_channel_axis(self, tmp_path):
        gray = np.arange(64, dtype=np.uint8).reshape(8, 8)
        write_png(tmp_path / "g.png", gray)
        loaded = load_image(tmp_path / "g.png")
        assert loaded.shape == (8, 8, 1)
        assert np.array_equal(loaded[:, :, 0], gray)

    def test_rgba_collapses_to_rgb(self, tmp_path):
        rgba = np.zeros((4, 4, 4), dtype=np.uint8)
        rgba[..., 3] = 255
        write_png(tmp_path / "a.png", rgba)
        assert load_image(tmp_path / "a.png").shape == (4, 4, 3)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OvcdError):
            load_image(tmp_path / "nope.png")


class TestClassMapIo:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(71)
        cmap = rng.integers(0, 5, (12, 9)).astype(np.uint8)
        save_class_map(tmp_path / "m.png", cmap)
        assert np.array_equal(load_class_map(tmp_path / "m.png"), cmap)

    def test_wrong_dtype_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            save_class_map(tmp_path / "m.png", np.zeros((4, 4), dtype=np.int32))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OvcdError):
            load_class_map(tmp_path / "nope.png")


class TestDiscoverPairs:
    def test_sorted_with_optional_labels(self, pair_tree):
        pairs = discover_pairs(pair_tree)
        assert [p.pair_id for p in pairs] == ["p1", "p2"]
        assert pairs[0].label is not None
        assert pairs[1].label is None
        loaded = load_pair(pairs[0])
        assert loaded.pair_id == "p1"
        assert loaded.shape == (8, 8)

    def test_missing_counterpart(self, pair_tree):
        (pair_tree / "A" / "p3.png").write_bytes((pair_tree / "A" / "p1.png").read_bytes())
        with pytest.raises(OvcdError):
            discover_pairs(pair_tree)

    def test_missing_directories_and_empty(self, tmp_path):
        with pytest.raises(OvcdError):
            discover_pairs(tmp_path)
        (tmp_path / "A").mkdir()
        (tmp_path / "B").mkdir()
        with pytest.raises(OvcdError):
            discover_pairs(tmp_path)


class TestReadManifest:
    def test_relative_paths_resolve_against_manifest(self, pair_tree):
        manifest = pair_tree / "pairs.json"
        manifest.write_text(json.dumps([
            {"pair_id": "one", "t1": "A/p1.png", "t2": "B/p1.png", "label": "label/p1.png"},
            {"pair_id": "two", "t1": "A/p2.png", "t2": "B/p2.png"},
        ]))
        pairs = read_manifest(manifest)
        assert [p.pair_id for p in pairs] == ["one", "two"]
        assert pairs[0].t1 == pair_tree / "A" / "p1.png"
        assert pairs[0].label == pair_tree / "label" / "p1.png"
        assert pairs[1].label is None

    def test_malformed_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{}")
        with pytest.raises(OvcdError):
            read_manifest(path)
        path.write_text(json.dumps([{"pair_id": "x", "t1": "a.png"}]))
        with pytest.raises(OvcdError):
            read_manifest(path)
        with pytest.raises(OvcdError):
            read_manifest(tmp_path / "absent.json")
