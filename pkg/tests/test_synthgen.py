import json

import numpy as np
import pytest

from mmdseg import SynthConfig, generate_moving5, generate_video, make_rng, render_glyph
from mmdseg.learner import Segmentation
from mmdseg.synthgen import CANVAS, N_CLASSES, trajectory_points, write_dataset

GOLDEN_PIXEL_COUNTS = [148, 252, 152, 169, 272]


class TestRenderGlyph:
    def test_deterministic(self):
        a = render_glyph(2, (10.2, 17.8))
        b = render_glyph(2, (10.2, 17.8))
        assert np.array_equal(a, b)

    def test_classes_differ_at_same_position(self):
        for a in range(N_CLASSES):
            for b in range(a + 1, N_CLASSES):
                fa = render_glyph(a, (14, 14)).sum(axis=2) > 0
                fb = render_glyph(b, (14, 14)).sum(axis=2) > 0
                assert int(np.sum(fa != fb)) >= 10, (a, b)

    def test_golden_pixel_counts(self):
        counts = [int(np.count_nonzero(render_glyph(c, (14, 14)).sum(axis=2)))
                  for c in range(N_CLASSES)]
        assert counts == GOLDEN_PIXEL_COUNTS

    def test_values_in_unit_interval(self):
        f = render_glyph(4, (5, 25))
        assert f.min() >= 0.0 and f.max() <= 1.0

    def test_position_clamped_inside_canvas(self):
        f = render_glyph(1, (-40, 90))
        assert f.shape == (CANVAS, CANVAS, 3)
        assert np.count_nonzero(f) > 0


class TestTrajectories:
    def test_top_to_bottom_ends_at_bottom_edge(self):
        for length in (5, 11, 30):
            last = trajectory_points(0, length)[-1]
            frame = render_glyph(0, last)
            rows = np.nonzero(frame.sum(axis=2))[0]
            assert rows.max() == CANVAS - 1  # glyph touches the bottom edge

    def test_full_traversal_regardless_of_length(self):
        from mmdseg.synthgen import TRAJECTORIES
        for class_id in range(N_CLASSES):
            (r0, c0), (r1, c1) = TRAJECTORIES[class_id]
            full = np.hypot(r1 - r0, c1 - c0)
            for length in (5, 30):
                pts = trajectory_points(class_id, length)
                span = np.linalg.norm(pts[-1] - pts[0])
                assert span == pytest.approx(full)  # endpoints reached at any length
                steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
                assert np.allclose(steps, span / (length - 1), atol=1e-9)


class TestGenerateVideo:
    def test_no_repeats_gives_five_segments(self):
        cfg = SynthConfig(max_repeats=1, seed=5)
        v = generate_video(make_rng(5), cfg)
        seg = Segmentation.from_labels(v.labels)
        assert len(seg.segments) == N_CLASSES
        assert sorted(lab for _, _, lab in seg.segments) == list(range(N_CLASSES))

    def test_length_envelope(self):
        for i in range(10):
            v = generate_video(make_rng(6, i), SynthConfig(seed=6))
            assert 25 <= v.n_frames <= 210

    def test_rows_unit_norm_with_labels(self):
        v = generate_video(make_rng(7), SynthConfig(seed=7))
        assert np.allclose(np.linalg.norm(v.frames, axis=1), 1.0, atol=1e-12)
        assert v.frames.shape[1] == CANVAS * CANVAS * 3
        assert v.labels is not None and len(v.labels) == v.n_frames

    def test_labels_match_segment_plan(self):
        for i in range(10):
            v = generate_video(make_rng(8, i), SynthConfig(seed=8))
            seg = Segmentation.from_labels(v.labels)
            for _, _, lab in seg.segments:
                assert 0 <= lab < N_CLASSES
            n_rep = sum(1 for _, _, lab in seg.segments if lab == 1)
            assert 1 <= n_rep <= 3
            assert len(seg.segments) == 4 + n_rep
            for (_, _, a), (_, _, b) in zip(seg.segments, seg.segments[1:]):
                assert a != b


class TestGenerateMoving5:
    def test_identical_seeds_identical_datasets(self):
        a = generate_moving5(SynthConfig(n_videos=4, seed=9), split="test")
        b = generate_moving5(SynthConfig(n_videos=4, seed=9), split="test")
        for va, vb in zip(a, b):
            assert np.array_equal(va.frames, vb.frames)
            assert np.array_equal(va.labels, vb.labels)

    def test_splits_differ(self):
        cfg = SynthConfig(n_videos=2, seed=10)
        a = generate_moving5(cfg, split="train")
        b = generate_moving5(cfg, split="val")
        assert not np.array_equal(a[0].frames, b[0].frames)

    def test_repeated_action_videos_are_common(self):
        videos = generate_moving5(SynthConfig(n_videos=50, seed=0), split="test")
        with_repeats = sum(
            1 for v in videos
            if sum(1 for _, _, lab in Segmentation.from_labels(v.labels).segments if lab == 1) >= 2
        )
        assert with_repeats >= 15  # at least 30% of the pinned split


class TestWriteDataset:
    def test_layout_and_manifest(self, tmp_path):
        cfg = SynthConfig(n_videos=2, seed=11)
        manifest = write_dataset(tmp_path, cfg)
        assert sorted(manifest["splits"]) == ["test", "train", "val"]
        feature_files = sorted(tmp_path.glob("*/*_features.txt"))
        label_files = sorted(tmp_path.glob("*/*_labels.txt"))
        assert len(feature_files) == 6 and len(label_files) == 6
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["videos_per_split"] == 2
        for split, entries in on_disk["splits"].items():
            for entry in entries:
                assert (tmp_path / entry["features"]).exists()
                assert (tmp_path / entry["labels"]).exists()
