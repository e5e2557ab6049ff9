import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import clickrefine.model as M
from clickrefine.errors import ConfigError, ShapeError, ValidationError
from clickrefine.evaluation import (DegradedOracleSegmenter, EvalConfig,
                                    InstanceRecord, ModelSegmenter,
                                    OracleSegmenter, ZeroSegmenter,
                                    clicks_to_reach, decode_rle_counts,
                                    decode_rle_string, evaluate_instance,
                                    import_coco, iou, load_manifest,
                                    make_segmenter_factory, miou_curve, noc,
                                    polygons_to_mask, run_benchmark,
                                    run_session, write_synthetic_manifest)
from clickrefine.imageio import load_mask_png, save_image_rgb, save_mask_png
from clickrefine.training.synth import synthetic_scene

MICRO = M.ModelConfig(patch=8, embed_dim=8, depth=2, heads=2,
                      early_block_indices=(0, 1), fpn_dims=(4, 4, 8, 8),
                      hq_out_dim=4, decoder_layers=1, input_resolution=32)


# ---------------------------------------------------------------- metrics

class TestIoU:
    def test_identical_nonempty(self):
        mask = np.zeros((9, 9), bool)
        mask[2:6, 3:8] = True
        assert iou(mask, mask) == 1.0

    def test_disjoint(self):
        a = np.zeros((8, 8), bool)
        b = np.zeros((8, 8), bool)
        a[:2], b[6:] = True, True
        assert iou(a, b) == 0.0

    def test_half_overlapping_squares_hand_count(self):
        # A: cols 0-3, B: cols 2-5, rows 0-3 each.  16 px apiece,
        # 8 shared, union 24 -> 8/24 exactly.
        a = np.zeros((10, 10), bool)
        b = np.zeros((10, 10), bool)
        a[0:4, 0:4] = True
        b[0:4, 2:6] = True
        assert iou(a, b) == 8 / 24

    def test_both_empty(self):
        empty = np.zeros((5, 5), bool)
        assert iou(empty, empty) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            iou(np.zeros((4, 4)), np.zeros((4, 5)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**9))
    def test_symmetric_and_bounded(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.random((12, 12)) < 0.4
        b = rng.random((12, 12)) < 0.4
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0
        if a.any():
            assert iou(a, a) == 1.0


class TestNoC:
    def test_first_crossing(self):
        assert noc([[0.7, 0.85, 0.92]], 0.9, 20) == 3.0

    def test_crossing_is_at_least_not_strictly_greater(self):
        assert clicks_to_reach([0.7, 0.9, 0.95], 0.9, 20) == 2

    def test_never_crossing_hits_cap(self):
        assert noc([[0.1] * 20], 0.9, 20) == 20.0

    def test_mean_of_two_curves(self):
        curves = [[0.95, 0.95, 0.95], [0.2, 0.4, 0.91]]
        assert noc(curves, 0.9, 20) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            noc([], 0.9, 20)

    def test_miou_curve_means(self):
        curves = [[0.2, 0.4], [0.6, 0.8]]
        assert miou_curve(curves) == [0.4, 0.6000000000000001]

    def test_miou_curve_mixed_lengths(self):
        with pytest.raises(ShapeError):
            miou_curve([[0.2], [0.3, 0.4]])


# ------------------------------------------------------- manifest loading

class TestManifest:
    def test_empty_manifest(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("[]")
        assert load_manifest(path) == []

    def test_synthetic_round_trip(self, tmp_path):
        manifest = write_synthetic_manifest(tmp_path, count=3, size=32, seed=5)
        records = load_manifest(manifest)
        assert [r.instance_id for r in records] == [
            "synthetic-0000", "synthetic-0001", "synthetic-0002"]
        for r in records:
            image = r.load_image()
            gt = r.load_mask()
            assert image.shape == (3, 32, 32)
            assert image.dtype == np.float32
            assert gt.shape == (32, 32) and gt.dtype == bool and gt.any()

    def test_all_zero_mask_rejected(self, tmp_path):
        save_image_rgb(np.zeros((3, 8, 8), np.float32), tmp_path / "i.png")
        save_mask_png(np.zeros((8, 8), bool), tmp_path / "m.png")
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps(
            [{"image": "i.png", "mask": "m.png", "instance_id": "a"}]))
        with pytest.raises(ValidationError, match="empty instance"):
            load_manifest(manifest)

    def test_errors_are_itemized(self, tmp_path):
        save_image_rgb(np.zeros((3, 8, 8), np.float32), tmp_path / "i.png")
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps([
            {"image": "i.png", "mask": "nope.png", "instance_id": "a"},
            {"image": "i.png", "instance_id": "b"},
            {"image": "i.png", "mask": "i.png", "instance_id": "c",
             "extra": 1},
        ]))
        with pytest.raises(ValidationError) as err:
            load_manifest(manifest)
        message = str(err.value)
        assert "3 bad record(s)" in message
        assert "record 0" in message and "mask file missing" in message
        assert "record 1" in message and "missing keys" in message
        assert "record 2" in message and "unknown keys" in message

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="malformed"):
            load_manifest(path)

    def test_non_array_rejected(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{}")
        with pytest.raises(ValidationError, match="array"):
            load_manifest(path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_manifest(tmp_path / "ghost.json")


# ------------------------------------------------------------ RLE / COCO

def rle_counts_oracle(mask: np.ndarray) -> list[int]:
    """Column-major run walk in plain Python; background run first."""
    flat = np.asarray(mask, bool).T.ravel()
    counts, current, run = [], False, 0
    for v in flat:
        if bool(v) == current:
            run += 1
        else:
            counts.append(run)
            current, run = bool(v), 1
    counts.append(run)
    return counts


def rle_string_oracle(counts: list[int]) -> str:
    """Base-32 varint packing with the delta-from-two-back convention."""
    chars = []
    for i, count in enumerate(counts):
        x = int(count)
        if i > 2:
            x -= int(counts[i - 2])
        while True:
            chunk = x & 0x1F
            x >>= 5
            more = (x != -1) if (chunk & 0x10) else (x != 0)
            if more:
                chunk |= 0x20
            chars.append(chr(chunk + 48))
            if not more:
                break
    return "".join(chars)


class TestRLE:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9), st.integers(1, 23), st.integers(1, 23))
    def test_counts_round_trip_against_walk(self, seed, h, w):
        rng = np.random.default_rng(seed)
        mask = rng.random((h, w)) < rng.uniform(0.05, 0.95)
        counts = rle_counts_oracle(mask)
        assert np.array_equal(decode_rle_counts(counts, h, w), mask)

    def test_counts_start_with_background_run(self):
        mask = np.ones((3, 3), bool)
        assert rle_counts_oracle(mask) == [0, 9]
        assert np.array_equal(decode_rle_counts([0, 9], 3, 3), mask)

    def test_column_major_order(self):
        # one run of 2 down the first column, nothing else
        mask = decode_rle_counts([0, 2, 10], 4, 3)
        expected = np.zeros((4, 3), bool)
        expected[0:2, 0] = True
        assert np.array_equal(mask, expected)

    def test_bad_totals_rejected(self):
        with pytest.raises(ValidationError):
            decode_rle_counts([0, 5], 2, 2)
        with pytest.raises(ValidationError):
            decode_rle_counts([-1, 5], 2, 2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9), st.integers(1, 40), st.integers(1, 40))
    def test_string_decoding_matches_oracle_encoder(self, seed, h, w):
        rng = np.random.default_rng(seed)
        mask = rng.random((h, w)) < 0.5
        counts = rle_counts_oracle(mask)
        encoded = rle_string_oracle(counts)
        assert np.array_equal(decode_rle_string(encoded, h, w), mask)

    def test_long_runs_need_multichunk_varints(self):
        # 70*60 = 4200 > 1024, so runs overflow a two-chunk varint
        mask = np.zeros((70, 60), bool)
        mask[10:50, 20:45] = True
        counts = rle_counts_oracle(mask)
        encoded = rle_string_oracle(counts)
        assert max(counts) > 1024
        assert np.array_equal(decode_rle_string(encoded, 70, 60), mask)

    def test_truncated_string_rejected(self):
        with pytest.raises(ValidationError):
            decode_rle_string(chr(0x20 + 48), 2, 2)

    def test_bad_character_rejected(self):
        with pytest.raises(ValidationError):
            decode_rle_string("\t", 2, 2)


class TestPolygonsAndImport:
    def test_axis_aligned_rectangle(self):
        mask = polygons_to_mask([[1, 1, 5, 1, 5, 4, 1, 4]], 8, 10)
        expected = np.zeros((8, 10), bool)
        expected[1:5, 1:6] = True
        assert np.array_equal(mask, expected)

    def test_union_of_polygons(self):
        mask = polygons_to_mask([[0, 0, 2, 0, 2, 2, 0, 2],
                                 [5, 5, 7, 5, 7, 7, 5, 7]], 9, 9)
        assert mask[0, 0] and mask[6, 6]
        assert not mask[4, 4]

    def test_degenerate_polygon_rejected(self):
        with pytest.raises(ValidationError, match="degenerate"):
            polygons_to_mask([[0, 0, 1, 1]], 4, 4)

    def test_import_coco_end_to_end(self, tmp_path):
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        rng = np.random.default_rng(3)
        for name in ("a.png", "b.png"):
            save_image_rgb(rng.random((3, 12, 14)).astype(np.float32),
                           images_dir / name)
        square = np.zeros((12, 14), bool)
        square[2:7, 3:9] = True
        doc = {
            "images": [
                {"id": 1, "file_name": "a.png", "height": 12, "width": 14},
                {"id": 2, "file_name": "b.png", "height": 12, "width": 14},
            ],
            "annotations": [
                {"id": 10, "image_id": 1,
                 "segmentation": [[3, 2, 8, 2, 8, 6, 3, 6]]},
                {"id": 11, "image_id": 2,
                 "segmentation": {"size": [12, 14],
                                  "counts": rle_counts_oracle(square)}},
                {"id": 12, "image_id": 2,
                 "segmentation": {"size": [12, 14],
                                  "counts": rle_string_oracle(
                                      rle_counts_oracle(square))}},
            ],
        }
        ann_path = tmp_path / "ann.json"
        ann_path.write_text(json.dumps(doc))
        manifest = import_coco(ann_path, images_dir, tmp_path / "out")
        records = load_manifest(manifest)
        assert [r.instance_id for r in records] == ["10", "11", "12"]
        assert np.array_equal(load_mask_png(records[1].mask_path), square)
        assert np.array_equal(load_mask_png(records[2].mask_path), square)
        rect = load_mask_png(records[0].mask_path)
        assert rect[2:7, 3:9].all()

    def test_import_coco_unknown_image_id(self, tmp_path):
        ann_path = tmp_path / "ann.json"
        ann_path.write_text(json.dumps({
            "images": [],
            "annotations": [{"id": 1, "image_id": 99,
                             "segmentation": [[0, 0, 2, 0, 2, 2]]}],
        }))
        with pytest.raises(ValidationError, match="unknown image_id"):
            import_coco(ann_path, tmp_path, tmp_path / "out")

    def test_import_coco_skips_empty_masks(self, tmp_path):
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        save_image_rgb(np.zeros((3, 6, 6), np.float32), images_dir / "a.png")
        ann_path = tmp_path / "ann.json"
        ann_path.write_text(json.dumps({
            "images": [{"id": 1, "file_name": "a.png", "height": 6, "width": 6}],
            "annotations": [
                {"id": 1, "image_id": 1,
                 "segmentation": {"size": [6, 6], "counts": [36]}},
                {"id": 2, "image_id": 1,
                 "segmentation": [[1, 1, 4, 1, 4, 4, 1, 4]]},
            ],
        }))
        manifest = import_coco(ann_path, images_dir, tmp_path / "out")
        assert [r.instance_id for r in load_manifest(manifest)] == ["2"]


# ----------------------------------------------------- session simulation

def scene_pair(size: int, seed: int):
    return synthetic_scene(size, seed)


class SpySegmenter:
    """Replays a fixed probability map and records the maps it was fed."""

    def __init__(self, probs):
        self._probs = np.asarray(probs, np.float32)
        self.m_prev_seen = []
        self.m_mod_seen = []
        self.calls = 0

    def predict(self, image, m_prev, m_mod, clicks):
        self.calls += 1
        self.m_prev_seen.append(np.array(m_prev))
        self.m_mod_seen.append(np.array(m_mod))
        return self._probs.copy()


class TestRunSession:
    def test_oracle_converges_at_click_one(self):
        image, gt = scene_pair(40, 1)
        curve = run_session(OracleSegmenter(gt), image, gt, EvalConfig())
        assert curve == [1.0] * 20
        assert clicks_to_reach(curve, 0.9, 20) == 1

    def test_oracle_called_exactly_once(self):
        image, gt = scene_pair(40, 2)
        spy = SpySegmenter(gt.astype(np.float32))
        curve = run_session(spy, image, gt, EvalConfig())
        assert spy.calls == 1
        assert curve == [1.0] * 20

    def test_zero_segmenter_rides_the_cap(self):
        image, gt = scene_pair(40, 3)
        curve = run_session(ZeroSegmenter(), image, gt, EvalConfig())
        assert curve == [0.0] * 20
        for t in (0.80, 0.85, 0.90):
            assert clicks_to_reach(curve, t, 20) == 20

    def test_curve_length_tracks_budget(self):
        image, gt = scene_pair(32, 4)
        config = EvalConfig(max_clicks=5)
        assert len(run_session(ZeroSegmenter(), image, gt, config)) == 5

    def test_first_round_maps_are_zero(self):
        image, gt = scene_pair(32, 5)
        probs = 0.3 + 0.4 * gt.astype(np.float32)
        probs[:16] *= 0.5
        spy = SpySegmenter(probs)
        run_session(spy, image, gt, EvalConfig(max_clicks=3))
        assert not spy.m_prev_seen[0].any()
        assert not spy.m_mod_seen[0].any()

    def test_modulation_toggle_controls_second_round_map(self):
        image, gt = scene_pair(32, 6)
        probs = 0.3 + 0.4 * gt.astype(np.float32)
        probs[:16] *= 0.5                   # damaged top half keeps IoU low
        on = SpySegmenter(probs)
        run_session(on, image, gt, EvalConfig(max_clicks=3, modulation=True))
        off = SpySegmenter(probs)
        run_session(off, image, gt, EvalConfig(max_clicks=3, modulation=False))
        assert on.calls == off.calls == 3
        assert np.array_equal(off.m_mod_seen[1], off.m_prev_seen[1])
        assert not np.array_equal(on.m_mod_seen[1], on.m_prev_seen[1])
        assert np.array_equal(on.m_prev_seen[1], off.m_prev_seen[1])

    def test_model_segmenter_smoke(self):
        params = M.build_params(MICRO, seed=0)
        image, gt = scene_pair(40, 7)
        seg = ModelSegmenter(params, MICRO)
        curve = run_session(seg, image, gt, EvalConfig(max_clicks=2))
        assert len(curve) == 2
        assert all(0.0 <= v <= 1.0 for v in curve)


class TestDegradedOracle:
    def test_flips_confined_to_boundary_band(self):
        _, gt = scene_pair(48, 8)
        seg = DegradedOracleSegmenter(gt, flip_p=1.0, seed=0)
        band = seg._band
        assert band.any() and not band.all()
        for _ in range(3):
            probs = seg.predict(None, None, None, [])
            changed = (probs >= 0.5) != gt
            assert changed[band].all()
            assert not changed[~band].any()

    def test_zero_noise_is_the_oracle(self):
        image, gt = scene_pair(48, 9)
        seg = DegradedOracleSegmenter(gt, flip_p=0.0, seed=0)
        assert np.array_equal(seg.predict(image, None, None, []),
                              gt.astype(np.float32))

    def test_invalid_flip_p(self):
        _, gt = scene_pair(32, 10)
        with pytest.raises(ConfigError):
            DegradedOracleSegmenter(gt, flip_p=1.5, seed=0)

    def test_noc_monotone_in_noise(self):
        scenes = [scene_pair(48, 100 + i) for i in range(8)]
        config = EvalConfig(max_clicks=20)
        for seed in range(3):
            means = []
            for p in (0.05, 0.1, 0.2):
                curves = [run_session(
                    DegradedOracleSegmenter(gt, p, (seed, i)), image, gt, config)
                    for i, (image, gt) in enumerate(scenes)]
                means.append(noc(curves, 0.90, 20))
            assert means[0] <= means[1] <= means[2]

    def test_curves_flat_in_clicks_on_average(self):
        scenes = [scene_pair(48, 200 + i) for i in range(6)]
        config = EvalConfig(max_clicks=20, iou_thresholds=(1.0,))
        drift = []
        for i, (image, gt) in enumerate(scenes):
            curve = run_session(DegradedOracleSegmenter(gt, 0.15, i),
                                image, gt, config)
            drift.append(np.mean(curve[-5:]) - np.mean(curve[:5]))
        assert abs(float(np.mean(drift))) < 0.05


# ------------------------------------------------------------- benchmark

@pytest.fixture(scope="module")
def bench_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    return write_synthetic_manifest(root, count=6, size=40, seed=21)


class TestEvalConfig:
    def test_defaults(self):
        config = EvalConfig()
        assert config.max_clicks == 20
        assert config.iou_thresholds == (0.80, 0.85, 0.90)

    def test_round_trip(self):
        config = EvalConfig(max_clicks=7, iou_thresholds=(0.5, 0.9),
                            segmenter="degraded:0.1", modulation=False, seed=3)
        assert EvalConfig.from_json(config.to_json()) == config

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            EvalConfig.from_json('{"max_clicks": 5, "bogus": 1}')

    @pytest.mark.parametrize("kwargs", [
        {"max_clicks": 0}, {"max_clicks": 25},
        {"iou_thresholds": ()}, {"iou_thresholds": (0.0,)},
        {"iou_thresholds": (1.2,)}, {"segmenter": ""},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            EvalConfig(**kwargs)


class TestSegmenterFactory:
    def test_known_ids(self):
        _, gt = scene_pair(32, 11)
        record = InstanceRecord("i", "m", "x")
        for spec, cls in (("oracle", OracleSegmenter),
                          ("zero", ZeroSegmenter),
                          ("degraded:0.1", DegradedOracleSegmenter)):
            factory, probe = make_segmenter_factory(spec, seed=0)
            assert isinstance(factory(record, None, gt), cls)
            assert probe is None

    @pytest.mark.parametrize("spec", [
        "foo", "degraded:", "degraded:nope", "degraded:1.5",
        "model:", "oracle:extra", "model:/missing?fine=maybe",
    ])
    def test_bad_ids(self, spec):
        with pytest.raises((ConfigError, ValidationError)):
            make_segmenter_factory(spec, seed=0)

    def test_model_id_loads_checkpoint_with_switches(self, tmp_path):
        params = M.build_params(MICRO, seed=0)
        M.save_checkpoint(str(tmp_path / "ckpt"), params, MICRO)
        factory, probe = make_segmenter_factory(
            f"model:{tmp_path / 'ckpt'}?fine=off&tokens=off", seed=0)
        seg = factory(InstanceRecord("i", "m", "x"), None, None)
        assert isinstance(seg, ModelSegmenter)
        assert seg._use_fine_features is False
        assert seg._use_backbone_tokens is False
        assert probe() == params.checksum()
        # the same instance is reused across records
        assert factory(InstanceRecord("i", "m", "y"), None, None) is seg


class TestRunBenchmark:
    def test_oracle_curve_is_flat_one(self, bench_manifest, tmp_path):
        result = run_benchmark(bench_manifest, EvalConfig(segmenter="oracle"),
                               out_dir=tmp_path)
        assert result.miou_curve == [1.0] * 20
        assert result.noc == {"0.80": 1.0, "0.85": 1.0, "0.90": 1.0}
        assert len(result.per_instance) == 6
        assert result.failures == []
        assert result.failure_fraction == 0.0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["config"]["segmenter"] == "oracle"
        assert report["miou_curve"] == [1.0] * 20
        assert len(report["per_instance"]) == 6
        csv_lines = (tmp_path / "report.csv").read_text().splitlines()
        assert len(csv_lines) == 7
        assert csv_lines[0].startswith("instance_id,noc_0.80,noc_0.85,noc_0.90,iou_01")
        miou_lines = (tmp_path / "miou.csv").read_text().splitlines()
        assert miou_lines[0] == "clicks,miou"
        assert len(miou_lines) == 21

    def test_zero_segmenter_caps_every_threshold(self, bench_manifest):
        result = run_benchmark(bench_manifest, EvalConfig(segmenter="zero"))
        assert result.noc == {"0.80": 20.0, "0.85": 20.0, "0.90": 20.0}
        assert result.miou_curve == [0.0] * 20

    def test_noc_threshold_ordering(self, bench_manifest):
        result = run_benchmark(bench_manifest,
                               EvalConfig(segmenter="degraded:0.15", seed=5))
        assert result.noc["0.80"] <= result.noc["0.85"] <= result.noc["0.90"]
        for entry in result.per_instance:
            for t in (0.80, 0.85, 0.90):
                assert entry["noc"][f"{t:.2f}"] == clicks_to_reach(
                    entry["curve"], t, 20)

    def test_reports_byte_identical_across_runs_and_jobs(self, bench_manifest,
                                                         tmp_path):
        config = EvalConfig(segmenter="degraded:0.1", seed=7)
        run_benchmark(bench_manifest, config, out_dir=tmp_path / "a", jobs=1)
        run_benchmark(bench_manifest, config, out_dir=tmp_path / "b", jobs=3)
        for name in ("report.json", "report.csv", "miou.csv"):
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes()), name

    def test_failures_excluded_and_counted(self, bench_manifest, caplog):
        records = load_manifest(bench_manifest) + [
            InstanceRecord("ghost.png", "ghost.png", "broken")]
        with caplog.at_level("WARNING"):
            result = run_benchmark(records, EvalConfig(segmenter="oracle"))
        assert len(result.per_instance) == 6
        assert len(result.failures) == 1
        assert result.failures[0]["instance_id"] == "broken"
        assert result.failure_fraction == pytest.approx(1 / 7)
        assert result.miou_curve == [1.0] * 20
        assert "broken" in caplog.text

    def test_empty_manifest_gives_empty_result(self, tmp_path):
        result = run_benchmark([], EvalConfig(), out_dir=tmp_path)
        assert result.per_instance == [] and result.noc == {}
        assert result.miou_curve == [] and result.failure_fraction == 0.0

    def test_checksum_guard_catches_parameter_mutation(self, bench_manifest):
        params = M.build_params(MICRO, seed=1)
        records = load_manifest(bench_manifest)[:1]

        class Vandal:
            def predict(self, image, m_prev, m_mod, clicks):
                params.set_data("fuse.theta", params["fuse.theta"].data + 1.0)
                return np.zeros(np.asarray(image).shape[1:], np.float32)

        with pytest.raises(ValidationError, match="changed during evaluation"):
            run_benchmark(records, EvalConfig(segmenter="zero"),
                          segmenter_factory=lambda r, i, g: Vandal(),
                          checksum_probe=params.checksum)

    def test_evaluate_instance_loads_record(self, bench_manifest):
        record = load_manifest(bench_manifest)[0]
        gt = record.load_mask()
        curve = evaluate_instance(OracleSegmenter(gt), record, EvalConfig())
        assert curve == [1.0] * 20
