import numpy as np
import pytest

from beewatch.backends import (
    BackendDescriptor,
    FixedTimingBackend,
    ModelFileBackend,
    ReplayBackend,
    ReplayNoise,
    decode_candidates,
    detect_frame,
    load_backend_descriptor,
    parse_backend_spec,
)
from beewatch.errors import BackendError
from beewatch.nms import NmsConfig
from beewatch.timing import FrameTiming, aggregate_timings
from beewatch.video import Frame

from .conftest import write_truth_dir


def frame(index=0, width=416, height=416):
    return Frame(index=index, width=width, height=height)


TRUTH = {
    0: [(0, 0.5, 0.5, 0.25, 0.25), (0, 0.2, 0.2, 0.1, 0.1)],
    1: [],
    2: [(0, 0.7, 0.7, 0.2, 0.2)],
}


@pytest.fixture
def truth_dir(tmp_path):
    return write_truth_dir(tmp_path / "truth", TRUTH)


class TestFrameTiming:
    def test_additivity(self):
        t = FrameTiming.from_stages(1.0, 2.0, 3.0)
        assert t.total_ms == 6.0
        assert t.is_additive()

    def test_non_additive_flaggable(self):
        t = FrameTiming(1.0, 2.0, 3.0, 9.0)
        assert not t.is_additive()

    def test_negative_rejected(self):
        with pytest.raises(BackendError):
            FrameTiming(-1.0, 0, 0, 0)

    def test_aggregate_single(self):
        assert aggregate_timings([FrameTiming(1, 2, 3, 6)]) == FrameTiming(1, 2, 3, 6)

    def test_aggregate_pair(self):
        mean = aggregate_timings([FrameTiming(0, 4, 2, 6), FrameTiming(2, 4, 0, 6)])
        assert mean == FrameTiming(1, 4, 1, 6)

    def test_aggregate_empty_errors(self):
        with pytest.raises(BackendError):
            aggregate_timings([])

    def test_aggregate_matches_direct_sum(self, rng):
        timings = [
            FrameTiming.from_stages(*rng.uniform(0, 10, size=3)) for _ in range(996)
        ]
        mean = aggregate_timings(timings)
        assert mean.pre_process_ms == pytest.approx(
            sum(t.pre_process_ms for t in timings) / len(timings), abs=1e-12
        )
        assert mean.total_ms == pytest.approx(
            mean.pre_process_ms + mean.inference_ms + mean.nms_ms, abs=0.1
        )


class TestReplayBackend:
    def test_zero_noise_reproduces_truth(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir)
        detections, timing = backend.detect(frame(0))
        assert len(detections) == 2
        assert all(d.confidence == 1.0 for d in detections)
        # 0.5-centered 0.25-sized box in a 416 frame: [156, 156, 260, 260]
        boxes = sorted((d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max) for d in detections)
        assert boxes[1] == pytest.approx((156.0, 156.0, 260.0, 260.0))
        assert timing.is_additive()

    def test_empty_truth_frame(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir)
        detections, _ = backend.detect(frame(1))
        assert detections == []

    def test_unknown_frame_errors(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir)
        with pytest.raises(BackendError):
            backend.detect(frame(99))

    def test_full_drop_rate(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir, noise=ReplayNoise(drop_rate=1.0))
        assert backend.detect(frame(0))[0] == []

    def test_drop_deterministic_across_instances(self, truth_dir):
        noise = ReplayNoise(drop_rate=0.5, confidence_range=(0.5, 1.0))
        a = ReplayBackend.from_annotation_dir(truth_dir, noise=noise, seed=11)
        b = ReplayBackend.from_annotation_dir(truth_dir, noise=noise, seed=11)
        for idx in (0, 1, 2):
            assert a.detect(frame(idx))[0] == b.detect(frame(idx))[0]

    def test_determinism_independent_of_visit_order(self, truth_dir):
        noise = ReplayNoise(drop_rate=0.3, jitter_px=2.0)
        a = ReplayBackend.from_annotation_dir(truth_dir, noise=noise, seed=5)
        b = ReplayBackend.from_annotation_dir(truth_dir, noise=noise, seed=5)
        forward = {idx: a.detect(frame(idx))[0] for idx in (0, 1, 2)}
        backward = {idx: b.detect(frame(idx))[0] for idx in (2, 1, 0)}
        assert forward == backward

    def test_jitter_bounded(self, truth_dir):
        jitter = 2.0
        backend = ReplayBackend.from_annotation_dir(truth_dir, noise=ReplayNoise(jitter_px=jitter))
        clean = ReplayBackend.from_annotation_dir(truth_dir)
        for idx in (0, 2):
            noisy_dets = backend.detect(frame(idx))[0]
            clean_dets = clean.detect(frame(idx))[0]
            for noisy in noisy_dets:
                closest = min(
                    abs(noisy.box.x_min - c.box.x_min) for c in clean_dets
                )
                assert closest <= jitter + 1e-9

    def test_boxes_stay_in_frame(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir, noise=ReplayNoise(jitter_px=50.0))
        for idx in (0, 2):
            for d in backend.detect(frame(idx, width=100, height=80))[0]:
                assert 0 <= d.box.x_min <= d.box.x_max <= 100
                assert 0 <= d.box.y_min <= d.box.y_max <= 80


class TestDetectFrame:
    def test_wraps_unexpected_errors(self):
        class Broken(FixedTimingBackend):
            def detect(self, _):
                raise RuntimeError("kaput")

        with pytest.raises(BackendError) as exc_info:
            detect_frame(Broken(1, 1, 1), frame())
        assert exc_info.value.stage == "inference"

    def test_passes_backend_errors_through(self, truth_dir):
        backend = ReplayBackend.from_annotation_dir(truth_dir)
        with pytest.raises(BackendError):
            detect_frame(backend, frame(99))


class TestDecodeCandidates:
    def test_decodes_and_scales(self):
        raw = np.array(
            [
                [208, 208, 100, 50, 0.9, 0.8],   # conf 0.72
                [100, 100, 40, 40, 0.2, 0.5],    # conf 0.10 -> dropped
            ]
        )
        dets = decode_candidates(raw, 416, 0.25)
        assert len(dets) == 1
        assert dets[0].confidence == pytest.approx(0.72)
        assert (dets[0].box.x_min, dets[0].box.x_max) == (158.0, 258.0)

    def test_batch_dimension_squeezed(self):
        raw = np.zeros((1, 3, 6))
        raw[0, :, :5] = [208, 208, 10, 10, 1.0]
        raw[0, :, 5] = 1.0
        assert len(decode_candidates(raw, 416, 0.25)) == 3

    def test_multiclass_argmax(self):
        raw = np.array([[100, 100, 20, 20, 1.0, 0.2, 0.9]])
        dets = decode_candidates(raw, 416, 0.25)
        assert dets[0].class_id == 1
        assert dets[0].confidence == pytest.approx(0.9)

    def test_bad_shape_errors(self):
        with pytest.raises(BackendError):
            decode_candidates(np.zeros((4, 3)), 416, 0.25)

    def test_golden_decode(self):
        # Pinned decode of a fixed candidate tensor: two overlapping rows of
        # the same class collapse to one detection after suppression.
        from beewatch.nms import suppress

        raw = np.array(
            [
                [200, 200, 80, 80, 0.95, 1.0],
                [204, 204, 80, 80, 0.90, 1.0],
                [60, 60, 30, 30, 0.60, 0.9],
            ]
        )
        dets = suppress(decode_candidates(raw, 416, 0.25), NmsConfig())
        assert [(d.box.x_min, d.box.y_min, round(d.confidence, 4)) for d in dets] == [
            (160.0, 160.0, 0.95),
            (45.0, 45.0, 0.54),
        ]


class TestDescriptor:
    def test_load_descriptor(self, tmp_path):
        path = tmp_path / "model.desc"
        path.write_text(
            "name = bee-v5s\ninput_size = 416\nclass_names = bee\n"
            "iou_threshold = 0.5\nconfidence_floor = 0.3\nmax_detections = 100\n"
        )
        desc = load_backend_descriptor(path)
        assert desc.name == "bee-v5s"
        assert desc.input_size == 416
        assert desc.nms == NmsConfig(0.5, 0.3, 100)

    def test_malformed_descriptor(self, tmp_path):
        path = tmp_path / "bad.desc"
        path.write_text("no equals sign here\n")
        with pytest.raises(BackendError):
            load_backend_descriptor(path)

    def test_invalid_input_size(self):
        with pytest.raises(BackendError):
            BackendDescriptor(name="x", model="y", input_size=0)


class TestParseBackendSpec:
    def test_replay_spec(self, truth_dir):
        backend = parse_backend_spec(f"replay:{truth_dir},drop=0.5,jitter=2,seed=3")
        assert isinstance(backend, ReplayBackend)

    def test_mock_spec(self):
        backend = parse_backend_spec("mock:pre=1,inf=2,nms=3")
        _, timing = backend.detect(frame())
        assert (timing.pre_process_ms, timing.inference_ms, timing.nms_ms, timing.total_ms) == (
            1.0,
            2.0,
            3.0,
            6.0,
        )

    def test_unknown_kind(self):
        with pytest.raises(BackendError):
            parse_backend_spec("magic:beans")

    def test_unknown_option(self, truth_dir):
        with pytest.raises(BackendError):
            parse_backend_spec(f"replay:{truth_dir},wat=1")

    def test_model_missing_file(self):
        with pytest.raises(BackendError) as exc_info:
            parse_backend_spec("model:/nope/model.onnx")
        assert exc_info.value.stage == "load"


class TestModelFileBackend:
    def test_requires_runtime_or_skips(self, tmp_path):
        pytest.importorskip("onnxruntime", reason="ONNX runtime not on the package mirror")
        # Runtime present: loading garbage must fail at the load stage.
        bogus = tmp_path / "model.onnx"
        bogus.write_bytes(b"not a model")
        with pytest.raises(BackendError) as exc_info:
            ModelFileBackend(bogus)
        assert exc_info.value.stage == "load"
