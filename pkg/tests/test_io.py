"""File formats, KITTI import, and config round trips."""

import json
import math

import numpy as np
import pytest

from uatrack.boxes import Box3D, BoxVariance
from uatrack.io import (
    DetectionRecord,
    FormatError,
    RunConfig,
    config_from_dict,
    config_to_dict,
    detections_to_frames,
    load_config,
    parse_kitti_labels,
    read_detections,
    read_tracks,
    save_config,
    write_detections,
    write_tracks,
)


def random_records(rng, n, with_var=True):
    out = []
    for i in range(n):
        box = Box3D(
            x=rng.uniform(-80, 80), y=rng.uniform(-80, 80), z=rng.uniform(-2, 2),
            w=rng.uniform(0.3, 5), l=rng.uniform(0.3, 5), h=rng.uniform(0.3, 5),
            theta=rng.uniform(-math.pi, math.pi),
            class_id="Car", score=rng.uniform(0.01, 1.0),
        )
        var = BoxVariance(*rng.uniform(1e-4, 4.0, 7)) if with_var else None
        out.append(DetectionRecord(int(rng.integers(0, 50)), box, var))
    return out


class TestDetectionsRoundTrip:
    def test_round_trip_with_variance(self, tmp_path):
        rng = np.random.default_rng(0)
        records = random_records(rng, 1000)
        path = tmp_path / "dets.csv"
        write_detections(path, records)
        back = read_detections(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert a.frame == b.frame
            assert b.box.x == pytest.approx(a.box.x, rel=1e-8)
            assert b.variance.var_theta == pytest.approx(a.variance.var_theta, rel=1e-8)

    def test_write_is_bit_stable(self, tmp_path):
        # a second write of the parsed records reproduces the bytes
        rng = np.random.default_rng(1)
        records = random_records(rng, 300)
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        write_detections(p1, records)
        write_detections(p2, read_detections(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_without_variance(self, tmp_path):
        rng = np.random.default_rng(2)
        records = random_records(rng, 10, with_var=False)
        path = tmp_path / "plain.csv"
        write_detections(path, records)
        back = read_detections(path)
        assert all(r.variance is None for r in back)
        frames = detections_to_frames(back)
        assert all(d.variance is None for f in frames for d in f)

    def test_mixed_variance_rejected(self, tmp_path):
        rng = np.random.default_rng(3)
        records = random_records(rng, 4, with_var=True) + random_records(rng, 1, with_var=False)
        with pytest.raises(FormatError):
            write_detections(tmp_path / "x.csv", records)

    def test_missing_version_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("frame,class,x,y,z,w,l,h,theta,score\n")
        with pytest.raises(FormatError):
            read_detections(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# uatrack-v1\nframe,x\n")
        with pytest.raises(FormatError):
            read_detections(path)

    def test_field_count_error_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# uatrack-v1\nframe,class,x,y,z,w,l,h,theta,score\n0,Car,1,2\n")
        with pytest.raises(FormatError, match=":3:"):
            read_detections(path)


class TestTracksRoundTrip:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        rows = [(r.frame, i + 1, r.box) for i, r in enumerate(random_records(rng, 100, with_var=False))]
        path = tmp_path / "tracks.csv"
        write_tracks(path, rows)
        back = read_tracks(path)
        assert [(f, i) for f, i, _ in back] == [(f, i) for f, i, _ in rows]
        assert back[0][2].l == pytest.approx(rows[0][2].l, rel=1e-8)


class TestKittiLabels:
    CAR_LINE = "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59"

    def test_single_car_line(self, tmp_path):
        path = tmp_path / "label.txt"
        path.write_text(self.CAR_LINE + "\n")
        frames = parse_kitti_labels(path)
        assert list(frames) == [0]
        b = frames[0][0]
        assert (b.h, b.w, b.l) == (1.65, 1.67, 3.64)
        # camera (x right, y down, z fwd) -> internal (x fwd, y left, z up)
        assert b.x == pytest.approx(46.70)
        assert b.y == pytest.approx(0.65)
        assert b.z == pytest.approx(-1.71 + 1.65 / 2)
        assert b.theta == pytest.approx(-(-1.59) - math.pi / 2, abs=1e-9)
        assert b.class_id == "Car"

    def test_dontcare_skipped(self, tmp_path):
        path = tmp_path / "label.txt"
        path.write_text(
            "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10\n"
            + self.CAR_LINE + "\n"
        )
        frames = parse_kitti_labels(path)
        assert len(frames[0]) == 1

    def test_tracking_format(self, tmp_path):
        path = tmp_path / "seq.txt"
        path.write_text(
            "0 2 " + self.CAR_LINE + "\n"
            "1 2 " + self.CAR_LINE + "\n"
        )
        frames = parse_kitti_labels(path)
        assert sorted(frames) == [0, 1]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        assert parse_kitti_labels(path) == {}

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(self.CAR_LINE + "\nCar 1 2 3\n")
        with pytest.raises(FormatError, match=":2:"):
            parse_kitti_labels(path)


class TestRunConfig:
    def test_default_round_trip(self, tmp_path):
        cfg = RunConfig()
        path = tmp_path / "cfg.json"
        save_config(path, cfg)
        again = load_config(path)
        assert config_to_dict(again) == config_to_dict(cfg)

    def test_modified_round_trip(self):
        d = config_to_dict(RunConfig())
        d["tracker"]["gate_distance"] = 7.5
        d["scenario"]["noise_range_coeff"] = [0.01] * 7
        d["scoring"]["strategy"] = "exponential"
        cfg = config_from_dict(d)
        assert cfg.tracker.gate_distance == 7.5
        assert config_to_dict(cfg)["scoring"]["strategy"] == "exponential"
        assert config_to_dict(cfg) == json.loads(json.dumps(config_to_dict(cfg)))

    def test_unknown_top_level_key(self):
        with pytest.raises(FormatError, match="unknown config key"):
            config_from_dict({"bogus": 1})

    def test_unknown_section_key(self):
        with pytest.raises(FormatError, match="tracker"):
            config_from_dict({"tracker": {"gate": 1.0}})

    def test_default_obs_sigma_maps_to_variance(self):
        cfg = config_from_dict({"tracker": {"default_obs_sigma": [0.5] * 7}})
        assert cfg.tracker.default_obs_noise.var_x == pytest.approx(0.25)

    def test_process_noise_diag_length_checked(self):
        with pytest.raises(FormatError):
            config_from_dict({"tracker": {"process_noise_diag": [1.0, 2.0]}})
