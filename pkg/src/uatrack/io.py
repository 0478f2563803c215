"""File formats and run configuration.

Detections and tracks travel as versioned CSV files with a fixed header;
floats are printed with 9 significant digits, which round-trips exactly
through parse/print.  KITTI object/tracking label files can be imported
as ground truth.  Run configuration is namespaced JSON with strict key
checking.

Axis convention: the internal frame is right-handed with z up and the
sensor at the origin.  KITTI camera coordinates (x right, y down,
z forward, yaw ry about y, location at the box bottom) map to it as

    x_internal = z_cam
    y_internal = -x_cam
    z_internal = -y_cam + h/2   (bottom center -> box center)
    theta      = -ry - pi/2     (wrapped)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boxes import Box3D, BoxVariance, DetectionWithCovariance, FrameDetections, wrap_angle
from .metrics import EvalConfig
from .scoring import AggregateMode, IouKind, NmsConfig, ScoreMapConfig, ScoreStrategy
from .sim import ScenarioConfig
from .tracker import TrackerConfig

FORMAT_VERSION_LINE = "# uatrack-v1"

_DET_COLS = ["frame", "class", "x", "y", "z", "w", "l", "h", "theta", "score"]
_VAR_COLS = ["var_x", "var_y", "var_z", "var_w", "var_l", "var_h", "var_theta"]
DET_HEADER = ",".join(_DET_COLS)
DET_HEADER_VAR = ",".join(_DET_COLS + _VAR_COLS)
TRACK_HEADER = ",".join(["frame", "id", "class", "x", "y", "z", "w", "l", "h", "theta", "score"])

KITTI_SKIP_TYPES = {"DontCare"}


class FormatError(ValueError):
    """Raised when a file does not match the expected layout."""


@dataclass(frozen=True)
class DetectionRecord:
    frame: int
    box: Box3D
    variance: BoxVariance | None = None


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _box_fields(box: Box3D) -> list[str]:
    return [box.class_id] + [_fmt(v) for v in (box.x, box.y, box.z, box.w, box.l, box.h, box.theta, box.score)]


def write_detections(path: str | Path, records: list[DetectionRecord]) -> None:
    """Write detection records; variance columns are all-or-none."""
    with_var = [r.variance is not None for r in records]
    if any(with_var) and not all(with_var):
        raise FormatError("either every record carries a variance or none does")
    has_var = bool(records) and with_var[0]
    lines = [FORMAT_VERSION_LINE, DET_HEADER_VAR if has_var else DET_HEADER]
    for r in records:
        row = [str(r.frame)] + _box_fields(r.box)
        if has_var:
            row += [_fmt(v) for v in r.variance.as_tuple()]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_versioned(path: str | Path, expected_headers: dict[str, bool]) -> tuple[bool, list[tuple[int, list[str]]]]:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != FORMAT_VERSION_LINE:
        raise FormatError(f"{path}: missing version line {FORMAT_VERSION_LINE!r}")
    if len(text) < 2 or text[1].strip() not in expected_headers:
        raise FormatError(f"{path}: unrecognized header {text[1].strip() if len(text) > 1 else ''!r}")
    flag = expected_headers[text[1].strip()]
    rows = []
    for lineno, line in enumerate(text[2:], start=3):
        if not line.strip():
            continue
        rows.append((lineno, line.split(",")))
    return flag, rows


def read_detections(path: str | Path) -> list[DetectionRecord]:
    has_var, rows = _read_versioned(path, {DET_HEADER: False, DET_HEADER_VAR: True})
    want = 17 if has_var else 10
    records = []
    for lineno, parts in rows:
        if len(parts) != want:
            raise FormatError(f"{path}:{lineno}: expected {want} fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            vals = [float(v) for v in parts[2:]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        box = Box3D(
            x=vals[0], y=vals[1], z=vals[2], w=vals[3], l=vals[4], h=vals[5],
            theta=vals[6], class_id=parts[1], score=vals[7],
        )
        variance = BoxVariance(*vals[8:15]) if has_var else None
        records.append(DetectionRecord(frame, box, variance))
    return records


def detections_to_frames(records: list[DetectionRecord], n_frames: int | None = None) -> list[FrameDetections]:
    """Group records into consecutive per-frame lists starting at frame 0."""
    if n_frames is None:
        n_frames = max((r.frame for r in records), default=-1) + 1
    frames: list[FrameDetections] = [[] for _ in range(n_frames)]
    for r in records:
        if r.frame < 0 or r.frame >= n_frames:
            raise FormatError(f"frame index {r.frame} out of range [0, {n_frames})")
        frames[r.frame].append(DetectionWithCovariance(r.box, r.variance))
    return frames


def write_tracks(path: str | Path, rows: list[tuple[int, int, Box3D]]) -> None:
    """Write (frame, track id, box) rows."""
    lines = [FORMAT_VERSION_LINE, TRACK_HEADER]
    for frame, track_id, box in rows:
        lines.append(",".join([str(frame), str(track_id)] + _box_fields(box)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_tracks(path: str | Path) -> list[tuple[int, int, Box3D]]:
    _, rows = _read_versioned(path, {TRACK_HEADER: True})
    out = []
    for lineno, parts in rows:
        if len(parts) != 11:
            raise FormatError(f"{path}:{lineno}: expected 11 fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            track_id = int(parts[1])
            vals = [float(v) for v in parts[3:]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        box = Box3D(
            x=vals[0], y=vals[1], z=vals[2], w=vals[3], l=vals[4], h=vals[5],
            theta=vals[6], class_id=parts[2], score=vals[7],
        )
        out.append((frame, track_id, box))
    return out


def tracks_to_frames(rows: list[tuple[int, int, Box3D]], n_frames: int | None = None) -> list[list[tuple[int, Box3D]]]:
    if n_frames is None:
        n_frames = max((frame for frame, _, _ in rows), default=-1) + 1
    frames: list[list[tuple[int, Box3D]]] = [[] for _ in range(n_frames)]
    for frame, track_id, box in rows:
        frames[frame].append((track_id, box))
    return frames


def parse_kitti_labels(path: str | Path) -> dict[int, list[Box3D]]:
    """Read KITTI object or tracking label lines into per-frame boxes.

    Object-format lines (15 or 16 fields) all land in frame 0; tracking
    lines (17 or 18 fields, leading frame and id) use their own frame.
    DontCare entries are skipped.
    """
    frames: dict[int, list[Box3D]] = {}
    text = Path(path).read_text().splitlines()
    for lineno, line in enumerate(text, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) in (15, 16):
            frame = 0
            fields = parts
        elif len(parts) in (17, 18):
            try:
                frame = int(float(parts[0]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad frame index") from exc
            fields = parts[2:]
        else:
            raise FormatError(f"{path}:{lineno}: expected 15-18 fields, got {len(parts)}")
        obj_type = fields[0]
        if obj_type in KITTI_SKIP_TYPES:
            continue
        try:
            h, w, l = (float(v) for v in fields[8:11])
            x_cam, y_cam, z_cam = (float(v) for v in fields[11:14])
            ry = float(fields[14])
            score = float(fields[15]) if len(fields) == 16 else 1.0
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}:{lineno}: malformed numeric fields") from exc
        box = Box3D(
            x=z_cam,
            y=-x_cam,
            z=-y_cam + h / 2.0,
            w=w,
            l=l,
            h=h,
            theta=wrap_angle(-ry - math.pi / 2.0),
            class_id=obj_type,
            score=score,
        )
        frames.setdefault(frame, []).append(box)
    return frames


# --- run configuration -------------------------------------------------

@dataclass
class RunConfig:
    seed: int = 0
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    scoring: ScoreMapConfig = field(default_factory=ScoreMapConfig)
    nms: NmsConfig = field(default_factory=NmsConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


def _check_keys(section: str, given: dict, allowed: set[str]) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise FormatError(f"unknown config key(s) in {section}: {', '.join(sorted(unknown))}")


def config_to_dict(cfg: RunConfig) -> dict:
    q = np.asarray(cfg.tracker.process_noise)
    if np.any(q != np.diag(np.diag(q))):
        raise FormatError("config files express diagonal process noise only")
    obs = cfg.tracker.default_obs_noise
    return {
        "seed": cfg.seed,
        "scenario": {
            "n_targets": cfg.scenario.n_targets,
            "n_frames": cfg.scenario.n_frames,
            "dt": cfg.scenario.dt,
            "field_extent": cfg.scenario.field_extent,
            "noise_base": list(cfg.scenario.noise_base),
            "noise_range_coeff": list(cfg.scenario.noise_range_coeff),
            "fp_rate": cfg.scenario.fp_rate,
            "fn_rate": cfg.scenario.fn_rate,
            "miscalibration_factor": cfg.scenario.miscalibration_factor,
            "seed": cfg.scenario.seed,
        },
        "tracker": {
            "gate_distance": cfg.tracker.gate_distance,
            "t_init": cfg.tracker.t_init,
            "t_drop": cfg.tracker.t_drop,
            "process_noise_diag": [float(v) for v in np.diag(q)],
            "default_obs_sigma": [math.sqrt(v) for v in obs.as_tuple()],
            "use_detection_covariance": cfg.tracker.use_detection_covariance,
        },
        "scoring": {
            "strategy": cfg.scoring.strategy.value,
            "k_s": cfg.scoring.k_s,
            "b_s": cfg.scoring.b_s,
            "aggregate": cfg.scoring.aggregate.value,
            "alpha": cfg.scoring.alpha,
        },
        "nms": {
            "iou_threshold": cfg.nms.iou_threshold,
            "pre_top_k": cfg.nms.pre_top_k,
            "iou_kind": cfg.nms.iou_kind.value,
        },
        "eval": {
            "iou_threshold": cfg.eval.iou_threshold,
            "iou_kind": cfg.eval.iou_kind.value,
            "recall_points": cfg.eval.recall_points,
        },
    }


def config_from_dict(data: dict) -> RunConfig:
    _check_keys("top level", data, {"seed", "scenario", "tracker", "scoring", "nms", "eval"})
    out = RunConfig(seed=int(data.get("seed", 0)))

    sc = data.get("scenario", {})
    _check_keys(
        "scenario", sc,
        {"n_targets", "n_frames", "dt", "field_extent", "noise_base", "noise_range_coeff",
         "fp_rate", "fn_rate", "miscalibration_factor", "seed"},
    )
    base = dict(
        n_targets=sc.get("n_targets", 5),
        n_frames=sc.get("n_frames", 100),
        dt=sc.get("dt", 0.1),
        field_extent=sc.get("field_extent", 80.0),
        fp_rate=sc.get("fp_rate", 0.0),
        fn_rate=sc.get("fn_rate", 0.0),
        miscalibration_factor=sc.get("miscalibration_factor", 1.0),
        seed=sc.get("seed", 0),
    )
    if "noise_base" in sc:
        base["noise_base"] = tuple(float(v) for v in sc["noise_base"])
    if "noise_range_coeff" in sc:
        base["noise_range_coeff"] = tuple(float(v) for v in sc["noise_range_coeff"])
    out.scenario = ScenarioConfig(**base)

    tr = data.get("tracker", {})
    _check_keys(
        "tracker", tr,
        {"gate_distance", "t_init", "t_drop", "process_noise_diag", "default_obs_sigma",
         "use_detection_covariance"},
    )
    kwargs = dict(
        gate_distance=tr.get("gate_distance", 2.5),
        t_init=tr.get("t_init", 3),
        t_drop=tr.get("t_drop", 5),
        use_detection_covariance=tr.get("use_detection_covariance", True),
    )
    if "process_noise_diag" in tr:
        diag = [float(v) for v in tr["process_noise_diag"]]
        if len(diag) != 6:
            raise FormatError("process_noise_diag must hold 6 values")
        kwargs["process_noise"] = np.diag(diag)
    if "default_obs_sigma" in tr:
        sig = [float(v) for v in tr["default_obs_sigma"]]
        if len(sig) != 7:
            raise FormatError("default_obs_sigma must hold 7 values")
        kwargs["default_obs_noise"] = BoxVariance(*(s * s for s in sig))
    out.tracker = TrackerConfig(**kwargs)

    sco = data.get("scoring", {})
    _check_keys("scoring", sco, {"strategy", "k_s", "b_s", "aggregate", "alpha"})
    out.scoring = ScoreMapConfig(
        strategy=ScoreStrategy(sco.get("strategy", "none")),
        k_s=sco.get("k_s", 0.001),
        b_s=sco.get("b_s", 0.0),
        aggregate=AggregateMode(sco.get("aggregate", "sum")),
        alpha=sco.get("alpha", 1.0),
    )

    nm = data.get("nms", {})
    _check_keys("nms", nm, {"iou_threshold", "pre_top_k", "iou_kind"})
    out.nms = NmsConfig(
        iou_threshold=nm.get("iou_threshold", 0.5),
        pre_top_k=nm.get("pre_top_k", 100),
        iou_kind=IouKind(nm.get("iou_kind", "bev")),
    )

    ev = data.get("eval", {})
    _check_keys("eval", ev, {"iou_threshold", "iou_kind", "recall_points"})
    out.eval = EvalConfig(
        iou_threshold=ev.get("iou_threshold", 0.5),
        iou_kind=IouKind(ev.get("iou_kind", "bev")),
        recall_points=ev.get("recall_points", 40),
    )
    return out


def save_config(path: str | Path, cfg: RunConfig) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data)
