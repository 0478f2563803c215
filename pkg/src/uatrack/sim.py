"""Synthetic scenario generation with range-dependent detection noise.

Targets follow exact CTRA trajectories with small per-frame random
perturbations of acceleration and turn rate.  Detections are the true
boxes plus independent zero-mean Gaussian noise whose per-parameter
standard deviation grows linearly with range from the sensor at the
origin, so a tracker consuming the per-detection covariance sees a
genuinely heteroscedastic stream with known ground truth.

All randomness comes from a single numpy Generator seeded from the
config (PCG64, a named portable algorithm with documented state), with a
fixed draw order, so scenarios are bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Box3D, BoxVariance, DetectionWithCovariance, FrameDetections, wrap_angle
from .motion import ctra_step

# Per-frame random-walk scale on acceleration and turn rate, per sqrt(s).
# Deliberately lively: targets brake, accelerate and swerve, so trackers
# must lean on the measurement stream rather than coast on the model.
ACCEL_WALK_STD = 0.8
TURN_WALK_STD = 0.15
ACCEL_LIMIT = 2.0
TURN_LIMIT = 0.3

# The a/omega perturbations are mean-reverting: acceleration is pulled
# toward holding each target's cruise speed and the turn rate decays to
# zero, with a steer back toward the arena once a target leaves it.
# Without the pull the clamped random walk saturates and speeds grow
# without bound, drifting targets hundreds of meters out.
ACCEL_DECAY = 0.98
ACCEL_PULL = 0.02
TURN_DECAY = 0.95
STEER_GAIN = 0.12
STEER_LIMIT = 0.25

# Minimum box dimension after noise; keeps degenerate draws valid.
MIN_DIMENSION = 0.05

# Variance floor so the noiseless limit still emits valid covariances.
VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario shape and noise model.

    noise_base and noise_range_coeff hold one entry per box parameter in
    the order (x, y, z, w, l, h, theta); sigma(range) = base + coeff * range.
    miscalibration_factor scales the variance the detections *report*
    without changing the noise actually injected.
    """

    n_targets: int = 5
    n_frames: int = 100
    dt: float = 0.1
    field_extent: float = 80.0
    noise_base: tuple[float, ...] = (0.1, 0.1, 0.05, 0.05, 0.05, 0.05, 0.02)
    noise_range_coeff: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    fp_rate: float = 0.0
    fn_rate: float = 0.0
    miscalibration_factor: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_targets < 1 or self.n_frames < 1:
            raise ValueError("n_targets and n_frames must be >= 1")
        if not self.dt > 0.0:
            raise ValueError("dt must be > 0")
        if not self.field_extent > 0.0:
            raise ValueError("field_extent must be > 0")
        for name, rate in (("fp_rate", self.fp_rate), ("fn_rate", self.fn_rate)):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        for name, vec in (("noise_base", self.noise_base), ("noise_range_coeff", self.noise_range_coeff)):
            if len(vec) != 7 or min(vec) < 0.0:
                raise ValueError(f"{name} must hold 7 nonnegative values")
        if not self.miscalibration_factor > 0.0:
            raise ValueError("miscalibration_factor must be > 0")


@dataclass
class Scenario:
    """Generated ground truth and detections.

    detections carry the *reported* variance; true_variances holds the
    actual generating noise variance for each detection (identical when
    miscalibration_factor is 1).  gt_states keeps the full CTRA state per
    target per frame for motion-level checks.
    """

    config: ScenarioConfig
    ground_truth: list[list[tuple[int, Box3D]]]
    detections: list[FrameDetections]
    true_variances: list[list[BoxVariance]]
    gt_states: list[np.ndarray]


def _sigma_at(cfg: ScenarioConfig, rng_dist: float) -> np.ndarray:
    base = np.asarray(cfg.noise_base)
    coeff = np.asarray(cfg.noise_range_coeff)
    return base + coeff * rng_dist


def _score_at(cfg: ScenarioConfig, rng_dist: float, jitter: float) -> float:
    raw = 0.9 - 0.5 * rng_dist / cfg.field_extent + jitter
    return float(min(max(raw, 0.05), 0.99))


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_targets

    # Initial ranges are stratified from near to far so every scenario
    # carries the full sweep of range-dependent noise levels; bearings
    # and dynamics are random.
    states = np.empty((n, 6))
    radii = np.linspace(0.08 * cfg.field_extent, 0.95 * cfg.field_extent, n)
    bearings = rng.uniform(-math.pi, math.pi, n)
    states[:, 0] = radii * np.cos(bearings)
    states[:, 1] = radii * np.sin(bearings)
    states[:, 2] = rng.uniform(-math.pi, math.pi, n)
    states[:, 3] = rng.uniform(2.0, 10.0, n)
    states[:, 4] = rng.uniform(-0.5, 0.5, n)
    states[:, 5] = rng.uniform(-0.15, 0.15, n)
    cruise_speed = states[:, 3].copy()
    widths = rng.uniform(1.5, 2.0, n)
    lengths = rng.uniform(3.5, 4.6, n)
    heights = rng.uniform(1.4, 1.8, n)
    z_centers = heights / 2.0

    ground_truth: list[list[tuple[int, Box3D]]] = []
    detections: list[FrameDetections] = []
    true_variances: list[list[BoxVariance]] = []
    gt_states: list[np.ndarray] = []

    for _ in range(cfg.n_frames):
        gt_states.append(states.copy())
        frame_gt = []
        for i in range(n):
            frame_gt.append(
                (
                    i,
                    Box3D(
                        x=states[i, 0],
                        y=states[i, 1],
                        z=z_centers[i],
                        w=widths[i],
                        l=lengths[i],
                        h=heights[i],
                        theta=wrap_angle(states[i, 2]),
                    ),
                )
            )
        ground_truth.append(frame_gt)

        frame_dets: FrameDetections = []
        frame_true: list[BoxVariance] = []

        noise = rng.standard_normal((n, 7))
        fn_draws = rng.random(n)
        score_jitter = rng.normal(0.0, 0.01, n)
        for i in range(n):
            dist = math.hypot(states[i, 0], states[i, 1])
            sigma = _sigma_at(cfg, dist)
            sample = noise[i] * sigma
            if fn_draws[i] < cfg.fn_rate:
                continue
            box = Box3D(
                x=states[i, 0] + sample[0],
                y=states[i, 1] + sample[1],
                z=z_centers[i] + sample[2],
                w=max(widths[i] + sample[3], MIN_DIMENSION),
                l=max(lengths[i] + sample[4], MIN_DIMENSION),
                h=max(heights[i] + sample[5], MIN_DIMENSION),
                theta=wrap_angle(states[i, 2] + sample[6]),
                score=_score_at(cfg, dist, float(score_jitter[i])),
            )
            var = np.maximum(sigma**2, VARIANCE_FLOOR)
            true_var = BoxVariance(*var)
            reported = BoxVariance(*(var * cfg.miscalibration_factor))
            frame_dets.append(DetectionWithCovariance(box, reported))
            frame_true.append(true_var)

        n_fp = int(rng.poisson(cfg.fp_rate))
        if n_fp > 0:
            fp_xy = rng.uniform(-cfg.field_extent, cfg.field_extent, (n_fp, 2))
            fp_theta = rng.uniform(-math.pi, math.pi, n_fp)
            fp_w = rng.uniform(1.5, 2.0, n_fp)
            fp_l = rng.uniform(3.5, 4.6, n_fp)
            fp_h = rng.uniform(1.4, 1.8, n_fp)
            fp_score = rng.uniform(0.05, 0.5, n_fp)
            for j in range(n_fp):
                dist = math.hypot(fp_xy[j, 0], fp_xy[j, 1])
                sigma = _sigma_at(cfg, dist)
                box = Box3D(
                    x=fp_xy[j, 0],
                    y=fp_xy[j, 1],
                    z=fp_h[j] / 2.0,
                    w=fp_w[j],
                    l=fp_l[j],
                    h=fp_h[j],
                    theta=fp_theta[j],
                    score=float(fp_score[j]),
                )
                var = np.maximum(sigma**2, VARIANCE_FLOOR)
                frame_dets.append(DetectionWithCovariance(box, BoxVariance(*(var * cfg.miscalibration_factor))))
                frame_true.append(BoxVariance(*var))

        detections.append(frame_dets)
        true_variances.append(frame_true)

        # next frame: exact CTRA, then perturb the accel and turn rate
        states = ctra_step(states, cfg.dt)
        accel_noise = rng.normal(0.0, ACCEL_WALK_STD * math.sqrt(cfg.dt), n)
        turn_noise = rng.normal(0.0, TURN_WALK_STD * math.sqrt(cfg.dt), n)
        ranges = np.hypot(states[:, 0], states[:, 1])
        bearing_home = np.arctan2(-states[:, 1], -states[:, 0])
        heading_err = np.pi - np.mod(np.pi - (bearing_home - states[:, 2]), 2.0 * np.pi)
        steer = np.where(ranges > cfg.field_extent, np.clip(0.5 * heading_err, -STEER_LIMIT, STEER_LIMIT), 0.0)
        states[:, 4] = np.clip(
            ACCEL_DECAY * states[:, 4] + ACCEL_PULL * (cruise_speed - states[:, 3]) + accel_noise,
            -ACCEL_LIMIT,
            ACCEL_LIMIT,
        )
        states[:, 5] = np.clip(
            TURN_DECAY * states[:, 5] + STEER_GAIN * steer + turn_noise,
            -TURN_LIMIT,
            TURN_LIMIT,
        )

    return Scenario(cfg, ground_truth, detections, true_variances, gt_states)
