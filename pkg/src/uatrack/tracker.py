"""Covariance-aware multi-object tracking.

Per-object state is split the way the detections are used: an unscented
Kalman filter over the planar pose (x, y, theta) with CTRA dynamics on
the hidden (v, a, omega), an independent scalar Kalman filter per box
dimension, and pass-through of the latest z and h.  When detections
carry their own variance it is used directly as the observation noise
(and as the initial state noise of new tracks); otherwise a fixed
default applies, which is the classic constant-covariance tracker.

The filter math is written over batches of tracks (leading axis T) so a
frame's predictions and updates cost a handful of numpy calls; the
single-track operations are the T=1 case of the same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .assignment import FORBIDDEN_COST, hungarian_assign
from .boxes import Box3D, BoxVariance, DetectionWithCovariance, FrameDetections, wrap_angle
from .motion import ctra_step

# Unscented-transform scaling.  alpha=1 with kappa=0 gives lambda=0: every
# covariance weight is nonnegative (center weight 2, others 1/12), so the
# reconstructed covariance is PSD by construction, and the huge +-1e6
# weights of the textbook alpha=1e-3 choice (which amplify rounding far
# beyond the accuracy the filter contracts promise) never appear.
UT_ALPHA = 1.0
UT_BETA = 2.0
UT_KAPPA = 0.0

_N = 6
_LAMBDA = UT_ALPHA**2 * (_N + UT_KAPPA) - _N
_GAMMA = math.sqrt(_N + _LAMBDA)
_WM = np.full(2 * _N + 1, 1.0 / (2.0 * (_N + _LAMBDA)))
_WM[0] = _LAMBDA / (_N + _LAMBDA)
_WC = _WM.copy()
_WC[0] += 1.0 - UT_ALPHA**2 + UT_BETA

# Prior standard deviations for the never-observed state components of a
# newly spawned track; generous so the first few updates dominate.
PRIOR_SPEED_STD = 10.0
PRIOR_ACCEL_STD = 3.0
PRIOR_TURN_STD = 0.5

# EMA weight on the previous value when smoothing track scores.
SCORE_SMOOTHING = 0.7

# Matched to the bundled simulator's dynamics: position, heading and
# speed evolve by CTRA exactly, so nearly all model error enters through
# the acceleration and turn-rate random walks.
DEFAULT_PROCESS_DIAG = (1e-4, 1e-4, 1e-5, 0.01, 0.64, 0.0225)
DEFAULT_OBS_NOISE = BoxVariance(0.25, 0.25, 0.25, 0.04, 0.04, 0.04, 0.01)


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    LOST = "lost"


@dataclass
class PoseState:
    """Planar pose filter state: mean (x, y, theta, v, a, omega) + 6x6 cov."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).copy()
        self.cov = np.asarray(self.cov, dtype=float).copy()
        if self.mean.shape != (6,) or self.cov.shape != (6, 6):
            raise ValueError("pose state is a 6-vector with a 6x6 covariance")
        self.mean[2] = wrap_angle(self.mean[2])
        self.cov = 0.5 * (self.cov + self.cov.T)

    @property
    def x(self) -> float:
        return float(self.mean[0])

    @property
    def y(self) -> float:
        return float(self.mean[1])

    @property
    def theta(self) -> float:
        return float(self.mean[2])

    @property
    def v(self) -> float:
        return float(self.mean[3])

    @property
    def a(self) -> float:
        return float(self.mean[4])

    @property
    def omega(self) -> float:
        return float(self.mean[5])


@dataclass
class SizeState:
    """Per-dimension scalar KF state for the box extents."""

    w: float
    l: float
    h: float
    var_w: float
    var_l: float
    var_h: float

    def __post_init__(self):
        if not (self.w > 0.0 and self.l > 0.0 and self.h > 0.0):
            raise ValueError("size means must be positive")
        if min(self.var_w, self.var_l, self.var_h) < 0.0:
            raise ValueError("size variances must be >= 0")


@dataclass
class Track:
    id: int
    class_id: str
    pose: PoseState
    size: SizeState
    z_latest: float
    h_latest: float
    hits: int = 1
    misses: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE
    score: float = 1.0

    def to_box(self) -> Box3D:
        """Reported box: filtered pose and footprint, pass-through z and h."""
        return Box3D(
            x=self.pose.x,
            y=self.pose.y,
            z=self.z_latest,
            w=self.size.w,
            l=self.size.l,
            h=self.h_latest,
            theta=self.pose.theta,
            class_id=self.class_id,
            score=self.score,
        )


@dataclass
class TrackerConfig:
    gate_distance: float = 2.5
    t_init: int = 3
    t_drop: int = 5
    process_noise: np.ndarray = field(default_factory=lambda: np.diag(DEFAULT_PROCESS_DIAG))
    default_obs_noise: BoxVariance = field(default_factory=lambda: DEFAULT_OBS_NOISE)
    use_detection_covariance: bool = True

    def __post_init__(self):
        if not self.gate_distance > 0.0:
            raise ValueError("gate_distance must be > 0")
        if self.t_init < 1 or self.t_drop < 1:
            raise ValueError("t_init and t_drop must be >= 1")
        q = np.asarray(self.process_noise, dtype=float)
        if q.shape != (6, 6):
            raise ValueError("process_noise must be 6x6")
        if np.max(np.abs(q - q.T)) > 1e-9 or np.min(np.linalg.eigvalsh(q)) < -1e-9:
            raise ValueError("process_noise must be symmetric PSD")
        self.process_noise = q


def constant_sigma_config(base: TrackerConfig, sigma: float) -> TrackerConfig:
    """Baseline configuration: one constant sigma for every box parameter."""
    if not sigma > 0.0:
        raise ValueError("sigma must be > 0")
    return replace(
        base,
        default_obs_noise=BoxVariance(*([sigma * sigma] * 7)),
        use_detection_covariance=False,
    )


def _matrix_sqrt_psd(cov: np.ndarray) -> np.ndarray:
    """Factor M with cov = M M^T for a single PSD matrix.

    Cholesky when positive definite; otherwise an eigen factor with
    negative eigenvalues clamped to zero, which keeps exactly-singular
    covariances (pinned state components) singular.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
        vals = np.clip(vals, 0.0, None)
        return vecs * np.sqrt(vals)


def _batch_sqrt(covs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        return np.stack([_matrix_sqrt_psd(c) for c in covs])


def _batch_sigma_points(means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """(T, 2n+1, n) sigma points for T states."""
    factors = _batch_sqrt(covs)
    offsets = _GAMMA * np.swapaxes(factors, -1, -2)  # rows are scaled sqrt columns
    t = means.shape[0]
    pts = np.empty((t, 2 * _N + 1, _N))
    pts[:, 0, :] = means
    pts[:, 1 : _N + 1, :] = means[:, None, :] + offsets
    pts[:, _N + 1 :, :] = means[:, None, :] - offsets
    return pts


def _wrap_array(a: np.ndarray) -> np.ndarray:
    return np.pi - np.mod(np.pi - a, 2.0 * np.pi)


def _batch_moments(pts: np.ndarray, angle_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean and covariance of sigma points, circular in one axis."""
    mean = np.einsum("p,tpn->tn", _WM, pts)
    ang = pts[..., angle_index]
    mean[:, angle_index] = np.arctan2(np.sin(ang) @ _WM, np.cos(ang) @ _WM)
    dev = pts - mean[:, None, :]
    dev[..., angle_index] = _wrap_array(dev[..., angle_index])
    cov = np.einsum("p,tpi,tpj->tij", _WC, dev, dev)
    return mean, 0.5 * (cov + np.swapaxes(cov, -1, -2))


def ukf_predict_batch(
    means: np.ndarray, covs: np.ndarray, dt: float, process_noise: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Unscented CTRA prediction for a batch of pose states."""
    pts = ctra_step(_batch_sigma_points(means, covs), dt)
    mean, cov = _batch_moments(pts, angle_index=2)
    mean[:, 2] = _wrap_array(mean[:, 2])
    cov += np.asarray(process_noise, dtype=float) * dt
    return mean, cov


def ukf_update_batch(
    means: np.ndarray, covs: np.ndarray, obs: np.ndarray, obs_var: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Measurement update on (x, y, theta) with per-state noise variances.

    obs is (T, 3) measurements, obs_var the matching (T, 3) diagonal
    observation-noise variances.
    """
    pts = _batch_sigma_points(means, covs)
    z_pts = pts[:, :, :3]
    z_mean = np.einsum("p,tpn->tn", _WM, z_pts)
    ang = z_pts[..., 2]
    z_mean[:, 2] = np.arctan2(np.sin(ang) @ _WM, np.cos(ang) @ _WM)

    dz = z_pts - z_mean[:, None, :]
    dz[..., 2] = _wrap_array(dz[..., 2])
    dx = pts - means[:, None, :]
    dx[..., 2] = _wrap_array(dx[..., 2])

    s_mat = np.einsum("p,tpi,tpj->tij", _WC, dz, dz)
    idx = np.arange(3)
    s_mat[:, idx, idx] += obs_var
    p_xz = np.einsum("p,tpi,tpj->tij", _WC, dx, dz)
    gain = np.swapaxes(np.linalg.solve(s_mat, np.swapaxes(p_xz, -1, -2)), -1, -2)

    innovation = obs - z_mean
    innovation[:, 2] = _wrap_array(innovation[:, 2])
    new_means = means + np.einsum("tij,tj->ti", gain, innovation)
    new_means[:, 2] = _wrap_array(new_means[:, 2])
    new_covs = covs - gain @ s_mat @ np.swapaxes(gain, -1, -2)
    new_covs = 0.5 * (new_covs + np.swapaxes(new_covs, -1, -2))
    return new_means, new_covs


def ctra_propagate(state: PoseState, dt: float) -> PoseState:
    """Mean-only CTRA propagation of a pose state."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    return PoseState(ctra_step(state.mean, dt), state.cov)


def ukf_predict(track: Track, dt: float, process_noise: np.ndarray) -> Track:
    """Unscented CTRA prediction; adds process_noise * dt."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    mean, cov = ukf_predict_batch(
        track.pose.mean[None, :], track.pose.cov[None, :, :], dt, process_noise
    )
    return replace(track, pose=PoseState(mean[0], cov[0]))


def _observation_noise(det: DetectionWithCovariance, cfg: TrackerConfig) -> tuple[float, float, float]:
    if cfg.use_detection_covariance and det.variance is not None:
        v = det.variance
    else:
        v = cfg.default_obs_noise
    return v.var_x, v.var_y, v.var_theta


def ukf_update(track: Track, det: DetectionWithCovariance, cfg: TrackerConfig) -> Track:
    """Measurement update on (x, y, theta) with per-detection noise."""
    if det.box.class_id != track.class_id:
        raise ValueError("detection class does not match track class")
    noise = _observation_noise(det, cfg)
    if not all(v > 0.0 and math.isfinite(v) for v in noise):
        raise ValueError("observation noise must be positive definite")
    obs = np.array([[det.box.x, det.box.y, det.box.theta]])
    mean, cov = ukf_update_batch(
        track.pose.mean[None, :], track.pose.cov[None, :, :], obs, np.array([noise])
    )
    return replace(track, pose=PoseState(mean[0], cov[0]))


def size_update(size: SizeState, det: DetectionWithCovariance, cfg: TrackerConfig) -> SizeState:
    """Independent scalar KF update of each box dimension."""
    if cfg.use_detection_covariance and det.variance is not None:
        noise = (det.variance.var_w, det.variance.var_l, det.variance.var_h)
    else:
        d = cfg.default_obs_noise
        noise = (d.var_w, d.var_l, d.var_h)
    meas = (det.box.w, det.box.l, det.box.h)
    out_mean = []
    out_var = []
    for prior, pv, z, rv in zip((size.w, size.l, size.h), (size.var_w, size.var_l, size.var_h), meas, noise):
        if pv <= 0.0:
            out_mean.append(prior)
            out_var.append(pv)
            continue
        k = pv / (pv + rv)
        out_mean.append(prior + k * (z - prior))
        out_var.append((1.0 - k) * pv)
    return SizeState(out_mean[0], out_mean[1], out_mean[2], out_var[0], out_var[1], out_var[2])


def associate(
    tracks: list[Track],
    dets: FrameDetections,
    cfg: TrackerConfig,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Global nearest neighbor on planar center distance.

    Pairs with distance above the gate or with differing classes are
    forbidden; the optimal assignment is then re-checked against the gate
    so a forced pairing never survives.
    """
    if not tracks or not dets:
        return [], list(range(len(tracks))), list(range(len(dets)))
    t_xy = np.array([[t.pose.x, t.pose.y] for t in tracks])
    d_xy = np.array([[d.box.x, d.box.y] for d in dets])
    dist = np.hypot(t_xy[:, 0:1] - d_xy[None, :, 0], t_xy[:, 1:2] - d_xy[None, :, 1])
    t_cls = np.array([t.class_id for t in tracks])
    d_cls = np.array([d.box.class_id for d in dets])
    allowed = (dist <= cfg.gate_distance) & (t_cls[:, None] == d_cls[None, :])
    cost = np.where(allowed, dist, FORBIDDEN_COST)

    matches = []
    matched_t: set[int] = set()
    matched_d: set[int] = set()
    for ti, di in hungarian_assign(cost):
        if allowed[ti, di]:
            matches.append((ti, di))
            matched_t.add(ti)
            matched_d.add(di)
    unmatched_t = [i for i in range(len(tracks)) if i not in matched_t]
    unmatched_d = [i for i in range(len(dets)) if i not in matched_d]
    return matches, unmatched_t, unmatched_d


class Tracker:
    """Single-writer tracker instance; one per sequence.

    step() mutates internal state and must not be called concurrently on
    the same instance.  Track ids are assigned from a strictly increasing
    counter and never reused.
    """

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config if config is not None else TrackerConfig()
        self.tracks: list[Track] = []
        self._next_id = 1

    def _spawn(self, det: DetectionWithCovariance) -> Track:
        box = det.box
        if self.config.use_detection_covariance and det.variance is not None:
            var = det.variance
        else:
            var = self.config.default_obs_noise
        mean = np.array([box.x, box.y, box.theta, 0.0, 0.0, 0.0])
        cov = np.diag(
            [
                var.var_x,
                var.var_y,
                var.var_theta,
                PRIOR_SPEED_STD**2,
                PRIOR_ACCEL_STD**2,
                PRIOR_TURN_STD**2,
            ]
        )
        track = Track(
            id=self._next_id,
            class_id=box.class_id,
            pose=PoseState(mean, cov),
            size=SizeState(box.w, box.l, box.h, var.var_w, var.var_l, var.var_h),
            z_latest=box.z,
            h_latest=box.h,
            score=box.score,
        )
        self._next_id += 1
        return track

    def _predict_all(self, dt: float) -> None:
        means = np.stack([t.pose.mean for t in self.tracks])
        covs = np.stack([t.pose.cov for t in self.tracks])
        means, covs = ukf_predict_batch(means, covs, dt, self.config.process_noise)
        for i, track in enumerate(self.tracks):
            track.pose = PoseState(means[i], covs[i])

    def _update_matched(self, matches: list[tuple[int, int]], detections: FrameDetections) -> None:
        cfg = self.config
        means = np.stack([self.tracks[ti].pose.mean for ti, _ in matches])
        covs = np.stack([self.tracks[ti].pose.cov for ti, _ in matches])
        obs = np.array([[detections[di].box.x, detections[di].box.y, detections[di].box.theta] for _, di in matches])
        obs_var = np.array([_observation_noise(detections[di], cfg) for _, di in matches])
        if np.any(obs_var <= 0.0) or not np.all(np.isfinite(obs_var)):
            raise ValueError("observation noise must be positive definite")
        means, covs = ukf_update_batch(means, covs, obs, obs_var)
        for row, (ti, di) in enumerate(matches):
            det = detections[di]
            track = self.tracks[ti]
            track.pose = PoseState(means[row], covs[row])
            track.size = size_update(track.size, det, cfg)
            track.z_latest = det.box.z
            track.h_latest = det.box.h
            track.hits += 1
            track.misses = 0
            track.score = SCORE_SMOOTHING * track.score + (1.0 - SCORE_SMOOTHING) * det.box.score

    def step(self, detections: FrameDetections, dt: float) -> list[Track]:
        """Advance one frame; returns the confirmed tracks."""
        if not dt > 0.0:
            raise ValueError("dt must be > 0")
        cfg = self.config

        if self.tracks:
            self._predict_all(dt)
        matches, unmatched_t, unmatched_d = associate(self.tracks, detections, cfg)
        if matches:
            self._update_matched(matches, detections)

        for ti in unmatched_t:
            track = self.tracks[ti]
            track.misses += 1
            track.hits = 0

        survivors = []
        for track in self.tracks:
            if track.misses >= cfg.t_drop:
                track.status = TrackStatus.LOST
            else:
                survivors.append(track)
        self.tracks = survivors

        for di in unmatched_d:
            self.tracks.append(self._spawn(detections[di]))

        for track in self.tracks:
            if track.status is TrackStatus.TENTATIVE and track.hits >= cfg.t_init:
                track.status = TrackStatus.CONFIRMED

        return [t for t in self.tracks if t.status is TrackStatus.CONFIRMED]
