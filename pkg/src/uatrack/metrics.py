"""Detection and tracking evaluation.

Detection quality is scored by a threshold sweep over prediction scores
with optimal per-frame matching at every threshold (AP over interpolated
precision at fixed recall levels, plus the best F1 along the sweep).
Tracking quality follows the CLEAR protocol: sticky correspondences,
identity switches, fragmentations, mostly-lost ratio and MOTA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assignment import FORBIDDEN_COST, hungarian_assign
from .boxes import Box3D
from .geometry import iou_3d, iou_bev
from .scoring import IouKind

# A ground-truth track matched in less than this fraction of its frames
# counts as mostly lost.
MOSTLY_LOST_FRACTION = 0.2


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    iou_kind: IouKind = IouKind.BEV
    recall_points: int = 40

    def __post_init__(self):
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError("iou_threshold must be in (0, 1)")
        if self.recall_points < 1:
            raise ValueError("recall_points must be >= 1")


@dataclass
class TrackingReport:
    ap: float
    max_f1: float
    idsw: int
    frag: int
    ml: float
    mota: float
    fn: int = 0
    fp: int = 0
    gt_total: int = 0

    def lines(self) -> list[str]:
        return [
            f"AP:     {self.ap:.2f} %",
            f"Max F1: {self.max_f1:.2f} %",
            f"IDSW:   {self.idsw}",
            f"FRAG:   {self.frag}",
            f"ML:     {self.ml:.2f} %",
            f"MOTA:   {self.mota:.2f} %",
        ]


def _iou_fn(kind: IouKind):
    return iou_bev if kind is IouKind.BEV else iou_3d


def _iou_gated(a: Box3D, b: Box3D, kind: IouKind) -> float:
    # centers farther than the circumradius sum cannot overlap
    rr = 0.5 * (math.hypot(a.w, a.l) + math.hypot(b.w, b.l))
    if (a.x - b.x) ** 2 + (a.y - b.y) ** 2 > rr * rr:
        return 0.0
    return _iou_fn(kind)(a, b)


def _gated_iou_matrix(gt: list[Box3D], pred: list[Box3D], kind: IouKind) -> np.ndarray:
    """Pairwise IoU with a vectorized center-distance reject."""
    iou = np.zeros((len(gt), len(pred)))
    if not gt or not pred:
        return iou
    g_xy = np.array([[b.x, b.y] for b in gt])
    p_xy = np.array([[b.x, b.y] for b in pred])
    g_r = np.array([0.5 * math.hypot(b.w, b.l) for b in gt])
    p_r = np.array([0.5 * math.hypot(b.w, b.l) for b in pred])
    d2 = (g_xy[:, 0:1] - p_xy[None, :, 0]) ** 2 + (g_xy[:, 1:2] - p_xy[None, :, 1]) ** 2
    near = d2 <= (g_r[:, None] + p_r[None, :]) ** 2
    fn = _iou_fn(kind)
    for gi, pi in zip(*np.nonzero(near)):
        iou[gi, pi] = fn(gt[gi], pred[pi])
    return iou


def _match_from_matrix(iou: np.ndarray, threshold: float) -> list[tuple[int, int, float]]:
    if iou.size == 0 or not np.any(iou >= threshold):
        return []
    cost = np.where(iou >= threshold, -iou, FORBIDDEN_COST)
    out = []
    for gi, pi in hungarian_assign(cost):
        if iou[gi, pi] >= threshold:
            out.append((gi, pi, float(iou[gi, pi])))
    return out


def match_frame(gt: list[Box3D], pred: list[Box3D], cfg: EvalConfig) -> list[tuple[int, int, float]]:
    """One-to-one matching maximizing count, then total IoU.

    Pairs below the IoU threshold are forbidden.  Returns (gt index,
    pred index, iou) triples.
    """
    return _match_from_matrix(_gated_iou_matrix(gt, pred, cfg.iou_kind), cfg.iou_threshold)


def detection_pr(
    gt_frames: list[list[Box3D]],
    pred_frames: list[list[Box3D]],
    cfg: EvalConfig,
) -> tuple[float, float, list[tuple[float, float, float]]]:
    """AP (percent), max F1 (percent) and the swept (threshold, P, R) curve.

    Thresholds run over every distinct prediction score, descending; at
    each one the frames whose active set changed are re-matched.  AP is
    the mean interpolated precision at recall levels i/recall_points,
    i = 1..recall_points.
    """
    n_frames = max(len(gt_frames), len(pred_frames))
    gt_frames = list(gt_frames) + [[] for _ in range(n_frames - len(gt_frames))]
    pred_frames = list(pred_frames) + [[] for _ in range(n_frames - len(pred_frames))]

    total_gt = sum(len(g) for g in gt_frames)
    thresholds = sorted({b.score for p in pred_frames for b in p}, reverse=True)
    if not thresholds or total_gt == 0:
        return 0.0, 0.0, []

    # per frame: predictions sorted by descending score, IoU matrix cached
    sorted_preds = [sorted(p, key=lambda b: -b.score) for p in pred_frames]
    iou_mats = [_gated_iou_matrix(g, p, cfg.iou_kind) for g, p in zip(gt_frames, sorted_preds)]
    frames_at: dict[float, list[int]] = {}
    for f, preds in enumerate(sorted_preds):
        for b in preds:
            frames_at.setdefault(b.score, []).append(f)

    active = [0] * n_frames  # how many of the frame's sorted preds are in play
    tp_frame = [0] * n_frames
    total_active = 0
    total_tp = 0
    curve = []
    for t in thresholds:
        for f in frames_at[t]:
            preds = sorted_preds[f]
            changed = False
            while active[f] < len(preds) and preds[active[f]].score >= t:
                active[f] += 1
                total_active += 1
                changed = True
            if changed:
                new_tp = len(_match_from_matrix(iou_mats[f][:, : active[f]], cfg.iou_threshold))
                total_tp += new_tp - tp_frame[f]
                tp_frame[f] = new_tp
        precision = total_tp / total_active if total_active else 0.0
        recall = total_tp / total_gt
        curve.append((t, precision, recall))

    max_f1 = 0.0
    for _, p, r in curve:
        if p + r > 0.0:
            max_f1 = max(max_f1, 2.0 * p * r / (p + r))

    ap_acc = 0.0
    for i in range(1, cfg.recall_points + 1):
        level = i / cfg.recall_points
        ap_acc += max((p for _, p, r in curve if r >= level - 1e-12), default=0.0)
    ap = ap_acc / cfg.recall_points
    return 100.0 * ap, 100.0 * max_f1, curve


def clear_mot(
    gt_tracks: list[list[tuple[int, Box3D]]],
    pred_tracks: list[list[tuple[int, Box3D]]],
    cfg: EvalConfig,
) -> TrackingReport:
    """CLEAR-style evaluation of identified tracks.

    Correspondences persist across frames while their IoU stays above
    threshold; the remainder is matched by Hungarian on IoU.  An identity
    switch is counted when a ground-truth track's matched prediction id
    differs from the one at its previous matched frame.
    """
    n_frames = max(len(gt_tracks), len(pred_tracks))
    gt_tracks = list(gt_tracks) + [[] for _ in range(n_frames - len(gt_tracks))]
    pred_tracks = list(pred_tracks) + [[] for _ in range(n_frames - len(pred_tracks))]

    fn = fp = idsw = 0
    gt_total = 0
    last_pred_of: dict[int, int] = {}
    presence: dict[int, list[bool]] = {}  # gt id -> matched flag per present frame
    prev: dict[int, int] = {}

    for f in range(n_frames):
        gt = gt_tracks[f]
        pred = pred_tracks[f]
        gt_total += len(gt)
        gt_by_id = {i: b for i, b in gt}
        pred_by_id = {i: b for i, b in pred}

        matches: dict[int, int] = {}
        used_pred: set[int] = set()
        for g_id, p_id in prev.items():
            if g_id in gt_by_id and p_id in pred_by_id and p_id not in used_pred:
                if _iou_gated(gt_by_id[g_id], pred_by_id[p_id], cfg.iou_kind) >= cfg.iou_threshold:
                    matches[g_id] = p_id
                    used_pred.add(p_id)

        rem_gt = [(i, b) for i, b in gt if i not in matches]
        rem_pred = [(i, b) for i, b in pred if i not in used_pred]
        for gi, pi, _ in match_frame([b for _, b in rem_gt], [b for _, b in rem_pred], cfg):
            g_id = rem_gt[gi][0]
            p_id = rem_pred[pi][0]
            matches[g_id] = p_id
            used_pred.add(p_id)

        fn += len(gt) - len(matches)
        fp += len(pred) - len(matches)
        for g_id, _ in gt:
            matched = g_id in matches
            presence.setdefault(g_id, []).append(matched)
            if matched:
                p_id = matches[g_id]
                if g_id in last_pred_of and last_pred_of[g_id] != p_id:
                    idsw += 1
                last_pred_of[g_id] = p_id
        prev = matches

    frag = 0
    mostly_lost = 0
    for flags in presence.values():
        matched_frames = sum(flags)
        if matched_frames < MOSTLY_LOST_FRACTION * len(flags):
            mostly_lost += 1
        # interruptions: matched -> unmatched transitions that resume later
        seen_match = False
        in_gap = False
        for flag in flags:
            if flag:
                if in_gap:
                    frag += 1
                    in_gap = False
                seen_match = True
            elif seen_match:
                in_gap = True

    n_gt_tracks = len(presence)
    ml = 100.0 * mostly_lost / n_gt_tracks if n_gt_tracks else 0.0
    mota = 100.0 * (1.0 - (fn + fp + idsw) / gt_total) if gt_total else 0.0
    ap, max_f1, _ = detection_pr(
        [[b for _, b in frame] for frame in gt_tracks],
        [[b for _, b in frame] for frame in pred_tracks],
        cfg,
    )
    return TrackingReport(
        ap=ap,
        max_f1=max_f1,
        idsw=idsw,
        frag=frag,
        ml=ml,
        mota=mota,
        fn=fn,
        fp=fp,
        gt_total=gt_total,
    )
