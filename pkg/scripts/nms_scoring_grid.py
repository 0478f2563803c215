#!/usr/bin/env python3
"""Grid over uncertainty-to-score mappings for NMS.

Builds a duplicate-proposal set in which the better-localized duplicate
carries lower uncertainty (but often a slightly *lower* classifier
score), then reports detection AP for the classifier-score baseline and
for each mapping/scale combination.

    python scripts/nms_scoring_grid.py
"""

import sys

from uatrack.boxes import Box3D, EncodedLogVar
from uatrack.metrics import EvalConfig, detection_pr
from uatrack.scoring import (
    AggregateMode,
    NmsConfig,
    ScoreMapConfig,
    ScoreStrategy,
    nms,
    score_detection,
)


def duplicate_proposals(n_objects: int = 12):
    gt, proposals = [], []
    for i in range(n_objects):
        cx, cy = 12.0 * i, 6.0 * (i % 3)
        gt.append(Box3D(cx, cy, 0.75, 1.8, 4.2, 1.5, 0.0))
        good = Box3D(cx, cy, 0.75, 1.8, 4.2, 1.5, 0.0, score=0.80)
        bad = Box3D(cx + 1.2, cy, 0.75, 1.8, 4.2, 1.5, 0.0, score=0.805 if i % 2 == 0 else 0.79)
        proposals.append((good, EncodedLogVar(*([-6.0] * 7))))
        proposals.append((bad, EncodedLogVar(*([-1.0] * 7))))
    return gt, proposals


def evaluate(gt, proposals, strategy: ScoreStrategy, k_s: float) -> float:
    cfg = ScoreMapConfig(strategy=strategy, k_s=k_s, b_s=0.0, aggregate=AggregateMode.SUM)
    boxes = []
    for box, s in proposals:
        score = box.score if strategy is ScoreStrategy.NONE else score_detection(box.score, s, cfg)
        boxes.append(Box3D(box.x, box.y, box.z, box.w, box.l, box.h, box.theta, box.class_id, score))
    kept = nms(boxes, NmsConfig(iou_threshold=0.5))
    ap, _, _ = detection_pr([gt], [kept], EvalConfig(iou_threshold=0.7))
    return ap


def main() -> int:
    gt, proposals = duplicate_proposals()
    print(f"{'strategy':<14} {'k_s':>7} {'AP %':>7}")
    print(f"{'C (baseline)':<14} {'-':>7} {evaluate(gt, proposals, ScoreStrategy.NONE, 0.001):>7.1f}")
    for strategy in (ScoreStrategy.LINEAR, ScoreStrategy.SIGMOID, ScoreStrategy.EXPONENTIAL):
        for k_s in (0.001, 0.01):
            ap = evaluate(gt, proposals, strategy, k_s)
            print(f"{'C+' + strategy.value:<14} {k_s:>7} {ap:>7.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
