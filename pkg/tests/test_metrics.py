"""Detection PR/AP and CLEAR tracking metrics."""

import numpy as np
import pytest

from uatrack.boxes import Box3D
from uatrack.metrics import EvalConfig, clear_mot, detection_pr, match_frame
from uatrack.scoring import IouKind


def box(x=0.0, y=0.0, score=1.0, w=2.0, l=4.0, theta=0.0):
    return Box3D(x, y, 0.75, w, l, 1.5, theta, score=score)


CFG = EvalConfig(iou_threshold=0.5, iou_kind=IouKind.BEV, recall_points=40)


class TestMatchFrame:
    def test_identical_sets(self):
        gt = [box(0, 0), box(10, 0)]
        matches = match_frame(gt, list(gt), CFG)
        assert len(matches) == 2
        assert all(iou == pytest.approx(1.0) for _, _, iou in matches)

    def test_empty_predictions(self):
        assert match_frame([box()], [], CFG) == []

    def test_ambiguous_matches_brute_force(self):
        # two gt, two preds, each pred overlaps both; Hungarian must pick
        # the total-IoU-maximizing pairing
        gt = [box(0.0, 0.0), box(1.2, 0.0)]
        pred = [box(0.4, 0.0, score=0.9), box(0.9, 0.0, score=0.8)]
        matches = match_frame(gt, pred, EvalConfig(iou_threshold=0.1))
        from uatrack.geometry import iou_bev

        iou = [[iou_bev(g, p) for p in pred] for g in gt]
        best = max(
            (iou[0][0] + iou[1][1], ((0, 0), (1, 1))),
            (iou[0][1] + iou[1][0], ((0, 1), (1, 0))),
        )
        got_pairs = tuple(sorted((g, p) for g, p, _ in matches))
        assert got_pairs == best[1]

    def test_threshold_forbids(self):
        gt = [box(0, 0)]
        pred = [box(3.0, 0)]
        assert match_frame(gt, pred, CFG) == []


class TestDetectionPr:
    def test_perfect(self):
        frames_gt = [[box(0, 0), box(10, 0)], [box(5, 5)]]
        frames_pred = [[box(0, 0, score=0.9), box(10, 0, score=0.8)], [box(5, 5, score=0.7)]]
        ap, f1, _ = detection_pr(frames_gt, frames_pred, CFG)
        assert ap == pytest.approx(100.0)
        assert f1 == pytest.approx(100.0)

    def test_no_predictions(self):
        ap, f1, curve = detection_pr([[box()]], [[]], CFG)
        assert ap == 0.0 and f1 == 0.0 and curve == []

    def test_handcrafted_curve(self):
        # 3 gt; TPs at scores .9/.8/.6 and one FP at .7
        gt = [box(0, 0), box(10, 0), box(20, 0)]
        pred = [
            box(0, 0, score=0.9),
            box(10, 0, score=0.8),
            box(50, 0, score=0.7),  # far from every gt: FP
            box(20, 0, score=0.6),
        ]
        ap, f1, curve = detection_pr([gt], [pred], CFG)
        # interpolated precision: 1.0 up to recall 2/3, then 0.75;
        # R40 levels: 26 levels at/below 2/3 => (26*1 + 14*0.75)/40
        assert ap == pytest.approx(100.0 * 36.5 / 40.0, abs=1e-9)
        assert f1 == pytest.approx(100.0 * 6.0 / 7.0, rel=1e-12)
        recalls = [r for _, _, r in curve]
        assert recalls == sorted(recalls)

    def test_order_invariance_within_frame(self):
        gt = [box(0, 0), box(8, 0)]
        preds = [box(0, 0, score=0.6), box(8, 0, score=0.9), box(30, 0, score=0.7)]
        ap1, f11, _ = detection_pr([gt], [preds], CFG)
        ap2, f12, _ = detection_pr([gt], [list(reversed(preds))], CFG)
        assert ap1 == ap2 and f11 == f12

    def test_adding_false_positives_never_raises_ap(self):
        rng = np.random.default_rng(0)
        gt = [[box(5 * i, 0) for i in range(4)]]
        pred = [[box(5 * i, 0, score=float(s)) for i, s in enumerate(rng.uniform(0.5, 1.0, 4))]]
        base_ap, _, _ = detection_pr(gt, pred, CFG)
        worse = [pred[0] + [box(100 + 5 * i, 0, score=float(s)) for i, s in enumerate(rng.uniform(0.0, 1.0, 5))]]
        worse_ap, _, _ = detection_pr(gt, worse, CFG)
        assert worse_ap <= base_ap + 1e-12


class TestClearMot:
    def test_perfect_tracking(self):
        frames = [[(1, box(0, 0)), (2, box(10, 0))] for _ in range(10)]
        report = clear_mot(frames, frames, CFG)
        assert report.idsw == 0
        assert report.frag == 0
        assert report.ml == 0.0
        assert report.mota == pytest.approx(100.0)
        assert report.ap == pytest.approx(100.0)

    def test_identity_switch_counted(self):
        gt = [[(7, box(0, 0))] for _ in range(10)]
        pred = [[(1 if f < 5 else 2, box(0, 0))] for f in range(10)]
        report = clear_mot(gt, pred, CFG)
        assert report.idsw == 1
        assert report.frag == 0

    def test_fragmentation_counted(self):
        gt = [[(7, box(0, 0))] for _ in range(10)]
        pred = []
        for f in range(10):
            pred.append([(1, box(0, 0))] if f not in (4, 5) else [])
        report = clear_mot(gt, pred, CFG)
        assert report.frag == 1
        assert report.idsw == 0
        assert report.fn == 2

    def test_mostly_lost(self):
        gt = [[(7, box(0, 0))] for _ in range(10)]
        pred = [[(1, box(0, 0))] if f == 0 else [] for f in range(10)]
        report = clear_mot(gt, pred, CFG)
        assert report.ml == pytest.approx(100.0)

    def test_sticky_correspondence_prevents_switch(self):
        # two preds both overlap the gt; the carried-over id must win even
        # when the newcomer has slightly higher IoU
        gt = [[(7, box(0, 0))] for _ in range(4)]
        pred = [
            [(1, box(0, 0))],
            [(1, box(0.2, 0)), (2, box(0.05, 0))],
            [(1, box(0.2, 0)), (2, box(0.05, 0))],
            [(1, box(0, 0))],
        ]
        report = clear_mot(gt, pred, CFG)
        assert report.idsw == 0

    def test_sequence_additivity(self):
        rng = np.random.default_rng(3)

        def mini_seq(id_base, n):
            gt, pred = [], []
            for f in range(n):
                gtf, prf = [], []
                for k in range(2):
                    g = box(10.0 * k + 0.1 * f, 0)
                    gtf.append((id_base + k, g))
                    if rng.random() > 0.2:
                        prf.append((id_base + 10 + k, box(10.0 * k + 0.1 * f + rng.normal(0, 0.2), 0, score=0.9)))
                gt.append(gtf)
                pred.append(prf)
            return gt, pred

        gt1, pred1 = mini_seq(0, 12)
        gt2, pred2 = mini_seq(100, 12)
        a = clear_mot(gt1, pred1, CFG)
        b = clear_mot(gt2, pred2, CFG)
        both = clear_mot(gt1 + gt2, pred1 + pred2, CFG)
        assert both.idsw == a.idsw + b.idsw
        assert both.frag == a.frag + b.frag
        assert both.fn == a.fn + b.fn
        assert both.fp == a.fp + b.fp
        assert both.gt_total == a.gt_total + b.gt_total
        expected_mota = 100.0 * (1.0 - (both.fn + both.fp + both.idsw) / both.gt_total)
        assert both.mota == pytest.approx(expected_mota)
