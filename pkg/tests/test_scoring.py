"""Uncertainty scoring strategies and NMS behavior."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from uatrack.boxes import Box3D, EncodedLogVar
from uatrack.scoring import (
    AggregateMode,
    IouKind,
    NmsConfig,
    ScoreMapConfig,
    ScoreStrategy,
    aggregate_logvar,
    combined_score,
    map_uncertainty_to_logscore,
    nms,
    score_detection,
)


class TestAggregate:
    def test_uniform(self):
        s = EncodedLogVar(*([-2.0] * 7))
        assert aggregate_logvar(s, AggregateMode.MAX) == -2.0
        assert aggregate_logvar(s, AggregateMode.SUM) == pytest.approx(-14.0)

    def test_max_picks_largest(self):
        s = EncodedLogVar(0, 1, 2, 0, 0, 0, 0)
        assert aggregate_logvar(s, AggregateMode.MAX) == 2.0


class TestMapping:
    def test_linear_value(self):
        cfg = ScoreMapConfig(strategy=ScoreStrategy.LINEAR, k_s=0.001, b_s=0.0)
        assert map_uncertainty_to_logscore(-3.0, cfg) == pytest.approx(0.003)

    def test_linear_clamps_at_zero(self):
        cfg = ScoreMapConfig(strategy=ScoreStrategy.LINEAR, k_s=0.5, b_s=0.0)
        assert map_uncertainty_to_logscore(10.0, cfg) == 0.0

    def test_sigmoid_at_midpoint(self):
        cfg = ScoreMapConfig(strategy=ScoreStrategy.SIGMOID, k_s=0.7, b_s=0.0)
        assert map_uncertainty_to_logscore(0.0, cfg) == pytest.approx(math.log(0.5), rel=1e-12)

    def test_exponential_value(self):
        cfg = ScoreMapConfig(strategy=ScoreStrategy.EXPONENTIAL, k_s=0.01, b_s=0.0)
        assert map_uncertainty_to_logscore(0.0, cfg) == pytest.approx(-1.0)

    def test_none_is_zero(self):
        cfg = ScoreMapConfig(strategy=ScoreStrategy.NONE)
        assert map_uncertainty_to_logscore(123.0, cfg) == 0.0

    @given(
        st.sampled_from([ScoreStrategy.LINEAR, ScoreStrategy.EXPONENTIAL, ScoreStrategy.SIGMOID]),
        st.floats(min_value=1e-4, max_value=1.0),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=-50.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=10.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_monotone_non_increasing(self, strategy, k_s, b_s, g, delta):
        cfg = ScoreMapConfig(strategy=strategy, k_s=k_s, b_s=b_s)
        assert map_uncertainty_to_logscore(g + delta, cfg) <= map_uncertainty_to_logscore(g, cfg) + 1e-12


class TestCombinedScore:
    def test_neutral(self):
        assert combined_score(1.0, 0.0, 1.0) == pytest.approx(1.0)

    def test_hand_value(self):
        assert combined_score(0.5, -1.0, 1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-12)

    def test_alpha_exponent_law(self):
        one = combined_score(0.5, -1.0, 1.0)
        two = combined_score(0.5, -1.0, 2.0)
        assert two == pytest.approx(one * one, rel=1e-12)

    def test_rejects_nonpositive_score(self):
        with pytest.raises(ValueError):
            combined_score(0.0, 0.0, 1.0)

    def test_none_strategy_reduces_to_classification(self):
        s = EncodedLogVar(*([-3.0] * 7))
        cfg = ScoreMapConfig(strategy=ScoreStrategy.NONE, alpha=1.0)
        assert score_detection(0.77, s, cfg) == pytest.approx(0.77, rel=1e-12)


def _box(x=0.0, y=0.0, score=0.5, theta=0.0, w=1.0, l=1.0):
    return Box3D(x, y, 0.0, w, l, 1.0, theta, score=score)


class TestNms:
    def test_identical_boxes_keep_best(self):
        boxes = [_box(score=0.9), _box(score=0.8)]
        kept = nms(boxes, NmsConfig(iou_threshold=0.5))
        assert len(kept) == 1
        assert kept[0].score == 0.9

    def test_disjoint_kept(self):
        boxes = [_box(score=0.9), _box(x=10.0, score=0.8)]
        assert len(nms(boxes, NmsConfig(iou_threshold=0.5))) == 2

    def test_chain_suppression(self):
        # A overlaps B, B overlaps C, A and C barely overlap: keep A and C
        a = _box(x=0.0, score=0.9, w=1.0, l=2.0)
        b = _box(x=0.5, score=0.8, w=1.0, l=2.0)
        c = _box(x=1.3, score=0.7, w=1.0, l=2.0)
        from uatrack.geometry import iou_bev

        assert iou_bev(a, b) > 0.3 and iou_bev(b, c) > 0.3 and iou_bev(a, c) < 0.3
        kept = nms([a, b, c], NmsConfig(iou_threshold=0.3))
        assert [k.score for k in kept] == [0.9, 0.7]

    def test_pre_top_k(self):
        boxes = [_box(x=3.0 * i, score=0.9 - 0.01 * i) for i in range(10)]
        kept = nms(boxes, NmsConfig(iou_threshold=0.5, pre_top_k=4))
        assert len(kept) == 4

    @given(st.permutations(range(8)))
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariance(self, order):
        boxes = [_box(x=1.1 * i, score=0.9 - 0.07 * i) for i in range(8)]
        base = nms(boxes, NmsConfig(iou_threshold=0.3))
        shuffled = [boxes[i] for i in order]
        permuted = nms(shuffled, NmsConfig(iou_threshold=0.3))
        assert sorted(b.score for b in base) == sorted(b.score for b in permuted)

    def test_output_bounded(self):
        boxes = [_box(x=2.0 * i, score=0.5) for i in range(5)]
        kept = nms(boxes, NmsConfig(iou_threshold=0.5, pre_top_k=100))
        assert len(kept) <= min(len(boxes), 100)

    def test_3d_kind(self):
        a = Box3D(0, 0, 0.0, 1, 1, 1, 0, score=0.9)
        b = Box3D(0, 0, 0.9, 1, 1, 1, 0, score=0.8)  # thin vertical overlap
        kept = nms([a, b], NmsConfig(iou_threshold=0.5, iou_kind=IouKind.THREE_D))
        assert len(kept) == 2
