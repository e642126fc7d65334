"""Intersection matching, PSDS staircases, segment labels, partial AUC."""

import numpy as np
import pytest

from sedtk.errors import (
    DegenerateClassWarning,
    InvalidIntervalError,
    InvalidParameterError,
    NoTruthEventsWarning,
)
from sedtk.metrics import (
    AnnotationSet,
    Event,
    PsdsConfig,
    intersection_match,
    joint_score,
    mpauc,
    mpauc_report,
    partial_roc_auc,
    psd_roc,
    psds,
    segmentize,
)


def _brute_partial_auc(y, s, max_fpr, standardize=True):
    """O(n^2) oracle: enumerate every threshold, count, clip trapezoids."""
    y = np.asarray(y, dtype=int)
    s = np.asarray(s, dtype=np.float64)
    n_pos, n_neg = y.sum(), (1 - y).sum()
    pts = [(0.0, 0.0)]
    for thr in np.unique(s)[::-1]:
        pred = s >= thr
        tp = int((pred & (y == 1)).sum())
        fp = int((pred & (y == 0)).sum())
        pts.append((fp / n_neg, tp / n_pos))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 <= max_fpr:
            area += (x1 - x0) * (y0 + y1) / 2.0
        elif x0 < max_fpr:
            yc = y0 + (y1 - y0) * (max_fpr - x0) / (x1 - x0)
            area += (max_fpr - x0) * (y0 + yc) / 2.0
    if not standardize:
        return area / max_fpr
    min_area = 0.5 * max_fpr**2
    return 0.5 * (1.0 + (area - min_area) / (max_fpr - min_area))


class TestEventType:
    def test_requires_positive_duration(self):
        with pytest.raises(InvalidIntervalError):
            Event("a", "dog", 2.0, 2.0)

    def test_annotation_set_checks_durations(self):
        with pytest.raises(InvalidIntervalError):
            AnnotationSet(
                events=[Event("a", "dog", 0.0, 11.0)],
                clip_durations={"a": 10.0},
            )


class TestIntersectionMatch:
    def test_exact_match(self):
        truth = [Event("a", "dog", 1.0, 2.0)]
        for rho in (0.1, 0.7, 1.0):
            counts = intersection_match(truth, truth, rho, rho)
            assert counts["dog"] == (1, 0)

    def test_disjoint_detection(self):
        dets = [Event("a", "dog", 5.0, 6.0)]
        truth = [Event("a", "dog", 1.0, 2.0)]
        assert intersection_match(dets, truth)["dog"] == (0, 1)

    def test_sixty_percent_equal_length(self):
        # Interval-intersection arithmetic: overlap 6 of 10 fails rho=0.7
        # on the detection side, so it is an FP and the truth stays missed.
        dets = [Event("a", "dog", 4.0, 14.0)]
        truth = [Event("a", "dog", 0.0, 10.0)]
        assert intersection_match(dets, truth, 0.7, 0.7)["dog"] == (0, 1)

    def test_fragmented_detections_can_cover_truth(self):
        dets = [Event("a", "dog", 0.0, 4.0), Event("a", "dog", 4.5, 9.5)]
        truth = [Event("a", "dog", 0.0, 10.0)]
        # both dets fully inside truth (DTC ok); coverage 9/10 >= 0.7
        assert intersection_match(dets, truth, 0.7, 0.7)["dog"] == (1, 0)

    def test_classes_and_clips_are_separated(self):
        dets = [Event("a", "cat", 1.0, 2.0), Event("b", "dog", 1.0, 2.0)]
        truth = [Event("a", "dog", 1.0, 2.0)]
        counts = intersection_match(dets, truth)
        assert counts["dog"] == (0, 1)
        assert counts["cat"] == (0, 1)


class TestPsdRoc:
    TRUTH = AnnotationSet(
        events=[
            Event("a", "dog", 0.0, 10.0),
            Event("a", "dog", 20.0, 30.0),
            Event("a", "cat", 40.0, 50.0),
            Event("a", "cat", 60.0, 70.0),
        ],
        clip_durations={"a": 3600.0},
    )

    def test_perfect_curve_contains_0_1(self):
        perfect = list(self.TRUTH.events)
        curve = psd_roc([perfect] * 3, self.TRUTH)
        assert (0.0, 1.0) in curve
        assert psds(curve) == 1.0

    def test_empty_detections(self):
        curve = psd_roc([[]], self.TRUTH)
        assert curve == [(0.0, 0.0)]
        assert psds(curve) == 0.0

    def test_two_class_three_threshold_staircase(self):
        # Hand enumeration. Detections and confidences:
        #   d1 dog [0,10)    conf 0.9  (matches truth)
        #   d2 dog [20,30)   conf 0.6  (matches truth)
        #   d3 dog [100,110) conf 0.55 (disjoint FP)
        #   d4 cat [40,50)   conf 0.7  (matches truth)
        #   d5 cat [200,210) conf 0.3  (disjoint FP)
        # tau=0.2: TPRs (1, 0.5), 2 FP in 1 h  -> (2.0, 0.75-0.25=0.5)
        # tau=0.5: TPRs (1, 0.5), 1 FP        -> (1.0, 0.5)
        # tau=0.8: TPRs (0.5, 0), 0 FP        -> (0.0, 0.25-0.25=0.0)
        # staircase: [(0,0), (1,0.5)]; psds = 0.5*(100-1)/100 = 0.495
        dets = [
            (0.9, Event("a", "dog", 0.0, 10.0)),
            (0.6, Event("a", "dog", 20.0, 30.0)),
            (0.55, Event("a", "dog", 100.0, 110.0)),
            (0.7, Event("a", "cat", 40.0, 50.0)),
            (0.3, Event("a", "cat", 200.0, 210.0)),
        ]
        cfg = PsdsConfig(thresholds=(0.2, 0.5, 0.8))
        curve = psd_roc(
            lambda tau: [e for conf, e in dets if conf >= tau], self.TRUTH, cfg
        )
        assert curve == [(0.0, 0.0), (1.0, 0.5)]
        assert psds(curve, cfg) == pytest.approx(0.495, abs=1e-12)

    def test_zero_truth_class_warns_and_is_excluded(self):
        with pytest.warns(NoTruthEventsWarning):
            curve = psd_roc(
                [list(self.TRUTH.events)],
                self.TRUTH,
                classes=["dog", "cat", "unicorn"],
            )
        assert (0.0, 1.0) in curve

    def test_operating_point_bounds(self):
        rng = np.random.default_rng(0)
        for trial in range(20):
            truth_events = [
                Event("a", "dog", float(o), float(o) + 1.0)
                for o in rng.uniform(0, 100, size=3)
            ]
            det_events = [
                Event("a", "dog", float(o), float(o) + 1.0)
                for o in rng.uniform(0, 100, size=4)
            ]
            truth = AnnotationSet(events=truth_events, clip_durations={"a": 200.0})
            curve = psd_roc([det_events], truth)
            for efpr, etpr in curve:
                assert etpr <= 1.0
                assert efpr >= 0.0 and np.isfinite(efpr)

    def test_requires_durations(self):
        truth = AnnotationSet(events=[Event("a", "dog", 0.0, 1.0)])
        with pytest.raises(InvalidParameterError):
            psd_roc([[]], truth)


class TestPsds:
    def test_toy_staircase_area(self):
        assert psds([(0.0, 0.5), (50.0, 0.8)]) == pytest.approx(0.65, abs=1e-12)

    def test_points_beyond_emax_are_clipped(self):
        assert psds([(0.0, 0.5), (150.0, 1.0)]) == pytest.approx(0.5, abs=1e-12)

    def test_monotonicity_two_class_fixtures(self):
        # Duplicate-of-truth never decreases, disjoint FP never increases.
        rng = np.random.default_rng(1)
        for trial in range(15):
            events, dets = [], []
            for cls in ("dog", "cat"):
                for _ in range(int(rng.integers(1, 4))):
                    on = float(rng.uniform(0, 250))
                    events.append(Event("a", cls, on, on + float(rng.uniform(1, 5))))
                for _ in range(int(rng.integers(0, 4))):
                    on = float(rng.uniform(0, 250))
                    dets.append((rng.uniform(), Event("a", cls, on, on + float(rng.uniform(1, 5)))))
            truth = AnnotationSet(events=events, clip_durations={"a": 400.0})
            cfg = PsdsConfig(thresholds=(0.25, 0.5, 0.75))

            def value(det_list):
                return psds(
                    psd_roc(lambda tau: [e for c, e in det_list if c >= tau], truth, cfg),
                    cfg,
                )

            base = value(dets)
            dup = dets + [(1.0, events[int(rng.integers(len(events)))])]
            assert value(dup) >= base - 1e-12
            spur_on = 300.0 + float(rng.uniform(0, 50))
            spur = dets + [(1.0, Event("a", "dog", spur_on, spur_on + 2.0))]
            assert value(spur) <= base + 1e-12


class TestSegmentize:
    def test_event_overlap(self):
        truth = AnnotationSet(
            events=[Event("a", "dog", 0.2, 2.5)], clip_durations={"a": 10.0}
        )
        labels = segmentize(truth)
        positives = sorted(k[1] for k, v in labels.items() if v)
        assert positives == [0, 1, 2]

    def test_soft_threshold_boundary(self):
        truth = AnnotationSet(
            clip_durations={"a": 2.0},
            soft_labels={("a", 0, "dog"): 0.5, ("a", 1, "dog"): 0.49},
        )
        labels = segmentize(truth, classes=["dog"])
        assert labels[("a", 0, "dog")] == 1
        assert labels[("a", 1, "dog")] == 0

    def test_total_and_deterministic(self):
        truth = AnnotationSet(
            events=[Event("a", "dog", 0.0, 1.0)],
            clip_durations={"a": 4.5, "b": 2.0},
        )
        labels = segmentize(truth, classes=["dog", "cat"])
        # final partial segment included: ceil(4.5) = 5 segments for "a"
        assert len(labels) == (5 + 2) * 2
        assert labels == segmentize(truth, classes=["dog", "cat"])

    def test_event_touching_segment_boundary_not_positive(self):
        truth = AnnotationSet(
            events=[Event("a", "dog", 1.0, 2.0)], clip_durations={"a": 4.0}
        )
        labels = segmentize(truth)
        assert labels[("a", 2, "dog")] == 0
        assert labels[("a", 1, "dog")] == 1


class TestPartialAuc:
    def test_perfect_ranking(self):
        y = np.array([0] * 20 + [1] * 20)
        s = np.concatenate([np.linspace(0, 0.4, 20), np.linspace(0.6, 1, 20)])
        assert partial_roc_auc(y, s) == pytest.approx(1.0)

    def test_constant_scores_are_chance(self):
        y = np.array([0, 1] * 25)
        assert partial_roc_auc(y, np.full(50, 0.7)) == pytest.approx(0.5)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        for trial in range(50):
            n = int(rng.integers(20, 200))
            y = rng.integers(0, 2, size=n)
            if y.all() or not y.any():
                y[0], y[-1] = 0, 1
            s = rng.uniform(size=n)
            got = partial_roc_auc(y, s, max_fpr=0.1)
            want = _brute_partial_auc(y, s, max_fpr=0.1)
            assert got == pytest.approx(want, abs=1e-9)
            got_raw = partial_roc_auc(y, s, max_fpr=0.25, standardize=False)
            want_raw = _brute_partial_auc(y, s, max_fpr=0.25, standardize=False)
            assert got_raw == pytest.approx(want_raw, abs=1e-9)

    def test_ties_in_scores(self):
        y = np.array([0, 0, 1, 1, 0, 1])
        s = np.array([0.2, 0.5, 0.5, 0.9, 0.9, 0.9])
        assert partial_roc_auc(y, s, 0.5) == pytest.approx(
            _brute_partial_auc(y, s, 0.5), abs=1e-12
        )

    def test_rank_invariance(self):
        rng = np.random.default_rng(4)
        y = rng.integers(0, 2, size=120)
        y[:2] = [0, 1]
        s = rng.uniform(size=120)
        base = partial_roc_auc(y, s)
        for transform in (lambda v: 2 * v + 1, np.exp, lambda v: v**3):
            assert partial_roc_auc(y, transform(s)) == pytest.approx(base, abs=1e-12)

    def test_degenerate_input(self):
        with pytest.raises(InvalidParameterError):
            partial_roc_auc(np.ones(5), np.linspace(0, 1, 5))


class TestMpauc:
    def _instance(self, seed=0, n_clips=2, n_seg=20, classes=("a", "b", "c")):
        rng = np.random.default_rng(seed)
        scores, labels = {}, {}
        for clip in range(n_clips):
            for seg in range(n_seg):
                for cls in classes:
                    key = (f"clip{clip}", seg, cls)
                    scores[key] = float(rng.uniform())
                    labels[key] = int(rng.integers(0, 2))
        # force both polarities per class
        for i, cls in enumerate(classes):
            labels[("clip0", 0, cls)] = 0
            labels[("clip0", 1, cls)] = 1
        return scores, labels, list(classes)

    def test_macro_is_mean_of_per_class(self):
        scores, labels, classes = self._instance()
        report = mpauc_report(scores, labels, classes)
        assert report["mpauc"] == pytest.approx(
            np.mean(list(report["per_class"].values()))
        )
        assert mpauc(scores, labels, classes) == report["mpauc"]

    def test_against_per_class_oracle(self):
        scores, labels, classes = self._instance(seed=9)
        report = mpauc_report(scores, labels, classes)
        for cls in classes:
            keys = sorted(k for k in scores if k[2] == cls)
            y = np.array([labels[k] for k in keys])
            s = np.array([scores[k] for k in keys])
            assert report["per_class"][cls] == pytest.approx(
                _brute_partial_auc(y, s, 0.1), abs=1e-9
            )

    def test_degenerate_class_excluded_with_warning(self):
        scores, labels, classes = self._instance()
        for key in list(labels):
            if key[2] == "c":
                labels[key] = 1
        with pytest.warns(DegenerateClassWarning):
            report = mpauc_report(scores, labels, classes)
        assert report["excluded"] == ["c"]
        assert set(report["per_class"]) == {"a", "b"}

    def test_missing_label_rejected(self):
        scores, labels, classes = self._instance()
        labels.pop(("clip0", 5, "a"))
        with pytest.raises(InvalidParameterError):
            mpauc(scores, labels, classes)


class TestJointScore:
    def test_reported_sums(self):
        assert joint_score(0.604, 0.739) == 1.343
        assert joint_score(0.549, 0.721) == 1.270

    def test_zero(self):
        assert joint_score(0.0, 0.0) == 0.0

    def test_range_check(self):
        with pytest.raises(InvalidParameterError):
            joint_score(1.2, 0.5)
