"""Event-level PSDS and segment-level macro partial AUC.

PSDS side: detections are validated by intersection criteria (a detection
must overlap same-class truth for at least rho_dtc of its own duration; a
truth event counts as found when valid detections cover at least rho_gtc
of it). Operating points over a threshold sweep form a monotone staircase
of (false positives per hour, class-averaged TPR minus alpha_st times its
std); PSDS is the normalized area under that staircase up to e_max.

Segment side: 1-second segments are labelled from event truth or from soft
labels hardened at 0.5; per class a ROC partial area up to max_fpr is
computed with trapezoidal interpolation at the cut and standardized so
that chance maps to 0.5 and perfect ranking to 1.0 (switchable to the raw
area divided by max_fpr). The macro average over classes is mpAUC.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateClassWarning,
    InvalidIntervalError,
    InvalidParameterError,
    NoTruthEventsWarning,
)


@dataclass(frozen=True)
class Event:
    """A detected or annotated event: clip, class, and time span in seconds."""

    clip_id: str
    class_name: str
    onset_s: float
    offset_s: float

    def __post_init__(self):
        if not self.onset_s < self.offset_s:
            raise InvalidIntervalError(
                f"event offset ({self.offset_s}) must exceed onset ({self.onset_s})"
            )

    @property
    def duration_s(self) -> float:
        return self.offset_s - self.onset_s


@dataclass
class AnnotationSet:
    """Ground truth: hard event lists, clip durations, optional soft labels.

    ``soft_labels`` maps (clip_id, segment_index, class_name) to a value in
    [0, 1] on a 1-second grid.
    """

    events: list[Event] = field(default_factory=list)
    clip_durations: dict[str, float] = field(default_factory=dict)
    soft_labels: dict[tuple[str, int, str], float] | None = None

    def __post_init__(self):
        for clip, dur in self.clip_durations.items():
            if not dur > 0:
                raise InvalidParameterError(f"duration of {clip!r} must be > 0")
        for ev in self.events:
            dur = self.clip_durations.get(ev.clip_id)
            if dur is not None and ev.offset_s > dur + 1e-9:
                raise InvalidIntervalError(
                    f"event {ev.class_name} [{ev.onset_s}, {ev.offset_s}) exceeds "
                    f"duration {dur} of clip {ev.clip_id!r}"
                )
        if self.soft_labels is not None:
            for key, v in self.soft_labels.items():
                if not 0.0 <= v <= 1.0:
                    raise InvalidParameterError(f"soft label {key} = {v} not in [0,1]")

    @property
    def classes(self) -> list[str]:
        names = {e.class_name for e in self.events}
        if self.soft_labels:
            names |= {k[2] for k in self.soft_labels}
        return sorted(names)


@dataclass(frozen=True)
class PsdsConfig:
    rho_dtc: float = 0.7
    rho_gtc: float = 0.7
    alpha_st: float = 1.0
    e_max: float = 100.0  # false positives per hour
    thresholds: tuple[float, ...] = field(
        default_factory=lambda: tuple((np.arange(1, 51) / 51.0).tolist())
    )

    def __post_init__(self):
        if not (0 < self.rho_dtc <= 1 and 0 < self.rho_gtc <= 1):
            raise InvalidParameterError("rho criteria must be in (0, 1]")
        if not self.e_max > 0:
            raise InvalidParameterError("e_max must be > 0")
        if len(self.thresholds) == 0:
            raise InvalidParameterError("need at least one threshold")


def _overlap(a_on, a_off, b_on, b_off) -> float:
    return max(0.0, min(a_off, b_off) - max(a_on, b_on))


def intersection_match(
    dets: Sequence[Event],
    truth: Sequence[Event],
    rho_dtc: float = 0.7,
    rho_gtc: float = 0.7,
) -> dict[str, tuple[int, int]]:
    """Count per-class (TP, FP) under the intersection criteria.

    A detection is valid when its total intersection with same-class truth
    in the same clip covers at least rho_dtc of its duration; invalid
    detections are false positives. A truth event is a true positive when
    valid detections cover at least rho_gtc of it.
    """
    classes = sorted({e.class_name for e in dets} | {e.class_name for e in truth})
    dets_by: dict[tuple[str, str], list[Event]] = {}
    truth_by: dict[tuple[str, str], list[Event]] = {}
    for e in dets:
        dets_by.setdefault((e.clip_id, e.class_name), []).append(e)
    for e in truth:
        truth_by.setdefault((e.clip_id, e.class_name), []).append(e)

    counts: dict[str, tuple[int, int]] = {}
    for cls in classes:
        tp = fp = 0
        clips = {c for c, k in dets_by if k == cls} | {c for c, k in truth_by if k == cls}
        for clip in sorted(clips):
            d_list = dets_by.get((clip, cls), [])
            t_list = truth_by.get((clip, cls), [])
            valid = []
            for d in d_list:
                inter = sum(
                    _overlap(d.onset_s, d.offset_s, t.onset_s, t.offset_s)
                    for t in t_list
                )
                if inter / d.duration_s >= rho_dtc:
                    valid.append(d)
                else:
                    fp += 1
            for t in t_list:
                inter = sum(
                    _overlap(d.onset_s, d.offset_s, t.onset_s, t.offset_s)
                    for d in valid
                )
                if inter / t.duration_s >= rho_gtc:
                    tp += 1
        counts[cls] = (tp, fp)
    return counts


def psd_roc(
    detections,
    truth: AnnotationSet,
    cfg: PsdsConfig = PsdsConfig(),
    classes: Sequence[str] | None = None,
) -> list[tuple[float, float]]:
    """Operating points over the threshold sweep, as a monotone staircase.

    ``detections`` is either a callable mapping a threshold to an event
    list, or a sequence of event lists aligned with cfg.thresholds. The
    TPR mean/std run over ``classes`` (default: classes present in the
    truth events); a listed class with zero truth events is excluded with
    a warning. False positives of every class count toward the per-hour
    rate, normalized by the total annotated audio duration.
    """
    if not truth.clip_durations:
        raise InvalidParameterError("truth must carry clip durations for eFPR")
    hours = sum(truth.clip_durations.values()) / 3600.0
    if classes is None:
        eval_classes = sorted({e.class_name for e in truth.events})
    else:
        eval_classes = list(classes)
    n_truth = {
        c: sum(1 for e in truth.events if e.class_name == c) for c in eval_classes
    }
    for c in [c for c in eval_classes if n_truth[c] == 0]:
        warnings.warn(
            f"class {c!r} has no truth events; excluded from TPR mean",
            NoTruthEventsWarning,
        )
    eval_classes = [c for c in eval_classes if n_truth[c] > 0]

    if callable(detections):
        det_lists = [detections(t) for t in cfg.thresholds]
    else:
        det_lists = list(detections)

    points = []
    for dets in det_lists:
        counts = intersection_match(dets, truth.events, cfg.rho_dtc, cfg.rho_gtc)
        fp_total = sum(fp for _, fp in counts.values())
        efpr = fp_total / hours
        if eval_classes:
            tprs = np.array(
                [counts.get(c, (0, 0))[0] / n_truth[c] for c in eval_classes]
            )
            etpr = float(tprs.mean() - cfg.alpha_st * tprs.std())
        else:
            etpr = 0.0
        points.append((efpr, etpr))

    # Monotone upper staircase anchored at (0, 0).
    points.sort()
    curve = [(0.0, 0.0)]
    for efpr, etpr in points:
        if etpr > curve[-1][1]:
            if efpr == curve[-1][0]:
                curve[-1] = (efpr, etpr)
            else:
                curve.append((efpr, etpr))
    return curve


def psds(curve: Sequence[tuple[float, float]], cfg: PsdsConfig = PsdsConfig()) -> float:
    """Normalized area under the staircase for eFPR in [0, e_max]."""
    area = 0.0
    level = 0.0
    last_e = 0.0
    for efpr, etpr in sorted(curve):
        e = min(efpr, cfg.e_max)
        if e > last_e:
            area += level * (e - last_e)
            last_e = e
        level = max(level, etpr)
    area += level * (cfg.e_max - last_e)
    return area / cfg.e_max


def segmentize(
    truth: AnnotationSet,
    classes: Sequence[str] | None = None,
    segment_s: float = 1.0,
    hard_threshold: float = 0.5,
) -> dict[tuple[str, int, str], int]:
    """Binary per-(clip, segment, class) labels on a fixed segment grid.

    Event truth marks a segment positive when the event overlaps it with
    positive measure; soft truth (when present) marks it positive when the
    value is >= hard_threshold. The final partial segment of each clip is
    included. Every grid cell receives exactly one label.
    """
    if classes is None:
        classes = truth.classes
    labels: dict[tuple[str, int, str], int] = {}
    for clip, dur in sorted(truth.clip_durations.items()):
        n_seg = max(1, math.ceil(dur / segment_s - 1e-12))
        for seg in range(n_seg):
            for cls in classes:
                labels[(clip, seg, cls)] = 0
    if truth.soft_labels is not None:
        for (clip, seg, cls), v in truth.soft_labels.items():
            if (clip, seg, cls) in labels and v >= hard_threshold:
                labels[(clip, seg, cls)] = 1
    else:
        for ev in truth.events:
            if ev.class_name not in classes:
                continue
            first = int(ev.onset_s // segment_s)
            last = int(math.ceil(ev.offset_s / segment_s))
            for seg in range(first, last):
                key = (ev.clip_id, seg, ev.class_name)
                lo, hi = seg * segment_s, (seg + 1) * segment_s
                if key in labels and _overlap(ev.onset_s, ev.offset_s, lo, hi) > 0:
                    labels[key] = 1
    return labels


def partial_roc_auc(
    labels, scores, max_fpr: float = 0.1, standardize: bool = True
) -> float:
    """Partial area under the ROC curve for FPR in [0, max_fpr].

    The ROC is built from all distinct score thresholds; the area is
    integrated trapezoidally with linear interpolation at the max_fpr cut.
    With ``standardize`` the result is mapped so chance is 0.5 and perfect
    ranking 1.0; otherwise the raw area divided by max_fpr is returned.
    """
    if not 0 < max_fpr <= 1:
        raise InvalidParameterError(f"max_fpr must be in (0, 1], got {max_fpr}")
    y = np.asarray(labels).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise InvalidParameterError("labels and scores must be equal-length 1-D")
    n_pos = int(y.sum())
    n_neg = int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise InvalidParameterError("need at least one positive and one negative")

    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    distinct = np.nonzero(np.diff(s_sorted))[0]
    idx = np.concatenate([distinct, [y.size - 1]])
    tps = np.cumsum(y_sorted)[idx]
    fps = idx + 1 - tps
    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])

    if fpr[-1] < max_fpr:
        cut_tpr = tpr[-1]
    else:
        cut_tpr = float(np.interp(max_fpr, fpr, tpr))
    # keep points at the cut itself so a vertical run at max_fpr stays
    # zero-width instead of inflating the final trapezoid
    keep = fpr <= max_fpr
    fpr_p = np.concatenate([fpr[keep], [max_fpr]])
    tpr_p = np.concatenate([tpr[keep], [cut_tpr]])
    pauc = float(np.trapezoid(tpr_p, fpr_p))

    if not standardize:
        return pauc / max_fpr
    min_area = 0.5 * max_fpr**2
    max_area = max_fpr
    return 0.5 * (1.0 + (pauc - min_area) / (max_area - min_area))


def mpauc_report(
    segment_scores: Mapping[tuple[str, int, str], float],
    segment_labels: Mapping[tuple[str, int, str], int],
    classes: Sequence[str] | None = None,
    max_fpr: float = 0.1,
    standardize: bool = True,
) -> dict:
    """Per-class partial AUCs plus the macro average.

    Every scored (clip, segment, class) cell must have a label. Classes
    lacking positives or negatives are excluded from the macro mean and
    reported under ``excluded``.
    """
    if classes is None:
        classes = sorted({k[2] for k in segment_labels})
    missing = [k for k in segment_scores if k not in segment_labels]
    if missing:
        raise InvalidParameterError(
            f"{len(missing)} scored segments lack labels, e.g. {missing[0]}"
        )
    per_class: dict[str, float] = {}
    excluded: list[str] = []
    for cls in classes:
        keys = sorted(k for k in segment_scores if k[2] == cls)
        y = np.array([segment_labels[k] for k in keys])
        s = np.array([segment_scores[k] for k in keys])
        if y.size == 0 or y.all() or not y.any():
            excluded.append(cls)
            warnings.warn(
                f"class {cls!r} lacks positives or negatives; excluded",
                DegenerateClassWarning,
            )
            continue
        per_class[cls] = partial_roc_auc(y, s, max_fpr, standardize)
    if not per_class:
        raise InvalidParameterError("no class has both positives and negatives")
    macro = float(np.mean(list(per_class.values())))
    return {"mpauc": macro, "per_class": per_class, "excluded": excluded}


def mpauc(
    segment_scores: Mapping[tuple[str, int, str], float],
    segment_labels: Mapping[tuple[str, int, str], int],
    classes: Sequence[str] | None = None,
    max_fpr: float = 0.1,
    standardize: bool = True,
) -> float:
    """Macro-averaged partial ROC AUC over classes; see ``mpauc_report``."""
    return mpauc_report(segment_scores, segment_labels, classes, max_fpr, standardize)[
        "mpauc"
    ]


def joint_score(psds_value: float, mpauc_value: float) -> float:
    """Sum of the event-level and segment-level metric values."""
    for name, v in (("psds", psds_value), ("mpauc", mpauc_value)):
        if not 0.0 <= v <= 1.0:
            raise InvalidParameterError(f"{name} must be in [0,1], got {v}")
    return psds_value + mpauc_value
