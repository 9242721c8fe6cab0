"""Explanation-guided adversarial example generation and detection.

Generation perturbs only the features of an instance's explanation (the ones
that drive the prediction), either by snapping them toward a rival class's
typical intervals ("interval" mode) or by asking the exact oracle for a
score-gap witness with those features freed ("witness" mode).  Detection
scores an input by how much its explanation disagrees with the class-level
explanation of its predicted class: s_adv = discrepancies / explanation size.
"""

from __future__ import annotations

import csv
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .axp import Explanation, explain_dataset, extract_axp
from .classexpl import ClassExplanation
from .encoder import EncodedModel, instance_to_assumptions
from .model import Dataset, check_instance, predict
from .oracle import DEFAULT_SCALE, max_score_gap, witness_to_instance

ATTACK_MODES = ("interval", "witness")
DEFAULT_TAU = 0.5

FLAG_OK = "ok"
FLAG_MISSING = "missing_from_class"
FLAG_OUTSIDE = "outside_interval"

NOTE_EMPTY_EXPLANATION = "empty-explanation"
NOTE_EMPTY_CLASS = "empty-class-explanation"


@dataclass(frozen=True)
class DetectionResult:
    s_adv: float
    d: int
    n: int
    flags: tuple[tuple[int, str], ...]  # (feature, flag) per kept feature
    predicted_class: int
    note: str | None = None
    explanation: Explanation | None = None


@dataclass(frozen=True)
class AdvResult:
    original: tuple[float, ...]
    perturbed: tuple[float, ...]
    original_class: int
    new_class: int
    l2: float
    changed_features: tuple[int, ...]
    mode: str
    reversion_trace: tuple[float, ...] = field(default=())


def _expls_by_class(class_expls: list[ClassExplanation]
                    ) -> dict[int, ClassExplanation]:
    return {ce.class_index: ce for ce in class_expls}


def detect(encoded: EncodedModel, class_expls: list[ClassExplanation],
           instance, scale: int = DEFAULT_SCALE,
           min_frequency: float = 0.0,
           explanation: Explanation | None = None) -> DetectionResult:
    """Score an input for adversarial likelihood against its class profile.

    Per kept feature: not in the predicted class's explanation (or below the
    min-frequency cut) -> missing_from_class; value outside [a, b] ->
    outside_interval; otherwise ok.  s_adv = discrepancies / kept count.
    """
    x = check_instance(encoded.ensemble, instance)
    if explanation is None:
        explanation = extract_axp(encoded, x, scale=scale)
    y = explanation.predicted_class
    profile = _expls_by_class(class_expls).get(y)
    note = None
    if not explanation.kept:
        return DetectionResult(s_adv=0.0, d=0, n=0, flags=(),
                               predicted_class=y, note=NOTE_EMPTY_EXPLANATION,
                               explanation=explanation)
    if profile is None or not profile.intervals:
        note = NOTE_EMPTY_CLASS
    flags = []
    d = 0
    for f in explanation.kept:
        fi = profile.interval_for(f) if profile is not None else None
        if fi is not None and fi.frequency < min_frequency:
            fi = None
        if fi is None:
            flags.append((f, FLAG_MISSING))
            d += 1
        elif not fi.lower <= x[f] <= fi.upper:
            flags.append((f, FLAG_OUTSIDE))
            d += 1
        else:
            flags.append((f, FLAG_OK))
    n = len(explanation.kept)
    return DetectionResult(s_adv=d / n, d=d, n=n, flags=tuple(flags),
                           predicted_class=y, note=note,
                           explanation=explanation)


def classify_adversarial(result: DetectionResult,
                         tau: float = DEFAULT_TAU) -> bool:
    """Inclusive threshold: adversarial iff s_adv >= tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    return result.s_adv >= tau


def detect_dataset(encoded: EncodedModel,
                   class_expls: list[ClassExplanation],
                   data: Dataset | np.ndarray, scale: int = DEFAULT_SCALE,
                   min_frequency: float = 0.0, jobs: int = 1
                   ) -> list[DetectionResult]:
    """Score every row; the explanation extraction runs on the worker pool,
    the interval comparison is a cheap serial pass."""
    x = data.x if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    explanations = explain_dataset(encoded, x, scale=scale, jobs=jobs)
    return [detect(encoded, class_expls, x[i], scale=scale,
                   min_frequency=min_frequency, explanation=explanations[i])
            for i in range(len(x))]


# ---------------------------------------------------------------------------
# Generation


def _interval_attack(encoded, class_expls, x, original_class, explanation,
                     ) -> AdvResult | None:
    ensemble = encoded.ensemble
    by_class = _expls_by_class(class_expls)
    n_out = ensemble.num_output_classes
    for rival in range(n_out):
        if rival == original_class:
            continue
        profile = by_class.get(rival)
        if profile is None:
            continue
        x2 = x.copy()
        changed = []
        for f in explanation.kept:
            fi = profile.interval_for(f)
            if fi is None:
                continue
            if x2[f] < fi.lower:
                x2[f] = fi.lower
                changed.append(f)
            elif x2[f] > fi.upper:
                x2[f] = fi.upper
                changed.append(f)
        if not changed:
            continue
        if predict(ensemble, x2) == original_class:
            continue
        # Greedy reversion: undo changes one at a time while the flip holds.
        trace = [float(np.linalg.norm(x2 - x))]
        for f in list(changed):
            undo = x2[f]
            x2[f] = x[f]
            if predict(ensemble, x2) == original_class:
                x2[f] = undo
            else:
                changed.remove(f)
                trace.append(float(np.linalg.norm(x2 - x)))
        new_class = predict(ensemble, x2)
        return AdvResult(
            original=tuple(float(v) for v in x),
            perturbed=tuple(float(v) for v in x2),
            original_class=original_class, new_class=new_class,
            l2=float(np.linalg.norm(x2 - x)),
            changed_features=tuple(changed), mode="interval",
            reversion_trace=tuple(trace))
    return None


def _witness_attack(encoded, x, original_class, explanation, scale,
                    full_free: bool) -> AdvResult | None:
    ensemble = encoded.ensemble
    n_out = ensemble.num_output_classes

    def try_freeing(freed: set[int]) -> AdvResult | None:
        pinned = sorted(f for f in range(ensemble.num_features)
                        if f not in freed)
        assumptions = instance_to_assumptions(encoded, x, pinned)
        for rival in range(n_out):
            if rival == original_class:
                continue
            res = max_score_gap(encoded, assumptions, original_class, rival,
                                scale=scale)
            flips = res.gap_int > 0 or (res.gap_int == 0
                                        and rival < original_class)
            if not flips:
                continue
            x2 = witness_to_instance(res.witness, encoded, x)
            new_class = predict(ensemble, x2)
            if new_class == original_class:
                continue  # scaled gap was within rounding of zero; not a flip
            changed = tuple(f for f in range(ensemble.num_features)
                            if x2[f] != x[f])
            return AdvResult(
                original=tuple(float(v) for v in x),
                perturbed=tuple(float(v) for v in x2),
                original_class=original_class, new_class=new_class,
                l2=float(np.linalg.norm(x2 - x)),
                changed_features=changed, mode="witness")
        return None

    result = try_freeing(set(explanation.kept))
    if result is None and full_free:
        result = try_freeing(set(range(ensemble.num_features)))
    return result


def generate(encoded: EncodedModel, class_expls: list[ClassExplanation],
             instance, mode: str = "interval", scale: int = DEFAULT_SCALE,
             full_free: bool = False,
             explanation: Explanation | None = None) -> AdvResult | None:
    """Perturb an instance into a different predicted class, or return None.

    "interval": snap explanation features into each rival class's intervals,
    then greedily revert changes (ascending feature index) while the flip
    survives, shrinking L2.  "witness": free the explanation features, pin
    the rest, and materialize an exact positive-gap witness; with full_free
    also retry with every feature freed when that fails.
    """
    if mode not in ATTACK_MODES:
        raise ValueError(f"unknown attack mode {mode!r}")
    x = check_instance(encoded.ensemble, instance)
    original_class = predict(encoded.ensemble, x)
    if explanation is None:
        explanation = extract_axp(encoded, x, scale=scale)
    if mode == "interval":
        return _interval_attack(encoded, class_expls, x, original_class,
                                explanation)
    return _witness_attack(encoded, x, original_class, explanation, scale,
                           full_free)


# ---------------------------------------------------------------------------
# Whole-dataset evaluation


@dataclass(frozen=True)
class AttackRow:
    instance_index: int
    original_class: int
    original_values: tuple[float, ...]
    success: bool
    result: AdvResult | None
    detection: DetectionResult | None
    detected: bool | None
    clean_detection: DetectionResult | None = None


_WORKER: dict[str, object] = {}


def _init_worker(payload: bytes) -> None:
    encoded, class_expls, config = pickle.loads(payload)
    _WORKER["encoded"] = encoded
    _WORKER["class_expls"] = class_expls
    _WORKER["config"] = config


def _worker_attack(args) -> AttackRow:
    idx, row = args
    encoded = _WORKER["encoded"]
    class_expls = _WORKER["class_expls"]
    cfg = _WORKER["config"]
    return _attack_one(encoded, class_expls, idx, row, **cfg)


def _attack_one(encoded, class_expls, idx, row, mode, scale, tau, full_free,
                min_frequency, include_clean) -> AttackRow:
    original_class = predict(encoded.ensemble, row)
    explanation = extract_axp(encoded, row, scale=scale, instance_index=idx)
    res = generate(encoded, class_expls, row, mode=mode, scale=scale,
                   full_free=full_free, explanation=explanation)
    detection = None
    detected = None
    if res is not None:
        detection = detect(encoded, class_expls,
                           np.array(res.perturbed, dtype=np.float64),
                           scale=scale, min_frequency=min_frequency)
        detected = classify_adversarial(detection, tau=tau)
    clean = None
    if include_clean:
        clean = detect(encoded, class_expls, row, scale=scale,
                       min_frequency=min_frequency, explanation=explanation)
    return AttackRow(instance_index=idx, original_class=original_class,
                     original_values=tuple(float(v) for v in row),
                     success=res is not None, result=res, detection=detection,
                     detected=detected, clean_detection=clean)


def evaluate_attack(encoded: EncodedModel,
                    class_expls: list[ClassExplanation],
                    data: Dataset | np.ndarray, mode: str = "interval",
                    scale: int = DEFAULT_SCALE, tau: float = DEFAULT_TAU,
                    full_free: bool = False, min_frequency: float = 0.0,
                    include_clean: bool = False, jobs: int = 1
                    ) -> tuple[dict, list[AttackRow]]:
    """Attack every row; return (summary report, per-row records).

    The detection rate is computed over successful adversarials only; with
    include_clean an additional false-positive rate over the unperturbed
    rows is reported.
    """
    if mode not in ATTACK_MODES:
        raise ValueError(f"unknown attack mode {mode!r}")
    x = data.x if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    cfg = dict(mode=mode, scale=scale, tau=tau, full_free=full_free,
               min_frequency=min_frequency, include_clean=include_clean)
    tasks = list(enumerate(x))
    if jobs <= 1 or len(tasks) <= 1:
        rows = [_attack_one(encoded, class_expls, i, r, **cfg)
                for i, r in tasks]
    else:
        payload = pickle.dumps((encoded, class_expls, cfg))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            chunk = max(1, len(tasks) // (jobs * 4))
            rows = list(pool.map(_worker_attack, tasks, chunksize=chunk))
        rows.sort(key=lambda r: r.instance_index)

    ensemble = encoded.ensemble
    for row in rows:  # soundness: every emitted result re-verifies the flip
        if row.result is not None:
            x2 = np.array(row.result.perturbed, dtype=np.float64)
            if predict(ensemble, x2) == row.result.original_class:
                raise AssertionError("adversarial result failed re-verification")

    n_out = ensemble.num_output_classes
    total = len(rows)
    successes = [r for r in rows if r.success]
    fooled = len(successes)
    mean_l2 = (sum(r.result.l2 for r in successes) / fooled) if fooled else None
    per_class = {}
    flip_matrix = {str(c): {str(c2): 0 for c2 in range(n_out)}
                   for c in range(n_out)}
    for c in range(n_out):
        attempts = sum(1 for r in rows if r.original_class == c)
        flips = sum(1 for r in successes if r.original_class == c)
        per_class[str(c)] = {
            "attempts": attempts,
            "fooled": flips,
            "rate": (flips / attempts) if attempts else None,
        }
    for r in successes:
        flip_matrix[str(r.result.original_class)][str(r.result.new_class)] += 1
    detected = sum(1 for r in successes if r.detected)
    report = {
        "total": total,
        "fooled": fooled,
        "fooled_rate": (fooled / total) if total else None,
        "mean_l2": mean_l2,
        "per_class": per_class,
        "flip_matrix": flip_matrix,
        "detection": {
            "tau": tau,
            "successes": fooled,
            "detected": detected,
            "rate": (detected / fooled) if fooled else None,
        },
        "mode": mode,
    }
    if include_clean:
        flagged = sum(1 for r in rows
                      if r.clean_detection is not None
                      and classify_adversarial(r.clean_detection, tau=tau))
        report["clean_false_positive_rate"] = (flagged / total) if total else None
    return report, rows


def attack_rows_to_csv(fp, rows: list[AttackRow], feature_names) -> None:
    """Per-sample CSV: original and perturbed values plus outcome columns."""
    writer = csv.writer(fp, lineterminator="\n")
    header = (["instance", "original_class", "success", "new_class", "l2",
               "s_adv", "detected", "changed"]
              + [f"orig_{n}" for n in feature_names]
              + [f"adv_{n}" for n in feature_names])
    writer.writerow(header)
    for r in rows:
        orig = [repr(v) for v in r.original_values]
        if r.result is not None:
            new_class = r.result.new_class
            l2 = repr(r.result.l2)
            s_adv = repr(r.detection.s_adv) if r.detection else ""
            det = int(bool(r.detected))
            changed = " ".join(str(f) for f in r.result.changed_features)
            adv = [repr(v) for v in r.result.perturbed]
        else:
            new_class, l2, s_adv, det, changed = "", "", "", "", ""
            adv = [""] * len(feature_names)
        writer.writerow([r.instance_index, r.original_class, int(r.success),
                         new_class, l2, s_adv, det, changed] + orig + adv)


def check_reversion_trace(result: AdvResult) -> bool:
    """True iff the recorded greedy-reversion L2 trace is non-increasing."""
    trace = result.reversion_trace
    return all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
