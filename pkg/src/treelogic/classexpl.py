"""Class-level explanations: per class, important features with value intervals.

For each class, the explanations of all instances predicted as that class are
aggregated: every kept feature joins the class's feature set, carrying the
instance values it was kept at.  Each feature's value list is summarized into
an interval, either by quantile trimming (default) or by an exact
one-dimensional 2-means split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .axp import Explanation
from .model import FeatureSpace

INTERVAL_METHODS = ("quantile", "cluster")
DEFAULT_ALPHA = 0.05


def _cluster_interval(values: list[float]) -> tuple[float, float]:
    """Exact 1-D 2-means by enumerating sorted split points.

    Returns [min, max] of the larger cluster; equal sizes pick the cluster
    containing the lower median element.
    """
    xs = sorted(values)
    n = len(xs)
    if n == 1:
        return xs[0], xs[0]
    prefix = [0.0]
    prefix_sq = [0.0]
    for v in xs:
        prefix.append(prefix[-1] + v)
        prefix_sq.append(prefix_sq[-1] + v * v)

    def sse(i: int, j: int) -> float:
        # sum of squared deviations of xs[i:j] from its mean
        m = j - i
        s = prefix[j] - prefix[i]
        sq = prefix_sq[j] - prefix_sq[i]
        return sq - s * s / m

    best_k, best_cost = 1, None
    for k in range(1, n):
        cost = sse(0, k) + sse(k, n)
        if best_cost is None or cost < best_cost - 1e-12:
            best_k, best_cost = k, cost
    left, right = xs[:best_k], xs[best_k:]
    if len(left) > len(right):
        chosen = left
    elif len(right) > len(left):
        chosen = right
    else:
        median = xs[(n - 1) // 2]
        chosen = left if median <= left[-1] else right
    return chosen[0], chosen[-1]


def interval_of(values, method: str = "quantile",
                alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """Summarize a nonempty value list into [a, b] with a <= b."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("interval_of requires a nonempty value list")
    if method == "quantile":
        if not 0.0 <= alpha < 0.5:
            raise ValueError("alpha must be in [0, 0.5)")
        a, b = np.quantile(np.array(values, dtype=np.float64),
                           [alpha, 1.0 - alpha], method="linear")
        return float(a), float(b)
    if method == "cluster":
        return _cluster_interval(values)
    raise ValueError(f"unknown interval method {method!r}")


@dataclass(frozen=True)
class FeatureInterval:
    feature: int
    lower: float
    upper: float
    support: int
    frequency: float


@dataclass(frozen=True)
class ClassExplanation:
    """Important features of one class; empty mapping when the class has no
    predicted instances (flagged by population == 0 or no intervals)."""

    class_index: int
    population: int
    intervals: tuple[FeatureInterval, ...]

    def interval_for(self, feature: int) -> FeatureInterval | None:
        for fi in self.intervals:
            if fi.feature == feature:
                return fi
        return None

    @property
    def features(self) -> tuple[int, ...]:
        return tuple(fi.feature for fi in self.intervals)


def build_class_explanations(explanations: list[Explanation],
                             num_output_classes: int,
                             method: str = "quantile",
                             alpha: float = DEFAULT_ALPHA
                             ) -> list[ClassExplanation]:
    """Aggregate instance explanations per predicted class.

    `explanations` must carry the kept-feature values (as produced by
    extract_axp or read back from the JSONL artifact).
    """
    if method not in INTERVAL_METHODS:
        raise ValueError(f"unknown interval method {method!r}")
    by_class: dict[int, list[Explanation]] = {c: [] for c in range(num_output_classes)}
    for e in explanations:
        if not 0 <= e.predicted_class < num_output_classes:
            raise ValueError(f"explanation class {e.predicted_class} out of "
                             f"range [0, {num_output_classes})")
        by_class[e.predicted_class].append(e)
    out = []
    for c in range(num_output_classes):
        members = by_class[c]
        population = len(members)
        values: dict[int, list[float]] = {}
        for e in members:
            for f in e.kept:
                values.setdefault(f, []).append(e.values[f])
        intervals = []
        for f in sorted(values):
            vs = values[f]
            a, b = interval_of(vs, method=method, alpha=alpha)
            intervals.append(FeatureInterval(
                feature=f, lower=a, upper=b, support=len(vs),
                frequency=len(vs) / population))
        out.append(ClassExplanation(class_index=c, population=population,
                                    intervals=tuple(intervals)))
    return out


# ---------------------------------------------------------------------------
# Artifact IO


def class_explanations_to_json_obj(class_expls: list[ClassExplanation],
                                   feature_space: FeatureSpace) -> list[dict]:
    return [
        {
            "class": ce.class_index,
            "population": ce.population,
            "features": [
                {"name": feature_space.names[fi.feature], "a": fi.lower,
                 "b": fi.upper, "support": fi.support,
                 "frequency": fi.frequency}
                for fi in ce.intervals
            ],
        }
        for ce in class_expls
    ]


def write_class_explanations(fp, class_expls, feature_space: FeatureSpace
                             ) -> None:
    json.dump(class_explanations_to_json_obj(class_expls, feature_space), fp,
              indent=2)
    fp.write("\n")


def read_class_explanations(fp, feature_space: FeatureSpace
                            ) -> list[ClassExplanation]:
    data = json.load(fp)
    if not isinstance(data, list):
        raise ValueError("class-explanation artifact must be a JSON array")
    out = []
    for obj in data:
        intervals = tuple(
            FeatureInterval(feature=feature_space.index_of(item["name"]),
                            lower=float(item["a"]), upper=float(item["b"]),
                            support=int(item["support"]),
                            frequency=float(item["frequency"]))
            for item in obj["features"])
        out.append(ClassExplanation(class_index=int(obj["class"]),
                                    population=int(obj["population"]),
                                    intervals=intervals))
    out.sort(key=lambda ce: ce.class_index)
    return out
