"""Subset-minimal sufficient feature sets, extracted by deletion.

An explanation fixes a subset of features at their instance values such that
every completion of the free features still yields the same predicted class.
Extraction walks the features once in a processing order, freeing each
feature whose removal keeps the entailment valid; because entailment is
anti-monotone in the freed set, one linear pass yields a subset-minimal
result.
"""

from __future__ import annotations

import json
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .encoder import EncodedModel, instance_to_assumptions
from .model import Dataset, FeatureSpace, check_instance, predict
from .oracle import DEFAULT_SCALE, entails

ORDER_MODES = ("index", "margin")


@dataclass(frozen=True)
class Explanation:
    """One instance-level explanation: kept features entail the class."""

    predicted_class: int
    kept: tuple[int, ...]
    free: tuple[int, ...]
    values: tuple[float, ...]
    instance_index: int | None = None

    def to_json_obj(self, feature_space: FeatureSpace) -> dict:
        return {
            "instance": self.instance_index,
            "class": self.predicted_class,
            "kept": [{"feature": feature_space.names[f],
                      "value": self.values[f]} for f in self.kept],
            "free": [feature_space.names[f] for f in self.free],
        }


def default_order(encoded: EncodedModel, instance, mode: str = "index"
                  ) -> list[int]:
    """Feature processing order for the deletion loop.

    "index": ascending feature index.  "margin": features whose value sits
    farthest from every split threshold first (ties by index); unsplit
    features count as infinitely far and so are tried first.
    """
    n = encoded.ensemble.num_features
    if mode == "index":
        return list(range(n))
    if mode != "margin":
        raise ValueError(f"unknown order mode {mode!r}")
    x = check_instance(encoded.ensemble, instance)
    dist = []
    for f in range(n):
        ts = encoded.threshold_map.thresholds[f]
        d = min((abs(x[f] - t) for t in ts), default=float("inf"))
        dist.append(d)
    return sorted(range(n), key=lambda f: (-dist[f], f))


def extract_axp(encoded: EncodedModel, instance, order=None,
                scale: int = DEFAULT_SCALE,
                instance_index: int | None = None) -> Explanation:
    """Deletion-based extraction: one entailment query per feature."""
    ensemble = encoded.ensemble
    x = check_instance(ensemble, instance)
    predicted = predict(ensemble, x)
    n = ensemble.num_features
    if order is None:
        order = default_order(encoded, x, "index")
    else:
        order = [int(f) for f in order]
        if sorted(order) != list(range(n)):
            raise ValueError("order must be a permutation of all feature indices")
    kept = set(order)
    for f in order:
        trial = kept - {f}
        assumptions = instance_to_assumptions(encoded, x, sorted(trial))
        if entails(encoded, assumptions, predicted, scale=scale).valid:
            kept = trial
    kept_t = tuple(sorted(kept))
    free_t = tuple(f for f in range(n) if f not in kept)
    return Explanation(predicted_class=predicted, kept=kept_t, free=free_t,
                       values=tuple(float(v) for v in x),
                       instance_index=instance_index)


# ---------------------------------------------------------------------------
# Dataset-level extraction (optionally parallel)

_WORKER: dict[str, object] = {}


def _init_worker(payload: bytes) -> None:
    _WORKER["encoded"] = pickle.loads(payload)


def _worker_explain(args) -> Explanation:
    idx, row, order_mode, scale = args
    encoded = _WORKER["encoded"]
    order = default_order(encoded, row, order_mode)
    return extract_axp(encoded, row, order=order, scale=scale,
                       instance_index=idx)


def explain_dataset(encoded: EncodedModel, data: Dataset | np.ndarray,
                    order_mode: str = "index", scale: int = DEFAULT_SCALE,
                    jobs: int = 1) -> list[Explanation]:
    """Explanations for every row, ordered by row index.

    With jobs > 1 rows are distributed over a process pool; results are
    identical to the serial run because each row is independent and output
    order is restored from row indices.
    """
    x = data.x if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if order_mode not in ORDER_MODES:
        raise ValueError(f"unknown order mode {order_mode!r}")
    tasks = [(i, x[i], order_mode, scale) for i in range(len(x))]
    if jobs <= 1 or len(tasks) <= 1:
        _WORKER["encoded"] = encoded
        try:
            return [_worker_explain(t) for t in tasks]
        finally:
            _WORKER.pop("encoded", None)
    payload = pickle.dumps(encoded)
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(payload,)) as pool:
        chunk = max(1, len(tasks) // (jobs * 4))
        results = list(pool.map(_worker_explain, tasks, chunksize=chunk))
    results.sort(key=lambda e: e.instance_index)
    return results


# ---------------------------------------------------------------------------
# Artifact IO (one JSON object per line)


def write_explanations_jsonl(fp, explanations, feature_space: FeatureSpace
                             ) -> None:
    for e in explanations:
        fp.write(json.dumps(e.to_json_obj(feature_space)) + "\n")


def read_explanations_jsonl(fp, feature_space: FeatureSpace
                            ) -> list[Explanation]:
    """Parse explanations back; free-feature values are not stored and read
    back as nan."""
    out = []
    n = len(feature_space.names)
    for line_no, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {line_no}: invalid JSON: {exc}") from None
        values = [float("nan")] * n
        kept = []
        for item in obj["kept"]:
            f = feature_space.index_of(item["feature"])
            kept.append(f)
            values[f] = float(item["value"])
        free = tuple(feature_space.index_of(name) for name in obj["free"])
        out.append(Explanation(
            predicted_class=int(obj["class"]), kept=tuple(sorted(kept)),
            free=tuple(sorted(free)), values=tuple(values),
            instance_index=obj.get("instance")))
    return out
