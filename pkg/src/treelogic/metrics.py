"""Rank-agreement metrics between formal explanations and external rankings.

Explanation-induced rankings are tie-heavy (kept features rank 1, the rest
rank 2), so every metric here is tie-aware: Spearman uses fractional average
ranks, Kendall is the tie-corrected tau-b, and rank-biased overlap works on
tie-broken ordered lists.  Arithmetic is exact (integers / fractions) until
the final float conversion, so identical inputs score exactly 1.0 and strict
reversals exactly -1.0; zero-variance sides yield None ("degenerate") rather
than a number.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .model import FeatureSpace

DEFAULT_RBO_P = 0.9


def _dense_ranks(ranks) -> tuple[int, ...]:
    ranks = [int(r) for r in ranks]
    if not ranks:
        raise ValueError("empty ranking")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive integers")
    remap = {r: i + 1 for i, r in enumerate(sorted(set(ranks)))}
    return tuple(remap[r] for r in ranks)


@dataclass(frozen=True)
class Ranking:
    """Per-feature ranks (contiguous from 1, ties allowed) plus the ordered
    feature-index list with ties broken by ascending index."""

    ranks: tuple[int, ...]
    order: tuple[int, ...]

    @classmethod
    def from_ranks(cls, ranks) -> "Ranking":
        dense = _dense_ranks(ranks)
        order = tuple(sorted(range(len(dense)), key=lambda f: (dense[f], f)))
        return cls(ranks=dense, order=order)

    @classmethod
    def from_order(cls, order, num_features: int) -> "Ranking":
        order = [int(f) for f in order]
        if sorted(order) != list(range(num_features)):
            raise ValueError("order must be a permutation of all feature indices")
        ranks = [0] * num_features
        for pos, f in enumerate(order):
            ranks[f] = pos + 1
        return cls(ranks=tuple(ranks), order=tuple(order))


def formal_ranking(explanation, feature_space: FeatureSpace) -> Ranking:
    """Two-level ranking: kept features rank 1, all others rank 2.

    Empty or all-kept explanations collapse to a single tie group (all 1).
    """
    n = len(feature_space.names)
    kept = set(explanation.kept)
    if not kept or len(kept) == n:
        return Ranking.from_ranks((1,) * n)
    return Ranking.from_ranks(tuple(1 if f in kept else 2 for f in range(n)))


def _coerce_ranks(r) -> tuple[int, ...]:
    if isinstance(r, Ranking):
        return r.ranks
    return _dense_ranks(r)


def _fractional_doubled(ranks: tuple[int, ...]) -> list[int]:
    """Twice the fractional (average) rank per item — integral by construction."""
    n = len(ranks)
    order = sorted(range(n), key=lambda i: ranks[i])
    doubled = [0] * n
    i = 0
    while i < n:
        j = i
        while j < n and ranks[order[j]] == ranks[order[i]]:
            j += 1
        # positions i+1 .. j (1-based); doubled average = i + j + 1
        for k in range(i, j):
            doubled[order[k]] = i + j + 1
        i = j
    return doubled


def _ratio(numerator: int, denom_product: int) -> float:
    """numerator / sqrt(denom_product) with exact +-1 at the extremes."""
    root = math.isqrt(denom_product)
    if root * root == denom_product:
        return numerator / root
    return numerator / math.sqrt(denom_product)


def spearman(r1, r2) -> float | None:
    """Tie-aware Spearman correlation; None when a side has no rank variance."""
    x = _fractional_doubled(_coerce_ranks(r1))
    y = _fractional_doubled(_coerce_ranks(r2))
    if len(x) != len(y):
        raise ValueError("rankings must have equal length")
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(a * a for a in x)
    syy = sum(b * b for b in y)
    sxy = sum(a * b for a, b in zip(x, y))
    num = n * sxy - sx * sy
    dx = n * sxx - sx * sx
    dy = n * syy - sy * sy
    if dx == 0 or dy == 0:
        return None
    return _ratio(num, dx * dy)


def _count_inversions(seq: list) -> int:
    """Strict inversions (i < j with seq[i] > seq[j]) by merge counting."""
    seq = list(seq)
    tmp = [None] * len(seq)
    count = 0
    width = 1
    n = len(seq)
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            if mid >= hi:
                continue
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if seq[i] <= seq[j]:
                    tmp[k] = seq[i]
                    i += 1
                else:
                    tmp[k] = seq[j]
                    j += 1
                    count += mid - i
                k += 1
            while i < mid:
                tmp[k] = seq[i]
                i += 1
                k += 1
            while j < hi:
                tmp[k] = seq[j]
                j += 1
                k += 1
            seq[lo:hi] = tmp[lo:hi]
        width *= 2
    return count


def kendall_tau(r1, r2) -> float | None:
    """Tau-b via sort-and-count rather than pairwise scanning; None when a
    side is fully tied."""
    x = _coerce_ranks(r1)
    y = _coerce_ranks(r2)
    if len(x) != len(y):
        raise ValueError("rankings must have equal length")
    n = len(x)
    pairs = sorted(zip(x, y))
    n0 = n * (n - 1) // 2

    def tie_pairs(values) -> int:
        counts: dict[int, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return sum(c * (c - 1) // 2 for c in counts.values())

    n1 = tie_pairs(x)
    n2 = tie_pairs(y)
    joint: dict[tuple[int, int], int] = {}
    for xy in pairs:
        joint[xy] = joint.get(xy, 0) + 1
    n3 = sum(c * (c - 1) // 2 for c in joint.values())
    discordant = _count_inversions([b for _, b in pairs])
    num = (n0 - n1 - n2 + n3) - 2 * discordant
    dx = n0 - n1
    dy = n0 - n2
    if dx == 0 or dy == 0:
        return None
    return _ratio(num, dx * dy)


def rbo(l1, l2, p: float = DEFAULT_RBO_P) -> float:
    """Extrapolated rank-biased overlap of two equal-length ordered lists.

    Computed in exact fractions, so identical lists score exactly 1.0.
    """
    if isinstance(l1, Ranking):
        l1 = l1.order
    if isinstance(l2, Ranking):
        l2 = l2.order
    l1, l2 = list(l1), list(l2)
    if len(l1) != len(l2):
        raise ValueError("lists must have equal length")
    if not l1:
        raise ValueError("empty ranking")
    if len(set(l1)) != len(l1) or len(set(l2)) != len(l2):
        raise ValueError("ranked lists must not contain duplicates")
    persistence = Fraction(str(p)) if isinstance(p, float) else Fraction(p)
    if not 0 < persistence < 1:
        raise ValueError("p must be in (0, 1)")
    n = len(l1)
    seen1: set = set()
    seen2: set = set()
    overlap = 0
    total = Fraction(0)
    power = Fraction(1)  # p^(d-1)
    for d in range(1, n + 1):
        a, b = l1[d - 1], l2[d - 1]
        if a == b:
            overlap += 1
        else:
            if a in seen2:
                overlap += 1
            if b in seen1:
                overlap += 1
        seen1.add(a)
        seen2.add(b)
        total += power * Fraction(overlap, d)
        power *= persistence
    value = (1 - persistence) * total + power * Fraction(overlap, n)
    return float(value)


def consistency(run1: list[Ranking], run2: list[Ranking]) -> float:
    """Fraction of aligned instances whose two rankings are identical."""
    if len(run1) != len(run2):
        raise ValueError("runs must rank the same instances")
    if not run1:
        raise ValueError("empty runs")
    same = sum(1 for a, b in zip(run1, run2)
               if a.ranks == b.ranks and a.order == b.order)
    return same / len(run1)


# ---------------------------------------------------------------------------
# Reporting


def compare_rankings(formal: list[Ranking], external: list[Ranking],
                     p: float = DEFAULT_RBO_P) -> list[dict]:
    """Per-instance Spearman / Kendall / RBO between two aligned runs."""
    if len(formal) != len(external):
        raise ValueError("runs must rank the same instances")
    rows = []
    for i, (a, b) in enumerate(zip(formal, external)):
        rows.append({
            "instance": i,
            "spearman": spearman(a, b),
            "kendall_tau": kendall_tau(a, b),
            "rbo": rbo(a, b, p=p),
        })
    return rows


def aggregate(values: list[float | None]) -> dict:
    present = [v for v in values if v is not None]
    return {
        "min": min(present) if present else None,
        "avg": (sum(present) / len(present)) if present else None,
        "max": max(present) if present else None,
        "count": len(present),
        "degenerate": len(values) - len(present),
    }


def write_metrics_csv(fp, rows: list[dict]) -> None:
    """Per-instance values plus min/avg/max aggregate rows; degenerate values
    print as the word 'degenerate' and are excluded from aggregates."""
    metrics = ("spearman", "kendall_tau", "rbo")
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["instance", *metrics])

    def fmt(v):
        return "degenerate" if v is None else repr(v)

    for row in rows:
        writer.writerow([row["instance"], *(fmt(row[m]) for m in metrics)])
    aggs = {m: aggregate([row[m] for row in rows]) for m in metrics}
    for stat in ("min", "avg", "max"):
        writer.writerow([stat, *(fmt(aggs[m][stat]) for m in metrics)])


# ---------------------------------------------------------------------------
# External ranking files


def read_rankings_json(fp, feature_space: FeatureSpace
                       ) -> dict[int, Ranking]:
    data = json.load(fp)
    if not isinstance(data, list):
        raise ValueError("rankings JSON must be an array of objects")
    out: dict[int, Ranking] = {}
    for obj in data:
        idx = int(obj["instance"])
        if idx in out:
            raise ValueError(f"duplicate instance id {idx} in rankings file")
        order = [feature_space.index_of(name) for name in obj["order"]]
        out[idx] = Ranking.from_order(order, len(feature_space.names))
    return out


def read_rankings_csv(fp, feature_space: FeatureSpace
                      ) -> dict[int, Ranking]:
    """Wide CSV: header `instance,<feature names...>`, one integer rank per
    feature (ties allowed)."""
    reader = csv.reader(fp)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty rankings CSV") from None
    if not header or header[0] != "instance":
        raise ValueError("rankings CSV must start with an 'instance' column")
    names = header[1:]
    if tuple(names) != feature_space.names:
        missing = set(feature_space.names) - set(names)
        raise ValueError(
            "rankings CSV columns do not match the feature space"
            + (f" (missing {sorted(missing)})" if missing else ""))
    out: dict[int, Ranking] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {line_no}: expected {len(header)} columns")
        idx = int(row[0])
        if idx in out:
            raise ValueError(f"duplicate instance id {idx} in rankings file")
        out[idx] = Ranking.from_ranks([int(v) for v in row[1:]])
    return out


def read_rankings(path: str, feature_space: FeatureSpace
                  ) -> dict[int, Ranking]:
    """Sniff JSON (leading '[') versus wide CSV."""
    with open(path, "r", encoding="utf-8") as fp:
        head = fp.read(1024).lstrip()
        fp.seek(0)
        if head.startswith("["):
            return read_rankings_json(fp, feature_space)
        return read_rankings_csv(fp, feature_space)


def write_rankings_json(fp, rankings: list[Ranking],
                        feature_space: FeatureSpace) -> None:
    payload = [{"instance": i,
                "order": [feature_space.names[f] for f in r.order]}
               for i, r in enumerate(rankings)]
    json.dump(payload, fp, indent=2)
    fp.write("\n")
