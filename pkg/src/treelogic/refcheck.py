"""Independent brute-force reference oracles for cross-validation.

Everything here is deliberately naive: cells are enumerated exhaustively and
trees are walked one node at a time, sharing no code with the encoder or the
branch-and-bound engine.  Random models are kept tiny so exhaustive
enumeration stays cheap, and their leaf values are integer multiples of 1/64
in [-2, 2]: products with a power-of-ten scale and sums of a few dozen terms
are then exact in binary floating point, so real-valued and scaled-integer
comparisons can never disagree on sign or ties.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import CellBudgetExceeded
from .model import (
    OBJECTIVE_BINARY,
    Ensemble,
    FeatureSpace,
    Tree,
)

DEFAULT_CELL_BUDGET = 10 ** 6
_THRESHOLD_GRID = (0.5, 1.5, 2.5, 3.5, 4.5)


@dataclass(frozen=True)
class CellGrid:
    """Per-feature sorted thresholds plus representative value per cell.

    Cell i of a feature with thresholds t_0 < ... < t_{k-1} is the interval
    (t_{i-1}, t_i]; representatives are interval midpoints, with boundary
    cells represented by first threshold - 1 and last threshold + 1.
    """

    thresholds: tuple[tuple[float, ...], ...]
    representatives: tuple[tuple[float, ...], ...]

    @property
    def num_features(self) -> int:
        return len(self.thresholds)

    def cell_counts(self) -> tuple[int, ...]:
        return tuple(len(ts) + 1 for ts in self.thresholds)

    def total_cells(self) -> int:
        total = 1
        for c in self.cell_counts():
            total *= c
        return total

    def representative(self, feature: int, cell: int) -> float:
        return self.representatives[feature][cell]


def cell_grid(ensemble: Ensemble) -> CellGrid:
    """Collect distinct split thresholds per feature, walking nodes directly."""
    split: list[set[float]] = [set() for _ in range(ensemble.num_features)]
    for tree in ensemble.trees:
        for i in range(tree.num_nodes):
            f = int(tree.feature[i])
            if f >= 0:
                split[f].add(float(tree.threshold[i]))
    thresholds = tuple(tuple(sorted(s)) for s in split)
    reps = []
    for ts in thresholds:
        if not ts:
            reps.append((0.0,))
            continue
        row = [ts[0] - 1.0]
        for a, b in itertools.pairwise(ts):
            row.append((a + b) / 2.0)
        row.append(ts[-1] + 1.0)
        reps.append(tuple(row))
    return CellGrid(thresholds=thresholds, representatives=tuple(reps))


def enumerate_cells(grid: CellGrid, budget: int = DEFAULT_CELL_BUDGET):
    """Yield every cell index vector, lexicographically.

    Raises CellBudgetExceeded up front when the product of cell counts
    exceeds the budget.
    """
    total = grid.total_cells()
    if total > budget:
        raise CellBudgetExceeded(
            f"cell grid has {total} cells, exceeding budget {budget}")
    yield from itertools.product(*(range(c) for c in grid.cell_counts()))


def cell_instance(grid: CellGrid, cells) -> np.ndarray:
    return np.array([grid.representative(f, c) for f, c in enumerate(cells)],
                    dtype=np.float64)


def eval_tree(tree: Tree, values) -> float:
    """Walk one tree node by node; split rule is `value <= threshold` -> left."""
    i = tree.root
    while int(tree.feature[i]) >= 0:
        f = int(tree.feature[i])
        i = int(tree.left[i]) if float(values[f]) <= float(tree.threshold[i]) \
            else int(tree.right[i])
    return float(tree.value[i])


def eval_scores(ensemble: Ensemble, values) -> list[float]:
    """Per-class scores by naive accumulation (binary: [0, raw])."""
    if ensemble.objective == OBJECTIVE_BINARY:
        raw = float(ensemble.base_scores[0])
        for tree in ensemble.trees:
            raw += eval_tree(tree, values)
        return [0.0, raw]
    scores = [float(b) for b in ensemble.base_scores]
    for tree in ensemble.trees:
        scores[tree.class_index] += eval_tree(tree, values)
    return scores


def eval_predict(ensemble: Ensemble, values) -> int:
    scores = eval_scores(ensemble, values)
    best = 0
    for c in range(1, len(scores)):
        if scores[c] > scores[best]:
            best = c
    return best


def _cell_matches(grid: CellGrid, cells, fixed_values: dict[int, float]) -> bool:
    for f, v in fixed_values.items():
        ts = grid.thresholds[f]
        cell = cells[f]
        lo = ts[cell - 1] if cell > 0 else None
        hi = ts[cell] if cell < len(ts) else None
        if hi is not None and not v <= hi:
            return False
        if lo is not None and not v > lo:
            return False
    return True


def brute_max_gap(ensemble: Ensemble, fixed_values: dict[int, float],
                  winner: int, rival: int, scale: int | None = None,
                  budget: int = DEFAULT_CELL_BUDGET):
    """Exhaustive max of score_rival - score_winner over consistent cells.

    fixed_values maps feature index -> pinned value; only cells containing
    those values are considered.  With `scale` set, returns the max scaled
    integer gap (each leaf and base integerized exactly like the oracle);
    otherwise the real-valued max.  Returns None when no cell is consistent
    (cannot happen for plain value pinning, but kept for symmetry).
    """
    grid = cell_grid(ensemble)
    best = None
    for cells in enumerate_cells(grid, budget):
        if not _cell_matches(grid, cells, fixed_values):
            continue
        x = cell_instance(grid, cells)
        if scale is None:
            scores = eval_scores(ensemble, x)
            gap = scores[rival] - scores[winner]
        else:
            gap = _scaled_gap(ensemble, x, winner, rival, scale)
        if best is None or gap > best:
            best = gap
    return best


def _scaled_round(value: float, scale: int) -> int:
    x = value * scale
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def _scaled_gap(ensemble: Ensemble, values, winner: int, rival: int,
                scale: int) -> int:
    if ensemble.objective == OBJECTIVE_BINARY:
        raw = _scaled_round(float(ensemble.base_scores[0]), scale)
        for tree in ensemble.trees:
            raw += _scaled_round(eval_tree(tree, values), scale)
        scores = [0, raw]
    else:
        scores = [_scaled_round(float(b), scale) for b in ensemble.base_scores]
        for tree in ensemble.trees:
            scores[tree.class_index] += _scaled_round(eval_tree(tree, values),
                                                      scale)
    return scores[rival] - scores[winner]


def brute_entails(ensemble: Ensemble, fixed_values: dict[int, float],
                  predicted_class: int,
                  budget: int = DEFAULT_CELL_BUDGET) -> bool:
    """True iff every consistent cell predicts `predicted_class`."""
    grid = cell_grid(ensemble)
    for cells in enumerate_cells(grid, budget):
        if not _cell_matches(grid, cells, fixed_values):
            continue
        if eval_predict(ensemble, cell_instance(grid, cells)) != predicted_class:
            return False
    return True


# ---------------------------------------------------------------------------
# Random small models


def _random_tree(rng: random.Random, num_features: int, max_depth: int,
                 class_index: int) -> Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def grow(depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        if depth < max_depth and rng.random() < 0.7:
            feature[node] = rng.randrange(num_features)
            threshold[node] = rng.choice(_THRESHOLD_GRID)
            left[node] = grow(depth + 1)
            right[node] = grow(depth + 1)
        else:
            value[node] = rng.randrange(-128, 129) / 64.0
        return node

    grow(0)
    return Tree(feature=feature, threshold=threshold, left=left, right=right,
                value=value, root=0, class_index=class_index)


def random_small_ensemble(seed: int, max_features: int = 3,
                          max_trees: int = 4, max_depth: int = 3,
                          multiclass: bool | None = None) -> Ensemble:
    """Tiny random ensemble for exhaustive cross-checks, fully seed-determined.

    Leaf values are multiples of 1/64 in [-2, 2] and base scores multiples of
    1/64 in [-1, 1], so all downstream arithmetic is exact (see module doc).
    """
    rng = random.Random(seed)
    num_features = rng.randint(1, max_features)
    if multiclass is None:
        multiclass = rng.random() < 0.5
    names = tuple(f"f{i}" for i in range(num_features))
    space = FeatureSpace(names=names)
    if multiclass:
        num_classes = rng.randint(3, 4)
        rounds = rng.randint(1, max(1, max_trees // num_classes))
        trees = [_random_tree(rng, num_features, max_depth, c)
                 for _ in range(rounds) for c in range(num_classes)]
        base = [rng.randrange(-64, 65) / 64.0 for _ in range(num_classes)]
        return Ensemble(feature_space=space, trees=trees,
                        num_classes=num_classes, base_scores=base,
                        objective="multiclass_raw")
    num_trees = rng.randint(1, max_trees)
    trees = [_random_tree(rng, num_features, max_depth, 0)
             for _ in range(num_trees)]
    base = [rng.randrange(-64, 65) / 64.0]
    return Ensemble(feature_space=space, trees=trees, num_classes=1,
                    base_scores=base, objective=OBJECTIVE_BINARY)


def random_instance(rng: random.Random, ensemble: Ensemble) -> np.ndarray:
    """A random point on the grid the random models split on (values 0..5)."""
    return np.array([rng.randrange(0, 6) + rng.choice((0.0, 0.25))
                     for _ in range(ensemble.num_features)], dtype=np.float64)
