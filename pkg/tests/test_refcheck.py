"""Brute-force reference oracles and the random small-model generator."""

import itertools
import random

import numpy as np
import pytest

from treelogic import (
    CellBudgetExceeded,
    instance_to_assumptions,
    max_score_gap,
    predict,
    predict_raw,
)
from treelogic.refcheck import (
    brute_entails,
    brute_max_gap,
    cell_grid,
    cell_instance,
    enumerate_cells,
    eval_predict,
    eval_scores,
    eval_tree,
    random_instance,
    random_small_ensemble,
)

from conftest import make_constant, make_toy2f


class TestCellGrid:
    def test_toy2f_partition(self, toy2f):
        grid = cell_grid(toy2f)
        assert grid.thresholds == ((0.5, 1.5), (2.0,))
        assert grid.cell_counts() == (3, 2)
        assert grid.total_cells() == 6
        assert grid.representatives[0] == (-0.5, 1.0, 2.5)
        assert grid.representatives[1] == (1.0, 3.0)

    def test_single_threshold_boundary_representatives(self):
        from treelogic import Ensemble, FeatureSpace, Tree
        tree = Tree(feature=[0, -1, -1], threshold=[0.5, 0.0, 0.0],
                    left=[1, -1, -1], right=[2, -1, -1],
                    value=[0.0, 1.0, -1.0])
        ens = Ensemble(feature_space=FeatureSpace(("f0",)), trees=[tree],
                       num_classes=1, base_scores=[0.0],
                       objective="binary_raw")
        grid = cell_grid(ens)
        assert grid.representatives == ((-0.5, 1.5),)

    def test_unsplit_feature_single_universal_cell(self):
        grid = cell_grid(make_constant())
        assert grid.cell_counts() == (1, 1)
        assert grid.representatives == ((0.0,), (0.0,))

    def test_representatives_strictly_inside_cells(self):
        for seed in range(20):
            ens = random_small_ensemble(seed)
            grid = cell_grid(ens)
            for f, ts in enumerate(grid.thresholds):
                reps = grid.representatives[f]
                for c, rep in enumerate(reps):
                    if c > 0:
                        assert rep > ts[c - 1]
                    if c < len(ts):
                        assert rep <= ts[c]

    def test_enumeration_order_and_count(self, toy2f):
        grid = cell_grid(toy2f)
        cells = list(enumerate_cells(grid))
        assert len(cells) == 6
        assert cells == sorted(cells)
        assert cells[0] == (0, 0)
        assert cells[-1] == (2, 1)

    def test_budget_enforced(self, toy2f):
        grid = cell_grid(toy2f)
        with pytest.raises(CellBudgetExceeded, match="budget"):
            list(enumerate_cells(grid, budget=5))

    def test_cell_instance(self, toy2f):
        grid = cell_grid(toy2f)
        assert list(cell_instance(grid, (1, 1))) == [1.0, 3.0]


class TestNaiveEvaluation:
    def test_matches_primary_evaluator(self):
        rng = random.Random(1)
        for seed in range(40):
            ens = random_small_ensemble(seed)
            for _ in range(5):
                x = random_instance(rng, ens)
                scores = eval_scores(ens, x)
                raw = predict_raw(ens, x)
                if ens.objective == "binary_raw":
                    assert scores == [0.0, float(raw[0])]
                else:
                    assert scores == [float(v) for v in raw]
                assert eval_predict(ens, x) == predict(ens, x)

    def test_eval_tree_boundary_inclusive(self, toy2f):
        assert eval_tree(toy2f.trees[0], [0.5, 0.0]) == -1.0
        assert eval_tree(toy2f.trees[0], [0.6, 0.0]) == 0.5
        assert eval_tree(toy2f.trees[1], [1.5, 0.0]) == 0.25


class TestBruteMaxGap:
    def test_toy2f_all_fixed_subsets_match_oracle(self, toy2f, toy2f_encoded):
        x = [1.0, 3.0]
        for subset in ([], [0], [1], [0, 1]):
            fixed_values = {f: x[f] for f in subset}
            for winner, rival in ((1, 0), (0, 1)):
                brute = brute_max_gap(toy2f, fixed_values, winner, rival)
                fixed = instance_to_assumptions(toy2f_encoded, x, subset)
                res = max_score_gap(toy2f_encoded, fixed, winner, rival)
                assert res.gap == brute
                brute_int = brute_max_gap(toy2f, fixed_values, winner, rival,
                                          scale=10 ** 6)
                assert res.gap_int == brute_int

    def test_fully_fixed_equals_point_evaluation(self, toy2f):
        x = [1.0, 3.0]
        gap = brute_max_gap(toy2f, {0: 1.0, 1: 3.0}, winner=1, rival=0)
        scores = eval_scores(toy2f, x)
        assert gap == scores[0] - scores[1] == -2.25

    def test_constant_model(self):
        ens = make_constant(0.5)
        assert brute_max_gap(ens, {}, winner=1, rival=0) == -0.5
        assert brute_max_gap(ens, {0: 3.0}, winner=0, rival=1) == 0.5

    def test_free_gap_value(self, toy2f):
        assert brute_max_gap(toy2f, {}, winner=1, rival=0) == 0.75


class TestBruteEntails:
    def test_toy2f(self, toy2f):
        assert brute_entails(toy2f, {0: 1.0}, 1) is True
        assert brute_entails(toy2f, {}, 1) is False
        assert brute_entails(toy2f, {0: 1.0, 1: 3.0}, 1) is True
        # f0 = 2.0: tree0 gives +0.5 or +2.0 depending on f1, tree1 gives
        # -0.75, so the raw score is -0.25 or +1.25 and neither class holds
        # over the whole region.
        assert brute_entails(toy2f, {0: 2.0}, 0) is False
        assert brute_entails(toy2f, {0: 2.0}, 1) is False

    def test_conjunction(self, conjunction):
        assert brute_entails(conjunction, {0: 0.2}, 0) is True
        assert brute_entails(conjunction, {0: 1.0}, 1) is False
        assert brute_entails(conjunction, {0: 1.0, 1: 1.0}, 1) is True


class TestRandomModels:
    def test_seed_determinism(self):
        for seed in (0, 7, 123):
            assert random_small_ensemble(seed) == random_small_ensemble(seed)

    def test_limits_respected(self):
        for seed in range(200):
            ens = random_small_ensemble(seed)
            assert 1 <= ens.num_features <= 3
            assert 1 <= len(ens.trees) <= 4
            for tree in ens.trees:
                # depth <= 3 => at most 2^3 leaves
                assert len(tree.leaf_ids) <= 8
            # validation already ran inside Ensemble construction

    def test_leaf_values_on_64th_grid(self):
        for seed in range(50):
            ens = random_small_ensemble(seed)
            for tree in ens.trees:
                for leaf in tree.leaf_ids:
                    v = float(tree.value[leaf]) * 64
                    assert v == int(v)
                    assert -128 <= v <= 128
            for b in ens.base_scores:
                assert float(b) * 64 == int(float(b) * 64)

    def test_multiclass_flag(self):
        ens = random_small_ensemble(3, multiclass=True)
        assert ens.objective == "multiclass_raw"
        assert ens.num_classes in (3, 4)
        ens2 = random_small_ensemble(3, multiclass=False)
        assert ens2.objective == "binary_raw"

    def test_both_kinds_appear(self):
        kinds = {random_small_ensemble(seed).objective for seed in range(40)}
        assert kinds == {"binary_raw", "multiclass_raw"}

    def test_random_instances_on_grid(self):
        rng = random.Random(9)
        ens = random_small_ensemble(5)
        for _ in range(50):
            x = random_instance(rng, ens)
            assert x.shape == (ens.num_features,)
            for v in x:
                assert v * 4 == int(v * 4)  # multiples of 0.25
                assert 0.0 <= v <= 5.25
