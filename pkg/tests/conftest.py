"""Shared fixtures: small hand-built models plus paths to on-disk assets.

TOY2F is the two-tree binary model used throughout:

  tree0: f0 <= 0.5 -> leaf -1.0 | else (f1 <= 2.0 -> leaf +0.5 | leaf +2.0)
  tree1: f0 <= 1.5 -> leaf +0.25 | leaf -0.75
  base score 0, raw > 0 -> class 1

Atom ids after encoding: 1 = (f0 <= 0.5), 2 = (f0 <= 1.5), 3 = (f1 <= 2.0);
path literals 4..6 (tree0: -1.0, +0.5, +2.0) and 7..8 (tree1: +0.25, -0.75).
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

from treelogic import Ensemble, FeatureSpace, Tree, encode_ensemble

FIXTURES = Path(__file__).parent / "fixtures"

PYTHON = sys.executable


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def make_toy2f() -> Ensemble:
    tree0 = Tree(feature=[0, 1, -1, -1, -1],
                 threshold=[0.5, 2.0, 0.0, 0.0, 0.0],
                 left=[2, 3, -1, -1, -1],
                 right=[1, 4, -1, -1, -1],
                 value=[0.0, 0.0, -1.0, 0.5, 2.0])
    tree1 = Tree(feature=[0, -1, -1],
                 threshold=[1.5, 0.0, 0.0],
                 left=[1, -1, -1],
                 right=[2, -1, -1],
                 value=[0.0, 0.25, -0.75])
    return Ensemble(feature_space=FeatureSpace(("f0", "f1")),
                    trees=[tree0, tree1], num_classes=1, base_scores=[0.0],
                    objective="binary_raw")


def make_conjunction(extra_feature: bool = False) -> Ensemble:
    """Leaf +1 iff f0 > 0.5 and f1 > 0.5, else -1 (binary)."""
    tree = Tree(feature=[0, -1, 1, -1, -1],
                threshold=[0.5, 0.0, 0.5, 0.0, 0.0],
                left=[1, -1, 3, -1, -1],
                right=[2, -1, 4, -1, -1],
                value=[0.0, -1.0, 0.0, -1.0, 1.0])
    names = ("f0", "f1", "f2") if extra_feature else ("f0", "f1")
    return Ensemble(feature_space=FeatureSpace(names), trees=[tree],
                    num_classes=1, base_scores=[0.0], objective="binary_raw")


def make_disjunction() -> Ensemble:
    """Leaf +1 iff f0 > 0.5 or f1 > 0.5, else -1 (binary)."""
    tree = Tree(feature=[0, 1, -1, -1, -1],
                threshold=[0.5, 0.5, 0.0, 0.0, 0.0],
                left=[1, 3, -1, -1, -1],
                right=[2, 4, -1, -1, -1],
                value=[0.0, 0.0, 1.0, -1.0, 1.0])
    return Ensemble(feature_space=FeatureSpace(("f0", "f1")), trees=[tree],
                    num_classes=1, base_scores=[0.0], objective="binary_raw")


def make_constant(value: float = 0.5) -> Ensemble:
    tree = Tree(feature=[-1], threshold=[0.0], left=[-1], right=[-1],
                value=[value])
    return Ensemble(feature_space=FeatureSpace(("f0", "f1")), trees=[tree],
                    num_classes=1, base_scores=[0.0], objective="binary_raw")


def make_tied_stumps() -> Ensemble:
    """3-class stump model with scores (0.5, 0.5, 0.0) everywhere.

    Classes 0 and 1 tie exactly; predict breaks the tie to class 0.
    """
    trees = [Tree(feature=[-1], threshold=[0.0], left=[-1], right=[-1],
                  value=[v], class_index=c)
             for c, v in ((0, 0.5), (1, 0.5), (2, 0.0))]
    return Ensemble(feature_space=FeatureSpace(("f0",)), trees=trees,
                    num_classes=3, base_scores=[0.0, 0.0, 0.0],
                    objective="multiclass_raw")


@pytest.fixture(scope="session")
def toy2f():
    return make_toy2f()


@pytest.fixture(scope="session")
def toy2f_encoded(toy2f):
    return encode_ensemble(toy2f)


@pytest.fixture(scope="session")
def conjunction():
    return make_conjunction()


@pytest.fixture(scope="session")
def conjunction_encoded(conjunction):
    return encode_ensemble(conjunction)


@pytest.fixture(scope="session")
def disjunction():
    return make_disjunction()


@pytest.fixture(scope="session")
def disjunction_encoded(disjunction):
    return encode_ensemble(disjunction)


@pytest.fixture(scope="session")
def tied_stumps():
    return make_tied_stumps()


@pytest.fixture(scope="session")
def tied_stumps_encoded(tied_stumps):
    return encode_ensemble(tied_stumps)


@pytest.fixture(scope="session")
def desk_model():
    from treelogic import load_model
    return load_model(str(fixture_path("desk_model.json")), "json")


@pytest.fixture(scope="session")
def desk_encoded(desk_model):
    return encode_ensemble(desk_model)
