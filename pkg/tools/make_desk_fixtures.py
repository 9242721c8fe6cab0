"""Generate the committed desk-scale fixtures under tests/fixtures/.

Run from the repository root after changing anything here:

    python3 tools/make_desk_fixtures.py

Produces a synthetic 2-class, 6-feature dataset (500 train / 200 test rows),
a 20-tree gradient-boosted model trained on it with scikit-learn, and the
derived artifacts the tests and demos consume.  The model is shipped in both
supported formats: the portable JSON schema and a text dump in the LightGBM
layout (leaf-held base score, since that format carries no separate base).
scikit-learn is only needed to regenerate fixtures, never to run the tests.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from treelogic.model import (  # noqa: E402
    Dataset,
    Ensemble,
    FeatureSpace,
    Tree,
    emit_portable_json,
    predict_raw_batch,
    save_dataset_csv,
)

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
FEATURES = tuple(f"f{i}" for i in range(6))
N_TRAIN, N_TEST = 500, 200
N_TREES = 20


def make_dataset(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = N_TRAIN + N_TEST
    x = np.round(rng.uniform(0.0, 10.0, size=(n, len(FEATURES))), 3)
    signal = (1.1 * x[:, 0] - 0.9 * x[:, 1] + 0.6 * x[:, 2] * (x[:, 3] > 5.0)
              - 0.4 * x[:, 4] + 0.2 * (x[:, 5] - 5.0) ** 2)
    noise = rng.normal(0.0, 1.5, size=n)
    y = (signal + noise > np.median(signal)).astype(np.int64)
    return x, y


def sklearn_to_ensemble(clf, feature_names) -> Ensemble:
    """Convert a fitted binary GradientBoostingClassifier to an Ensemble.

    Raw score = init log-odds + learning_rate * sum of regression-tree leaf
    values, with sklearn's `x <= threshold -> left` split rule matching the
    canonical orientation.
    """
    lr = clf.learning_rate
    trees = []
    for est in clf.estimators_[:, 0]:
        t = est.tree_
        feature = [int(f) if l != r else -1
                   for f, l, r in zip(t.feature, t.children_left,
                                      t.children_right)]
        value = [float(v[0][0]) * lr if f == -1 else 0.0
                 for v, f in zip(t.value, feature)]
        trees.append(Tree(
            feature=feature,
            threshold=[float(v) for v in t.threshold],
            left=[int(v) for v in t.children_left],
            right=[int(v) for v in t.children_right],
            value=value, root=0, class_index=0))
    p = float(np.clip(clf.init_.class_prior_[1], 1e-12, 1 - 1e-12))
    base = float(np.log(p / (1.0 - p)))
    return Ensemble(feature_space=FeatureSpace(tuple(feature_names)),
                    trees=trees, num_classes=1, base_scores=[base],
                    objective="binary_raw")


def to_lightgbm_text(ensemble: Ensemble) -> str:
    """Emit a binary ensemble in the LightGBM text-dump layout.

    The base score is folded into every leaf of the first tree because the
    dump format has no standalone base-score field.
    """
    names = ensemble.feature_space.names
    lines = [
        "tree",
        "version=v4",
        "num_class=1",
        "num_tree_per_iteration=1",
        "label_index=0",
        f"max_feature_idx={len(names) - 1}",
        "objective=binary sigmoid:1",
        "feature_names=" + " ".join(names),
        "",
    ]
    base = float(ensemble.base_scores[0])
    for t_id, tree in enumerate(ensemble.trees):
        internal = [i for i in range(tree.num_nodes)
                    if int(tree.feature[i]) >= 0]
        leaves = [i for i in range(tree.num_nodes) if int(tree.feature[i]) < 0]
        int_id = {n: k for k, n in enumerate(internal)}
        leaf_id = {n: k for k, n in enumerate(leaves)}

        def child_ref(node: int) -> int:
            return int_id[node] if int(tree.feature[node]) >= 0 \
                else -leaf_id[node] - 1

        shift = base if t_id == 0 else 0.0
        leaf_values = [repr(float(tree.value[n]) + shift) for n in leaves]
        lines.append(f"Tree={t_id}")
        lines.append(f"num_leaves={len(leaves)}")
        lines.append("num_cat=0")
        if internal:
            lines.append("split_feature=" + " ".join(
                str(int(tree.feature[n])) for n in internal))
            lines.append("threshold=" + " ".join(
                repr(float(tree.threshold[n])) for n in internal))
            lines.append("decision_type=" + " ".join("2" for _ in internal))
            lines.append("left_child=" + " ".join(
                str(child_ref(int(tree.left[n]))) for n in internal))
            lines.append("right_child=" + " ".join(
                str(child_ref(int(tree.right[n]))) for n in internal))
        lines.append("leaf_value=" + " ".join(leaf_values))
        lines.append("shrinkage=1")
        lines.append("")
    lines.append("end of trees")
    lines.append("")
    return "\n".join(lines)


def pseudo_attribution_rankings(x: np.ndarray, center: np.ndarray,
                                names) -> list[dict]:
    """Deterministic stand-in for an external attribution method: rank
    features by distance of the row value from the training mean."""
    out = []
    for i, row in enumerate(x):
        dist = np.abs(row - center)
        order = sorted(range(len(names)), key=lambda f: (-dist[f], f))
        out.append({"instance": i, "order": [names[f] for f in order]})
    return out


def main() -> None:
    from sklearn.ensemble import GradientBoostingClassifier

    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    x, y = make_dataset(rng)
    x_train, y_train = x[:N_TRAIN], y[:N_TRAIN]
    x_test, y_test = x[N_TRAIN:], y[N_TRAIN:]

    clf = GradientBoostingClassifier(n_estimators=N_TREES, max_depth=3,
                                     learning_rate=0.1, random_state=0)
    clf.fit(x_train, y_train)
    ensemble = sklearn_to_ensemble(clf, FEATURES)

    # The conversion must reproduce sklearn's raw scores bit-for-bit-ish.
    ours = predict_raw_batch(ensemble, x)[:, 0]
    theirs = clf.decision_function(x)
    err = float(np.max(np.abs(ours - theirs)))
    if err > 1e-9:
        raise SystemExit(f"conversion drift {err}")
    margin = float(np.min(np.abs(ours)))
    if margin < 1e-6:
        raise SystemExit(f"raw score too close to the decision boundary "
                         f"({margin}); pick another seed")
    acc = float(np.mean((ours > 0).astype(int) == y))
    print(f"model: {N_TREES} trees, conversion err {err:.2e}, "
          f"min |raw| {margin:.3e}, accuracy {acc:.3f}")

    (FIXTURES / "desk_model.json").write_text(
        emit_portable_json(ensemble) + "\n", encoding="utf-8")
    (FIXTURES / "desk_model.txt").write_text(
        to_lightgbm_text(ensemble), encoding="utf-8")
    save_dataset_csv(Dataset(x=x_train, labels=y_train), ensemble.feature_space,
                     FIXTURES / "desk_train.csv")
    save_dataset_csv(Dataset(x=x_test, labels=y_test), ensemble.feature_space,
                     FIXTURES / "desk_test.csv")
    save_dataset_csv(Dataset(x=x_test[:100], labels=y_test[:100]),
                     ensemble.feature_space, FIXTURES / "desk_small.csv")

    center = x_train.mean(axis=0)
    rankings = pseudo_attribution_rankings(x_test[:100], center, FEATURES)
    (FIXTURES / "desk_rankings_small.json").write_text(
        json.dumps(rankings, indent=2) + "\n", encoding="utf-8")

    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
