"""Canonical in-memory form of gradient-boosted tree ensembles and exact evaluation.

Two front-ends produce the same canonical `Ensemble`: the LightGBM text dump
format and a portable JSON interchange schema.  The canonical split predicate
is ``value <= threshold -> left branch``; parsers normalize to it.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError

OBJECTIVE_BINARY = "binary_raw"
OBJECTIVE_MULTICLASS = "multiclass_raw"

# LightGBM decision_type bit layout: bit 0 categorical, bit 1 default-left,
# bits 2-3 missing-value kind.  Only the categorical bit changes semantics on
# complete numeric data.
_LGB_CATEGORICAL_BIT = 1
_LGB_KNOWN_BITS = 0b1111


@dataclass(frozen=True)
class FeatureSpace:
    """Ordered feature names; index i refers to names[i]."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ModelFormatError("feature names are not unique")

    def __len__(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ModelFormatError(f"unknown feature name: {name!r}") from None


class Tree:
    """One decision tree as flat node arrays.

    ``feature[i] >= 0`` marks a split node with ``threshold[i]`` and children
    ``left[i]`` / ``right[i]``; ``feature[i] == -1`` marks a leaf carrying
    ``value[i]`` (raw score contribution).
    """

    __slots__ = ("feature", "threshold", "left", "right", "value", "root",
                 "class_index")

    def __init__(self, feature, threshold, left, right, value, root=0,
                 class_index=0):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)
        self.root = int(root)
        self.class_index = int(class_index)

    @property
    def num_nodes(self) -> int:
        return len(self.feature)

    @property
    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def validate(self, num_features: int, context: str = "tree") -> None:
        n = self.num_nodes
        if n == 0:
            raise ModelFormatError(f"{context}: empty node list")
        if not 0 <= self.root < n:
            raise ModelFormatError(f"{context}: root id {self.root} out of range")
        indegree = np.zeros(n, dtype=np.int64)
        for i in range(n):
            if self.feature[i] >= 0:
                if self.feature[i] >= num_features:
                    raise ModelFormatError(
                        f"{context}: node {i} splits on feature "
                        f"{self.feature[i]} >= {num_features}")
                if not np.isfinite(self.threshold[i]):
                    raise ModelFormatError(
                        f"{context}: node {i} threshold not finite")
                for child in (self.left[i], self.right[i]):
                    if not 0 <= child < n:
                        raise ModelFormatError(
                            f"{context}: node {i} child {child} out of range")
                    indegree[child] += 1
            else:
                if not np.isfinite(self.value[i]):
                    raise ModelFormatError(
                        f"{context}: leaf {i} value not finite")
        if indegree[self.root] != 0:
            raise ModelFormatError(f"{context}: node graph is not a tree "
                                   f"(root {self.root} has a parent)")
        bad = [i for i in range(n) if i != self.root and indegree[i] != 1]
        if bad:
            raise ModelFormatError(f"{context}: node graph is not a tree "
                                   f"(node {bad[0]} has {indegree[bad[0]]} parents)")
        # Parent-count plus reachability rules out cycles.
        seen = np.zeros(n, dtype=bool)
        stack = [self.root]
        while stack:
            i = stack.pop()
            if seen[i]:
                raise ModelFormatError(f"{context}: node graph is not a tree "
                                       f"(cycle through node {i})")
            seen[i] = True
            if self.feature[i] >= 0:
                stack.append(int(self.right[i]))
                stack.append(int(self.left[i]))
        if not seen.all():
            unreached = int(np.flatnonzero(~seen)[0])
            raise ModelFormatError(f"{context}: node graph is not a tree "
                                   f"(node {unreached} unreachable from root)")

    def descend(self, values) -> int:
        """Return the leaf node id reached by a full feature vector."""
        i = self.root
        while self.feature[i] >= 0:
            if values[self.feature[i]] <= self.threshold[i]:
                i = int(self.left[i])
            else:
                i = int(self.right[i])
        return i

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (self.root == other.root
                and self.class_index == other.class_index
                and np.array_equal(self.feature, other.feature)
                and np.array_equal(self.threshold, other.threshold)
                and np.array_equal(self.left, other.left)
                and np.array_equal(self.right, other.right)
                and np.array_equal(self.value, other.value))


@dataclass
class Ensemble:
    """A parsed model: feature space, additive trees, per-class base scores."""

    feature_space: FeatureSpace
    trees: list[Tree]
    num_classes: int = 1
    base_scores: np.ndarray = field(default_factory=lambda: np.zeros(1))
    objective: str = OBJECTIVE_BINARY

    def __post_init__(self):
        self.base_scores = np.asarray(self.base_scores, dtype=np.float64)
        self.validate()

    @property
    def num_features(self) -> int:
        return len(self.feature_space)

    @property
    def num_score_slots(self) -> int:
        """Width of the raw score vector (1 for binary raw-score models)."""
        return max(self.num_classes, 1)

    @property
    def num_output_classes(self) -> int:
        """Number of predictable class labels (binary raw models emit {0, 1})."""
        return 2 if self.objective == OBJECTIVE_BINARY else self.num_classes

    def validate(self) -> None:
        if self.objective not in (OBJECTIVE_BINARY, OBJECTIVE_MULTICLASS):
            raise ModelFormatError(f"unknown objective {self.objective!r}")
        if self.num_classes < 1:
            raise ModelFormatError("num_classes must be >= 1")
        if self.objective == OBJECTIVE_BINARY and self.num_classes != 1:
            raise ModelFormatError("binary_raw models must have num_classes=1")
        if len(self.base_scores) != self.num_score_slots:
            raise ModelFormatError(
                f"base_scores has {len(self.base_scores)} entries, "
                f"expected {self.num_score_slots}")
        if not np.all(np.isfinite(self.base_scores)):
            raise ModelFormatError("base_scores not finite")
        slots = self.num_score_slots
        for t, tree in enumerate(self.trees):
            tree.validate(self.num_features, context=f"tree {t}")
            if not 0 <= tree.class_index < slots:
                raise ModelFormatError(
                    f"tree {t}: class_index {tree.class_index} out of range")
        if self.objective == OBJECTIVE_MULTICLASS and self.trees:
            covered = {tree.class_index for tree in self.trees}
            missing = set(range(self.num_classes)) - covered
            if missing:
                raise ModelFormatError(
                    f"multiclass model has no tree for class {min(missing)}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (self.feature_space == other.feature_space
                and self.num_classes == other.num_classes
                and self.objective == other.objective
                and np.array_equal(self.base_scores, other.base_scores)
                and self.trees == other.trees)


@dataclass
class Dataset:
    """Instances as a dense (n, num_features) matrix plus optional labels."""

    x: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ModelFormatError("dataset matrix must be 2-D")
        if not np.all(np.isfinite(self.x)):
            raise ModelFormatError("dataset contains non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != len(self.x):
                raise ModelFormatError("label count does not match instance count")

    def __len__(self) -> int:
        return len(self.x)


def check_instance(ensemble: Ensemble, instance) -> np.ndarray:
    x = np.asarray(instance, dtype=np.float64)
    if x.shape != (ensemble.num_features,):
        raise ModelFormatError(
            f"instance has shape {x.shape}, expected ({ensemble.num_features},)")
    if not np.all(np.isfinite(x)):
        raise ModelFormatError("instance contains non-finite values")
    return x


# ---------------------------------------------------------------------------
# LightGBM text dump front-end


def _lgb_header(lines) -> tuple[dict, dict]:
    """Key=value pairs before the first Tree= block, with their line numbers."""
    header, where = {}, {}
    for lineno, line in lines:
        if line.startswith("Tree="):
            break
        if "=" in line:
            key, _, val = line.partition("=")
            header[key.strip()] = val.strip()
            where[key.strip()] = lineno
    return header, where


def parse_lightgbm_text(text: str) -> Ensemble:
    """Parse a LightGBM text model dump into a canonical Ensemble.

    Only numerical splits are supported; LightGBM's ``value <= threshold``
    left-branch rule is already the canonical orientation.  Child index
    ``c < 0`` denotes leaf number ``-c - 1``.
    """
    numbered = [(i + 1, line.strip()) for i, line in enumerate(text.splitlines())]
    content = [(n, l) for n, l in numbered if l]

    header, header_lines = _lgb_header(content)
    for key in ("objective", "num_class", "max_feature_idx", "feature_names"):
        if key not in header:
            raise ModelFormatError(f"malformed header: missing {key!r}")
    try:
        num_class = int(header["num_class"])
        max_feature_idx = int(header["max_feature_idx"])
    except ValueError as exc:
        raise ModelFormatError(f"malformed header: {exc}") from None
    feature_names = tuple(header["feature_names"].split())
    if len(feature_names) != max_feature_idx + 1:
        raise ModelFormatError(
            f"malformed header: {len(feature_names)} feature names but "
            f"max_feature_idx={max_feature_idx} "
            f"(line {header_lines['feature_names']})")
    if num_class < 1:
        raise ModelFormatError("malformed header: num_class < 1")

    # Split into Tree=N blocks; the trailing sections after "end of trees"
    # (importances, parameters) are ignored.
    blocks: list[tuple[int, int, dict, dict]] = []
    current: dict | None = None
    for lineno, line in content:
        if line == "end of trees":
            break
        if line.startswith("Tree="):
            tree_id = int(line.partition("=")[2])
            current = {}
            blocks.append((tree_id, lineno, current, {}))
            continue
        if current is not None and "=" in line:
            key, _, val = line.partition("=")
            blocks[-1][2][key.strip()] = val.strip()
            blocks[-1][3][key.strip()] = lineno

    if not blocks:
        raise ModelFormatError("malformed header: no Tree= blocks found")

    trees = []
    for tree_id, tree_line, kv, kv_lines in blocks:
        trees.append(_lgb_tree(tree_id, tree_line, kv, kv_lines, num_class))

    objective = (OBJECTIVE_MULTICLASS if num_class > 1 else OBJECTIVE_BINARY)
    ensemble = Ensemble(
        feature_space=FeatureSpace(feature_names),
        trees=trees,
        num_classes=num_class,
        base_scores=np.zeros(max(num_class, 1)),
        objective=objective,
    )
    return ensemble


def _lgb_array(kv, kv_lines, tree_id, key, conv, expected_len):
    if key not in kv:
        raise ModelFormatError(f"tree {tree_id}: missing {key!r}")
    lineno = kv_lines[key]
    parts = kv[key].split()
    if len(parts) != expected_len:
        raise ModelFormatError(
            f"tree {tree_id}: {key} has {len(parts)} entries, expected "
            f"{expected_len} (line {lineno})")
    try:
        return [conv(p) for p in parts], lineno
    except ValueError:
        raise ModelFormatError(
            f"tree {tree_id}: cannot parse {key} (line {lineno})") from None


def _lgb_tree(tree_id, tree_line, kv, kv_lines, num_class) -> Tree:
    try:
        num_leaves = int(kv.get("num_leaves", ""))
    except ValueError:
        raise ModelFormatError(
            f"tree {tree_id}: missing or bad num_leaves (line {tree_line})") from None
    class_index = tree_id % num_class if num_class > 1 else 0

    if num_leaves == 1:
        # Stump: a single leaf, no split arrays.
        values, _ = _lgb_array(kv, kv_lines, tree_id, "leaf_value", float, 1)
        return Tree(feature=[-1], threshold=[0.0], left=[-1], right=[-1],
                    value=values, root=0, class_index=class_index)

    n_internal = num_leaves - 1
    split_feature, _ = _lgb_array(kv, kv_lines, tree_id, "split_feature", int, n_internal)
    threshold, _ = _lgb_array(kv, kv_lines, tree_id, "threshold", float, n_internal)
    decision_type, dt_line = _lgb_array(kv, kv_lines, tree_id, "decision_type", int, n_internal)
    left_child, lc_line = _lgb_array(kv, kv_lines, tree_id, "left_child", int, n_internal)
    right_child, rc_line = _lgb_array(kv, kv_lines, tree_id, "right_child", int, n_internal)
    leaf_value, _ = _lgb_array(kv, kv_lines, tree_id, "leaf_value", float, num_leaves)

    for node, dt in enumerate(decision_type):
        if dt & _LGB_CATEGORICAL_BIT:
            raise ModelFormatError(
                f"tree {tree_id}: categorical split unsupported at node {node} "
                f"(line {dt_line})")
        if dt & ~_LGB_KNOWN_BITS:
            raise ModelFormatError(
                f"tree {tree_id}: unknown decision type {dt} at node {node} "
                f"(line {dt_line})")

    def child_node(c: int, lineno: int) -> int:
        if c >= 0:
            if c >= n_internal:
                raise ModelFormatError(
                    f"tree {tree_id}: dangling child index {c} (line {lineno})")
            return c
        leaf = -c - 1
        if leaf >= num_leaves:
            raise ModelFormatError(
                f"tree {tree_id}: dangling child index {c} (line {lineno})")
        return n_internal + leaf

    n = n_internal + num_leaves
    feature = np.full(n, -1, dtype=np.int32)
    thr = np.zeros(n)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    value = np.zeros(n)
    feature[:n_internal] = split_feature
    thr[:n_internal] = threshold
    left[:n_internal] = [child_node(c, lc_line) for c in left_child]
    right[:n_internal] = [child_node(c, rc_line) for c in right_child]
    value[n_internal:] = leaf_value
    return Tree(feature, thr, left, right, value, root=0, class_index=class_index)


# ---------------------------------------------------------------------------
# Portable JSON front-end


def parse_portable_json(text: str) -> Ensemble:
    """Parse the portable ensemble JSON schema (round-trips via emit_portable_json)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"$: invalid JSON ({exc})") from None

    def need(obj, key, path):
        if not isinstance(obj, dict) or key not in obj:
            raise ModelFormatError(f"{path}: missing key {key!r}")
        return obj[key]

    num_classes = need(doc, "num_classes", "$")
    objective = need(doc, "objective", "$")
    base_scores = need(doc, "base_scores", "$")
    features = need(doc, "features", "$")
    raw_trees = need(doc, "trees", "$")
    if objective not in (OBJECTIVE_BINARY, OBJECTIVE_MULTICLASS):
        raise ModelFormatError(f"$.objective: unknown objective {objective!r}")
    if not isinstance(features, list) or not features:
        raise ModelFormatError("$.features: must be a non-empty list")
    names = tuple(str(need(f, "name", f"$.features[{i}]"))
                  for i, f in enumerate(features))

    trees = []
    for t, raw in enumerate(raw_trees):
        path = f"$.trees[{t}]"
        class_index = int(need(raw, "class_index", path))
        root_id = need(raw, "root", path)
        nodes = need(raw, "nodes", path)
        if not isinstance(nodes, list) or not nodes:
            raise ModelFormatError(f"{path}.nodes: must be a non-empty list")
        id_to_pos = {}
        for i, node in enumerate(nodes):
            nid = need(node, "id", f"{path}.nodes[{i}]")
            if nid in id_to_pos:
                raise ModelFormatError(f"{path}.nodes[{i}]: duplicate id {nid}")
            id_to_pos[nid] = i
        if root_id not in id_to_pos:
            raise ModelFormatError(f"{path}.root: unknown node id {root_id}")

        n = len(nodes)
        feature = np.full(n, -1, dtype=np.int32)
        thr = np.zeros(n)
        left = np.full(n, -1, dtype=np.int32)
        right = np.full(n, -1, dtype=np.int32)
        value = np.zeros(n)
        for i, node in enumerate(nodes):
            npath = f"{path}.nodes[{i}]"
            kind = need(node, "kind", npath)
            if kind == "split":
                feature[i] = int(need(node, "feature", npath))
                thr[i] = float(need(node, "threshold", npath))
                for key, arr in (("left", left), ("right", right)):
                    cid = need(node, key, npath)
                    if cid not in id_to_pos:
                        raise ModelFormatError(
                            f"{npath}.{key}: unknown node id {cid}")
                    arr[i] = id_to_pos[cid]
            elif kind == "leaf":
                value[i] = float(need(node, "value", npath))
            else:
                raise ModelFormatError(f"{npath}.kind: unknown kind {kind!r}")
        tree = Tree(feature, thr, left, right, value,
                    root=id_to_pos[root_id], class_index=class_index)
        trees.append(tree)

    try:
        return Ensemble(
            feature_space=FeatureSpace(names),
            trees=trees,
            num_classes=int(num_classes),
            base_scores=np.asarray(base_scores, dtype=np.float64),
            objective=str(objective),
        )
    except ModelFormatError as exc:
        raise ModelFormatError(f"$: {exc}") from None


def emit_portable_json(ensemble: Ensemble, indent: int | None = 2) -> str:
    """Serialize an Ensemble to the portable JSON schema."""
    doc = {
        "num_classes": ensemble.num_classes,
        "objective": ensemble.objective,
        "base_scores": [float(b) for b in ensemble.base_scores],
        "features": [{"name": name} for name in ensemble.feature_space.names],
        "trees": [],
    }
    for tree in ensemble.trees:
        nodes = []
        for i in range(tree.num_nodes):
            if tree.feature[i] >= 0:
                nodes.append({"id": i, "kind": "split",
                              "feature": int(tree.feature[i]),
                              "threshold": float(tree.threshold[i]),
                              "left": int(tree.left[i]),
                              "right": int(tree.right[i])})
            else:
                nodes.append({"id": i, "kind": "leaf",
                              "value": float(tree.value[i])})
        doc["trees"].append({"class_index": tree.class_index,
                             "root": tree.root, "nodes": nodes})
    return json.dumps(doc, indent=indent)


def load_model(path: str, fmt: str) -> Ensemble:
    """Load a model file in the given format ("lightgbm" or "json")."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "lightgbm":
        return parse_lightgbm_text(text)
    if fmt == "json":
        return parse_portable_json(text)
    raise ModelFormatError(f"unknown model format {fmt!r}")


# ---------------------------------------------------------------------------
# Evaluation


def predict_raw(ensemble: Ensemble, instance) -> np.ndarray:
    """Per-class raw scores: base score plus the sum of reached leaf values."""
    x = check_instance(ensemble, instance)
    scores = ensemble.base_scores.copy()
    for tree in ensemble.trees:
        scores[tree.class_index] += tree.value[tree.descend(x)]
    return scores


def predict_raw_batch(ensemble: Ensemble, x: np.ndarray) -> np.ndarray:
    """Vectorized predict_raw over an (n, num_features) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != ensemble.num_features:
        raise ModelFormatError(
            f"batch has shape {x.shape}, expected (n, {ensemble.num_features})")
    n = len(x)
    scores = np.tile(ensemble.base_scores, (n, 1))
    for tree in ensemble.trees:
        node = np.full(n, tree.root, dtype=np.int64)
        active = tree.feature[node] >= 0
        while active.any():
            idx = node[active]
            go_left = x[active, tree.feature[idx]] <= tree.threshold[idx]
            node[active] = np.where(go_left, tree.left[idx], tree.right[idx])
            active = tree.feature[node] >= 0
        scores[:, tree.class_index] += tree.value[node]
    return scores


def predict(ensemble: Ensemble, instance) -> int:
    """Predicted class index; raw > 0 rule for binary, lowest-index argmax otherwise."""
    scores = predict_raw(ensemble, instance)
    if ensemble.objective == OBJECTIVE_BINARY:
        return 1 if scores[0] > 0.0 else 0
    return int(np.argmax(scores))


def predict_batch(ensemble: Ensemble, x: np.ndarray) -> np.ndarray:
    scores = predict_raw_batch(ensemble, x)
    if ensemble.objective == OBJECTIVE_BINARY:
        return (scores[:, 0] > 0.0).astype(np.int64)
    return np.argmax(scores, axis=1)


# ---------------------------------------------------------------------------
# Dataset CSV


def load_dataset_csv(path_or_file, feature_space: FeatureSpace | None = None
                     ) -> tuple[Dataset, FeatureSpace]:
    """Read a dataset CSV: feature-name header (optional trailing ``label``), numeric rows."""
    if isinstance(path_or_file, (str, bytes, os.PathLike)):
        with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
            return load_dataset_csv(fh, feature_space)
    reader = csv.reader(path_or_file)
    try:
        header = next(reader)
    except StopIteration:
        raise ModelFormatError("dataset CSV is empty") from None
    has_label = bool(header) and header[-1] == "label"
    names = tuple(header[:-1] if has_label else header)
    if feature_space is not None and names != feature_space.names:
        raise ModelFormatError(
            f"dataset columns {list(names)} do not match model features "
            f"{list(feature_space.names)}")
    space = feature_space or FeatureSpace(names)
    rows, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        expected = len(names) + (1 if has_label else 0)
        if len(row) != expected:
            raise ModelFormatError(
                f"dataset row at line {lineno} has {len(row)} fields, "
                f"expected {expected}")
        try:
            vals = [float(v) for v in row[:len(names)]]
            if has_label:
                labels.append(int(float(row[-1])))
        except ValueError:
            raise ModelFormatError(
                f"dataset row at line {lineno} is not numeric") from None
        rows.append(vals)
    data = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    return Dataset(x=data, labels=np.asarray(labels, dtype=np.int64)
                   if has_label else None), space


def save_dataset_csv(dataset: Dataset, feature_space: FeatureSpace,
                     path_or_file) -> None:
    if isinstance(path_or_file, (str, bytes, os.PathLike)):
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            save_dataset_csv(dataset, feature_space, fh)
            return
    writer = csv.writer(path_or_file, lineterminator="\n")
    header = list(feature_space.names)
    if dataset.labels is not None:
        header.append("label")
    writer.writerow(header)
    for i in range(len(dataset)):
        row = [repr(float(v)) for v in dataset.x[i]]
        if dataset.labels is not None:
            row.append(int(dataset.labels[i]))
        writer.writerow(row)


