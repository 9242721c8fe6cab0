"""Compile an ensemble into propositional constraints over threshold atoms.

Atom ``a(f, t)`` means "value of feature f is <= t" (boundary inclusive, the
canonical split predicate).  Per tree, one path literal per leaf is fully
defined by its branch conditions.  Hard clauses:

  * ordering chain per feature: a(f, t_j) -> a(f, t_{j+1}) for adjacent
    thresholds (transitivity completes the chain);
  * path definition, both directions: p -> each signed condition, and
    (all conditions) -> p;
  * at least one path literal per tree.

Mutual exclusion of a tree's paths follows from the definitions because
condition lists of distinct leaves conflict on some atom.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Ensemble, Tree, check_instance


@dataclass(frozen=True)
class ThresholdMap:
    """Distinct sorted thresholds per feature and their atom ids.

    Atom ids are 1-based and contiguous, assigned feature-major in threshold
    order; duplicated thresholds across trees share one atom.
    """

    thresholds: tuple[tuple[float, ...], ...]
    atoms: tuple[tuple[int, ...], ...]

    @property
    def num_atoms(self) -> int:
        return sum(len(a) for a in self.atoms)

    @property
    def num_features(self) -> int:
        return len(self.thresholds)

    def atom_of(self, feature: int, threshold: float) -> int:
        idx = self.thresholds[feature].index(threshold)
        return self.atoms[feature][idx]

    def feature_of_atom(self, atom: int) -> tuple[int, float]:
        """Inverse lookup: atom id -> (feature, threshold)."""
        for f, atoms in enumerate(self.atoms):
            if atoms and atoms[0] <= atom <= atoms[-1]:
                return f, self.thresholds[f][atom - atoms[0]]
        raise KeyError(atom)


@dataclass(frozen=True)
class PathEntry:
    """One root-to-leaf path: its literal, leaf value, and signed conditions."""

    tree: int
    leaf: int
    literal: int
    value: float
    conditions: tuple[int, ...]


@dataclass(frozen=True)
class PathTable:
    entries: tuple[PathEntry, ...]


@dataclass(frozen=True)
class EncodedModel:
    """Hard clause set plus the maps needed to interpret its variables."""

    ensemble: Ensemble
    threshold_map: ThresholdMap
    paths: PathTable
    clauses: tuple[tuple[int, ...], ...]
    num_vars: int

    @property
    def num_atoms(self) -> int:
        return self.threshold_map.num_atoms

    @property
    def num_path_literals(self) -> int:
        return len(self.paths.entries)

    def paths_of_tree(self, tree: int) -> tuple[PathEntry, ...]:
        return self._tree_paths[tree]

    def __post_init__(self):
        grouped: list[list[PathEntry]] = [[] for _ in self.ensemble.trees]
        for e in self.paths.entries:
            grouped[e.tree].append(e)
        object.__setattr__(self, "_tree_paths", tuple(tuple(g) for g in grouped))
        object.__setattr__(
            self, "_literal_index", {e.literal: e for e in self.paths.entries})

    def path_of_literal(self, literal: int) -> PathEntry:
        return self._literal_index[literal]


def collect_thresholds(ensemble: Ensemble) -> ThresholdMap:
    """Exact distinct threshold set per feature, sorted; one atom per pair."""
    per_feature: list[set[float]] = [set() for _ in range(ensemble.num_features)]
    for tree in ensemble.trees:
        for i in range(tree.num_nodes):
            f = int(tree.feature[i])
            if f >= 0:
                per_feature[f].add(float(tree.threshold[i]))
    thresholds = tuple(tuple(sorted(s)) for s in per_feature)
    atoms: list[tuple[int, ...]] = []
    next_id = 1
    for ts in thresholds:
        atoms.append(tuple(range(next_id, next_id + len(ts))))
        next_id += len(ts)
    return ThresholdMap(thresholds=thresholds, atoms=tuple(atoms))


def encode_tree(tree: Tree, threshold_map: ThresholdMap
                ) -> list[tuple[int, tuple[int, ...], float]]:
    """Per-leaf (leaf node id, signed condition atoms, leaf value), leaves in
    left-first preorder.  Left branch contributes the positive "<=" atom,
    right branch its negation."""
    out: list[tuple[int, tuple[int, ...], float]] = []

    def walk(node: int, conds: list[int]) -> None:
        if tree.is_leaf(node):
            seen, dedup = set(), []
            for lit in conds:
                if lit not in seen:
                    seen.add(lit)
                    dedup.append(lit)
            out.append((node, tuple(dedup), float(tree.value[node])))
            return
        atom = threshold_map.atom_of(int(tree.feature[node]),
                                     float(tree.threshold[node]))
        conds.append(atom)
        walk(int(tree.left[node]), conds)
        conds.pop()
        conds.append(-atom)
        walk(int(tree.right[node]), conds)
        conds.pop()

    walk(tree.root, [])
    return out


def encode_ensemble(ensemble: Ensemble) -> EncodedModel:
    """Build the full hard clause set for an ensemble."""
    tmap = collect_thresholds(ensemble)
    clauses: list[tuple[int, ...]] = []

    for atoms in tmap.atoms:
        for j in range(len(atoms) - 1):
            clauses.append((-atoms[j], atoms[j + 1]))

    next_var = tmap.num_atoms + 1
    entries: list[PathEntry] = []
    for t, tree in enumerate(ensemble.trees):
        tree_literals = []
        for leaf, conds, value in encode_tree(tree, tmap):
            lit = next_var
            next_var += 1
            entries.append(PathEntry(tree=t, leaf=leaf, literal=lit,
                                     value=value, conditions=conds))
            tree_literals.append(lit)
            for a in conds:
                clauses.append((-lit, a))
            clauses.append(tuple(-a for a in conds) + (lit,))
        clauses.append(tuple(tree_literals))

    return EncodedModel(ensemble=ensemble, threshold_map=tmap,
                        paths=PathTable(entries=tuple(entries)),
                        clauses=tuple(clauses), num_vars=next_var - 1)


def instance_to_assumptions(encoded: EncodedModel, instance,
                            fixed_features) -> list[int]:
    """Signed atoms pinning every threshold atom of each fixed feature.

    Free features contribute nothing; atom sign follows the boundary-inclusive
    comparison value <= t.
    """
    x = check_instance(encoded.ensemble, instance)
    fixed = set(fixed_features)
    bad = [f for f in fixed if not 0 <= f < encoded.ensemble.num_features]
    if bad:
        raise ValueError(f"fixed feature index {bad[0]} out of range")
    assumptions: list[int] = []
    tmap = encoded.threshold_map
    for f in sorted(fixed):
        for t, atom in zip(tmap.thresholds[f], tmap.atoms[f]):
            assumptions.append(atom if x[f] <= t else -atom)
    return assumptions


def to_dimacs(encoded: EncodedModel) -> str:
    """Standard DIMACS CNF dump with comments labeling every variable."""
    names = encoded.ensemble.feature_space.names
    lines = []
    tmap = encoded.threshold_map
    for f, (ts, atoms) in enumerate(zip(tmap.thresholds, tmap.atoms)):
        for t, atom in zip(ts, atoms):
            lines.append(f"c atom {atom} : {names[f]} <= {t!r}")
    for e in encoded.paths.entries:
        lines.append(f"c path {e.literal} : tree {e.tree} leaf {e.leaf} "
                     f"value {e.value!r}")
    lines.append(f"p cnf {encoded.num_vars} {len(encoded.clauses)}")
    for clause in encoded.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"
