"""Exact reasoning backend over an encoded ensemble.

Two engines share the encoding:

  * `SolverContext` — a small DPLL solver with assumptions and counter-based
    unit propagation, sound and complete on the hard clause set;
  * a branch-and-bound maximizer over per-feature interval cells that computes
    the exact maximum score gap ``score_rival - score_winner`` in scaled
    integer arithmetic.  Per tree the bound is the best reachable leaf weight
    under the current interval domains, so pruning is admissible and the
    optimum is exact.

All arithmetic on leaf values is integerized: weight = round(scale * value)
with round-half-away-from-zero, shifted per tree so weights are nonnegative.
Gap comparisons against zero always use the exact integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoder import EncodedModel
from .errors import InconsistentAssumptions
from .model import OBJECTIVE_BINARY, check_instance

DEFAULT_SCALE = 10 ** 6


def scaled_round(value: float, scale: int) -> int:
    """round(scale * value) with halves away from zero, bit-stable."""
    x = value * scale
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


# ---------------------------------------------------------------------------
# DPLL solver


class SolverContext:
    """Single-threaded, reusable SAT context over one encoded model.

    Contexts are cheap; callers that parallelize create one per thread over
    the shared immutable EncodedModel.
    """

    def __init__(self, encoded: EncodedModel):
        self.num_vars = encoded.num_vars
        self.clauses = [tuple(dict.fromkeys(c)) for c in encoded.clauses]
        pos: list[list[int]] = [[] for _ in range(self.num_vars + 1)]
        neg: list[list[int]] = [[] for _ in range(self.num_vars + 1)]
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                (pos if lit > 0 else neg)[abs(lit)].append(ci)
        self._pos_occ = pos
        self._neg_occ = neg
        self._assign = [0] * (self.num_vars + 1)
        self._nonfalse = [len(c) for c in self.clauses]
        self._ntrue = [0] * len(self.clauses)
        self._trail: list[int] = []
        self._base_units = [c[0] for c in self.clauses if len(c) == 1]
        if any(len(c) == 0 for c in self.clauses):
            raise ValueError("encoding contains an empty clause")

    def _check_literals(self, literals) -> list[int]:
        out = []
        for lit in literals:
            v = abs(int(lit))
            if lit == 0 or v > self.num_vars:
                raise ValueError(f"assumption {lit} references no registered atom")
            out.append(int(lit))
        return out

    def _set(self, lit: int, pending: list[int]) -> bool:
        v = lit if lit > 0 else -lit
        val = 1 if lit > 0 else -1
        cur = self._assign[v]
        if cur != 0:
            return cur == val
        self._assign[v] = val
        self._trail.append(lit)
        sat_occ = self._pos_occ[v] if lit > 0 else self._neg_occ[v]
        for ci in sat_occ:
            self._ntrue[ci] += 1
        conflict = False
        false_occ = self._neg_occ[v] if lit > 0 else self._pos_occ[v]
        nonfalse = self._nonfalse
        ntrue = self._ntrue
        assign = self._assign
        for ci in false_occ:
            nonfalse[ci] -= 1
            if ntrue[ci] == 0:
                nf = nonfalse[ci]
                if nf == 0:
                    conflict = True
                elif nf == 1:
                    for l2 in self.clauses[ci]:
                        if assign[abs(l2)] == 0:
                            pending.append(l2)
                            break
        return not conflict

    def _propagate_fixpoint(self, literals) -> bool:
        pending = list(literals)
        i = 0
        while i < len(pending):
            if not self._set(pending[i], pending):
                return False
            i += 1
        return True

    def _undo_to(self, mark: int) -> None:
        while len(self._trail) > mark:
            lit = self._trail.pop()
            v = abs(lit)
            self._assign[v] = 0
            sat_occ = self._pos_occ[v] if lit > 0 else self._neg_occ[v]
            for ci in sat_occ:
                self._ntrue[ci] -= 1
            false_occ = self._neg_occ[v] if lit > 0 else self._pos_occ[v]
            for ci in false_occ:
                self._nonfalse[ci] += 1

    def propagate(self, assumptions=()) -> dict[int, bool] | None:
        """Unit-propagation closure of base units + assumptions.

        Returns {var: value} for every literal fixed by propagation alone,
        or None on conflict.  No decisions are made, so every returned value
        is entailed.
        """
        assumptions = self._check_literals(assumptions)
        mark = len(self._trail)
        ok = self._propagate_fixpoint(self._base_units + assumptions)
        if not ok:
            self._undo_to(mark)
            return None
        out = {v: self._assign[v] > 0
               for v in range(1, self.num_vars + 1) if self._assign[v] != 0}
        self._undo_to(mark)
        return out

    def solve(self, assumptions=()) -> tuple[bool, ...] | None:
        """Full model (per-variable truth values) or None if UNSAT.

        Deterministic: decisions pick the lowest unassigned variable, trying
        true first, with chronological backtracking.
        """
        assumptions = self._check_literals(assumptions)
        mark = len(self._trail)
        if not self._propagate_fixpoint(self._base_units + assumptions):
            self._undo_to(mark)
            return None
        decisions: list[list] = []  # [trail mark, decision var, flipped?]
        assign = self._assign
        while True:
            var = None
            for v in range(1, self.num_vars + 1):
                if assign[v] == 0:
                    var = v
                    break
            if var is None:
                model = tuple(assign[v] > 0 for v in range(1, self.num_vars + 1))
                self._undo_to(mark)
                return model
            decisions.append([len(self._trail), var, False])
            ok = self._propagate_fixpoint([var])
            while not ok:
                while decisions and decisions[-1][2]:
                    self._undo_to(decisions[-1][0])
                    decisions.pop()
                if not decisions:
                    self._undo_to(mark)
                    return None
                decisions[-1][2] = True
                self._undo_to(decisions[-1][0])
                ok = self._propagate_fixpoint([-decisions[-1][1]])


def solve(encoded: EncodedModel, assumptions=()) -> tuple[bool, ...] | None:
    return SolverContext(encoded).solve(assumptions)


def propagate(encoded: EncodedModel, assumptions=()) -> dict[int, bool] | None:
    return SolverContext(encoded).propagate(assumptions)


# ---------------------------------------------------------------------------
# Scaled objective


@dataclass(frozen=True)
class ScaledObjective:
    """Integerized gap objective for one (winner, rival) query.

    weights maps every objective-tree path literal to its shifted nonnegative
    weight; constant = sum of per-tree offsets + scaled base-score difference,
    so that gap_int = max over completions of (sum of selected weights) +
    constant.
    """

    scale: int
    weights: dict[int, int]
    tree_offsets: dict[int, int]
    constant: int


def _class_pair(encoded: EncodedModel, winner: int, rival: int):
    ensemble = encoded.ensemble
    n_out = ensemble.num_output_classes
    for name, c in (("winner", winner), ("rival", rival)):
        if not 0 <= c < n_out:
            raise ValueError(f"{name} class {c} out of range [0, {n_out})")
    if winner == rival:
        raise ValueError("winner and rival classes must differ")


def _tree_signs(encoded: EncodedModel, winner: int, rival: int) -> list[int]:
    """Objective sign per tree: +1 rival-side, -1 winner-side, 0 irrelevant.

    Binary raw-score models use pseudo-classes score_1 = raw, score_0 = 0,
    so every tree carries the same sign.
    """
    ensemble = encoded.ensemble
    if ensemble.objective == OBJECTIVE_BINARY:
        sign = (1 if rival == 1 else 0) - (1 if winner == 1 else 0)
        return [sign] * len(ensemble.trees)
    return [(1 if t.class_index == rival else 0)
            - (1 if t.class_index == winner else 0) for t in ensemble.trees]


def _scaled_base_diff(encoded: EncodedModel, winner: int, rival: int,
                      scale: int) -> int:
    ensemble = encoded.ensemble
    if ensemble.objective == OBJECTIVE_BINARY:
        b = scaled_round(float(ensemble.base_scores[0]), scale)
        return (b if rival == 1 else 0) - (b if winner == 1 else 0)
    return (scaled_round(float(ensemble.base_scores[rival]), scale)
            - scaled_round(float(ensemble.base_scores[winner]), scale))


def build_scaled_objective(encoded: EncodedModel, winner: int, rival: int,
                           scale: int = DEFAULT_SCALE) -> ScaledObjective:
    _class_pair(encoded, winner, rival)
    signs = _tree_signs(encoded, winner, rival)
    weights: dict[int, int] = {}
    offsets: dict[int, int] = {}
    constant = _scaled_base_diff(encoded, winner, rival, scale)
    for t, sign in enumerate(signs):
        if sign == 0:
            continue
        entries = encoded.paths_of_tree(t)
        raw = {e.literal: sign * scaled_round(e.value, scale) for e in entries}
        m = min(raw.values())
        offsets[t] = m
        constant += m
        for lit, w in raw.items():
            weights[lit] = w - m
    return ScaledObjective(scale=scale, weights=weights, tree_offsets=offsets,
                           constant=constant)


# ---------------------------------------------------------------------------
# Per-model preprocessing for the branch-and-bound engine


class _TreePrep:
    __slots__ = ("feature", "tpos", "left", "right", "root", "leaf_weight_raw",
                 "uses", "leaf_literal", "class_index")

    def __init__(self, tree, tmap, leaf_literal):
        n = tree.num_nodes
        self.feature = [int(f) for f in tree.feature]
        self.left = [int(v) for v in tree.left]
        self.right = [int(v) for v in tree.right]
        self.root = tree.root
        self.class_index = tree.class_index
        pos_of = [
            {t: i for i, t in enumerate(ts)} for ts in tmap.thresholds]
        self.tpos = [pos_of[self.feature[i]][float(tree.threshold[i])]
                     if self.feature[i] >= 0 else -1 for i in range(n)]
        self.uses = frozenset(f for f in self.feature if f >= 0)
        self.leaf_literal = leaf_literal  # leaf node id -> path literal
        self.leaf_weight_raw = {int(i): float(tree.value[i])
                                for i in tree.leaf_ids}


class _Prep:
    __slots__ = ("trees", "atom_feature", "atom_pos", "num_atoms",
                 "_scaled_cache")

    def __init__(self, encoded: EncodedModel):
        tmap = encoded.threshold_map
        self.num_atoms = tmap.num_atoms
        self.atom_feature = [0] * (self.num_atoms + 1)
        self.atom_pos = [0] * (self.num_atoms + 1)
        for f, atoms in enumerate(tmap.atoms):
            for p, a in enumerate(atoms):
                self.atom_feature[a] = f
                self.atom_pos[a] = p
        self.trees = []
        for t, tree in enumerate(encoded.ensemble.trees):
            leaf_literal = {e.leaf: e.literal for e in encoded.paths_of_tree(t)}
            self.trees.append(_TreePrep(tree, tmap, leaf_literal))
        self._scaled_cache: dict[int, list[dict[int, int]]] = {}

    def scaled_leaves(self, scale: int) -> list[dict[int, int]]:
        cached = self._scaled_cache.get(scale)
        if cached is None:
            cached = [{leaf: scaled_round(v, scale)
                       for leaf, v in tp.leaf_weight_raw.items()}
                      for tp in self.trees]
            self._scaled_cache[scale] = cached
        return cached


def _prep(encoded: EncodedModel) -> _Prep:
    prep = getattr(encoded, "_oracle_prep", None)
    if prep is None:
        prep = _Prep(encoded)
        object.__setattr__(encoded, "_oracle_prep", prep)
    return prep


class _BBTree:
    """One tree inside a gap query: shifted leaf weights and forbidden leaves."""

    __slots__ = ("feature", "tpos", "left", "right", "root", "weight",
                 "forbidden", "uses")

    def __init__(self, tp: _TreePrep, weight: dict[int, int], forbidden):
        self.feature = tp.feature
        self.tpos = tp.tpos
        self.left = tp.left
        self.right = tp.right
        self.root = tp.root
        self.weight = weight
        self.forbidden = frozenset(forbidden)
        self.uses = tp.uses


def _tree_max(bt: _BBTree, lo: list[int], hi: list[int]) -> int | None:
    """Best reachable leaf weight under interval domains; None if none reachable."""
    feature, tpos = bt.feature, bt.tpos
    left, right, weight = bt.left, bt.right, bt.weight
    forbidden = bt.forbidden

    def rec(i: int) -> int | None:
        f = feature[i]
        if f < 0:
            if i in forbidden:
                return None
            return weight[i]
        p = tpos[i]
        best = None
        if lo[f] <= p:
            old = hi[f]
            if old > p:
                hi[f] = p
                v = rec(left[i])
                hi[f] = old
            else:
                v = rec(left[i])
            if v is not None:
                best = v
        if hi[f] > p:
            old = lo[f]
            if old <= p:
                lo[f] = p + 1
                v = rec(right[i])
                lo[f] = old
            else:
                v = rec(right[i])
            if v is not None and (best is None or v > best):
                best = v
        return best

    return rec(bt.root)


class _Search:
    """Deterministic branch-and-bound over per-feature cell choices."""

    def __init__(self, lo: list[int], hi: list[int], trees: list[_BBTree]):
        self.lo = lo
        self.hi = hi
        self.trees = trees
        users: list[list[int]] = [[] for _ in lo]
        for i, bt in enumerate(trees):
            for f in bt.uses:
                users[f].append(i)
        self.users = users
        branch = [f for f in range(len(lo)) if lo[f] < hi[f] and users[f]]
        branch.sort(key=lambda f: (-len(users[f]), f))
        self.branch = branch
        self.tmax: list[int] = []
        for bt in trees:
            v = _tree_max(bt, lo, hi)
            if v is None:
                raise InconsistentAssumptions("inconsistent fixed values")
            self.tmax.append(v)

    def _children(self, f: int):
        """Feasible cell choices for feature f with their bound deltas,
        best-bound first (ties by lower cell)."""
        flo, fhi = self.lo[f], self.hi[f]
        options = []
        for cell in range(flo, fhi + 1):
            self.lo[f] = self.hi[f] = cell
            updates = []
            feasible = True
            for ti in self.users[f]:
                v = _tree_max(self.trees[ti], self.lo, self.hi)
                if v is None:
                    feasible = False
                    break
                updates.append((ti, v))
            if feasible:
                delta = sum(v - self.tmax[ti] for ti, v in updates)
                options.append((cell, updates, delta))
        self.lo[f], self.hi[f] = flo, fhi
        options.sort(key=lambda o: (-o[2], o[0]))
        return options

    def maximize(self) -> tuple[int, list[int]]:
        self._best: int | None = None
        self._best_cells: list[int] | None = None
        self._dfs_max(0)
        if self._best is None:
            raise InconsistentAssumptions("inconsistent fixed values")
        return self._best, self._best_cells

    def _dfs_max(self, k: int) -> None:
        if k == len(self.branch):
            val = sum(self.tmax)
            if self._best is None or val > self._best:
                self._best = val
                self._best_cells = list(self.lo)
            return
        f = self.branch[k]
        flo, fhi = self.lo[f], self.hi[f]
        base = sum(self.tmax)
        for cell, updates, delta in self._children(f):
            if self._best is not None and base + delta <= self._best:
                break  # children are bound-sorted; the rest cannot improve
            self.lo[f] = self.hi[f] = cell
            saved = [(ti, self.tmax[ti]) for ti, _ in updates]
            for ti, v in updates:
                self.tmax[ti] = v
            self._dfs_max(k + 1)
            for ti, v in saved:
                self.tmax[ti] = v
            self.lo[f], self.hi[f] = flo, fhi

    def find_at_least(self, target: int) -> tuple[int, list[int]] | None:
        """First completion with objective >= target, or None proving max < target."""
        return self._dfs_decide(0, target)

    def _dfs_decide(self, k: int, target: int):
        if sum(self.tmax) < target:
            return None
        if k == len(self.branch):
            return sum(self.tmax), list(self.lo)
        f = self.branch[k]
        flo, fhi = self.lo[f], self.hi[f]
        base = sum(self.tmax)
        for cell, updates, delta in self._children(f):
            if base + delta < target:
                break
            self.lo[f] = self.hi[f] = cell
            saved = [(ti, self.tmax[ti]) for ti, _ in updates]
            for ti, v in updates:
                self.tmax[ti] = v
            hit = self._dfs_decide(k + 1, target)
            for ti, v in saved:
                self.tmax[ti] = v
            self.lo[f], self.hi[f] = flo, fhi
            if hit is not None:
                return hit
        return None


# ---------------------------------------------------------------------------
# Query assembly


class _GapQuery:
    __slots__ = ("search", "fixed_sum", "constant", "scale", "objective")

    def __init__(self, encoded: EncodedModel, fixed, winner: int, rival: int,
                 scale: int):
        _class_pair(encoded, winner, rival)
        prep = _prep(encoded)
        tmap = encoded.threshold_map
        lo = [0] * tmap.num_features
        hi = [len(ts) for ts in tmap.thresholds]
        required: dict[int, object] = {}
        forbidden: dict[int, set[int]] = {}

        def pin_atom(lit: int) -> None:
            a = abs(lit)
            f = prep.atom_feature[a]
            p = prep.atom_pos[a]
            if lit > 0:
                if p < hi[f]:
                    hi[f] = p
            else:
                if p + 1 > lo[f]:
                    lo[f] = p + 1

        for lit in fixed:
            lit = int(lit)
            v = abs(lit)
            if lit == 0 or v > encoded.num_vars:
                raise ValueError(f"assumption {lit} references no registered atom")
            if v <= prep.num_atoms:
                pin_atom(lit)
            else:
                entry = encoded.path_of_literal(v)
                if lit > 0:
                    prev = required.get(entry.tree)
                    if prev is not None and prev.leaf != entry.leaf:
                        raise InconsistentAssumptions("inconsistent fixed values")
                    required[entry.tree] = entry
                else:
                    forbidden.setdefault(entry.tree, set()).add(entry.leaf)

        for entry in required.values():
            if entry.leaf in forbidden.get(entry.tree, ()):
                raise InconsistentAssumptions("inconsistent fixed values")
            for a in entry.conditions:
                pin_atom(a)
        if any(lo[f] > hi[f] for f in range(len(lo))):
            raise InconsistentAssumptions("inconsistent fixed values")

        signs = _tree_signs(encoded, winner, rival)
        scaled = prep.scaled_leaves(scale)
        self.scale = scale
        self.constant = _scaled_base_diff(encoded, winner, rival, scale)
        self.fixed_sum = 0
        self.objective = build_scaled_objective(encoded, winner, rival, scale)
        bb_trees: list[_BBTree] = []
        for t, tp in enumerate(prep.trees):
            sign = signs[t]
            forb = forbidden.get(t, ())
            if sign == 0 and not forb:
                continue
            if sign == 0:
                shifted = {leaf: 0 for leaf in tp.leaf_weight_raw}
            else:
                raw = {leaf: sign * w for leaf, w in scaled[t].items()}
                m = min(raw.values())
                self.constant += m
                shifted = {leaf: w - m for leaf, w in raw.items()}
            entry = required.get(t)
            if entry is not None:
                # Domains already narrowed to the required path: leaf forced.
                self.fixed_sum += shifted[entry.leaf]
                continue
            bb_trees.append(_BBTree(tp, shifted, forb))
        self.search = _Search(lo, hi, bb_trees)

    def gap_int_of(self, search_value: int) -> int:
        return search_value + self.fixed_sum + self.constant


# ---------------------------------------------------------------------------
# Witnesses and public queries


@dataclass(frozen=True)
class Witness:
    """A maximizing completion: cell per feature, atom values, path per tree."""

    cells: tuple[int, ...]
    atom_values: tuple[bool, ...]
    selected_paths: tuple[int, ...]
    gap_int: int
    scale: int

    @property
    def gap(self) -> float:
        return self.gap_int / self.scale

    def feature_interval(self, encoded: EncodedModel, feature: int
                         ) -> tuple[float, float]:
        """Open-closed interval (lo, hi] the witness assigns to a feature."""
        ts = encoded.threshold_map.thresholds[feature]
        cell = self.cells[feature]
        lo = ts[cell - 1] if cell > 0 else -math.inf
        hi = ts[cell] if cell < len(ts) else math.inf
        return lo, hi


def _make_witness(encoded: EncodedModel, cells: list[int], gap_int: int,
                  scale: int) -> Witness:
    prep = _prep(encoded)
    tmap = encoded.threshold_map
    atom_values = []
    for f, atoms in enumerate(tmap.atoms):
        for p in range(len(atoms)):
            atom_values.append(cells[f] <= p)
    selected = []
    for tp in prep.trees:
        i = tp.root
        while tp.feature[i] >= 0:
            i = tp.left[i] if cells[tp.feature[i]] <= tp.tpos[i] else tp.right[i]
        selected.append(tp.leaf_literal[i])
    return Witness(cells=tuple(cells), atom_values=tuple(atom_values),
                   selected_paths=tuple(selected), gap_int=gap_int, scale=scale)


@dataclass(frozen=True)
class GapResult:
    gap: float
    gap_int: int
    witness: Witness | None


@dataclass(frozen=True)
class Valid:
    valid: bool = True


@dataclass(frozen=True)
class Counterexample:
    witness: Witness
    rival: int
    valid: bool = False


def max_score_gap(encoded: EncodedModel, fixed, winner: int, rival: int,
                  scale: int = DEFAULT_SCALE) -> GapResult:
    """Exact maximum of score_rival - score_winner over completions of `fixed`.

    Raises InconsistentAssumptions when `fixed` has no completion.
    """
    query = _GapQuery(encoded, fixed, winner, rival, scale)
    value, cells = query.search.maximize()
    gap_int = query.gap_int_of(value)
    witness = _make_witness(encoded, cells, gap_int, scale)
    return GapResult(gap=gap_int / scale, gap_int=gap_int, witness=witness)


def entails(encoded: EncodedModel, fixed, predicted_class: int,
            scale: int = DEFAULT_SCALE) -> Valid | Counterexample:
    """Does every completion of `fixed` predict `predicted_class`?

    Ties follow the executable model's lowest-index rule, so a rival below
    the predicted class refutes on gap >= 0 and one above on gap > 0.
    Rivals are scanned in ascending index; the first counterexample found is
    returned (not necessarily the gap-maximizing one).
    """
    n_out = encoded.ensemble.num_output_classes
    if not 0 <= predicted_class < n_out:
        raise ValueError(f"class {predicted_class} out of range [0, {n_out})")
    for rival in range(n_out):
        if rival == predicted_class:
            continue
        query = _GapQuery(encoded, fixed, predicted_class, rival, scale)
        need_gap = 1 if rival > predicted_class else 0
        target = need_gap - query.fixed_sum - query.constant
        hit = query.search.find_at_least(target)
        if hit is not None:
            value, cells = hit
            gap_int = query.gap_int_of(value)
            witness = _make_witness(encoded, cells, gap_int, scale)
            return Counterexample(witness=witness, rival=rival)
    return Valid()


def witness_to_instance(witness: Witness, encoded: EncodedModel,
                        reference) -> np.ndarray:
    """Materialize a witness into a concrete instance near `reference`.

    Per feature the witness interval is (lo, hi]; a reference value inside is
    kept, otherwise hi is chosen when finite, else lo + eps with
    eps = max(1e-6, 1e-6 * |lo|).  The result re-traverses every tree to the
    witness's selected leaves.
    """
    x = check_instance(encoded.ensemble, reference).copy()
    for f in range(encoded.ensemble.num_features):
        lo, hi = witness.feature_interval(encoded, f)
        if lo < x[f] <= hi:
            continue
        if math.isfinite(hi):
            x[f] = hi
        else:
            eps = max(1e-6, 1e-6 * abs(lo))
            x[f] = lo + eps
    return x


def to_wcnf(encoded: EncodedModel, fixed, winner: int, rival: int,
            scale: int = DEFAULT_SCALE) -> str:
    """Weighted DIMACS export of a gap query for external-solver cross-checks.

    Optimal MaxSAT cost C relates to the gap by
    gap_int = (total soft weight - C) + constant.
    """
    objective = build_scaled_objective(encoded, winner, rival, scale)
    fixed = [int(l) for l in fixed]
    soft = [(w, lit) for lit, w in sorted(objective.weights.items()) if w > 0]
    top = sum(w for w, _ in soft) + 1
    lines = [
        f"c gap query winner={winner} rival={rival} scale={scale}",
        f"c constant={objective.constant}",
        f"c total_soft_weight={top - 1}",
        f"p wcnf {encoded.num_vars} "
        f"{len(encoded.clauses) + len(fixed) + len(soft)} {top}",
    ]
    for clause in encoded.clauses:
        lines.append(f"{top} " + " ".join(str(l) for l in clause) + " 0")
    for lit in fixed:
        lines.append(f"{top} {lit} 0")
    for w, lit in soft:
        lines.append(f"{w} {lit} 0")
    return "\n".join(lines) + "\n"
