"""End-to-end acceptance checks.

Each test pins one externally visible guarantee of the package: encoding/
evaluation equivalence at scale, zero-tolerance oracle agreement with brute
force, explanation minimality, bit-level determinism of the full pipeline,
exact detection arithmetic, adversarial soundness, metric agreement with
independent reference implementations, a timed end-to-end workflow on the
bundled desk model, and ingestion of the external text model format.
"""

import csv
import json
import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from treelogic import (
    ClassExplanation,
    EncodedModel,
    Explanation,
    FeatureInterval,
    SolverContext,
    classify_adversarial,
    detect,
    encode_ensemble,
    evaluate_attack,
    extract_axp,
    instance_to_assumptions,
    kendall_tau,
    load_dataset_csv,
    max_score_gap,
    predict,
    rbo,
    spearman,
)
from treelogic.adversarial import check_reversion_trace
from treelogic.cli import main
from treelogic.refcheck import (
    brute_entails,
    brute_max_gap,
    cell_grid,
    cell_instance,
    enumerate_cells,
    random_instance,
    random_small_ensemble,
)

from conftest import fixture_path, make_conjunction

DESK_JSON = str(fixture_path("desk_model.json"))
DESK_TXT = str(fixture_path("desk_model.txt"))
DESK_TRAIN = str(fixture_path("desk_train.csv"))
DESK_TEST = str(fixture_path("desk_test.csv"))
DESK_SMALL = str(fixture_path("desk_small.csv"))
DESK_RANKINGS = str(fixture_path("desk_rankings_small.json"))


def _cell_assumptions(encoded: EncodedModel, cells) -> list[int]:
    out = []
    for f, atoms in enumerate(encoded.threshold_map.atoms):
        for j, atom in enumerate(atoms):
            out.append(atom if cells[f] <= j else -atom)
    return out


def test_encoding_matches_evaluation_on_500_models_within_budget():
    """Exhaustive cell-by-cell agreement between the propositional encoding
    and direct tree descent, on at least 500 random models, within 60s."""
    start = time.monotonic()
    models = 0
    cells_checked = 0
    for seed in range(500):
        ensemble = random_small_ensemble(seed)
        encoded = encode_ensemble(ensemble)
        ctx = SolverContext(encoded)
        grid = cell_grid(ensemble)
        for cells in enumerate_cells(grid):
            x = cell_instance(grid, cells)
            closure = ctx.propagate(_cell_assumptions(encoded, cells))
            assert closure is not None, (seed, cells)
            for t, tree in enumerate(ensemble.trees):
                reached = tree.descend(x)
                for entry in encoded.paths_of_tree(t):
                    want = entry.leaf == reached
                    assert closure.get(entry.literal) is want, \
                        (seed, cells, t, entry.leaf)
            cells_checked += 1
        models += 1
    elapsed = time.monotonic() - start
    assert models >= 500
    assert cells_checked >= models  # every model contributed at least one cell
    assert elapsed <= 60.0, f"cell sweep took {elapsed:.1f}s"


def test_oracle_gap_agrees_with_brute_force_zero_tolerance():
    """At least 200 maximum-score-gap queries match exhaustive enumeration on
    the scaled integers exactly."""
    rng = random.Random(1234)
    queries = 0
    for seed in range(45):
        ensemble = random_small_ensemble(seed)
        encoded = encode_ensemble(ensemble)
        n_out = ensemble.num_output_classes
        for _ in range(5):
            x = random_instance(rng, ensemble)
            k = rng.randint(0, ensemble.num_features)
            subset = sorted(rng.sample(range(ensemble.num_features), k))
            winner = rng.randrange(n_out)
            rival = rng.choice([c for c in range(n_out) if c != winner])
            fixed = instance_to_assumptions(encoded, x, subset)
            res = max_score_gap(encoded, fixed, winner, rival)
            want = brute_max_gap(ensemble, {f: float(x[f]) for f in subset},
                                 winner, rival, scale=10 ** 6)
            assert res.gap_int == want, (seed, subset, winner, rival)
            queries += 1
    assert queries >= 200


def test_explanations_sufficient_and_minimal_on_200_pairs():
    """At least 200 (model, instance) pairs: the kept set entails the class
    and no kept feature can be dropped, checked against brute force."""
    rng = random.Random(4321)
    pairs = 0
    for seed in range(50):
        ensemble = random_small_ensemble(seed)
        encoded = encode_ensemble(ensemble)
        for i in range(4):
            x = random_instance(rng, ensemble)
            order = None
            if i % 2:
                from treelogic import default_order
                order = default_order(encoded, x, "margin")
            exp = extract_axp(encoded, x, order=order)
            assert exp.predicted_class == predict(ensemble, x)
            fixed = {f: float(x[f]) for f in exp.kept}
            assert brute_entails(ensemble, fixed, exp.predicted_class), \
                (seed, list(x))
            for drop in exp.kept:
                rest = {f: v for f, v in fixed.items() if f != drop}
                assert not brute_entails(ensemble, rest,
                                         exp.predicted_class), \
                    (seed, list(x), drop)
            pairs += 1
    assert pairs >= 200


def _run_pipeline(workdir, capsys):
    """explain -> class-explain -> adv eval -> metrics over the 100-row
    fixture; returns ({stage: stdout-dict-without-out-path}, {stage: bytes})."""
    outputs = {}
    stdouts = {}

    def run(stage, argv):
        assert main(argv) == 0, stage
        captured = capsys.readouterr()
        if captured.out.strip():
            obj = json.loads(captured.out) if captured.out.lstrip().startswith("{") else captured.out
            if isinstance(obj, dict):
                obj.pop("out", None)
            stdouts[stage] = obj

    exps = workdir / "exps.jsonl"
    run("explain", ["explain", "--model", DESK_JSON, "--data", DESK_SMALL,
                    "--out", str(exps)])
    classes = workdir / "classes.json"
    run("class-explain", ["class-explain", "--model", DESK_JSON,
                          "--data", DESK_SMALL, "--out", str(classes)])
    evalcsv = workdir / "eval.csv"
    run("adv-eval", ["adv", "eval", "--model", DESK_JSON, "--data", DESK_SMALL,
                     "--class-expl", str(classes), "--out", str(evalcsv)])
    metricscsv = workdir / "metrics.csv"
    run("metrics", ["metrics", "--model", DESK_JSON, "--data", DESK_SMALL,
                    "--rankings", DESK_RANKINGS, "--out", str(metricscsv)])
    for name, path in (("explain", exps), ("class-explain", classes),
                       ("adv-eval", evalcsv), ("metrics", metricscsv)):
        outputs[name] = path.read_bytes()
    return stdouts, outputs


def test_pipeline_is_bit_for_bit_deterministic(tmp_path, capsys):
    """Two independent full runs produce byte-identical artifacts and
    reports, and the self-consistency figure is exactly 1.0."""
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    dir_a.mkdir()
    dir_b.mkdir()
    stdout_a, files_a = _run_pipeline(dir_a, capsys)
    stdout_b, files_b = _run_pipeline(dir_b, capsys)
    assert set(files_a) == {"explain", "class-explain", "adv-eval", "metrics"}
    for stage in files_a:
        assert files_a[stage] == files_b[stage], f"{stage} artifact differs"
    assert stdout_a == stdout_b
    assert stdout_a["metrics"]["consistency"] == 1.0


def test_detection_score_arithmetic_is_exact():
    """s_adv = discrepancies / kept size on crafted cases, including the
    empty-explanation and empty-class-profile edge cases."""
    encoded = encode_ensemble(make_conjunction())

    def profiles(f1_entry=True):
        entries = [FeatureInterval(feature=0, lower=0.6, upper=2.0, support=2,
                                   frequency=1.0)]
        if f1_entry:
            entries.append(FeatureInterval(feature=1, lower=0.6, upper=2.0,
                                           support=2, frequency=1.0))
        return [
            ClassExplanation(class_index=0, population=2, intervals=(
                FeatureInterval(feature=0, lower=0.0, upper=0.3, support=2,
                                frequency=1.0),)),
            ClassExplanation(class_index=1, population=2,
                             intervals=tuple(entries)),
        ]

    # 0 of 2 discrepant
    assert detect(encoded, profiles(), [1.0, 1.0]).s_adv == 0.0
    # 1 of 2 discrepant (outside the interval)
    assert detect(encoded, profiles(), [3.0, 1.0]).s_adv == 0.5
    # 2 of 2 discrepant (outside + missing from the class profile)
    assert detect(encoded, profiles(f1_entry=False), [3.0, 1.0]).s_adv == 1.0
    # 2 of 3 discrepant via a supplied three-feature explanation
    wide = encode_ensemble(make_conjunction(extra_feature=True))
    exp3 = Explanation(predicted_class=1, kept=(0, 1, 2), free=(),
                       values=(1.0, 3.0, 0.0))
    res = detect(wide, [ClassExplanation(class_index=1, population=1,
                                         intervals=(
        FeatureInterval(feature=0, lower=0.6, upper=2.0, support=1,
                        frequency=1.0),
        FeatureInterval(feature=1, lower=0.6, upper=2.0, support=1,
                        frequency=1.0),
    ))], [1.0, 3.0, 0.0], explanation=exp3)
    assert res.s_adv == 2 / 3
    assert (res.d, res.n) == (2, 3)

    # empty explanation: score 0, never flagged at tau > 0
    from conftest import make_constant
    const = encode_ensemble(make_constant(0.5))
    empty = detect(const, [], [1.0, 2.0])
    assert (empty.s_adv, empty.d, empty.n) == (0.0, 0, 0)
    assert empty.note == "empty-explanation"
    assert classify_adversarial(empty, tau=0.5) is False
    assert classify_adversarial(empty, tau=0.0) is True

    # empty class profile: every kept feature counts as discrepant
    miss = detect(encoded, [], [1.0, 1.0])
    assert miss.s_adv == 1.0
    assert miss.note == "empty-class-explanation"

    # inclusive flagging threshold
    half = detect(encoded, profiles(), [3.0, 1.0])
    assert classify_adversarial(half, tau=0.5) is True
    assert classify_adversarial(half, tau=0.51) is False


def _check_soundness(ensemble, rows, mode):
    successes = 0
    for row in rows:
        if row.result is None:
            continue
        successes += 1
        res = row.result
        assert res.mode == mode
        original = np.array(res.original)
        perturbed = np.array(res.perturbed)
        # the flip is real
        assert predict(ensemble, perturbed) == res.new_class
        assert res.new_class != res.original_class
        # the reported distance is the actual distance
        assert res.l2 == float(np.linalg.norm(perturbed - original))
        # changed_features is exactly the set of touched features
        diff = tuple(int(f) for f in range(len(original))
                     if original[f] != perturbed[f])
        assert diff == res.changed_features
        # greedy reversion never increased the distance
        assert check_reversion_trace(res)
        if res.reversion_trace:
            assert res.reversion_trace[-1] == pytest.approx(res.l2)
    return successes


def test_adversarial_results_all_reverify():
    """Every emitted adversarial example actually flips the prediction, with
    exact distances and non-increasing reversion traces, in both modes."""
    from treelogic import build_class_explanations, explain_dataset, load_model
    ensemble = load_model(DESK_JSON, "json")
    encoded = encode_ensemble(ensemble)
    data, _ = load_dataset_csv(DESK_SMALL, ensemble.feature_space)
    exps = explain_dataset(encoded, data)
    class_expls = build_class_explanations(exps,
                                           ensemble.num_output_classes)

    _, rows = evaluate_attack(encoded, class_expls, data, mode="interval")
    interval_successes = _check_soundness(ensemble, rows, "interval")
    assert interval_successes >= 1

    _, wrows = evaluate_attack(encoded, class_expls, data.x[:15],
                               mode="witness", full_free=True)
    witness_successes = _check_soundness(ensemble, wrows, "witness")
    assert witness_successes >= 1


# ---------------------------------------------------------------------------
# Metric agreement with independent reference implementations


def _frac_ranks(ranks):
    out = []
    for r in ranks:
        less = sum(1 for v in ranks if v < r)
        eq = sum(1 for v in ranks if v == r)
        out.append(less + (eq + 1) / 2)
    return out


def _brute_spearman(x, y):
    a, b = _frac_ranks(x), _frac_ranks(y)
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    va = sum((v - ma) ** 2 for v in a)
    vb = sum((v - mb) ** 2 for v in b)
    if va == 0 or vb == 0:
        return None
    cov = sum((p - ma) * (q - mb) for p, q in zip(a, b))
    return cov / math.sqrt(va * vb)


def _brute_kendall(x, y):
    n = len(x)
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (x[i] > x[j]) - (x[i] < x[j])
            b = (y[i] > y[j]) - (y[i] < y[j])
            if a == 0 and b == 0:
                continue
            if a == 0:
                tx += 1
            elif b == 0:
                ty += 1
            elif a == b:
                conc += 1
            else:
                disc += 1
    denom = math.sqrt((conc + disc + tx) * (conc + disc + ty))
    if denom == 0:
        return None
    return (conc - disc) / denom


def _brute_rbo(l1, l2, p):
    n = len(l1)
    total = 0.0
    for d in range(1, n + 1):
        overlap = len(set(l1[:d]) & set(l2[:d]))
        total += (1 - p) * p ** (d - 1) * overlap / d
    final = len(set(l1) & set(l2))
    return total + p ** n * final / n


def test_metrics_agree_with_reference_on_100_tie_heavy_rankings():
    """Exact +-1.0 at the endpoints, and agreement with independent
    reference implementations within 1e-12 on 100 random tie-heavy pairs."""
    # endpoint exactness, including tie-heavy inputs
    assert spearman((1, 1, 2, 3), (1, 1, 2, 3)) == 1.0
    assert spearman((1, 1, 2, 2), (2, 2, 1, 1)) == -1.0
    assert kendall_tau((1, 2, 2, 3), (1, 2, 2, 3)) == 1.0
    assert kendall_tau((1, 1, 2), (2, 2, 1)) == -1.0
    assert rbo([3, 0, 2, 1], [3, 0, 2, 1], 0.9) == 1.0

    rng = random.Random(99)
    pairs = 0
    degenerate_seen = 0
    for _ in range(100):
        n = rng.randint(2, 10)
        x = tuple(rng.randint(1, 4) for _ in range(n))
        y = tuple(rng.randint(1, 4) for _ in range(n))
        got_s, want_s = spearman(x, y), _brute_spearman(x, y)
        if want_s is None:
            assert got_s is None
            degenerate_seen += 1
        else:
            assert got_s == pytest.approx(want_s, abs=1e-12)
        got_k, want_k = kendall_tau(x, y), _brute_kendall(x, y)
        if want_k is None:
            assert got_k is None
        else:
            assert got_k == pytest.approx(want_k, abs=1e-12)
        perm1 = list(range(n))
        perm2 = list(range(n))
        rng.shuffle(perm1)
        rng.shuffle(perm2)
        p = rng.choice((0.5, 0.9))
        assert rbo(perm1, perm2, p) == pytest.approx(
            _brute_rbo(perm1, perm2, p), abs=1e-12)
        pairs += 1
    assert pairs >= 100
    assert degenerate_seen >= 1  # the sample really is tie-heavy


# ---------------------------------------------------------------------------
# Timed end-to-end workflow on the bundled desk model


def _cli(args):
    proc = subprocess.run([sys.executable, "-m", "treelogic.cli", *args],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout) if proc.stdout.strip() else None


def test_desk_workflow_under_two_minutes(tmp_path):
    """class-explain -> adv gen -> adv detect -> adv eval on the bundled
    model with --jobs 4, under 120s, with the detection rate recomputed two
    independent ways and agreeing exactly."""
    start = time.monotonic()
    classes = tmp_path / "classes.json"
    _cli(["class-explain", "--model", DESK_JSON, "--data", DESK_TRAIN,
          "--out", str(classes), "--jobs", "4"])

    gen_csv = tmp_path / "gen.csv"
    adv_csv = tmp_path / "adv_rows.csv"
    gen_report = _cli(["adv", "gen", "--model", DESK_JSON,
                       "--data", DESK_TEST, "--class-expl", str(classes),
                       "--attack", "witness", "--full-free",
                       "--out", str(gen_csv), "--adv-data", str(adv_csv),
                       "--jobs", "4"])
    assert gen_report["fooled"] >= 1
    assert "detection" not in gen_report

    detect_report = _cli(["adv", "detect", "--model", DESK_JSON,
                          "--data", str(adv_csv), "--class-expl", str(classes),
                          "--tau", "0.5", "--out", str(tmp_path / "det.csv"),
                          "--jobs", "4"])

    eval_csv = tmp_path / "eval.csv"
    eval_report = _cli(["adv", "eval", "--model", DESK_JSON,
                        "--data", DESK_TEST, "--class-expl", str(classes),
                        "--attack", "witness", "--full-free", "--tau", "0.5",
                        "--out", str(eval_csv), "--jobs", "4"])
    elapsed = time.monotonic() - start
    assert elapsed <= 120.0, f"workflow took {elapsed:.1f}s"

    # way 1: the report's own detection block
    det = eval_report["detection"]
    assert det["tau"] == 0.5
    assert det["successes"] == eval_report["fooled"]

    # way 2: recount from the per-sample CSV
    with open(eval_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    s_col = header.index("s_adv")
    ok_col = header.index("success")
    successes = [r for r in body if r[ok_col] == "1"]
    assert len(successes) == eval_report["fooled"]
    recount = sum(1 for r in successes if float(r[s_col]) >= 0.5)
    assert recount == det["detected"]
    if det["successes"]:
        assert det["rate"] == recount / det["successes"]

    # cross-check: the standalone detect stage saw the same perturbed rows
    assert detect_report["instances"] == eval_report["fooled"]
    assert detect_report["flagged"] == det["detected"]
    if det["successes"]:
        assert detect_report["flagged_rate"] == det["rate"]


def test_external_text_format_ingests_identically(tmp_path, capsys):
    """The external text dump and the portable JSON form of the same model
    produce byte-identical explanations and identical encodings."""
    out_txt = tmp_path / "from_txt.jsonl"
    out_json = tmp_path / "from_json.jsonl"
    for model, fmt, out in ((DESK_TXT, "lightgbm", out_txt),
                            (DESK_JSON, "json", out_json)):
        code = main(["explain", "--model", model, "--format", fmt,
                     "--data", DESK_TEST, "--instances", "0-19",
                     "--out", str(out)])
        capsys.readouterr()
        assert code == 0
    assert out_txt.read_bytes() == out_json.read_bytes()

    stats = []
    for model, fmt in ((DESK_TXT, "lightgbm"), (DESK_JSON, "json")):
        code = main(["encode", "--model", model, "--format", fmt,
                     "--out", str(tmp_path / "enc.cnf")])
        captured = capsys.readouterr()
        assert code == 0
        obj = json.loads(captured.out)
        obj.pop("out")
        stats.append(obj)
    assert stats[0] == stats[1]
