"""Command-line entry point: file-in/file-out workflows over the library.

Subcommands: encode, explain, class-explain, adv gen|detect|eval, metrics.
Exit codes: 0 success, 1 domain error (unsupported model construct,
inconsistent query), 2 IO or usage error.  Every command is deterministic
for a fixed configuration; parallel workers never affect output ordering.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from .adversarial import (
    attack_rows_to_csv,
    classify_adversarial,
    detect_dataset,
    evaluate_attack,
)
from .axp import explain_dataset, write_explanations_jsonl
from .classexpl import (
    build_class_explanations,
    read_class_explanations,
    write_class_explanations,
)
from .encoder import encode_ensemble, to_dimacs
from .errors import TreeLogicError
from .metrics import (
    aggregate,
    compare_rankings,
    consistency,
    formal_ranking,
    read_rankings,
    write_metrics_csv,
)
from .model import Dataset, load_dataset_csv, load_model, save_dataset_csv


def _model_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--format", choices=("lightgbm", "json"), default="json",
                   help="model file format (default: json)")
    p.add_argument("--scale", type=int, default=6, metavar="K",
                   help="integerization scale exponent, weights = round(10^K * leaf)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed recorded in reports (the pipeline itself is deterministic)")
    return p


def _jobs_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for per-instance stages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treelogic",
        description="Logic encodings, exact explanations, adversarial "
                    "analysis and ranking metrics for boosted tree models.")
    sub = parser.add_subparsers(dest="command", required=True)
    model = _model_parent()

    p = sub.add_parser("encode", parents=[model],
                       help="write the CNF encoding plus size statistics")
    p.add_argument("--out", required=True, help="DIMACS output path")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("explain", parents=[model],
                       help="per-instance minimal sufficient feature sets")
    p.add_argument("--data", required=True, help="instances CSV")
    p.add_argument("--out", help="output JSONL path (default: stdout)")
    p.add_argument("--order", choices=("index", "margin"), default="index",
                   help="feature processing order for the deletion loop")
    p.add_argument("--instances", default="all",
                   help='row selector: "all", "i,j,k", or "a-b" (inclusive)')
    _jobs_arg(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("class-explain", parents=[model],
                       help="aggregate per-class feature intervals")
    p.add_argument("--data", required=True, help="training instances CSV")
    p.add_argument("--out", required=True, help="class-explanation JSON path")
    p.add_argument("--order", choices=("index", "margin"), default="index")
    p.add_argument("--interval", choices=("quantile", "cluster"),
                   default="quantile", help="interval summarization method")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="quantile trim level (quantile method)")
    _jobs_arg(p)
    p.set_defaults(func=cmd_class_explain)

    adv = sub.add_parser("adv", help="adversarial generation and detection")
    advsub = adv.add_subparsers(dest="adv_command", required=True)

    p = advsub.add_parser("gen", parents=[model],
                          help="generate adversarial perturbations")
    p.add_argument("--data", required=True, help="instances CSV")
    p.add_argument("--class-expl", required=True,
                   help="class-explanation JSON artifact")
    p.add_argument("--out", required=True, help="per-sample CSV path")
    p.add_argument("--attack", choices=("interval", "witness"),
                   default="interval")
    p.add_argument("--full-free", action="store_true",
                   help="witness mode: retry with every feature freed")
    p.add_argument("--adv-data",
                   help="also write successful perturbed rows as a dataset CSV")
    _jobs_arg(p)
    p.set_defaults(func=cmd_adv_gen)

    p = advsub.add_parser("detect", parents=[model],
                          help="score instances for adversarial likelihood")
    p.add_argument("--data", required=True, help="instances CSV")
    p.add_argument("--class-expl", required=True)
    p.add_argument("--out", required=True, help="per-instance CSV path")
    p.add_argument("--tau", type=float, default=0.5,
                   help="inclusive flagging threshold on s_adv")
    p.add_argument("--min-frequency", type=float, default=0.0,
                   help="ignore class-profile features below this frequency")
    _jobs_arg(p)
    p.set_defaults(func=cmd_adv_detect)

    p = advsub.add_parser("eval", parents=[model],
                          help="attack every row, then detect the successes")
    p.add_argument("--data", required=True, help="instances CSV")
    p.add_argument("--class-expl", required=True)
    p.add_argument("--out", required=True, help="per-sample CSV path")
    p.add_argument("--attack", choices=("interval", "witness"),
                   default="interval")
    p.add_argument("--full-free", action="store_true")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--min-frequency", type=float, default=0.0)
    p.add_argument("--include-clean", action="store_true",
                   help="also report the false-positive rate on clean rows")
    _jobs_arg(p)
    p.set_defaults(func=cmd_adv_eval)

    p = sub.add_parser("metrics", parents=[model],
                       help="rank agreement against external attributions")
    p.add_argument("--data", required=True, help="instances CSV")
    p.add_argument("--rankings", required=True,
                   help="external rankings file (JSON or wide CSV)")
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.add_argument("--order", choices=("index", "margin"), default="index")
    p.add_argument("--rbo-p", type=float, default=0.9,
                   help="rank-biased overlap persistence")
    _jobs_arg(p)
    p.set_defaults(func=cmd_metrics)

    return parser


# ---------------------------------------------------------------------------
# Shared helpers


def _scale_of(args) -> int:
    if not 0 <= args.scale <= 12:
        raise ValueError("--scale exponent must be in [0, 12]")
    return 10 ** args.scale


def _load(args):
    ensemble = load_model(args.model, args.format)
    return ensemble, encode_ensemble(ensemble)


def _load_data(args, feature_space) -> Dataset:
    data, _ = load_dataset_csv(args.data, feature_space)
    if len(data) == 0:
        raise ValueError(f"dataset {args.data} has no rows")
    return data


def _select_rows(selector: str, n: int) -> list[int]:
    if selector == "all":
        return list(range(n))
    if "-" in selector and "," not in selector:
        a, _, b = selector.partition("-")
        picked = list(range(int(a), int(b) + 1))
    else:
        picked = [int(tok) for tok in selector.split(",") if tok.strip() != ""]
    for i in picked:
        if not 0 <= i < n:
            raise ValueError(f"instance {i} out of range [0, {n})")
    return picked


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _open_out(path: str):
    return open(path, "w", encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# Commands


def cmd_encode(args) -> int:
    ensemble, encoded = _load(args)
    with _open_out(args.out) as fh:
        fh.write(to_dimacs(encoded))
    _emit_json({
        "atoms": encoded.num_vars,
        "threshold_atoms": encoded.num_atoms,
        "paths": encoded.num_path_literals,
        "clauses": len(encoded.clauses),
        "features": ensemble.num_features,
        "trees": len(ensemble.trees),
        "out": args.out,
    })
    return 0


def cmd_explain(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    picked = _select_rows(args.instances, len(data))
    explanations = explain_dataset(encoded, data.x[picked],
                                   order_mode=args.order,
                                   scale=_scale_of(args), jobs=args.jobs)
    # Re-key worker indices (positions in the picked subset) to row indices.
    explanations = [
        dataclasses.replace(e, instance_index=picked[e.instance_index])
        for e in explanations
    ]
    if args.out:
        with _open_out(args.out) as fh:
            write_explanations_jsonl(fh, explanations, ensemble.feature_space)
    else:
        write_explanations_jsonl(sys.stdout, explanations,
                                 ensemble.feature_space)
    return 0


def cmd_class_explain(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    explanations = explain_dataset(encoded, data, order_mode=args.order,
                                   scale=_scale_of(args), jobs=args.jobs)
    class_expls = build_class_explanations(
        explanations, ensemble.num_output_classes, method=args.interval,
        alpha=args.alpha)
    with _open_out(args.out) as fh:
        write_class_explanations(fh, class_expls, ensemble.feature_space)
    _emit_json({
        "classes": [
            {"class": ce.class_index, "population": ce.population,
             "features": len(ce.intervals)}
            for ce in class_expls
        ],
        "instances": len(data),
        "interval": args.interval,
        "out": args.out,
    })
    return 0


def _load_class_expls(args, feature_space):
    with open(args.class_expl, "r", encoding="utf-8") as fh:
        return read_class_explanations(fh, feature_space)


def cmd_adv_gen(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    class_expls = _load_class_expls(args, ensemble.feature_space)
    report, rows = evaluate_attack(
        encoded, class_expls, data, mode=args.attack, scale=_scale_of(args),
        full_free=args.full_free, jobs=args.jobs)
    with _open_out(args.out) as fh:
        attack_rows_to_csv(fh, rows, ensemble.feature_space.names)
    if args.adv_data:
        perturbed = [r.result.perturbed for r in rows if r.result is not None]
        matrix = (np.array(perturbed, dtype=np.float64) if perturbed
                  else np.zeros((0, ensemble.num_features)))
        save_dataset_csv(Dataset(x=matrix), ensemble.feature_space,
                         args.adv_data)
    report.pop("detection", None)  # gen stage reports generation only
    _emit_json(report)
    return 0


def cmd_adv_detect(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    class_expls = _load_class_expls(args, ensemble.feature_space)
    results = detect_dataset(encoded, class_expls, data,
                             scale=_scale_of(args),
                             min_frequency=args.min_frequency, jobs=args.jobs)
    flagged = [classify_adversarial(r, tau=args.tau) for r in results]
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", "class", "n", "d", "s_adv", "flagged",
                         "note"])
        for i, (res, flag) in enumerate(zip(results, flagged)):
            writer.writerow([i, res.predicted_class, res.n, res.d,
                             repr(res.s_adv), int(flag), res.note or ""])
    _emit_json({
        "instances": len(results),
        "flagged": sum(map(int, flagged)),
        "flagged_rate": sum(map(int, flagged)) / len(results),
        "tau": args.tau,
        "out": args.out,
    })
    return 0


def cmd_adv_eval(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    class_expls = _load_class_expls(args, ensemble.feature_space)
    report, rows = evaluate_attack(
        encoded, class_expls, data, mode=args.attack, scale=_scale_of(args),
        tau=args.tau, full_free=args.full_free,
        min_frequency=args.min_frequency, include_clean=args.include_clean,
        jobs=args.jobs)
    with _open_out(args.out) as fh:
        attack_rows_to_csv(fh, rows, ensemble.feature_space.names)
    _emit_json(report)
    return 0


def cmd_metrics(args) -> int:
    ensemble, encoded = _load(args)
    data = _load_data(args, ensemble.feature_space)
    scale = _scale_of(args)
    runs = []
    for _ in range(2):  # two independent passes back the consistency figure
        explanations = explain_dataset(encoded, data, order_mode=args.order,
                                       scale=scale, jobs=args.jobs)
        runs.append([formal_ranking(e, ensemble.feature_space)
                     for e in explanations])
    external_map = read_rankings(args.rankings, ensemble.feature_space)
    wanted = set(range(len(data)))
    if set(external_map) != wanted:
        raise ValueError(
            "rankings file instances do not match the dataset rows "
            f"(got {len(external_map)} ids, want 0..{len(data) - 1})")
    external = [external_map[i] for i in range(len(data))]
    rows = compare_rankings(runs[0], external, p=args.rbo_p)
    with _open_out(args.out) as fh:
        write_metrics_csv(fh, rows)
    summary = {m: aggregate([r[m] for r in rows])
               for m in ("spearman", "kendall_tau", "rbo")}
    summary["consistency"] = consistency(runs[0], runs[1])
    summary["rbo_p"] = args.rbo_p
    summary["out"] = args.out
    _emit_json(summary)
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TreeLogicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
