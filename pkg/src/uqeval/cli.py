"""Command-line interface.

Subcommands cover the full pipeline: `synth` writes fixture data,
`decompose` / `edl` / `ddu-fit` / `ddu-score` / `hetnn-loss` produce
scores, `eval` runs one benchmark task, `disentangle` the EU/AU
analytics, and `report` assembles everything into the JSON + CSV report.

Exit codes: 0 success, 1 data error (one machine-parsable line
`uqeval-error: <message>` on stderr), 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ddu as ddu_mod
from . import decomposition as dec
from . import disentangle as dis
from . import edl as edl_mod
from . import formats, hetnn, report, synth
from . import tasks as tasks_mod
from .metrics import DEFAULT_AUAC_STEP, DEFAULT_BINS


class DataError(Exception):
    pass


def _write_text(path, text) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _load_scores(path) -> dec.UncertaintyScores:
    p = str(path)
    if p.endswith(".json"):
        with open(p) as f:
            d = json.load(f)
        return dec.UncertaintyScores(np.asarray(d["values"], dtype=np.float64), d["kind"])
    return formats.read_uqs1(p)


def _write_scores(path, scores: dec.UncertaintyScores) -> None:
    p = str(path)
    if p.endswith(".json"):
        _write_text(p, report.stable_json(
            {"kind": scores.kind, "values": scores.values,
             "negative_cells": scores.negative_cells}))
    else:
        formats.write_uqs1(p, scores)


def _ood_labels(path) -> np.ndarray:
    labels = formats.read_uql1(path)
    if labels.values.shape[1] != 1:
        raise DataError(f"OOD label file must have C=1, got C={labels.values.shape[1]}")
    v = labels.values[:, 0]
    if (v == -1).any():
        raise DataError("OOD labels must be 0 (ID) or 1 (OOD); found -1")
    return v


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        samples=args.samples, classes=args.classes, members=args.members,
        aleatoric_a=args.aleatoric_a, aleatoric_b=args.aleatoric_b,
        epistemic_s=args.epistemic_s, ood_fraction=args.ood_fraction,
        ood_multiplier=args.ood_multiplier,
        label_uncertain_rate=args.uncertain_rate,
        coupled=args.coupled, seed=args.seed,
    )
    data = synth.generate(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats.write_uqb1(out / "preds.uqb1", data.preds.values)
    formats.write_uql1(out / "labels.uql1", data.labels)
    formats.write_uql1(out / "ood_labels.uql1", data.ood_labels)
    report.write_csv(
        out / "factors.csv",
        ["sample", "aleatoric_factor", "epistemic_factor", "ood"],
        [(i, data.aleatoric_factor[i], data.epistemic_factor[i], int(data.ood_labels[i]))
         for i in range(config.samples)],
    )
    print(f"wrote synthetic fixture to {out} (N={config.samples}, C={config.classes}, M={config.members})")
    return 0


def cmd_decompose(args) -> int:
    preds = formats.read_uqb1(args.preds)
    if not isinstance(preds, dec.PredictionTensor):
        raise DataError(f"{args.preds}: decompose needs a probabilities payload (kind 0)")
    scores = dec.decompose(preds, args.kind)
    if args.aggregate != "none":
        scores = dec.aggregate_classes(scores, args.aggregate)
    _write_scores(args.out, scores)
    return 0


def cmd_edl(args) -> int:
    params = formats.read_uqb1(args.params)
    if not isinstance(params, edl_mod.BetaParams):
        raise DataError(f"{args.params}: edl needs a beta-params payload (kind 1)")
    doc = {
        "pu": edl_mod.edl_predictive_uncertainty(params).values,
        "au": edl_mod.edl_aleatoric_uncertainty(params).values,
    }
    eu = edl_mod.edl_epistemic_uncertainty(params)
    doc["eu"] = eu.values
    doc["eu_negative_cells"] = eu.negative_cells
    if args.labels:
        labels = formats.read_uql1(args.labels).values
        if (labels == -1).any():
            raise DataError("EDL loss needs binary labels; resolve -1 upstream")
        terms = edl_mod.beta_edl_loss(params, labels, args.lambda_t)
        doc["loss"] = {
            "squared_error": terms.squared_error,
            "variance_term": terms.variance_term,
            "kl_term": terms.kl_term,
            "lambda_t": terms.lambda_t,
            "total": terms.total,
        }
    _write_text(args.out, report.stable_json(doc))
    return 0


def cmd_ddu_fit(args) -> int:
    features = formats.read_uqf1(args.features)
    labels = formats.read_uql1(args.labels)
    gaussians = ddu_mod.fit_class_gaussians(features, labels.values, jitter=args.jitter)
    _write_text(args.out, report.stable_json(gaussians.to_dict()))
    return 0


def cmd_ddu_score(args) -> int:
    features = formats.read_uqf1(args.features)
    with open(args.gaussians) as f:
        gaussians = ddu_mod.ClassGaussians.from_dict(json.load(f))
    scores, valid = ddu_mod.ddu_score(features, gaussians)
    if not valid.all():
        print(f"unfitted classes scored as invalid: {np.flatnonzero(~valid).tolist()}", file=sys.stderr)
    _write_scores(args.out, scores)
    return 0


def cmd_hetnn_loss(args) -> int:
    logits = formats.read_uqb1(args.logits)
    if not isinstance(logits, hetnn.HetLogits):
        raise DataError(f"{args.logits}: hetnn-loss needs a het-logits payload (kind 2)")
    labels = formats.read_uql1(args.labels).values
    if (labels == -1).any():
        raise DataError("Het-NN loss needs binary labels; resolve -1 upstream")
    loss = hetnn.hetnn_loss(logits, labels, mc_samples=args.mc_samples, seed=args.seed,
                            shared_noise=args.shared_noise)
    doc = {"loss": loss, "mc_samples": args.mc_samples, "seed": args.seed}
    if args.out:
        _write_text(args.out, report.stable_json(doc))
    else:
        print(report.stable_json(doc), end="")
    return 0


_TASK_DEFAULT_KIND = {1: "EU", 2: "AU", 3: "PU", 4: "PU"}


def cmd_eval(args) -> int:
    preds = formats.read_uqb1(args.preds)
    if not isinstance(preds, dec.PredictionTensor):
        raise DataError(f"{args.preds}: eval needs a probabilities payload (kind 0)")
    task = args.task
    kind = args.score_kind or _TASK_DEFAULT_KIND.get(task, "PU")
    bma = dec.bayesian_model_average(preds)

    if task in (5, 6):
        labels = formats.read_uql1(args.labels)
        rep = tasks_mod.task5_task6_calibration(bma, labels, bins=args.bins, mode=args.mode)
        value = rep.macro_ece if task == 5 else rep.macro_mce
        result = tasks_mod.TaskResult(
            task=task, metric="macro_ece" if task == 5 else "macro_mce",
            value=value, score_kind="BMA",
            per_class=rep.per_class_ece if task == 5 else rep.per_class_mce,
            skipped_classes=rep.skipped_classes,
            details={"bins": rep.bins, "mode": rep.mode},
        )
    else:
        per_class = dec.decompose(preds, kind)
        per_sample = dec.aggregate_classes(per_class, args.aggregation)
        if task == 1:
            if not args.ood_labels:
                raise DataError("eval --task 1 requires --ood-labels")
            result = tasks_mod.task1_ood(per_sample, _ood_labels(args.ood_labels))
        elif task == 2:
            result = tasks_mod.task2_uncertainty_labels(per_class, formats.read_uql1(args.labels))
        elif task == 3:
            result = tasks_mod.task3_correctness(per_class, bma, formats.read_uql1(args.labels))
        else:
            result = tasks_mod.task4_abstain(per_sample, bma, formats.read_uql1(args.labels),
                                             step_fraction=args.auac_step)
    doc = {"method": args.method, "result": result.to_dict()}
    if args.out:
        _write_text(args.out, report.stable_json(doc))
    else:
        print(report.stable_json(doc), end="")
    return 0


def cmd_disentangle(args) -> int:
    preds = formats.read_uqb1(args.preds)
    if not isinstance(preds, dec.PredictionTensor):
        raise DataError(f"{args.preds}: disentangle needs a probabilities payload (kind 0)")
    record = dis.eu_au_gap(preds, _ood_labels(args.ood_labels),
                           aggregation=args.aggregation, method=args.method)
    if record.applicable:
        record.rank_corr = dis.uncertainty_rank_correlation(preds, args.aggregation)
    doc = {"method": args.method, "record": record.to_dict()}
    if args.out:
        _write_text(args.out, report.stable_json(doc))
    else:
        print(report.stable_json(doc), end="")
    return 0


def cmd_report(args) -> int:
    results_dir = Path(args.results_dir)
    if not results_dir.is_dir():
        raise DataError(f"{results_dir} is not a directory")
    task_results: dict[str, dict[int, tasks_mod.TaskResult]] = {}
    records: dict[str, dis.DisentanglementRecord] = {}
    for path in sorted(results_dir.glob("*.json")):
        with open(path) as f:
            doc = json.load(f)
        if "result" in doc:
            r = doc["result"]
            result = tasks_mod.TaskResult(
                task=r["task"], metric=r["metric"], value=r["value"],
                score_kind=r["score_kind"], per_class=r.get("per_class", []),
                skipped_classes=r.get("skipped_classes", []), details=r.get("details", {}),
            )
            task_results.setdefault(doc["method"], {})[result.task] = result
        elif "record" in doc:
            r = doc["record"]
            records[doc["method"]] = dis.DisentanglementRecord(
                method=r["method"], auroc_eu=r["auroc_eu"], auroc_au=r["auroc_au"],
                gap=r["gap"], rank_corr=r["rank_corr"], applicable=r["applicable"],
                note=r.get("note", ""),
            )
    overview = dis.overview_aggregate(task_results, records)
    path = report.emit_report(args.out_dir, task_results=task_results,
                              records=records, overview=overview)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqeval", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic fixture with planted uncertainty factors")
    p.add_argument("--samples", "-n", type=int, default=2000)
    p.add_argument("--classes", "-c", type=int, default=14)
    p.add_argument("--members", "-m", type=int, default=5)
    p.add_argument("--aleatoric-a", type=float, default=1.0)
    p.add_argument("--aleatoric-b", type=float, default=1.0)
    p.add_argument("--epistemic-s", type=float, default=0.5)
    p.add_argument("--ood-fraction", type=float, default=0.5)
    p.add_argument("--ood-multiplier", type=float, default=5.0)
    p.add_argument("--uncertain-rate", type=float, default=0.05)
    p.add_argument("--coupled", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decompose", help="IT decomposition scores from a probability tensor")
    p.add_argument("--preds", required=True)
    p.add_argument("--kind", choices=["PU", "AU", "EU"], default="PU")
    p.add_argument("--aggregate", choices=["none", "mean", "sum", "max"], default="none")
    p.add_argument("--out", required=True, help=".uqs1 or .json")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("edl", help="closed-form EDL uncertainties (and loss, given labels)")
    p.add_argument("--params", required=True, help="UQB1 with beta-params payload")
    p.add_argument("--labels", default="")
    p.add_argument("--lambda-t", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_edl)

    p = sub.add_parser("ddu-fit", help="fit per-class feature Gaussians")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--jitter", type=float, default=ddu_mod.DEFAULT_JITTER)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ddu_fit)

    p = sub.add_parser("ddu-score", help="negative log density scores from fitted Gaussians")
    p.add_argument("--features", required=True)
    p.add_argument("--gaussians", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ddu_score)

    p = sub.add_parser("hetnn-loss", help="Monte-Carlo BCE loss for heteroscedastic logits")
    p.add_argument("--logits", required=True, help="UQB1 with het-logits payload")
    p.add_argument("--labels", required=True)
    p.add_argument("--mc-samples", type=int, default=hetnn.DEFAULT_MC_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shared-noise", action="store_true")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_hetnn_loss)

    p = sub.add_parser("eval", help="run one benchmark task")
    p.add_argument("--task", type=int, choices=[1, 2, 3, 4, 5, 6], required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--labels", default="")
    p.add_argument("--ood-labels", default="")
    p.add_argument("--score-kind", choices=["PU", "AU", "EU"], default="")
    p.add_argument("--aggregation", choices=["mean", "sum", "max"], default="mean")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--mode", choices=["confidence", "positive"], default="confidence")
    p.add_argument("--auac-step", type=float, default=DEFAULT_AUAC_STEP)
    p.add_argument("--method", default="default")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("disentangle", help="EU/AU gap and rank correlation on the OOD task")
    p.add_argument("--preds", required=True)
    p.add_argument("--ood-labels", required=True)
    p.add_argument("--aggregation", choices=["mean", "sum", "max"], default="mean")
    p.add_argument("--method", default="default")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_disentangle)

    p = sub.add_parser("report", help="assemble eval/disentangle outputs into the report")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, dec.ValidationError, formats.FormatError, OSError, json.JSONDecodeError) as exc:
        print(f"uqeval-error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
