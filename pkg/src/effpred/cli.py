"""Command-line surface for the data-efficiency prediction pipeline.

Subcommands: confidence, metric, curve, fit, eval, predict, cost.
Common flags: --config PATH (simple KEY=value file), --seed, --out, --format.
Flag values override config-file values. Every report embeds the fully
resolved configuration for provenance; identical inputs produce
byte-identical reports. ``EFFPRED_THREADS`` caps internal parallelism
(0 = auto).
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Tuple

from . import confidence, costmodel, curves, gradstore, predictor, reportio, similarity
from .errors import EffpredError, ValidationError

DEFAULT_LADDER = costmodel.DEFAULT_LADDER


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    t: float = 0.1
    sample_size: int = 32
    metric: str = "cos_low"
    curve_kind: str = "power"
    n_max: int = 5000
    ladder: Tuple[int, ...] = DEFAULT_LADDER
    confidence_method: str = "avg_prob"
    format: str = "json"


_CONFIG_PARSERS = {
    "seed": int,
    "t": float,
    "sample_size": int,
    "metric": str,
    "curve_kind": str,
    "n_max": int,
    "ladder": lambda s: tuple(int(v) for v in s.replace(",", " ").split()),
    "confidence_method": str,
    "format": str,
}


def load_config_file(path) -> dict:
    """Parse KEY=value lines; '#' starts a comment, blank lines are skipped."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected KEY=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _CONFIG_PARSERS:
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value.strip())
        except ValueError as err:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {err}")
    return values


def resolve_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = replace(config, **load_config_file(args.config))
    overrides = {}
    for key in _CONFIG_PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            overrides[key] = _CONFIG_PARSERS[key](flag) if isinstance(flag, str) else flag
    return replace(config, **overrides)


def config_dict(config: RunConfig) -> dict:
    out = asdict(config)
    out["ladder"] = list(out["ladder"])
    return out


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_scores(path, method):
    with open(path, encoding="utf-8") as fh:
        head = fh.read(2048)
        fh.seek(0)
        # Accept either raw token-probability records or precomputed scores.
        if '"token_probs"' in head:
            records = confidence.read_records_jsonl(fh)
            return [confidence.score(r, method) for r in records]
        return confidence.read_scores_jsonl(fh)


def cmd_confidence(args, config):
    with open(args.input, encoding="utf-8") as fh:
        records = confidence.read_records_jsonl(fh)
    scores = [confidence.score(r, config.confidence_method) for r in records]
    out = _out_dir(args)
    with open(out / "confidence.jsonl", "w", encoding="utf-8") as fh:
        confidence.write_scores_jsonl(scores, fh)
    return 0


def cmd_metric(args, config):
    dump = gradstore.load_dump(args.grdx)
    scores = _load_scores(args.confidence, config.confidence_method)
    explicit_t = args.t is not None or config.metric == "cos_low"
    value = similarity.task_metric(
        args.task_id,
        dump,
        scores,
        config.metric,
        t=config.t if explicit_t else None,
        sample_size=config.sample_size,
        seed=config.seed,
    )
    report = {
        "task_id": value.task_id,
        "metric": value.metric,
        "value": value.value,
        "sample_size": value.sample_size,
        "t": value.t,
        "seed": value.seed,
        "config": config_dict(config),
    }
    out = _out_dir(args)
    reportio.write_json(report, out / "metric.json")
    if config.format == "csv":
        reportio.write_csv(
            ["task_id", "metric", "value", "sample_size", "t", "seed"],
            [[value.task_id, value.metric, value.value, value.sample_size, value.t, value.seed]],
            out / "metric.csv",
        )
    return 0


def cmd_curve(args, config):
    with open(args.measurements, encoding="utf-8") as fh:
        m = curves.read_measurements(fh)
    n_max = args.n_max if args.n_max is not None else None
    curve = curves.build_curve(m, n_max=n_max)
    out = _out_dir(args)
    reportio.write_csv(
        ["n", "x", "f"],
        [[int(n), float(x), float(f)] for n, x, f in zip(curve.budgets, curve.x, curve.f)],
        out / "curve.csv",
    )
    reportio.write_json(
        {
            "task_id": curve.task_id,
            "auc": curve.auc,
            "max_attainable": curve.max_attainable,
            "zero_shot_acc": m.zero_shot_acc,
            "config": config_dict(config),
        },
        out / "curve_summary.json",
    )
    return 0


def _load_table(path):
    with open(path, encoding="utf-8") as fh:
        rows = json.load(fh)
    try:
        return [(str(r["task_id"]), float(r["d"]), float(r["auc"])) for r in rows]
    except (KeyError, TypeError) as err:
        raise ValidationError(f"bad metric/AUC table: {err}")


def cmd_fit(args, config):
    table = _load_table(args.table)
    model = predictor.fit(
        [(d, a) for _, d, a in table],
        metric=config.metric,
        task_ids=[t for t, _, _ in table],
    )
    out = _out_dir(args)
    reportio.write_json(
        {
            "c": model.c,
            "intercept": model.intercept,
            "metric": model.metric,
            "training_task_ids": list(model.training_task_ids),
            "diagnostics": model.diagnostics,
            "config": config_dict(config),
        },
        out / "regression.json",
    )
    return 0


def cmd_eval(args, config):
    table = _load_table(args.table)
    result = predictor.hold_one_out(table, metric=config.metric)
    per_task = [
        {k: p[k] for k in ("task_id", "metric", "d", "auc_true", "auc_pred", "abs_error")}
        for p in result.predictions
    ]
    out = _out_dir(args)
    reportio.write_json(
        {
            "per_task": per_task,
            "aggregate": {
                "mean_abs_error": result.mean_abs_error,
                "spearman": result.spearman,
                "p_value": result.p_value,
            },
            "excluded_task_ids": list(result.excluded_task_ids),
            "base_max_mean_error": predictor.base_max_error([a for _, _, a in table]),
            "config": config_dict(config),
        },
        out / "eval.json",
    )
    if config.format == "csv":
        reportio.write_csv(
            ["task_id", "metric", "d", "auc_true", "auc_pred", "abs_error"],
            [[p["task_id"], p["metric"], p["d"], p["auc_true"], p["auc_pred"], p["abs_error"]] for p in per_task],
            out / "eval.csv",
        )
    return 0


def cmd_predict(args, config):
    if args.d is not None:
        d = float(args.d)
        task_id = args.task_id or ""
    else:
        if not (args.grdx and args.confidence):
            raise ValidationError("predict needs either --d or --grdx with --confidence")
        dump = gradstore.load_dump(args.grdx)
        scores = _load_scores(args.confidence, config.confidence_method)
        value = similarity.task_metric(
            args.task_id or "",
            dump,
            scores,
            config.metric,
            t=config.t if config.metric == "cos_low" else None,
            sample_size=config.sample_size,
            seed=config.seed,
        )
        d = value.value
        task_id = value.task_id

    if args.model:
        with open(args.model, encoding="utf-8") as fh:
            obj = json.load(fh)
        model = predictor.RegressionModel(
            c=float(obj["c"]), intercept=float(obj["intercept"]), metric=obj.get("metric", config.metric)
        )
    elif args.c is not None and args.intercept is not None:
        model = predictor.RegressionModel(c=args.c, intercept=args.intercept, metric=config.metric)
    else:
        raise ValidationError("predict needs --model or both --c and --intercept")

    auc_prime = predictor.predict_auc(model, d)
    prediction = predictor.required_budget(
        auc_prime, args.target, n_max=config.n_max, ladder=config.ladder, task_id=task_id
    )
    out = _out_dir(args)
    reportio.write_json(
        {
            "task_id": prediction.task_id,
            "metric": model.metric,
            "d": d,
            "auc_prime": prediction.auc_prime,
            "target_performance": prediction.target_performance,
            "n_required": prediction.n_required,
            "n_snapped": prediction.n_snapped,
            "max_budget": prediction.max_budget,
            "curve_kind": config.curve_kind,
            "config": config_dict(config),
        },
        out / "prediction.json",
    )
    return 0


def cmd_cost(args, config):
    with open(args.requirements, encoding="utf-8") as fh:
        rows = json.load(fh)
    params = costmodel.CostParams(ladder=config.ladder)
    by_level = {}
    for row in rows:
        try:
            level = row["desired_performance"]
            required = int(row["required"])
            predicted = int(row["predicted"])
        except (KeyError, TypeError) as err:
            raise ValidationError(f"bad requirements row: {err}")
        reports = [
            costmodel.simulate("incremental", required, params=params),
            costmodel.simulate("maximum", required, params=params),
            costmodel.simulate("predicted_first", required, predicted, params=params),
        ]
        by_level.setdefault(level, []).extend(reports)

    header = ["desired_performance"]
    for strategy in costmodel.STRATEGIES:
        header += [f"{strategy}_extra_annotation", f"{strategy}_extra_training_runs"]
    table_rows = []
    for level in sorted(by_level):
        agg = costmodel.aggregate(by_level[level])
        row = [level]
        for strategy in costmodel.STRATEGIES:
            row += [agg[strategy]["extra_annotation"], agg[strategy]["extra_training_runs"]]
        table_rows.append(row)
    out = _out_dir(args)
    reportio.write_csv(header, table_rows, out / "cost.csv")
    reportio.write_json(
        {
            "levels": {
                str(level): costmodel.aggregate(by_level[level]) for level in sorted(by_level)
            },
            "config": config_dict(config),
        },
        out / "cost.json",
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="effpred")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="KEY=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default: cwd)")
        p.add_argument("--format", choices=["json", "csv"])

    p = sub.add_parser("confidence", help="score confidence from token probabilities")
    common(p)
    p.add_argument("--input", required=True, help="JSONL of {example_id, token_probs}")
    p.add_argument("--confidence-method", dest="confidence_method", choices=confidence.METHODS)
    p.set_defaults(func=cmd_confidence)

    p = sub.add_parser("metric", help="compute a task-difficulty metric")
    common(p)
    p.add_argument("--grdx", required=True)
    p.add_argument("--confidence", required=True, help="confidence JSONL (records or scores)")
    p.add_argument("--task-id", required=True)
    p.add_argument("--metric", choices=similarity.METRICS)
    p.add_argument("--t", type=float)
    p.add_argument("--sample-size", dest="sample_size", type=int)
    p.add_argument("--confidence-method", dest="confidence_method", choices=confidence.METHODS)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("curve", help="build a data-efficiency curve")
    common(p)
    p.add_argument("--measurements", required=True)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("fit", help="fit the metric-to-AUC regression")
    common(p)
    p.add_argument("--table", required=True, help="JSON list of {task_id, d, auc}")
    p.add_argument("--metric", choices=similarity.METRICS)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="hold-one-out evaluation")
    common(p)
    p.add_argument("--table", required=True)
    p.add_argument("--metric", choices=similarity.METRICS)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict the budget for a target performance")
    common(p)
    p.add_argument("--d", type=float, help="precomputed metric value")
    p.add_argument("--grdx")
    p.add_argument("--confidence")
    p.add_argument("--task-id")
    p.add_argument("--model", help="regression.json from `effpred fit`")
    p.add_argument("--c", type=float)
    p.add_argument("--intercept", type=float)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--metric", choices=similarity.METRICS)
    p.add_argument("--t", type=float)
    p.add_argument("--sample-size", dest="sample_size", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--curve-kind", dest="curve_kind", choices=["power", "piecewise_linear"])
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cost", help="strategy cost comparison")
    common(p)
    p.add_argument("--requirements", required=True,
                   help="JSON list of {task_id, desired_performance, required, predicted}")
    p.set_defaults(func=cmd_cost)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return args.func(args, config)
    except EffpredError as err:
        sys.stderr.write(json.dumps(err.as_dict()) + "\n")
        return err.code
    except (OSError, json.JSONDecodeError) as err:
        sys.stderr.write(json.dumps({"code": 2, "message": str(err), "context": {}}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
