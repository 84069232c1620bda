"""Metric-to-data-efficiency regression and budget recommendation.

A task-difficulty metric value d maps to a predicted efficiency AUC' through
an OLS line AUC' = c*d + I. The predicted AUC' instantiates a parametric
curve (power family by default) whose analytic area equals AUC', and that
curve is inverted to recommend the number of examples to annotate for a
target normalized performance.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .curves import EfficiencyCurve
from .errors import DomainError, SingularFitError, ValidationError

DEFAULT_LADDER = (50, 100, 200, 500, 1000, 2500, 5000)

# Predicted AUC is clamped into [EPS, 1-EPS] before curve instantiation; the
# power exponent and its inverse blow up at 0 and 1.
AUC_EPS = 0.01


@dataclass
class RegressionModel:
    c: float
    intercept: float
    metric: str
    training_task_ids: tuple = ()
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CurveFamily:
    kind: str  # "power" | "piecewise_linear"
    auc_prime: float
    evaluate: Callable = field(compare=False)


@dataclass(frozen=True)
class BudgetPrediction:
    task_id: str
    auc_prime: float
    target_performance: float
    n_required: int
    n_snapped: int
    max_budget: int


def fit(pairs, metric="cos_low", task_ids=()) -> RegressionModel:
    """Ordinary least squares of AUC on the metric value."""
    pairs = list(pairs)
    if len(pairs) < 2:
        raise ValidationError(f"need >= 2 (metric, auc) pairs, got {len(pairs)}")
    d = np.array([p[0] for p in pairs], dtype=float)
    a = np.array([p[1] for p in pairs], dtype=float)
    if np.all(d == d[0]):
        raise SingularFitError("all metric values equal; regression is singular")
    res = stats.linregress(d, a)
    resid = a - (res.slope * d + res.intercept)
    diagnostics = {
        "p_value": float(res.pvalue),
        "mean_abs_error": float(np.mean(np.abs(resid))),
    }
    if len(pairs) >= 3 and not (np.all(a == a[0])):
        diagnostics["spearman"] = float(stats.spearmanr(d, a).statistic)
    return RegressionModel(
        c=float(res.slope),
        intercept=float(res.intercept),
        metric=metric,
        training_task_ids=tuple(task_ids),
        diagnostics=diagnostics,
    )


def predict_auc(model: RegressionModel, d) -> float:
    """c*d + I, clamped into [0.01, 0.99]."""
    return float(np.clip(model.c * d + model.intercept, AUC_EPS, 1.0 - AUC_EPS))


@dataclass
class HoldOneOutResult:
    predictions: list  # per-task dicts
    mean_abs_error: float
    spearman: float
    p_value: float
    excluded_task_ids: tuple = ()


def hold_one_out(tasks, metric="cos_low") -> HoldOneOutResult:
    """Leave-one-task-out evaluation of the metric->AUC regression.

    For each task the line is fitted on the other tasks only; the held-out
    AUC is never read during that fold. Spearman correlation and the slope
    p-value are computed once on the full (d, auc) table.
    """
    tasks = list(tasks)
    if len(tasks) < 3:
        raise ValidationError(f"need >= 3 tasks for hold-one-out, got {len(tasks)}")
    d_all = np.array([t[1] for t in tasks], dtype=float)
    a_all = np.array([t[2] for t in tasks], dtype=float)

    predictions = []
    excluded = []
    for k, (task_id, d_k, auc_k) in enumerate(tasks):
        rest = [(t[1], t[2]) for i, t in enumerate(tasks) if i != k]
        try:
            model = fit(rest, metric=metric)
        except SingularFitError:
            excluded.append(task_id)
            continue
        pred = predict_auc(model, d_k)
        predictions.append(
            {
                "task_id": task_id,
                "metric": metric,
                "d": float(d_k),
                "auc_true": float(auc_k),
                "auc_pred": pred,
                "abs_error": abs(pred - float(auc_k)),
                "fold_c": model.c,
                "fold_intercept": model.intercept,
            }
        )
    if not predictions:
        raise SingularFitError("every fold was singular")

    full = stats.linregress(d_all, a_all)
    spearman = float(stats.spearmanr(d_all, a_all).statistic)
    return HoldOneOutResult(
        predictions=predictions,
        mean_abs_error=float(np.mean([p["abs_error"] for p in predictions])),
        spearman=spearman,
        p_value=float(full.pvalue),
        excluded_task_ids=tuple(excluded),
    )


def base_max_error(aucs) -> float:
    """Baseline that predicts AUC = 0 for every task (no gain before the
    maximum budget); returns the mean absolute error of that prediction."""
    aucs = np.asarray(list(aucs), dtype=float)
    if aucs.size == 0:
        raise ValidationError("empty AUC sequence")
    return float(np.mean(np.abs(aucs)))


def instantiate_curve(kind, auc_prime) -> CurveFamily:
    """Parametric curve on [0,1]x[0,1] whose analytic area is ``auc_prime``."""
    if not 0.0 < auc_prime < 1.0:
        raise DomainError(f"auc_prime={auc_prime} outside (0, 1)")
    if kind == "power":
        p = (1.0 - auc_prime) / auc_prime

        def evaluate(x, p=p):
            return np.asarray(x, dtype=float) ** p

    elif kind == "piecewise_linear":
        if auc_prime >= 0.5:
            slope = 1.0 / (2.0 * (1.0 - auc_prime))

            def evaluate(x, slope=slope):
                return np.minimum(slope * np.asarray(x, dtype=float), 1.0)

        else:
            inv = 1.0 / (2.0 * auc_prime)

            def evaluate(x, inv=inv):
                return np.maximum(inv * (np.asarray(x, dtype=float) - 1.0) + 1.0, 0.0)

    else:
        raise ValidationError(f"unknown curve kind {kind!r}")
    return CurveFamily(kind=kind, auc_prime=float(auc_prime), evaluate=evaluate)


def required_budget(
    auc_prime,
    y,
    n_max=5000,
    ladder=DEFAULT_LADDER,
    task_id="",
) -> BudgetPrediction:
    """Invert the power curve: budget needed to reach normalized performance y.

    x_req = y^(AUC'/(1-AUC')); n_required = ceil(2^(x_req*log2(n_max+1)) - 1),
    the exact inverse of the log axis used for measured curves. The snapped
    budget is the smallest ladder value >= n_required, capped at the top rung.
    """
    if not 0.0 < y <= 1.0:
        raise DomainError(f"target performance y={y} outside (0, 1]")
    if not 0.0 < auc_prime < 1.0:
        raise DomainError(f"auc_prime={auc_prime} outside (0, 1)")
    x_req = y ** (auc_prime / (1.0 - auc_prime))
    # round before the ceiling so float noise at exact integers (y=1 ->
    # n_max) cannot push the requirement one example high
    n_required = max(1, math.ceil(round(2.0 ** (x_req * math.log2(n_max + 1)) - 1.0, 9)))
    ladder = sorted(ladder)
    n_snapped = ladder[-1]
    for rung in ladder:
        if rung >= n_required:
            n_snapped = rung
            break
    return BudgetPrediction(
        task_id=task_id,
        auc_prime=float(auc_prime),
        target_performance=float(y),
        n_required=int(n_required),
        n_snapped=int(n_snapped),
        max_budget=int(n_max),
    )


def curve_fit_error(predicted: CurveFamily, actual: EfficiencyCurve) -> float:
    """Mean |f_hat - f| over a uniform 1001-point grid, with the measured
    curve linearly interpolated."""
    if len(actual.x) < 2:
        raise ValidationError("measured curve needs >= 2 points")
    grid = np.linspace(0.0, 1.0, 1001)
    f_actual = np.interp(grid, actual.x, actual.f)
    f_pred = predicted.evaluate(grid)
    return float(np.mean(np.abs(f_pred - f_actual)))
