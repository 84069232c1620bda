"""Data-efficiency curves from raw fine-tuning measurements.

A task's raw accuracies over an ascending budget ladder are made monotone
with a running maximum, normalized so zero-shot maps to 0 and the maximum
attainable accuracy to 1, and placed on a log2 budget axis
x(n) = log2(n+1) / log2(N+1). The task's data efficiency is the trapezoidal
area under that curve.
"""

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, ValidationError


@dataclass(frozen=True)
class TaskMeasurements:
    task_id: str
    budgets: Sequence[int]
    raw_acc: Sequence[float]
    zero_shot_acc: float
    human_level_acc: Optional[float] = None

    def __post_init__(self):
        budgets = list(self.budgets)
        acc = list(self.raw_acc)
        if len(budgets) != len(acc):
            raise ValidationError("budgets and raw_acc must align")
        if len(budgets) < 2:
            raise ValidationError("need at least two measured budgets")
        if budgets[0] != 0:
            raise ValidationError("budgets must start at 0 (zero-shot)")
        if any(b >= c for b, c in zip(budgets, budgets[1:])):
            raise ValidationError("budgets must be strictly ascending")
        if any(not 0.0 <= a <= 1.0 for a in acc):
            raise ValidationError("raw accuracies must lie in [0, 1]")
        if acc[0] != self.zero_shot_acc:
            raise ValidationError("zero_shot_acc must equal raw_acc at budget 0")
        if self.human_level_acc is not None and not 0.0 <= self.human_level_acc <= 1.0:
            raise ValidationError("human_level_acc must lie in [0, 1]")


@dataclass
class EfficiencyCurve:
    task_id: str
    budgets: np.ndarray  # n values, ascending
    x: np.ndarray        # log axis positions, x[0]=0, x[-1]=1
    f: np.ndarray        # normalized accuracy, non-decreasing
    max_attainable: float
    auc: Optional[float] = None


def max_attainable(m: TaskMeasurements) -> float:
    """Larger of human-level accuracy (if known) and the best observed accuracy."""
    best = max(m.raw_acc)
    if m.human_level_acc is not None:
        return max(m.human_level_acc, best)
    return best


def monotone_envelope(raw_acc):
    """Running maximum: output[i] = max(raw_acc[0..i])."""
    raw_acc = np.asarray(raw_acc, dtype=float)
    if raw_acc.size == 0:
        raise ValidationError("empty accuracy sequence")
    return np.maximum.accumulate(raw_acc)


def log_axis(budgets, n_max):
    """x(n) = log2(n+1) / log2(N+1); the +1 offset pins budget 0 at x=0."""
    budgets = np.asarray(budgets, dtype=float)
    return np.log2(budgets + 1.0) / np.log2(n_max + 1.0)


def normalize(m: TaskMeasurements, n_max=None) -> EfficiencyCurve:
    """Build the normalized curve (without its AUC).

    If ``n_max`` exceeds the last measured budget, the final envelope value
    is held flat out to x=1 (tasks whose labeled data runs out early).
    """
    ceiling = max_attainable(m)
    if ceiling <= m.zero_shot_acc:
        raise DegenerateInputError(
            f"task {m.task_id}: max attainable {ceiling} does not exceed "
            f"zero-shot {m.zero_shot_acc}; curve undefined"
        )
    budgets = np.asarray(m.budgets, dtype=np.int64)
    env = monotone_envelope(m.raw_acc)
    if n_max is None:
        n_max = int(budgets[-1])
    elif n_max < budgets[-1]:
        raise ValidationError(f"n_max={n_max} below last measured budget {budgets[-1]}")
    elif n_max > budgets[-1]:
        budgets = np.append(budgets, n_max)
        env = np.append(env, env[-1])
    f = np.clip((env - m.zero_shot_acc) / (ceiling - m.zero_shot_acc), 0.0, 1.0)
    return EfficiencyCurve(
        task_id=m.task_id,
        budgets=budgets,
        x=log_axis(budgets, n_max),
        f=f,
        max_attainable=ceiling,
    )


_trapezoid = getattr(np, "trapezoid", np.trapz)


def auc(curve: EfficiencyCurve) -> float:
    """Trapezoidal area under the piecewise-linear curve over x in [0, 1]."""
    return float(_trapezoid(curve.f, curve.x))


def build_curve(m: TaskMeasurements, n_max=None) -> EfficiencyCurve:
    curve = normalize(m, n_max=n_max)
    curve.auc = auc(curve)
    return curve


def read_measurements(stream) -> TaskMeasurements:
    """Parse a task measurement JSON file."""
    obj = json.load(stream)
    try:
        return TaskMeasurements(
            task_id=str(obj["task_id"]),
            budgets=[int(b) for b in obj["budgets"]],
            raw_acc=[float(a) for a in obj["raw_acc"]],
            zero_shot_acc=float(obj["zero_shot_acc"]),
            human_level_acc=(
                float(obj["human_level_acc"])
                if obj.get("human_level_acc") is not None
                else None
            ),
        )
    except (KeyError, TypeError) as err:
        raise ValidationError(f"bad measurements file: {err}")
