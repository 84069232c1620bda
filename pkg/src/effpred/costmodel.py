"""Annotation/training cost comparison of budget-selection strategies.

Three strategies are simulated against a ground-truth required budget on the
discrete ladder:

* ``incremental``: annotate and fine-tune at every ladder step until the
  requirement is met. Never wastes annotation; pays extra training runs.
* ``maximum``: annotate the top rung once. Never retrains; wastes the
  annotation gap.
* ``predicted_first``: fine-tune at the predicted budget first; on an
  underestimate, resume the incremental ladder from there (annotations are
  reused, so underestimates waste no annotation).

Costs are symbolic: extra annotation in units of the per-example cost A,
extra training in whole runs (units of the per-run cost C).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError

DEFAULT_LADDER = (50, 100, 200, 500, 1000, 2500, 5000)

STRATEGIES = ("incremental", "maximum", "predicted_first")


@dataclass(frozen=True)
class CostParams:
    annotation_cost: float = 1.0
    training_cost: float = 1.0
    ladder: Sequence[int] = DEFAULT_LADDER

    def __post_init__(self):
        ladder = list(self.ladder)
        if any(a >= b for a, b in zip(ladder, ladder[1:])) or not ladder:
            raise ValidationError("ladder must be non-empty and strictly ascending")
        if self.annotation_cost < 0 or self.training_cost < 0:
            raise ValidationError("costs must be non-negative")


@dataclass(frozen=True)
class CostReport:
    strategy: str
    extra_annotation: float  # units of A
    extra_training_runs: int  # units of C


def simulate(
    strategy: str,
    required: int,
    predicted: Optional[int] = None,
    params: CostParams = CostParams(),
) -> CostReport:
    """Extra cost of one strategy on one task, relative to the single ideal
    run at the required budget."""
    ladder = list(params.ladder)
    if required not in ladder:
        raise ValidationError(f"required budget {required} not on the ladder")
    ir = ladder.index(required)

    if strategy == "incremental":
        # Runs at every rung up to and including the requirement.
        return CostReport(strategy, 0.0, ir)
    if strategy == "maximum":
        return CostReport(strategy, float(ladder[-1] - required), 0)
    if strategy == "predicted_first":
        if predicted is None or predicted not in ladder:
            raise ValidationError(f"predicted budget {predicted} not on the ladder")
        ip = ladder.index(predicted)
        if predicted >= required:
            return CostReport(strategy, float(predicted - required), 0)
        # Underestimate: continue up the ladder from the predicted rung,
        # reusing already-annotated examples at each step.
        return CostReport(strategy, 0.0, ir - ip)
    raise ValidationError(f"unknown strategy {strategy!r}")


def aggregate(reports):
    """Per-strategy arithmetic means of both extras."""
    reports = list(reports)
    if not reports:
        raise ValidationError("no cost reports to aggregate")
    out = {}
    for strategy in STRATEGIES:
        rows = [r for r in reports if r.strategy == strategy]
        if rows:
            out[strategy] = {
                "extra_annotation": sum(r.extra_annotation for r in rows) / len(rows),
                "extra_training_runs": sum(r.extra_training_runs for r in rows) / len(rows),
            }
    return out
