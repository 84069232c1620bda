import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effpred.curves import (
    EfficiencyCurve,
    TaskMeasurements,
    auc,
    build_curve,
    log_axis,
    max_attainable,
    monotone_envelope,
    normalize,
    read_measurements,
)
from effpred.errors import DegenerateInputError, ValidationError


def measurements(budgets, acc, human=None, task_id="t"):
    return TaskMeasurements(task_id, budgets, acc, acc[0], human)


def test_max_attainable_examples():
    m = measurements([0, 5000], [0.85, 0.90], human=0.90)
    assert max_attainable(m) == 0.90
    m = measurements([0, 5000], [0.39, 0.74], human=0.92)
    assert max_attainable(m) == 0.92
    m = measurements([0, 5000], [0.50, 0.84])
    assert max_attainable(m) == 0.84


def test_monotone_envelope_examples():
    assert list(monotone_envelope([0.5, 0.7, 0.6, 0.8])) == [0.5, 0.7, 0.7, 0.8]
    assert list(monotone_envelope([0.1, 0.2, 0.9])) == [0.1, 0.2, 0.9]
    assert list(monotone_envelope([0.4, 0.4, 0.4])) == [0.4, 0.4, 0.4]
    env = monotone_envelope([0.5, 0.9, 0.3])
    assert list(monotone_envelope(env)) == list(env)  # idempotent


def test_normalize_midpoint():
    m = measurements([0, 5000], [0.5, 0.75], human=1.0)
    curve = normalize(m)
    assert curve.f[-1] == pytest.approx(0.5)
    assert curve.x[-1] == 1.0
    assert curve.f[0] == 0.0


def test_normalize_flat_task():
    m = measurements([0, 50, 5000], [0.5, 0.5, 0.5], human=1.0)
    curve = build_curve(m)
    assert np.all(curve.f == 0.0)
    assert curve.auc == 0.0


def test_normalize_three_point_fixture():
    m = measurements([0, 50, 5000], [0.5, 1.0, 1.0], human=1.0)
    curve = normalize(m)
    x50 = math.log2(51) / math.log2(5001)
    np.testing.assert_allclose(curve.x, [0.0, x50, 1.0], atol=1e-12)
    np.testing.assert_allclose(curve.f, [0.0, 1.0, 1.0], atol=1e-12)
    assert x50 == pytest.approx(0.4616, abs=1e-4)


def test_degenerate_task_rejected():
    m = measurements([0, 5000], [0.9, 0.9])
    with pytest.raises(DegenerateInputError):
        normalize(m)


def test_auc_three_point_fixture():
    m = measurements([0, 50, 5000], [0.5, 1.0, 1.0], human=1.0)
    curve = build_curve(m)
    assert curve.auc == pytest.approx(0.7692, abs=1e-4)
    # cross-check against fine-grained numeric integration
    grid = np.linspace(0.0, 1.0, 200_001)
    fine = np.trapezoid(np.interp(grid, curve.x, curve.f), grid)
    assert curve.auc == pytest.approx(fine, abs=1e-9)


def test_auc_limiting_case():
    m = measurements([0, 1, 5000], [0.0, 1.0, 1.0], human=1.0)
    curve = build_curve(m)
    x1 = math.log2(2) / math.log2(5001)
    assert curve.auc == pytest.approx(1.0 - x1 / 2.0, abs=1e-12)


def test_extrapolation_holds_last_value():
    m = measurements([0, 50, 800], [0.25, 0.9, 1.0], human=1.0)
    curve = build_curve(m, n_max=5000)
    assert curve.budgets[-1] == 5000
    assert curve.x[-1] == 1.0
    assert curve.f[-1] == curve.f[-2] == 1.0


def test_axis_monotone_and_pinned():
    budgets = [0, 50, 100, 200, 500, 1000, 2500, 5000]
    x = log_axis(budgets, 5000)
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


def test_clamp_against_stale_human_level():
    m = TaskMeasurements("t", [0, 50, 5000], [0.2, 0.95, 0.9], 0.2, 0.6)
    curve = build_curve(m)
    assert np.max(curve.f) == 1.0
    assert np.all(curve.f <= 1.0)


def test_validation_errors():
    with pytest.raises(ValidationError):
        TaskMeasurements("t", [50, 100], [0.1, 0.2], 0.1)  # no zero budget
    with pytest.raises(ValidationError):
        TaskMeasurements("t", [0, 100, 100], [0.1, 0.2, 0.3], 0.1)
    with pytest.raises(ValidationError):
        TaskMeasurements("t", [0, 100], [0.1, 1.2], 0.1)
    with pytest.raises(ValidationError):
        TaskMeasurements("t", [0], [0.1], 0.1)


budget_ladders = st.lists(
    st.integers(min_value=1, max_value=10_000), min_size=1, max_size=7, unique=True
).map(lambda b: [0] + sorted(b))


@settings(max_examples=60, deadline=None)
@given(
    budgets=budget_ladders,
    data=st.data(),
)
def test_auc_bounds_and_envelope_order(budgets, data):
    acc = data.draw(
        st.lists(
            st.floats(min_value=0.0, max_value=0.89),
            min_size=len(budgets),
            max_size=len(budgets),
        )
    )
    m = TaskMeasurements("t", budgets, acc, acc[0], 0.9)
    curve = build_curve(m)
    assert 0.0 <= curve.auc <= 1.0
    assert np.all(np.diff(curve.f) >= 0)

    # pointwise-larger fine-tuned accuracies never shrink the AUC
    bumped = [acc[0]] + [min(0.89, a + 0.05) for a in acc[1:]]
    m2 = TaskMeasurements("t", budgets, bumped, bumped[0], 0.9)
    assert build_curve(m2).auc >= curve.auc - 1e-12


def test_auc_invariant_to_collinear_points():
    m = measurements([0, 50, 5000], [0.5, 1.0, 1.0], human=1.0)
    curve = build_curve(m)
    x_mid = (curve.x[1] + 1.0) / 2.0
    dense = EfficiencyCurve(
        task_id="t",
        budgets=np.array([0, 50, 0, 5000]),
        x=np.array([0.0, curve.x[1], x_mid, 1.0]),
        f=np.array([0.0, 1.0, 1.0, 1.0]),
        max_attainable=1.0,
    )
    assert auc(dense) == pytest.approx(curve.auc, abs=1e-12)


def test_read_measurements():
    blob = io.StringIO(
        '{"task_id": "demo", "budgets": [0, 50, 5000], "raw_acc": [0.5, 1.0, 1.0],'
        ' "zero_shot_acc": 0.5, "human_level_acc": null}'
    )
    m = read_measurements(blob)
    assert m.task_id == "demo"
    assert m.human_level_acc is None
