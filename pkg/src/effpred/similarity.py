"""Gradient-based task-difficulty metrics.

Per-example gradient norms, pairwise cosine similarities, their median
aggregates over a sampled batch (including the low-confidence variant), and
a seeded per-layer Gaussian random projection for dimensionality reduction.

All dot products and norms accumulate in float64 even though gradients are
stored as float32. The median of an even number of pairwise cosines is the
mean of the two middle values.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, rng
from .confidence import select_low_confidence
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    NumericError,
    ValidationError,
)
from .gradstore import GradDump, GradientRecord, LayerManifestEntry

METRICS = ("grad_norm", "conf_avg", "cos_sim", "cos_low")


@dataclass(frozen=True)
class MetricValue:
    task_id: str
    metric: str
    value: float
    sample_size: int
    t: float
    seed: int


@dataclass(frozen=True)
class ProjectionConfig:
    """Per-layer Gaussian projection setup.

    Either a global ``reduction_ratio`` >= 1 or explicit per-layer
    ``target_dims``. The per-layer seed stream is derived from
    (seed, layer index); see :mod:`effpred.rng`.
    """

    seed: int
    reduction_ratio: Optional[float] = None
    target_dims: Optional[Sequence[int]] = None

    def __post_init__(self):
        if (self.reduction_ratio is None) == (self.target_dims is None):
            raise ValidationError("give exactly one of reduction_ratio or target_dims")
        if self.reduction_ratio is not None and self.reduction_ratio < 1.0:
            raise ValidationError(f"reduction_ratio={self.reduction_ratio} must be >= 1")


def _as_matrix(records):
    return np.stack([np.asarray(r.values, dtype=np.float32) for r in records])


def grad_norm(record: GradientRecord) -> float:
    """Euclidean norm of the flattened gradient, accumulated in float64."""
    v = np.asarray(record.values, dtype=np.float32)
    if not np.isfinite(v).all():
        raise ValidationError(f"non-finite gradient for example {record.example_id}")
    return float(np.linalg.norm(v.astype(np.float64)))


def pairwise_cosine(a: GradientRecord, b: GradientRecord) -> float:
    """Cosine similarity of two gradient records, clamped to [-1, 1]."""
    va = np.asarray(a.values, dtype=np.float32).astype(np.float64)
    vb = np.asarray(b.values, dtype=np.float32).astype(np.float64)
    if va.shape != vb.shape:
        raise ValidationError("gradient length mismatch")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine undefined for a zero gradient vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def _median_sorted(values):
    values = np.sort(values)
    mid = values.size // 2
    if values.size % 2:
        return float(values[mid])
    return float((values[mid - 1] + values[mid]) / 2.0)


def cosine_median(batch, backend=None) -> float:
    """Median over all C(n, 2) unordered pairwise cosines of the batch.

    The pairwise values are sorted before the median is taken, so the result
    is invariant to batch order and to the pair enumeration schedule.
    """
    batch = list(batch)
    if len(batch) < 2:
        raise ValidationError(f"need >= 2 gradient records, got {len(batch)}")
    mat = _as_matrix(batch)
    sq, dots = kernels.pair_stats(mat, backend=backend)
    if np.any(sq == 0.0):
        raise DegenerateInputError("cosine undefined for a zero gradient vector")
    norms = np.sqrt(sq)
    n = len(batch)
    i_idx, j_idx = np.triu_indices(n, k=1)
    cosines = np.clip(dots / (norms[i_idx] * norms[j_idx]), -1.0, 1.0)
    return _median_sorted(cosines)


def projected_dims(manifest, config: ProjectionConfig):
    """Target dimension per layer: max(1, ceil(dim / ratio)) or the explicit list."""
    if config.target_dims is not None:
        dims = [int(k) for k in config.target_dims]
        if len(dims) != len(manifest) or any(k < 1 for k in dims):
            raise ValidationError("target_dims must give a positive dim per layer")
        return dims
    return [max(1, math.ceil(e.dim / config.reduction_ratio)) for e in manifest]


def project_gradients(dump: GradDump, config: ProjectionConfig) -> GradDump:
    """Project each layer slice through a seeded Gaussian matrix.

    Matrix entries are i.i.d. N(0, 1/k_l) drawn by Box-Muller from the layer's
    derived generator, so the projected squared norm is norm-preserving in
    expectation. Projected slices are concatenated in manifest order.
    """
    target = projected_dims(dump.manifest, config)
    offsets = np.concatenate(([0], np.cumsum([e.dim for e in dump.manifest])))

    matrices = []
    for layer_index, (entry, k) in enumerate(zip(dump.manifest, target)):
        gen = rng.subgenerator(config.seed, layer_index)
        flat = rng.box_muller(gen, k * entry.dim) / math.sqrt(k)
        matrices.append(flat.reshape(k, entry.dim))

    out_manifest = [
        LayerManifestEntry(entry.name, k) for entry, k in zip(dump.manifest, target)
    ]
    out_records = []
    for record in dump.records:
        v = np.asarray(record.values, dtype=np.float32).astype(np.float64)
        pieces = []
        for li, mat in enumerate(matrices):
            pieces.append(mat @ v[offsets[li] : offsets[li + 1]])
        projected = np.concatenate(pieces)
        if not np.isfinite(projected).all():
            raise NumericError(
                f"non-finite projected gradient for example {record.example_id}"
            )
        out_records.append(GradientRecord(record.example_id, projected.astype(np.float32)))
    return GradDump(out_manifest, out_records)


def task_metric(
    task_id,
    dump: GradDump,
    scores,
    metric,
    t=None,
    sample_size=32,
    seed=0,
    backend=None,
) -> MetricValue:
    """Compute one task-level difficulty metric over a sampled batch.

    The batch is drawn from the lowest-confidence ceil(t*n) examples; the
    default segment is t=0.1 for ``cos_low`` and the whole pool (t=1.0) for
    the other metrics. Per-example statistics and pairwise cosines are both
    aggregated with the median.
    """
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}")
    if t is None:
        t = 0.1 if metric == "cos_low" else 1.0

    selection = select_low_confidence(scores, t, sample_size, seed)
    sampled = set(selection.sampled_ids)

    if metric == "conf_avg":
        by_id = {s.example_id: s.value for s in scores}
        values = np.array([by_id[i] for i in selection.sampled_ids])
        value = _median_sorted(values)
    else:
        by_id = {}
        for record in dump.records:
            if record.example_id in sampled:
                by_id[record.example_id] = record
        missing = sampled - set(by_id)
        if missing:
            raise ConsistencyError(
                f"no stored gradient for sampled example(s) {sorted(missing)[:8]}"
            )
        batch = [by_id[i] for i in selection.sampled_ids]
        if metric == "grad_norm":
            value = _median_sorted(np.array([grad_norm(r) for r in batch]))
        else:  # cos_sim / cos_low
            value = cosine_median(batch, backend=backend)

    return MetricValue(
        task_id=task_id,
        metric=metric,
        value=value,
        sample_size=sample_size,
        t=t,
        seed=seed,
    )
