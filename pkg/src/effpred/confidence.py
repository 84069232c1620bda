"""Model-confidence scoring and low-confidence segment sampling.

Token probabilities are treated as opaque inputs: they are the probabilities
a model assigned to the tokens of its own greedy prediction, produced
upstream by an extractor. Two scores are supported:

* ``avg_prob``: arithmetic mean of the token probabilities (low value = low
  confidence).
* ``ppl``: perplexity, exp(-mean log prob) (high value = low confidence).
  Preferable when long outputs let a single extreme token skew the mean.
"""

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng
from .errors import CapacityError, ValidationError

METHODS = ("avg_prob", "ppl")


@dataclass(frozen=True)
class ConfidenceRecord:
    example_id: int
    token_probs: Sequence[float]

    def __post_init__(self):
        if len(self.token_probs) < 1:
            raise ValidationError(f"example {self.example_id}: empty token_probs")
        probs = np.asarray(self.token_probs, dtype=float)
        if not np.all((probs > 0.0) & (probs <= 1.0)):
            raise ValidationError(
                f"example {self.example_id}: token probabilities must lie in (0, 1]"
            )


@dataclass(frozen=True)
class ConfidenceScore:
    example_id: int
    method: str
    value: float


@dataclass(frozen=True)
class SegmentSelection:
    threshold: float
    sampled_ids: tuple
    seed: int


def conf_avg(record: ConfidenceRecord) -> ConfidenceScore:
    """Mean probability assigned to the predicted tokens."""
    value = float(np.mean(np.asarray(record.token_probs, dtype=float)))
    return ConfidenceScore(record.example_id, "avg_prob", value)


def perplexity(record: ConfidenceRecord) -> ConfidenceScore:
    """exp of the negative mean log token probability."""
    probs = np.asarray(record.token_probs, dtype=float)
    value = float(math.exp(-np.mean(np.log(probs))))
    return ConfidenceScore(record.example_id, "ppl", value)


def score(record: ConfidenceRecord, method: str) -> ConfidenceScore:
    if method == "avg_prob":
        return conf_avg(record)
    if method == "ppl":
        return perplexity(record)
    raise ValidationError(f"unknown confidence method {method!r}")


def _ranking_key(s: ConfidenceScore):
    # Lowest confidence first. avg_prob: ascending value. ppl: descending
    # value (high perplexity = low confidence). Ties break on example_id.
    if s.method == "avg_prob":
        return (s.value, s.example_id)
    return (-s.value, s.example_id)


def select_low_confidence(scores, t, sample_size, seed) -> SegmentSelection:
    """Sample ``sample_size`` ids uniformly from the lowest-confidence
    ceil(t*n) examples.

    Deterministic in (scores, t, sample_size, seed) and invariant to the
    input ordering of ``scores``.
    """
    scores = list(scores)
    if not scores:
        raise ValidationError("no confidence scores given")
    methods = {s.method for s in scores}
    if len(methods) != 1:
        raise ValidationError(f"mixed confidence methods: {sorted(methods)}")
    if not 0.0 < t <= 1.0:
        raise ValidationError(f"threshold t={t} outside (0, 1]")
    if sample_size < 1:
        raise ValidationError(f"sample_size={sample_size} must be positive")
    ids = [s.example_id for s in scores]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate example_ids in scores")

    segment_size = math.ceil(t * len(scores))
    if sample_size > segment_size:
        raise CapacityError(
            f"sample_size={sample_size} exceeds segment of {segment_size} examples"
        )
    ranked = sorted(scores, key=_ranking_key)
    segment = [s.example_id for s in ranked[:segment_size]]
    gen = rng.generator(seed)
    picked = gen.choice(len(segment), size=sample_size, replace=False)
    sampled = tuple(segment[i] for i in picked)
    return SegmentSelection(threshold=t, sampled_ids=sampled, seed=seed)


def read_records_jsonl(stream):
    """Parse confidence input JSONL: {example_id, token_probs[, predicted_text]}."""
    records = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise ValidationError(f"line {lineno}: invalid JSON ({err})")
        try:
            records.append(ConfidenceRecord(int(obj["example_id"]), obj["token_probs"]))
        except (KeyError, TypeError) as err:
            raise ValidationError(f"line {lineno}: missing/invalid field ({err})")
    return records


def write_scores_jsonl(scores, stream):
    for s in scores:
        stream.write(
            json.dumps(
                {"example_id": s.example_id, "method": s.method, "value": s.value}
            )
            + "\n"
        )


def read_scores_jsonl(stream):
    scores = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        try:
            scores.append(
                ConfidenceScore(int(obj["example_id"]), obj["method"], float(obj["value"]))
            )
        except (KeyError, TypeError) as err:
            raise ValidationError(f"line {lineno}: missing/invalid field ({err})")
    return scores
