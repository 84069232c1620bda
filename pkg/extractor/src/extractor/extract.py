"""Per-example gradient and confidence extraction.

Gradients are taken with respect to the gold target sequence (mean
cross-entropy over target tokens); confidence comes from greedy decoding —
the per-position probability the model assigns to its own argmax token.
"""

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from .grdxio import write_grdx


class ExtractionError(RuntimeError):
    pass


@dataclass
class ExtractionJob:
    model: nn.Module
    labeled: Sequence  # (example_id, input vector, target token ids)
    unlabeled: Sequence  # (example_id, input vector)
    layers: Optional[Sequence[str]] = None  # parameter names; None = all
    decode_length: int = 4
    seed: int = 0
    batch_size: int = 1

    def __post_init__(self):
        if len(self.labeled) < 2:
            raise ExtractionError(
                f"need >= 2 labeled examples for gradients, got {len(self.labeled)}"
            )
        if self.decode_length < 1:
            raise ExtractionError("decode_length must be >= 1 (empty generation)")


def selected_parameters(model, layers=None):
    """(name, parameter) pairs forming the GRDX manifest, in model order."""
    named = [(n, p) for n, p in model.named_parameters() if p.requires_grad]
    if layers is None:
        return named
    by_name = dict(named)
    missing = [n for n in layers if n not in by_name]
    if missing:
        raise ExtractionError(f"unknown parameter names: {missing}")
    return [(n, by_name[n]) for n in layers]


def _loss_per_example(model, x_batch, targets):
    """Mean cross-entropy over target tokens, separately per example.

    All targets in one call must share a length so the batch stacks.
    """
    length = len(targets[0])
    logits = model.logits(x_batch, length)  # [batch, length, vocab]
    if logits.dim() == 2:  # single example, unbatched model output
        logits = logits.unsqueeze(0)
    target = torch.as_tensor(targets, dtype=torch.long)
    logp = torch.log_softmax(logits, dim=-1)
    picked = torch.gather(logp, -1, target.unsqueeze(-1)).squeeze(-1)
    return -picked.mean(dim=-1)  # [batch]


def example_gradient(model, params, x, target):
    """Flattened per-example gradient over ``params`` in manifest order."""
    loss = _loss_per_example(model, torch.as_tensor(x).unsqueeze(0), [target])[0]
    grads = torch.autograd.grad(loss, [p for _, p in params], allow_unused=True)
    flat = []
    for (_, p), g in zip(params, grads):
        flat.append(
            (torch.zeros_like(p) if g is None else g).detach().reshape(-1)
        )
    return torch.cat(flat)


def extract_gradients(job: ExtractionJob, out_path):
    """Write one GRDX record per labeled example.

    Examples are grouped by target length; within a group they may be
    batched (``job.batch_size``), with per-example gradients obtained by
    differentiating each example's own loss term — batching is a forward
    optimization only and cannot mix gradients across examples.
    """
    params = selected_parameters(job.model, job.layers)
    manifest = [(name, p.numel()) for name, p in params]
    records = {}
    groups = {}
    for idx, (example_id, x, target) in enumerate(job.labeled):
        groups.setdefault(len(target), []).append((idx, example_id, x, target))

    for length, group in groups.items():
        for start in range(0, len(group), max(1, job.batch_size)):
            chunk = group[start : start + max(1, job.batch_size)]
            x_batch = torch.stack([torch.as_tensor(x, dtype=torch.float32) for _, _, x, _ in chunk])
            losses = _loss_per_example(job.model, x_batch, [t for _, _, _, t in chunk])
            for pos, (idx, example_id, _, _) in enumerate(chunk):
                grads = torch.autograd.grad(
                    losses[pos],
                    [p for _, p in params],
                    retain_graph=pos + 1 < len(chunk),
                    allow_unused=True,
                )
                flat = torch.cat(
                    [
                        (torch.zeros_like(p) if g is None else g).detach().reshape(-1)
                        for (_, p), g in zip(params, grads)
                    ]
                ).numpy().astype(np.float32)
                if not np.all(np.isfinite(flat)):
                    raise ExtractionError(
                        f"non-finite gradient for example {example_id}"
                    )
                records[idx] = (example_id, flat)

    ordered = [records[i] for i in sorted(records)]
    write_grdx(out_path, manifest, ordered)
    return manifest


@torch.no_grad()
def extract_confidence(job: ExtractionJob, out_path):
    """Greedy-decode each unlabeled input and write per-token probabilities
    of the predicted tokens as JSONL."""
    if job.decode_length < 1:
        raise ExtractionError("empty generation: decode_length < 1")
    with open(out_path, "w") as fh:
        for example_id, x in job.unlabeled:
            logits = job.model.logits(
                torch.as_tensor(x, dtype=torch.float32), job.decode_length
            )
            probs = torch.softmax(logits, dim=-1)
            token_probs = probs.max(dim=-1).values.tolist()
            if not token_probs:
                raise ExtractionError(f"empty generation for example {example_id}")
            fh.write(
                json.dumps({"example_id": int(example_id), "token_probs": token_probs})
                + "\n"
            )


def read_labeled(path):
    """JSONL rows: {"example_id": int, "input": [floats], "target": [ids]}."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            rows.append(
                (
                    int(obj["example_id"]),
                    np.asarray(obj["input"], dtype=np.float32),
                    [int(t) for t in obj["target"]],
                )
            )
    return rows


def read_unlabeled(path):
    """JSONL rows: {"example_id": int, "input": [floats]}."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            rows.append((int(obj["example_id"]), np.asarray(obj["input"], dtype=np.float32)))
    return rows
