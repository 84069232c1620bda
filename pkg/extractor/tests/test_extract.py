import json
import math

import numpy as np
import pytest
import torch
from torch import nn

from extractor.extract import (
    ExtractionError,
    ExtractionJob,
    example_gradient,
    extract_confidence,
    extract_gradients,
    read_labeled,
    selected_parameters,
)
from extractor.models import INPUT_DIM, MAX_LEN, VOCAB, ToyClassifier, build_model


class OneParamLogistic(nn.Module):
    """logits_t = [0, w*x]: P(token 1) = sigmoid(w*x)."""

    def __init__(self, w0=0.7):
        super().__init__()
        self.w = nn.Parameter(torch.tensor(w0, dtype=torch.float32))

    def logits(self, x, length):
        z = self.w * x.reshape(-1)[0]
        row = torch.stack([torch.zeros_like(z), z])
        return row.expand(length, 2) if length > 1 else row.unsqueeze(0)


def make_job(model, labeled, unlabeled=(), **kw):
    return ExtractionJob(model=model, labeled=labeled, unlabeled=list(unlabeled), **kw)


def test_one_param_logistic_matches_closed_form():
    # loss = -log sigmoid(w*x) for target token 1; d/dw = -(1 - sigmoid(w*x)) * x
    w0, x = 0.7, 1.3
    model = OneParamLogistic(w0)
    params = selected_parameters(model)
    grad = example_gradient(model, params, np.array([x], dtype=np.float32), [1])
    expected = -(1.0 - 1.0 / (1.0 + math.exp(-w0 * x))) * x
    assert grad.numel() == 1
    assert float(grad[0]) == pytest.approx(expected, rel=1e-6)


def test_duplicate_examples_identical_records(tmp_path):
    model = build_model("toy-untrained", seed=1)
    x = np.random.default_rng(0).standard_normal(INPUT_DIM).astype(np.float32)
    target = [3, 7, 1]
    job = make_job(model, [(0, x, target), (1, x.copy(), target)])
    extract_gradients(job, tmp_path / "g.grdx")

    from effpred.gradstore import load_dump  # wire-compat check, not an API dependency

    dump = load_dump(tmp_path / "g.grdx")
    a, b = dump.records[0].values, dump.records[1].values
    assert np.array_equal(a, b)
    cos = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    assert cos == pytest.approx(1.0)


def test_gradients_match_central_finite_differences():
    torch.manual_seed(3)
    model = build_model("toy-untrained", seed=3).double()
    params = selected_parameters(model)
    gen = np.random.default_rng(5)
    x = torch.tensor(gen.standard_normal(INPUT_DIM))
    target = [2, 9]
    grad = example_gradient(model, params, x, target).numpy()

    def loss_value():
        with torch.no_grad():
            logits = model.logits(x, len(target))
            logp = torch.log_softmax(logits, dim=-1)
            picked = logp[torch.arange(len(target)), torch.tensor(target)]
            return float(-picked.mean())

    flat_params = torch.cat([p.detach().reshape(-1) for _, p in params])
    n = flat_params.numel()
    eps = 1e-5
    coords = gen.choice(n, size=64, replace=False)
    worst = 0.0
    scale = float(np.max(np.abs(grad)))
    for c in coords:
        offset = 0
        for _, p in params:
            if c < offset + p.numel():
                local = c - offset
                with torch.no_grad():
                    orig = p.reshape(-1)[local].item()
                    p.reshape(-1)[local] = orig + eps
                    up = loss_value()
                    p.reshape(-1)[local] = orig - eps
                    down = loss_value()
                    p.reshape(-1)[local] = orig
                fd = (up - down) / (2 * eps)
                worst = max(worst, abs(fd - grad[c]) / max(abs(grad[c]), 1e-3 * scale))
                break
            offset += p.numel()
    assert worst <= 1e-4, f"worst relative FD error {worst:.2e}"


def test_batch_composition_independence(tmp_path):
    model = build_model("toy-untrained", seed=8)
    gen = np.random.default_rng(8)
    labeled = [
        (i, gen.standard_normal(INPUT_DIM).astype(np.float32), [int(gen.integers(VOCAB)) for _ in range(3)])
        for i in range(6)
    ]
    extract_gradients(make_job(model, labeled, batch_size=1), tmp_path / "one.grdx")
    extract_gradients(make_job(model, labeled, batch_size=6), tmp_path / "batch.grdx")

    from effpred.gradstore import load_dump

    one = load_dump(tmp_path / "one.grdx")
    batch = load_dump(tmp_path / "batch.grdx")
    for r1, rb in zip(one.records, batch.records):
        assert r1.example_id == rb.example_id
        np.testing.assert_allclose(r1.values, rb.values, atol=1e-6)


def test_layer_selection_sets_manifest(tmp_path):
    model = build_model("toy-untrained", seed=2)
    gen = np.random.default_rng(2)
    labeled = [
        (i, gen.standard_normal(INPUT_DIM).astype(np.float32), [1, 2]) for i in range(2)
    ]
    job = make_job(model, labeled, layers=["fc2.weight", "fc2.bias"])
    manifest = extract_gradients(job, tmp_path / "g.grdx")
    assert [name for name, _ in manifest] == ["fc2.weight", "fc2.bias"]

    from effpred.gradstore import load_dump

    dump = load_dump(tmp_path / "g.grdx")
    assert [e.name for e in dump.manifest] == ["fc2.weight", "fc2.bias"]
    assert dump.records[0].values.size == model.fc2.weight.numel() + model.fc2.bias.numel()

    with pytest.raises(ExtractionError):
        extract_gradients(make_job(model, labeled, layers=["nope"]), tmp_path / "x.grdx")


def test_nonfinite_gradient_names_example(tmp_path):
    model = build_model("toy-untrained", seed=4)
    with torch.no_grad():
        model.fc1.weight.mul_(1e30)  # drive tanh saturation -> overflow in fc2 path
        model.fc2.weight.mul_(1e30)
    gen = np.random.default_rng(4)
    labeled = [
        (41, gen.standard_normal(INPUT_DIM).astype(np.float32) * 1e10, [0]),
        (42, gen.standard_normal(INPUT_DIM).astype(np.float32) * 1e10, [0]),
    ]
    with pytest.raises(ExtractionError, match=r"4[12]"):
        extract_gradients(make_job(model, labeled), tmp_path / "g.grdx")


class OneHotModel(nn.Module):
    def logits(self, x, length):
        row = torch.zeros(length, 4)
        row[:, 2] = 1e4
        return row


class UniformModel(nn.Module):
    def __init__(self, k):
        super().__init__()
        self.k = k

    def logits(self, x, length):
        return torch.zeros(length, self.k)


def test_confidence_one_hot_and_uniform(tmp_path):
    labeled = [(0, np.zeros(1, np.float32), [0]), (1, np.zeros(1, np.float32), [0])]
    unlabeled = [(0, np.zeros(1, np.float32))]

    path = tmp_path / "onehot.jsonl"
    extract_confidence(make_job(OneHotModel(), labeled, unlabeled, decode_length=3), path)
    row = json.loads(path.read_text())
    assert row["token_probs"] == pytest.approx([1.0, 1.0, 1.0])

    path = tmp_path / "uniform.jsonl"
    extract_confidence(make_job(UniformModel(5), labeled, unlabeled, decode_length=2), path)
    row = json.loads(path.read_text())
    assert row["token_probs"] == pytest.approx([0.2, 0.2])


def test_confidence_held_out_schema(tmp_path):
    model = build_model("toy", seed=11)
    gen = np.random.default_rng(11)
    labeled = [(i, gen.standard_normal(INPUT_DIM).astype(np.float32), [0]) for i in range(2)]
    unlabeled = [(i, gen.standard_normal(INPUT_DIM).astype(np.float32)) for i in range(20)]
    path = tmp_path / "conf.jsonl"
    extract_confidence(make_job(model, labeled, unlabeled, decode_length=4), path)
    rows = [json.loads(l) for l in path.read_text().splitlines()]
    assert len(rows) == 20
    for row in rows:
        conf_avg = sum(row["token_probs"]) / len(row["token_probs"])
        assert 0.0 < conf_avg <= 1.0
        assert len(row["token_probs"]) == 4


def test_job_validation():
    model = build_model("toy-untrained", seed=0)
    one = [(0, np.zeros(INPUT_DIM, np.float32), [0])]
    with pytest.raises(ExtractionError):
        make_job(model, one)
    with pytest.raises(ExtractionError):
        make_job(model, one * 2, decode_length=0)


def test_read_labeled_roundtrip(tmp_path):
    path = tmp_path / "labeled.jsonl"
    path.write_text(
        '{"example_id": 5, "input": [0.5, -1.0], "target": [1, 2]}\n\n'
        '{"example_id": 6, "input": [1.0, 2.0], "target": [0]}\n'
    )
    rows = read_labeled(path)
    assert [r[0] for r in rows] == [5, 6]
    assert rows[0][2] == [1, 2]
