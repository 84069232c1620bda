"""Secondary acceptance: finite-difference gradient fidelity and an
end-to-end feed of the extractor's outputs into the analysis CLI, with no
modification on that side. Prints one PASS/FAIL line per criterion."""

import json
import shutil
import subprocess
import sys

import numpy as np
import torch

from extractor.cli import main as extract_main
from extractor.extract import ExtractionJob, example_gradient, selected_parameters
from extractor.models import INPUT_DIM, VOCAB, build_model


def report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


def test_finite_difference_fidelity():
    """Toy-model gradients vs central finite differences, 1e-4 relative."""
    model = build_model("toy-untrained", seed=21).double()
    params = selected_parameters(model)
    gen = np.random.default_rng(21)
    x = torch.tensor(gen.standard_normal(INPUT_DIM))
    target = [5, 1, 8]
    grad = example_gradient(model, params, x, target).numpy()

    def loss_value():
        with torch.no_grad():
            logp = torch.log_softmax(model.logits(x, len(target)), dim=-1)
            picked = logp[torch.arange(len(target)), torch.tensor(target)]
            return float(-picked.mean())

    eps = 1e-5
    scale = float(np.max(np.abs(grad)))
    sizes = [p.numel() for _, p in params]
    offsets = np.cumsum([0] + sizes)
    worst = 0.0
    for c in gen.choice(int(offsets[-1]), size=80, replace=False):
        layer = int(np.searchsorted(offsets, c, side="right")) - 1
        local = int(c - offsets[layer])
        p = params[layer][1]
        with torch.no_grad():
            orig = p.reshape(-1)[local].item()
            p.reshape(-1)[local] = orig + eps
            up = loss_value()
            p.reshape(-1)[local] = orig - eps
            down = loss_value()
            p.reshape(-1)[local] = orig
        fd = (up - down) / (2 * eps)
        worst = max(worst, abs(fd - grad[c]) / max(abs(grad[c]), 1e-3 * scale))
    report("extractor-finite-difference", worst <= 1e-4, f"worst rel err {worst:.2e}")


def test_end_to_end_feed(tmp_path):
    """extract CLI output -> analysis `metric` CLI: cos_low completes with a
    value in [-1, 1]."""
    gen = np.random.default_rng(33)
    labeled = tmp_path / "labeled.jsonl"
    unlabeled = tmp_path / "unlabeled.jsonl"
    with open(labeled, "w") as lf, open(unlabeled, "w") as uf:
        for i in range(30):
            vec = gen.standard_normal(INPUT_DIM).round(4).tolist()
            target = [int(t) for t in gen.integers(0, VOCAB, size=3)]
            lf.write(json.dumps({"example_id": i, "input": vec, "target": target}) + "\n")
            uf.write(json.dumps({"example_id": i, "input": vec}) + "\n")

    out = tmp_path / "extracted"
    code = extract_main([
        "--model", "toy", "--labeled", str(labeled), "--unlabeled", str(unlabeled),
        "--out", str(out), "--seed", "0", "--decode-length", "3",
    ])
    assert code == 0

    effpred_bin = shutil.which("effpred")
    cmd = [effpred_bin] if effpred_bin else [sys.executable, "-m", "effpred.cli"]
    run_dir = tmp_path / "metric"
    proc = subprocess.run(
        cmd + [
            "metric", "--grdx", str(out / "grads.grdx"),
            "--confidence", str(out / "confidence.jsonl"),
            "--task-id", "extracted", "--metric", "cos_low",
            "--sample-size", "3", "--seed", "0", "--out", str(run_dir),
        ],
        capture_output=True,
        text=True,
    )
    ok = proc.returncode == 0
    value = None
    if ok:
        value = json.loads((run_dir / "metric.json").read_text())["value"]
        ok = -1.0 <= value <= 1.0
    report(
        "extractor-end-to-end",
        ok,
        f"exit={proc.returncode}, cos_low={value}" + ("" if ok else f", stderr={proc.stderr[-200:]}"),
    )
