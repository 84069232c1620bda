"""Desk-scale sequence classifiers.

A model maps a fixed-size feature vector to per-position logits over a
token vocabulary: ``logits(x, length) -> [length, vocab]``. Targets are
token-id sequences, so mean cross-entropy over target tokens and greedy
per-position decoding are both well defined.
"""

import torch
from torch import nn

INPUT_DIM = 128
HIDDEN_DIM = 384
VOCAB = 64
MAX_LEN = 8


class ToyClassifier(nn.Module):
    """Two-layer tanh MLP with an additive per-position bias (~10^5 params)."""

    def __init__(self, input_dim=INPUT_DIM, hidden_dim=HIDDEN_DIM, vocab=VOCAB,
                 max_len=MAX_LEN):
        super().__init__()
        self.input_dim = input_dim
        self.vocab = vocab
        self.max_len = max_len
        self.fc1 = nn.Linear(input_dim, hidden_dim)
        self.fc2 = nn.Linear(hidden_dim, vocab)
        self.pos_bias = nn.Parameter(torch.zeros(max_len, vocab))

    def logits(self, x, length):
        if not 1 <= length <= self.max_len:
            raise ValueError(f"length {length} outside [1, {self.max_len}]")
        hidden = torch.tanh(self.fc1(x))
        return self.fc2(hidden).unsqueeze(-2) + self.pos_bias[:length]

    def forward(self, x, length):
        return self.logits(x, length)


def _train_briefly(model, seed, steps=30):
    """A few Adam steps on a synthetic seeded task so the model is neither
    degenerate nor uniform. Training quality is irrelevant; only having
    informative gradients and non-trivial confidences matters."""
    gen = torch.Generator().manual_seed(seed + 1)
    x = torch.randn(256, model.input_dim, generator=gen)
    y = torch.randint(0, model.vocab, (256, MAX_LEN), generator=gen)
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(steps):
        opt.zero_grad()
        out = model.logits(x, MAX_LEN)  # [256, MAX_LEN, vocab]
        loss = loss_fn(out.reshape(-1, model.vocab), y.reshape(-1))
        loss.backward()
        opt.step()
    opt.zero_grad()
    return model


def build_model(spec, seed=0):
    """Instantiate a model from its CLI spec string.

    ``toy``: briefly-trained ToyClassifier. ``toy-untrained``: random init
    only (useful for tests that need exact reproducibility of the init).
    """
    torch.manual_seed(seed)
    if spec == "toy":
        return _train_briefly(ToyClassifier(), seed)
    if spec == "toy-untrained":
        return ToyClassifier()
    raise ValueError(f"unknown model spec {spec!r}")
