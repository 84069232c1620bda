import json
from pathlib import Path

import numpy as np
import pytest

from effpred.gradstore import GradientRecord, LayerManifestEntry

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def reference_tasks():
    with open(DATA_DIR / "reference_tasks.json") as fh:
        return json.load(fh)


def make_records(rng, n, dim, ids=None):
    ids = ids if ids is not None else range(n)
    return [
        GradientRecord(int(i), rng.standard_normal(dim).astype(np.float32))
        for i in ids
    ]


def simple_manifest(dim, name="layer0"):
    return [LayerManifestEntry(name, dim)]
