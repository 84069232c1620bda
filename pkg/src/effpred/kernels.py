"""Pairwise dot-product kernel with compiled and pure-Python backends.

The hot path of the toolkit is a few hundred dot products over vectors of up
to ~160M elements. A Cython extension covers that path when it was compiled
at install time; otherwise a numpy fallback (float64 matmul over row blocks)
is selected at import. Both accumulate in double precision and produce
identical pair enumeration order (i < j, row-major).

``EFFPRED_THREADS`` caps the fallback's thread pool (0 or unset = auto); the
compiled kernel is single-threaded. Results are independent of the schedule.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    from . import _pairwise

    HAVE_COMPILED = True
except ImportError:  # extension not built; fall back to numpy
    _pairwise = None
    HAVE_COMPILED = False

DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"


def thread_cap():
    raw = os.environ.get("EFFPRED_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value <= 0:
        return min(8, os.cpu_count() or 1)
    return value


def _pair_stats_python(mat):
    g = np.ascontiguousarray(mat, dtype=np.float64)
    n = g.shape[0]
    sq = np.einsum("ij,ij->i", g, g)
    dots = np.empty(n * (n - 1) // 2)
    offsets = np.concatenate(([0], np.cumsum(np.arange(n - 1, 0, -1))))

    def fill(i):
        dots[offsets[i] : offsets[i] + n - 1 - i] = g[i + 1 :] @ g[i]

    rows = range(n - 1)
    workers = thread_cap()
    if workers > 1 and n > 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, rows))
    else:
        for i in rows:
            fill(i)
    return sq, dots


def pair_stats(mat, backend=None):
    """Return (squared_norms[n], dots[n*(n-1)//2]) for float32 rows of ``mat``.

    Pair k of the flat ``dots`` array corresponds to (i, j), i < j, in
    row-major order.
    """
    mat = np.ascontiguousarray(mat, dtype=np.float32)
    backend = backend or DEFAULT_BACKEND
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but not built")
        return _pairwise.pair_stats(mat)
    if backend == "python":
        return _pair_stats_python(mat)
    raise ValueError(f"unknown backend {backend!r}")
