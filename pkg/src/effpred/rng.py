"""Pinned deterministic random number generation.

All stochastic choices in the toolkit (segment sampling, Gaussian projection
matrices) flow through the generators defined here so that runs are exactly
reproducible from a single 64-bit seed:

* Bit generator: numpy PCG64, seeded through ``numpy.random.SeedSequence``.
  Sub-streams (e.g. one per projected layer) are derived with
  ``SeedSequence(seed, spawn_key=(index,))``.
* Gaussian variates are produced by the Box-Muller transform applied to the
  generator's uniforms, not by numpy's ziggurat sampler, so the exact draw
  sequence is pinned at the algorithm level.
"""

import numpy as np


def generator(seed):
    """Return the pinned generator for a top-level seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def subgenerator(seed, index):
    """Deterministic child stream for (seed, index)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


def box_muller(rng, n):
    """Draw ``n`` standard normal variates via Box-Muller.

    Uniform pairs (u1, u2) are drawn in one block; u1 is reflected to (0, 1]
    so the log is always defined. Returns a float64 array of length ``n``.
    """
    m = (n + 1) // 2
    u = rng.random((2, m))
    r = np.sqrt(-2.0 * np.log1p(-u[0]))
    theta = 2.0 * np.pi * u[1]
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]
