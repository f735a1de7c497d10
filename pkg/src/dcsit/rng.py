"""Seeded random substreams.

Every random quantity of a Monte Carlo trial is drawn from its own
substream keyed by ``(trial, kind, index)``.  Results therefore do not
depend on the order in which trials are evaluated, and adding a TX (a new
``index``) never perturbs the draws of the existing ones.
"""

from __future__ import annotations

import numpy as np

CHANNEL = 0
CSIT = 1
SYMBOLS = 2
NOISE = 3
LAMBDA = 4


def substream(seed: int, trial: int, kind: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(kind), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)
