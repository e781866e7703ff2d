"""
Seeded random streams.

Every stochastic operation takes an integer seed and builds its generator
here, on top of the counter-based Philox bit generator.
"""

from typing import List

import numpy as np

from fmus_cubic.utils.validation import require_count


def make_generator(seed: int) -> np.random.Generator:
    """
    Create the generator used for a single seeded run.

    Args:
        seed (int): Non-negative integer seed.

    Returns:
        numpy.random.Generator: A Philox-backed generator.

    Raises:
        DomainError: If the seed is negative or not an integer.
    """
    seed = require_count("seed", seed, minimum=0)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_generators(seed: int, n: int) -> List[np.random.Generator]:
    """
    Create ``n`` statistically independent generators derived from one seed.

    The i-th generator depends only on (seed, i), so replications can be run
    in any order or concurrently without changing their streams.

    Args:
        seed (int): Non-negative integer seed.
        n (int): Number of generators.

    Returns:
        list: ``n`` Philox-backed generators.
    """
    seed = require_count("seed", seed, minimum=0)
    n = require_count("n", n)
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def open_uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Draw ``size`` uniforms strictly inside (0, 1), in index order.

    ``Generator.random`` can return exactly 0; such entries are redrawn in
    place, so the variate at index i still depends only on the stream.

    Args:
        rng (numpy.random.Generator): Source generator.
        size (int): Number of variates.

    Returns:
        numpy.ndarray: Array of shape ``(size,)``.
    """
    u = rng.random(size)
    zeros = np.flatnonzero(u == 0.0)
    while zeros.size:
        u[zeros] = rng.random(zeros.size)
        zeros = zeros[u[zeros] == 0.0]
    return u
