"""
Statistical helpers shared by the stochastic models.
"""

import math
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
import scipy.stats


def compensated_mean(values: Iterable[float]) -> float:
    """
    Mean computed with exactly rounded summation.

    The result does not depend on the order of ``values``, which keeps merged
    replication statistics independent of scheduling.

    Args:
        values: Numbers to average.

    Returns:
        float: The mean, or ``nan`` for an empty input.
    """
    values = list(values)
    if not values:
        return math.nan
    return math.fsum(values) / len(values)


def batch_means_std_error(samples: Sequence[float], n_batches: int = 20) -> float:
    """
    Standard error of the mean of a correlated sequence by non-overlapping batch means.

    Args:
        samples: Sequential (possibly autocorrelated) observations.
        n_batches (int): Number of equal batches; trailing samples that do not
            fill a batch are dropped from the error estimate only.

    Returns:
        float: Estimated standard error; ``nan`` if fewer than two batches fit.
    """
    data = np.asarray(samples, dtype=float)
    batch = data.size // n_batches
    if n_batches < 2 or batch < 1:
        return math.nan
    means = data[: batch * n_batches].reshape(n_batches, batch).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def ks_distance(samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Kolmogorov-Smirnov distance between a continuous sample and a CDF.

    Args:
        samples: Observations.
        cdf: Vectorised cumulative distribution function.

    Returns:
        float: The KS statistic sup |F_n - F|.
    """
    return float(scipy.stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def lattice_ks_distance(
    samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]
) -> Tuple[float, int]:
    """
    KS distance of a lattice-valued sample, evaluated on its support points.

    A sample such as ``p**0.25 * G`` with integer ``G`` has an empirical CDF
    that jumps by the full lattice mass at each point, so the classical
    statistic is dominated by the lattice spacing. Here the empirical CDF is
    compared with ``cdf`` only at the observed support points.

    Args:
        samples: Observations taking finitely many distinct values.
        cdf: Vectorised cumulative distribution function.

    Returns:
        tuple: (distance, number of support points compared).
    """
    data = np.asarray(samples, dtype=float)
    support, counts = np.unique(data, return_counts=True)
    empirical = np.cumsum(counts) / data.size
    distance = np.max(np.abs(empirical - cdf(support)))
    return float(distance), int(support.size)
