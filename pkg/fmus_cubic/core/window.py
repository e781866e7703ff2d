"""
Window-growth laws.

Continuous laws return real-valued windows; only :func:`rtt_window_sequence`
floors, matching the per-RTT integer window of a real sender.

Two conventions coexist and must not be mixed: :func:`cubic_window` and
:func:`reno_window` take the PRE-loss window ``w0``, while :func:`k_offset`
and :func:`rtt_window_sequence` take the POST-loss window ``x0`` whose plateau
is ``x0 / (1 - beta)``.
"""

import logging
from typing import List, Optional

import numpy as np

from fmus_cubic.core.params import CubicParams
from fmus_cubic.utils.validation import (
    require_at_least,
    require_count,
    require_non_negative,
    require_optional_count,
    require_positive,
)

logger = logging.getLogger(__name__)

# Absorbs rounding in windows that are integers analytically (e.g. the plateau).
_FLOOR_EPS = 1e-9


def plateau_time(w0: float, params: CubicParams) -> float:
    """
    Time after a loss at which the cubic returns to the pre-loss window ``w0``.

    Args:
        w0 (float): Pre-loss window in packets.
        params (CubicParams): Protocol constants.

    Returns:
        float: (beta * w0 / C) ** (1/3) seconds.
    """
    return (params.beta * w0 / params.c) ** (1.0 / 3.0)


def cubic_window(t: float, w0: float, params: CubicParams) -> float:
    """
    CUBIC window ``t`` seconds after a loss that happened at window ``w0``.

    Evaluates C * (t - (beta*w0/C)**(1/3))**3 + w0, so the value at t = 0 is
    the backed-off window (1 - beta) * w0 and the inflection plateau is w0.

    Args:
        t (float): Seconds since the loss, >= 0.
        w0 (float): Pre-loss window in packets, >= 1.
        params (CubicParams): Protocol constants.

    Returns:
        float: Real-valued window in packets.

    Raises:
        DomainError: If t < 0 or w0 < 1.
    """
    t = require_non_negative("t", t)
    w0 = require_at_least("w0", w0, 1.0)
    return params.c * (t - plateau_time(w0, params)) ** 3 + w0


def reno_window(t: float, w0: float, params: CubicParams, rtt: float) -> float:
    """
    Reno-friendly window ``t`` seconds after a loss at pre-loss window ``w0``.

    Args:
        t (float): Seconds since the loss, >= 0.
        w0 (float): Pre-loss window in packets, >= 1.
        params (CubicParams): Protocol constants.
        rtt (float): Round-trip time in seconds.

    Returns:
        float: w0 * (1 - beta) + 3 * beta / (2 - beta) * t / rtt.

    Raises:
        DomainError: On negative time, w0 < 1 or non-positive RTT.
    """
    t = require_non_negative("t", t)
    w0 = require_at_least("w0", w0, 1.0)
    rtt = require_positive("rtt", rtt)
    return w0 * (1.0 - params.beta) + params.reno_slope * (t / rtt)


def k_offset(x0: float, params: CubicParams) -> float:
    """
    Plateau time for a POST-loss window ``x0``.

    Returns (beta * x0 / ((1 - beta) * C)) ** (1/3), the time at which the
    cubic started from ``x0`` reaches ``x0 / (1 - beta)``.

    Raises:
        DomainError: If x0 < 0.
    """
    x0 = require_non_negative("x0", x0)
    return (params.beta * x0 / ((1.0 - params.beta) * params.c)) ** (1.0 / 3.0)


def rtt_window_sequence(
    x0: int,
    params: CubicParams,
    rtt: float,
    n: int,
    w_max: Optional[int] = None,
) -> List[int]:
    """
    Integer windows at the end of each of the first ``n`` loss-free RTTs.

    x_i = floor(C * (i*R - K)**3 + x0 / (1 - beta)) with K = k_offset(x0),
    clamped below at 1 packet and above at ``w_max`` when given.

    Args:
        x0 (int): Window immediately after a loss, >= 1.
        params (CubicParams): Protocol constants.
        rtt (float): Round-trip time in seconds.
        n (int): Number of RTTs, >= 1.
        w_max (int, optional): Window cap in packets.

    Returns:
        list: ``[x_1, ..., x_n]`` as Python ints.
    """
    x0 = require_count("x0", x0)
    rtt = require_positive("rtt", rtt)
    n = require_count("n", n)
    w_max = require_optional_count("w_max", w_max)

    k = k_offset(x0, params)
    i = np.arange(1, n + 1, dtype=float)
    # Evaluate at the end of each RTT, then floor
    raw = np.floor(params.c * (i * rtt - k) ** 3 + x0 / (1.0 - params.beta) + _FLOOR_EPS)
    clamped = int(np.count_nonzero(raw < 1))
    if clamped:
        logger.debug("rtt_window_sequence: clamped %d windows below 1 packet", clamped)
    # Clamp to [1, w_max]
    windows = np.maximum(raw, 1.0)
    if w_max is not None:
        windows = np.minimum(windows, w_max)
    return [int(w) for w in windows]
