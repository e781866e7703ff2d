"""
Deterministic periodic-loss fluid model.

Exactly one packet is lost every 1/p packets sent. Between losses the window
follows the cubic law from a pre-loss window x, so the next pre-loss window is
a deterministic function of x (the loss map). Its unique fixed point gives a
periodic regime whose time average is the fluid response function.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List

from scipy.optimize import brentq

from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.core.window import cubic_window, plateau_time
from fmus_cubic.exceptions import DomainError, NumericalError
from fmus_cubic.utils.validation import require_at_least, require_count, require_positive

logger = logging.getLogger(__name__)

TAU_XTOL = 1e-10
_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class FluidSolution:
    """
    Periodic regime of the fluid model.

    Attributes:
        x_star (float): Fixed-point pre-loss window in packets.
        tau (float): Time between consecutive losses in seconds.
        mean_window (float): Time-average window in packets.
        throughput (float): mean_window / R in packets per second.
    """

    x_star: float
    tau: float
    mean_window: float
    throughput: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def fixed_point(params: CubicParams, path: NetworkPath) -> float:
    """
    Fixed-point pre-loss window x*_p.

    Returns (C/beta)**(1/4) * (4/(4-beta) * R/p)**(3/4).
    """
    c, beta = params.c, params.beta
    return (c / beta) ** 0.25 * (4.0 / (4.0 - beta) * path.rtt / path.drop_prob) ** 0.75


def mean_window_fluid(params: CubicParams, path: NetworkPath) -> float:
    """
    Time-average window of the periodic regime.

    Returns (C*(4-beta)/(4*beta) * (R/p)**3)**(1/4).
    """
    c, beta = params.c, params.beta
    return (c * (4.0 - beta) / (4.0 * beta) * (path.rtt / path.drop_prob) ** 3) ** 0.25


def inter_loss_time(params: CubicParams, path: NetworkPath) -> float:
    """
    Period of the regime, (4*beta*R / ((4-beta)*C*p))**(1/4) seconds.
    """
    c, beta = params.c, params.beta
    return (4.0 * beta * path.rtt / ((4.0 - beta) * c * path.drop_prob)) ** 0.25


def solve(params: CubicParams, path: NetworkPath) -> FluidSolution:
    """
    Bundle the closed forms into a :class:`FluidSolution`.
    """
    mean = mean_window_fluid(params, path)
    return FluidSolution(
        x_star=fixed_point(params, path),
        tau=inter_loss_time(params, path),
        mean_window=mean,
        throughput=mean / path.rtt,
    )


def accumulated_packets_integral(params: CubicParams, x: float, tau: float) -> float:
    """
    Integral of the window over [0, tau] after a loss at pre-loss window x.

    Closed form (C/4) * ((tau - J)**4 - J**4) + x * tau with J the plateau
    time. Dividing by R gives packets sent.
    """
    j = plateau_time(x, params)
    return 0.25 * params.c * ((tau - j) ** 4 - j**4) + x * tau


def tau_of_x(params: CubicParams, path: NetworkPath, x: float) -> float:
    """
    Time needed to send 1/p packets after a loss at pre-loss window ``x``.

    The accumulated integral is strictly increasing in tau because the window
    never drops below (1 - beta) * x, so the root is bracketed by doubling an
    upper bound from four fluid periods and then refined with Brent's method.

    Args:
        params (CubicParams): Protocol constants.
        path (NetworkPath): RTT and drop probability.
        x (float): Pre-loss window in packets, >= 1.

    Returns:
        float: tau_p(x) in seconds, accurate to 1e-10.

    Raises:
        DomainError: If x < 1.
        NumericalError: If the window is not positive or no bracket is found.
    """
    x = require_at_least("x", x, 1.0)
    if (1.0 - params.beta) * x <= 0:
        raise NumericalError(f"window is not positive after back-off from x={x}")
    # Packets sent, in window-seconds
    target = path.rtt / path.drop_prob

    def excess(tau: float) -> float:
        return accumulated_packets_integral(params, x, tau) - target

    # Double the upper end until the target is reached
    hi = 4.0 * inter_loss_time(params, path)
    for _ in range(_MAX_DOUBLINGS):
        if excess(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise NumericalError(f"could not bracket tau_p({x}) below {hi}")
    return brentq(excess, 0.0, hi, xtol=TAU_XTOL)


def loss_map(params: CubicParams, path: NetworkPath, x: float) -> float:
    """
    Pre-loss window at the next loss, given pre-loss window ``x`` at this one.
    """
    return cubic_window(tau_of_x(params, path, x), x, params)


def iterate_loss_map(params: CubicParams, path: NetworkPath, x0: float, k: int) -> List[float]:
    """
    Trajectory ``[x0, L(x0), L(L(x0)), ...]`` of length ``k + 1``.

    Args:
        params (CubicParams): Protocol constants.
        path (NetworkPath): RTT and drop probability.
        x0 (float): Initial pre-loss window, >= 1.
        k (int): Number of iterations, >= 0.

    Returns:
        list: The iterates.
    """
    # Validate inputs
    k = require_count("k", k, minimum=0)
    trajectory = [require_at_least("x0", x0, 1.0)]
    for _ in range(k):
        trajectory.append(loss_map(params, path, trajectory[-1]))
    logger.debug(
        "iterate_loss_map: %d steps from %.6g ended at %.10g", k, x0, trajectory[-1]
    )
    return trajectory


def convergence_constant(params: CubicParams) -> float:
    """
    Cubic coefficient of the loss map's relative error recursion.

    With e = (x - x*) / x*, one step gives e -> e - c * e**3 + O(e**4) where
    c = beta * (4 - beta)**3 / 27, independent of C, R and p. The map has unit
    slope at x*, so relative errors decay like (2 * c * k) ** -0.5.
    """
    beta = params.beta
    return beta * (4.0 - beta) ** 3 / 27.0


def lemma5_check(k: float, x: float) -> bool:
    """
    Whether (1 + x)**k - x**k < 1 + k * x**(k - 1) for k in (1, 2), x > 0.

    The left side is evaluated as x**k * expm1(k * log1p(1/x)) to avoid
    cancellation at large x.

    Raises:
        DomainError: If k is outside (1, 2) or x <= 0.
    """
    if not 1.0 < k < 2.0:
        raise DomainError(f"k must lie in (1, 2), got {k!r}")
    x = require_positive("x", x)
    lhs = x**k * math.expm1(k * math.log1p(1.0 / x))
    return lhs < 1.0 + k * x ** (k - 1.0)
