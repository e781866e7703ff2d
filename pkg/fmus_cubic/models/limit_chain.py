"""
Limiting objects of the random-loss model as the drop probability vanishes.

With windows scaled by p**(3/4) and times by p**(1/4), the time to the first
loss from scaled post-loss window x converges to a law Gbar_x whose survival
function is exp(-f(x, y)) with f a quartic polynomial in y. Post-loss windows
then form the Markov chain V_{n+1} = vbar_step(V_n, Gbar_{V_n}), and the
stationary mean of Gbar gives the response coefficient 1 / E[Gbar].
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from fmus_cubic.core.params import CubicParams
from fmus_cubic.core.window import k_offset
from fmus_cubic.exceptions import DomainError, MonotonicityError, NumericalError
from fmus_cubic.utils.rng import make_generator, open_uniforms
from fmus_cubic.utils.stats import batch_means_std_error, compensated_mean, ks_distance
from fmus_cubic.utils.validation import (
    require_count,
    require_non_negative,
    require_open_unit,
    require_positive,
)

logger = logging.getLogger(__name__)

SAMPLE_YTOL = 1e-10
MONOTONE_TOL = 1e-12
GAMMA_RTOL = 1e-9
DEFAULT_BURN_IN = 250
DEFAULT_V0 = 0.1
PUBLISHED_MEAN_GBAR = 0.7690
_MAX_DOUBLINGS = 64


class ExponentVariant(Enum):
    """
    Which form of the survival exponent to use.

    PRINTED uses the linear term x*y. DERIVATION uses x*y/(1 - beta), the
    form obtained if the -m*K**3 part of the summed cubic is dropped.
    """

    PRINTED = "printed"
    DERIVATION = "derivation"


@dataclass(frozen=True)
class ExponentPolynomial:
    """
    f(y) = quartic*y**4 - cubic*y**3 + quadratic*y**2 + linear*y at fixed x.

    Works elementwise on numpy arrays.
    """

    linear: float
    quadratic: float
    cubic: float
    quartic: float

    def __call__(self, y: Any) -> Any:
        return (((self.quartic * y - self.cubic) * y + self.quadratic) * y + self.linear) * y

    def derivative(self, y: Any) -> Any:
        return ((4.0 * self.quartic * y - 3.0 * self.cubic) * y + 2.0 * self.quadratic) * y + self.linear


@dataclass(frozen=True)
class GbarLaw:
    """
    Limiting law of the scaled inter-loss time.

    Attributes:
        params (CubicParams): Protocol constants.
        rtt (float): Round-trip time R in seconds.
        variant (ExponentVariant): Form of the linear exponent term.
    """

    params: CubicParams = field(default_factory=CubicParams)
    rtt: float = 1.0
    variant: ExponentVariant = ExponentVariant.PRINTED

    def __post_init__(self) -> None:
        object.__setattr__(self, "rtt", require_positive("rtt", self.rtt))
        object.__setattr__(self, "variant", ExponentVariant(self.variant))

    @property
    def linear_weight(self) -> float:
        """Multiplier of x*y in the exponent: 1 or 1/(1 - beta)."""
        if self.variant is ExponentVariant.DERIVATION:
            return 1.0 / (1.0 - self.params.beta)
        return 1.0

    @property
    def cube_root_coefficient(self) -> float:
        """(beta*C**2/(1-beta))**(1/3); times x**(1/3)*R**2 gives the y**3 term."""
        c, beta = self.params.c, self.params.beta
        return (beta * c**2 / (1.0 - beta)) ** (1.0 / 3.0)

    @property
    def square_coefficient(self) -> float:
        """(beta*C**0.5/(1-beta))**(2/3); times x**(2/3)*3R/2 gives the y**2 term."""
        c, beta = self.params.c, self.params.beta
        return (beta * math.sqrt(c) / (1.0 - beta)) ** (2.0 / 3.0)

    def exponent_polynomial(self, x: float) -> ExponentPolynomial:
        """
        Coefficients of f(x, .) for a fixed scaled window ``x >= 0``.
        """
        r = self.rtt
        x13 = x ** (1.0 / 3.0)
        return ExponentPolynomial(
            linear=self.linear_weight * x,
            quadratic=self.square_coefficient * x13 * x13 * 1.5 * r,
            cubic=self.cube_root_coefficient * x13 * r * r,
            quartic=self.params.c * r**3 / 4.0,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {**self.params.to_dict(), "rtt": self.rtt, "variant": self.variant.value}


@dataclass(frozen=True)
class LimitChainEstimate:
    """
    Monte-Carlo estimate of the stationary mean of Gbar along the chain.

    Attributes:
        mean_gbar (float): Average of the retained Gbar samples.
        coefficient (float): 1 / mean_gbar.
        n_samples (int): Retained samples.
        burn_in (int): Discarded initial steps.
        seed (int): Seed of the uniform stream.
        std_error (float): Batch-means standard error of mean_gbar.
        v0 (float): Initial scaled window.
    """

    mean_gbar: float
    coefficient: float
    n_samples: int
    burn_in: int
    seed: int
    std_error: float
    v0: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def gbar_survival(law: GbarLaw, x: float, y: float) -> float:
    """
    P(Gbar_x >= y) = exp(-f(x, y)).

    Args:
        law (GbarLaw): The limiting law.
        x (float): Scaled post-loss window, >= 0.
        y (float): Scaled time, >= 0.

    Returns:
        float: Survival probability.

    Raises:
        DomainError: For negative inputs.
    """
    x = require_non_negative("x", x)
    y = require_non_negative("y", y)
    return math.exp(-law.exponent_polynomial(x)(y))


def gbar_cdf(law: GbarLaw, x: float, y: Any) -> np.ndarray:
    """
    Vectorised CDF of Gbar_x; zero for negative ``y``.
    """
    x = require_non_negative("x", x)
    y = np.asarray(y, dtype=float)
    f = law.exponent_polynomial(x)
    return np.where(y > 0, -np.expm1(-f(np.maximum(y, 0.0))), 0.0)


def gbar_sample(law: GbarLaw, x: float, u: float) -> float:
    """
    Inverse-transform sample: the y with P(Gbar_x >= y) = u.

    The upper bracket is doubled from 1 until f exceeds -ln(u); every doubling
    step checks that f has not decreased. The root is then refined with
    Brent's method to 1e-10.

    Args:
        law (GbarLaw): The limiting law.
        x (float): Scaled post-loss window, >= 0.
        u (float): Uniform variate in (0, 1).

    Returns:
        float: The scaled time y.

    Raises:
        MonotonicityError: If f decreases across the bracket.
        NumericalError: If no bracket is found.
    """
    x = require_non_negative("x", x)
    u = require_open_unit("u", u)
    target = -math.log(u)
    f = law.exponent_polynomial(x)

    # Bracket the quantile
    hi, previous = 1.0, 0.0
    for _ in range(_MAX_DOUBLINGS):
        value = f(hi)
        if value < previous - MONOTONE_TOL:
            raise MonotonicityError(
                f"survival exponent decreased from {previous} to {value} at y={hi} (x={x})"
            )
        if value >= target:
            break
        previous = value
        hi *= 2.0
    else:
        raise NumericalError(f"could not bracket Gbar_{x} quantile for u={u}")
    return brentq(lambda y: f(y) - target, 0.0, hi, xtol=SAMPLE_YTOL)


def gbar_sample_many(law: GbarLaw, x: float, u: Sequence[float]) -> np.ndarray:
    """
    Vectorised :func:`gbar_sample` by simultaneous bisection.

    Agrees with the scalar sampler to the 1e-10 tolerance; suited to large
    independent samples at a fixed ``x``.
    """
    x = require_non_negative("x", x)
    u = np.asarray(u, dtype=float)
    if u.size and not np.all((u > 0) & (u < 1)):
        raise DomainError("all uniform variates must lie in (0, 1)")
    target = -np.log(u)
    f = law.exponent_polynomial(x)

    hi = np.ones_like(target)
    previous = np.zeros_like(target)
    for _ in range(_MAX_DOUBLINGS):
        value = f(hi)
        if np.any(value < previous - MONOTONE_TOL):
            raise MonotonicityError(f"survival exponent decreased in y (x={x})")
        short = value < target
        if not short.any():
            break
        previous = np.where(short, value, previous)
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise NumericalError(f"could not bracket Gbar_{x} quantiles")

    # Bisect all quantiles together
    lo = np.zeros_like(hi)
    while hi.size and np.max(hi - lo) > SAMPLE_YTOL:
        mid = 0.5 * (lo + hi)
        below = f(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def vbar_step(law: GbarLaw, v: float, g: float) -> float:
    """
    Next scaled post-loss window: (1 - beta) * C * (g*R - K(v))**3 + v.

    Args:
        law (GbarLaw): The limiting law.
        v (float): Current scaled post-loss window, >= 0.
        g (float): Scaled time to the next loss, >= 0.

    Returns:
        float: The next window, never below (1 - beta) * v.
    """
    v = require_non_negative("v", v)
    g = require_non_negative("g", g)
    params = law.params
    return (1.0 - params.beta) * params.c * (g * law.rtt - k_offset(v, params)) ** 3 + v


def _chain_samples(law: GbarLaw, steps: int, seed: int, v0: float) -> Iterator[float]:
    """Yield Gbar_{V_0}, Gbar_{V_1}, ... ; step i consumes uniform i of the stream."""
    uniforms = open_uniforms(make_generator(seed), steps)
    v = v0
    for u in uniforms:
        g = gbar_sample(law, v, float(u))
        yield g
        v = vbar_step(law, v, g)


def estimate_mean_gbar(
    law: GbarLaw,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 42,
    v0: float = DEFAULT_V0,
) -> LimitChainEstimate:
    """
    Estimate E[Gbar] under the chain's stationary law by a seeded run.

    Args:
        law (GbarLaw): The limiting law.
        n (int): Retained samples, >= 1.
        burn_in (int): Initial steps to discard.
        seed (int): Seed of the uniform stream.
        v0 (float): Initial scaled window, >= 0.

    Returns:
        LimitChainEstimate: Mean, coefficient and standard error.
    """
    n = require_count("n", n)
    burn_in = require_count("burn_in", burn_in, minimum=0)
    v0 = require_non_negative("v0", v0)

    # Run the chain and drop the burn-in
    samples = list(_chain_samples(law, burn_in + n, seed, v0))[burn_in:]
    mean = compensated_mean(samples)
    estimate = LimitChainEstimate(
        mean_gbar=mean,
        coefficient=1.0 / mean,
        n_samples=n,
        burn_in=burn_in,
        seed=seed,
        std_error=batch_means_std_error(samples),
        v0=v0,
    )
    logger.info(
        "limit chain (%s, R=%g): E[Gbar] ~ %.6f +/- %.6f from n=%d",
        law.variant.value,
        law.rtt,
        estimate.mean_gbar,
        estimate.std_error,
        n,
    )
    return estimate


def running_mean_trace(
    law: GbarLaw, n: int, seed: int = 42, v0: float = DEFAULT_V0
) -> List[float]:
    """
    Running averages n**-1 * sum(Gbar_{V_i}) for i = 1..n, without burn-in.
    """
    n = require_count("n", n)
    v0 = require_non_negative("v0", v0)
    samples = np.fromiter(_chain_samples(law, n, seed, v0), dtype=float, count=n)
    return (np.cumsum(samples) / np.arange(1, n + 1)).tolist()


def response_coefficient(
    law: GbarLaw,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 42,
    v0: float = DEFAULT_V0,
) -> float:
    """
    Coefficient a in E[W] ~ a * p**(-3/4) at this law's RTT.
    """
    return 1.0 / estimate_mean_gbar(law, n, burn_in, seed, v0).mean_gbar


def select_variant(
    params: CubicParams,
    rtt: float = 1.0,
    target: float = PUBLISHED_MEAN_GBAR,
    n: int = 10000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 42,
) -> Tuple[ExponentVariant, Dict[ExponentVariant, LimitChainEstimate]]:
    """
    Run the chain under both exponent variants and pick the one closer to ``target``.

    Returns:
        tuple: (chosen variant, estimates per variant).
    """
    estimates = {
        variant: estimate_mean_gbar(GbarLaw(params, rtt, variant), n, burn_in, seed)
        for variant in ExponentVariant
    }
    chosen = min(estimates, key=lambda v: abs(estimates[v].mean_gbar - target))
    logger.info("exponent variant %s is closest to E[Gbar]=%g", chosen.value, target)
    return chosen, estimates


def bound_xstar_of_y(law: GbarLaw, y: float) -> float:
    """
    The x > 0 minimising f(x, y), so that H(y) = exp(-f(x*(y), y)).

    For the printed exponent this is
    (R**3*y**3/8) * (-a + sqrt(a**2 + (4/3)*b))**3 with
    a = (beta*C**0.5/(1-beta))**(2/3) and b = (beta*C**2/(1-beta))**(1/3).

    Raises:
        DomainError: If y <= 0.
    """
    y = require_positive("y", y)
    a = law.square_coefficient
    b = law.cube_root_coefficient
    s = law.linear_weight
    t = law.rtt * y * (-a + math.sqrt(a * a + 4.0 * s * b / 3.0)) / (2.0 * s)
    return t**3


def gamma_constant(
    params: CubicParams, variant: ExponentVariant = ExponentVariant.PRINTED
) -> float:
    """
    gamma(C, beta) = f(x*(y), y) / (R**3 * y**4), evaluated at y = 1, R = 1.

    The ratio is checked to be the same at y in {0.5, 1, 2, 5}.

    Raises:
        NumericalError: If the ratio varies by more than 1e-9 relative.
    """
    law = GbarLaw(params, 1.0, variant)

    def ratio(y: float) -> float:
        return law.exponent_polynomial(bound_xstar_of_y(law, y))(y) / y**4

    # Check scale invariance
    gamma = ratio(1.0)
    for y in (0.5, 2.0, 5.0):
        other = ratio(y)
        if abs(other - gamma) > GAMMA_RTOL * abs(gamma):
            raise NumericalError(f"gamma is not scale invariant: {gamma} at y=1, {other} at y={y}")
    return gamma


def h_bound(law: GbarLaw, y: float) -> float:
    """
    H(y) = exp(-gamma * R**3 * y**4), an upper bound on P(Gbar_x >= y) for every x.
    """
    y = require_non_negative("y", y)
    gamma = gamma_constant(law.params, law.variant)
    return math.exp(-gamma * law.rtt**3 * y**4)


def ks_distance_to_gbar(samples: Sequence[float], law: GbarLaw, x: float) -> float:
    """
    KS distance between ``samples`` and the CDF of Gbar_x.
    """
    return ks_distance(samples, lambda y: gbar_cdf(law, x, y))


def sample_gbar(law: GbarLaw, x: float, n: int, seed: int = 42) -> np.ndarray:
    """
    ``n`` independent seeded draws of Gbar_x.
    """
    n = require_count("n", n)
    return gbar_sample_many(law, x, open_uniforms(make_generator(seed), n))


def survival_grid(
    law: GbarLaw, xs: Sequence[float], ys: Sequence[float]
) -> Dict[str, List[float]]:
    """
    Survival curves P(Gbar_x >= y) for each x, next to H(y), as columns.

    Returns:
        dict: ``{"y": ys, "H": H(ys), "x=<x>": survival, ...}``.
    """
    columns: Dict[str, List[float]] = {"y": [float(y) for y in ys]}
    columns["H"] = [h_bound(law, y) for y in ys]
    for x in xs:
        columns[f"x={x:g}"] = [gbar_survival(law, x, y) for y in ys]
    return columns


def h_dominates(
    law: GbarLaw, xs: Sequence[float], ys: Sequence[float], tol: float = 1e-12
) -> Optional[Tuple[float, float]]:
    """
    First (x, y) on the grid where survival exceeds H(y) by more than ``tol``.

    Returns:
        tuple or None: The violating point, or None when H dominates everywhere.
    """
    for y in ys:
        bound = h_bound(law, y)
        for x in xs:
            if gbar_survival(law, x, y) > bound + tol:
                return float(x), float(y)
    return None
