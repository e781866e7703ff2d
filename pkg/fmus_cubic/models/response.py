"""
Closed-form response functions and comparison tables.

The approximate response function is

    E[W] = max(a * (R/p)**(3/4), b / sqrt(p))

with a the limit-chain coefficient (1.3004 for C=0.4, beta=0.3) and b the Reno
coefficient 1.31. The deterministic fluid model has the same shape with
a = (C*(4-beta)/(4*beta))**(1/4).
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence

import pandas as pd

from fmus_cubic.config import DEFAULT_RENO_COEFFICIENT, coefficient_for
from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.exceptions import DomainError
from fmus_cubic.models.base import ResponseModel, get_method, register_method
from fmus_cubic.utils.validation import (
    require_count,
    require_non_negative,
    require_open_unit,
    require_positive,
)

logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENT = 1.3004
BETA02_COEFFICIENT = 1.54
QUANTITIES = ("window", "goodput")


class TableGrid(NamedTuple):
    """Drop probabilities and RTTs of a published comparison table."""

    p_list: List[float]
    rtt_list: List[float]


TABLE_I_GRID = TableGrid([1e-2, 5e-3, 1e-3, 5e-4, 8e-5], [1.0, 0.2, 0.1, 0.02, 0.01])
TABLE_III_GRID = TableGrid([1e-2, 5e-3, 3e-3], [1.0, 0.2, 0.1, 0.02, 0.01])


@dataclass(frozen=True)
class ResponseInputs:
    """
    Inputs of the approximate response function.

    Attributes:
        params (CubicParams): Protocol constants.
        rtt_or_mean_rtt (float): R, or E[R] for a flow sharing a queue.
        drop_prob (float): Per-packet drop probability.
        coefficient (float): Limit-chain coefficient.
        reno_coefficient (float): Reno coefficient.
    """

    params: CubicParams = field(default_factory=CubicParams)
    rtt_or_mean_rtt: float = 1.0
    drop_prob: float = 0.01
    coefficient: float = DEFAULT_COEFFICIENT
    reno_coefficient: float = DEFAULT_RENO_COEFFICIENT

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "rtt_or_mean_rtt", require_positive("rtt_or_mean_rtt", self.rtt_or_mean_rtt)
        )
        object.__setattr__(self, "drop_prob", require_open_unit("drop_prob", self.drop_prob))
        object.__setattr__(self, "coefficient", require_positive("coefficient", self.coefficient))
        object.__setattr__(
            self, "reno_coefficient", require_positive("reno_coefficient", self.reno_coefficient)
        )


def _max_branch(coefficient: float, reno_coefficient: float, rtt: float, p: float) -> float:
    return max(coefficient * (rtt / p) ** 0.75, reno_coefficient / p**0.5)


def mean_window_approx(inp: ResponseInputs) -> float:
    """
    Approximate mean window max(a * (R/p)**(3/4), b / sqrt(p)).

    Args:
        inp (ResponseInputs): Coefficients, RTT and drop probability.

    Returns:
        float: Mean window in packets.
    """
    return _max_branch(inp.coefficient, inp.reno_coefficient, inp.rtt_or_mean_rtt, inp.drop_prob)


def det_coefficient(params: CubicParams) -> float:
    """
    Fluid-model coefficient (C*(4-beta)/(4*beta))**(1/4); 1.0538 at C=0.4, beta=0.3.
    """
    return (params.c * (4.0 - params.beta) / (4.0 * params.beta)) ** 0.25


def mean_window_det(
    params: CubicParams,
    rtt: float,
    p: float,
    reno_coefficient: float = DEFAULT_RENO_COEFFICIENT,
) -> float:
    """
    Deterministic-loss mean window with the Reno-mode floor.

    Args:
        params (CubicParams): Protocol constants.
        rtt (float): Round-trip time in seconds.
        p (float): Drop probability.
        reno_coefficient (float): Reno coefficient.

    Returns:
        float: max(det_coefficient * (R/p)**(3/4), reno_coefficient / sqrt(p)).
    """
    rtt = require_positive("rtt", rtt)
    p = require_open_unit("p", p)
    reno_coefficient = require_positive("reno_coefficient", reno_coefficient)
    return _max_branch(det_coefficient(params), reno_coefficient, rtt, p)


def goodput(mean_window: float, rtt: float, drop_prob: Optional[float] = None) -> float:
    """
    Packets per second delivered by a flow with the given mean window.

    Without ``drop_prob`` this is the throughput mean_window / R. With it, the
    lost fraction is removed: (1 - p) * mean_window / R, which is how the
    published goodput table relates to the window table.

    Args:
        mean_window (float): Mean window in packets.
        rtt (float): Round-trip time in seconds.
        drop_prob (float, optional): Per-packet drop probability.

    Returns:
        float: Packets per second.
    """
    mean_window = require_non_negative("mean_window", mean_window)
    rtt = require_positive("rtt", rtt)
    if drop_prob is None:
        return mean_window / rtt
    return (1.0 - require_open_unit("drop_prob", drop_prob)) * mean_window / rtt


def mean_window_beta02(rtt: float, p: float) -> float:
    """Approximate mean window for C=0.4, beta=0.2 (coefficient 1.54)."""
    return mean_window_approx(
        ResponseInputs(
            params=CubicParams(beta=0.2),
            rtt_or_mean_rtt=rtt,
            drop_prob=p,
            coefficient=BETA02_COEFFICIENT,
        )
    )


def mean_window_multiflow(inp: ResponseInputs) -> float:
    """
    Mean window of a flow whose RTT includes queueing: R is replaced by E[R].

    E[R] comes from a queueing model outside this package; the formula is the
    single-flow one evaluated at ``inp.rtt_or_mean_rtt``.
    """
    return mean_window_approx(inp)


def reno_crossover_drop_prob(
    coefficient: float, reno_coefficient: float, rtt: float
) -> float:
    """
    Drop probability above which the Reno branch of the max is active.

    Solving a * (R/p)**(3/4) = b / sqrt(p) gives p = (a/b)**4 * R**3; for
    larger p the Reno term wins.
    """
    coefficient = require_positive("coefficient", coefficient)
    reno_coefficient = require_positive("reno_coefficient", reno_coefficient)
    rtt = require_positive("rtt", rtt)
    return (coefficient / reno_coefficient) ** 4 * rtt**3


@register_method("det_fluid")
class DetFluidModel(ResponseModel):
    """Deterministic periodic-loss response, with the Reno floor."""

    def __init__(self, reno_coefficient: float = DEFAULT_RENO_COEFFICIENT):
        self.reno_coefficient = require_positive("reno_coefficient", reno_coefficient)

    def mean_window(self, params: CubicParams, path: NetworkPath) -> float:
        return mean_window_det(params, path.rtt, path.drop_prob, self.reno_coefficient)


@register_method("approx_markov")
class ApproxMarkovModel(ResponseModel):
    """
    Limit-chain response.

    Args:
        coefficient (float, optional): Fixed coefficient; when omitted it is
            looked up per (C, beta) in the calibration file.
        reno_coefficient (float): Reno coefficient.
    """

    def __init__(
        self,
        coefficient: Optional[float] = None,
        reno_coefficient: float = DEFAULT_RENO_COEFFICIENT,
    ):
        self.coefficient = None if coefficient is None else require_positive("coefficient", coefficient)
        self.reno_coefficient = require_positive("reno_coefficient", reno_coefficient)

    def coefficient_for(self, params: CubicParams) -> float:
        return coefficient_for(params) if self.coefficient is None else self.coefficient

    def mean_window(self, params: CubicParams, path: NetworkPath) -> float:
        return mean_window_approx(
            ResponseInputs(
                params=params,
                rtt_or_mean_rtt=path.rtt,
                drop_prob=path.drop_prob,
                coefficient=self.coefficient_for(params),
                reno_coefficient=self.reno_coefficient,
            )
        )


def _build_models(
    methods: Sequence[str], method_options: Mapping[str, Mapping[str, Any]]
) -> List[ResponseModel]:
    if not methods:
        raise DomainError("at least one method is required")
    return [get_method(name)(**dict(method_options.get(name, {}))) for name in methods]


def generate_table(
    p_list: Sequence[float],
    rtt_list: Sequence[float],
    methods: Sequence[str] = ("det_fluid", "approx_markov"),
    sim_config_defaults: Optional[Mapping[str, Any]] = None,
    params: Optional[CubicParams] = None,
    quantity: str = "window",
    threads: Optional[int] = None,
    method_options: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> pd.DataFrame:
    """
    Evaluate methods over a (p, R) grid.

    Rows are sorted by p descending, then R descending. Simulated cells may be
    evaluated concurrently; the row order does not depend on ``threads``.

    Args:
        p_list (sequence): Drop probabilities.
        rtt_list (sequence): Round-trip times.
        methods (sequence): Registered method names, one column each.
        sim_config_defaults (Mapping, optional): Options of the ``packet_sim``
            method (n_rtts, seed, reno_mode, w_max).
        params (CubicParams, optional): Protocol constants; defaults to C=0.4, beta=0.3.
        quantity (str): "window" for E[W] or "goodput" for (1 - p) * E[W] / R.
        threads (int, optional): Worker threads for stochastic methods.
        method_options (Mapping, optional): Constructor options per method name.

    Returns:
        pandas.DataFrame: Columns ``p``, ``R`` and one per method.

    Raises:
        DomainError: On empty grids or an unknown quantity.
        ValueError: If a method is not registered.
    """
    # Validate grid
    if len(p_list) == 0 or len(rtt_list) == 0:
        raise DomainError("p_list and R_list must both be non-empty")
    if quantity not in QUANTITIES:
        raise DomainError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    if threads is not None:
        threads = require_count("threads", threads)
    params = CubicParams() if params is None else params

    # Build one model per method name
    options: Dict[str, Dict[str, Any]] = {
        name: dict(values) for name, values in (method_options or {}).items()
    }
    if sim_config_defaults:
        options.setdefault("packet_sim", {}).update(sim_config_defaults)
    models = _build_models(methods, options)

    # Sort the grid, p descending then R descending
    ps = sorted({require_open_unit("p", p) for p in p_list}, reverse=True)
    rtts = sorted({require_positive("R", r) for r in rtt_list}, reverse=True)
    cells = [NetworkPath(rtt=r, drop_prob=p) for p in ps for r in rtts]

    columns: Dict[str, List[float]] = {
        "p": [cell.drop_prob for cell in cells],
        "R": [cell.rtt for cell in cells],
    }
    for model in models:
        logger.debug("table: evaluating %s over %d cells", model.name, len(cells))
        if model.stochastic:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                windows = list(pool.map(lambda cell: model.mean_window(params, cell), cells))
        else:
            windows = [model.mean_window(params, cell) for cell in cells]
        if quantity == "goodput":
            windows = [goodput(w, cell.rtt, cell.drop_prob) for w, cell in zip(windows, cells)]
        columns[model.name] = windows
    return pd.DataFrame(columns)


def table_to_csv(table: pd.DataFrame) -> str:
    """CSV text with header ``p,R,<methods>`` and shortest round-trip floats."""
    return table.to_csv(index=False, lineterminator="\n")


def table_to_records(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Rows as plain dicts of Python floats."""
    return [
        {column: float(value) for column, value in row.items()}
        for row in table.to_dict(orient="records")
    ]


def table_to_json(table: pd.DataFrame) -> str:
    """JSON array of row objects."""
    return json.dumps(table_to_records(table))
