"""
Seeded RTT-granularity simulation of the random-loss window process.

The state after each loss is the post-loss window x0 and the number of RTTs
d since that loss. Each RTT the window is first advanced along the cubic law
(optionally floored by the Reno-friendly line), then the whole window is sent
and the RTT is lossy with probability 1 - (1 - p)**w.

Losses are drawn as a geometric packet budget per loss epoch: the epoch ends
in the first RTT whose cumulative packet count reaches the budget. This has
the same law as an independent per-RTT Bernoulli test and also locates the
lost packet inside its RTT.

Two accountings of the lossy RTT are available. LOST_PACKET counts packets up
to and including the lost one, so a loss cycle carries 1/p packets on average
and the mean window is the Palm quantity (1/p) / E[G]. WHOLE_RTT counts the
full window of the lossy RTT; its mean window is the plain time average of
the per-RTT window and exceeds the Palm quantity by a relative O(p**(1/4)).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.core.window import rtt_window_sequence
from fmus_cubic.exceptions import DomainError
from fmus_cubic.models.base import ResponseModel, register_method
from fmus_cubic.utils.rng import make_generator, spawn_generators
from fmus_cubic.utils.validation import (
    require_count,
    require_open_unit,
    require_positive,
)

logger = logging.getLogger(__name__)

_FLOOR_EPS = 1e-9
_BUDGET_BATCH = 4096


class Accounting(Enum):
    """How many packets of the lossy RTT count as sent."""

    LOST_PACKET = "lost_packet"
    WHOLE_RTT = "whole_rtt"


@dataclass(frozen=True)
class SimConfig:
    """
    One simulation run.

    Attributes:
        params (CubicParams): Protocol constants.
        path (NetworkPath): RTT, drop probability and optional window cap.
        n_rtts (int): Number of RTTs to simulate, >= 1.
        seed (int): Seed of the loss stream.
        initial_window (int): Post-loss window the run starts from.
        reno_mode (bool): Take the larger of the cubic and Reno-friendly windows.
        trace_rtts (int): Record the windows of the first ``trace_rtts`` RTTs.
        accounting (Accounting): Packets of the lossy RTT counted as sent.
    """

    params: CubicParams = field(default_factory=CubicParams)
    path: NetworkPath = field(default_factory=NetworkPath)
    n_rtts: int = 100000
    seed: int = 42
    initial_window: int = 1
    reno_mode: bool = False
    trace_rtts: int = 0
    accounting: Accounting = Accounting.LOST_PACKET

    def __post_init__(self) -> None:
        require_count("n_rtts", self.n_rtts)
        require_count("seed", self.seed, minimum=0)
        require_count("initial_window", self.initial_window)
        require_count("trace_rtts", self.trace_rtts, minimum=0)
        try:
            object.__setattr__(self, "accounting", Accounting(self.accounting))
        except ValueError:
            raise DomainError(f"unknown accounting {self.accounting!r}") from None

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.params.to_dict(),
            **self.path.to_dict(),
            "n_rtts": self.n_rtts,
            "seed": self.seed,
            "initial_window": self.initial_window,
            "reno_mode": self.reno_mode,
            "accounting": self.accounting.value,
        }


@dataclass(frozen=True)
class LossEpochRecord:
    """
    One loss epoch: the post-loss window it started from and its length.

    Attributes:
        v (int): Window just after the loss that opened the epoch.
        g (int): RTTs until (and including) the next lossy RTT.
    """

    v: int
    g: int


@dataclass(frozen=True)
class SimStats:
    """
    Summary of a simulation run.

    Attributes:
        mean_window (float): packets_sent / n_rtts, packets per RTT.
        goodput (float): (1 - p) * packets_sent / (n_rtts * R), packets/second.
        packets_sent (int): Packets counted under the run's accounting.
        losses (int): Number of lossy RTTs.
        epochs (list): Completed :class:`LossEpochRecord` entries in order.
        packets_per_loss (float): Packets counted in completed loss cycles
            divided by the number of losses.
        n_rtts (int): Simulated RTTs.
        window_average (float): Time average of the full per-RTT window,
            whatever the accounting.
        trace (list): Windows of the first ``trace_rtts`` RTTs.
    """

    mean_window: float
    goodput: float
    packets_sent: int
    losses: int
    epochs: List[LossEpochRecord]
    packets_per_loss: float
    n_rtts: int
    window_average: float
    trace: List[int] = field(default_factory=list)

    def to_dict(self, include_epochs: bool = False) -> Dict[str, Any]:
        data = {
            "mean_window": self.mean_window,
            "window_average": self.window_average,
            "goodput": self.goodput,
            "packets_sent": self.packets_sent,
            "losses": self.losses,
            "packets_per_loss": self.packets_per_loss,
            "n_rtts": self.n_rtts,
            "epochs": len(self.epochs),
        }
        if include_epochs:
            data["epochs"] = [asdict(e) for e in self.epochs]
        if self.trace:
            data["trace"] = list(self.trace)
        return data


@dataclass
class _Tally:
    window_sum: int = 0
    packets: int = 0
    cycle_packets: int = 0
    n_rtts: int = 0
    losses: int = 0
    epochs: List[LossEpochRecord] = field(default_factory=list)
    trace: List[int] = field(default_factory=list)


def _loss_budgets(rng: np.random.Generator, p: float) -> Iterator[int]:
    """Endless stream of geometric packet budgets, drawn in fixed-size batches."""
    while True:
        for budget in rng.geometric(p, size=_BUDGET_BATCH):
            yield int(budget)


def _run(
    params: CubicParams,
    path: NetworkPath,
    rng: np.random.Generator,
    initial_window: int,
    reno_mode: bool = False,
    max_rtts: Optional[int] = None,
    max_losses: Optional[int] = None,
    trace_rtts: int = 0,
    accounting: Accounting = Accounting.LOST_PACKET,
) -> _Tally:
    c, beta, rtt = params.c, params.beta, path.rtt
    w_max = path.w_max
    slope = params.reno_slope
    plateau_scale = 1.0 / (1.0 - beta)
    k_scale = beta / ((1.0 - beta) * c)
    whole_rtt = accounting is Accounting.WHOLE_RTT

    tally = _Tally()
    budgets = _loss_budgets(rng, path.drop_prob)
    x0 = initial_window if w_max is None else min(initial_window, w_max)
    k = (k_scale * x0) ** (1.0 / 3.0)
    d = 0
    sent_in_epoch = 0
    budget = next(budgets)

    while (max_rtts is None or tally.n_rtts < max_rtts) and (
        max_losses is None or tally.losses < max_losses
    ):
        # Grow first, then send the whole window.
        d += 1
        w = math.floor(c * (d * rtt - k) ** 3 + x0 * plateau_scale + _FLOOR_EPS)
        if reno_mode:
            w = max(w, math.floor(x0 + slope * d + _FLOOR_EPS))
        if w < 1:
            w = 1
        if w_max is not None and w > w_max:
            w = w_max

        tally.n_rtts += 1
        tally.window_sum += w
        if len(tally.trace) < trace_rtts:
            tally.trace.append(w)

        if sent_in_epoch + w >= budget:
            # The budget-th packet of the epoch is the lost one.
            counted = w if whole_rtt else budget - sent_in_epoch
            tally.packets += counted
            tally.cycle_packets += sent_in_epoch + counted
            tally.losses += 1
            tally.epochs.append(LossEpochRecord(v=x0, g=d))
            x0 = max(1, math.floor((1.0 - beta) * w + _FLOOR_EPS))
            k = (k_scale * x0) ** (1.0 / 3.0)
            d = 0
            sent_in_epoch = 0
            budget = next(budgets)
        else:
            tally.packets += w
            sent_in_epoch += w
    return tally


def _stats(tallies: List[_Tally], path: NetworkPath) -> SimStats:
    # Integer totals keep merged replications independent of their order.
    n_rtts = sum(t.n_rtts for t in tallies)
    sent = sum(t.packets for t in tallies)
    losses = sum(t.losses for t in tallies)
    cycle_packets = sum(t.cycle_packets for t in tallies)
    return SimStats(
        mean_window=sent / n_rtts,
        goodput=(1.0 - path.drop_prob) * sent / (n_rtts * path.rtt),
        packets_sent=sent,
        losses=losses,
        epochs=[e for t in tallies for e in t.epochs],
        packets_per_loss=cycle_packets / losses if losses else math.nan,
        n_rtts=n_rtts,
        window_average=sum(t.window_sum for t in tallies) / n_rtts,
        trace=list(tallies[0].trace) if tallies else [],
    )


def simulate(config: SimConfig) -> SimStats:
    """
    Run one seeded simulation.

    Args:
        config (SimConfig): Run description.

    Returns:
        SimStats: Bit-identical for identical configurations.
    """
    tally = _run(
        config.params,
        config.path,
        make_generator(config.seed),
        config.initial_window,
        reno_mode=config.reno_mode,
        max_rtts=config.n_rtts,
        trace_rtts=config.trace_rtts,
        accounting=config.accounting,
    )
    stats = _stats([tally], config.path)
    logger.debug(
        "simulate: p=%g R=%g reno=%s -> E[W]=%.4f over %d RTTs, %d losses",
        config.path.drop_prob,
        config.path.rtt,
        config.reno_mode,
        stats.mean_window,
        stats.n_rtts,
        stats.losses,
    )
    return stats


def simulate_replications(
    config: SimConfig, n_replications: int, threads: Optional[int] = None
) -> SimStats:
    """
    Run independent replications and merge them.

    Replication i uses the i-th stream spawned from ``config.seed``; totals
    are exact integer sums and epochs are concatenated by replication index,
    so the result does not depend on ``threads``.

    Args:
        config (SimConfig): Per-replication description.
        n_replications (int): Number of replications.
        threads (int, optional): Worker threads; None lets the executor choose.

    Returns:
        SimStats: Merged statistics over ``n_replications * n_rtts`` RTTs.
    """
    n_replications = require_count("n_replications", n_replications)
    generators = spawn_generators(config.seed, n_replications)

    def run_one(rng: np.random.Generator) -> _Tally:
        return _run(
            config.params,
            config.path,
            rng,
            config.initial_window,
            reno_mode=config.reno_mode,
            max_rtts=config.n_rtts,
            trace_rtts=config.trace_rtts,
            accounting=config.accounting,
        )

    # One independent stream per replication
    with ThreadPoolExecutor(max_workers=threads) as pool:
        tallies = list(pool.map(run_one, generators))
    return _stats(tallies, config.path)


def _scaled_start(p: float, x: float) -> int:
    if x <= p**0.75:
        raise DomainError(f"scaled window x must exceed p**0.75={p ** 0.75:g}, got {x!r}")
    return max(1, math.floor(x / p**0.75 + _FLOOR_EPS))


def _first_loss(
    params: CubicParams, rtt: float, p: float, x0: int, n: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    RTT index G of the first loss and the window in that RTT, for ``n`` runs from ``x0``.

    Loss-free growth from a fixed x0 is deterministic, so all runs share one
    window sequence and differ only in their geometric packet budgets.
    """
    budgets = rng.geometric(p, size=n)
    # Extend the shared window sequence until it covers the largest budget
    length = 64
    while True:
        windows = np.asarray(rtt_window_sequence(x0, params, rtt, length), dtype=np.int64)
        cumulative = np.cumsum(windows)
        if cumulative[-1] >= budgets.max():
            break
        length *= 2
    index = np.searchsorted(cumulative, budgets, side="left")
    return index + 1, windows[index]


def empirical_scaled_g(
    params: CubicParams, rtt: float, p: float, x: float, n_samples: int, seed: int = 42
) -> np.ndarray:
    """
    Samples of p**(1/4) * G from post-loss window floor(x / p**(3/4)).

    Args:
        params (CubicParams): Protocol constants.
        rtt (float): Round-trip time in seconds.
        p (float): Drop probability.
        x (float): Scaled post-loss window, > p**(3/4).
        n_samples (int): Number of independent first-loss draws.
        seed (int): Seed of the loss stream.

    Returns:
        numpy.ndarray: ``n_samples`` scaled inter-loss times.
    """
    rtt = require_positive("rtt", rtt)
    p = require_open_unit("p", p)
    n_samples = require_count("n_samples", n_samples)
    g, _ = _first_loss(params, rtt, p, _scaled_start(p, x), n_samples, make_generator(seed))
    return p**0.25 * g


def empirical_scaled_v1(
    params: CubicParams, rtt: float, p: float, x: float, n_samples: int, seed: int = 42
) -> np.ndarray:
    """
    Samples of p**(3/4) * V_1 (the first post-loss window) from floor(x / p**(3/4)).
    """
    rtt = require_positive("rtt", rtt)
    p = require_open_unit("p", p)
    n_samples = require_count("n_samples", n_samples)
    _, windows = _first_loss(
        params, rtt, p, _scaled_start(p, x), n_samples, make_generator(seed)
    )
    v1 = np.maximum(1, np.floor((1.0 - params.beta) * windows + _FLOOR_EPS))
    return p**0.75 * v1


def scaled_v_trajectory(
    params: CubicParams, rtt: float, p: float, x0: float, n_epochs: int, seed: int = 42
) -> List[float]:
    """
    Scaled post-loss windows p**(3/4) * V_k, k = 1..n_epochs, of one run.

    The run starts from V_0 = floor(x0 / p**(3/4)), has no window cap and no
    Reno mode, and stops at the n_epochs-th loss.
    """
    rtt = require_positive("rtt", rtt)
    p = require_open_unit("p", p)
    n_epochs = require_count("n_epochs", n_epochs)
    path = NetworkPath(rtt=rtt, drop_prob=p)
    tally = _run(
        params, path, make_generator(seed), _scaled_start(p, x0), max_losses=n_epochs
    )
    scale = p**0.75
    # epochs[k] opened with V_k; V_{n_epochs} is the window after the last loss.
    starts = [e.v for e in tally.epochs[1:]]
    last = tally.epochs[-1]
    final_windows = rtt_window_sequence(last.v, params, rtt, last.g)
    starts.append(max(1, math.floor((1.0 - params.beta) * final_windows[-1] + _FLOOR_EPS)))
    return [scale * v for v in starts]


@register_method("packet_sim")
class PacketSimModel(ResponseModel):
    """
    Mean window measured by :func:`simulate`.

    Args:
        n_rtts (int): RTTs per cell.
        seed (int): Seed shared by all cells.
        reno_mode (bool): Enable the Reno-friendly floor.
        w_max (int, optional): Window cap applied to paths without one.
        accounting (Accounting): Packets of the lossy RTT counted as sent.
    """

    def __init__(
        self,
        n_rtts: int = 1000000,
        seed: int = 42,
        reno_mode: bool = True,
        w_max: Optional[int] = None,
        accounting: Accounting = Accounting.LOST_PACKET,
    ):
        self.n_rtts = require_count("n_rtts", n_rtts)
        self.seed = require_count("seed", seed, minimum=0)
        self.reno_mode = reno_mode
        self.w_max = w_max
        self.accounting = Accounting(accounting)

    @property
    def stochastic(self) -> bool:
        return True

    def mean_window(self, params: CubicParams, path: NetworkPath) -> float:
        if path.w_max is None and self.w_max is not None:
            path = NetworkPath(path.rtt, path.drop_prob, self.w_max)
        config = SimConfig(
            params=params,
            path=path,
            n_rtts=self.n_rtts,
            seed=self.seed,
            reno_mode=self.reno_mode,
            accounting=self.accounting,
        )
        return simulate(config).mean_window
