"""
Protocol and path parameters.

This module defines the two value objects passed to every model: the CUBIC
constants (C, beta) and the network path (RTT, drop probability, window cap).
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from fmus_cubic.utils.validation import (
    require_open_unit,
    require_optional_count,
    require_positive,
)

DEFAULT_C = 0.4
DEFAULT_BETA = 0.3


@dataclass(frozen=True)
class CubicParams:
    """
    TCP CUBIC growth scale and multiplicative back-off.

    Attributes:
        c (float): Growth scale in packets per second cubed.
        beta (float): Fraction of the window removed on a loss, in (0, 1).
    """

    c: float = DEFAULT_C
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", require_positive("c", self.c))
        object.__setattr__(self, "beta", require_open_unit("beta", self.beta))

    @property
    def reno_slope(self) -> float:
        """Reno-mode growth in packets per RTT, 3*beta/(2 - beta)."""
        return 3.0 * self.beta / (2.0 - self.beta)

    def with_beta(self, beta: float) -> "CubicParams":
        """Return a copy with a different back-off fraction."""
        return replace(self, beta=beta)

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping used in CLI envelopes."""
        return {"C": self.c, "beta": self.beta}


@dataclass(frozen=True)
class NetworkPath:
    """
    A single flow's path: fixed round-trip time and random per-packet loss.

    Attributes:
        rtt (float): Round-trip time in seconds.
        drop_prob (float): Independent per-packet loss probability in (0, 1).
        w_max (int, optional): Upper cap on the window in packets.
    """

    rtt: float = 1.0
    drop_prob: float = 0.01
    w_max: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rtt", require_positive("rtt", self.rtt))
        object.__setattr__(self, "drop_prob", require_open_unit("drop_prob", self.drop_prob))
        object.__setattr__(self, "w_max", require_optional_count("w_max", self.w_max))

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping used in CLI envelopes."""
        return {"rtt": self.rtt, "p": self.drop_prob, "w_max": self.w_max}
