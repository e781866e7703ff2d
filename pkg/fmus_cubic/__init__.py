"""
fmus-cubic - throughput models of TCP CUBIC under random packet loss.

The library provides the deterministic-loss fluid model, an RTT-level
simulator of the random-loss window process, the limiting Markov chain
that yields the response coefficient, and closed-form response functions
with table generation.
"""

__version__ = "0.1.0"

# Core components
from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.exceptions import CubicModelError, DomainError, MonotonicityError, NumericalError

# Models and the method registry
from fmus_cubic.models import (
    ApproxMarkovModel,
    DetFluidModel,
    PacketSimModel,
    ResponseModel,
    get_method,
    register_method,
    registered_methods,
)
from fmus_cubic.models.fluid import FluidSolution, solve
from fmus_cubic.models.limit_chain import ExponentVariant, GbarLaw, estimate_mean_gbar
from fmus_cubic.models.packet_sim import SimConfig, SimStats, simulate
from fmus_cubic.models.response import ResponseInputs, generate_table, mean_window_approx
