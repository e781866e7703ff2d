"""
Model implementations for fmus-cubic.

Importing this package registers the built-in table methods ``det_fluid``,
``approx_markov`` and ``packet_sim``.
"""

from fmus_cubic.models.base import ResponseModel, get_method, register_method, registered_methods
from fmus_cubic.models.packet_sim import PacketSimModel
from fmus_cubic.models.response import ApproxMarkovModel, DetFluidModel

__all__ = [
    "ApproxMarkovModel",
    "DetFluidModel",
    "PacketSimModel",
    "ResponseModel",
    "get_method",
    "register_method",
    "registered_methods",
]
