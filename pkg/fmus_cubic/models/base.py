"""
Base class and registry for response models.

A response model maps protocol parameters and a path to a mean window. Table
generation looks models up by name, so new approximations can be plugged in
with the :func:`register_method` decorator.
"""

from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Type, TypeVar

from fmus_cubic.core.params import CubicParams, NetworkPath

M = TypeVar("M", bound="ResponseModel")

_REGISTERED_METHODS: Dict[str, Type["ResponseModel"]] = {}


class ResponseModel(ABC):
    """
    Abstract base class for mean-window models.

    Subclasses are constructed with keyword options (coefficients, simulation
    length, seed) and evaluated per (params, path) cell.
    """

    name: str = ""

    @abstractmethod
    def mean_window(self, params: CubicParams, path: NetworkPath) -> float:
        """
        Average congestion window for one configuration.

        Args:
            params (CubicParams): Protocol constants.
            path (NetworkPath): RTT and drop probability.

        Returns:
            float: Mean window in packets.
        """

    @property
    def stochastic(self) -> bool:
        """Whether evaluation consumes random numbers."""
        return False

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


def register_method(method_name: str) -> Callable[[Type[M]], Type[M]]:
    """
    Decorator to register a response model under a table method name.

    Args:
        method_name (str): The name used in tables and on the command line.

    Returns:
        callable: Decorator function that registers the class.
    """

    def decorator(cls: Type[M]) -> Type[M]:
        cls.name = method_name
        _REGISTERED_METHODS[method_name] = cls
        return cls

    return decorator


def get_method(method_name: str) -> Type[ResponseModel]:
    """
    Get a registered response model by name.

    Args:
        method_name (str): The name of the registered method.

    Returns:
        class: The model class.

    Raises:
        ValueError: If the method is not registered.
    """
    if method_name not in _REGISTERED_METHODS:
        raise ValueError(f"Method '{method_name}' is not registered")
    return _REGISTERED_METHODS[method_name]


def registered_methods() -> List[str]:
    """Names of all registered methods, in registration order."""
    return list(_REGISTERED_METHODS)
