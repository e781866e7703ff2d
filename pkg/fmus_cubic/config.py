"""
Configuration for fmus-cubic.

Headline defaults live in :class:`Defaults`; the default seed can be overridden
with the ``FMUS_CUBIC_SEED`` environment variable. Response coefficients per
(C, beta) are read from a JSON calibration file that ships with the package
and can be regenerated with ``fmus-cubic calibrate``.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from fmus_cubic.core.params import DEFAULT_BETA, DEFAULT_C, CubicParams
from fmus_cubic.exceptions import DomainError

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "FMUS_CUBIC_SEED"
CALIBRATION_PATH = Path(__file__).resolve().parent / "data" / "calibration.json"
DEFAULT_RENO_COEFFICIENT = 1.31


@dataclass(frozen=True)
class Defaults:
    """
    Default values used by the command line and the table generator.

    Attributes:
        c (float): CUBIC growth scale.
        beta (float): Back-off fraction.
        rtt (float): Round-trip time in seconds.
        seed (int): Seed of every stochastic run.
        n (int): Retained limit-chain samples.
        burn_in (int): Discarded limit-chain steps.
        reno_coefficient (float): Reno response coefficient.
        w_max (int, optional): Window cap for simulations.
        sim_rtts (int): RTTs per simulated table cell.
    """

    c: float = DEFAULT_C
    beta: float = DEFAULT_BETA
    rtt: float = 1.0
    seed: int = 42
    n: int = 10000
    burn_in: int = 250
    reno_coefficient: float = DEFAULT_RENO_COEFFICIENT
    w_max: Optional[int] = None
    sim_rtts: int = 1000000

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Defaults":
        """
        Build defaults, honouring ``FMUS_CUBIC_SEED`` when set.

        Args:
            environ (Mapping, optional): Environment to read; ``os.environ`` by default.

        Returns:
            Defaults: The configuration.

        Raises:
            DomainError: If the variable is not a non-negative integer.
        """
        environ = os.environ if environ is None else environ
        raw = environ.get(SEED_ENV_VAR)
        # Unset or blank keeps the default seed
        if raw is None or raw.strip() == "":
            return cls()
        try:
            seed = int(raw)
        except ValueError:
            raise DomainError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None
        if seed < 0:
            raise DomainError(f"{SEED_ENV_VAR} must be >= 0, got {seed}")
        return cls(seed=seed)

    def params(self) -> CubicParams:
        return CubicParams(self.c, self.beta)


@dataclass(frozen=True)
class CalibrationEntry:
    """
    One calibrated response coefficient at R = 1.

    Attributes:
        c (float): CUBIC growth scale.
        beta (float): Back-off fraction.
        coefficient (float): a in E[W] = a * (R/p)**(3/4).
        mean_gbar (float): Stationary mean of the scaled inter-loss time.
        variant (str): Survival exponent variant used.
        n (int, optional): Samples behind the estimate; None for published values.
        seed (int, optional): Seed behind the estimate.
        source (str): "published" or "estimated".
    """

    c: float
    beta: float
    coefficient: float
    mean_gbar: float
    variant: str = "printed"
    n: Optional[int] = None
    seed: Optional[int] = None
    source: str = "estimated"

    def matches(self, params: CubicParams) -> bool:
        return math.isclose(self.c, params.c, rel_tol=1e-9) and math.isclose(
            self.beta, params.beta, rel_tol=1e-9
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["C"] = data.pop("c")
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CalibrationEntry":
        return cls(
            c=float(data["C"]),
            beta=float(data["beta"]),
            coefficient=float(data["coefficient"]),
            mean_gbar=float(data["mean_gbar"]),
            variant=data.get("variant", "printed"),
            n=data.get("n"),
            seed=data.get("seed"),
            source=data.get("source", "estimated"),
        )


def load_calibration(path: Union[str, Path, None] = None) -> List[CalibrationEntry]:
    """
    Read calibration entries.

    Args:
        path (str or Path, optional): Calibration file; the packaged one by default.

    Returns:
        list: The entries in file order.

    Raises:
        DomainError: If the file is malformed.
    """
    path = CALIBRATION_PATH if path is None else Path(path)
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    try:
        return [CalibrationEntry.from_dict(entry) for entry in document["entries"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed calibration file {path}: {exc}") from exc


def write_calibration(entries: List[CalibrationEntry], path: Union[str, Path]) -> None:
    """
    Write calibration entries as JSON at R = 1.
    """
    document = {"rtt": 1.0, "entries": [entry.to_dict() for entry in entries]}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")
    logger.info("wrote %d calibration entries to %s", len(entries), path)


def coefficient_for(
    params: CubicParams,
    path: Union[str, Path, None] = None,
    source: Optional[str] = None,
) -> float:
    """
    Calibrated response coefficient for ``params``.

    Published entries win over estimated ones unless ``source`` asks for a
    specific kind.

    Args:
        params (CubicParams): Protocol constants.
        path (str or Path, optional): Calibration file.
        source (str, optional): "published" or "estimated".

    Returns:
        float: The coefficient.

    Raises:
        DomainError: If (C, beta) has no entry of the requested source.
    """
    entries = [entry for entry in load_calibration(path) if entry.matches(params)]
    if source is not None:
        entries = [entry for entry in entries if entry.source == source]
    # stable sort: file order within each source
    entries.sort(key=lambda entry: entry.source != "published")
    if entries:
        return entries[0].coefficient
    raise DomainError(
        f"no calibrated coefficient for C={params.c}, beta={params.beta}"
        + (f" with source {source!r}" if source else "")
        + "; run `fmus-cubic calibrate` or pass a coefficient"
    )
