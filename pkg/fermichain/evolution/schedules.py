from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from fermichain.core.model import (
    BdGMatrix,
    ChainSpec,
    ParitySector,
    assemble_bdg,
)
from fermichain.errors import InvalidScheduleError


@dataclass(frozen=True)
class Schedule(ABC):
    """
    Time dependence of the transverse fields (and optionally the bonds).

    Attributes:
        tau (float): Duration, or period for periodic schedules.
    """

    tau: float

    periodic = False
    static = False

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 0:
            raise InvalidScheduleError(f"Invalid schedule duration {self.tau}")
        if self.periodic and self.tau == 0:
            raise InvalidScheduleError("A periodic schedule needs tau > 0")

    @abstractmethod
    def h_of_t(self, t: float, spec: ChainSpec) -> np.ndarray:
        """Per-site transverse fields at time t."""
        pass

    def J_of_t(self, t: float, spec: ChainSpec) -> np.ndarray:
        """Per-bond couplings at time t; constant unless overridden."""
        return np.array(spec.J, dtype=float)

    def spec_at(self, spec: ChainSpec, t: float) -> ChainSpec:
        h = self.h_of_t(t, spec)
        if not np.all(np.isfinite(h)):
            raise InvalidScheduleError(f"Non-finite fields at t={t}")
        return spec.with_fields(h).with_couplings(self.J_of_t(t, spec))

    def bdg_at(
        self,
        spec: ChainSpec,
        t: float,
        sector: ParitySector = ParitySector.EVEN,
    ) -> BdGMatrix:
        return assemble_bdg(self.spec_at(spec, t), sector)

    def _fraction(self, t: float) -> float:
        if self.tau == 0:
            return 1.0 if t > 0 else 0.0
        return float(np.clip(t / self.tau, 0.0, 1.0))


@dataclass(frozen=True)
class ConstantSchedule(Schedule):
    """Fields held at the values of the chain."""

    static = True

    def h_of_t(self, t, spec):
        return spec.fields


@dataclass(frozen=True)
class LinearRamp(Schedule):
    """
    h(t) = h_i + (h_f - h_i) t / tau, held at h_f after tau.

    With h_i left unset the ramp starts from the chain's own fields.
    """

    h_i: Optional[float] = None
    h_f: float = 0.0

    def h_of_t(self, t, spec):
        start = spec.fields if self.h_i is None else np.full(spec.L, self.h_i)
        s = self._fraction(t)
        return start + (self.h_f - start) * s


@dataclass(frozen=True)
class CosineRamp(Schedule):
    """Smooth ramp h(t) = h_f + (h_i - h_f)(1 + cos(pi t / tau)) / 2."""

    h_i: Optional[float] = None
    h_f: float = 0.0

    def h_of_t(self, t, spec):
        start = spec.fields if self.h_i is None else np.full(spec.L, self.h_i)
        s = self._fraction(t)
        return self.h_f + (start - self.h_f) * (1.0 + np.cos(np.pi * s)) / 2


@dataclass(frozen=True)
class CosineDrive(Schedule):
    """
    Periodic drive h(t) = h0 + dh cos(2 pi (t + t0) / tau).

    With h0 left unset the drive oscillates around the chain's own fields.
    """

    dh: float = 0.0
    h0: Optional[float] = None
    t0: float = 0.0

    periodic = True

    def h_of_t(self, t, spec):
        base = spec.fields if self.h0 is None else np.full(spec.L, self.h0)
        return base + self.dh * np.cos(2 * np.pi * (t + self.t0) / self.tau)


class ScheduleFactory:
    """
    A factory class for creating and registering schedules.

    Attributes:
    - _schedules: Dict[str, type]
        A dictionary mapping schedule names to schedule classes.
    """

    _schedules: Dict[str, type] = {
        "constant": ConstantSchedule,
        "linear": LinearRamp,
        "cosine": CosineRamp,
        "drive": CosineDrive,
    }

    @classmethod
    def get_schedule(cls, name: str, **params) -> Schedule:
        """
        Returns a schedule instance for the given shape name.

        Args:
            name (str): The schedule shape.
            **params: Constructor parameters of the schedule.

        Returns:
            Schedule: The schedule.

        Raises:
            InvalidScheduleError: If no schedule is registered under name.
        """
        schedule_class = cls._schedules.get(name)
        if schedule_class is None:
            raise InvalidScheduleError(f"No schedule available for shape: {name}")
        return schedule_class(**params)

    @classmethod
    def register_schedule(cls, name: str, schedule_class: type):
        """
        Register a schedule class under a shape name.

        Args:
            name (str): The shape name.
            schedule_class (type): A Schedule subclass.
        """
        cls._schedules[name] = schedule_class
