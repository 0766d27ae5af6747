from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from frailz.errors import ValidationError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class StepCHF:
    """
    Right-continuous cumulative hazard step function.

    ``values[k]`` is the cumulative hazard on ``[times[k], times[k+1])``. The
    function is 0 before the first time and constant after the last one.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise ValidationError("StepCHF times and values must have equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValidationError("StepCHF times must be strictly increasing")
        if values.size and (values[0] < 0 or np.any(np.diff(values) < 0)):
            raise ValidationError("StepCHF values must be nonnegative and nondecreasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.times.size)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t_arr, side="right") - 1
        padded = np.concatenate(([0.0], self.values))
        out = padded[idx + 1]
        return float(out) if out.ndim == 0 else out

    @property
    def first_time(self) -> float:
        return float(self.times[0]) if self.times.size else 0.0

    @property
    def last_time(self) -> float:
        return float(self.times[-1]) if self.times.size else 0.0

    def increments(self) -> np.ndarray:
        """Jump sizes at each time (the discrete baseline hazard)."""
        return np.diff(self.values, prepend=0.0)

    def scaled(self, factor: float) -> "StepCHF":
        return StepCHF(self.times, self.values * float(factor))

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "StepCHF":
        return cls(np.asarray(payload["times"]), np.asarray(payload["values"]))
