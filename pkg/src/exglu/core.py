"""Shared signal, parameter, and scenario types.

Everything here is an immutable value object: construction validates the
invariants, after which instances can be shared freely across threads.
Time is measured in minutes throughout the package; each numeric field
documents its unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "UNITS",
    "CGM_DT",
    "ValidationError",
    "NumericsError",
    "DivergenceError",
    "TimeSeries",
    "PatientParams",
    "ScenarioSpec",
    "resample_uniform",
    "validate_patient",
]

#: Units a TimeSeries may carry.
UNITS = ("mg/dl", "bpm", "pmol/l", "mg/kg", "dimensionless")

#: CGM sample cadence [min]; default grid for ingested clinical data.
CGM_DT = 5.0


class ValidationError(ValueError):
    """An input violates a documented invariant or file contract."""


class NumericsError(RuntimeError):
    """A computation failed numerically (divergence, denominator collapse)."""


class DivergenceError(NumericsError):
    """Integration produced a non-finite state."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar signal.

    Attributes:
        t0: time of the first sample [min since scenario start]
        dt: sample interval [min], > 0
        values: one finite sample per grid point (read-only array)
        unit: one of UNITS
    """

    t0: float
    dt: float
    values: np.ndarray
    unit: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValidationError("TimeSeries needs a 1-d array with at least one sample")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("TimeSeries samples must all be finite")
        if not (float(self.dt) > 0.0):
            raise ValidationError("TimeSeries dt must be positive")
        if self.unit not in UNITS:
            raise ValidationError(f"unknown unit {self.unit!r}; expected one of {UNITS}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def value_at(self, t: float) -> float:
        """Linear interpolation; clamps to the first/last sample outside the span."""
        return float(np.interp(t, self.times, self.values))

    def window(self, t_start: float, t_end: float) -> "TimeSeries":
        """Sub-series of the samples with t_start <= t <= t_end (inclusive)."""
        times = self.times
        mask = (times >= t_start - 1e-9) & (times <= t_end + 1e-9)
        if not mask.any():
            raise ValidationError(f"window [{t_start}, {t_end}] contains no samples")
        return TimeSeries(float(times[mask][0]), self.dt, self.values[mask], self.unit)

    def same_grid(self, other: "TimeSeries", tol: float = 1e-9) -> bool:
        return (
            len(self) == len(other)
            and abs(self.t0 - other.t0) <= tol
            and abs(self.dt - other.dt) <= tol
        )


def resample_uniform(series: TimeSeries, new_dt: float) -> TimeSeries:
    """Linearly interpolate a series onto a new uniform grid.

    The new grid starts at the same t0 and never extends past the last
    sample; when the span divides evenly both endpoints are preserved.
    """
    if not (new_dt > 0):
        raise ValidationError("new_dt must be positive")
    if len(series) < 2:
        raise ValidationError("empty signal: need at least 2 samples to resample")
    span = series.t_end - series.t0
    n_new = int(np.floor(span / new_dt + 1e-9)) + 1
    new_times = series.t0 + new_dt * np.arange(n_new)
    new_values = np.interp(new_times, series.times, series.values)
    return TimeSeries(series.t0, new_dt, new_values, series.unit)


@dataclass(frozen=True)
class PatientParams:
    """Per-subject constants of the utilization model and its inputs.

    The five exercise constants (beta, gamma, epsilon, tau_h, kappa,
    tau_theta) shape the activity response; the first four fields are the
    resting utilization law; ib/hrb anchor the basal operating point.
    """

    vm0: float        # insulin-independent utilization scale [mg/kg/min]
    vmx: float        # insulin sensitivity [mg/kg/min per pmol/l]
    km0: float        # utilization Michaelis constant [mg/kg]
    p2u: float        # insulin action rate constant [1/min]
    beta: float       # fast exercise gain on vm0 [1/bpm]
    gamma: float      # long-term insulin-sensitivity gain, in (1, 2)
    epsilon: float    # Michaelis-lowering gain per bpm of w [dimensionless]
    tau_h: float      # heart-rate deviation lag [min]
    kappa: float      # post-exercise decay rate of w [1/min]
    tau_theta: float  # slow-state decay time [min]
    ib: float         # basal plasma insulin [pmol/l]
    hrb: float        # baseline heart rate [bpm]


#: Fields of PatientParams that must be strictly positive.
_POSITIVE_PATIENT_FIELDS = (
    "vm0", "vmx", "km0", "p2u", "beta", "gamma", "epsilon",
    "tau_h", "kappa", "tau_theta", "ib", "hrb",
)


def validate_patient(params: PatientParams) -> PatientParams:
    """Return params unchanged iff every invariant holds.

    All constants must be strictly positive and gamma must lie in the
    open interval (1, 2); the epsilon*w < 1 condition depends on the
    realized exercise intensity and is enforced at evaluation time.
    """
    for name in _POSITIVE_PATIENT_FIELDS:
        value = getattr(params, name)
        if not np.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} must be strictly positive, got {value!r}")
    if not (1.0 < params.gamma < 2.0):
        raise ValidationError(
            f"gamma out of physiological range: {params.gamma!r} not in (1, 2)"
        )
    return params


@dataclass(frozen=True)
class ScenarioSpec:
    """Timeline of one activity-session protocol run.

    The exercise window, meal, and bolus are each optional; basal_schedule
    lists ((t_start, t_end), fraction-of-nominal-basal) segments, fraction
    in (0, 1], outside of which the nominal basal rate applies.

    hr_input is either an absolute heart-rate TimeSeries [bpm] or a plain
    number meaning a constant heart-rate *deviation* step [bpm above
    baseline] held over the exercise window.
    """

    duration: float                                   # [min]
    exercise_start: float | None = None               # [min]
    exercise_end: float | None = None                 # [min]
    hr_input: Union[TimeSeries, float, None] = None
    meal_time: float | None = None                    # [min]
    meal_grams: float = 0.0                           # [g carbohydrate]
    bolus_time: float | None = None                   # [min]
    bolus_units: float = 0.0                          # [insulin U]
    basal_schedule: tuple = ()                        # (((t0, t1), fraction), ...)
    fasting_bg: float = 125.0                         # initial fasting BG [mg/dl]

    def __post_init__(self):
        if not (self.duration > 0):
            raise ValidationError("duration must be positive")
        if not (self.fasting_bg > 0):
            raise ValidationError("fasting_bg must be positive")

        has_start = self.exercise_start is not None
        has_end = self.exercise_end is not None
        if has_start != has_end:
            raise ValidationError("exercise_start and exercise_end must be given together")
        if has_start:
            if not (0 <= self.exercise_start < self.exercise_end <= self.duration):
                raise ValidationError(
                    "exercise window must satisfy 0 <= start < end <= duration"
                )
            if self.hr_input is None:
                raise ValidationError("an exercise window needs an hr_input")
        if isinstance(self.hr_input, TimeSeries) and self.hr_input.unit != "bpm":
            raise ValidationError("hr_input series must carry unit 'bpm'")
        if isinstance(self.hr_input, (int, float)) and self.hr_input < 0:
            raise ValidationError("hr step amplitude must be non-negative")

        if self.meal_time is not None:
            if not (0 <= self.meal_time <= self.duration):
                raise ValidationError("meal_time must lie within [0, duration]")
            if not (self.meal_grams > 0):
                raise ValidationError("a meal needs meal_grams > 0")
            if has_end and self.meal_time <= self.exercise_end:
                raise ValidationError("meal_time must come after exercise_end")
        elif self.meal_grams:
            raise ValidationError("meal_grams given without meal_time")

        if self.bolus_time is not None:
            if not (0 <= self.bolus_time <= self.duration):
                raise ValidationError("bolus_time must lie within [0, duration]")
            if not (self.bolus_units > 0):
                raise ValidationError("a bolus needs bolus_units > 0")
        elif self.bolus_units:
            raise ValidationError("bolus_units given without bolus_time")

        schedule = tuple(
            ((float(a), float(b)), float(f)) for (a, b), f in self.basal_schedule
        )
        prev_end = None
        for (a, b), f in sorted(schedule, key=lambda seg: seg[0][0]):
            if not (0 <= a < b <= self.duration):
                raise ValidationError("basal interval must satisfy 0 <= start < end <= duration")
            if not (0 < f <= 1):
                raise ValidationError(f"basal fraction must be in (0, 1], got {f!r}")
            if prev_end is not None and a < prev_end - 1e-9:
                raise ValidationError("basal intervals must not overlap")
            prev_end = b
        object.__setattr__(self, "basal_schedule", schedule)
        object.__setattr__(self, "duration", float(self.duration))

    @property
    def has_exercise(self) -> bool:
        return self.exercise_start is not None

    def basal_fraction(self, t: float) -> float:
        """Fraction of nominal basal in effect at time t (left-inclusive segments)."""
        for (a, b), f in self.basal_schedule:
            if a - 1e-9 <= t < b - 1e-9:
                return f
        return 1.0
