"""Exercise physiology: heart-rate driven states and glucose utilization.

Aerobic activity enhances insulin-dependent glucose utilization in two
phases. A fast component follows the heart-rate deviation through a lagged
signal h and scales the insulin-independent part of the uptake; a slow
component theta raises insulin sensitivity and persists for hours after the
session; a third signal w lowers the Michaelis constant while exercising and
decays exponentially once the session ends.

All functions are pure and operate on immutable value types, so they are
safe to evaluate in parallel across patients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import NumericsError, PatientParams, ValidationError

__all__ = [
    "Phase",
    "ExerciseState",
    "hr_deviation",
    "intensity_fraction",
    "post_exercise_w",
    "exercise_state_deriv",
    "step_exercise_state",
    "uid_nominal",
    "uid_exercise",
    "insulin_action_deriv",
]


class Phase(Enum):
    """Position of the current instant relative to the exercise session."""

    PRE_EXERCISE = "pre_exercise"
    EXERCISING = "exercising"
    POST_EXERCISE = "post_exercise"


@dataclass(frozen=True)
class ExerciseState:
    """Dynamic exercise quantities plus the session phase clock.

    h [bpm] lags the heart-rate deviation; theta and phi are dimensionless
    in [0, 1); w [bpm] is the Michaelis-lowering signal. u_end records the
    deviation at the moment the session ended and t_since_end [min] the
    clock since then (meaningful in POST_EXERCISE only).
    """

    h: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    w: float = 0.0
    phase: Phase = Phase.PRE_EXERCISE
    t_since_end: float = 0.0
    u_end: float = 0.0

    def __post_init__(self):
        if self.h < 0 or self.w < 0:
            raise ValidationError("h and w must be non-negative")
        if not (0.0 <= self.theta < 1.0):
            raise ValidationError("theta must lie in [0, 1)")
        if not (0.0 <= self.phi < 1.0):
            raise ValidationError("phi must lie in [0, 1)")

    @classmethod
    def rest(cls) -> "ExerciseState":
        """State before any activity: everything at zero."""
        return cls()


def hr_deviation(hr: float, hr_baseline: float) -> float:
    """Exercise-intensity input [bpm]: heart rate above baseline, clamped at 0.

    The clamp avoids the singularity of the saturating intensity at
    deviation -1 and reflects that sub-baseline heart rate carries no
    utilization enhancement.
    """
    if not hr_baseline > 0:
        raise ValidationError("hr_baseline must be positive")
    return max(0.0, hr - hr_baseline)


def intensity_fraction(u_hr: float) -> float:
    """Saturating intensity in [0, 1) from a non-negative HR deviation [bpm]."""
    if u_hr < 0:
        raise ValidationError("u_hr must be non-negative (clamp upstream)")
    return u_hr / (1.0 + u_hr)


def post_exercise_w(u_end: float, t_since_end: float, params: PatientParams) -> float:
    """Michaelis-lowering signal after the session: exponential decay of u_end."""
    return u_end * math.exp(-params.kappa * t_since_end)


def exercise_state_deriv(
    h: float, theta: float, u_hr: float, params: PatientParams
) -> tuple[float, float]:
    """Time derivatives (dh/dt, dtheta/dt) for an instantaneous deviation u_hr."""
    dh = -(h - u_hr) / params.tau_h
    phi = intensity_fraction(u_hr)
    dtheta = -(phi + 1.0 / params.tau_theta) * theta + phi
    return dh, dtheta


def step_exercise_state(
    state: ExerciseState,
    u_hr: float,
    phase: Phase,
    dt: float,
    params: PatientParams,
) -> ExerciseState:
    """Advance the exercise state by dt, holding u_hr constant over the step.

    h and theta follow their linear dynamics exactly under the held input
    (zero-order-hold discretization); w follows the piecewise session rule:
    zero before exercise, the current deviation during, and an exponential
    decay of the end-of-session deviation afterwards. The post-exercise
    clock starts at the EXERCISING -> POST_EXERCISE transition.
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if u_hr < 0:
        raise ValidationError("u_hr must be non-negative (clamp upstream)")

    h = u_hr + (state.h - u_hr) * math.exp(-dt / params.tau_h)
    phi = intensity_fraction(u_hr)
    a = phi + 1.0 / params.tau_theta
    theta_inf = phi / a
    theta = theta_inf + (state.theta - theta_inf) * math.exp(-a * dt)

    if phase is Phase.PRE_EXERCISE:
        w, u_end, t_since_end = 0.0, 0.0, 0.0
    elif phase is Phase.EXERCISING:
        w, u_end, t_since_end = u_hr, u_hr, 0.0
    else:
        was_exercising = state.phase is Phase.EXERCISING
        t_since_end = (0.0 if was_exercising else state.t_since_end) + dt
        u_end = state.u_end
        w = post_exercise_w(u_end, t_since_end, params)

    return ExerciseState(
        h=h, theta=theta, phi=phi, w=w,
        phase=phase, t_since_end=t_since_end, u_end=u_end,
    )


def uid_nominal(G: float, X: float, params: PatientParams) -> float:
    """Insulin-dependent glucose utilization at rest [mg/kg/min].

    G is peripheral glucose mass [mg/kg], X insulin action [pmol/l].
    """
    if G < 0:
        raise ValidationError("G must be non-negative")
    denom = params.km0 + G
    if denom <= 0:
        raise NumericsError("utilization denominator is non-positive")
    return (params.vm0 + params.vmx * X) * G / denom


def uid_exercise(
    G: float, X: float, ex: ExerciseState, params: PatientParams
) -> float:
    """Insulin-dependent glucose utilization with activity effects [mg/kg/min].

    Reduces to uid_nominal when the exercise state is at rest. Raises when
    epsilon * w >= 1, which would collapse the lowered Michaelis term and
    signals non-physiological parameters for the realized intensity.
    """
    if G < 0:
        raise ValidationError("G must be non-negative")
    lowering = 1.0 - params.epsilon * ex.w
    if lowering <= 0:
        raise NumericsError(
            f"denominator collapse: epsilon * w = {params.epsilon * ex.w:.4g} >= 1"
        )
    denom = params.km0 * lowering + G
    if denom <= 0:
        raise NumericsError("utilization denominator is non-positive")
    fast = params.vm0 * (1.0 + params.beta * ex.h)
    slow = params.vmx * (1.0 + params.gamma * ex.theta) * X
    return (fast + slow) * G / denom


def insulin_action_deriv(X: float, I: float, Ib: float, p2u: float) -> float:
    """Rate of change of remote insulin action [pmol/l/min]."""
    return -p2u * X + p2u * (I - Ib)
