"""Minimal glucose-insulin backbone hosting the utilization model.

This module is a documented placeholder for a full metabolic simulator: a
two-compartment gut chain for meal absorption, a two-depot subcutaneous
insulin chain with linear plasma clearance, insulin-suppressed endogenous
glucose production, constant insulin-independent uptake, and two glucose
compartments. It is the simplest structure that supplies every signal the
utilization model needs; its constants are literature-magnitude placeholders
shipped in a config file (see exglu.io), not estimates of any published
parameter set.

Sign conventions: glucose masses in mg/kg, gut carbohydrate in grams,
subcutaneous depots in insulin units, plasma insulin and insulin action in
pmol/l. BG [mg/dl] = G_p / v_g.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.optimize import brentq

from .activity import (
    ExerciseState,
    exercise_state_deriv,
    insulin_action_deriv,
    uid_exercise,
)
from .core import PatientParams, ValidationError

__all__ = [
    "HostParams",
    "MetabolicState",
    "MetabolicDeriv",
    "validate_host",
    "meal_ra",
    "plasma_insulin_deriv",
    "egp",
    "metabolic_deriv",
    "nominal_basal_rate",
    "solve_basal_steady_state",
]


@dataclass(frozen=True)
class HostParams:
    """Backbone constants; all positive, f_abs in (0, 1]."""

    v_g: float      # glucose distribution volume [dl/kg]
    bw: float       # body weight [kg]
    f_cns: float    # constant insulin-independent uptake [mg/kg/min]
    egp_b: float    # basal endogenous glucose production [mg/kg/min]
    k_egp: float    # EGP suppression gain [mg/kg/min per pmol/l]
    k_gut1: float   # gut transit, first compartment [1/min]
    k_gut2: float   # gut transit, second compartment [1/min]
    f_abs: float    # absorbed carbohydrate fraction [dimensionless]
    k_sc1: float    # subcutaneous transit, first depot [1/min]
    k_sc2: float    # subcutaneous transit, second depot [1/min]
    k_cl: float     # plasma insulin clearance [1/min]
    k_iconv: float  # depot-to-plasma conversion [pmol/l per U]
    k_12: float     # plasma -> periphery glucose transfer [1/min]
    k_21: float     # periphery -> plasma glucose transfer [1/min]


def validate_host(params: HostParams) -> HostParams:
    """Return params unchanged iff all invariants hold."""
    for f in fields(params):
        value = getattr(params, f.name)
        if not np.isfinite(value) or value <= 0:
            raise ValidationError(f"{f.name} must be strictly positive, got {value!r}")
    if not (0 < params.f_abs <= 1):
        raise ValidationError(f"f_abs must be in (0, 1], got {params.f_abs!r}")
    return params


@dataclass(frozen=True)
class MetabolicState:
    """Full metabolic state at one instant.

    G_p, G_t: plasma / peripheral glucose mass [mg/kg]; q1, q2: gut
    carbohydrate [g]; s1, s2: subcutaneous insulin depots [U]; I: plasma
    insulin [pmol/l]; X: insulin action [pmol/l], signed (it is a deviation
    from the basal level); ex: the exercise state.
    """

    G_p: float
    G_t: float
    q1: float
    q2: float
    s1: float
    s2: float
    I: float
    X: float
    ex: ExerciseState

    def __post_init__(self):
        for name in ("G_p", "G_t", "q1", "q2", "s1", "s2", "I"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and non-negative, got {value!r}")
        if not np.isfinite(self.X):
            raise ValidationError("X must be finite")

    def bg(self, host: HostParams) -> float:
        """Blood glucose concentration [mg/dl]."""
        return self.G_p / host.v_g


@dataclass(frozen=True)
class MetabolicDeriv:
    """Time derivatives of the continuous metabolic states (units per min)."""

    G_p: float
    G_t: float
    q1: float
    q2: float
    s1: float
    s2: float
    I: float
    X: float
    h: float
    theta: float


def meal_ra(state: MetabolicState, host: HostParams) -> float:
    """Glucose rate of appearance from the gut chain [mg/kg/min]."""
    return host.f_abs * host.k_gut2 * state.q2 * 1000.0 / host.bw


def plasma_insulin_deriv(
    state: MetabolicState, basal_rate: float, host: HostParams
) -> tuple[float, float, float]:
    """Derivatives (ds1/dt, ds2/dt, dI/dt) of the insulin chain.

    basal_rate is the infusion into the first depot [U/min]. At the nominal
    basal rate (see nominal_basal_rate) the chain equilibrates at I = Ib,
    and the equilibrium insulin level is linear in the infusion rate.
    """
    if basal_rate < 0:
        raise ValidationError("basal_rate must be non-negative")
    ds1 = basal_rate - host.k_sc1 * state.s1
    ds2 = host.k_sc1 * state.s1 - host.k_sc2 * state.s2
    dI = host.k_iconv * host.k_sc2 * state.s2 - host.k_cl * state.I
    return ds1, ds2, dI


def egp(G_p: float, I: float, host: HostParams, ib: float) -> float:
    """Endogenous glucose production [mg/kg/min], insulin-suppressed.

    Clamped at zero for large insulin excursions; G_p is accepted for
    interface stability but the suppression law is insulin-only.
    """
    return max(0.0, host.egp_b - host.k_egp * (I - ib))


def metabolic_deriv(
    state: MetabolicState,
    basal_rate: float,
    u_hr: float,
    patient: PatientParams,
    host: HostParams,
) -> MetabolicDeriv:
    """Assemble all continuous-state derivatives at one instant.

    The exercise signals phi and w are algebraic (phi of the current u_hr,
    w of the session phase recorded in state.ex) and therefore carry no
    derivative here.
    """
    uid = uid_exercise(state.G_t, state.X, state.ex, patient)
    ra = meal_ra(state, host)
    production = egp(state.G_p, state.I, host, patient.ib)

    dG_p = production + ra - host.f_cns - host.k_12 * state.G_p + host.k_21 * state.G_t
    dG_t = host.k_12 * state.G_p - host.k_21 * state.G_t - uid
    dq1 = -host.k_gut1 * state.q1
    dq2 = host.k_gut1 * state.q1 - host.k_gut2 * state.q2
    ds1, ds2, dI = plasma_insulin_deriv(state, basal_rate, host)
    dX = insulin_action_deriv(state.X, state.I, patient.ib, patient.p2u)
    dh, dtheta = exercise_state_deriv(state.ex.h, state.ex.theta, u_hr, patient)

    return MetabolicDeriv(
        G_p=dG_p, G_t=dG_t, q1=dq1, q2=dq2,
        s1=ds1, s2=ds2, I=dI, X=dX, h=dh, theta=dtheta,
    )


def nominal_basal_rate(patient: PatientParams, host: HostParams) -> float:
    """Basal infusion [U/min] whose chain equilibrium is exactly I = Ib."""
    return patient.ib * host.k_cl / host.k_iconv


def solve_basal_steady_state(
    patient: PatientParams,
    host: HostParams,
    fasting_bg: float = 125.0,
) -> tuple[MetabolicState, HostParams, float]:
    """Fasting equilibrium at a target BG.

    Returns (state, host', basal_rate) where every derivative of
    metabolic_deriv vanishes at the returned state under the returned basal
    rate and host'. The configured egp_b is replaced in host' by the value
    implied by the glucose balance at the target (the configured number is
    a magnitude placeholder; exact equilibrium requires the trim).
    """
    if not fasting_bg > 0:
        raise ValidationError("fasting_bg must be positive")
    G_p0 = fasting_bg * host.v_g

    # Peripheral balance: k_12*G_p0 - k_21*G_t - uid(G_t, X=0) = 0 has a
    # unique root in (0, k_12*G_p0/k_21): the LHS is strictly decreasing,
    # positive at 0 and negative at the upper end.
    def peripheral_balance(G_t: float) -> float:
        uid0 = patient.vm0 * G_t / (patient.km0 + G_t)
        return host.k_12 * G_p0 - host.k_21 * G_t - uid0

    upper = host.k_12 * G_p0 / host.k_21
    G_t0 = brentq(peripheral_balance, 0.0, upper, xtol=1e-12, rtol=1e-15)

    egp_b = host.f_cns + host.k_12 * G_p0 - host.k_21 * G_t0
    host_trim = replace(host, egp_b=egp_b)

    basal = nominal_basal_rate(patient, host)
    state = MetabolicState(
        G_p=G_p0, G_t=G_t0, q1=0.0, q2=0.0,
        s1=basal / host.k_sc1, s2=basal / host.k_sc2,
        I=patient.ib, X=0.0, ex=ExerciseState.rest(),
    )
    return state, host_trim, basal
