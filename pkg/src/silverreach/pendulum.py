"""Rigid-body pendulum balanced by a single force.

Linearized about upright, the two tilt axes obey

    phi1'' = pi1**2 phi1 + pi1**2 F2 / (m g0)
    phi2'' = pi2**2 phi2 - pi2**2 F1 / (m g0)

with ``pi_i**2 = l m g0 / I_i``.  When ``F1`` and ``F2`` are linearly
dependent this is a :class:`CoupledSystem` with gains ``(+1, -1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .reachability import SILVER_RATIO, ratio_objective, volume_measures
from .systems import CoupledSystem

G0 = 9.81


@dataclass(frozen=True)
class PendulumParams:
    i1: float
    i2: float
    mass: float
    arm: float
    g0: float = G0

    def __post_init__(self) -> None:
        for name in ("i1", "i2", "mass", "arm", "g0"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(
                    f"{name} must be positive and finite, got {value!r}", code="invalid_pendulum"
                )
            object.__setattr__(self, name, value)

    def with_inertia(self, i1: float, i2: float) -> "PendulumParams":
        return PendulumParams(i1, i2, self.mass, self.arm, self.g0)


def linearize(params: PendulumParams) -> CoupledSystem:
    k = params.arm * params.mass * params.g0
    return CoupledSystem(math.sqrt(k / params.i1), math.sqrt(k / params.i2), 1.0, -1.0)


def optimal_inertia_ratio() -> float:
    """``I_slow / I_fast = (1 + sqrt(2))**2 = 3 + 2 sqrt(2)``."""
    return 3.0 + 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class DesignReport:
    """Current design and the two single-axis changes that reach the silver ratio.

    ``i1_opt`` keeps ``i2`` and ``i2_opt`` keeps ``i1``; both preserve which
    axis is the slower one.  Only changing the slower (larger-inertia) axis
    maximizes the volume with the other axis held; ``gain_factor`` refers to
    that change.  Gains are ``None`` when the current volume is zero.
    """

    pi1: float
    pi2: float
    epsilon: float
    objective: float
    paper_volume_measure: float
    i1_opt: float
    i2_opt: float
    gain_adjust_i1: float | None
    gain_adjust_i2: float | None
    gain_factor: float | None
    degenerate: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _gain(new: float, old: float) -> float | None:
    return new / old if old > 0 else None


def recommend(params: PendulumParams) -> DesignReport:
    sys = linearize(params)
    current = volume_measures(sys)
    delta2 = optimal_inertia_ratio()
    # the larger inertia is taken as axis 1; equal inertias follow that convention
    first_is_slow = params.i1 >= params.i2
    if first_is_slow:
        i1_opt, i2_opt = params.i2 * delta2, params.i1 / delta2
    else:
        i1_opt, i2_opt = params.i2 / delta2, params.i1 * delta2

    vol_1 = volume_measures(linearize(params.with_inertia(i1_opt, params.i2))).paper_volume_measure
    vol_2 = volume_measures(linearize(params.with_inertia(params.i1, i2_opt))).paper_volume_measure
    gain_1 = _gain(vol_1, current.paper_volume_measure)
    gain_2 = _gain(vol_2, current.paper_volume_measure)
    return DesignReport(
        pi1=sys.pi1,
        pi2=sys.pi2,
        epsilon=current.epsilon,
        objective=float(ratio_objective(current.epsilon)),
        paper_volume_measure=current.paper_volume_measure,
        i1_opt=i1_opt,
        i2_opt=i2_opt,
        gain_adjust_i1=gain_1,
        gain_adjust_i2=gain_2,
        gain_factor=gain_1 if first_is_slow else gain_2,
        degenerate=sys.is_degenerate,
    )


def silver_ratio_check(params: PendulumParams) -> float:
    """Relative deviation of ``max(pi) / min(pi)`` from the silver ratio."""
    sys = linearize(params)
    return max(sys.pis) / min(sys.pis) / SILVER_RATIO - 1.0
