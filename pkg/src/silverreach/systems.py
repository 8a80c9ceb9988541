"""Domain types for the coupled plant and the auxiliary first-order pair.

The coupled plant is

    x1'' = pi1**2 * x1 + v1 * pi1**2 * u
    x2'' = pi2**2 * x2 + v2 * pi2**2 * u

with state ordering ``(x1, dx1, x2, dx2)``.  The first-order pair is

    xi1' = -alpha1 * xi1 + beta1 * u
    xi2' = -alpha2 * xi2 + beta2 * u

so a positive ``alpha`` is a *stable* pole.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError


def _finite(name: str, value: float, code: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", code=code)
    return value


@dataclass(frozen=True)
class CoupledSystem:
    """Two unstable second-order plants driven by one input.

    Args:
        pi1, pi2: Inverse time constants in 1/s, strictly positive.
        v1, v2: Dimensionless input gains, nonzero.
    """

    pi1: float
    pi2: float
    v1: float = 1.0
    v2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("pi1", "pi2", "v1", "v2"):
            object.__setattr__(self, name, _finite(name, getattr(self, name), "invalid_system"))
        if self.pi1 <= 0 or self.pi2 <= 0:
            raise ValidationError(
                f"time constants must be positive, got pi=({self.pi1}, {self.pi2})",
                code="invalid_system",
            )
        if self.v1 == 0 or self.v2 == 0:
            raise ValidationError(
                f"input gains must be nonzero, got v=({self.v1}, {self.v2})", code="invalid_system"
            )

    @property
    def pis(self) -> tuple[float, float]:
        return (self.pi1, self.pi2)

    @property
    def gains(self) -> tuple[float, float]:
        return (self.v1, self.v2)

    @property
    def is_degenerate(self) -> bool:
        """True when both plants share the same time constant."""
        return self.pi1 == self.pi2

    def a_matrix(self) -> np.ndarray:
        """Drift matrix in physical coordinates."""
        a = np.zeros((4, 4))
        a[0, 1] = a[2, 3] = 1.0
        a[1, 0] = self.pi1**2
        a[3, 2] = self.pi2**2
        return a

    def b_vector(self) -> np.ndarray:
        return np.array([0.0, self.v1 * self.pi1**2, 0.0, self.v2 * self.pi2**2])


@dataclass(frozen=True)
class State4:
    """Physical state ``(x1, dx1, x2, dx2)``."""

    x1: float = 0.0
    dx1: float = 0.0
    x2: float = 0.0
    dx2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x1", "dx1", "x2", "dx2"):
            object.__setattr__(self, name, _finite(name, getattr(self, name), "invalid_state"))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "State4":
        arr = np.asarray(values, dtype=float).reshape(-1)
        if arr.shape != (4,):
            raise ValidationError(f"expected 4 state entries, got {arr.size}", code="invalid_state")
        return cls(*arr)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.dx1, self.x2, self.dx2])


StateLike = Union[State4, Sequence[float], np.ndarray]


def as_state_array(z: StateLike) -> np.ndarray:
    """Return ``z`` as a finite float array of shape (4,)."""
    if isinstance(z, State4):
        return z.as_array()
    arr = np.asarray(z, dtype=float).reshape(-1)
    if arr.shape != (4,):
        raise ValidationError(f"expected 4 state entries, got {arr.size}", code="invalid_state")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("state entries must be finite", code="invalid_state")
    return arr


class StabilityClass(enum.Enum):
    BOTH_STABLE = "BothStable"
    BOTH_UNSTABLE = "BothUnstable"
    MIXED = "Mixed"


@dataclass(frozen=True)
class FirstOrderPair:
    """Two scalar first-order systems sharing one input.

    ``alpha`` is the pole *magnitude with sign*: ``alpha > 0`` decays.
    """

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            value = _finite(name, getattr(self, name), "invalid_pair")
            if value == 0:
                raise ValidationError(f"{name} must be nonzero", code="invalid_pair")
            object.__setattr__(self, name, value)

    @property
    def alphas(self) -> tuple[float, float]:
        return (self.alpha1, self.alpha2)

    @property
    def betas(self) -> tuple[float, float]:
        return (self.beta1, self.beta2)


def classify(sys: FirstOrderPair) -> StabilityClass:
    if sys.alpha1 > 0 and sys.alpha2 > 0:
        return StabilityClass.BOTH_STABLE
    if sys.alpha1 < 0 and sys.alpha2 < 0:
        return StabilityClass.BOTH_UNSTABLE
    return StabilityClass.MIXED


def modal_gain(pi: float, v: float = 1.0) -> float:
    """Magnitude-with-sign ``v * pi * sqrt(1 + pi**2) / 2`` of the modal input column."""
    return v * pi * math.sqrt(1.0 + pi * pi) / 2.0


def modal_pairs(sys: CoupledSystem) -> tuple[FirstOrderPair, FirstOrderPair]:
    """Split the coupled plant into its unstable and stable first-order pairs.

    Returns:
        ``(unstable, stable)``.  The unstable pair has ``alpha = (-pi1, -pi2)``
        and ``beta_i = v_i pi_i sqrt(1 + pi_i**2) / 2``; the stable pair has
        ``alpha = (pi1, pi2)`` and the negated ``beta``.
    """
    b1 = modal_gain(sys.pi1, sys.v1)
    b2 = modal_gain(sys.pi2, sys.v2)
    unstable = FirstOrderPair(-sys.pi1, -sys.pi2, b1, b2)
    stable = FirstOrderPair(sys.pi1, sys.pi2, -b1, -b2)
    return unstable, stable
