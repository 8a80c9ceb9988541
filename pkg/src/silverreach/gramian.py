"""Infinite-horizon reachability Gramians of a :class:`FirstOrderPair`.

For a pair whose poles share a sign the Gramian is

    W = [[b1**2 / (2 a1), b1 b2 / (a1 + a2)],
         [b1 b2 / (a1 + a2), b2**2 / (2 a2)]]

with ``a_i = |alpha_i|``.  An anti-stable pair is handled by reversing time,
which leaves ``W`` unchanged.  A mixed pair decouples into an axis-aligned
ellipse instead (see :func:`mixed_set`).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateSystemWarning,
    MixedClassError,
    NonConvergenceError,
    NotMixedError,
    SingularGramianError,
    ValidationError,
)
from .systems import FirstOrderPair, StabilityClass, classify

#: Relative rank tolerance for pseudo-inverses of Gramians.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Gramian2:
    """Symmetric 2x2 matrix ``[[w11, w12], [w12, w22]]``."""

    w11: float
    w12: float
    w22: float

    @classmethod
    def from_matrix(cls, m) -> "Gramian2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.w11, self.w12], [self.w12, self.w22]])

    def det(self) -> float:
        return self.w11 * self.w22 - self.w12 * self.w12

    def scaled(self, s1: float, s2: float) -> "Gramian2":
        """Congruence with ``diag(s1, s2)``."""
        return Gramian2(self.w11 * s1 * s1, self.w12 * s1 * s2, self.w22 * s2 * s2)


class SetKind(enum.Enum):
    ELLIPSE2 = "Ellipse2"
    ELLIPSOID4 = "Ellipsoid4"
    AXIS_ALIGNED_ELLIPSE2 = "AxisAlignedEllipse2"


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True, eq=False)
class SetDescription:
    """Centred ellipsoid ``{x : x^T Q^-1 x <= 1}`` described by its shape matrix ``Q``.

    ``form`` holds ``Q`` (not its inverse), so a singular ``Q`` describes a
    flat set; membership then uses the pseudo-inverse and rejects points off
    the range of ``Q``.
    """

    kind: SetKind
    form: np.ndarray
    frame: str = "physical"
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.form.shape[0]

    def energy(self, x) -> float:
        """Quadratic form ``x^T Q^-1 x``; ``inf`` if ``x`` is outside ``range(Q)``."""
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if not self.degenerate:
            return float(x @ np.linalg.solve(self.form, x))
        return _pinv_energy(self.form, x)

    def contains(self, x, tol: float = 1e-12) -> bool:
        return self.energy(x) <= 1.0 + tol

    def sqrt_det(self) -> float:
        """``sqrt(det Q)``, the volume measure up to the unit-ball constant."""
        return math.sqrt(max(float(np.linalg.det(self.form)), 0.0))

    def geometric_measure(self) -> float:
        """True area / volume of the set."""
        return _unit_ball_volume(self.dim) * self.sqrt_det()


def _pinv_energy(w: np.ndarray, x: np.ndarray) -> float:
    vals, vecs = np.linalg.eigh(w)
    scale = max(np.max(np.abs(vals)), np.finfo(float).tiny)
    keep = np.abs(vals) > RANK_TOL * scale
    coords = vecs.T @ x
    off_range = np.linalg.norm(coords[~keep])
    if off_range > 1e-8 * max(np.linalg.norm(x), 1e-300):
        return math.inf
    return float(np.sum(coords[keep] ** 2 / vals[keep]))


def _same_sign_magnitudes(sys: FirstOrderPair) -> tuple[float, float]:
    if classify(sys) is StabilityClass.MIXED:
        raise MixedClassError(
            f"poles {sys.alphas} have opposite signs; use mixed_set instead"
        )
    return abs(sys.alpha1), abs(sys.alpha2)


def gramian_closed_form(sys: FirstOrderPair, exact: bool = False) -> Gramian2:
    """Closed-form Gramian.

    With ``exact=True`` the entries are :class:`fractions.Fraction` values
    computed without rounding from the (binary) parameters, so ``det()`` is
    exact even when the poles nearly coincide.
    """
    a1, a2 = _same_sign_magnitudes(sys)
    b1, b2 = sys.betas
    if exact:
        a1, a2, b1, b2 = (Fraction(x) for x in (a1, a2, b1, b2))
    return Gramian2(b1 * b1 / (2 * a1), b1 * b2 / (a1 + a2), b2 * b2 / (2 * a2))


def gramian_quadrature(
    sys: FirstOrderPair,
    rtol: float = 1e-8,
    *,
    nodes: int = 10,
    horizon_cap: float = 1e6,
    max_panels: int = 1 << 22,
) -> Gramian2:
    """Integrate ``int_0^T exp(-A t) b b^T exp(-A t) dt`` numerically.

    Independent check of :func:`gramian_closed_form`.  The horizon is chosen
    so that the neglected tail ``exp(-2 min|alpha| T)`` is below
    ``rtol / 100``; composite Gauss-Legendre panels are doubled until two
    successive estimates agree to ``rtol / 10`` on every entry.

    Raises:
        MixedClassError: the pair is mixed.
        NonConvergenceError: the horizon or the panel count exceeds its cap.
    """
    if not (0 < rtol <= 1e-4):
        raise ValidationError(f"rtol must lie in (0, 1e-4], got {rtol}", code="invalid_tolerance")
    a1, a2 = _same_sign_magnitudes(sys)
    b1, b2 = sys.betas
    horizon = math.log(100.0 / rtol) / (2 * min(a1, a2))
    if horizon > horizon_cap:
        raise NonConvergenceError(f"required horizon {horizon:.3g} s exceeds cap {horizon_cap:.3g} s")

    x, w = np.polynomial.legendre.leggauss(nodes)
    rates = np.array([2 * a1, a1 + a2, 2 * a2])
    weights = np.array([b1 * b1, b1 * b2, b2 * b2])

    def estimate(panels: int) -> np.ndarray:
        h = horizon / panels
        left = np.arange(panels) * h
        t = (left[:, None] + 0.5 * h * (x + 1.0)).reshape(-1)
        wt = np.tile(0.5 * h * w, panels)
        return weights * (np.exp(-np.outer(rates, t)) @ wt)

    # panels no wider than the fastest decay length
    panels = max(1, math.ceil(horizon * rates.max()))
    previous = estimate(panels)
    while True:
        panels *= 2
        if panels > max_panels:
            raise NonConvergenceError("Gauss-Legendre panel count exceeded cap")
        current = estimate(panels)
        if np.all(np.abs(current - previous) <= 0.1 * rtol * np.abs(current)):
            return Gramian2(*(float(c) for c in current))
        previous = current


def is_degenerate(sys: FirstOrderPair) -> bool:
    return abs(sys.alpha1) == abs(sys.alpha2)


def ellipse_area_paper(sys: FirstOrderPair) -> float:
    """Closed-form area measure of the unit-energy ellipse.

    ``|b1 b2| / (2 sqrt(a1 a2)) * |a1 - a2| / (a1 + a2)``, which equals
    ``sqrt(det W)``; the geometric area is ``pi`` times this value (see
    :func:`ellipse_area_geometric`).  Equal poles give a flat ellipse: the
    function warns with :class:`DegenerateSystemWarning` and returns 0.
    """
    a1, a2 = _same_sign_magnitudes(sys)
    if a1 == a2:
        warnings.warn(
            f"equal poles |alpha| = {a1}: reachable set is a segment, area 0",
            DegenerateSystemWarning,
            stacklevel=2,
        )
        return 0.0
    b1, b2 = sys.betas
    return abs(b1 * b2) / (2 * math.sqrt(a1 * a2)) * abs(a1 - a2) / (a1 + a2)


def ellipse_area_geometric(sys: FirstOrderPair) -> float:
    return math.pi * ellipse_area_paper(sys)


def area_factors(sys: FirstOrderPair) -> tuple[float, float, float]:
    """Split the area into the two single-system reaches and the coupling factor.

    The product of the three factors equals :func:`ellipse_area_paper`; the
    coupling factor depends only on ``alpha1 / alpha2``.
    """
    a1, a2 = _same_sign_magnitudes(sys)
    return (
        abs(sys.beta1) / math.sqrt(2 * a1),
        abs(sys.beta2) / math.sqrt(2 * a2),
        abs(a1 - a2) / (a1 + a2),
    )


def reach_set(sys: FirstOrderPair) -> SetDescription:
    """Unit-energy set of a same-sign pair as a :class:`SetDescription`."""
    w = gramian_closed_form(sys)
    return SetDescription(
        SetKind.ELLIPSE2, w.as_matrix(), frame="modal", degenerate=is_degenerate(sys)
    )


def mixed_set(sys: FirstOrderPair) -> SetDescription:
    """Unit-energy set of a pair with one stable and one unstable pole.

    The stable coordinate is limited by the energy needed to *reach* it from
    rest, the unstable one by the energy needed to *return* it to rest, and
    the two costs add: ``Q = diag(b1**2 / (2|a1|), b2**2 / (2|a2|))``.
    """
    if classify(sys) is not StabilityClass.MIXED:
        raise NotMixedError(f"poles {sys.alphas} share a sign; use gramian_closed_form")
    q = np.diag([sys.beta1**2 / (2 * abs(sys.alpha1)), sys.beta2**2 / (2 * abs(sys.alpha2))])
    return SetDescription(SetKind.AXIS_ALIGNED_ELLIPSE2, q, frame="modal")


def min_energy_to_reach(sys: FirstOrderPair, target) -> float:
    """Least input energy ``target^T W^-1 target`` to reach ``target`` from rest.

    For an anti-stable pair this is the energy to drive ``target`` back to
    rest.  With equal poles ``W`` is singular; targets in its range use the
    pseudo-inverse, others raise :class:`SingularGramianError`.
    """
    target = np.asarray(target, dtype=float).reshape(2)
    w = gramian_closed_form(sys).as_matrix()
    if not is_degenerate(sys):
        return float(target @ np.linalg.solve(w, target))
    energy = _pinv_energy(w, target)
    if math.isinf(energy):
        raise SingularGramianError(f"target {target.tolist()} is not reachable with equal poles")
    return energy
