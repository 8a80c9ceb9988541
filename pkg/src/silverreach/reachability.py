"""Four-dimensional unit-energy set of the coupled plant and its volume.

In grouped modal coordinates ``(eta1, eta3 | eta2, eta4)`` the set is

    (eta1, eta3) P^-1 (eta1, eta3)^T + (eta2, eta4) P^-1 (eta2, eta4)^T <= 1

where ``P`` is the Gramian of either modal pair (both pairs share it).  Its
volume is proportional to ``det(P) det(T1) det(T2)``, which collapses to

    v1**2 v2**2 * (pi1 pi2 (pi1 - pi2) / (4 (pi1 + pi2)))**2.

For fixed faster time constant this depends on the ratio only through
``f(eps) = eps (1 - eps) / (1 + eps)``, maximized at ``eps = sqrt(2) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np

from .decomposition import build_transform, subsystem_det
from .errors import DomainError
from .gramian import Gramian2, SetDescription, SetKind, gramian_closed_form
from .systems import CoupledSystem, modal_pairs

SQRT2 = math.sqrt(2.0)
#: Silver ratio ``1 + sqrt(2)``.
SILVER_RATIO = 1.0 + SQRT2
#: Maximizer of :func:`ratio_objective`, ``1 / SILVER_RATIO``.
EPSILON_STAR = SQRT2 - 1.0

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class VolumeReport:
    p_matrix: Gramian2
    paper_volume_measure: float
    geometric_volume: float
    epsilon: float
    objective: float
    degenerate: bool

    def as_dict(self) -> dict:
        p = self.p_matrix
        return {
            "p_matrix": [[p.w11, p.w12], [p.w12, p.w22]],
            "paper_volume_measure": self.paper_volume_measure,
            "geometric_volume": self.geometric_volume,
            "epsilon": self.epsilon,
            "objective": self.objective,
            "degenerate": self.degenerate,
        }


def _p_entries(p1, p2, v1, v2, sqrt=math.sqrt) -> Gramian2:
    s1 = sqrt(1 + p1 * p1)
    s2 = sqrt(1 + p2 * p2)
    base = Gramian2(
        p1 * (1 + p1 * p1) / 8,
        p1 * p2 * s1 * s2 / (4 * (p1 + p2)),
        p2 * (1 + p2 * p2) / 8,
    )
    return base.scaled(v1, v2)


def p_matrix(sys: CoupledSystem) -> Gramian2:
    """Modal Gramian ``P`` with the input gains folded in."""
    return _p_entries(sys.pi1, sys.pi2, sys.v1, sys.v2)


def p_matrix_from_pairs(sys: CoupledSystem) -> Gramian2:
    """``P`` assembled from the stable modal pair (cross-check of :func:`p_matrix`)."""
    _, stable = modal_pairs(sys)
    return gramian_closed_form(stable)


def composite_form(sys: CoupledSystem) -> np.ndarray:
    """Shape matrix ``Q = T Pi^T diag(P, P) Pi T^T`` of the 4D set in physical coordinates."""
    tf = build_transform(sys)
    p = p_matrix(sys).as_matrix()
    d = np.zeros((4, 4))
    d[:2, :2] = p
    d[2:, 2:] = p
    m = tf.block @ tf.perm_matrix.T
    q = m @ d @ m.T
    return 0.5 * (q + q.T)


def reachable_set(sys: CoupledSystem) -> SetDescription:
    """The unit-energy set ``X`` in physical coordinates.

    Equal time constants make ``P`` singular; the returned description is then
    flagged ``degenerate`` and describes a two-dimensional flat set.
    """
    return SetDescription(
        SetKind.ELLIPSOID4, composite_form(sys), frame="physical", degenerate=sys.is_degenerate
    )


def closed_form_volume_measure(pi1: float, pi2: float, v1: float = 1.0, v2: float = 1.0) -> float:
    """``v1**2 v2**2 (pi1 pi2 (pi1 - pi2) / (4 (pi1 + pi2)))**2``."""
    r = pi1 * pi2 * (pi1 - pi2) / (4 * (pi1 + pi2))
    return v1 * v1 * v2 * v2 * r * r


def determinant_volume_measure(sys: CoupledSystem, dps: Optional[int] = None) -> float:
    """``det(P) det(T1) det(T2)`` evaluated from the matrices by LU determinants.

    ``det(P)`` cancels badly when ``pi1`` and ``pi2`` are close (relative
    error about ``eps * ((pi1 + pi2) / (pi1 - pi2))**2``).  Passing ``dps``
    builds ``P`` and ``T_i`` and takes their determinants with that many
    decimal digits.
    """
    if dps is None:
        tf = build_transform(sys)
        return float(np.linalg.det(p_matrix(sys).as_matrix())) * tf.det_t1() * tf.det_t2()
    with mpmath.workdps(dps):
        p1, p2, v1, v2 = (mpmath.mpf(x) for x in (sys.pi1, sys.pi2, sys.v1, sys.v2))
        p = _p_entries(p1, p2, v1, v2, sqrt=mpmath.sqrt)
        det_p = mpmath.det(mpmath.matrix([[p.w11, p.w12], [p.w12, p.w22]]))
        det_t = mpmath.mpf(1)
        for pi in (p1, p2):
            det_t *= mpmath.det(mpmath.matrix([[1, 1], [pi, -pi]]) / mpmath.sqrt(1 + pi * pi))
        return float(det_p * det_t)


def ratio(sys: CoupledSystem) -> float:
    """``min(pi) / max(pi)`` in (0, 1]."""
    return min(sys.pis) / max(sys.pis)


def volume_measures(sys: CoupledSystem) -> VolumeReport:
    p = p_matrix(sys)
    detp = max(p.det(), 0.0)
    dett = subsystem_det(sys.pi1) * subsystem_det(sys.pi2)
    eps = ratio(sys)
    return VolumeReport(
        p_matrix=p,
        paper_volume_measure=closed_form_volume_measure(sys.pi1, sys.pi2, sys.v1, sys.v2),
        # unit 4-ball volume times sqrt(det Q) = det(P) |det T|
        geometric_volume=math.pi**2 / 2 * detp * abs(dett),
        epsilon=eps,
        objective=float(ratio_objective(eps)),
        degenerate=sys.is_degenerate,
    )


def ratio_objective(epsilon):
    """``eps (1 - eps) / (1 + eps)`` for ``eps`` in (0, 1]; accepts arrays.

    Raises:
        DomainError: any value outside (0, 1].
    """
    e = np.asarray(epsilon, dtype=float)
    if not np.all((e > 0) & (e <= 1)):
        raise DomainError("epsilon must lie in (0, 1]")
    out = e * (1 - e) / (1 + e)
    return float(out) if out.ndim == 0 else out


def ratio_objective_prefers(a: float, b: float) -> bool:
    """Exact test of ``f(a) > f(b)``.

    ``f(a) - f(b) = (a - b)(1 - a - b - ab) / ((1 + a)(1 + b))``, so the sign
    is available without the cancellation that limits a direct comparison of
    the two function values near the maximum.
    """
    return (a - b) * (1.0 - a - b - a * b) > 0.0


def golden_section_max(
    f: Optional[Callable[[float], float]],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 200,
    prefers: Optional[Callable[[float, float], bool]] = None,
) -> float:
    """Maximize a unimodal function on ``[lo, hi]`` by golden-section search.

    ``prefers(a, b)`` decides whether ``a`` beats ``b``; it defaults to
    ``f(a) > f(b)``.  Stops when the bracket is narrower than ``tol`` or after
    ``max_iter`` iterations.
    """
    if prefers is None:
        if f is None:
            raise ValueError("either f or prefers is required")
        prefers = lambda a, b: f(a) > f(b)  # noqa: E731
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if prefers(c, d):
            b, d = d, c
            c = b - _INVPHI * (b - a)
        else:
            a, c = c, d
            d = a + _INVPHI * (b - a)
    return 0.5 * (a + b)


def analytic_optimum() -> float:
    """Positive root of ``eps**2 + 2 eps - 1 = 0`` (where ``f'`` vanishes)."""
    # -1 + sqrt(2) written as 1 / (1 + sqrt(2)) to avoid cancellation
    return 1.0 / (1.0 + SQRT2)


def optimal_ratio() -> tuple[float, float]:
    """Return ``(eps_star, delta_s)`` with ``eps_star = 1 / delta_s``.

    ``eps_star`` comes from golden-section search over ``(1e-9, 1]``; the
    analytic root is kept as a check and the two must agree to 1e-10.
    """
    searched = golden_section_max(None, 1e-9, 1.0, prefers=ratio_objective_prefers)
    exact = analytic_optimum()
    if abs(searched - exact) > 1e-10:
        raise ArithmeticError(f"golden-section optimum {searched!r} disagrees with {exact!r}")
    return searched, 1.0 / searched


def sweep_objective(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` uniform samples ``k / n``, ``k = 1..n``, and the objective there."""
    if int(n) != n or n < 2:
        raise DomainError(f"sweep needs n >= 2 samples, got {n}")
    n = int(n)
    eps = np.arange(1, n + 1, dtype=float) / n
    return eps, ratio_objective(eps)
