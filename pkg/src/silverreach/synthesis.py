"""Minimum-energy input synthesis and exact zero-order-hold simulation.

This is the numerical oracle for the unit-energy sets: it drives the plant
from rest at ``-T`` to a target at ``0`` and back to rest at ``+T`` with the
least ``sum(u_k**2) * dt`` over piecewise-constant inputs, then compares the
energy with the closed-form quadratic forms.

The solve works mode by mode.  Each scalar mode ``m' = lam m + g u`` is
constrained at ``t = 0`` (reached from rest) and at ``t = T`` (returned to
rest); every constraint row is written so that it only contains
``exp(-|lam| s)`` factors, i.e. unstable modes are propagated backwards and
stable modes forwards.  This keeps the constraint map well conditioned for
long horizons.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decomposition import build_transform, to_modal
from .errors import (
    HorizonTooShortError,
    InfeasibleDiscretizationError,
    ValidationError,
)
from .systems import CoupledSystem, FirstOrderPair, StateLike, as_state_array, modal_gain

#: Relative singular-value cutoff of the minimum-norm solve.
RCOND = 1e-10
#: Endpoint tolerance.
ENDPOINT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled input and state history on a uniform grid.

    ``inputs[k]`` is held on ``[times[k], times[k + 1])``; the final entry is
    the value held after the last sample (0 for synthesized trajectories).
    ``energy`` is the zero-order-hold energy ``sum(inputs[:-1]**2) * dt``.
    """

    times: np.ndarray
    inputs: np.ndarray
    states: np.ndarray
    energy: float
    labels: tuple[str, ...] = ("x1", "dx1", "x2", "dx2")

    def __post_init__(self) -> None:
        n = len(self.times)
        if len(self.inputs) != n or len(self.states) != n:
            raise ValidationError(
                "times, inputs and states must have equal length", code="invalid_trajectory"
            )
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("times must be strictly increasing", code="invalid_trajectory")
        if self.energy < 0:
            raise ValidationError("energy must be nonnegative", code="invalid_trajectory")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def state_at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        return self.states[k]

    def write_csv(self, fh) -> None:
        """Write ``t,u,<state labels>`` rows using shortest round-trip floats."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "u") + self.labels)
        for t, u, z in zip(self.times, self.inputs, self.states):
            writer.writerow([repr(float(t)), repr(float(u))] + [repr(float(x)) for x in z])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass(frozen=True)
class SynthesisProblem:
    """Two-sided problem: rest at ``-horizon``, ``target`` at 0, rest at ``+horizon``.

    ``horizon`` defaults to ``8 / min(pi)`` and ``dt`` to ``horizon / 2000``.
    """

    system: CoupledSystem
    target: tuple[float, float, float, float]
    horizon: Optional[float] = None
    dt: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", tuple(as_state_array(self.target).tolist()))
        horizon = self.horizon if self.horizon is not None else 8.0 / min(self.system.pis)
        dt = self.dt if self.dt is not None else horizon / 2000
        _check_grid(horizon, dt)
        object.__setattr__(self, "horizon", float(horizon))
        object.__setattr__(self, "dt", float(dt))


def _check_grid(horizon: float, dt: float) -> int:
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValidationError(f"horizon must be positive, got {horizon}", code="invalid_grid")
    if not (math.isfinite(dt) and dt > 0):
        raise ValidationError(f"dt must be positive, got {dt}", code="invalid_grid")
    if dt > horizon / 50 * (1 + 1e-12):
        raise ValidationError(
            f"dt={dt} is coarser than horizon/50={horizon / 50}", code="invalid_grid"
        )
    return max(1, int(round(horizon / dt)))


def discretize(sys: CoupledSystem, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold step ``z[k+1] = A_d z[k] + b_d u[k]``."""
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}", code="invalid_grid")
    a_d = np.zeros((4, 4))
    b_d = np.zeros(4)
    for i, (pi, v) in enumerate(zip(sys.pis, sys.gains)):
        ch, sh = math.cosh(pi * dt), math.sinh(pi * dt)
        s = slice(2 * i, 2 * i + 2)
        a_d[s, s] = [[ch, sh / pi], [pi * sh, ch]]
        # forced response of x'' = pi^2 x + v pi^2 u under constant u
        b_d[s] = [v * (ch - 1.0), v * pi * sh]
    return a_d, b_d


def simulate(
    sys: CoupledSystem,
    u: Sequence[float],
    z0: StateLike = (0.0, 0.0, 0.0, 0.0),
    dt: float = 1e-3,
    t0: float = 0.0,
) -> Trajectory:
    """Propagate the plant forward under the held inputs ``u``.

    Returns ``len(u) + 1`` samples; the trailing input is padded with 0.
    """
    a_d, b_d = discretize(sys, dt)
    u = np.asarray(u, dtype=float).reshape(-1)
    states = np.empty((len(u) + 1, 4))
    states[0] = as_state_array(z0)
    for k, uk in enumerate(u):
        states[k + 1] = a_d @ states[k] + b_d * uk
    times = t0 + dt * np.arange(len(u) + 1)
    return Trajectory(times, np.append(u, 0.0), states, float(np.sum(u * u) * dt))


def energy_of(traj: Trajectory, rule: str = "trapezoid") -> float:
    """Input energy of a trajectory.

    ``rule="trapezoid"`` integrates the sampled ``u**2``; ``rule="zoh"`` sums
    ``u_k**2 dt`` over the hold intervals, which is exact for held inputs.
    """
    u2 = np.asarray(traj.inputs, dtype=float) ** 2
    if rule == "trapezoid":
        dt = np.diff(traj.times)
        return float(np.sum(0.5 * (u2[1:] + u2[:-1]) * dt))
    if rule == "zoh":
        return float(np.sum(u2[:-1] * np.diff(traj.times)))
    raise ValueError(f"unknown rule {rule!r}")


def _min_norm(g: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, bool]:
    """Minimum-norm ``w`` with ``g @ w = c``; also reports full row rank."""
    if g.shape[0] == 0:
        return np.zeros(g.shape[1]), True
    norms = np.linalg.norm(g, axis=1)
    g = g / norms[:, None]
    c = c / norms
    u, s, vt = np.linalg.svd(g, full_matrices=False)
    keep = s > RCOND * s[0]
    w = vt[keep].T @ ((u[:, keep].T @ c) / s[keep])
    return w, bool(np.all(keep))


def _solve_modes(
    lams: np.ndarray,
    gains: np.ndarray,
    target: np.ndarray,
    n: int,
    dt: float,
    two_sided: bool,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Held inputs on ``[-T, T]`` (or ``[-T, 0]``) and modal states at every sample.

    Modes are ``m' = lam m + g u``.  Returns ``(u, modal_states, full_rank)``.
    """
    horizon = n * dt
    hold = np.array([g * math.expm1(lam * dt) / lam for lam, g in zip(lams, gains)])
    # k + 1 for k in 0..n-1: number of steps from the end of interval k
    steps = np.arange(1, n + 1, dtype=float)

    # reach target at t=0 from rest at t=-T; interval k ends (n - k - 1) steps before 0
    past = np.empty((len(lams), n))
    past_rhs = np.empty(len(lams))
    for j, lam in enumerate(lams):
        if lam < 0:
            past[j] = hold[j] * np.exp(lam * (n - steps) * dt)
            past_rhs[j] = target[j]
        else:
            past[j] = hold[j] * np.exp(-lam * steps * dt)
            past_rhs[j] = math.exp(-lam * horizon) * target[j]
    w_past, rank_past = _min_norm(past / math.sqrt(dt), past_rhs)
    u_past = w_past / math.sqrt(dt)

    if two_sided:
        # return to rest at t=T; future interval k (0-based from t=0) ends k+1 steps after 0
        future = np.empty((len(lams), n))
        future_rhs = np.empty(len(lams))
        for j, lam in enumerate(lams):
            if lam > 0:
                future[j] = hold[j] * np.exp(-lam * steps * dt)
                future_rhs[j] = -target[j]
            else:
                future[j] = hold[j] * np.exp(lam * (n - steps) * dt)
                future_rhs[j] = -math.exp(lam * horizon) * target[j]
        w_future, rank_future = _min_norm(future / math.sqrt(dt), future_rhs)
        u = np.concatenate([u_past, w_future / math.sqrt(dt)])
    else:
        rank_future = True
        u = u_past

    # stable modes forward from rest at -T, unstable modes backward from the far end
    total = len(u)
    states = np.empty((total + 1, len(lams)))
    for j, lam in enumerate(lams):
        decay = math.exp(-abs(lam) * dt)
        m = states[:, j]
        if lam < 0:
            m[0] = 0.0
            for k in range(total):
                m[k + 1] = decay * m[k] + hold[j] * u[k]
        else:
            m[total] = 0.0 if two_sided else target[j]
            for k in range(total - 1, -1, -1):
                m[k] = decay * (m[k + 1] - hold[j] * u[k])
    return u, states, rank_past and rank_future


def _check_endpoints(first, at_zero, last, target, rank_ok: bool) -> None:
    miss = float(np.linalg.norm(at_zero - target))
    ends = max(float(np.linalg.norm(first)), float(np.linalg.norm(last)))
    scale = 1.0 + float(np.linalg.norm(target))
    if miss <= ENDPOINT_TOL * scale and ends <= ENDPOINT_TOL * scale:
        return
    msg = f"target miss {miss:.3g}, endpoint residual {ends:.3g}"
    if not rank_ok:
        raise InfeasibleDiscretizationError("rank-deficient constraint map: " + msg)
    raise HorizonTooShortError(msg)


def synthesize_min_energy(problem: SynthesisProblem) -> Trajectory:
    """Least-energy held input through ``problem.target`` at ``t = 0``.

    Raises:
        InfeasibleDiscretizationError: equal time constants and a target off
            the reachable subspace.
        HorizonTooShortError: endpoint residuals above tolerance.
    """
    sys = problem.system
    target = np.asarray(problem.target)
    n = _check_grid(problem.horizon, problem.dt)
    dt = problem.horizon / n
    tf = build_transform(sys)
    b1 = modal_gain(sys.pi1, sys.v1)
    b2 = modal_gain(sys.pi2, sys.v2)
    # grouped modal order: unstable 1, unstable 2, stable 1, stable 2
    lams = np.array([sys.pi1, sys.pi2, -sys.pi1, -sys.pi2])
    gains = np.array([b1, b2, -b1, -b2])
    u, modal, rank_ok = _solve_modes(lams, gains, to_modal(tf, target), n, dt, True)

    states = modal @ (tf.block @ tf.perm_matrix.T).T
    _check_endpoints(states[0], states[n], states[-1], target, rank_ok)
    times = dt * np.arange(-n, n + 1)
    return Trajectory(times, np.append(u, 0.0), states, float(np.sum(u * u) * dt))


def synthesize_pair(
    pair: FirstOrderPair,
    target: Sequence[float],
    horizon: Optional[float] = None,
    dt: Optional[float] = None,
    two_sided: bool = True,
) -> Trajectory:
    """Least-energy held input for a :class:`FirstOrderPair`.

    Two-sided: rest at ``-T``, ``target`` at 0, rest at ``+T``.  One-sided:
    rest at ``-T`` and ``target`` at 0, with the trajectory ending at 0.
    ``horizon`` defaults to ``8 / min|alpha|`` and ``dt`` to ``horizon / 2000``.
    """
    target = np.asarray(target, dtype=float).reshape(2)
    if horizon is None:
        horizon = 8.0 / min(abs(a) for a in pair.alphas)
    if dt is None:
        dt = horizon / 2000
    n = _check_grid(horizon, dt)
    dt = horizon / n
    lams = -np.array(pair.alphas)
    gains = np.array(pair.betas)
    u, states, rank_ok = _solve_modes(lams, gains, target, n, dt, two_sided)
    last = states[-1] if two_sided else np.zeros(2)
    _check_endpoints(states[0], states[n], last, target, rank_ok)
    times = dt * np.arange(-n, len(u) - n + 1)
    return Trajectory(
        times, np.append(u, 0.0), states, float(np.sum(u * u) * dt), labels=("xi1", "xi2")
    )
