import io
import math

import numpy as np
import pytest
from scipy.linalg import expm

from silverreach.decomposition import build_transform, from_modal
from silverreach.errors import InfeasibleDiscretizationError, ValidationError
from silverreach.gramian import mixed_set
from silverreach.reachability import p_matrix, reachable_set
from silverreach.synthesis import (
    SynthesisProblem,
    Trajectory,
    discretize,
    energy_of,
    simulate,
    synthesize_min_energy,
    synthesize_pair,
)
from silverreach.systems import CoupledSystem, FirstOrderPair


def boundary_points(sys, count, rng):
    """Random points with composite quadratic form exactly 1."""
    tf = build_transform(sys)
    chol = np.linalg.cholesky(p_matrix(sys).as_matrix())
    for _ in range(count):
        y = rng.normal(size=4)
        y /= np.linalg.norm(y)
        yield from_modal(tf, np.concatenate([chol @ y[:2], chol @ y[2:]]))


def test_discretize_matches_expm():
    sys = CoupledSystem(1.3, 2.1, 0.5, -1.5)
    dt = 0.07
    aug = np.zeros((5, 5))
    aug[:4, :4] = sys.a_matrix()
    aug[:4, 4] = sys.b_vector()
    e = expm(aug * dt)
    a_d, b_d = discretize(sys, dt)
    np.testing.assert_allclose(a_d, e[:4, :4], rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(b_d, e[:4, 4], rtol=1e-12, atol=1e-15)


def test_discretize_example_values():
    a_d, _ = discretize(CoupledSystem(1, 2), 0.1)
    assert a_d[0, 0] == pytest.approx(1.00500417, abs=1e-8)
    assert a_d[0, 1] == pytest.approx(0.10016675, abs=1e-8)


def test_discretize_small_step_limit():
    sys = CoupledSystem(1.5, 3)
    for dt in (1e-2, 1e-3):
        a_d, b_d = discretize(sys, dt)
        assert np.max(np.abs(a_d - np.eye(4) - dt * sys.a_matrix())) <= 10 * dt**2
        assert np.max(np.abs(b_d - dt * sys.b_vector())) <= 100 * dt**2


def test_homogeneous_propagation_matches_closed_form():
    sys = CoupledSystem(1.2, 0.4)
    z0 = np.array([0.3, -0.2, 0.1, 0.5])
    traj = simulate(sys, np.zeros(100), z0, dt=0.01)
    t = 1.0
    for i, pi in enumerate(sys.pis):
        x0, v0 = z0[2 * i], z0[2 * i + 1]
        expected = x0 * math.cosh(pi * t) + v0 * math.sinh(pi * t) / pi
        assert traj.states[-1, 2 * i] == pytest.approx(expected, rel=1e-12)


def test_simulate_equilibrium_and_divergence():
    sys = CoupledSystem(1, 2)
    assert np.all(simulate(sys, np.zeros(50), dt=0.02).states == 0)
    traj = simulate(sys, np.zeros(200), [1e-3, 0, 0, 0], dt=0.01)
    np.testing.assert_allclose(traj.states[:, 0], 1e-3 * np.cosh(traj.times), rtol=1e-12)


def test_energy_examples():
    t = np.linspace(0, 1, 101)
    zero = Trajectory(t, np.zeros(101), np.zeros((101, 4)), 0.0)
    assert energy_of(zero) == 0
    ones = Trajectory(t, np.ones(101), np.zeros((101, 4)), 1.0)
    assert energy_of(ones) == pytest.approx(1.0, rel=1e-14)
    t = np.arange(0, 10 + 5e-4, 1e-3)
    decaying = Trajectory(t, np.exp(-t), np.zeros((len(t), 4)), 0.5)
    assert energy_of(decaying) == pytest.approx(0.5, abs=1e-4)
    assert energy_of(ones, rule="zoh") == pytest.approx(1.0, rel=1e-14)


def test_trajectory_invariants():
    with pytest.raises(ValidationError):
        Trajectory(np.array([0, 1]), np.zeros(3), np.zeros((2, 4)), 0.0)
    with pytest.raises(ValidationError):
        Trajectory(np.array([1.0, 0.0]), np.zeros(2), np.zeros((2, 4)), 0.0)
    with pytest.raises(ValidationError):
        Trajectory(np.array([0.0, 1.0]), np.zeros(2), np.zeros((2, 4)), -1.0)


def test_problem_validation():
    sys = CoupledSystem(1, 2)
    with pytest.raises(ValidationError) as info:
        SynthesisProblem(sys, (0, 0, 0, 0), horizon=1.0, dt=0.1)
    assert info.value.code == "invalid_grid"
    with pytest.raises(ValidationError):
        SynthesisProblem(sys, (0, 0, 0, 0), horizon=-1.0)
    p = SynthesisProblem(sys, (0, 0, 0, 0))
    assert p.horizon == 8.0 and p.dt == pytest.approx(8.0 / 2000)


def test_origin_target_needs_no_input():
    traj = synthesize_min_energy(SynthesisProblem(CoupledSystem(1, 2), (0, 0, 0, 0)))
    assert traj.energy == 0
    assert np.all(traj.inputs == 0)


def test_boundary_energy_near_one(rng):
    sys = CoupledSystem(1, 2)
    for z in boundary_points(sys, 3, rng):
        traj = synthesize_min_energy(SynthesisProblem(sys, z, horizon=8.0, dt=8.0 / 2000))
        assert traj.energy == pytest.approx(1.0, abs=0.02)
        n = (len(traj.times) - 1) // 2
        assert traj.times[n] == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(traj.states[n], z, atol=1e-6 * (1 + np.linalg.norm(z)))
        assert np.linalg.norm(traj.states[-1]) <= 1e-6
        assert np.linalg.norm(traj.states[0]) <= 1e-6


def test_energy_scales_quadratically(rng):
    sys = CoupledSystem(1, 2)
    z = next(boundary_points(sys, 1, rng))
    base = synthesize_min_energy(SynthesisProblem(sys, z)).energy
    for s in (0.3, 0.8, 1.7):
        scaled = synthesize_min_energy(SynthesisProblem(sys, s * z)).energy
        assert scaled == pytest.approx(s * s * base, rel=0.02)


def _physical_min_energy(sys, target, horizon, n):
    """Minimum-norm held input built directly from the physical ZOH matrices."""
    dt = horizon / n
    a_d, b_d = discretize(sys, dt)
    # columns: effect of u_k on z(0) for past steps and on z(T) for all steps
    powers = [np.eye(4)]
    for _ in range(2 * n):
        powers.append(a_d @ powers[-1])
    g = np.zeros((8, 2 * n))
    for k in range(n):
        g[:4, k] = powers[n - k - 1] @ b_d
    for k in range(2 * n):
        g[4:, k] = powers[2 * n - k - 1] @ b_d
    rhs = np.concatenate([target, np.zeros(4)])
    u, *_ = np.linalg.lstsq(g, rhs, rcond=None)
    return float(u @ u * dt), u


def test_matches_physical_least_squares():
    sys = CoupledSystem(1.0, 1.6)
    target = np.array([0.05, -0.02, 0.03, 0.04])
    horizon, n = 3.0, 150
    expected, u_ref = _physical_min_energy(sys, target, horizon, n)
    traj = synthesize_min_energy(SynthesisProblem(sys, target, horizon, horizon / n))
    assert traj.energy == pytest.approx(expected, rel=1e-7)
    np.testing.assert_allclose(traj.inputs[:-1], u_ref, rtol=1e-6, atol=1e-9 * np.max(np.abs(u_ref)))


def test_simulate_reproduces_synthesized_states():
    sys = CoupledSystem(1, 2)
    target = np.array([0.1, 0.05, -0.04, 0.02])
    horizon = 3.0
    traj = synthesize_min_energy(SynthesisProblem(sys, target, horizon, horizon / 300))
    sim = simulate(sys, traj.inputs[:-1], np.zeros(4), traj.dt, t0=-horizon)
    np.testing.assert_allclose(sim.times, traj.times, atol=1e-12)
    np.testing.assert_allclose(sim.states, traj.states, atol=1e-9)
    assert sim.energy == pytest.approx(traj.energy, rel=1e-12)


def test_halving_dt_with_same_held_input(rng):
    sys = CoupledSystem(1, 2)
    u = rng.normal(size=200)
    z0 = rng.normal(size=4)
    coarse = simulate(sys, u, z0, dt=0.01)
    fine = simulate(sys, np.repeat(u, 2), z0, dt=0.005)
    scale = np.max(np.abs(coarse.states[-1]))
    assert np.max(np.abs(coarse.states[-1] - fine.states[-1])) < 1e-10 * max(scale, 1.0)


def test_one_sided_stable_pair_reaches_gramian_column():
    traj = synthesize_pair(FirstOrderPair(1, 2, 1, 1), (0.5, 1 / 3), two_sided=False)
    assert traj.energy == pytest.approx(0.5, rel=1e-3)
    assert traj.times[-1] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(traj.states[-1], [0.5, 1 / 3], atol=1e-9)


def test_mixed_pair_decouples():
    pair = FirstOrderPair(-1, 2, 1, 1)
    s = mixed_set(pair)
    for xi in [(1, 0), (0, 1), (0.3, -0.7)]:
        assert synthesize_pair(pair, xi).energy == pytest.approx(s.energy(xi), rel=0.02)


def test_degenerate_system():
    sys = CoupledSystem(1, 1)
    with pytest.raises(InfeasibleDiscretizationError):
        synthesize_min_energy(SynthesisProblem(sys, (0.1, 0, -0.1, 0)))
    z = np.array([0.1, 0.02, 0.1, 0.02])
    traj = synthesize_min_energy(SynthesisProblem(sys, z))
    assert traj.energy == pytest.approx(reachable_set(sys).energy(z), rel=0.02)


def test_csv_export():
    traj = simulate(CoupledSystem(1, 2), [0.5, -0.25], dt=0.1)
    rows = traj.to_csv().splitlines()
    assert rows[0] == "t,u,x1,dx1,x2,dx2"
    assert len(rows) == 4
    assert rows[1].split(",")[:2] == ["0.0", "0.5"]
    buf = io.StringIO()
    traj.write_csv(buf)
    assert buf.getvalue() == traj.to_csv()
