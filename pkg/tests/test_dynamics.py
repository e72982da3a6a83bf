import numpy as np
import pytest
from scipy.linalg import expm

from conftest import pair
from structcons.dynamics import (
    DivergenceError,
    GridMismatchError,
    Trajectory,
    cascade_closed_form,
    consensus_verdict,
    default_horizon,
    envelope_check,
    integrate_rk4,
    rk4_propagator,
    simulate_linear,
    spectral_envelope,
    spread,
    time_grid,
)
from structcons.graph import DiGraph, build_laplacian
from structcons.random_graphs import spanning_tree_graph, stable_matrix
from structcons.spectral import consensus_value_oracle, spectrum


def test_scalar_exponential():
    traj = simulate_linear([[-1.0]], [1.0], dt=1e-3, horizon=10.0)
    assert traj.times[-1] == pytest.approx(10.0)
    assert abs(traj.final[0] - np.exp(-10.0)) <= 1e-9


def test_trajectory_grid():
    traj = simulate_linear([[-1.0]], [1.0], dt=0.25, horizon=2.0)
    assert traj.times[0] == 0.0
    np.testing.assert_allclose(np.diff(traj.times), 0.25, rtol=0, atol=0)
    assert traj.states.shape == (9, 1)


def test_pair_converges_to_oracle():
    lap = build_laplacian(pair())
    traj = simulate_linear(-lap, [0.0, 2.0], horizon=20.0)
    np.testing.assert_allclose(traj.final, [1.0, 1.0], atol=1e-12)


def test_consensus_subspace_invariant():
    rng = np.random.default_rng(0)
    for _ in range(10):
        g = spanning_tree_graph(rng)
        c = rng.uniform(-3, 3)
        traj = simulate_linear(-build_laplacian(g), np.full(g.n, c), horizon=50.0)
        assert np.max(np.abs(traj.states - c)) <= 1e-12


def test_blocked_propagation_matches_stepwise():
    rng = np.random.default_rng(1)
    a = stable_matrix(rng, 4)
    x0 = rng.normal(size=4)
    traj = simulate_linear(a, x0, dt=0.01, horizon=30.0)
    m = rk4_propagator(a, 0.01)
    x = x0.copy()
    for k in range(1, len(traj.times)):
        x = m @ x
        if k % 997 == 0:
            np.testing.assert_allclose(traj.states[k], x, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(traj.final, x, rtol=1e-10, atol=1e-14)


def test_rk4_propagator_matches_explicit_stages():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3))
    x = rng.normal(size=3)
    h = 0.1
    k1 = a @ x
    k2 = a @ (x + h / 2 * k1)
    k3 = a @ (x + h / 2 * k2)
    k4 = a @ (x + h * k3)
    np.testing.assert_allclose(rk4_propagator(a, h) @ x, x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), rtol=1e-13)


def test_forced_matches_augmented_system():
    # x' = -x + u with u = source of u' = -2u, same as the 2-state autonomous system
    dt, horizon = 1e-3, 5.0
    src = simulate_linear([[-2.0]], [1.0], dt, horizon)
    forced = simulate_linear([[-1.0]], [0.0], dt, horizon, b=[[1.0]], u=src)
    full = simulate_linear([[-1.0, 1.0], [0.0, -2.0]], [0.0, 1.0], dt, horizon)
    assert np.max(np.abs(forced.states[:, 0] - full.states[:, 0])) < 1e-10


def test_forced_grid_mismatch():
    src = simulate_linear([[-2.0]], [1.0], 1e-2, 5.0)
    with pytest.raises(GridMismatchError):
        simulate_linear([[-1.0]], [0.0], 1e-3, 5.0, b=[[1.0]], u=src)


def test_divergence_guard():
    with pytest.raises(DivergenceError):
        simulate_linear([[5.0]], [1.0], dt=1e-2, horizon=10.0)


def test_grid_preconditions():
    with pytest.raises(ValueError):
        time_grid(0.0, 1.0)
    with pytest.raises(ValueError):
        time_grid(1.0, 0.5)


def test_step_halving_fourth_order():
    rng = np.random.default_rng(3)
    a = stable_matrix(rng, 3)
    x0 = rng.normal(size=3)
    ref = expm(2.0 * a) @ x0
    errs = [np.linalg.norm(simulate_linear(a, x0, dt, 2.0).final - ref) for dt in (0.1, 0.05)]
    assert 12 <= errs[0] / errs[1] <= 20


@pytest.mark.parametrize("x, expected", [((1, 1, 1), 0.0), ((0, 2), 2.0), ((-1, 0, 3), 4.0)])
def test_spread(x, expected):
    assert spread(x) == expected


def test_verdict_constant():
    traj = simulate_linear(-build_laplacian(pair()), [0.5, 0.5], horizon=1.0)
    v = consensus_verdict(traj)
    assert v.achieved and v.time_to_tolerance == 0.0 and v.value == pytest.approx(0.5)


def test_verdict_isolated_agents():
    traj = simulate_linear(np.zeros((2, 2)), [0.0, 1.0], horizon=5.0)
    v = consensus_verdict(traj)
    assert not v.achieved and v.final_spread == 1.0 and v.time_to_tolerance is None and v.value is None


def test_verdict_cascade_pair():
    # z(t) = 1 - exp(-t): spread exp(-t) <= 1e-6 from t = ln(1e6)
    traj = simulate_linear(-build_laplacian(DiGraph.dense(2, [(1, 2)])), [1.0, 0.0], horizon=20.0)
    v = consensus_verdict(traj, 1e-6)
    assert v.achieved
    assert v.value == pytest.approx(1.0, abs=1e-6)
    assert v.time_to_tolerance == pytest.approx(np.log(1e6), abs=2e-3)


def test_verdict_time_is_last_entry():
    times = np.arange(5.0)
    states = np.array([[0, 1], [0, 0], [0, 1], [0, 0], [0, 0]], dtype=float)
    v = consensus_verdict(Trajectory(times, states, 1.0), tol=0.5)
    assert v.time_to_tolerance == 3.0


def test_oracle_agreement_on_random_graphs():
    rng = np.random.default_rng(4)
    for _ in range(25):
        g = spanning_tree_graph(rng)
        lap = build_laplacian(g)
        x0 = rng.uniform(0, 1, g.n)
        gap = -spectrum(-lap).max_real_part_nonzero
        traj = simulate_linear(-lap, x0, horizon=40.0 / gap)
        v = consensus_verdict(traj)
        assert v.achieved
        assert abs(v.value - consensus_value_oracle(lap, x0)) <= 1e-4


def test_undirected_spread_monotone():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        g0 = spanning_tree_graph(rng, n)
        w = {}
        for e in g0.edges:
            w.setdefault(tuple(sorted(e.pair)), e.w)
        edges = [(u, v, x) for (u, v), x in w.items()] + [(v, u, x) for (u, v), x in w.items()]
        lap = build_laplacian(DiGraph.dense(n, edges))
        traj = simulate_linear(-lap, rng.uniform(0, 1, n), horizon=20.0)
        spreads = np.ptp(traj.states, axis=1)
        assert np.all(np.diff(spreads) <= 1e-12)


def test_default_horizon():
    lap = build_laplacian(pair())
    assert default_horizon(-lap) == pytest.approx(20.0)
    assert default_horizon(np.zeros((2, 2))) == 10.0
    assert default_horizon(-1e-6 * lap) == 1e4


# -- closed-form cascade


def _grid_source(value, dt=1e-3, horizon=5.0):
    times = time_grid(dt, horizon)
    return Trajectory(times, np.full((len(times), 1), value), dt)


def _trapezoid_bound(gain, value, dt=1e-3):
    # composite trapezoid on int_0^t K exp(-K (t - s)) c ds: error <= dt^2 K^2 |c| / 12
    return dt**2 * gain**2 * abs(value) / 12 + 1e-14


def test_closed_form_constant_input():
    src = _grid_source(2.0)
    z = cascade_closed_form(-1.0, {1: 1.5}, src)
    expected = np.exp(-1.5 * src.times) * -1.0 + (1 - np.exp(-1.5 * src.times)) * 2.0
    assert np.max(np.abs(z.states[:, 0] - expected)) <= _trapezoid_bound(1.5, 2.0)


def test_closed_form_equilibrium():
    z = cascade_closed_form(0.3, {1: 2.0}, _grid_source(0.3))
    assert z.states[0, 0] == 0.3
    assert np.max(np.abs(z.states[:, 0] - 0.3)) <= _trapezoid_bound(2.0, 0.3)


def test_closed_form_second_order_in_dt():
    errs = []
    for dt in (1e-2, 5e-3):
        src = _grid_source(1.0, dt=dt)
        z = cascade_closed_form(0.0, {1: 3.0}, src)
        errs.append(np.max(np.abs(z.states[:, 0] - (1 - np.exp(-3.0 * src.times)))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_closed_form_matches_direct_integration():
    g = DiGraph.dense(3, [(1, 2, 1.2), (2, 3, 0.7), (3, 2, 0.5)])
    src = simulate_linear(-build_laplacian(g), [1.0, -0.5, 0.25], 1e-3, 15.0)
    gains = {1: 0.8, 3: 1.7}
    closed = cascade_closed_form(2.0, gains, src)
    direct = simulate_linear([[-sum(gains.values())]], [2.0], 1e-3, 15.0, b=[[0.8, 1.7]], u=src.columns([0, 2]))
    assert np.max(np.abs(closed.states - direct.states)) <= 1e-5


def test_closed_form_errors():
    with pytest.raises(GridMismatchError):
        cascade_closed_form(0.0, {2: 1.0}, _grid_source(1.0))
    with pytest.raises(ValueError):
        cascade_closed_form(0.0, {}, _grid_source(1.0))


# -- envelopes


def test_envelope_scalar_exponential():
    traj = simulate_linear([[-1.0]], [1.0], horizon=10.0)
    assert envelope_check(traj, 0.0, 1.0, 1.0)


def test_envelope_rejects_constant():
    traj = Trajectory(np.arange(0, 10, 0.1), np.ones((100, 1)), 0.1)
    assert not envelope_check(traj, 0.0, 1.0, 0.5)


def test_envelope_pair_spectral():
    lap = build_laplacian(pair())
    limit, c, lam = spectral_envelope(lap, [0.0, 2.0])
    assert limit == pytest.approx(1.0) and lam == pytest.approx(2.0)
    traj = simulate_linear(-lap, [0.0, 2.0], horizon=10.0)
    assert envelope_check(traj, limit, c, lam)
    assert not envelope_check(traj, limit, c, 2.5)


def test_csv_format_and_roundtrip():
    traj = simulate_linear(-build_laplacian(pair()), [0.0, 2.0], dt=0.5, horizon=1.0)
    text = traj.to_csv()
    lines = text.splitlines()
    assert lines[0] == "t,x_1,x_2"
    assert len(lines) == 4
    back = Trajectory.from_csv(text)
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.times, traj.times)


def test_integrate_rk4_nonlinear():
    traj = integrate_rk4(lambda t, x: -(x**3) + 0.5**3, [2.0], dt=1e-3, horizon=40.0)
    assert abs(traj.final[0] - 0.5) < 1e-6
