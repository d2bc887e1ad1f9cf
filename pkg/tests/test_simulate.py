import numpy as np
import pytest

from daecarleman.errors import ConvergenceError, DomainError, ShapeError
from daecarleman.expr import model_from_document
from daecarleman.simulate import (
    CONSTRAINT_TOL,
    Trajectory,
    compare,
    constraint_residuals,
    lifted_initial_state,
    simulate_dae,
    simulate_linear,
    time_grid,
)
from daecarleman.carleman_ode import build_extended_ode
from daecarleman.kron import kron_power_vec

from conftest import analyzed, reduced


def _runs(name, dx, T=5.0, dt=0.01, orders=(1, 2, 3)):
    model, eq, c = analyzed(name)
    ref = simulate_dae(model, eq.x_sep + dx, T, dt, z_guess=eq.z_sep)
    lifted = {L: simulate_linear(reduced(name, L)[1].Ftilde11, dx, model.N, L, T, dt, eq.x_sep) for L in orders}
    return model, eq, ref, lifted


def test_test1_decays_to_equilibrium():
    model, eq, c = analyzed("test1")
    tr = simulate_dae(model, [0.1, -0.1], T=20, dt=0.01)
    assert np.abs(tr.states[-1]).max() <= 1e-6
    assert constraint_residuals(model, tr).max() <= CONSTRAINT_TOL


def test_test2_converges_inside_domain():
    model, eq, c = analyzed("test2")
    tr = simulate_dae(model, eq.x_sep - 0.05, T=10, dt=0.01, z_guess=eq.z_sep)
    assert np.abs(tr.states[-1] - eq.x_sep).max() <= 1e-4
    x1, z2 = tr.states[:, 0], tr.algebraics[:, 1]
    assert np.all(np.abs(x1 + z2) < np.pi / 2)
    assert np.all((x1 * z2 > -np.pi) & (x1 * z2 <= np.pi))
    assert constraint_residuals(model, tr).max() <= CONSTRAINT_TOL


@pytest.mark.parametrize("name", ["test1", "test2", "test3"])
def test_equilibrium_is_stationary(name):
    model, eq, _ = analyzed(name)
    tr = simulate_dae(model, eq.x_sep, T=1.0, dt=0.01, z_guess=eq.z_sep)
    assert np.abs(tr.states - eq.x_sep).max() <= 1e-9


def test_rk4_converges_at_fourth_order():
    m = model_from_document({"states": ["x"], "odes": ["-x^2"]})
    exact = 1.0 / 2.0  # x(1) from x(0) = 1
    e1 = abs(simulate_dae(m, [1.0], 1.0, 0.1).states[-1, 0] - exact)
    e2 = abs(simulate_dae(m, [1.0], 1.0, 0.05).states[-1, 0] - exact)
    assert 12 <= e1 / e2 <= 20


def test_scalar_linear_flow():
    tr = simulate_linear([[-1.0]], [1.0], 1, 1, T=2.0, dt=0.01)
    np.testing.assert_allclose(tr.states[:, 0], np.exp(-tr.times), atol=1e-9)


def test_lifted_initial_state():
    dx = np.array([0.3, -0.2])
    y = lifted_initial_state(dx, 3)
    np.testing.assert_array_equal(y, np.concatenate([dx, kron_power_vec(dx, 2), kron_power_vec(dx, 3)]))


def test_higher_orders_track_closer():
    _, _, ref, lifted = _runs("test1", np.array([-0.3, -0.3]))
    err = {L: compare(tr, ref).rms.max() for L, tr in lifted.items()}
    assert err[3] <= err[2] <= err[1]


def test_linear_model_is_exact_at_every_order():
    A = np.array([[-1.0, 0.5], [0.0, -2.0]])
    ode = {L: build_extended_ode([A, np.zeros((2, 4)), np.zeros((2, 8))], L) for L in (1, 2, 3)}
    dx = np.array([0.2, 0.1])
    runs = {L: simulate_linear(s.A_nord, dx, 2, L, T=3.0, dt=0.01) for L, s in ode.items()}
    for L in (2, 3):
        np.testing.assert_allclose(runs[L].states, runs[1].states, atol=1e-13)


def test_compare_reports():
    t = time_grid(1.0, 0.1)
    a = Trajectory(t, np.zeros((t.size, 2)), None)
    b = Trajectory(t, np.full((t.size, 2), 0.25), None)
    rep = compare(a, a)
    assert not rep.rms.any() and not rep.max_abs.any()
    np.testing.assert_allclose(compare(a, b).rms, [0.25, 0.25])
    np.testing.assert_allclose(compare(a, b).max_abs, [0.25, 0.25])
    c = Trajectory(time_grid(1.0, 0.2), np.zeros((6, 2)), None)
    with pytest.raises(ShapeError):
        compare(a, c)


def test_time_grid():
    t = time_grid(1.0, 0.1)
    assert t.size == 11 and t[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        time_grid(1.0, 0.0)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], np.zeros((2, 1)), None)
    with pytest.raises(DomainError):
        Trajectory([0.0, 1.0], [[0.0], [np.nan]], None)
    with pytest.raises(ShapeError):
        Trajectory([0.0, 1.0], np.zeros((3, 1)), None)


def test_shape_errors():
    with pytest.raises(ShapeError):
        simulate_linear(np.eye(3), [1.0, 2.0], 2, 2)
    model = analyzed("test1")[0]
    with pytest.raises(ShapeError):
        simulate_dae(model, [0.1])


def test_domain_exit_is_reported():
    # finite-time blow-up at t = 1
    m = model_from_document({"states": ["x"], "odes": ["exp(x)"]})
    with pytest.raises(DomainError, match="domain"):
        simulate_dae(m, [0.0], T=2.0, dt=0.01)


def test_unsolvable_constraint():
    m = model_from_document({
        "states": ["x"], "algebraics": ["z"], "odes": ["-x"], "constraints": ["z^2 + 1 + x"],
        "guess": {"x": [0.0], "z": [0.0]},
    })
    with pytest.raises(ConvergenceError):
        simulate_dae(m, [0.0], T=0.1, dt=0.01)
