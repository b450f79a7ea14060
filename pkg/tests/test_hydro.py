import numpy as np
import pytest

from flocklab.activeset import lemma_action_bound
from flocklab.dynamics import AgentEnsemble, ModelSpec, simulate
from flocklab.errors import StabilityError
from flocklab.hydro import (
    HydroState1D,
    LagrangianParticles,
    hydro_certify,
    hydro_diameters,
    lagrangian_rhs,
    nonlocal_average,
    step_eulerian,
    step_lagrangian,
)
from flocklab.influence import InfluenceFunction

PHI1 = InfluenceFunction.power_law(1.0)
PHI_SLOW = InfluenceFunction.power_law(0.25)


def two_bump_state(x_min=-12.0, dx=0.05, centers=(-4.0, 4.0), width=0.5, speed=0.5):
    n = int(round((-2 * x_min) / dx))
    centers_grid = x_min + dx * (np.arange(n) + 0.5)
    rho = sum(np.exp(-((centers_grid - c) ** 2) / (2 * width**2)) for c in centers)
    u = np.where(centers_grid < 0.0, speed, -speed)
    return HydroState1D(x_min=x_min, dx=dx, rho=rho, u=u)


# ------------------------------------------------------------ nonlocal average


def test_average_of_constant_velocity():
    rho = np.array([1.0, 2.0, 0.5, 3.0])
    u = np.full(4, 0.7)
    state = HydroState1D(x_min=0.0, dx=1.0, rho=rho, u=u)
    assert nonlocal_average(state, PHI1) == pytest.approx(u, abs=1e-14)


def test_average_single_occupied_cell():
    rho = np.array([0.0, 0.0, 2.0, 0.0])
    u = np.array([9.0, 9.0, 1.5, 9.0])
    state = HydroState1D(x_min=0.0, dx=1.0, rho=rho, u=u)
    avg = nonlocal_average(state, PHI1)
    assert avg == pytest.approx(np.full(4, 1.5), abs=1e-14)


def test_average_two_occupied_cells_hand_values():
    # occupied cells at centers 0.5 and 3.5 (distance 3), rho 2 and 1
    rho = np.array([2.0, 0.0, 0.0, 1.0])
    u = np.array([1.0, 0.0, 0.0, -2.0])
    state = HydroState1D(x_min=0.0, dx=1.0, rho=rho, u=u)
    avg = nonlocal_average(state, PHI1)
    assert avg[0] == pytest.approx((2.0 - 0.25 * 2.0) / 2.25, abs=1e-14)  # 2/3
    assert avg[3] == pytest.approx((0.25 * 2.0 - 2.0) / 1.5, abs=1e-14)  # -1
    assert avg[1] == pytest.approx((0.5 * 2.0 - (1.0 / 3.0) * 2.0) / (0.5 * 2.0 + 1.0 / 3.0), abs=1e-14)


def test_average_rejects_zero_density():
    state = HydroState1D(x_min=0.0, dx=1.0, rho=np.zeros(3), u=np.ones(3))
    with pytest.raises(ValueError):
        nonlocal_average(state, PHI1)


def test_average_cutoff_with_empty_reach_keeps_velocity():
    phi = InfluenceFunction.power_law_with_cutoff(1.0, 1.5)
    # two occupied cells too far apart to see each other; middle cell sees none
    rho = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
    u = np.array([2.0, 5.0, 7.0, 5.0, -3.0])
    state = HydroState1D(x_min=0.0, dx=1.0, rho=rho, u=u)
    avg = nonlocal_average(state, phi)
    assert avg[0] == pytest.approx(2.0)
    assert avg[4] == pytest.approx(-3.0)
    assert avg[2] == pytest.approx(7.0)  # no mass within reach: untouched


# ----------------------------------------------------------------- euler step


def test_uniform_periodic_state_is_steady():
    state = HydroState1D(x_min=0.0, dx=0.1, rho=np.ones(40), u=np.full(40, 0.3))
    out = step_eulerian(state, PHI1, alpha=1.0, dt=0.02, periodic=True)
    assert out.rho == pytest.approx(state.rho, abs=1e-12)
    assert out.u == pytest.approx(state.u, abs=1e-12)


def test_uniform_outflow_state_interior_steady():
    state = HydroState1D(x_min=0.0, dx=0.1, rho=np.ones(40), u=np.full(40, 0.3))
    out = step_eulerian(state, PHI1, alpha=1.0, dt=0.02)
    assert out.rho[1:] == pytest.approx(state.rho[1:], abs=1e-14)
    assert out.u == pytest.approx(state.u, abs=1e-12)
    assert out.rho[0] < 1.0  # drains against the vacuum exterior


def test_rest_state_unchanged():
    rho = np.array([0.0, 1.0, 2.0, 1.0, 0.0])
    state = HydroState1D(x_min=0.0, dx=0.5, rho=rho, u=np.zeros(5))
    out = step_eulerian(state, PHI1, alpha=0.8, dt=0.1)
    assert np.array_equal(out.rho, rho)
    assert np.array_equal(out.u, state.u)


def test_two_bump_step_conserves_mass_and_contracts():
    state = two_bump_state()
    mass0 = state.total_mass
    d_v0 = hydro_diameters(state)[1]
    out = step_eulerian(state, PHI_SLOW, alpha=1.0, dt=0.05)
    assert abs(out.total_mass - mass0) / mass0 <= 1e-12
    assert np.all(out.rho >= 0.0)
    assert hydro_diameters(out)[1] < d_v0


def test_mass_conserved_on_random_interior_states():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = 30
        rho = np.zeros(n)
        rho[3:-3] = rng.uniform(0.0, 2.0, size=n - 6)
        u = rng.uniform(-1.0, 1.0, size=n)
        state = HydroState1D(x_min=-1.0, dx=0.2, rho=rho, u=u)
        out = step_eulerian(state, PHI1, alpha=1.0, dt=0.15)
        assert abs(out.total_mass - state.total_mass) <= 1e-12 * max(state.total_mass, 1.0)
        assert np.all(out.rho >= 0.0)


def test_cfl_and_relaxation_guards():
    state = HydroState1D(x_min=0.0, dx=0.1, rho=np.ones(10), u=np.full(10, 2.0))
    with pytest.raises(StabilityError):
        step_eulerian(state, PHI1, alpha=1.0, dt=0.1)  # CFL = 2 > 0.9
    with pytest.raises(StabilityError):
        step_eulerian(state, PHI1, alpha=100.0, dt=0.04)  # alpha*dt > 1


def test_vacuum_cells_keep_velocity():
    rho = np.array([0.0, 1.0, 1.0, 0.0])
    u = np.array([5.0, 0.5, -0.5, -7.0])
    state = HydroState1D(x_min=0.0, dx=1.0, rho=rho, u=u)
    out = step_eulerian(state, PHI1, alpha=1.0, dt=0.5)
    assert out.u[0] == 5.0 and out.u[3] == -7.0


def test_macroscopic_decay_two_bump_run():
    state = two_bump_state()
    dt = 0.05
    slack = 10.0 * (dt + state.dx)
    d_v = [hydro_diameters(state)[1]]
    for _ in range(100):
        state = step_eulerian(state, PHI_SLOW, alpha=1.0, dt=dt)
        d_v.append(hydro_diameters(state)[1])
    assert np.all(np.diff(d_v) <= slack)
    assert d_v[-1] < d_v[0]


# ------------------------------------------------------------ lagrangian form


def test_lagrangian_two_mass_hand_value():
    parts = LagrangianParticles(
        positions=np.array([[0.0], [1.0]]),
        velocities=np.array([[0.0], [1.0]]),
        masses=np.array([1.0, 3.0]),
    )
    acc = lagrangian_rhs(parts, PHI1, alpha=1.0)
    assert acc[0, 0] == pytest.approx(0.6, abs=1e-15)
    assert acc[1, 0] == pytest.approx(3.0 / 3.5 - 1.0, abs=1e-15)


def test_single_particle_moves_straight():
    parts = LagrangianParticles(
        positions=np.array([[0.0, 0.0]]),
        velocities=np.array([[0.3, -0.4]]),
        masses=np.array([2.0]),
    )
    for _ in range(10):
        parts = step_lagrangian(parts, PHI1, alpha=1.0, dt=0.1)
    assert parts.positions[0] == pytest.approx(np.array([0.3, -0.4]), abs=1e-12)
    assert parts.velocities[0] == pytest.approx(np.array([0.3, -0.4]), abs=1e-15)


def test_equal_mass_lagrangian_matches_particle_model():
    rng = np.random.default_rng(21)
    x = rng.uniform(0, 4, size=(8, 2))
    v = rng.uniform(-1, 1, size=(8, 2))
    model = ModelSpec(model="mt", phi=PHI1, alpha=1.0)
    record = simulate(
        AgentEnsemble(t=0.0, positions=x, velocities=v),
        model,
        dt=0.01,
        t_final=5.0,
        scheme="rk4",
        snapshot_stride=1,
    )
    parts = LagrangianParticles(positions=x, velocities=v, masses=np.ones(8))
    worst = 0.0
    for snap in record.snapshots[1:]:
        parts = step_lagrangian(parts, PHI1, alpha=1.0, dt=0.01, scheme="rk4")
        worst = max(
            worst,
            float(np.max(np.abs(parts.positions - snap.positions))),
            float(np.max(np.abs(parts.velocities - snap.velocities))),
        )
    assert worst <= 1e-10


def test_lagrangian_euler_velocity_diameter_monotone():
    rng = np.random.default_rng(30)
    parts = LagrangianParticles(
        positions=rng.uniform(0, 3, size=(7, 2)),
        velocities=rng.uniform(-1, 1, size=(7, 2)),
        masses=rng.uniform(0.5, 2.0, size=7),
    )

    def spread(p):
        v = p.velocities
        return float(np.max(np.linalg.norm(v[:, None] - v[None, :], axis=-1)))

    for _ in range(50):
        new = step_lagrangian(parts, PHI1, alpha=2.0, dt=0.5)  # alpha*dt = 1
        assert spread(new) <= spread(parts) + 1e-12
        parts = new


def test_lagrangian_euler_guard_and_mass_validation():
    parts = LagrangianParticles(
        positions=np.zeros((2, 1)), velocities=np.ones((2, 1)), masses=np.ones(2)
    )
    with pytest.raises(StabilityError):
        step_lagrangian(parts, PHI1, alpha=3.0, dt=0.5)
    with pytest.raises(ValueError):
        LagrangianParticles(
            positions=np.zeros((2, 1)), velocities=np.ones((2, 1)), masses=np.array([1.0, 0.0])
        )


# ------------------------------------------------------------------ diameters


def test_hydro_diameters_single_cell():
    state = HydroState1D(x_min=0.0, dx=1.0, rho=np.array([0.0, 3.0, 0.0]), u=np.array([1.0, 2.0, 5.0]))
    assert hydro_diameters(state) == (0.0, 0.0)


def test_hydro_diameters_two_cells():
    rho = np.zeros(11)
    rho[0] = rho[10] = 1.0
    u = np.zeros(11)
    u[10] = 2.0
    state = HydroState1D(x_min=-0.25, dx=0.5, rho=rho, u=u)
    d_x, d_v = hydro_diameters(state)
    assert d_x == pytest.approx(5.0)
    assert d_v == pytest.approx(2.0)


def test_hydro_diameters_epsilon_sweep_stable_on_compact_bump():
    dx = 0.05
    n = int(round(4.0 / dx))
    centers = -2.0 + dx * (np.arange(n) + 0.5)
    rho = np.where(np.abs(centers) <= 1.0, np.cos(0.5 * np.pi * centers) ** 2, 0.0)
    u = 0.1 * centers
    state = HydroState1D(x_min=-2.0, dx=dx, rho=rho, u=u)
    d_x_lo, d_v_lo = hydro_diameters(state, epsilon=1e-6)
    d_x_hi, d_v_hi = hydro_diameters(state, epsilon=1e-4)
    assert abs(d_x_lo - d_x_hi) <= dx + 1e-12
    assert abs(d_v_lo - d_v_hi) <= 0.1 * dx + 1e-12


def test_hydro_diameters_validation():
    state = HydroState1D(x_min=0.0, dx=1.0, rho=np.zeros(3), u=np.zeros(3))
    with pytest.raises(ValueError):
        hydro_diameters(state)
    ok = HydroState1D(x_min=0.0, dx=1.0, rho=np.ones(3), u=np.zeros(3))
    with pytest.raises(ValueError):
        hydro_diameters(ok, epsilon=0.0)


# ---------------------------------------------------------------- certificates


def test_hydro_certificate_unconditional():
    state = two_bump_state()
    cert = hydro_certify(state, PHI_SLOW, alpha=1.0)
    assert cert.verdict == "unconditional"


def test_hydro_certificate_not_guaranteed():
    state = two_bump_state(speed=5.0)  # d_v0 = 10 exceeds the (1+r)^-2 tail
    # widen dt constraints are irrelevant here; certificate only reads state0
    cert = hydro_certify(state, PHI1, alpha=1.0)
    assert cert.verdict == "not-guaranteed"


def test_hydro_certificate_rest_state():
    state = two_bump_state(speed=0.0)
    cert = hydro_certify(state, PHI1, alpha=1.0)
    d_x0, _ = hydro_diameters(state)
    assert cert.verdict == "conditional-satisfied"
    assert cert.d_star == pytest.approx(d_x0)


# ------------------------------------------------- macroscopic kernel lemma


def test_macroscopic_action_bound_reduces_to_discrete_lemma():
    rng = np.random.default_rng(99)
    for _ in range(25):
        n = 40
        dx = 0.25
        x = dx * np.arange(n)
        kernel = np.sin(x[:, None] - x[None, :])  # antisymmetric, |k| <= 1
        rho = rng.uniform(0.0, 1.5, size=n)
        rho[rng.uniform(size=n) < 0.3] = 0.0
        u = rng.uniform(0.0, 2.0, size=n)
        w = rng.uniform(0.0, 2.0, size=n)
        u_weighted = u * rho * dx
        w_weighted = w * rho * dx
        theta = float(rng.uniform(1e-3, 0.5))
        res = lemma_action_bound(kernel, u_weighted, w_weighted, theta)
        # the double quadrature of the macroscopic form is literally <Su, w>
        quadrature = float(
            np.sum(kernel * np.outer(u * rho, w * rho)) * dx * dx
        )
        assert abs(abs(quadrature) - res.lhs) <= 1e-12 * max(1.0, abs(quadrature))
        assert res.holds
