from __future__ import annotations

import logging
from collections import deque

import numpy as np
import pytest

from topo_flock.agents import (
    SwarmState,
    connectivity_graph,
    discrete_distances,
    initial_swarm,
    integrate_swarm,
    minimum_separation,
    pair_kernel_matrix,
    run_swarm,
    stable_swarm_dt,
    swarm_enstrophy,
    swarm_rhs,
    swarm_step,
)
from topo_flock.cli.experiment import config_from_mapping
from topo_flock.config import AGENT_DIAGNOSTICS_COLUMNS
from topo_flock.errors import StiffPairDetected
from topo_flock.fields import AgentSwarm, torus_distance
from topo_flock.geometry import topo_distance_discrete
from topo_flock.kernels import KernelSpec
from topo_flock.metrics import PASS

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def random_state(rng, n_agents: int = 24, dim: int = 1, spec: KernelSpec | None = None) -> SwarmState:
    positions = rng.uniform(0.0, TWO_PI, size=(n_agents, dim))
    velocities = rng.normal(size=(n_agents, dim))
    return SwarmState(0.0, AgentSwarm(dim, positions, velocities), spec or KernelSpec())


def bfs_components(adjacent: np.ndarray) -> int:
    seen = np.zeros(adjacent.shape[0], dtype=bool)
    components = 0
    for start in range(adjacent.shape[0]):
        if seen[start]:
            continue
        components += 1
        seen[start] = True
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for neighbour in np.flatnonzero(adjacent[node] & ~seen):
                seen[neighbour] = True
                queue.append(neighbour)
    return components


def test_equal_velocities_do_not_accelerate(rng):
    state = random_state(rng)
    aligned = state.with_swarm(AgentSwarm(1, state.swarm.positions, np.full(24, 0.7)), 0.0)
    dx, dv = swarm_rhs(aligned)
    np.testing.assert_array_equal(dv, 0.0)
    np.testing.assert_array_equal(dx, 0.7)


def test_two_agent_acceleration():
    # alpha = tau makes phi = 1 / r when d_N = 1
    spec = KernelSpec("topological", alpha=1.0, tau=1.0, r0=1.0)
    state = SwarmState(0.0, AgentSwarm(1, [0.0, 0.5], [0.0, 1.0]), spec)
    _, dv = swarm_rhs(state)
    np.testing.assert_allclose(dv[:, 0], [1.0, -1.0], rtol=1e-14)


@pytest.mark.parametrize("dim", [1, 2])
def test_symmetric_kernels_conserve_momentum(rng, dim):
    state = random_state(rng, 30, dim)
    _, dv = swarm_rhs(state)
    assert np.max(np.abs(dv.sum(axis=0))) <= 1e-10 * np.max(np.abs(dv))


@pytest.mark.parametrize("dim", [1, 2])
def test_kernel_matrix_is_symmetric_with_zero_diagonal(rng, dim):
    state = random_state(rng, 20, dim)
    phi = pair_kernel_matrix(state.swarm, state.spec)
    np.testing.assert_array_equal(phi, phi.T)
    np.testing.assert_array_equal(np.diag(phi), 0.0)
    assert np.all(phi >= 0)


def test_discrete_distance_matrix_matches_pairwise_values(rng):
    for dim in (1, 2):
        swarm = random_state(rng, 12, dim).swarm
        table = discrete_distances(swarm)
        for i, j in [(0, 1), (3, 7), (11, 2)]:
            assert table[i, j] == pytest.approx(topo_distance_discrete(swarm, i, j))


def test_motsch_tadmor_rows_are_normalised_by_the_local_share():
    spec = KernelSpec("motsch-tadmor", r0=0.5)
    swarm = AgentSwarm(1, [0.0, 0.2, 0.4, 3.0], [0.0, 1.0, 2.0, 3.0])
    phi = pair_kernel_matrix(swarm, spec)
    # agent 0 sees itself, 1 and 2 within r0: share 3/4
    np.testing.assert_allclose(phi[0], [0.0, 4 / 3, 4 / 3, 0.0])
    np.testing.assert_allclose(phi[3], 0.0)


def test_enstrophy_is_the_energy_dissipation_rate(rng):
    state = random_state(rng, 25, 2)
    _, dv = swarm_rhs(state)
    v = state.swarm.velocities
    d_energy = np.sum(v * dv) / state.swarm.n_agents
    assert d_energy == pytest.approx(-swarm_enstrophy(state), rel=1e-10)


def test_stable_dt_uses_the_largest_row_sum(rng):
    state = random_state(rng)
    phi = pair_kernel_matrix(state.swarm, state.spec)
    expected = 0.4 / (np.max(phi.sum(axis=1)) / state.swarm.n_agents)
    assert stable_swarm_dt(state, 0.4) == pytest.approx(expected)
    raw = SwarmState(0.0, state.swarm, state.spec, "raw")
    assert stable_swarm_dt(raw, 0.4) == pytest.approx(expected / state.swarm.n_agents)


def test_unknown_convention_is_rejected(rng):
    with pytest.raises(ValueError, match="convention"):
        SwarmState(0.0, random_state(rng).swarm, KernelSpec(), "weighted")


def test_rk4_step_keeps_momentum_and_lowers_energy(rng):
    state = random_state(rng, 32, 1)
    dt = stable_swarm_dt(state, 0.4)
    new = swarm_step(state, dt, r_floor=1e-12)
    assert new.t == pytest.approx(dt)
    np.testing.assert_allclose(
        new.swarm.velocities.sum(axis=0), state.swarm.velocities.sum(axis=0), atol=1e-9 * 32
    )
    assert np.sum(new.swarm.velocities**2) <= np.sum(state.swarm.velocities**2)


@pytest.fixture
def colliding_pair() -> SwarmState:
    spec = KernelSpec(amplitude=1e-6)
    return SwarmState(0.0, AgentSwarm(1, [1.0, 1.01], [0.5, -0.5]), spec)


def test_step_through_a_near_collision_is_rejected(colliding_pair):
    with pytest.raises(StiffPairDetected) as info:
        swarm_step(colliding_pair, 0.02, r_floor=1e-3)
    assert {info.value.i, info.value.j} == {0, 1}
    assert info.value.separation < 1e-3


def test_integrator_halves_the_step_past_a_near_collision(colliding_pair):
    final = integrate_swarm(colliding_pair, 0.02, 0.02, r_floor=1e-3, max_halvings=4)
    assert final.t == 0.02
    _, _, separation = minimum_separation(final.swarm)
    assert separation >= 1e-3


def test_integrator_gives_up_after_max_halvings(colliding_pair):
    with pytest.raises(StiffPairDetected):
        integrate_swarm(colliding_pair, 0.02, 0.02, r_floor=1e-3, max_halvings=1)


def test_integrator_caps_every_step_by_the_current_stable_dt(rng):
    state = random_state(rng, n_agents=16)
    steps = []

    def record(old, new):
        steps.append((new.t - old.t, stable_swarm_dt(old, 0.5)))

    final = integrate_swarm(state, 1.0, 0.2, on_step=record, cfl=0.5)
    assert final.t == 0.2
    assert len(steps) > 1
    assert all(h <= cap * (1.0 + 1e-12) for h, cap in steps)


@pytest.mark.parametrize("dim", [1, 2])
def test_component_count_matches_breadth_first_search(rng, dim):
    spec = KernelSpec(r0=0.3 if dim == 1 else 0.6)
    for _ in range(100):
        state = random_state(rng, 16, dim, spec)
        positions = state.swarm.positions
        separations = torus_distance(positions[:, None, :], positions[None, :, :], TWO_PI)
        adjacent = separations < spec.support
        np.fill_diagonal(adjacent, False)
        assert connectivity_graph(state).n_components == bfs_components(adjacent)


def test_initial_swarm_is_reproducible():
    config = config_from_mapping({"run": {"mode": "agents", "seed": 7}, "agents": {"n_agents": 40}})
    first, second = initial_swarm(config), initial_swarm(config)
    np.testing.assert_array_equal(first.swarm.positions, second.swarm.positions)
    np.testing.assert_array_equal(first.swarm.velocities, second.swarm.velocities)


def test_short_swarm_run_records_the_schedule():
    config = config_from_mapping(
        {
            "run": {"mode": "agents", "t_final": 0.1},
            "agents": {"n_agents": 16, "dim": 2},
            "output": {"every": 0.05},
        },
        "short-swarm",
    )
    result = run_swarm(config)
    assert result.termination == "completed"
    assert set(AGENT_DIAGNOSTICS_COLUMNS) | {"momentum_y"} <= set(result.diagnostics.columns)
    np.testing.assert_allclose(result.diagnostics["t"], [0.0, 0.05, 0.1])
    assert (result.diagnostics["mass"] == 1.0).all()


@pytest.mark.slow
def test_swarm_velocity_diameter_decays():
    config = config_from_mapping(
        {
            "run": {"mode": "agents", "t_final": 1.0, "seed": 3},
            "agents": {"n_agents": 64},
            "initial": {"kind": "perturbed-sine", "a": 0.3},
            "output": {"every": 0.05},
        },
        "decay",
    )
    result = run_swarm(config)
    logger.info("swarm checks: %s", {c.name: c.summary() for c in result.checks})
    assert result.termination == "completed"
    diam = result.diagnostics["u_diam"].to_numpy()
    assert diam[-1] < diam[0]
    statuses = {check.name: check.status for check in result.checks}
    assert statuses["agents_momentum"] == PASS
    assert statuses["energy_monotone"] == PASS
