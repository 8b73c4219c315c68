from __future__ import annotations

import logging

import numpy as np
import pytest

from topo_flock.fields import AgentSwarm, DensityField, Grid1D, build_initial_data
from topo_flock.geometry import (
    ArcCounter,
    canonical_arc,
    enclosure_violations,
    mass_of_ball,
    offset_distances,
    region_contains,
    region_members,
    sample_region,
    topo_distance_1d,
    topo_distance_discrete,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@pytest.fixture
def sine_density() -> DensityField:
    rho, _ = build_initial_data("perturbed-sine", {"a": 0.5}, Grid1D(256))
    return rho


def test_canonical_arc_takes_the_short_way_round():
    start, stop = canonical_arc(0.1, 6.2, TWO_PI)
    assert start == pytest.approx(6.2)
    assert stop == pytest.approx(0.1 + TWO_PI)
    assert stop - start == pytest.approx(TWO_PI - 6.1)


def test_canonical_arc_ignores_argument_order(rng):
    x, y = rng.uniform(0.0, TWO_PI, size=(2, 1000))
    forward = canonical_arc(x, y, TWO_PI)
    backward = canonical_arc(y, x, TWO_PI)
    np.testing.assert_array_equal(forward[0], backward[0])
    np.testing.assert_array_equal(forward[1], backward[1])


def test_topological_distance_on_a_sine_density(sine_density):
    # the integral of 1 + 0.5 sin over [0, pi] is pi + 1
    assert topo_distance_1d(sine_density, 0.0, np.pi) == pytest.approx(np.pi + 1.0, rel=1e-3)
    assert mass_of_ball(sine_density, np.pi / 2, np.pi / 2) == pytest.approx(np.pi + 1.0, rel=1e-3)


def test_topological_distance_is_symmetric_and_vanishes_on_the_diagonal(sine_density, rng):
    x, y = rng.uniform(0.0, TWO_PI, size=(2, 500))
    np.testing.assert_array_equal(topo_distance_1d(sine_density, x, y), topo_distance_1d(sine_density, y, x))
    np.testing.assert_array_equal(topo_distance_1d(sine_density, x, x), 0.0)


def test_topological_distance_on_a_uniform_density_is_scaled_separation(rng):
    rho = DensityField(Grid1D(64), np.full(64, 1.7))
    x, y = rng.uniform(0.0, TWO_PI, size=(2, 200))
    separation = np.abs(x - y)
    separation = np.minimum(separation, TWO_PI - separation)
    np.testing.assert_allclose(topo_distance_1d(rho, x, y), 1.7 * separation, rtol=1e-12, atol=1e-12)


def test_mass_of_ball_rejects_radius_beyond_half_torus(sine_density):
    with pytest.raises(ValueError, match="radius"):
        mass_of_ball(sine_density, 0.0, 4.0)
    with pytest.raises(ValueError, match="radius"):
        mass_of_ball(sine_density, 0.0, 0.0)


def test_offset_table_matches_pointwise_distances(sine_density):
    grid = sine_density.grid
    k_max = 20
    table = offset_distances(sine_density, k_max)
    nodes = grid.nodes
    for k in (1, 7, k_max):
        forward = topo_distance_1d(sine_density, nodes, nodes + k * grid.dx)
        backward = topo_distance_1d(sine_density, nodes, nodes - k * grid.dx)
        np.testing.assert_allclose(table[:, k_max - 1 + k], forward, rtol=1e-12)
        np.testing.assert_allclose(table[:, k_max - k], backward, rtol=1e-12)


def test_offset_table_is_exactly_symmetric(sine_density):
    n = sine_density.grid.n_cells
    k_max = 9
    table = offset_distances(sine_density, k_max)
    for k in range(1, k_max + 1):
        np.testing.assert_array_equal(table[:, k_max - k], table[(np.arange(n) - k) % n, k_max - 1 + k])


def test_arc_counter_counts_closed_arcs():
    counter = ArcCounter([0.0, np.pi / 2, np.pi, 3 * np.pi / 2], TWO_PI)
    np.testing.assert_array_equal(counter.count([0.0, 0.0, 3 * np.pi / 2], [np.pi / 2, np.pi, 0.0]), [2, 3, 2])


def test_discrete_distance_equispaced_circle():
    swarm = AgentSwarm(1, np.arange(4) * np.pi / 2, np.zeros(4))
    assert topo_distance_discrete(swarm, 0, 1) == pytest.approx(0.5)
    assert topo_distance_discrete(swarm, 0, 2) == pytest.approx(0.75)
    assert topo_distance_discrete(swarm, 3, 0) == pytest.approx(0.5)


def test_discrete_distance_of_an_isolated_planar_pair():
    positions = [[1.0, 1.0], [1.5, 1.0], [4.0, 4.0], [4.0, 5.0]]
    swarm = AgentSwarm(2, positions, np.zeros((4, 2)))
    assert topo_distance_discrete(swarm, 0, 1) == pytest.approx(np.sqrt(0.5))


@pytest.mark.parametrize("dim", [1, 2])
def test_coincident_agents_are_all_members(dim):
    swarm = AgentSwarm(dim, np.full((5, dim), 2.0), np.zeros((5, dim)))
    assert topo_distance_discrete(swarm, 0, 3) == pytest.approx(1.0)


def test_discrete_distance_needs_two_agents():
    swarm = AgentSwarm(1, [0.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        topo_distance_discrete(swarm, 1, 1)


def test_region_is_symmetric_in_its_tips(rng):
    x, y, z = rng.uniform(0.0, TWO_PI, size=(3, 2000, 2))
    np.testing.assert_array_equal(region_contains(x, y, z), region_contains(y, x, z))


def test_region_of_a_point_with_itself_is_empty():
    assert not region_contains([1.0, 1.0], [1.0, 1.0], [1.0, 1.0])


@pytest.mark.filterwarnings("error")
def test_degenerate_regions_stay_quiet():
    points = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 1.5]])
    assert region_members(points, 0, TWO_PI).tolist() == [2, 2, 3]
    assert not region_contains(points[0], points[1], points).any()


def test_region_contains_points_on_the_axis_but_not_beyond_the_tips():
    x, y = np.array([2.0, 3.0]), np.array([3.0, 3.0])
    assert region_contains(x, y, [2.5, 3.0])
    assert region_contains(x, y, [2.5, 3.4])
    assert not region_contains(x, y, [2.5, 3.6])
    assert not region_contains(x, y, [3.2, 3.0])


def test_region_members_count_tips(rng):
    positions = rng.uniform(0.0, TWO_PI, size=(30, 2))
    counts = region_members(positions, 4, TWO_PI)
    assert counts.shape == (30,)
    assert counts[4] == 1
    assert np.all(np.delete(counts, 4) >= 2)


def test_sampled_points_lie_in_the_region(rng):
    x, y = np.array([2.0, 2.5]), np.array([3.1, 3.0])
    points = sample_region(x, y, 1000, rng)
    assert np.all(region_contains(x[None, :], y[None, :], points))


def test_ball_region_can_leave_the_enclosing_ball():
    centre = np.array([np.pi, np.pi])
    x = centre + [0.0, 0.1]
    x_prime = centre + [0.999, 0.0]
    mid = 0.5 * (x + x_prime)
    direction = (mid - centre) / np.linalg.norm(mid - centre)
    z = mid + 0.5019 * direction
    assert np.linalg.norm(z - centre) > 1.0
    assert region_contains(x, x_prime, z, shape="ball")
    assert not region_contains(x, x_prime, z, shape="parabolic")


@pytest.mark.slow
def test_parabolic_region_stays_inside_the_enclosing_ball(rng):
    violations = enclosure_violations(1_000_000, rng)
    ball_violations = enclosure_violations(1_000_000, rng, shape="ball")
    logger.info("enclosure violations: parabolic %d, ball %d", violations, ball_violations)
    assert violations == 0
