from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from topo_flock.errors import NonPositiveDensity
from topo_flock.fields.io import validate_columns
from topo_flock.fields import (
    AgentSwarm,
    DensityField,
    Grid1D,
    MomentumField,
    VelocityField,
    build_initial_data,
    central_derivative,
    derivative_matrix,
    read_fields_csv,
    read_swarm_csv,
    sample_swarm_from_density,
    spectral_antiderivative,
    spectral_derivative,
    swarm_to_frame,
    torus_distance,
    write_fields_csv,
    write_swarm_csv,
)

TWO_PI = 2.0 * np.pi


def test_grid_rejects_too_few_cells():
    with pytest.raises(ValueError, match="n_cells"):
        Grid1D(4)


def test_grid_nodes_are_cell_centres():
    grid = Grid1D(16, 4.0)
    assert grid.dx == 0.25
    np.testing.assert_allclose(grid.nodes, np.arange(16) * 0.25)


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [
        (0.1, 6.2, TWO_PI - 6.1),
        (1.3, 1.3, 0.0),
        (0.0, np.pi, np.pi),
    ],
)
def test_torus_distance_examples(a, b, expected):
    assert torus_distance(a, b, TWO_PI) == pytest.approx(expected, abs=1e-12)


def test_torus_distance_is_a_metric(rng):
    a, b, c = rng.uniform(0.0, TWO_PI, size=(3, 10_000, 2))
    ab = torus_distance(a, b, TWO_PI)
    ba = torus_distance(b, a, TWO_PI)
    bc = torus_distance(b, c, TWO_PI)
    ac = torus_distance(a, c, TWO_PI)
    np.testing.assert_array_equal(ab, ba)
    assert np.all(ac <= ab + bc + 1e-12)
    assert np.all(ab <= TWO_PI * np.sqrt(2.0) / 2.0 + 1e-12)


def test_density_rejects_non_positive_cells():
    grid = Grid1D(8)
    values = np.ones(8)
    values[5] = 0.0
    with pytest.raises(NonPositiveDensity) as info:
        DensityField(grid, values)
    assert info.value.index == 5


def test_prefix_mass_matches_recomputed_sums(rng):
    grid = Grid1D(64)
    rho = DensityField(grid, rng.uniform(0.5, 2.0, size=64))
    recomputed = np.concatenate(([0.0], np.cumsum(rho.values))) * grid.dx
    np.testing.assert_allclose(rho.prefix_mass, recomputed, rtol=0, atol=1e-14 * rho.total_mass)
    assert np.all(np.diff(rho.prefix_mass) > 0)
    assert rho.prefix_mass[-1] == rho.total_mass


def test_cumulative_mass_is_periodic():
    grid = Grid1D(32)
    rho = DensityField(grid, 1.0 + 0.5 * np.sin(grid.nodes))
    x = np.array([0.3, 2.0, 5.1])
    shifted = rho.cumulative_mass(x + TWO_PI) - rho.cumulative_mass(x)
    np.testing.assert_allclose(shifted, rho.total_mass, rtol=1e-12)


def test_momentum_round_trip():
    grid = Grid1D(16)
    rho = DensityField(grid, 1.0 + 0.2 * np.cos(grid.nodes))
    u = VelocityField(grid, np.sin(grid.nodes))
    m = MomentumField.from_fields(rho, u)
    np.testing.assert_allclose(m.velocity(rho).values, u.values, rtol=1e-15, atol=1e-15)


def test_uniform_initial_data_is_constant():
    rho, u = build_initial_data("uniform", {"rho_bar": 1.0, "u_bar": 0.0}, Grid1D(64))
    np.testing.assert_array_equal(rho.values, 1.0)
    np.testing.assert_array_equal(u.values, 0.0)


def test_perturbed_sine_initial_data():
    grid = Grid1D(256)
    rho, u = build_initial_data("perturbed-sine", {"a": 0.5, "k": 1, "b": 1.0, "m": 1}, grid)
    assert rho.minimum > 0
    assert rho.minimum == pytest.approx(0.5, abs=1e-3)
    assert rho.total_mass == pytest.approx(TWO_PI, rel=1e-13)
    np.testing.assert_allclose(u.values, np.sin(grid.nodes), atol=1e-15)


def test_perturbed_sine_with_large_amplitude_is_vacuous():
    with pytest.raises(NonPositiveDensity):
        build_initial_data("perturbed-sine", {"a": 1.2}, Grid1D(64))


def test_two_bump_initial_data_is_positive_and_antisymmetric_in_velocity():
    grid = Grid1D(128)
    rho, u = build_initial_data("two-bump", {}, grid)
    assert rho.minimum > 0.2
    assert abs(u.values.sum()) < 1e-12 * np.abs(u.values).sum()


def test_unknown_initial_parameters_are_rejected():
    with pytest.raises(ValueError, match="does not take parameters"):
        build_initial_data("uniform", {"width": 0.3}, Grid1D(16))


def test_custom_samples_need_matching_length():
    with pytest.raises(ValueError):
        build_initial_data("custom-samples", {"rho_values": [1.0] * 8, "u_values": [0.0] * 7}, Grid1D(8))


def test_spectral_calculus_on_trigonometric_fields():
    grid = Grid1D(64)
    x = grid.nodes
    np.testing.assert_allclose(spectral_derivative(np.sin(3 * x), grid.length), 3 * np.cos(3 * x), atol=1e-11)
    np.testing.assert_allclose(spectral_antiderivative(np.cos(x), grid.length), np.sin(x), atol=1e-13)
    np.testing.assert_array_equal(spectral_derivative(np.full(64, 2.5), grid.length), 0.0)


def test_central_derivative_is_second_order():
    errors = []
    for n in (64, 128):
        grid = Grid1D(n)
        x = grid.nodes
        errors.append(np.max(np.abs(central_derivative(np.sin(x), grid.length) - np.cos(x))))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("method", ["spectral", "central"])
def test_derivative_matrix_matches_the_operator(method, rng):
    grid = Grid1D(16)
    f = rng.normal(size=16)
    D = derivative_matrix(16, grid.length, method)
    expected = spectral_derivative(f, grid.length) if method == "spectral" else central_derivative(f, grid.length)
    np.testing.assert_allclose(D @ f, expected, atol=1e-12)


def test_fields_csv_round_trip_is_exact(tmp_path):
    grid = Grid1D(32)
    rho, u = build_initial_data("perturbed-sine", {"a": 0.3, "phase": 0.7}, grid)
    path = write_fields_csv(rho, u, tmp_path / "snapshots" / "fields.csv")
    rho_back, u_back = read_fields_csv(path, grid.length)
    np.testing.assert_array_equal(rho_back.values, rho.values)
    np.testing.assert_array_equal(u_back.values, u.values)
    np.testing.assert_array_equal(rho_back.prefix_mass, rho.prefix_mass)


def test_swarm_needs_two_agents():
    with pytest.raises(ValueError, match="at least 2 agents"):
        AgentSwarm(1, [0.0], [1.0])


def test_swarm_positions_are_wrapped():
    swarm = AgentSwarm(1, [-0.5, 7.0], [0.0, 0.0])
    assert np.all((swarm.positions >= 0) & (swarm.positions < TWO_PI))


@pytest.mark.parametrize("dim", [1, 2])
def test_sampled_swarm_follows_the_density(dim, rng):
    grid = Grid1D(128)
    rho, u = build_initial_data("perturbed-sine", {"a": 0.8}, grid)
    swarm = sample_swarm_from_density(rho, u, 4000, rng, dim)
    assert swarm.positions.shape == (4000, dim)
    x = swarm.positions[:, 0]
    # a = 0.8 puts most of the mass in the first half of the circle
    first_half = np.mean(x < np.pi)
    expected = (np.pi + 0.8 * 2.0) / TWO_PI
    assert first_half == pytest.approx(expected, abs=0.03)
    frame = swarm_to_frame(swarm)
    assert list(frame.columns) == (["i", "x", "vx"] if dim == 1 else ["i", "x", "y", "vx", "vy"])


def test_swarm_csv_keeps_full_precision(tmp_path, rng):
    swarm = AgentSwarm(2, rng.uniform(0.0, TWO_PI, size=(5, 2)), rng.normal(size=(5, 2)))
    path = write_swarm_csv(swarm, tmp_path / "snapshots" / "swarm.csv")
    assert list(pd.read_csv(path).columns) == ["i", "x", "y", "vx", "vy"]
    loaded = read_swarm_csv(path, TWO_PI)
    assert loaded.dim == 2
    np.testing.assert_array_equal(loaded.positions, swarm.positions)
    np.testing.assert_array_equal(loaded.velocities, swarm.velocities)


def test_one_dimensional_swarm_csv(tmp_path, rng):
    swarm = AgentSwarm(1, rng.uniform(0.0, TWO_PI, size=7), rng.normal(size=7))
    loaded = read_swarm_csv(write_swarm_csv(swarm, tmp_path / "swarm.csv"), TWO_PI)
    assert loaded.dim == 1
    np.testing.assert_array_equal(loaded.positions, swarm.positions)
    np.testing.assert_array_equal(loaded.velocities, swarm.velocities)


def test_validate_columns_names_what_is_missing():
    df = pd.DataFrame({"t": [0.0], "mass": [1.0]})
    validate_columns(df, {"t", "mass"}, "calculate_run_diagnostics")
    with pytest.raises(ValueError, match=r"calculate_eta requires columns \['rho_min'\]"):
        validate_columns(df, {"t", "rho_min"}, "calculate_eta")


def test_swarm_csv_without_velocities_is_rejected(tmp_path):
    path = tmp_path / "swarm.csv"
    pd.DataFrame({"i": [0, 1], "x": [0.1, 0.2], "y": [0.3, 0.4]}).to_csv(path, index=False)
    with pytest.raises(ValueError, match="read_swarm_csv"):
        read_swarm_csv(path, TWO_PI)
