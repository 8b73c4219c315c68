from __future__ import annotations

import numpy as np
import pytest

from topo_flock.errors import SingularEvaluation
from topo_flock.kernels import CutoffProfile, KernelSpec, eval_h, eval_phi, kernel_problems, sandwich_constants


@pytest.mark.parametrize(
    ("fraction", "expected"),
    [
        (0.0, 1.0),
        (0.5, 1.0),
        (1.0, 1.0),
        (1.5, 0.5),
        (2.0, 0.0),
        (3.0, 0.0),
    ],
)
def test_smooth_cutoff_values(fraction, expected):
    profile = CutoffProfile(1.0)
    assert eval_h(profile, fraction) == pytest.approx(expected, abs=1e-15)


def test_smooth_cutoff_is_monotone_and_bounded():
    profile = CutoffProfile(0.7)
    r = np.linspace(0.0, 2.0, 2001)
    h = eval_h(profile, r)
    assert np.all((h >= 0) & (h <= 1))
    assert np.all(np.diff(h) <= 0)


def test_indicator_cutoff():
    profile = CutoffProfile(1.0, "indicator")
    np.testing.assert_array_equal(eval_h(profile, [0.2, 1.0, 1.0001]), [1.0, 1.0, 0.0])
    assert profile.support == 1.0


def test_negative_radius_is_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        eval_h(CutoffProfile(1.0), -0.1)


def test_topological_kernel_value():
    spec = KernelSpec("topological", alpha=1.0, tau=1.0, r0=1.0)
    assert eval_phi(spec, 0.5, 0.5) == pytest.approx(4.0, rel=1e-15)


def test_geometric_kernel_value_ignores_distance():
    spec = KernelSpec("geometric", alpha=1.0, tau=1.0, r0=1.0)
    assert spec.effective_tau == 0.0
    assert eval_phi(spec, 0.25, 123.0) == pytest.approx(16.0, rel=1e-15)


def test_kernel_vanishes_outside_support():
    spec = KernelSpec("topological", alpha=1.2, tau=1.0, r0=0.5)
    np.testing.assert_array_equal(eval_phi(spec, [1.0, 1.5], [0.1, 0.1]), [0.0, 0.0])


def test_kernel_is_singular_at_the_diagonal():
    spec = KernelSpec()
    with pytest.raises(SingularEvaluation):
        eval_phi(spec, 0.0, 0.1)
    with pytest.raises(SingularEvaluation):
        eval_phi(spec, 0.1, 0.0)


def test_motsch_tadmor_kernel_is_a_normalised_indicator():
    spec = KernelSpec("motsch-tadmor", r0=1.0, amplitude=2.0)
    assert not spec.singular
    np.testing.assert_allclose(eval_phi(spec, [0.5, 1.5], [4.0, 4.0]), [0.5, 0.0])


@pytest.mark.parametrize("rho_const", [0.5, 1.0, 3.0])
def test_sandwich_bound_holds_for_uniform_density(rho_const):
    spec = KernelSpec("topological", alpha=1.2, tau=1.0, r0=0.8)
    c1, c2 = sandwich_constants(spec, rho_const)
    r = np.linspace(1e-3, 2.0, 500)
    # on a uniform density the mass between two points is rho * r
    phi = eval_phi(spec, r, rho_const * r)
    lower = c1 * np.where(r < spec.r0, 1.0, 0.0) / r ** (1.0 + spec.alpha)
    upper = c2 * np.where(r < 2.0 * spec.r0, 1.0, 0.0) / r ** (1.0 + spec.alpha)
    assert np.all(lower <= phi * (1.0 + 1e-12))
    assert np.all(phi <= upper * (1.0 + 1e-12))


def test_sandwich_is_undefined_for_motsch_tadmor():
    with pytest.raises(ValueError):
        sandwich_constants(KernelSpec("motsch-tadmor"), 1.0)


def test_invalid_parameters_are_collected():
    problems = kernel_problems("ring", 2.5, -1.0, 3.0, "box", 0.0, length=2.0 * np.pi)
    assert len(problems) == 6
    assert any("alpha must lie in (0,2)" in p for p in problems)
    assert any("length/4" in p for p in problems)


def test_kernel_spec_rejects_alpha_out_of_range():
    with pytest.raises(ValueError, match=r"alpha must lie in \(0,2\)"):
        KernelSpec(alpha=2.0)


def test_r0_quarter_length_is_admissible():
    assert kernel_problems("topological", 1.2, 1.0, np.pi / 2, "smooth-cos2", 1.0, length=2 * np.pi) == []
