"""Exponential tilting and the criticality tilt solver."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bienayme.errors import DegenerateDirection, NoConvergence
from bienayme.families import OffspringFamily, materialize_product_law
from bienayme.spectral import mean_matrix, spectral_profile
from bienayme.tilting import TiltParams, log_phi, solve_tilt, tilt, tilted_mean_matrix

from conftest import make_family


def poisson_monotype(mean):
    law = materialize_product_law("poisson_product", [mean], 1, tail_mass=1e-13)
    return OffspringFamily(1, 0, (law,), np.array([1]))


class TestTilt:
    def test_zero_tilt_is_identity(self, two_type_family):
        tilted = tilt(two_type_family, TiltParams(np.zeros(2)))
        for a, b in zip(tilted.laws, two_type_family.laws):
            assert a.words == b.words
            assert np.allclose(a.probs, b.probs, atol=1e-15)

    def test_binary_closed_form(self, binary_family):
        tilted = tilt(binary_family, TiltParams(np.array([math.log(2.0)])))
        table = dict(zip(tilted.laws[0].words, tilted.laws[0].probs))
        assert table[()] == pytest.approx(0.2, abs=1e-12)
        assert table[(1, 1)] == pytest.approx(0.8, abs=1e-12)

    def test_poisson_tilt_is_poisson(self):
        # tilting Poisson(m) by t gives Poisson(m e^t), checked on the pmf
        fam = poisson_monotype(2.0)
        t = -math.log(2.0)
        tilted = tilt(fam, TiltParams(np.array([t])))
        table = dict(zip(tilted.laws[0].words, tilted.laws[0].probs))
        for k in range(8):
            want = math.exp(-1.0) / math.factorial(k)
            assert table[(1,) * k] == pytest.approx(want, rel=1e-8)

    def test_mean_matrix_commutation_100_draws(self, two_type_family, poisson_family):
        rng = np.random.default_rng(7)
        for fam in (two_type_family, poisson_family):
            for _ in range(50):
                theta = rng.normal(scale=0.4, size=fam.num_types)
                direct = tilted_mean_matrix(fam, theta)
                via_family = mean_matrix(tilt(fam, TiltParams(theta)))
                assert np.max(np.abs(direct - via_family)) < 1e-12

    def test_composition(self, two_type_family):
        rng = np.random.default_rng(8)
        for _ in range(25):
            t1 = rng.normal(scale=0.3, size=2)
            t2 = rng.normal(scale=0.3, size=2)
            once = tilt(tilt(two_type_family, TiltParams(t1)), TiltParams(t2))
            both = tilt(two_type_family, TiltParams(t1 + t2))
            for a, b in zip(once.laws, both.laws):
                assert np.max(np.abs(a.probs - b.probs)) < 1e-12


class TestSolveTilt:
    def test_poisson_two_to_critical(self):
        fam = poisson_monotype(2.0)
        params = solve_tilt(fam, np.array([1.0]))
        assert params.theta[0] == pytest.approx(-math.log(2.0), abs=1e-8)
        prof = spectral_profile(tilt(fam, params))
        assert abs(prof.radius - 1.0) < 1e-10

    def test_already_critical_fixed_point(self, binary_family):
        params = solve_tilt(binary_family, np.array([1.0]))
        assert abs(params.theta[0]) < 1e-8

    def test_two_type_direction(self, two_type_family):
        prof = spectral_profile(two_type_family)
        params = solve_tilt(two_type_family, prof.left_vec.copy())
        assert np.max(np.abs(params.theta)) < 1e-6
        # push the eigenvector off-balance
        params = solve_tilt(two_type_family, np.array([2.0, 1.0]))
        tilted = tilt(two_type_family, params)
        prof2 = spectral_profile(tilted)
        assert abs(prof2.radius - 1.0) < 1e-10
        direction = prof2.left_vec / prof2.left_vec.sum()
        assert direction == pytest.approx([2 / 3, 1 / 3], rel=1e-8)

    def test_zero_direction_rejected(self, two_type_family):
        with pytest.raises(DegenerateDirection):
            solve_tilt(two_type_family, np.array([1.0, 0.0]))

    def test_localized_family_unreachable(self, localized_family):
        # type-1 offspring are deterministic, so the eigen-direction is pinned
        # at (1, 2); any other target must fail with a residual report
        with pytest.raises(NoConvergence) as exc:
            solve_tilt(localized_family, np.array([1.0, 1.0]), restarts=3)
        assert exc.value.residual is not None and exc.value.residual > 1e-6

    def test_localized_family_reachable_direction(self, localized_family):
        params = solve_tilt(localized_family, np.array([1.0, 2.0]))
        prof = spectral_profile(tilt(localized_family, params))
        assert abs(prof.radius - 1.0) < 1e-10

    def test_subset_conditioning_keeps_invariance_constraint(self, two_type_family):
        # conditioning on type 1 only: theta_2 must satisfy e^t2 = phi_2(e^theta)
        params = solve_tilt(
            two_type_family, np.array([1.0]), cond_types=(1,)
        )
        lp = log_phi(two_type_family, params.theta)
        assert abs(params.theta[1] - lp[1]) < 1e-9
        prof = spectral_profile(tilt(two_type_family, params))
        assert abs(prof.radius - 1.0) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_tilted_mean_matches_formula_property(t1, t2):
    fam = make_family(
        2, 0, [1, 1],
        [{(): 0.5, (2, 2): 0.3, (1,): 0.2}, {(): 0.4, (1, 1): 0.4, (2,): 0.2}],
    )
    theta = np.array([t1, t2])
    assert np.max(np.abs(
        tilted_mean_matrix(fam, theta) - mean_matrix(tilt(fam, TiltParams(theta)))
    )) < 1e-12
