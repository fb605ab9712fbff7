"""Offspring-law algebra, spectral analysis, and scaling constants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bienayme.errors import ConfigError, NonConvergence, NotCritical, ReducibleCriticalBlock
from bienayme.families import (
    OffspringFamily,
    OffspringLaw,
    count_vector,
    from_json_dict,
    materialize_product_law,
    projection,
    to_json_dict,
)
from bienayme.flatlaw import blob_vector_sample
from bienayme.rng import RngStream
from bienayme.spectral import (
    classify,
    family_sigma2,
    flattened_moments,
    mean_matrix,
    perron_vectors,
    q_matrices,
    scaling_constant,
    sigma2,
    spectral_profile,
    spectral_radius,
)

from conftest import make_family


class TestProjection:
    def test_monotype_binary_counts(self, binary_family):
        mu = projection(binary_family)
        assert mu.table(1) == {(0,): 0.5, (2,): 0.5}

    def test_order_insensitive_marginal(self):
        fam = make_family(
            2, 0, [1, 0],
            [{(1, 2): 0.25, (2, 1): 0.25, (): 0.5}, {(): 0.5, (1, 1): 0.5}],
        )
        mu = projection(fam)
        assert mu.table(1)[(1, 1)] == pytest.approx(0.5, abs=1e-15)

    def test_poisson_product_matches_bivariate_pmf(self):
        law = materialize_product_law("poisson_product", [1.0, 1.0], 2, tail_mass=1e-12)
        fam = OffspringFamily(1, 1, (law, materialize_product_law(
            "poisson_product", [0.0, 0.5], 2, tail_mass=1e-12)), np.array([1, 1]))
        mu = projection(fam)
        for j in range(5):
            for k in range(5):
                want = math.exp(-2.0) / (math.factorial(j) * math.factorial(k))
                assert mu.table(1)[(j, k)] == pytest.approx(want, rel=1e-10)

    def test_row_sums_are_one(self, poisson_family, two_type_family):
        for fam in (poisson_family, two_type_family):
            mu = projection(fam)
            for i in range(1, fam.num_types + 1):
                assert sum(mu.table(i).values()) == pytest.approx(1.0, abs=1e-12)


class TestMeanMatrix:
    def test_poisson_reducible_example(self, poisson_family):
        A = mean_matrix(poisson_family)
        assert np.allclose(A, [[1.0, 1.0], [0.0, 0.5]], atol=1e-11)

    def test_deterministic_unary(self):
        fam = make_family(1, 0, [1], [{(1,): 0.5, (): 0.25, (1, 1): 0.25}])
        # E = 0.5 + 0.5 = 1
        assert mean_matrix(fam) == pytest.approx(np.array([[1.0]]))

    def test_monotype_binary(self, binary_family):
        assert mean_matrix(binary_family) == pytest.approx(np.array([[1.0]]))


class TestClassify:
    def test_permutation_matrix_critical_irreducible(self):
        prof = classify(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)
        assert prof.radius == pytest.approx(1.0, abs=1e-10)
        assert prof.classification == "critical"
        assert prof.irreducible_on_critical_block

    def test_poisson_block_structure(self, poisson_family):
        prof = classify(mean_matrix(poisson_family), 1)
        assert prof.classification == "critical"
        assert prof.subcritical_block_ok

    def test_subcritical(self):
        prof = classify(np.array([[0.5]]), 1)
        assert prof.classification == "subcritical"

    def test_supercritical(self):
        prof = classify(np.array([[1.5]]), 1)
        assert prof.classification == "supercritical"

    def test_nilpotent_raises(self):
        with pytest.raises(NonConvergence):
            spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_reducible_block_flag_and_error(self):
        A = np.array([[1.0, 1.0], [0.0, 0.5]])
        prof = classify(A, 2)
        assert not prof.irreducible_on_critical_block
        with pytest.raises(ReducibleCriticalBlock):
            classify(A, 2, require_irreducible=True)


class TestPerron:
    def test_symmetric_two_type(self):
        prof = classify(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)
        a, b = perron_vectors(prof)
        assert a == pytest.approx([0.5, 0.5], abs=1e-12)
        assert b == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_reducible_left_extension(self, poisson_family):
        prof = spectral_profile(poisson_family)
        assert prof.left_vec == pytest.approx([1.0, 2.0], abs=1e-10)
        assert prof.right_vec == pytest.approx([1.0], abs=1e-10)

    def test_monotype(self, binary_family):
        prof = spectral_profile(binary_family)
        assert prof.left_vec == pytest.approx([1.0], abs=1e-14)
        assert prof.right_vec == pytest.approx([1.0], abs=1e-14)

    def test_residuals_small(self, two_type_family, poisson_family):
        for fam in (two_type_family, poisson_family):
            prof = spectral_profile(fam)
            A = prof.mean_matrix
            a = prof.left_vec
            K = fam.num_critical_types
            M = A[:K, :K]
            assert np.max(np.abs(a @ A - a)) < 1e-10
            assert np.max(np.abs(M @ prof.right_vec - prof.right_vec)) < 1e-10

    def test_not_critical_raises(self):
        prof = classify(np.array([[0.5]]), 1)
        with pytest.raises(NotCritical):
            perron_vectors(prof)


class TestSecondMoments:
    def test_deterministic_one_child(self):
        fam = make_family(1, 0, [1], [{(1,): 0.5, (): 0.25, (1, 1): 0.25}])
        Q = q_matrices(projection(fam), 1)
        assert Q[0][0, 0] == pytest.approx(0.5)  # only the pair word contributes

    def test_unary_word_contributes_zero(self):
        # z (z - 1) vanishes at z = 1
        tables = ({(1,): 1.0},)
        pl = type("P", (), {"table": lambda self, i: tables[i - 1]})()
        Q = q_matrices(pl, 1)
        assert Q[0][0, 0] == 0.0

    def test_monotype_binary(self, binary_family):
        Q = q_matrices(projection(binary_family), 1)
        assert Q[0][0, 0] == pytest.approx(1.0)  # 2*1*(1/2)

    def test_poisson_factorial_moment(self):
        law = materialize_product_law("poisson_product", [1.0], 1, tail_mass=1e-12)
        fam = OffspringFamily(1, 0, (law,), np.array([1]))
        Q = q_matrices(projection(fam), 1)
        # independent oracle: factorial moment from the truncated pmf directly
        target = sum(p * c[0] * (c[0] - 1) for c, p in projection(fam).table(1).items())
        assert Q[0][0, 0] == pytest.approx(target, abs=1e-15)
        assert Q[0][0, 0] == pytest.approx(1.0, abs=1e-9)


class TestSigma2:
    def test_monotype_binary(self, binary_family):
        prof = spectral_profile(binary_family)
        assert family_sigma2(binary_family, prof) == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_unary_is_zero(self):
        assert sigma2([1.0], [1.0], (np.zeros((1, 1)),)) == 0.0

    def test_swap_family_zero_variance(self):
        # each type one child of the other type: all Q entries vanish
        a = np.array([0.5, 0.5])
        b = np.array([1.0, 1.0])
        Q = (np.zeros((2, 2)), np.zeros((2, 2)))
        assert sigma2(a, b, Q) == 0.0

    def test_two_type_symmetric(self, two_type_family):
        assert family_sigma2(two_type_family) == pytest.approx(1.0, abs=1e-12)


class TestScalingConstant:
    def test_monotype_binary(self, binary_family):
        assert scaling_constant(binary_family) == pytest.approx(0.5, abs=1e-12)

    def test_poisson_linear_combination(self, poisson_family):
        got = scaling_constant(poisson_family, "linear-combination")
        assert got == pytest.approx(math.sqrt(3) / 2, abs=1e-9)

    def test_by_type_ignores_lambda(self, two_type_family):
        c1 = scaling_constant(two_type_family, "by-type")
        c2 = scaling_constant(two_type_family.with_lambda([7, 3]), "by-type")
        assert c1 == c2 == pytest.approx(0.5, abs=1e-12)

    def test_not_critical(self):
        fam = make_family(1, 0, [1], [{(): 0.75, (1, 1): 0.25}])
        with pytest.raises(NotCritical):
            scaling_constant(fam)


class TestFlattenedMoments:
    def test_monotype_is_one(self, binary_family):
        means, c1 = flattened_moments(binary_family)
        assert means[0] == pytest.approx(1.0, abs=1e-10)
        assert c1 == pytest.approx(1.0, abs=1e-10)

    def test_poisson_example(self, poisson_family):
        means, c1 = flattened_moments(poisson_family)
        assert means == pytest.approx([1.0, 2.0], abs=1e-9)
        assert c1 == pytest.approx(3.0, abs=1e-9)

    def test_symmetric_two_type(self, two_type_family):
        means, _ = flattened_moments(two_type_family)
        assert means == pytest.approx([1.0, 1.0], abs=1e-10)

    def test_first_moment_exactly_one_for_critical_families(
        self, binary_family, ternary_family, two_type_family, poisson_family
    ):
        for fam in (binary_family, ternary_family, two_type_family, poisson_family):
            means, _ = flattened_moments(fam)
            assert abs(means[0] - 1.0) < 1e-10

    def test_monte_carlo_cross_check(self, two_type_family, poisson_family):
        # empirical flattened means from simulated blobs, 4 standard errors
        for seed, fam in ((21, two_type_family), (22, poisson_family)):
            vecs = blob_vector_sample(fam, RngStream(seed).generator(), 100_000)
            means, _ = flattened_moments(fam)
            est = vecs.mean(axis=0)
            se = vecs.std(axis=0, ddof=1) / np.sqrt(vecs.shape[0])
            assert np.all(np.abs(est - means) <= 4 * np.maximum(se, 1e-12))


class TestFamilyValidation:
    def test_zero_lambda_rejected(self):
        with pytest.raises(ConfigError):
            make_family(1, 0, [0], [{(): 0.5, (1, 1): 0.5}])

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            OffspringLaw(((), (1, 1)), np.array([0.5, 0.4]))

    def test_duplicate_words_rejected(self):
        with pytest.raises(ConfigError):
            OffspringLaw(((1,), (1,)), np.array([0.5, 0.5]))

    def test_no_extinction_rejected(self):
        # every critical type always produces critical-block offspring
        with pytest.raises(ConfigError):
            make_family(1, 0, [1], [{(1,): 0.5, (1, 1): 0.5}])

    def test_json_round_trip(self, two_type_family):
        doc = to_json_dict(two_type_family)
        back = from_json_dict(doc)
        assert back.family_hash() == two_type_family.family_hash()

    def test_count_vector(self):
        assert count_vector((1, 2, 2, 1), 3) == (2, 2, 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=2, max_size=4))
def test_projection_rows_sum_to_one_property(weights):
    total = sum(weights)
    probs = [w / total for w in weights]
    words = [(), (1, 1), (1,), (1, 1, 1)][: len(probs)]
    fam = OffspringFamily(
        1, 0, (OffspringLaw(tuple(words), np.array(probs)),), np.array([1])
    )
    mu = projection(fam)
    assert sum(mu.table(1).values()) == pytest.approx(1.0, abs=1e-12)
