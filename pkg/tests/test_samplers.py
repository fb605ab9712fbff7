"""Random generation: laws, reproducibility, and oracle agreement."""

from collections import Counter

import numpy as np
import pytest
from scipy.stats import chi2

from bienayme.enumeration import family_trees, flat_family_trees
from bienayme.errors import BudgetExhausted, Inadmissible, Infeasible, Overflow
from bienayme.flatlaw import materialize_flat_law
from bienayme.rng import RngStream, SampleBudget
from bienayme.samplers import (
    AttemptStats,
    DecorationSampler,
    ExactConditionedSampler,
    TreeStats,
    count_valid_rotations,
    cycle_rotation_index,
    sample_by_type,
    sample_conditioned_rejection,
    sample_decoration,
    sample_degree_sequence_tree,
    sample_spine_tree,
    sample_unconditioned,
)
from bienayme.trees import flatten, weighted_size

from conftest import make_family


def chi2_pvalue_from_truth(counter, truth, total, min_expected=5.0):
    """Chi-square p-value of observed counts against exact probabilities,
    pooling rare cells."""
    pooled_obs = 0
    pooled_p = 0.0
    stat = 0.0
    cells = 0
    for key, p in truth.items():
        e = total * p
        o = counter.get(key, 0)
        if e < min_expected:
            pooled_obs += o
            pooled_p += p
            continue
        stat += (o - e) ** 2 / e
        cells += 1
    if pooled_p > 0:
        e = total * pooled_p
        stat += (pooled_obs - e) ** 2 / e
        cells += 1
    return chi2.sf(stat, max(cells - 1, 1))


def two_sample_chi2_pvalue(c1, c2, min_expected=5.0):
    """Two-sample chi-square over categorical outcomes with cell pooling."""
    n1 = sum(c1.values())
    n2 = sum(c2.values())
    keys = sorted(set(c1) | set(c2))
    o1, o2 = [], []
    pool1 = pool2 = 0
    for k in keys:
        a, b = c1.get(k, 0), c2.get(k, 0)
        if (a + b) * n1 / (n1 + n2) < min_expected:
            pool1 += a
            pool2 += b
            continue
        o1.append(a)
        o2.append(b)
    if pool1 + pool2:
        o1.append(pool1)
        o2.append(pool2)
    o1 = np.array(o1, dtype=float)
    o2 = np.array(o2, dtype=float)
    tot = o1 + o2
    stat = ((o1 * n2 - o2 * n1) ** 2 / (tot * n1 * n2)).sum()
    return chi2.sf(stat, max(len(o1) - 1, 1))


class TestReproducibility:
    def test_bit_identical_trees(self, two_type_family):
        a = sample_conditioned_rejection(two_type_family, 5, RngStream(99, 3))
        b = sample_conditioned_rejection(two_type_family, 5, RngStream(99, 3))
        assert a == b

    def test_distinct_streams_differ(self, binary_family):
        s = ExactConditionedSampler(binary_family, 101)
        a = s.sample(RngStream(1, 0))
        b = s.sample(RngStream(1, 1))
        assert a != b  # astronomically unlikely to coincide

    def test_exact_sampler_reproducible(self, two_type_family):
        s = ExactConditionedSampler(two_type_family, 9)
        a = [s.sample(RngStream(5, i)).encoding() for i in range(20)]
        b = [s.sample(RngStream(5, i)).encoding() for i in range(20)]
        assert a == b


class TestUnconditioned:
    def test_deterministic_childless(self):
        fam = make_family(1, 0, [1], [{(): 0.999999999999, (1, 1): 1e-12}])
        t = sample_unconditioned(fam, RngStream(0))
        assert t.size == 1

    def test_size_distribution(self, binary_family):
        gen = RngStream(2).generator()
        sizes = Counter()
        n = 30_000
        for _ in range(n):
            try:
                sizes[sample_unconditioned(binary_family, gen,
                                           budget=SampleBudget(64, 1)).size] += 1
            except Overflow:
                sizes["overflow"] += 1
        assert sizes[1] / n == pytest.approx(0.5, abs=0.01)
        assert sizes[3] / n == pytest.approx(1 / 8, abs=0.01)

    def test_reducible_block_stays_in_block(self, poisson_family):
        # root of the subcritical type produces only subcritical-type vertices
        gen = RngStream(3).generator()
        for _ in range(200):
            t = sample_unconditioned(poisson_family, gen, root_type=2,
                                     budget=SampleBudget(10_000, 1))
            assert set(np.unique(t.types)) == {2}

    def test_overflow_raised(self, binary_family):
        gen = RngStream(4).generator()
        with pytest.raises(Overflow):
            for _ in range(10_000):
                sample_unconditioned(binary_family, gen, budget=SampleBudget(8, 1))


class TestRejection:
    def test_point_mass_on_cherry(self, binary_family):
        for i in range(50):
            t = sample_conditioned_rejection(binary_family, 3, RngStream(6, i))
            assert list(t.parents) == [-1, 0, 0]

    def test_infeasible_even_size(self, binary_family):
        with pytest.raises(Infeasible):
            sample_conditioned_rejection(
                binary_family, 2, RngStream(7), budget=SampleBudget(100, 200)
            )

    def test_single_vertex(self, binary_family):
        t = sample_conditioned_rejection(binary_family, 1, RngStream(8))
        assert t.size == 1

    def test_weighted_size_always_exact(self, two_type_family):
        for i in range(100):
            t = sample_conditioned_rejection(two_type_family, 7, RngStream(9, i))
            assert weighted_size(t, two_type_family.lam) == 7

    def test_matches_enumeration(self, two_type_family):
        truth_all = family_trees(two_type_family, 12)
        sel = [(t, p) for t, p in truth_all if weighted_size(t, [1, 0]) == 3]
        z = sum(p for _, p in sel)
        truth = {t.encoding(): p / z for t, p in sel}
        gen = RngStream(10).generator()
        n = 20_000
        c = Counter()
        for _ in range(n):
            c[sample_conditioned_rejection(two_type_family, 3, gen).encoding()] += 1
        assert chi2_pvalue_from_truth(c, truth, n) > 1e-3


class TestDegreeSequenceTrees:
    def test_singleton(self):
        t = sample_degree_sequence_tree([0], RngStream(1))
        assert t.size == 1

    def test_unique_tree(self):
        t = sample_degree_sequence_tree([2, 0, 0], RngStream(2))
        assert list(t.parents) == [-1, 0, 0]

    def test_inadmissible(self):
        with pytest.raises(Inadmissible):
            sample_degree_sequence_tree([1], RngStream(3))

    def test_uniform_over_three_trees(self):
        gen = RngStream(4).generator()
        n = 30_000
        c = Counter()
        for _ in range(n):
            t = sample_degree_sequence_tree([2, 1, 0, 0], gen)
            c[t.parents.tobytes()] += 1
        assert len(c) == 3
        truth = {k: 1 / 3 for k in c}
        assert chi2_pvalue_from_truth(c, truth, n) > 1e-3

    def test_degree_multiset_preserved(self):
        gen = RngStream(5).generator()
        for _ in range(200):
            degs = sorted(gen.integers(0, 4, size=6))
            degs[-1] += 5 - sum(degs)  # force sum = len - 1
            if degs[-1] < 0:
                continue
            t = sample_degree_sequence_tree(degs, gen)
            assert sorted(t.outdegrees()) == sorted(degs)

    def test_rotation_uniqueness_random_lists(self):
        gen = RngStream(6).generator()
        for _ in range(500):
            r = int(gen.integers(2, 12))
            degs = _random_admissible(gen, r)
            assert count_valid_rotations(degs) == 1
            # and the computed index is the valid one
            rot = np.roll(degs, -cycle_rotation_index(degs))
            s = np.cumsum(rot - 1)
            assert s[-1] == -1 and np.all(s[:-1] >= 0)


def _random_admissible(gen, r):
    # random nonnegative outdegrees with sum r - 1
    cuts = np.sort(gen.integers(0, r, size=r - 1))
    degs = np.diff(np.concatenate([[0], cuts, [r - 1]]))
    return np.asarray(degs, dtype=np.int64)


class TestExactSampler:
    def test_monotype_n5_uniform(self, binary_family):
        s = ExactConditionedSampler(binary_family, 5)
        gen = RngStream(11).generator()
        c = Counter(s.sample(gen).parents.tobytes() for _ in range(20_000))
        assert len(c) == 2
        assert chi2_pvalue_from_truth(c, {k: 0.5 for k in c}, 20_000) > 1e-3

    def test_infeasible(self, binary_family):
        with pytest.raises(Infeasible):
            ExactConditionedSampler(binary_family, 4)

    def test_matches_enumeration_two_type(self, two_type_family):
        truth_all = family_trees(two_type_family, 16)
        sel = [(t, p) for t, p in truth_all if weighted_size(t, [1, 0]) == 5]
        z = sum(p for _, p in sel)
        truth = {t.encoding(): p / z for t, p in sel}
        s = ExactConditionedSampler(two_type_family, 5)
        gen = RngStream(12).generator()
        n = 30_000
        c = Counter(s.sample(gen).encoding() for _ in range(n))
        assert set(c) <= set(truth)
        assert chi2_pvalue_from_truth(c, truth, n) > 1e-3

    def test_ell_distribution_matches_enumeration(self, two_type_family):
        fam = two_type_family.with_lambda([0, 1])
        s = ExactConditionedSampler(fam, 4, lam=np.array([0, 1]))
        vals, probs = s.ell_distribution()
        truth_all = family_trees(fam, 32)
        sel = [(t, p) for t, p in truth_all if weighted_size(t, [0, 1]) == 4]
        z = sum(p for _, p in sel)
        by_ell = Counter()
        for t, p in sel:
            by_ell[int((t.types == 1).sum())] += p / z
        for v, p in zip(vals, probs):
            assert p == pytest.approx(by_ell[int(v)], abs=1e-9)

    def test_stats_agree_with_tree_path(self, two_type_family):
        s = ExactConditionedSampler(two_type_family, 9)
        st = s.sample_stats(RngStream(13, 5))
        tree = s.sample(RngStream(13, 5))
        want = TreeStats.from_tree(tree, two_type_family.lam)
        assert st.n == want.n == 9
        assert st.num_type1 == want.num_type1
        assert st.height == want.height
        assert st.height_reduced == want.height_reduced
        assert st.max_outdeg_flat == want.max_outdeg_flat
        assert st.max_blob_size == want.max_blob_size
        assert np.array_equal(st.type_counts, want.type_counts)
        assert np.array_equal(st.n_d, want.n_d)

    def test_weighted_size_exact_all_lambdas(self, two_type_family):
        for lam in ([1, 0], [0, 1], [1, 1], [2, 1]):
            fam = two_type_family.with_lambda(lam)
            target = 12 if lam in ([0, 1],) else 11
            try:
                s = ExactConditionedSampler(fam, target)
            except Infeasible:
                target += 1
                s = ExactConditionedSampler(fam, target)
            for i in range(30):
                t = s.sample(RngStream(14, i))
                assert weighted_size(t, lam) == target


class TestByType:
    def test_point_mass(self, binary_family):
        t = sample_by_type(binary_family, [1], [3], RngStream(15))
        assert list(t.parents) == [-1, 0, 0]

    def test_zero_target_excludes_type(self, two_type_family):
        for i in range(50):
            t = sample_by_type(two_type_family, [2], [0], RngStream(16, i))
            assert np.all(t.types == 1)
            assert t.size == 1  # without type-2 vertices no reproduction here

    def test_exact_counts(self, two_type_family):
        for i in range(50):
            t = sample_by_type(two_type_family, [1, 2], [3, 2], RngStream(17, i))
            assert int((t.types == 1).sum()) == 3
            assert int((t.types == 2).sum()) == 2

    def test_budget_exhausted(self, two_type_family):
        with pytest.raises(BudgetExhausted):
            sample_by_type(two_type_family, [1, 2], [3, 7], RngStream(18),
                           budget=SampleBudget(100, 50))

    def test_tilt_invariance_in_law(self, two_type_family):
        # conditioning on all type counts is invariant under any tilt
        from bienayme.tilting import TiltParams, tilt

        tilted = tilt(two_type_family, TiltParams(np.array([0.35, -0.55])))
        n = 20_000
        c1 = Counter()
        c2 = Counter()
        g1 = RngStream(19).generator()
        g2 = RngStream(20).generator()
        for _ in range(n):
            c1[sample_by_type(two_type_family, [1, 2], [3, 2], g1).encoding()] += 1
            c2[sample_by_type(tilted, [1, 2], [3, 2], g2).encoding()] += 1
        tv = 0.5 * sum(
            abs(c1.get(k, 0) / n - c2.get(k, 0) / n) for k in set(c1) | set(c2)
        )
        assert tv < 0.02
        assert two_sample_chi2_pvalue(c1, c2) > 1e-3


class TestSpineTree:
    def test_ell_zero_is_plain_flat_tree(self, two_type_family, two_type_flat_law):
        marked = sample_spine_tree(two_type_family, 0, RngStream(21),
                                   flat_law=two_type_flat_law)
        assert marked.spine == (0,)
        assert marked.mark == 0

    def test_spine_heights(self, two_type_family, two_type_flat_law):
        for i in range(30):
            marked = sample_spine_tree(two_type_family, 3, RngStream(22, i),
                                       flat_law=two_type_flat_law)
            depths = marked.tree.tree.shape.depths()
            types = marked.tree.types
            for h, v in enumerate(marked.spine):
                assert depths[v] == h
                assert types[v] == 1
            assert len(marked.spine) == 4

    def test_unmark_identity_small_trees(self, two_type_family, two_type_flat_law):
        # law of the marked tree at spine length 1 equals the flat-tree law
        # restricted to trees with a marked type-1 vertex at height 1
        law = two_type_flat_law
        flats = flat_family_trees(law.vectors, law.probs, 5)
        # truth: P(flat = tau) for each (tau, marked vertex at height 1)
        truth = {}
        for tau, p in flats:
            depths = tau.shape.depths()
            for v in range(tau.size):
                if tau.types[v] == 1 and depths[v] == 1:
                    truth[(tau.encoding(), v)] = p
        n = 40_000
        gen = RngStream(23).generator()
        c = Counter()
        skipped = 0
        for _ in range(n):
            m = sample_spine_tree(two_type_family, 1, gen, flat_law=law)
            if m.tree.size > 5:
                skipped += 1
                continue
            c[(m.tree.tree.encoding(), m.mark)] += 1
        total_truth = sum(truth.values())
        for key, cnt in c.items():
            assert key in truth
        # compare conditional-on-small frequencies
        scale = (n - skipped)
        for key, p in sorted(truth.items(), key=lambda kv: -kv[1])[:6]:
            want = p / total_truth
            got = c.get(key, 0) / scale
            se = np.sqrt(want * (1 - want) / scale)
            assert abs(got - want) < 5 * se + 1e-3


class TestDecorations:
    def test_star_only_profile(self, binary_family):
        sampler = DecorationSampler(binary_family)
        t = sampler.sample_profile((2,), RngStream(24))
        assert t.size == 3 and list(t.types) == [1, 1, 1]

    def test_matches_conditional_blob_law(self, two_type_family, two_type_flat_law):
        # profile (2, 2) admits two shapes, equally likely under the family
        sampler = DecorationSampler(two_type_family)
        gen = RngStream(25).generator()
        c = Counter(
            sampler.sample_profile((2, 2), gen).encoding() for _ in range(8000)
        )
        assert len(c) == 2
        assert chi2_pvalue_from_truth(c, {k: 0.5 for k in c}, 8000) > 1e-3
        att, acc = sampler.acceptance[(2, 2)]
        assert acc == 8000 and att >= acc

    def test_decoration_of_flat_tree(self, two_type_family):
        s = ExactConditionedSampler(two_type_family, 7)
        tree = s.sample(RngStream(26))
        flat = flatten(tree)
        dec = sample_decoration(flat, two_type_family, RngStream(27))
        from bienayme.trees import blow_up

        blown, _ = blow_up(flat, dec)
        assert flatten(blown).tree == flat.tree
