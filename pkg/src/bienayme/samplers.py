"""Random tree generation: unconditioned growth, conditioned sampling by
rejection and by the exact cycle-lemma construction, prescribed-degree-
sequence trees, size-biased spine trees, and decorations.

The exact conditioned sampler follows a four-stage construction:

1. draw the multiset of flattened offspring vectors jointly with the type-1
   population size, conditioned on the ladder total and the weighted size
   (enumerated fiber of count vectors over the materialized flattened law);
2. arrange the type-1 degree sequence uniformly and apply the unique
   cycle-lemma rotation;
3. attach the non-type-1 leaf counts carried by each vector;
4. blow every vertex up with a decoration drawn from the conditional blob
   law given its child profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _kernels
from .errors import (
    BudgetExhausted,
    ConfigError,
    Inadmissible,
    Infeasible,
    Overflow,
    TruncationTooCoarse,
)
from .flatlaw import (
    DEFAULT_COVERAGE,
    law_tables,
    materialize_flat_law,
    simulate_blob,
)
from .rng import DEFAULT_BUDGET, RngStream
from .trees import (
    Decoration,
    FlatTree,
    MultitypeTree,
    PlaneTree,
    tree_from_arrays,
)

MAX_FIBER_POINTS = 5_000_000
COVERAGE_BIAS_TOL = 1e-6


def _as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(int(rng)).generator()


# -- unconditioned and rejection sampling ---------------------------------------


def sample_unconditioned(family, rng, root_type=1, budget=DEFAULT_BUDGET):
    """One unconditioned branching tree; raises Overflow past the vertex budget."""
    gen = _as_generator(rng)
    t = law_tables(family)
    cap = budget.max_vertices
    parents = np.empty(cap, dtype=np.int64)
    types = np.empty(cap, dtype=np.int64)
    status, m = _kernels.grow_tree(
        gen, root_type, t.type_word_lo, t.word_cdf, t.word_sym_off, t.word_syms,
        cap, 0, family.lam, 0, family.lam, parents, types,
    )
    if status != _kernels.GROW_OK:
        raise Overflow(f"growth exceeded {cap} vertices")
    return tree_from_arrays(parents[:m], types[:m])


@dataclass
class AttemptStats:
    attempts: int = 0
    overflows: int = 0

    def add(self, attempts, overflows):
        self.attempts += int(attempts)
        self.overflows += int(overflows)


def sample_conditioned_rejection(
    family, n, rng, lam=None, budget=DEFAULT_BUDGET, stats=None
):
    """Exact conditioned sample by rejection with early weight abort.

    Grows unconditioned trees, aborting as soon as the accumulated weight plus
    the weight of pending vertices exceeds n, and accepts on exact equality.
    """
    lam = family.lam if lam is None else np.asarray(lam, dtype=np.int64)
    gen = _as_generator(rng)
    t = law_tables(family)
    cap = budget.max_vertices
    parents = np.empty(cap, dtype=np.int64)
    types = np.empty(cap, dtype=np.int64)
    ok, m, attempts, overflows = _kernels.rejection_weight(
        gen, 1, t.type_word_lo, t.word_cdf, t.word_sym_off, t.word_syms,
        cap, lam, int(n), budget.max_attempts, parents, types,
    )
    if stats is not None:
        stats.add(attempts, overflows)
    if not ok:
        from .analysis import feasible_sizes

        feas = feasible_sizes(family, lam=lam, limit=max(int(n), 1))
        if int(n) not in feas.values:
            raise Infeasible(f"weighted size {n} is not feasible")
        raise BudgetExhausted(f"no acceptance in {attempts} attempts")
    return tree_from_arrays(parents[:m], types[:m])


def sample_by_type(family, cond_types, targets, rng, budget=DEFAULT_BUDGET, stats=None):
    """Condition on exact counts of the given types, by rejection with early abort."""
    gen = _as_generator(rng)
    t = law_tables(family)
    caps = np.full(family.num_types, -1, dtype=np.int64)
    for ty, x in zip(cond_types, targets):
        caps[ty - 1] = int(x)
    cap = budget.max_vertices
    parents = np.empty(cap, dtype=np.int64)
    types = np.empty(cap, dtype=np.int64)
    ok, m, attempts, overflows = _kernels.rejection_counts(
        gen, 1, t.type_word_lo, t.word_cdf, t.word_sym_off, t.word_syms,
        cap, caps, budget.max_attempts, parents, types,
    )
    if stats is not None:
        stats.add(attempts, overflows)
    if not ok:
        raise BudgetExhausted(f"no acceptance in {attempts} attempts")
    return tree_from_arrays(parents[:m], types[:m])


# -- degree-sequence trees -------------------------------------------------------


def cycle_rotation_index(degrees):
    """Index of the unique rotation making the sequence a DFS degree sequence.

    For integer outdegrees with sum = len - 1, the rotation starting at the
    first position achieving the minimum of the prefix sums of (d - 1) is the
    only one whose proper prefix sums stay nonnegative.
    """
    d = np.asarray(degrees, dtype=np.int64)
    if d.sum() != d.shape[0] - 1:
        raise Inadmissible("outdegrees must sum to length - 1")
    steps = np.cumsum(d - 1)
    r = int(np.argmin(steps)) + 1
    return r % d.shape[0]


def count_valid_rotations(degrees):
    """Number of rotations satisfying the ladder condition (should be 1)."""
    d = list(degrees)
    n = len(d)
    valid = 0
    for r in range(n):
        s = 0
        ok = True
        for i in range(n):
            s += d[(r + i) % n] - 1
            if s < 0 and i < n - 1:
                ok = False
                break
        if ok and s == -1:
            valid += 1
    return valid


def sample_degree_sequence_tree(degrees, rng):
    """Uniform plane tree with the given outdegree multiset.

    Uniform shuffle of the multiset followed by the unique cycle-lemma
    rotation; every plane tree with the multiset arises from the same number
    of shuffles.
    """
    gen = _as_generator(rng)
    d = np.asarray(degrees, dtype=np.int64)
    if np.any(d < 0) or d.sum() != d.shape[0] - 1:
        raise Inadmissible("outdegrees must be nonnegative and sum to length - 1")
    d = gen.permutation(d)
    r = cycle_rotation_index(d)
    d = np.roll(d, -r)
    parents, _ = _kernels.tree_from_degrees(d)
    return PlaneTree(parents)


# -- per-replicate statistics ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TreeStats:
    """Summary of one conditioned replicate, as consumed by the analysis module."""

    n: int
    num_type1: int
    type_counts: np.ndarray
    n_d: np.ndarray  # n_d[d] = number of type-1 vertices with d type-1 children
    max_outdeg_flat: int
    max_blob_size: int
    height: int
    height_reduced: int

    @staticmethod
    def from_tree(tree, lam):
        from .trees import blobs, flatten, reduce_tree, weighted_size

        flat = flatten(tree)
        red, _ = reduce_tree(tree)
        deg = red.outdegrees()
        n_d = np.bincount(deg)
        bl = blobs(tree)
        flat_deg = flat.tree.shape.outdegrees()
        is1 = flat.types == 1
        return TreeStats(
            n=weighted_size(tree, lam),
            num_type1=int(is1.sum()),
            type_counts=np.bincount(tree.types)[1:],
            n_d=n_d,
            max_outdeg_flat=int(flat_deg.max()),
            max_blob_size=int(bl.partition_sizes().max()),
            height=tree.shape.height(),
            height_reduced=red.height(),
        )


# -- the exact conditioned sampler -------------------------------------------------


def _enumerate_fiber(pair_dm1, pair_u, d_target, u_target, ell_cap, max_points):
    """All nonnegative integer count vectors N with N . pair_dm1 = d_target,
    N . pair_u = u_target and sum(N) <= ell_cap."""
    k = pair_dm1.shape[0]
    rows = []

    def bound(j, u_rem):
        if pair_u[j] > 0:
            return min(u_rem // pair_u[j], ell_cap)
        return ell_cap

    def solve_tail(prefix, d_rem, u_rem):
        # closed form for the last two coordinates
        a, b = k - 2, k - 1
        det = int(pair_dm1[a]) * int(pair_u[b]) - int(pair_dm1[b]) * int(pair_u[a])
        if det != 0:
            na_num = d_rem * int(pair_u[b]) - u_rem * int(pair_dm1[b])
            nb_num = u_rem * int(pair_dm1[a]) - d_rem * int(pair_u[a])
            if na_num % det == 0 and nb_num % det == 0:
                na, nb = na_num // det, nb_num // det
                if na >= 0 and nb >= 0:
                    rows.append(prefix + [na, nb])
            return
        # degenerate pair: iterate one coordinate, solve the other
        for ca in range(bound(a, u_rem) + 1):
            solve_tail_one(prefix + [ca], d_rem - ca * int(pair_dm1[a]),
                           u_rem - ca * int(pair_u[a]))

    def solve_tail_one(prefix, d_rem, u_rem):
        j = k - 1
        dm1, u = int(pair_dm1[j]), int(pair_u[j])
        if u != 0:
            if u_rem % u != 0 or u_rem // u < 0:
                return
            c = u_rem // u
            if c * dm1 == d_rem and c <= ell_cap:
                rows.append(prefix + [c])
        elif dm1 != 0:
            if u_rem != 0 or d_rem % dm1 != 0:
                return
            c = d_rem // dm1
            if c >= 0 and c <= ell_cap:
                rows.append(prefix + [c])
        else:
            if u_rem == 0 and d_rem == 0:
                rows.append(prefix + [0])

    def rec(j, prefix, d_rem, u_rem):
        if len(rows) > max_points:
            raise TruncationTooCoarse(
                f"stage-1 fiber exceeds {max_points} count vectors"
            )
        if j == max(k - 2, 0):
            solve_tail(prefix, d_rem, u_rem)
            return
        for c in range(bound(j, u_rem) + 1):
            rec(j + 1, prefix + [c], d_rem - c * int(pair_dm1[j]),
                u_rem - c * int(pair_u[j]))

    if k == 1:
        solve_tail_one([], d_target, u_target)
    else:
        rec(0, [], d_target, u_target)
    if not rows:
        return np.zeros((0, k), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


class ExactConditionedSampler:
    """Exact sampler of the tree conditioned on lambda-weighted size n.

    Builds the stage-1 tables once (flattened law, merged pair support, fiber
    of count vectors with log-weights) and then produces independent
    replicates cheaply. Use `sample` for trees and `sample_stats` for the
    per-replicate summaries consumed by the analysis module.
    """

    def __init__(
        self,
        family,
        n,
        lam=None,
        flat_law=None,
        coverage=DEFAULT_COVERAGE,
        max_fiber_points=MAX_FIBER_POINTS,
    ):
        self.family = family
        self.n = int(n)
        self.lam = family.lam if lam is None else np.asarray(lam, dtype=np.int64)
        if self.lam.shape != (family.num_types,):
            raise ConfigError("lambda length must equal the number of types")
        self.law = flat_law or materialize_flat_law(family, coverage=coverage)
        law = self.law
        lam = self.lam
        # merge vectors into (frontier count, weight) pairs; zero-weight pairs
        # go last so the closed-form tail solve absorbs them
        d_all = law.vectors[:, 0]
        u_all = law.vectors @ lam
        uniq = sorted({(int(d), int(u)) for d, u in zip(d_all, u_all)},
                      key=lambda p: (-p[1], -p[0]))
        pair_key = {p: i for i, p in enumerate(uniq)}
        vec_pair = np.array(
            [pair_key[(int(d), int(u))] for d, u in zip(d_all, u_all)],
            dtype=np.int64,
        )
        k = len(pair_key)
        self.pair_d = np.array([p[0] for p in uniq], dtype=np.int64)
        self.pair_u = np.array([p[1] for p in uniq], dtype=np.int64)
        self.pair_q = np.zeros(k)
        np.add.at(self.pair_q, vec_pair, law.probs)
        self.vec_pair = vec_pair
        self.pair_vec_ids = []
        self.pair_vec_cdf = []
        for idx in range(k):
            sel = np.flatnonzero(vec_pair == idx)
            w = law.probs[sel]
            c = np.cumsum(w / w.sum())
            c[-1] = 1.0
            self.pair_vec_ids.append(sel)
            self.pair_vec_cdf.append(c)

        lam1 = int(lam[0])
        d_target = -1
        u_target = self.n - lam1
        if u_target < 0:
            raise Infeasible(f"weighted size {n} below the root weight")
        if lam1 > 0:
            ell_cap = self.n // lam1
        else:
            fertile = self.pair_d >= 1
            if np.any(fertile & (self.pair_u == 0)):
                raise TruncationTooCoarse(
                    "zero-weight reproduction makes the type-1 population "
                    "unbounded; the exact sampler does not support this "
                    "conditioning, use rejection"
                )
            if fertile.any():
                ell_cap = 1 + int(self.pair_d[fertile].max()) * u_target
            else:
                ell_cap = 1
        self.fiber = _enumerate_fiber(
            self.pair_d - 1, self.pair_u, d_target, u_target, ell_cap,
            max_fiber_points,
        )
        if self.fiber.shape[0] == 0:
            if law.complete:
                raise Infeasible(f"weighted size {n} is not feasible")
            raise TruncationTooCoarse(
                f"no stage-1 solution at coverage {law.coverage}; raise the "
                "blob expansion budget"
            )
        ell = self.fiber.sum(axis=1)
        if not law.complete and float(ell.max()) * (1.0 - law.coverage) > COVERAGE_BIAS_TOL:
            raise TruncationTooCoarse(
                f"coverage {law.coverage} too coarse for size {n}"
            )
        logq = np.where(self.pair_q > 0, np.log(self.pair_q), -np.inf)
        logw = (
            -np.log(ell)
            + gammaln(ell + 1)
            - gammaln(self.fiber + 1).sum(axis=1)
            + self.fiber @ logq
        )
        self.log_norm = float(logsumexp(logw))
        w = np.exp(logw - self.log_norm)
        self.fiber_probs = w / w.sum()
        self.fiber_cdf = np.cumsum(self.fiber_probs)
        self.fiber_cdf[-1] = 1.0
        self.ell_values = ell
        # flat shape-table arrays for the blow-up kernel
        sizes = np.array([s.size for s in law.shapes], dtype=np.int64)
        self.shape_sizes = sizes
        self.shape_off = np.zeros(sizes.shape[0] + 1, dtype=np.int64)
        np.cumsum(sizes, out=self.shape_off[1:])
        self.shape_parents = (
            np.concatenate([s.parents for s in law.shapes])
            if law.shapes
            else np.empty(0, dtype=np.int64)
        )
        self.shape_types = (
            np.concatenate([s.types for s in law.shapes])
            if law.shapes
            else np.empty(0, dtype=np.int64)
        )
        self.max_shape = int(sizes.max()) if sizes.size else 1
        self._tables = law_tables(family)

    def ell_distribution(self):
        """Exact conditional distribution of the type-1 population size."""
        vals = np.unique(self.ell_values)
        probs = np.zeros(vals.shape[0])
        for i, v in enumerate(vals):
            probs[i] = self.fiber_probs[self.ell_values == v].sum()
        return vals, probs

    def _draw_slots(self, gen):
        """Stage 1-3: rotated per-slot vector rows (DFS order of type-1 vertices)."""
        row = int(np.searchsorted(self.fiber_cdf, gen.random()))
        counts = self.fiber[row]
        pair_seq = np.repeat(np.arange(counts.shape[0]), counts)
        pair_seq = gen.permutation(pair_seq)
        vec_seq = np.empty(pair_seq.shape[0], dtype=np.int64)
        for idx in range(counts.shape[0]):
            slots = np.flatnonzero(pair_seq == idx)
            if slots.size == 0:
                continue
            ids = self.pair_vec_ids[idx]
            if ids.shape[0] == 1:
                vec_seq[slots] = ids[0]
            else:
                picks = np.searchsorted(self.pair_vec_cdf[idx], gen.random(slots.size))
                vec_seq[slots] = ids[picks]
        d = self.law.vectors[vec_seq, 0]
        steps = np.cumsum(d - 1)
        r = (int(np.argmin(steps)) + 1) % d.shape[0]
        return np.roll(vec_seq, -r)

    def _draw_shapes(self, gen, vec_seq):
        shape_seq = np.empty(vec_seq.shape[0], dtype=np.int64)
        for v in np.unique(vec_seq):
            slots = np.flatnonzero(vec_seq == v)
            ids = self.law.vector_shape_ids[v]
            if ids.shape[0] == 1:
                shape_seq[slots] = ids[0]
            else:
                picks = np.searchsorted(self.law.vector_shape_cdf[v], gen.random(slots.size))
                shape_seq[slots] = ids[picks]
        return shape_seq

    def _build(self, gen):
        vec_seq = self._draw_slots(gen)
        shape_seq = self._draw_shapes(gen, vec_seq)
        ell = vec_seq.shape[0]
        total = int(self.shape_sizes[shape_seq].sum() - (ell - 1))
        parents, types, depth, phi = _kernels.blowup_build(
            shape_seq,
            self.shape_off,
            self.shape_parents,
            self.shape_types,
            total,
            self.max_shape,
            ell,
        )
        return vec_seq, parents, types, depth, phi

    def sample(self, rng):
        """One exact replicate as a MultitypeTree."""
        gen = _as_generator(rng)
        _, parents, types, _, _ = self._build(gen)
        return tree_from_arrays(parents, types)

    def sample_stats(self, rng):
        """One exact replicate summarized as TreeStats (no tree object built)."""
        gen = _as_generator(rng)
        vec_seq, parents, types, depth, phi = self._build(gen)
        d = self.law.vectors[vec_seq, 0]
        red_parents, red_depth = _kernels.tree_from_degrees(d)
        sizes = 1 + self.law.vectors[vec_seq].sum(axis=1)
        blob_sizes = sizes - d
        return TreeStats(
            n=self.n,
            num_type1=int(vec_seq.shape[0]),
            type_counts=np.bincount(types, minlength=self.family.num_types + 1)[1:],
            n_d=np.bincount(d),
            max_outdeg_flat=int((sizes - 1).max()),
            max_blob_size=int(blob_sizes.max()),
            height=int(depth.max()),
            height_reduced=int(red_depth.max()),
        )

    def sample_flat_arrays(self, rng):
        """One replicate of the flattened tree as raw arrays (vec_seq, reduced
        parents); used by contour exports."""
        gen = _as_generator(rng)
        vec_seq = self._draw_slots(gen)
        d = self.law.vectors[vec_seq, 0]
        red_parents, _ = _kernels.tree_from_degrees(d)
        return vec_seq, red_parents


def sample_conditioned_exact(family, n, rng, lam=None, flat_law=None, **kw):
    """One exact conditioned sample (builds the stage tables; for many
    replicates construct an ExactConditionedSampler once)."""
    sampler = ExactConditionedSampler(family, n, lam=lam, flat_law=flat_law, **kw)
    return sampler.sample(rng)


# -- spine trees -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MarkedFlatTree:
    """A flat tree with a marked type-1 vertex and its root-to-mark spine."""

    tree: FlatTree
    spine: tuple

    @property
    def mark(self):
        return self.spine[-1]


def sample_spine_tree(family, ell, rng, budget=DEFAULT_BUDGET, flat_law=None):
    """Size-biased flat tree with a marked type-1 vertex at height ell.

    Spine vertices draw their child vectors from the size-biased flattened
    law (reweighted by the type-1 child count); one uniformly chosen type-1
    child continues the spine; all other type-1 vertices root independent
    unconditioned flat trees.
    """
    gen = _as_generator(rng)
    law = flat_law or materialize_flat_law(family)
    probs = law.probs / law.probs.sum()
    vec_cdf = np.cumsum(probs)
    vec_cdf[-1] = 1.0
    biased = probs * law.vectors[:, 0]
    biased_cdf = np.cumsum(biased / biased.sum())
    biased_cdf[-1] = 1.0
    cap = budget.max_vertices

    # build in a child-lists representation, then renumber to DFS
    parents = [-1]
    types = [1]
    spine_local = [0]
    subtree_roots = []  # type-1 vertices rooting unconditioned flat trees
    v = 0
    for _ in range(int(ell)):
        vi = int(np.searchsorted(biased_cdf, gen.random()))
        vec = law.vectors[vi]
        kid_ids = []
        for j, cnt in enumerate(vec, start=1):
            for _ in range(int(cnt)):
                kid_ids.append(len(parents))
                parents.append(v)
                types.append(j)
        t1_kids = [c for c in kid_ids if types[c] == 1]
        chosen = t1_kids[int(gen.integers(len(t1_kids)))]
        subtree_roots.extend(c for c in t1_kids if c != chosen)
        spine_local.append(chosen)
        v = chosen
        if len(parents) > cap:
            raise Overflow(f"spine construction exceeded {cap} vertices")
    # the mark and every off-spine type-1 vertex root unconditioned flat trees
    hang = [v] + subtree_roots
    buf_p = np.empty(cap, dtype=np.int64)
    buf_t = np.empty(cap, dtype=np.int64)
    for root in hang:
        status, m = _kernels.grow_flat_tree(
            gen, vec_cdf, law.vectors, cap, buf_p, buf_t
        )
        if status != _kernels.GROW_OK:
            raise Overflow(f"flat subtree exceeded {cap} vertices")
        base = len(parents)
        if len(parents) + m - 1 > cap:
            raise Overflow(f"spine tree exceeded {cap} vertices")
        # vertex 0 of the subtree is `root` itself
        for i in range(1, m):
            p = int(buf_p[i])
            parents.append(root if p == 0 else base + p - 1)
            types.append(int(buf_t[i]))
    tree, new_index = _dfs_renumber(parents, types)
    spine = tuple(int(new_index[s]) for s in spine_local)
    return MarkedFlatTree(FlatTree(tree), spine)


def _dfs_renumber(parents, types):
    n = len(parents)
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[parents[i]].append(i)
    # flat sibling order: sort children by type, stable in creation order
    for v in range(n):
        kids[v].sort(key=lambda c: types[c])
    new_parents = np.empty(n, dtype=np.int64)
    new_types = np.empty(n, dtype=np.int64)
    new_index = np.empty(n, dtype=np.int64)
    stack = [0]
    m = 0
    while stack:
        v = stack.pop()
        new_index[v] = m
        new_parents[m] = -1 if v == 0 else new_index[parents[v]]
        new_types[m] = types[v]
        m += 1
        stack.extend(reversed(kids[v]))
    return tree_from_arrays(new_parents, new_types), new_index


# -- decorations -------------------------------------------------------------------


class DecorationSampler:
    """Per-vertex conditional blob sampling by rejection, with memoized
    acceptance tables keyed by child profile."""

    def __init__(self, family, budget=DEFAULT_BUDGET, max_blob_vertices=100_000):
        self.family = family
        self.budget = budget
        self.max_blob_vertices = max_blob_vertices
        self.tables = law_tables(family)
        self.acceptance = {}  # profile -> [attempts, accepts]

    def sample_profile(self, profile, rng):
        """One blob conditioned on its count vector (frontier, members...)."""
        gen = _as_generator(rng)
        profile = tuple(int(x) for x in profile)
        rec = self.acceptance.setdefault(profile, [0, 0])
        m_types = self.family.num_types
        want = np.asarray(profile, dtype=np.int64)
        buf_p = np.empty(self.max_blob_vertices, dtype=np.int64)
        buf_t = np.empty(self.max_blob_vertices, dtype=np.int64)
        for _ in range(self.budget.max_attempts):
            rec[0] += 1
            vec, (p, t) = simulate_blob(
                self.family, self.tables, gen, self.max_blob_vertices,
                _buffers=(buf_p, buf_t),
            )
            if vec.shape[0] < m_types:
                vec = np.pad(vec, (0, m_types - vec.shape[0]))
            if np.array_equal(vec, want):
                rec[1] += 1
                return tree_from_arrays(p, t)
        raise BudgetExhausted(
            f"blob profile {profile} not hit in {self.budget.max_attempts} attempts"
        )


def sample_decoration(flat, family, rng, budget=DEFAULT_BUDGET, sampler=None):
    """Independent conditional decorations for every type-1 vertex of a flat tree."""
    gen = _as_generator(rng)
    sampler = sampler or DecorationSampler(family, budget)
    t = flat.tree if isinstance(flat, FlatTree) else flat
    off, lst = t.shape.children_csr()
    entries = []
    m = family.num_types
    for v in np.flatnonzero(t.types == 1):
        kids = lst[off[v]:off[v + 1]]
        prof = np.bincount(t.types[kids], minlength=m + 1)[1:]
        entries.append(sampler.sample_profile(tuple(int(x) for x in prof), gen))
    return Decoration(tuple(entries))
