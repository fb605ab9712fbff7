"""Exhaustive enumeration of small trees, used as an independent oracle in tests."""

from __future__ import annotations

from itertools import product

import numpy as np

from .trees import MultitypeTree, PlaneTree, tree_from_arrays


def ladder_sequences(n):
    """All DFS outdegree sequences of plane trees with exactly n vertices.

    A sequence d_0..d_{n-1} encodes a plane tree iff sum(d) = n - 1 and every
    proper prefix sum of (d_i - 1) is nonnegative.
    """
    out = []

    def rec(prefix, total, surplus):
        k = len(prefix)
        if k == n:
            if surplus == 0:
                out.append(tuple(prefix))
            return
        rem_after = n - k - 1
        for d in range(0, n - total):
            s = surplus - 1 + d  # open slots after this vertex
            if s < 0 or s > rem_after:
                continue
            if s == 0 and rem_after > 0:
                continue
            prefix.append(d)
            rec(prefix, total + d, s)
            prefix.pop()

    rec([], 0, 1)
    return out


def plane_trees(n):
    """All plane trees with exactly n vertices."""
    return [PlaneTree(_parents_from_degrees(d)) for d in ladder_sequences(n)]


def _parents_from_degrees(deg):
    n = len(deg)
    parents = [-1] * n
    stack = []
    for j in range(1, n):
        if deg[j - 1] > 0:
            stack.append([j - 1, deg[j - 1]])
        parents[j] = stack[-1][0]
        stack[-1][1] -= 1
        if stack[-1][1] == 0:
            stack.pop()
    return np.array(parents, dtype=np.int64)


def multitype_trees(max_vertices, num_types, root_type=1):
    """All multitype trees with at most max_vertices vertices and the given root type."""
    for n in range(1, max_vertices + 1):
        for shape in plane_trees(n):
            if n == 1:
                yield MultitypeTree(shape, np.array([root_type]))
                continue
            for labels in product(range(1, num_types + 1), repeat=n - 1):
                yield MultitypeTree(shape, np.array((root_type,) + labels))


def tree_probability(family, tree):
    """Probability that the branching process produces exactly this tree."""
    off, lst = tree.shape.children_csr()
    p = 1.0
    for v in range(tree.size):
        word = tuple(int(tree.types[c]) for c in lst[off[v]:off[v + 1]])
        p *= family.law(int(tree.types[v])).prob_of(word)
        if p == 0.0:
            return 0.0
    return p


def _reindex_dfs(parents, types):
    """Renumber a creation-ordered tree (children in birth order) to DFS order."""
    n = len(parents)
    kids = [[] for _ in range(n)]
    for v in range(1, n):
        kids[parents[v]].append(v)
    new_parents = [-1] * n
    new_types = [0] * n
    new_index = [0] * n
    stack = [0]
    m = 0
    while stack:
        v = stack.pop()
        new_index[v] = m
        new_types[m] = types[v]
        new_parents[m] = new_index[parents[v]] if v else -1
        m += 1
        stack.extend(reversed(kids[v]))
    return tree_from_arrays(np.array(new_parents), np.array(new_types))


def family_trees(family, max_vertices, root_type=1):
    """All positive-probability trees of the family with at most max_vertices
    vertices, as (tree, probability) pairs."""
    results = []

    def rec(pending, budget, parents, types, prob):
        if not pending:
            results.append((_reindex_dfs(parents, types), prob))
            return
        v = pending[0]
        rest = pending[1:]
        law = family.law(types[v])
        for w, pw in zip(law.words, law.probs):
            if pw <= 0.0 or len(w) > budget:
                continue
            base = len(parents)
            new_parents = parents + [v] * len(w)
            new_types = types + list(w)
            new_pending = list(range(base, base + len(w))) + rest
            rec(new_pending, budget - len(w), new_parents, new_types, prob * float(pw))

    rec([0], max_vertices - 1, [-1], [root_type], 1.0)
    return results


def family_count_vectors(family, max_vertices, root_type=1):
    """Achievable per-type count vectors over trees with <= max_vertices vertices."""
    seen = set()
    for tree, _ in family_trees(family, max_vertices, root_type):
        seen.add(
            tuple(int(x) for x in np.bincount(tree.types, minlength=family.num_types + 1)[1:])
        )
    return seen


def flat_family_trees(vectors, probs, max_vertices):
    """All positive-probability flat trees over a materialized flattened law,
    as (tree, probability) pairs. vectors[k] is a child-count vector with
    probability probs[k]."""
    results = []
    vecs = [tuple(int(x) for x in v) for v in vectors]
    ps = [float(p) for p in probs]

    def rec(pending, budget, parents, types, prob):
        if not pending:
            results.append((_reindex_dfs(parents, types), prob))
            return
        v = pending[0]
        rest = pending[1:]
        for vec, pv in zip(vecs, ps):
            size = sum(vec)
            if pv <= 0.0 or size > budget:
                continue
            new_parents = list(parents)
            new_types = list(types)
            kids = []
            for j, k in enumerate(vec, start=1):
                for _ in range(k):
                    kids.append(len(new_parents))
                    new_parents.append(v)
                    new_types.append(j)
            type1_kids = [c for c in kids if new_types[c] == 1]
            new_pending = type1_kids + rest
            rec(new_pending, budget - size, new_parents, new_types, prob * pv)

    rec([0], max_vertices - 1, [-1], [1], 1.0)
    return results
