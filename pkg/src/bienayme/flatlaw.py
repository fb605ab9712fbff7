"""Materialization of the flattened offspring law by blob expansion.

The flattened law is the distribution of the per-type child counts of a
type-1 vertex in the flattened tree: the type-1 frontier count and the
non-type-1 member counts of its blob. It is materialized by best-first
enumeration of stopped blobs (trees grown from a type-1 root in which
non-root type-1 vertices are frozen) up to a total-probability coverage
target; finite blob supports are enumerated completely.

Each enumerated blob shape is kept, grouped by its count vector, so exact
conditional decoration sampling is a table lookup whenever coverage is
complete.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetExhausted, Overflow
from .trees import tree_from_arrays

DEFAULT_COVERAGE = 1.0 - 1e-9
COMPLETE_COVERAGE = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class LawTables:
    """Flat arrays describing a family's word laws, for the growth kernels."""

    type_word_lo: np.ndarray  # length m+1; words of type t are [lo[t-1], lo[t])
    word_cdf: np.ndarray  # per-type cumulative probabilities
    word_sym_off: np.ndarray  # word w's symbols are word_syms[off[w]:off[w+1]]
    word_syms: np.ndarray


def law_tables(family):
    lo = [0]
    cdf = []
    sym_off = [0]
    syms = []
    for law in family.laws:
        c = 0.0
        total = float(law.probs.sum())
        for w, p in zip(law.words, law.probs):
            c += float(p) / total
            cdf.append(c)
            syms.extend(w)
            sym_off.append(len(syms))
        cdf[-1] = 1.0
        lo.append(len(cdf))
    return LawTables(
        np.array(lo, dtype=np.int64),
        np.array(cdf, dtype=float),
        np.array(sym_off, dtype=np.int64),
        np.array(syms, dtype=np.int64),
    )


@dataclass(frozen=True, eq=False)
class FlatLaw:
    """Materialized flattened law with per-vector blob shape tables."""

    num_types: int
    vectors: np.ndarray  # (V, m) count vectors: frontier count, then member counts
    probs: np.ndarray  # raw probabilities (sum = coverage)
    coverage: float
    shapes: tuple  # MultitypeTree per enumerated blob shape, DFS order
    shape_probs: np.ndarray
    shape_vector_index: np.ndarray  # shape -> row of vectors
    vector_shape_ids: tuple  # per vector: np.ndarray of shape indices
    vector_shape_cdf: tuple  # per vector: conditional cdf over its shapes

    @property
    def complete(self):
        return self.coverage >= COMPLETE_COVERAGE

    def vector_index(self):
        return {tuple(int(x) for x in v): i for i, v in enumerate(self.vectors)}

    def vector_cdf(self):
        c = np.cumsum(self.probs / self.probs.sum())
        c[-1] = 1.0
        return c

    def mean(self):
        """Coverage-weighted mean of the count vectors (diagnostic)."""
        return (self.probs[:, None] * self.vectors).sum(axis=0) / self.probs.sum()


def _replay_shape(family, choices):
    """Rebuild a stopped blob from its DFS word-choice sequence.

    Returns (parents, types): the root is type 1 and uses choices[0]; every
    non-type-1 vertex consumes the next choice; non-root type-1 vertices are
    frozen leaves.
    """
    parents = [-1]
    types = [1]
    ci = 0
    stack = [0]
    while stack:
        v = stack.pop()
        t = types[v]
        if t == 1 and v != 0:
            continue
        w = family.law(t).words[choices[ci]]
        ci += 1
        kids = []
        for s in w:
            kids.append(len(parents))
            parents.append(v)
            types.append(int(s))
        stack.extend(reversed(kids))
    return parents, types


def _shape_in_dfs(family, choices):
    """Shape from choices with vertices renumbered to DFS order."""
    parents, types = _replay_shape(family, choices)
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
    return new_parents, new_types


def materialize_flat_law(
    family,
    coverage=DEFAULT_COVERAGE,
    max_shapes=2_000_000,
    max_blob_vertices=4096,
):
    """Enumerate stopped blob shapes best-first until the coverage target.

    States carry (pending-expansion stack, word choices so far); the partial
    probability bounds every completion, so enumeration in decreasing bound
    order reaches any coverage target with the fewest expansions. Shapes
    whose vertex count would exceed max_blob_vertices are dropped (their mass
    stays uncovered). Raises BudgetExhausted if max_shapes completions do not
    reach the target.
    """
    found = []  # (prob, choices)
    mass = 0.0
    counter = 0
    # state: (-prob, tiebreak, size, pending types to expand (top last), choices)
    heap = [(-1.0, counter, 1, (1,), ())]
    while heap and mass < coverage:
        negp, _, size, pending, choices = heapq.heappop(heap)
        p = -negp
        if not pending:
            found.append((p, choices))
            mass += p
            if len(found) >= max_shapes and mass < coverage:
                raise BudgetExhausted(
                    f"flat-law expansion hit {max_shapes} shapes at coverage {mass:.12f}"
                )
            continue
        t = pending[-1]
        rest = pending[:-1]
        law = family.law(t)
        for wi, (w, pw) in enumerate(zip(law.words, law.probs)):
            if pw <= 0.0:
                continue
            if size + len(w) > max_blob_vertices:
                continue  # oversized completions stay uncovered
            # non-root type-1 children are frozen leaves: no expansion needed
            add = tuple(int(s) for s in reversed(w) if s != 1)
            counter += 1
            heapq.heappush(
                heap,
                (-(p * float(pw)), counter, size + len(w), rest + add, choices + (wi,)),
            )
    if mass < coverage and not heap:
        raise BudgetExhausted(
            f"flat-law expansion exhausted at coverage {mass:.12f} < {coverage}"
        )
    return _assemble(family, found, mass)


def _assemble(family, found, mass):
    m = family.num_types
    vec_map = {}
    shapes = []
    shape_probs = []
    shape_vec = []
    for p, choices in found:
        parents, types = _shape_in_dfs(family, choices)
        tree = tree_from_arrays(np.array(parents), np.array(types))
        counts = np.bincount(types, minlength=m + 1)[1:]
        vec = list(counts)
        vec[0] = int((np.array(types) == 1).sum() - 1)  # frontier only
        vec = tuple(vec)
        idx = vec_map.setdefault(vec, len(vec_map))
        shapes.append(tree)
        shape_probs.append(p)
        shape_vec.append(idx)
    V = len(vec_map)
    vectors = np.zeros((V, m), dtype=np.int64)
    for vec, i in vec_map.items():
        vectors[i] = vec
    probs = np.zeros(V)
    for p, i in zip(shape_probs, shape_vec):
        probs[i] += p
    shape_probs = np.array(shape_probs)
    shape_vec = np.array(shape_vec, dtype=np.int64)
    ids = []
    cdfs = []
    for i in range(V):
        sel = np.flatnonzero(shape_vec == i)
        w = shape_probs[sel]
        c = np.cumsum(w / w.sum())
        c[-1] = 1.0
        ids.append(sel)
        cdfs.append(c)
    return FlatLaw(
        m,
        vectors,
        probs,
        float(mass),
        tuple(shapes),
        shape_probs,
        shape_vec,
        tuple(ids),
        tuple(cdfs),
    )


def simulate_blob(family, tables, gen, max_vertices=100_000, _buffers=None):
    """One stopped blob grown from the family; returns (vector, tree arrays).

    The vector counts the type-1 frontier and the non-type-1 members, i.e. a
    draw from the flattened law.
    """
    if _buffers is None:
        parents = np.empty(max_vertices, dtype=np.int64)
        types = np.empty(max_vertices, dtype=np.int64)
    else:
        parents, types = _buffers
    status, n = _kernels.grow_stopped_blob(
        gen,
        tables.type_word_lo,
        tables.word_cdf,
        tables.word_sym_off,
        tables.word_syms,
        max_vertices,
        parents,
        types,
    )
    if status != _kernels.GROW_OK:
        raise Overflow(f"blob exceeded {max_vertices} vertices")
    counts = np.bincount(types[:n], minlength=family.num_types + 1)[1:]
    vec = counts.copy()
    vec[0] = int((types[:n] == 1).sum() - 1)
    return vec, (parents[:n].copy(), types[:n].copy())


def blob_vector_sample(family, gen, reps, max_vertices=100_000):
    """Monte Carlo draws from the flattened law: (reps, m) matrix of vectors."""
    tables = law_tables(family)
    out = np.empty((reps, family.num_types), dtype=np.int64)
    parents = np.empty(max_vertices, dtype=np.int64)
    types = np.empty(max_vertices, dtype=np.int64)
    for r in range(reps):
        vec, _ = simulate_blob(
            family, tables, gen, max_vertices, _buffers=(parents, types)
        )
        out[r] = vec
    return out
