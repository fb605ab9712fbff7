"""Plane and multitype trees with the structural operations of the toolkit.

Trees are stored as parent arrays in depth-first (lexicographic) order: the
root has index 0 and parent -1, every other vertex has a parent with a
smaller index, and the vertices of any subtree occupy a contiguous index
range. Types are 1-based. All values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, DecorationMismatch, Inadmissible, RootTypeError


def _freeze(arr, dtype=np.int64):
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PlaneTree:
    """A plane tree as a DFS-ordered parent array."""

    parents: np.ndarray

    def __post_init__(self):
        parents = _freeze(self.parents)
        object.__setattr__(self, "parents", parents)
        n = parents.shape[0]
        if n == 0 or parents[0] != -1:
            raise ConfigError("root must be index 0 with parent -1")
        if n > 1:
            idx = np.arange(1, n)
            if np.any(parents[1:] < 0) or np.any(parents[1:] >= idx):
                raise ConfigError("parent[i] must satisfy 0 <= parent[i] < i")
            # DFS order: each vertex's parent is on the rightmost path so far,
            # equivalently subtrees are contiguous index ranges.
            if not _kernels.dfs_order_ok(parents):
                raise ConfigError("parent array is not in depth-first order")

    @property
    def size(self):
        return int(self.parents.shape[0])

    def children_csr(self):
        """(offsets, child_list): children of v are child_list[off[v]:off[v+1]]."""
        n = self.size
        counts = np.bincount(self.parents[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        off = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=off[1:])
        order = np.argsort(self.parents[1:], kind="stable") + 1 if n > 1 else np.empty(0, dtype=np.int64)
        return off, _freeze(order)

    def children(self, v):
        off, lst = self.children_csr()
        return [int(x) for x in lst[off[v]:off[v + 1]]]

    def outdegrees(self):
        return np.bincount(self.parents[1:], minlength=self.size) if self.size > 1 else np.zeros(1, dtype=np.int64)

    def depths(self):
        return _kernels.depths_from_parents(self.parents)

    def height(self):
        return int(self.depths().max())


@dataclass(frozen=True, eq=False)
class MultitypeTree:
    """A plane tree with a 1-based type label per vertex."""

    shape: PlaneTree
    types: np.ndarray

    def __post_init__(self):
        types = _freeze(self.types)
        object.__setattr__(self, "types", types)
        if types.shape[0] != self.shape.size:
            raise ConfigError("types length must equal tree size")
        if types.shape[0] and types.min() < 1:
            raise ConfigError("types are 1-based")

    @property
    def size(self):
        return self.shape.size

    @property
    def parents(self):
        return self.shape.parents

    @property
    def root_type(self):
        return int(self.types[0])

    def encoding(self):
        """Canonical byte encoding; equal trees have equal encodings."""
        return self.parents.astype("<i8").tobytes() + self.types.astype("<i8").tobytes()

    def __eq__(self, other):
        if not isinstance(other, MultitypeTree):
            return NotImplemented
        return (
            self.size == other.size
            and np.array_equal(self.parents, other.parents)
            and np.array_equal(self.types, other.types)
        )

    def __hash__(self):
        return hash(self.encoding())


def tree_from_arrays(parents, types):
    return MultitypeTree(PlaneTree(np.asarray(parents)), np.asarray(types))


def monotype_tree(parents):
    parents = np.asarray(parents, dtype=np.int64)
    return MultitypeTree(PlaneTree(parents), np.ones(parents.shape[0], dtype=np.int64))


# -- encodings -------------------------------------------------------------


def contour_function(tree):
    """Heights along the contour walk: 2(|t|-1)+1 integers starting and ending at 0."""
    shape = tree.shape if isinstance(tree, MultitypeTree) else tree
    off, lst = shape.children_csr()
    return _kernels.contour_walk(shape.parents, shape.depths(), off, lst)


def height_function(tree):
    """Depth of the i-th vertex in lexicographic order, i = 0..|t|-1."""
    shape = tree.shape if isinstance(tree, MultitypeTree) else tree
    return shape.depths()


def type_counts(tree):
    """Number of vertices of each type, as a vector of length max type."""
    return np.bincount(tree.types)[1:]


def weighted_size(tree, lam):
    """Linear combination sum_i lambda_i * (#vertices of type i)."""
    lam = np.asarray(lam, dtype=np.int64)
    counts = np.bincount(tree.types, minlength=lam.shape[0] + 1)[1:]
    if counts.shape[0] > lam.shape[0]:
        raise ConfigError("tree has types beyond the weight vector")
    return int(lam[: counts.shape[0]] @ counts)


# -- blobs, reduction, flattening -------------------------------------------


@dataclass(frozen=True, eq=False)
class Blobs:
    """Blob decomposition of a multitype tree rooted at type 1.

    owner[v] is the type-1 vertex whose blob v belongs to in the reported
    partition: type-1 vertices own the blob they root, every other vertex
    belongs to its nearest type-1 ancestor's blob. Frontier type-1 vertices
    additionally appear in their parent blob; that double role is exposed
    through `frontier` rather than the partition.
    """

    tree: MultitypeTree
    owner: np.ndarray
    type1_vertices: np.ndarray

    def members(self, x):
        """Partition members of the blob rooted at type-1 vertex x (includes x)."""
        return np.flatnonzero(self.owner == x)

    def frontier(self, x):
        """Type-1 vertices whose nearest type-1 proper ancestor is x, in DFS order."""
        t1 = self.type1_vertices
        nta = self._nta
        return t1[nta[t1] == x]

    def partition_sizes(self):
        """Blob sizes per type-1 vertex: 1 + number of owned non-type-1 vertices."""
        sizes = np.bincount(self.owner, minlength=self.tree.size)
        return sizes[self.type1_vertices]

    @property
    def _nta(self):
        return _kernels.nearest_type1_ancestor(self.tree.parents, self.tree.types)


def blobs(tree):
    """Blob partition of a type-1-rooted multitype tree."""
    if tree.root_type != 1:
        raise RootTypeError("blob decomposition requires root type 1")
    nta = _kernels.nearest_type1_ancestor(tree.parents, tree.types)
    is1 = tree.types == 1
    owner = np.where(is1, np.arange(tree.size), nta)
    return Blobs(tree, _freeze(owner), _freeze(np.flatnonzero(is1)))


def reduce_tree(tree):
    """Monotype tree induced on the type-1 vertices, preserving lexicographic order.

    Returns (reduced: PlaneTree, pi) where pi[j] is the original index of the
    j-th reduced vertex.
    """
    if tree.root_type != 1:
        raise RootTypeError("reduction requires root type 1")
    nta = _kernels.nearest_type1_ancestor(tree.parents, tree.types)
    t1 = np.flatnonzero(tree.types == 1)
    rank = np.full(tree.size, -1, dtype=np.int64)
    rank[t1] = np.arange(t1.shape[0])
    red_parents = np.full(t1.shape[0], -1, dtype=np.int64)
    red_parents[1:] = rank[nta[t1[1:]]]
    return PlaneTree(red_parents), _freeze(t1)


@dataclass(frozen=True)
class FlatTree:
    """A multitype tree in which only type-1 vertices reproduce.

    Children of a type-1 vertex carry nondecreasing types; every vertex of
    type != 1 is a leaf.
    """

    tree: MultitypeTree

    def __post_init__(self):
        t = self.tree
        if t.root_type != 1:
            raise RootTypeError("flat trees have root type 1")
        if t.size > 1:
            par = t.parents[1:]
            if np.any(t.types[par] != 1):
                raise ConfigError("non-type-1 vertices must be leaves in a flat tree")
            # siblings carry nondecreasing types: children of v are consecutive
            # in index order only per parent; check via sorting by parent
            order = np.argsort(par, kind="stable")
            ptypes = t.types[1:][order]
            same = par[order][1:] == par[order][:-1]
            if np.any(same & (np.diff(ptypes) < 0)):
                raise ConfigError("sibling types must be nondecreasing in a flat tree")

    @property
    def size(self):
        return self.tree.size

    @property
    def parents(self):
        return self.tree.parents

    @property
    def types(self):
        return self.tree.types


def flatten(tree):
    """Reattach every vertex to its nearest type-1 ancestor.

    Type counts are preserved; non-type-1 vertices become leaves; siblings are
    ordered by type, stably by original position within a type.
    """
    if tree.root_type != 1:
        raise RootTypeError("flattening requires root type 1")
    nta = _kernels.nearest_type1_ancestor(tree.parents, tree.types)
    n = tree.size
    is1 = tree.types == 1
    # every non-root vertex hangs under its nearest type-1 ancestor; siblings
    # sorted by type (type-1 first), stably by original index within a type
    t1 = np.flatnonzero(is1)
    kids = {int(x): [] for x in t1}
    for v in range(1, n):
        kids[int(nta[v])].append(v)
    for x in kids:
        kids[x].sort(key=lambda v: int(tree.types[v]))
    new_parents = np.empty(n, dtype=np.int64)
    new_types = np.empty(n, dtype=np.int64)
    new_index = np.full(n, -1, dtype=np.int64)
    new_parents[0] = -1
    new_types[0] = 1
    new_index[0] = 0
    m = 1
    stack = [(0, iter(kids[0]))]
    while stack:
        x, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            continue
        new_index[child] = m
        new_parents[m] = new_index[x]
        new_types[m] = tree.types[child]
        m += 1
        if tree.types[child] == 1:
            stack.append((child, iter(kids[child])))
    return FlatTree(tree_from_arrays(new_parents, new_types))


# -- degree sequences --------------------------------------------------------


@dataclass(frozen=True)
class DegreeSequence:
    """Multiset of (type, child-counts-by-type) records."""

    num_types: int
    entries: tuple  # of (type, counts tuple)

    def is_admissible(self):
        """Balance condition: children of type j match vertices of type j,
        with the root (type 1) unaccounted for."""
        for j in range(1, self.num_types + 1):
            produced = sum(c[j - 1] for _, c in self.entries)
            present = sum(1 for t, _ in self.entries if t == j)
            if produced != present - (1 if j == 1 else 0):
                return False
        return True

    def require_admissible(self):
        if not self.is_admissible():
            raise Inadmissible("degree sequence fails the balance condition")

    def monotype_degrees(self):
        """Outdegree list for a monotype sequence (num_types == 1)."""
        if self.num_types != 1:
            raise ConfigError("not a monotype degree sequence")
        return np.array([c[0] for _, c in self.entries], dtype=np.int64)


def degree_sequence(tree, num_types=None):
    """Degree sequence of a multitype tree (admissible by construction when
    the root has type 1)."""
    if num_types is None:
        num_types = int(tree.types.max())
    off, lst = tree.shape.children_csr()
    entries = []
    for v in range(tree.size):
        counts = [0] * num_types
        for c in lst[off[v]:off[v + 1]]:
            counts[int(tree.types[c]) - 1] += 1
        entries.append((int(tree.types[v]), tuple(counts)))
    return DegreeSequence(num_types, tuple(entries))


def n_d_counts(tree):
    """Map d -> number of type-1 vertices with exactly d type-1 children.

    For a bare PlaneTree every vertex counts and d is the outdegree.
    """
    if isinstance(tree, FlatTree):
        tree = tree.tree
    if isinstance(tree, PlaneTree):
        deg = tree.outdegrees()
        vals, cnt = np.unique(deg, return_counts=True)
        return {int(d): int(c) for d, c in zip(vals, cnt)}
    is1 = tree.types == 1
    par = tree.parents[1:]
    child_is1 = is1[1:]
    d = np.zeros(tree.size, dtype=np.int64)
    if tree.size > 1:
        np.add.at(d, par[child_is1], 1)
    vals, cnt = np.unique(d[is1], return_counts=True)
    return {int(x): int(c) for x, c in zip(vals, cnt)}


# -- decorations and blow-up ---------------------------------------------------


@dataclass(frozen=True)
class Decoration:
    """One decoration tree per type-1 vertex of a flat tree, in DFS order.

    entries[j] decorates the j-th type-1 vertex; it must be a multitype tree
    whose root has type 1, whose type-1 leaves (exactly the vertex's type-1
    child count) are its only type-1 vertices besides the root, and whose
    non-type-1 vertex counts match the vertex's child counts.
    """

    entries: tuple


def star_decoration(flat):
    """The identity decoration: each vertex's own children as a one-level tree."""
    t = flat.tree if isinstance(flat, FlatTree) else flat
    off, lst = t.shape.children_csr()
    entries = []
    for v in np.flatnonzero(t.types == 1):
        ctypes = [int(t.types[c]) for c in lst[off[v]:off[v + 1]]]
        parents = np.zeros(len(ctypes) + 1, dtype=np.int64)
        parents[0] = -1
        entries.append(tree_from_arrays(parents, np.array([1] + ctypes)))
    return Decoration(tuple(entries))


def induced_decoration(tree):
    """Decoration extracted from a tree's own blobs, so that blowing up its
    flattened tree reproduces the tree exactly."""
    if tree.root_type != 1:
        raise RootTypeError("decorations require root type 1")
    bl = blobs(tree)
    nta = bl._nta
    entries = []
    for x in bl.type1_vertices:
        # the full blob: x plus every vertex whose nearest type-1 proper
        # ancestor is x (non-type-1 members and type-1 frontier alike)
        members = np.flatnonzero((nta == x) | (np.arange(tree.size) == x))
        local = {int(v): i for i, v in enumerate(members)}
        parents = np.full(members.shape[0], -1, dtype=np.int64)
        for i, v in enumerate(members):
            if v == x:
                continue
            parents[i] = local[int(tree.parents[v])]
        entries.append(tree_from_arrays(parents, tree.types[members].copy()))
    return Decoration(tuple(entries))


def _check_decoration(entry, k_counts, num_types):
    """Validate membership of one decoration tree against child counts."""
    if entry.root_type != 1:
        return False
    counts = np.bincount(entry.types, minlength=num_types + 1)[1:]
    want_type1_leaves = k_counts[0]
    if counts[0] != want_type1_leaves + 1:
        return False
    for i in range(1, num_types):
        if (counts[i] if i < counts.shape[0] else 0) != k_counts[i]:
            return False
    deg = entry.shape.outdegrees()
    t1 = entry.types == 1
    t1_nonroot = t1.copy()
    t1_nonroot[0] = False
    if np.any(deg[t1_nonroot] != 0):
        return False  # internal type-1 vertex other than the root
    return True


def blow_up(flat, decoration):
    """Inverse of flattening: replace every type-1 vertex's child set by its
    decoration tree, gluing type-1 leaves to type-1 children in order.

    Returns (tree, phi) where phi[j] is the new index of the j-th type-1
    vertex of the flat tree.
    """
    t = flat.tree if isinstance(flat, FlatTree) else flat
    if t.root_type != 1:
        raise RootTypeError("blow-up requires root type 1")
    num_types = max(int(t.types.max()), max((int(e.types.max()) for e in decoration.entries), default=1))
    off, lst = t.shape.children_csr()
    t1 = np.flatnonzero(t.types == 1)
    if len(decoration.entries) != t1.shape[0]:
        raise DecorationMismatch("need one decoration per type-1 vertex")
    for j, x in enumerate(t1):
        ctypes = t.types[lst[off[x]:off[x + 1]]]
        k_counts = np.bincount(ctypes, minlength=num_types + 1)[1:]
        if not _check_decoration(decoration.entries[j], k_counts, num_types):
            raise DecorationMismatch(f"decoration {j} incompatible with vertex {int(x)}")
    shapes = decoration.entries
    sizes = np.array([e.size for e in shapes], dtype=np.int64)
    degs = np.array(
        [int(((e.types == 1).sum()) - 1) for e in shapes], dtype=np.int64
    )
    total = int(sizes.sum() - degs.sum())
    shape_off = np.zeros(len(shapes) + 1, dtype=np.int64)
    np.cumsum(sizes, out=shape_off[1:])
    shape_parents = np.concatenate([e.parents for e in shapes]) if shapes else np.empty(0, dtype=np.int64)
    shape_types = np.concatenate([e.types for e in shapes]) if shapes else np.empty(0, dtype=np.int64)
    parents, types, depth, phi = _kernels.blowup_build(
        np.arange(len(shapes), dtype=np.int64),
        shape_off,
        shape_parents.astype(np.int64),
        shape_types.astype(np.int64),
        total,
        int(sizes.max()),
        t1.shape[0],
    )
    return tree_from_arrays(parents, types), _freeze(phi)


# -- distances ----------------------------------------------------------------


class DistanceIndex:
    """O(1) last-common-ancestor and graph-distance queries.

    Euler tour plus a sparse-table range-minimum index, built in
    O(n log n); d(v, w) = h(v) + h(w) - 2 h(lca(v, w)).
    """

    def __init__(self, tree):
        shape = tree.shape if isinstance(tree, MultitypeTree) else tree
        self._depth = shape.depths()
        n = shape.size
        off, lst = shape.children_csr()
        tour = np.empty(max(2 * n - 1, 1), dtype=np.int64)
        first = np.full(n, -1, dtype=np.int64)
        ptr = off[:n].copy()
        v = 0
        tour[0] = 0
        first[0] = 0
        k = 1
        parents = shape.parents
        while k < 2 * n - 1:
            if ptr[v] < off[v + 1]:
                nxt = int(lst[ptr[v]])
                ptr[v] += 1
                v = nxt
                first[v] = k
            else:
                v = int(parents[v])
            tour[k] = v
            k += 1
        self._first = first
        levels = [self._depth[tour]]
        pos = [tour]
        size = tour.shape[0]
        j = 1
        while (1 << j) <= size:
            prev_d, prev_v = levels[-1], pos[-1]
            half = 1 << (j - 1)
            left_d, right_d = prev_d[: size - (1 << j) + 1], prev_d[half: size - half + 1]
            take_left = left_d <= right_d
            levels.append(np.where(take_left, left_d, right_d))
            pos.append(np.where(take_left, prev_v[: size - (1 << j) + 1], prev_v[half: size - half + 1]))
            j += 1
        self._levels = pos
        self._level_depths = levels

    def lca(self, v, w):
        a, b = int(self._first[v]), int(self._first[w])
        if a > b:
            a, b = b, a
        span = b - a + 1
        j = span.bit_length() - 1
        d1 = self._level_depths[j][a]
        d2 = self._level_depths[j][b - (1 << j) + 1]
        return int(self._levels[j][a] if d1 <= d2 else self._levels[j][b - (1 << j) + 1])

    def distance(self, v, w):
        u = self.lca(v, w)
        return int(self._depth[v] + self._depth[w] - 2 * self._depth[u])

    def height(self):
        return int(self._depth.max())


# -- serialization --------------------------------------------------------------


def to_text_line(tree):
    """One-line text form: "types:<csv> parents:<csv>" (parents of vertices 1..n-1)."""
    types = ",".join(str(int(t)) for t in tree.types)
    parents = ",".join(str(int(p)) for p in tree.parents[1:])
    return f"types:{types} parents:{parents}"


def from_text_line(line):
    try:
        tpart, ppart = line.strip().split(" ", 1)
        types = [int(x) for x in tpart.removeprefix("types:").split(",") if x != ""]
        parents = [-1] + [int(x) for x in ppart.removeprefix("parents:").split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"bad tree line: {exc}") from exc
    return tree_from_arrays(parents, types)


def tree_to_bytes(tree):
    """Binary form: little-endian u32 sequence n, parents[1..n-1], types[0..n-1]."""
    n = np.array([tree.size], dtype="<u4")
    return n.tobytes() + tree.parents[1:].astype("<u4").tobytes() + tree.types.astype("<u4").tobytes()


def tree_from_bytes(buf, offset=0):
    """Decode one tree; returns (tree, next_offset)."""
    n = int(np.frombuffer(buf, dtype="<u4", count=1, offset=offset)[0])
    body = np.frombuffer(buf, dtype="<u4", count=2 * n - 1, offset=offset + 4)
    parents = np.concatenate([[-1], body[: n - 1].astype(np.int64)])
    types = body[n - 1:].astype(np.int64)
    return tree_from_arrays(parents, types), offset + 4 + 4 * (2 * n - 1)


def write_profile_csv(path, values, header=("step", "value")):
    """Write an integer/float profile as (step, value) rows."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{v}\n")
