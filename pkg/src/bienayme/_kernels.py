"""Hot loops shared by tree construction and sampling.

Every function here is a plain-Python loop that numba can compile; when numba
is unavailable (or BIENAYME_NO_NUMBA is set) the same code runs interpreted,
so behaviour is identical either way. All tree arrays are int64, DFS order,
root at index 0, parent of root = -1, types 1-based.
"""

from __future__ import annotations

import os

import numpy as np

GROW_OK = 0
GROW_OVERFLOW = 1
GROW_ABORT = 2


def _maybe_njit(fn):
    if os.environ.get("BIENAYME_NO_NUMBA"):
        return fn
    try:
        from numba import njit
    except ImportError:
        return fn
    return njit(cache=True)(fn)


@_maybe_njit
def _cdf_pick(cdf, lo, hi, u):
    """Index in [lo, hi) of the first cdf entry >= u (binary search)."""
    a = lo
    b = hi - 1
    while a < b:
        mid = (a + b) // 2
        if u > cdf[mid]:
            a = mid + 1
        else:
            b = mid
    return a


@_maybe_njit
def depths_from_parents(parents):
    n = parents.shape[0]
    depth = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        depth[i] = depth[parents[i]] + 1
    return depth


@_maybe_njit
def nearest_type1_ancestor(parents, types):
    """Index of the nearest proper type-1 ancestor; -1 for the root."""
    n = parents.shape[0]
    nta = np.full(n, -1, dtype=np.int64)
    for i in range(1, n):
        p = parents[i]
        if types[p] == 1:
            nta[i] = p
        else:
            nta[i] = nta[p]
    return nta


@_maybe_njit
def tree_from_degrees(deg):
    """Parents and depths of the plane tree with the given DFS outdegrees.

    The sequence must satisfy the ladder condition (partial sums of deg - 1
    stay nonnegative until the final -1).
    """
    n = deg.shape[0]
    parents = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    stack_v = np.empty(n + 1, dtype=np.int64)  # open vertices
    stack_r = np.empty(n + 1, dtype=np.int64)  # their remaining child slots
    top = -1
    for j in range(1, n):
        if deg[j - 1] > 0:
            top += 1
            stack_v[top] = j - 1
            stack_r[top] = deg[j - 1]
        parents[j] = stack_v[top]
        depth[j] = depth[stack_v[top]] + 1
        stack_r[top] -= 1
        if stack_r[top] == 0:
            top -= 1
    return parents, depth


@_maybe_njit
def contour_walk(parents, depth, child_off, child_list):
    """Height profile along the depth-first contour walk: 2n - 1 values."""
    n = parents.shape[0]
    out = np.empty(2 * n - 1, dtype=np.int64)
    ptr = child_off[:n].copy()
    out[0] = 0
    k = 1
    v = 0
    while k < 2 * n - 1:
        if ptr[v] < child_off[v + 1]:
            nxt = child_list[ptr[v]]
            ptr[v] += 1
            v = nxt
        else:
            v = parents[v]
        out[k] = depth[v]
        k += 1
    return out


@_maybe_njit
def grow_tree(
    gen,
    root_type,
    type_word_lo,
    word_cdf,
    word_sym_off,
    word_syms,
    max_vertices,
    mode,
    lam,
    weight_cap,
    count_caps,
    parents,
    types,
):
    """Depth-first growth of a branching tree; returns (status, num_vertices).

    mode 0: plain growth up to max_vertices.
    mode 1: abort as soon as accumulated lambda-weight plus the lambda-weight
            of pending vertices exceeds weight_cap (early rejection cut).
    mode 2: abort as soon as the count of any capped type (count_caps >= 0)
            exceeds its cap.

    parents/types are caller-provided buffers of length max_vertices.
    """
    stack_p = np.empty(max_vertices + 2, dtype=np.int64)
    stack_t = np.empty(max_vertices + 2, dtype=np.int64)
    top = 0
    stack_p[0] = -1
    stack_t[0] = root_type
    m = 0
    weight = 0
    pending_weight = lam[root_type - 1]
    counts = np.zeros(lam.shape[0], dtype=np.int64)
    while top >= 0:
        par = stack_p[top]
        t = stack_t[top]
        top -= 1
        if m >= max_vertices:
            return GROW_OVERFLOW, m
        parents[m] = par
        types[m] = t
        if mode == 2:
            counts[t - 1] += 1
            if count_caps[t - 1] >= 0 and counts[t - 1] > count_caps[t - 1]:
                return GROW_ABORT, m + 1
        elif mode == 1:
            pending_weight -= lam[t - 1]
            weight += lam[t - 1]
        v = m
        m += 1
        wi = _cdf_pick(word_cdf, type_word_lo[t - 1], type_word_lo[t], gen.random())
        s0 = word_sym_off[wi]
        s1 = word_sym_off[wi + 1]
        if top + (s1 - s0) + 1 > max_vertices + 1:
            return GROW_OVERFLOW, m
        # push children in reverse so the leftmost is processed first
        for s in range(s1 - 1, s0 - 1, -1):
            ct = word_syms[s]
            top += 1
            stack_p[top] = v
            stack_t[top] = ct
            if mode == 1:
                pending_weight += lam[ct - 1]
        if mode == 1 and weight + pending_weight > weight_cap:
            return GROW_ABORT, m
    return GROW_OK, m


@_maybe_njit
def grow_stopped_blob(
    gen,
    type_word_lo,
    word_cdf,
    word_sym_off,
    word_syms,
    max_vertices,
    parents,
    types,
):
    """Grow a blob: root of type 1, non-root type-1 vertices frozen as leaves.

    Returns (status, num_vertices). The type profile can be read off types.
    """
    stack_p = np.empty(max_vertices + 2, dtype=np.int64)
    stack_t = np.empty(max_vertices + 2, dtype=np.int64)
    top = 0
    stack_p[0] = -1
    stack_t[0] = 1
    m = 0
    while top >= 0:
        par = stack_p[top]
        t = stack_t[top]
        top -= 1
        if m >= max_vertices:
            return GROW_OVERFLOW, m
        parents[m] = par
        types[m] = t
        v = m
        m += 1
        if t == 1 and v != 0:
            continue  # frontier: frozen
        wi = _cdf_pick(word_cdf, type_word_lo[t - 1], type_word_lo[t], gen.random())
        s0 = word_sym_off[wi]
        s1 = word_sym_off[wi + 1]
        if top + (s1 - s0) + 1 > max_vertices + 1:
            return GROW_OVERFLOW, m
        for s in range(s1 - 1, s0 - 1, -1):
            top += 1
            stack_p[top] = v
            stack_t[top] = word_syms[s]
    return GROW_OK, m


@_maybe_njit
def grow_flat_tree(
    gen,
    vec_cdf,
    vec_counts,
    max_vertices,
    parents,
    types,
):
    """Grow a flat tree: each type-1 vertex draws a child-count vector from
    the flattened law (rows of vec_counts, cdf vec_cdf); children appear in
    nondecreasing type order; non-type-1 vertices are leaves.

    Returns (status, num_vertices).
    """
    num_types = vec_counts.shape[1]
    nvec = vec_cdf.shape[0]
    stack_p = np.empty(max_vertices + 2, dtype=np.int64)
    stack_t = np.empty(max_vertices + 2, dtype=np.int64)
    top = 0
    stack_p[0] = -1
    stack_t[0] = 1
    m = 0
    while top >= 0:
        par = stack_p[top]
        t = stack_t[top]
        top -= 1
        if m >= max_vertices:
            return GROW_OVERFLOW, m
        parents[m] = par
        types[m] = t
        v = m
        m += 1
        if t != 1:
            continue
        vi = _cdf_pick(vec_cdf, 0, nvec, gen.random())
        total = 0
        for j in range(num_types):
            total += vec_counts[vi, j]
        if top + total + 1 > max_vertices + 1:
            return GROW_OVERFLOW, m
        for j in range(num_types - 1, -1, -1):
            for _ in range(vec_counts[vi, j]):
                top += 1
                stack_p[top] = v
                stack_t[top] = j + 1
    return GROW_OK, m


@_maybe_njit
def rejection_weight(
    gen,
    root_type,
    type_word_lo,
    word_cdf,
    word_sym_off,
    word_syms,
    max_vertices,
    lam,
    target,
    max_attempts,
    parents,
    types,
):
    """Grow until a tree with lambda-weight exactly `target` is accepted.

    Returns (accepted, num_vertices, attempts, overflows).
    """
    attempts = 0
    overflows = 0
    while attempts < max_attempts:
        attempts += 1
        status, m = grow_tree(
            gen,
            root_type,
            type_word_lo,
            word_cdf,
            word_sym_off,
            word_syms,
            max_vertices,
            1,
            lam,
            target,
            lam,
            parents,
            types,
        )
        if status == GROW_OVERFLOW:
            overflows += 1
            continue
        if status != GROW_OK:
            continue
        w = 0
        for i in range(m):
            w += lam[types[i] - 1]
        if w == target:
            return True, m, attempts, overflows
    return False, 0, attempts, overflows


@_maybe_njit
def rejection_counts(
    gen,
    root_type,
    type_word_lo,
    word_cdf,
    word_sym_off,
    word_syms,
    max_vertices,
    count_caps,
    max_attempts,
    parents,
    types,
):
    """Grow until a tree whose tracked type counts (count_caps >= 0) match
    exactly is accepted. Returns (accepted, num_vertices, attempts, overflows).
    """
    num_types = count_caps.shape[0]
    attempts = 0
    overflows = 0
    lam = np.zeros(num_types, dtype=np.int64)
    while attempts < max_attempts:
        attempts += 1
        status, m = grow_tree(
            gen,
            root_type,
            type_word_lo,
            word_cdf,
            word_sym_off,
            word_syms,
            max_vertices,
            2,
            lam,
            0,
            count_caps,
            parents,
            types,
        )
        if status == GROW_OVERFLOW:
            overflows += 1
            continue
        if status != GROW_OK:
            continue
        counts = np.zeros(num_types, dtype=np.int64)
        for i in range(m):
            counts[types[i] - 1] += 1
        ok = True
        for j in range(num_types):
            if count_caps[j] >= 0 and counts[j] != count_caps[j]:
                ok = False
                break
        if ok:
            return True, m, attempts, overflows
    return False, 0, attempts, overflows


@_maybe_njit
def dfs_order_ok(parents):
    """Check the preorder property: each vertex's parent lies on the current
    rightmost path."""
    n = parents.shape[0]
    if n == 0 or parents[0] != -1:
        return False
    chain = np.empty(n, dtype=np.int64)
    chain[0] = 0
    top = 0
    for i in range(1, n):
        p = parents[i]
        if p < 0 or p >= i:
            return False
        while top >= 0 and chain[top] != p:
            top -= 1
        if top < 0:
            return False
        top += 1
        chain[top] = i
    return True


@_maybe_njit
def blowup_build(
    shape_ids,
    shape_off,
    shape_parents,
    shape_types,
    total_vertices,
    max_shape_nodes,
    num_type1,
):
    """Assemble the blown-up tree from per-type-1-vertex decoration shapes.

    shape_ids[j] selects the decoration of the j-th type-1 vertex in
    depth-first order. Shapes are stored flat (DFS within each shape, parents
    local to the shape); their type-1 leaves are consumed in order as the
    roots of the following type-1 vertices. Returns (parents, types, depth,
    phi) where phi[j] is the blown-up index of the j-th type-1 vertex.
    """
    parents = np.empty(total_vertices, dtype=np.int64)
    types = np.empty(total_vertices, dtype=np.int64)
    depth = np.empty(total_vertices, dtype=np.int64)
    phi = np.empty(num_type1, dtype=np.int64)
    # one frame per type-1 vertex on the current path
    f_sid = np.empty(num_type1 + 1, dtype=np.int64)
    f_pos = np.empty(num_type1 + 1, dtype=np.int64)
    f_map = np.empty((num_type1 + 1, max_shape_nodes), dtype=np.int64)
    m = 0
    top = 0
    f_sid[0] = shape_ids[0]
    f_pos[0] = 0
    pending_parent = np.int64(-1)
    next_red = 1
    phi[0] = 0
    while top >= 0:
        sid = f_sid[top]
        lo = shape_off[sid]
        hi = shape_off[sid + 1]
        pos = f_pos[top]
        descended = False
        while pos < hi - lo:
            u = lo + pos
            if pos == 0:
                par = pending_parent
            else:
                par = f_map[top, shape_parents[u]]
            t = shape_types[u]
            f_map[top, pos] = m
            parents[m] = par
            types[m] = t
            depth[m] = 0 if par < 0 else depth[par] + 1
            m += 1
            pos += 1
            if t == 1 and pos > 1:
                # frontier leaf: it is the root of the next type-1 vertex's
                # decoration, so hand the just-emitted slot to a child frame
                f_pos[top] = pos
                phi[next_red] = m - 1
                top += 1
                f_sid[top] = shape_ids[next_red]
                f_pos[top] = 0
                next_red += 1
                m -= 1
                pending_parent = par
                descended = True
                break
        if descended:
            continue
        top -= 1
    return parents, types, depth, phi
