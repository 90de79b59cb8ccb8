"""Pure-Python implementations of the tree kernels.

Every function here has a compiled twin in ``_ext``; both must produce
bit-identical outputs (trie node ids are assigned in first-creation
order while scanning nodes in ascending id order, so the construction
is deterministic regardless of backend).

All kernels assume topologically ordered node ids: parent[i] < i for
every non-root node and parent[0] == -1.
"""

from __future__ import annotations

import numpy as np


def accumulate_down(parent: np.ndarray, raw: np.ndarray) -> np.ndarray:
    """Subtree sums: out[i] = raw[i] + sum of raw over i's descendants."""
    incl = raw.tolist()
    par = parent.tolist()
    for i in range(len(incl) - 1, 0, -1):
        incl[par[i]] += incl[i]
    return np.asarray(incl, dtype=raw.dtype)


def node_depths(parent: np.ndarray) -> np.ndarray:
    """Depth of each node; the root has depth 0."""
    par = parent.tolist()
    depth = [0] * len(par)
    for i in range(1, len(par)):
        depth[i] = depth[par[i]] + 1
    return np.asarray(depth, dtype=np.int64)


def topmost_flags(parent: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """1 where no proper ancestor of the node carries the same key.

    Subtrees rooted at flagged nodes of one key are disjoint and cover
    every path containing the key, which gives union-style inclusive
    sums without double counting recursion.
    """
    n = len(parent)
    out = np.zeros(n, dtype=np.uint8)
    if n == 0:
        return out
    order = np.argsort(parent, kind="stable")
    sorted_parents = parent[order]
    left = np.searchsorted(sorted_parents, np.arange(n), side="left")
    right = np.searchsorted(sorted_parents, np.arange(n), side="right")
    key = keys.tolist()
    active: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        node, leaving = stack.pop()
        k = key[node]
        if leaving:
            active[k] -= 1
            continue
        seen = active.get(k, 0)
        if seen == 0:
            out[node] = 1
        active[k] = seen + 1
        stack.append((node, True))
        for idx in range(right[node] - 1, left[node] - 1, -1):
            stack.append((int(order[idx]), False))
    return out


def bottom_up_merge(parent: np.ndarray, keys: np.ndarray, raw: np.ndarray,
                    inclusive: bool = False):
    """Merge reversed call paths into a trie keyed by function key.

    For each node with a positive raw value, the chain of keys from the
    node up to (not including) the root is inserted leaf-first; every
    trie node on the chain adds the value to its flow (incl) and the
    chain end adds it to excl. With ``inclusive`` set, the chain is
    additionally inserted from the deepest occurrence of every distinct
    key on the path, so a mid-stack function collects every sample that
    passes through it (union semantics: one insertion per distinct key).

    Returns (t_parent, t_key, t_incl, t_excl) with the synthetic root at
    index 0 (key -1).
    """
    par = parent.tolist()
    key = keys.tolist()
    vals = raw.tolist()
    n = len(par)
    t_parent = [-1]
    t_key = [-1]
    t_incl = [0]
    t_excl = [0]
    children: dict[int, int] = {}

    def insert(start: int, v: int) -> None:
        t = 0
        j = start
        while j != 0:
            ck = (t << 32) | key[j]
            nt = children.get(ck)
            if nt is None:
                nt = len(t_parent)
                t_parent.append(t)
                t_key.append(key[j])
                t_incl.append(0)
                t_excl.append(0)
                children[ck] = nt
            t_incl[nt] += v
            t = nt
            j = par[j]
        t_excl[t] += v

    total = 0
    for i in range(1, n):
        v = vals[i]
        if v <= 0:
            continue
        total += v
        if not inclusive:
            insert(i, v)
            continue
        chain = []
        j = i
        while j != 0:
            chain.append(j)
            j = par[j]
        seen: set[int] = set()
        for j in chain:
            k = key[j]
            if k in seen:
                continue
            seen.add(k)
            insert(j, v)
    root_raw = vals[0]
    if root_raw > 0:
        total += root_raw
        t_excl[0] += root_raw
    t_incl[0] = total if not inclusive else (
        sum(t_incl[i] for i in range(1, len(t_parent)) if t_parent[i] == 0)
        + root_raw)
    return (np.asarray(t_parent, dtype=np.int64),
            np.asarray(t_key, dtype=np.int64),
            np.asarray(t_incl, dtype=np.int64),
            np.asarray(t_excl, dtype=np.int64))


def collapse_merge(parent: np.ndarray, fkey: np.ndarray, frame_of: np.ndarray,
                   incl: np.ndarray, excl: np.ndarray):
    """Collapse consecutive same-function-key parent/child chains.

    Rebuilds the tree as a trie: a node whose key equals its parent's
    key maps onto the parent's trie node; everything else becomes a
    trie child keyed by frame id (which also re-merges siblings whose
    paths became equal after collapsing).

    Returns (t_parent, t_frame, t_incl, t_excl, t_runlen, t_map) where
    t_runlen is the longest original run merged into each trie node and
    t_map maps original nodes to trie nodes.
    """
    par = parent.tolist()
    key = fkey.tolist()
    frame = frame_of.tolist()
    inc = incl.tolist()
    exc = excl.tolist()
    n = len(par)
    t_parent = [-1]
    t_frame = [frame[0] if n else -1]
    t_incl = [inc[0] if n else 0]
    t_excl = [exc[0] if n else 0]
    t_runlen = [1]
    children: dict[int, int] = {}
    tn = [0] * n
    run = [1] * n
    for i in range(1, n):
        p = par[i]
        tp = tn[p]
        if p != 0 and key[i] == key[p]:
            run[i] = run[p] + 1
            tn[i] = tp
            t_excl[tp] += exc[i]
            if run[i] > t_runlen[tp]:
                t_runlen[tp] = run[i]
        else:
            ck = (tp << 32) | frame[i]
            nt = children.get(ck)
            if nt is None:
                nt = len(t_parent)
                t_parent.append(tp)
                t_frame.append(frame[i])
                t_incl.append(0)
                t_excl.append(0)
                t_runlen.append(1)
                children[ck] = nt
            t_incl[nt] += inc[i]
            t_excl[nt] += exc[i]
            tn[i] = nt
    return (np.asarray(t_parent, dtype=np.int64),
            np.asarray(t_frame, dtype=np.int64),
            np.asarray(t_incl, dtype=np.int64),
            np.asarray(t_excl, dtype=np.int64),
            np.asarray(t_runlen, dtype=np.int64),
            np.asarray(tn, dtype=np.int64))
