# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pure kernels; see _pure.py for the contracts.

Trie ids are assigned in first-creation order while scanning nodes in
ascending id order, exactly like the pure versions, so both backends
produce identical outputs.

The trie child lookup runs on an open-addressing flat map (linear
probing over one contiguous array) because node-based hash maps spend
most of their time on allocation and pointer chasing at these sizes.
"""

from libc.stdint cimport int64_t, uint8_t
from libcpp.vector cimport vector

import numpy as np

cdef extern from *:
    """
    #include <cstdint>
    #include <cstddef>
    #include <vector>

    namespace profcct {

    // open-addressing int64 -> int64 map; keys must be non-negative.
    // key and value share a slot so a probe costs one cache line.
    struct FlatMap {
        struct Slot { int64_t key; int64_t val; };
        std::vector<Slot> slots;
        uint64_t mask;
        size_t count;

        explicit FlatMap(size_t expected) {
            size_t cap = 16;
            while (cap < expected * 2) cap <<= 1;
            slots.assign(cap, Slot{-1, 0});
            mask = cap - 1;
            count = 0;
        }

        static inline uint64_t mix(int64_t key) {
            uint64_t h = (uint64_t)key * 0x9E3779B97F4A7C15ull;
            return h ^ (h >> 29);
        }

        void grow() {
            std::vector<Slot> old;
            old.swap(slots);
            size_t cap = (mask + 1) * 2;
            slots.assign(cap, Slot{-1, 0});
            mask = cap - 1;
            for (size_t j = 0; j < old.size(); ++j) {
                if (old[j].key < 0) continue;
                size_t i = mix(old[j].key) & mask;
                while (slots[i].key >= 0) i = (i + 1) & mask;
                slots[i] = old[j];
            }
        }

        // returns the existing value, or inserts `fresh` and returns it
        inline int64_t get_or_insert(int64_t key, int64_t fresh, int* inserted) {
            if ((count + 1) * 10 >= (mask + 1) * 7) grow();
            size_t i = mix(key) & mask;
            while (slots[i].key >= 0) {
                if (slots[i].key == key) { *inserted = 0; return slots[i].val; }
                i = (i + 1) & mask;
            }
            slots[i].key = key;
            slots[i].val = fresh;
            ++count;
            *inserted = 1;
            return fresh;
        }
    };

    // one bottom-up trie node; fields share a cache line so the flow
    // update after a child lookup is nearly free
    struct TNode { int64_t parent; int64_t key; int64_t incl; int64_t excl; };
    inline TNode make_tnode(int64_t parent, int64_t key) {
        return TNode{parent, key, 0, 0};
    }

    }  // namespace profcct
    """
    cdef cppclass FlatMap "profcct::FlatMap":
        FlatMap(size_t expected) except +
        int64_t get_or_insert(int64_t key, int64_t fresh, int* inserted) nogil
    cdef cppclass TNode "profcct::TNode":
        int64_t parent
        int64_t key
        int64_t incl
        int64_t excl
    TNode make_tnode "profcct::make_tnode"(int64_t parent, int64_t key) nogil


def accumulate_down(parent, raw):
    cdef const int64_t[:] par = parent
    out_arr = np.array(raw, dtype=np.int64)
    cdef int64_t[:] out = out_arr
    cdef Py_ssize_t i
    for i in range(par.shape[0] - 1, 0, -1):
        out[par[i]] += out[i]
    return out_arr


def node_depths(parent):
    cdef const int64_t[:] par = parent
    cdef Py_ssize_t n = par.shape[0]
    out_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[:] out = out_arr
    cdef Py_ssize_t i
    for i in range(1, n):
        out[i] = out[par[i]] + 1
    return out_arr


def topmost_flags(parent, keys):
    cdef const int64_t[:] par = parent
    cdef const int64_t[:] key = keys
    cdef Py_ssize_t n = par.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[:] out = out_arr
    cdef Py_ssize_t i
    cdef int64_t j, k
    cdef uint8_t flag
    for i in range(n):
        k = key[i]
        j = par[i]
        flag = 1
        while j >= 0:
            if key[j] == k:
                flag = 0
                break
            j = par[j]
        out[i] = flag
    return out_arr


cdef inline int64_t _trie_child(vector[TNode]& trie,
                                vector[int64_t]& level1,
                                FlatMap* children,
                                int64_t t, int64_t k) noexcept nogil:
    # level-1 children (one per key) get a direct index; deeper levels
    # share the flat map keyed (trie id, key)
    cdef int64_t nt
    cdef int inserted
    if t == 0:
        nt = level1[k]
        if nt >= 0:
            return nt
        nt = <int64_t>trie.size()
        level1[k] = nt
    else:
        nt = children.get_or_insert((t << 32) | k,
                                    <int64_t>trie.size(), &inserted)
        if not inserted:
            return nt
    trie.push_back(make_tnode(t, k))
    return nt


cdef void _bu_insert(const int64_t[:] par, const int64_t[:] key,
                     vector[TNode]& trie, vector[int64_t]& level1,
                     FlatMap* children,
                     int64_t start, int64_t v) noexcept nogil:
    cdef int64_t t = 0
    cdef int64_t j = start
    while j != 0:
        t = _trie_child(trie, level1, children, t, key[j])
        trie[t].incl += v
        j = par[j]
    trie[t].excl += v


def bottom_up_merge(parent, keys, raw, inclusive=False):
    cdef const int64_t[:] par = parent
    cdef const int64_t[:] key = keys
    cdef const int64_t[:] vals = raw
    cdef Py_ssize_t n = par.shape[0]
    cdef int64_t nkeys = 0
    cdef Py_ssize_t idx
    for idx in range(n):
        if key[idx] >= nkeys:
            nkeys = key[idx] + 1
    cdef vector[TNode] trie
    cdef vector[int64_t] chain
    cdef vector[int64_t] level1
    level1.resize(nkeys, -1)
    cdef FlatMap* children = new FlatMap(<size_t>n)
    trie.reserve(n)
    trie.push_back(make_tnode(-1, -1))
    cdef bint incl_mode = bool(inclusive)
    cdef int64_t total = 0, v, j, k
    cdef Py_ssize_t i, p, q
    cdef bint dup
    try:
        for i in range(1, n):
            v = vals[i]
            if v <= 0:
                continue
            total += v
            if not incl_mode:
                _bu_insert(par, key, trie, level1, children, i, v)
                continue
            chain.clear()
            j = i
            while j != 0:
                chain.push_back(j)
                j = par[j]
            for p in range(<Py_ssize_t>chain.size()):
                k = key[chain[p]]
                dup = False
                for q in range(p):
                    if key[chain[q]] == k:
                        dup = True
                        break
                if dup:
                    continue
                _bu_insert(par, key, trie, level1, children, chain[p], v)
    finally:
        del children
    cdef int64_t root_raw = vals[0] if n else 0
    if root_raw > 0:
        total += root_raw
        trie[0].excl += root_raw
    cdef int64_t level1_sum = 0
    cdef Py_ssize_t m = trie.size()
    if incl_mode:
        for i in range(1, m):
            if trie[i].parent == 0:
                level1_sum += trie[i].incl
        trie[0].incl = level1_sum + root_raw
    else:
        trie[0].incl = total
    t_parent_arr = np.empty(m, dtype=np.int64)
    t_key_arr = np.empty(m, dtype=np.int64)
    t_incl_arr = np.empty(m, dtype=np.int64)
    t_excl_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[:] tp = t_parent_arr
    cdef int64_t[:] tk = t_key_arr
    cdef int64_t[:] ti = t_incl_arr
    cdef int64_t[:] te = t_excl_arr
    for i in range(m):
        tp[i] = trie[i].parent
        tk[i] = trie[i].key
        ti[i] = trie[i].incl
        te[i] = trie[i].excl
    return (t_parent_arr, t_key_arr, t_incl_arr, t_excl_arr)


cdef _as_array(vector[int64_t]& v):
    cdef Py_ssize_t m = v.size()
    out_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[:] out = out_arr
    cdef Py_ssize_t i
    for i in range(m):
        out[i] = v[i]
    return out_arr


def collapse_merge(parent, fkey, frame_of, incl, excl):
    cdef const int64_t[:] par = parent
    cdef const int64_t[:] key = fkey
    cdef const int64_t[:] frame = frame_of
    cdef const int64_t[:] inc = incl
    cdef const int64_t[:] exc = excl
    cdef Py_ssize_t n = par.shape[0]
    cdef vector[int64_t] t_parent, t_frame, t_incl, t_excl, t_runlen
    cdef FlatMap* children = new FlatMap(<size_t>n)
    t_parent.push_back(-1)
    t_frame.push_back(frame[0] if n else -1)
    t_incl.push_back(inc[0] if n else 0)
    t_excl.push_back(exc[0] if n else 0)
    t_runlen.push_back(1)
    tn_arr = np.zeros(n, dtype=np.int64)
    run_arr = np.ones(n, dtype=np.int64)
    cdef int64_t[:] tn = tn_arr
    cdef int64_t[:] run = run_arr
    cdef Py_ssize_t i
    cdef int64_t p, tp, nt
    cdef int inserted
    try:
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
                nt = children.get_or_insert((tp << 32) | frame[i],
                                            <int64_t>t_parent.size(),
                                            &inserted)
                if inserted:
                    t_parent.push_back(tp)
                    t_frame.push_back(frame[i])
                    t_incl.push_back(0)
                    t_excl.push_back(0)
                    t_runlen.push_back(1)
                t_incl[nt] += inc[i]
                t_excl[nt] += exc[i]
                tn[i] = nt
    finally:
        del children
    return (_as_array(t_parent), _as_array(t_frame), _as_array(t_incl),
            _as_array(t_excl), _as_array(t_runlen), tn_arr)
