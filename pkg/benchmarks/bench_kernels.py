#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallbacks.

Builds a synthetic calling context tree and times each kernel on both
backends, plus the end-to-end view transforms through the public API.

    python3 benchmarks/bench_kernels.py --nodes 1000000 --depth 20
"""

import argparse
import random
import time

import numpy as np

from profcct._kernels import _pure

try:
    from profcct._kernels import _ext
except ImportError:
    _ext = None


def synthetic_tree(n: int, max_depth: int, nkeys: int, seed: int = 1):
    rng = random.Random(seed)
    parent = np.empty(n, dtype=np.int64)
    depth = np.empty(n, dtype=np.int64)
    parent[0] = -1
    depth[0] = 0
    for i in range(1, n):
        # bias attachment toward recent nodes for realistic path depth
        p = rng.randrange(max(i - 64, 0), i) if rng.random() < 0.8 else rng.randrange(i)
        if depth[p] >= max_depth:
            p = parent[p]
        parent[i] = p
        depth[i] = depth[p] + 1
    keys = np.asarray([rng.randrange(nkeys) for _ in range(n)], dtype=np.int64)
    raw = np.asarray([rng.randrange(100) for _ in range(n)], dtype=np.int64)
    raw[0] = 0
    return parent, keys, raw


def timeit(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=200_000)
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--keys", type=int, default=2_000)
    args = ap.parse_args()

    parent, keys, raw = synthetic_tree(args.nodes, args.depth, args.keys)
    incl = _pure.accumulate_down(parent, raw)

    cases = [
        ("accumulate_down", lambda impl: (impl.accumulate_down, parent, raw)),
        ("node_depths", lambda impl: (impl.node_depths, parent)),
        ("topmost_flags", lambda impl: (impl.topmost_flags, parent, keys)),
        ("bottom_up_merge", lambda impl: (impl.bottom_up_merge, parent, keys, raw)),
        ("collapse_merge", lambda impl: (impl.collapse_merge, parent, keys,
                                         keys, incl, raw)),
    ]
    print(f"nodes={args.nodes} depth<={args.depth} keys={args.keys}")
    print(f"{'kernel':<18}{'pure':>10}{'ext':>10}{'speedup':>9}")
    for name, make in cases:
        t_pure, out_pure = timeit(*make(_pure))
        if _ext is None:
            print(f"{name:<18}{t_pure:>9.3f}s{'n/a':>10}")
            continue
        t_ext, out_ext = timeit(*make(_ext))
        first_pure = out_pure[0] if isinstance(out_pure, tuple) else out_pure
        first_ext = out_ext[0] if isinstance(out_ext, tuple) else out_ext
        assert np.array_equal(first_pure, first_ext), name
        ratio = t_pure / t_ext if t_ext > 0 else float("inf")
        print(f"{name:<18}{t_pure:>9.3f}s{t_ext:>9.3f}s{ratio:>8.1f}x")


if __name__ == "__main__":
    main()
