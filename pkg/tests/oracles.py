"""Brute-force reference implementations used to freeze expected values.

Everything here works straight off raw sample lists (path tuples plus a
value) with plain dicts, independently of the package's columnar trees,
so the two routes can disagree when one of them is wrong.
"""

from __future__ import annotations

from collections import defaultdict


def prefixes(path):
    return [path[:i] for i in range(1, len(path) + 1)]


def topdown_oracle(samples):
    """Map every path (including the root, ()) to (inclusive, exclusive).

    inclusive(p) = sum of values of samples whose stack has p as prefix;
    exclusive(p) = sum of values of samples whose stack equals p.
    """
    incl: dict[tuple, int] = defaultdict(int)
    excl: dict[tuple, int] = defaultdict(int)
    for path, value in samples:
        excl[path] += value
        incl[()] += value
        for p in prefixes(path):
            incl[p] += value
    for p in list(incl):
        excl.setdefault(p, 0)
    return dict(incl), dict(excl)


def bottomup_oracle(samples, key=lambda frame: frame):
    """Merge reversed stacks into nested dicts.

    Returns {level1_key: (value, children_dict)} where children map the
    next caller key to (value carried along this reversed path, deeper
    callers). The per-path value is the exclusive value of the path, so
    the oracle first reduces samples to exact-path sums.
    """
    _, excl = topdown_oracle(samples)

    def insert(tree, chain, value):
        if not chain:
            return
        head = chain[0]
        node = tree.setdefault(head, [0, {}])
        node[0] += value
        insert(node[1], chain[1:], value)

    tree: dict = {}
    for path, value in excl.items():
        if not path or value == 0:
            continue
        insert(tree, [key(f) for f in reversed(path)], value)
    return tree


def bottomup_level1_oracle(samples, key=lambda frame: frame):
    return {k: v for k, (v, _) in bottomup_oracle(samples, key).items()}


def flat_oracle(samples, key=lambda frame: frame):
    """Per function key: exclusive = per-leaf sums, inclusive = union
    semantics, testing each sample for membership once per key."""
    excl: dict = defaultdict(int)
    incl: dict = defaultdict(int)
    for path, value in samples:
        if not path:
            continue
        excl[key(path[-1])] += value
        for k in {key(f) for f in path}:
            incl[k] += value
    for k in set(excl) | set(incl):
        excl.setdefault(k, 0)
        incl.setdefault(k, 0)
    return dict(incl), dict(excl)


def diff_oracle(samples1, samples2):
    """Tag every path in the union by plain set operations and
    per-path inclusive subtraction."""
    incl1, _ = topdown_oracle(samples1)
    incl2, _ = topdown_oracle(samples2)
    paths1 = {p for p in incl1 if p}
    paths2 = {p for p in incl2 if p}
    out = {}
    for p in paths1 | paths2:
        if p in paths1 and p in paths2:
            delta = incl2[p] - incl1[p]
            tag = "increased" if delta > 0 else "decreased" if delta < 0 else "unchanged"
            out[p] = (tag, incl1[p], incl2[p])
        elif p in paths2:
            out[p] = ("added", None, incl2[p])
        else:
            out[p] = ("deleted", incl1[p], None)
    return out


def aggregate_oracle(samples_list):
    """Per path: the vector of per-profile inclusive values (None where
    the path is absent) plus sum/min/max/mean over present entries."""
    incls = [topdown_oracle(s)[0] for s in samples_list]
    union = set()
    for inc in incls:
        union |= {p for p in inc if p}
    out = {}
    for p in union:
        vector = [inc.get(p) for inc in incls]
        present = [v for v in vector if v is not None]
        out[p] = {
            "vector": vector,
            "sum": sum(present),
            "min": min(present),
            "max": max(present),
            "mean": sum(present) / len(present),
        }
    return out


def layout_oracle(node, x0=0.0, x1=1.0, depth=0, out=None):
    """Recursive interval subdivision of a nested dict tree produced by
    ``views.as_nested``: children packed left-first inside the parent,
    widths proportional to inclusive value over the root total."""
    if out is None:
        out = []
        layout_oracle._total = node["incl"]
    out.append((node["label"], depth, x0, x1))
    total = layout_oracle._total
    x = x0
    for child in node["children"]:
        w = child["incl"] / total if total else 0.0
        layout_oracle(child, x, x + w, depth + 1, out)
        x += w
    return out
