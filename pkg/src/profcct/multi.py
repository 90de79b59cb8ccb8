"""Analyses across profiles: aggregation, differentiation, correlation.

Nodes are matched across profiles by their frame-identity path
(function, module, file, line), never by node id. Identity-path sets
are prefix-closed, so a node present in both profiles automatically has
every ancestor present in both; anything under an unmatched ancestor
inherits its added/deleted tag because its own path is unmatched too.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (MetricMismatch, UnknownMetric, UnknownMetricSemantics,
                     UnknownPath, UnknownRole)
from .model import MetricKind, Profile, ProfileMeta
from .views import LabelEntry, ViewKind, ViewTree, compute_view

TAG_ADDED, TAG_DELETED, TAG_INCREASED, TAG_DECREASED, TAG_UNCHANGED = range(5)
TAG_NAMES = ("added", "deleted", "increased", "decreased", "unchanged")
TAG_DISPLAY = ("[A]", "[D]", "[+]", "[-]", "")


class _Keyed:
    """A view projected onto identity-path keys: a trie whose children
    are looked up by match key, with per-node value sums."""

    __slots__ = ("parent", "label", "incl", "excl", "kids")

    def __init__(self):
        self.parent = [-1]
        self.label: list[LabelEntry] = []
        self.incl: list = [0]
        self.excl: list = [0]
        self.kids: list[dict] = [{}]


def _project(tree: ViewTree) -> _Keyed:
    out = _Keyed()
    out.label = [tree.entry(0)]
    ri = tree.incl[0].item()
    re = tree.excl[0].item()
    out.incl[0] = 0 if ri != ri else ri
    out.excl[0] = 0 if re != re else re
    tn = [0] * tree.size
    parent = tree.parent
    for i in range(1, tree.size):
        p = tn[parent[i]]
        entry = tree.entry(i)
        nt = out.kids[p].get(entry.match)
        if nt is None:
            nt = len(out.parent)
            out.parent.append(p)
            out.label.append(entry)
            out.incl.append(0)
            out.excl.append(0)
            out.kids.append({})
            out.kids[p][entry.match] = nt
        vi = tree.incl[i].item()
        ve = tree.excl[i].item()
        out.incl[nt] += 0 if vi != vi else vi
        out.excl[nt] += 0 if ve != ve else ve
        tn[i] = nt
    return out


def _view_for(profile: Profile, index: int, metric: str,
              kind: ViewKind | str) -> ViewTree:
    try:
        return compute_view(profile, metric, kind)
    except UnknownMetric:
        name = profile.meta.name or f"profile #{index}"
        raise MetricMismatch(
            f"metric {metric!r} is absent from {name}") from None


def _check_kinds(profiles: Sequence[Profile], metric: str) -> MetricKind:
    kinds = []
    for i, p in enumerate(profiles):
        try:
            desc = p.metric(metric)
        except UnknownMetric:
            name = p.meta.name or f"profile #{i}"
            raise MetricMismatch(
                f"metric {metric!r} is absent from {name}") from None
        kinds.append(desc.kind)
    if len(set(kinds)) > 1:
        raise MetricMismatch(
            f"metric {metric!r} has mixed kinds across profiles: "
            f"{sorted({k.value for k in kinds})}")
    if kinds[0] is MetricKind.DERIVED:
        raise UnknownMetricSemantics(
            f"derived metric {metric!r} cannot be re-aggregated")
    return kinds[0]


# -- differentiation ---------------------------------------------------------


class DiffTree(ViewTree):
    """Union tree over two profiles with per-node tags and values.

    ``incl``/``excl`` hold the combined (m1 + m2) mass, which nests
    correctly and drives layout widths; the per-side values live in the
    m1/m2 columns with presence masks.
    """

    def __init__(self, kind, metric, parent, label_id, incl, excl, labels,
                 *, m1, m2, present1, present2, tag,
                 total1, total2, scale=1.0, derived=None):
        super().__init__(kind, metric, parent, label_id, incl, excl, labels)
        self.m1 = m1
        self.m2 = m2
        self.present1 = present1
        self.present2 = present2
        self.tag = tag
        self.total1 = total1
        self.total2 = total2
        self.scale = scale
        self.derived: dict[str, list] = dict(derived or {})
        for arr in (m1, m2, present1, present2, tag):
            arr.setflags(write=False)

    def with_derived(self, name: str, column: list) -> "DiffTree":
        out = DiffTree(self.kind, self.metric, self.parent, self.label_id,
                       self.incl, self.excl, self.labels,
                       m1=self.m1, m2=self.m2, present1=self.present1,
                       present2=self.present2, tag=self.tag,
                       total1=self.total1, total2=self.total2,
                       scale=self.scale, derived=self.derived)
        out.derived[name] = list(column)
        return out

    def tag_name(self, node: int) -> str:
        return TAG_NAMES[self.tag[node]]

    def tag_text(self, node: int) -> str:
        return TAG_DISPLAY[self.tag[node]]

    def value1(self, node: int):
        return self.m1[node].item() if self.present1[node] else None

    def value2(self, node: int):
        v = self.m2[node].item() if self.present2[node] else None
        return v if v is None or self.scale == 1.0 else v * self.scale

    def delta(self, node: int):
        if not (self.present1[node] and self.present2[node]):
            return None
        return self.value2(node) - self.value1(node)

    def ratio(self, node: int):
        if not (self.present1[node] and self.present2[node]):
            return None
        v1 = self.value1(node)
        return None if v1 == 0 else self.value2(node) / v1

    def _extra_columns(self):
        return {"m1": self.m1, "m2": self.m2, "present1": self.present1,
                "present2": self.present2, "tag": self.tag}

    def _rebuild(self, parent, label_id, incl, excl, labels, extras,
                 residual_rows=None):
        res = residual_rows or {"parents": [], "sources": []}
        m1 = list(extras["m1"])
        m2 = list(extras["m2"])
        p1 = list(extras["present1"])
        p2 = list(extras["present2"])
        tag = list(extras["tag"])
        for rows in res["sources"]:
            s1 = sum(self.m1[i].item() for i in rows if self.present1[i])
            s2 = sum(self.m2[i].item() for i in rows if self.present2[i])
            a1 = any(self.present1[i] for i in rows)
            a2 = any(self.present2[i] for i in rows)
            m1.append(s1)
            m2.append(s2)
            p1.append(a1)
            p2.append(a2)
            tag.append(_tag_of(a1, a2, s1, s2 * self.scale))
        return DiffTree(
            self.kind, self.metric, parent, label_id, incl, excl, labels,
            m1=np.asarray(m1, dtype=self.m1.dtype),
            m2=np.asarray(m2, dtype=self.m2.dtype),
            present1=np.asarray(p1, dtype=bool),
            present2=np.asarray(p2, dtype=bool),
            tag=np.asarray(tag, dtype=np.int8),
            total1=self.total1, total2=self.total2, scale=self.scale)


def _tag_of(present1: bool, present2: bool, v1, v2) -> int:
    if present1 and present2:
        if v2 > v1:
            return TAG_INCREASED
        if v2 < v1:
            return TAG_DECREASED
        return TAG_UNCHANGED
    return TAG_ADDED if present2 else TAG_DELETED


def diff(p1: Profile, p2: Profile, metric: str,
         kind: ViewKind | str = ViewKind.TOP_DOWN, *,
         normalize_by_total: bool = False) -> DiffTree:
    """Compare two profiles path by path under any view shape.

    Deltas are exact for integer metrics; ``normalize_by_total``
    rescales the second profile by total1/total2 before tagging (no
    rescaling ever happens silently).
    """
    kind = ViewKind(kind)
    _check_kinds((p1, p2), metric)
    k1 = _project(_view_for(p1, 0, metric, kind))
    k2 = _project(_view_for(p2, 1, metric, kind))
    total1 = k1.incl[0]
    total2 = k2.incl[0]
    scale = 1.0
    if normalize_by_total and total2:
        scale = total1 / total2

    parent: list[int] = []
    label_id: list[int] = []
    labels: list[LabelEntry] = []
    m1: list = []
    m2: list = []
    excl: list = []
    pr1: list[bool] = []
    pr2: list[bool] = []
    tag: list[int] = []

    # walk the union of the two tries; ids in pre-order, first-profile
    # children first so construction is deterministic
    stack: list[tuple[int | None, int | None, int]] = [(0, 0, -1)]
    while stack:
        n1, n2, par = stack.pop()
        idx = len(parent)
        parent.append(par)
        entry = k1.label[n1] if n1 is not None else k2.label[n2]
        labels.append(entry)
        label_id.append(idx)
        a1 = n1 is not None
        a2 = n2 is not None
        v1 = k1.incl[n1] if a1 else 0
        v2 = k2.incl[n2] if a2 else 0
        m1.append(v1)
        m2.append(v2)
        excl.append((k1.excl[n1] if a1 else 0) + (k2.excl[n2] if a2 else 0))
        pr1.append(a1)
        pr2.append(a2)
        if par < 0:
            tag.append(_tag_of(True, True, v1, v2 * scale))
        else:
            tag.append(_tag_of(a1, a2, v1, v2 * scale))
        kids: list[tuple[int | None, int | None, int]] = []
        if a1:
            for key, c1 in k1.kids[n1].items():
                c2 = k2.kids[n2].get(key) if a2 else None
                kids.append((c1, c2, idx))
        if a2:
            for key, c2 in k2.kids[n2].items():
                if not (a1 and key in k1.kids[n1]):
                    kids.append((None, c2, idx))
        stack.extend(reversed(kids))

    m1_arr = np.asarray(m1)
    m2_arr = np.asarray(m2)
    incl_arr = (np.where(np.asarray(pr1), m1_arr, 0)
                + np.where(np.asarray(pr2), m2_arr, 0))
    excl_arr = np.asarray(excl, dtype=incl_arr.dtype)
    par_arr = np.asarray(parent, dtype=np.int64)
    desc = p1.metric(metric)
    return DiffTree(
        kind, desc, par_arr, np.asarray(label_id, dtype=np.int64),
        incl_arr, excl_arr, labels,
        m1=m1_arr, m2=m2_arr,
        present1=np.asarray(pr1, dtype=bool),
        present2=np.asarray(pr2, dtype=bool),
        tag=np.asarray(tag, dtype=np.int8),
        total1=total1, total2=total2, scale=scale)


# -- aggregation -------------------------------------------------------------


class AggregateTree(ViewTree):
    """Union tree over many profiles with per-node value vectors."""

    def __init__(self, kind, metric, parent, label_id, incl, excl, labels,
                 *, vectors, stats, profile_names, missing_as_zero):
        super().__init__(kind, metric, parent, label_id, incl, excl, labels)
        self.vectors = vectors          # list of per-node lists (None = absent)
        self.stats = stats              # dict stat -> list
        self.profile_names = profile_names
        self.missing_as_zero = missing_as_zero

    def _extra_columns(self):
        # vectors are python lists; expose an index column so filters
        # can subset them
        return {"_vec_index": np.arange(self.size, dtype=np.int64)}

    def _rebuild(self, parent, label_id, incl, excl, labels, extras,
                 residual_rows=None):
        res = residual_rows or {"parents": [], "sources": []}
        index = list(extras["_vec_index"])
        vectors = [self.vectors[i] for i in index]
        for rows in res["sources"]:
            merged = [None] * len(self.profile_names)
            for i in rows:
                for j, v in enumerate(self.vectors[i]):
                    if v is not None:
                        merged[j] = (merged[j] or 0) + v
            vectors.append(merged)
        stats = _stats_for(vectors, self.missing_as_zero)
        return AggregateTree(self.kind, self.metric, parent, label_id, incl,
                             excl, labels, vectors=vectors, stats=stats,
                             profile_names=self.profile_names,
                             missing_as_zero=self.missing_as_zero)


def _stats_for(vectors, missing_as_zero: bool):
    sums, mins, maxs, means = [], [], [], []
    for vec in vectors:
        present = [v for v in vec if v is not None]
        if missing_as_zero:
            present = [0 if v is None else v for v in vec]
        if not present:
            sums.append(0)
            mins.append(None)
            maxs.append(None)
            means.append(None)
            continue
        sums.append(sum(present))
        mins.append(min(present))
        maxs.append(max(present))
        means.append(sum(present) / len(present))
    return {"sum": sums, "min": mins, "max": maxs, "mean": means}


def aggregate(profiles: Sequence[Profile], metric: str, *,
              missing_as_zero: bool = False) -> AggregateTree:
    """Merge profiles into one tree; every node carries the vector of
    its per-profile inclusive values (input order preserved) plus
    sum/min/max/mean over the present entries."""
    if not profiles:
        raise ValueError("aggregate needs at least one profile")
    _check_kinds(profiles, metric)
    keyed = [_project(_view_for(p, i, metric, ViewKind.TOP_DOWN))
             for i, p in enumerate(profiles)]
    nprof = len(profiles)

    parent: list[int] = []
    label_id: list[int] = []
    labels: list[LabelEntry] = []
    vectors: list[list] = []
    evectors: list[list] = []

    stack: list[tuple[tuple, int]] = [(tuple(0 for _ in keyed), -1)]
    while stack:
        nodes, par = stack.pop()
        idx = len(parent)
        parent.append(par)
        entry = next(keyed[i].label[n] for i, n in enumerate(nodes)
                     if n is not None)
        labels.append(entry)
        label_id.append(idx)
        vec = [keyed[i].incl[n] if n is not None else None
               for i, n in enumerate(nodes)]
        evec = [keyed[i].excl[n] if n is not None else None
                for i, n in enumerate(nodes)]
        vectors.append(vec)
        evectors.append(evec)
        seen: dict = {}
        order: list = []
        for i, n in enumerate(nodes):
            if n is None:
                continue
            for key, child in keyed[i].kids[n].items():
                if key not in seen:
                    seen[key] = [None] * nprof
                    order.append(key)
                seen[key][i] = child
        for key in reversed(order):
            stack.append((tuple(seen[key]), idx))

    stats = _stats_for(vectors, missing_as_zero)
    estats = _stats_for(evectors, missing_as_zero)
    desc = profiles[0].metric(metric)
    stat = desc.aggregator.value
    incl = np.asarray([0 if v is None else v for v in stats[stat]],
                      dtype=np.float64 if stat == "mean" else np.int64)
    excl = np.asarray([0 if v is None else v for v in estats[stat]],
                      dtype=np.float64 if stat == "mean" else np.int64)
    names = [p.meta.name or f"profile #{i}" for i, p in enumerate(profiles)]
    return AggregateTree(ViewKind.TOP_DOWN, desc,
                         np.asarray(parent, dtype=np.int64),
                         np.asarray(label_id, dtype=np.int64),
                         incl, excl, labels,
                         vectors=vectors, stats=stats, profile_names=names,
                         missing_as_zero=missing_as_zero)


def resolve_path(tree: ViewTree, path: Sequence[str]) -> int | None:
    """Find the node whose label texts from below the root match
    ``path``; returns None when absent."""
    node = 0
    for text in path:
        found = None
        for child in tree.children(node):
            if tree.label(child) == text:
                found = child
                break
        if found is None:
            return None
        node = found
    return node


def histogram(agg: AggregateTree, node: int | Sequence[str],
              metric: str | None = None) -> list:
    """The per-profile value vector of one node, in input order
    (missing entries stay None, they are gaps, not zeros)."""
    if metric is not None and metric != agg.metric.name:
        raise UnknownMetric(
            f"aggregate holds {agg.metric.name!r}, not {metric!r}")
    if isinstance(node, (int, np.integer)):
        if not 0 <= node < agg.size:
            raise UnknownPath(f"no node {node} in the aggregate tree")
        idx = int(node)
    else:
        found = resolve_path(agg, list(node))
        if found is None:
            raise UnknownPath(";".join(node))
        idx = found
    return list(agg.vectors[idx])


# -- correlation -------------------------------------------------------------


def roles_of(profile: Profile) -> set[str]:
    roles: set[str] = set()
    for pt in profile.points:
        roles.update(role for role, _ in pt.contexts)
    return roles


def correlate(profile: Profile, anchor: int, from_role: str,
              to_role: str) -> Profile:
    """Project the monitoring points anchored at ``(from_role, anchor)``
    onto their ``to_role`` contexts.

    The result is a real sub-profile: its tree is the union of the
    to-role paths and each to-role node accumulates the values of the
    points that reached it. No matching points yields an empty
    projection, which is not an error.
    """
    present = roles_of(profile)
    for role in (from_role, to_role):
        if role not in present:
            raise UnknownRole(f"role {role!r} does not occur in this profile")
    if not 0 <= anchor < profile.node_count:
        raise UnknownPath(f"no node {anchor}")
    meta = ProfileMeta(
        name=f"{profile.meta.name or 'profile'}:{from_role}->{to_role}",
        collector=profile.meta.collector,
        timestamp=profile.meta.timestamp,
        properties=dict(profile.meta.properties))
    out = Profile(meta, profile.metrics)
    for pt in profile.points:
        if (from_role, anchor) not in pt.contexts:
            continue
        for role, node in pt.contexts:
            if role != to_role:
                continue
            out.add_sample(profile.path_frames(node), list(pt.values))
    return out
