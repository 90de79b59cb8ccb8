"""Single-profile tree analyses.

A ViewTree is the analyzed shape of one profile and one metric: the
top-down tree mirrors the CCT, the bottom-up tree merges reversed call
paths (callees as parents, callers as children), and the flat tree
groups by load module, file, and function. Trees are stored columnar
(parallel arrays indexed by view-node id, parents before children) so
the transforms stay array sweeps even on million-node profiles.

Values follow one recurrence per shape: top-down and bottom-up satisfy
inclusive == exclusive + sum(children inclusive); the flat tree nests
on exclusive values while its inclusive column uses union semantics
(a sample counts once per function even under recursion).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import _kernels
from .errors import (CallbackError, EmptyQuery, MergeError, RangeError,
                     UnknownMetric, UnknownMetricSemantics, ViewError)
from .model import (ROOT_FUNCTION, Frame, MetricDescriptor, MetricKind,
                    Profile)

OTHER_LABEL = "«other»"
ELLIPSIS_LABEL = "«…»"
DEEP_LABEL = "«deep»"
UNKNOWN_LABEL = "«unknown»"


class ViewKind(str, Enum):
    TOP_DOWN = "topdown"
    BOTTOM_UP = "bottomup"
    FLAT = "flat"


class Directive(Enum):
    KEEP = "keep"
    ELIDE = "elide"
    MERGE_WITH_PREVIOUS_SIBLING = "merge_with_previous_sibling"


@dataclass(frozen=True, slots=True)
class LabelEntry:
    """Display text plus the frame it stands for (code link, colors)
    and the cross-profile matching key."""

    text: str
    frame: Frame | None = None
    match: tuple = ()


def _root_label() -> LabelEntry:
    return LabelEntry(ROOT_FUNCTION, None, (ROOT_FUNCTION,))


class ViewTree:
    """Columnar view of one profile/metric under one shape."""

    def __init__(self, kind: ViewKind, metric: MetricDescriptor,
                 parent: np.ndarray, label_id: np.ndarray,
                 incl: np.ndarray, excl: np.ndarray,
                 labels: list[LabelEntry], profile: Profile | None = None):
        self.kind = kind
        self.metric = metric
        self.parent = parent
        self.label_id = label_id
        self.incl = incl
        self.excl = excl
        self.labels = labels
        self.profile = profile
        for arr in (parent, label_id, incl, excl):
            arr.setflags(write=False)
        self._cache: dict = {}

    # -- structure --------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def total(self):
        return self.incl[0].item()

    def depths(self) -> np.ndarray:
        arr = self._cache.get("depths")
        if arr is None:
            arr = _kernels.node_depths(self.parent)
            self._cache["depths"] = arr
        return arr

    def _label_rank(self) -> np.ndarray:
        rank = self._cache.get("rank")
        if rank is None:
            order = sorted(range(len(self.labels)),
                           key=lambda i: (self.labels[i].text, i))
            rank = np.empty(len(self.labels), dtype=np.int64)
            for pos, i in enumerate(order):
                rank[i] = pos
            self._cache["rank"] = rank
        return rank

    def _child_spans(self):
        spans = self._cache.get("spans")
        if spans is None:
            n = self.size
            sort_incl = np.asarray(self.incl, dtype=np.float64)
            sort_incl = np.nan_to_num(sort_incl, nan=0.0)
            rank = self._label_rank()[self.label_id]
            order = np.lexsort((rank, -sort_incl, self.parent))
            sorted_par = self.parent[order]
            ids = np.arange(n)
            left = np.searchsorted(sorted_par, ids, side="left")
            right = np.searchsorted(sorted_par, ids, side="right")
            spans = (order, left, right)
            self._cache["spans"] = spans
        return spans

    def children(self, node: int) -> list[int]:
        """Children ordered by descending inclusive, ties by label."""
        order, left, right = self._child_spans()
        return [int(i) for i in order[left[node]:right[node]]]

    # -- per-node accessors ------------------------------------------------

    def entry(self, node: int) -> LabelEntry:
        return self.labels[self.label_id[node]]

    def label(self, node: int) -> str:
        return self.entry(node).text

    def frame(self, node: int) -> Frame | None:
        return self.entry(node).frame

    def function_name(self, node: int) -> str:
        e = self.entry(node)
        return e.frame.function_name if e.frame is not None else e.text

    def source(self, node: int) -> tuple[str, int] | None:
        e = self.entry(node)
        return e.frame.source if e.frame is not None else None

    def weight(self, node: int):
        """Layout width basis: exclusive for flat trees (the only column
        that tiles under union-inclusive semantics), inclusive otherwise."""
        col = self.excl if self.kind is ViewKind.FLAT else self.incl
        v = col[node].item()
        return 0 if v != v else v  # NaN reads as no width

    def label_path(self, node: int) -> tuple[str, ...]:
        out = []
        i = node
        while i > 0:
            out.append(self.label(i))
            i = int(self.parent[i])
        out.reverse()
        return tuple(out)

    def match_path(self, node: int) -> tuple:
        out = []
        i = node
        while i > 0:
            out.append(self.entry(i).match)
            i = int(self.parent[i])
        out.reverse()
        return tuple(out)

    # -- extras protocol (overridden by diff/aggregate trees) -------------

    def _extra_columns(self) -> dict[str, np.ndarray]:
        return {}

    def _rebuild(self, parent, label_id, incl, excl, labels, extras,
                 residual_rows: dict[str, list] | None = None) -> "ViewTree":
        return ViewTree(self.kind, self.metric, parent, label_id, incl, excl,
                        labels, self.profile)


def _as_array(values, like: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=like.dtype)


def _frame_labels(profile: Profile) -> tuple[list[LabelEntry], np.ndarray]:
    labels = [LabelEntry(f.label, f, f.identity) for f in profile.frames()]
    return labels, profile.frame_array()


def _resolve_metric(profile: Profile, metric: str | int) -> int:
    if isinstance(metric, int):
        if not 0 <= metric < len(profile.metrics):
            raise UnknownMetric(f"no metric index {metric}")
        return metric
    return profile.metric_index(metric)


def _require_additive(desc: MetricDescriptor, what: str):
    if desc.kind is not MetricKind.ADDITIVE:
        raise UnknownMetricSemantics(
            f"{what} needs an additive metric; {desc.name!r} is {desc.kind.value}")


def _topdown(profile: Profile, midx: int, desc: MetricDescriptor) -> ViewTree:
    labels, label_id = _frame_labels(profile)
    parent = profile.parent_array()
    if desc.kind is MetricKind.ADDITIVE:
        raw = profile.raw_array(midx)
        incl = _kernels.accumulate_down(parent, raw)
        excl = raw
    else:
        raw = profile.raw_float_array(midx)
        incl = raw
        excl = raw
    return ViewTree(ViewKind.TOP_DOWN, desc, parent, label_id, incl, excl,
                    labels, profile)


def _function_key_table(profile: Profile):
    """Dense ids for (module, file, function) keys plus a representative
    frame per key (the first one interned)."""
    key_ids: dict[tuple, int] = {}
    rep: list[Frame] = []
    per_frame = np.empty(profile.frame_count, dtype=np.int64)
    for fid, frame in enumerate(profile.frames()):
        key = frame.function_key
        kid = key_ids.get(key)
        if kid is None:
            kid = len(rep)
            key_ids[key] = kid
            rep.append(frame)
        per_frame[fid] = kid
    return per_frame, rep


def _bottomup(profile: Profile, midx: int, desc: MetricDescriptor,
              inclusive: bool) -> ViewTree:
    _require_additive(desc, "the bottom-up view")
    per_frame, rep = _function_key_table(profile)
    node_keys = per_frame[profile.frame_array()]
    raw = profile.raw_array(midx)
    t_parent, t_key, t_incl, t_excl = _kernels.bottom_up_merge(
        profile.parent_array(), node_keys, raw, inclusive)
    labels = [_root_label()] + [
        LabelEntry(f.function_name or f.label, f, f.function_key) for f in rep
    ]
    label_id = t_key + 1  # key -1 (root) maps to entry 0
    return ViewTree(ViewKind.BOTTOM_UP, desc, t_parent, label_id,
                    t_incl, t_excl, labels, profile)


def _flat(profile: Profile, midx: int, desc: MetricDescriptor) -> ViewTree:
    _require_additive(desc, "the flat view")
    parent = profile.parent_array()
    frame_arr = profile.frame_array()
    raw = profile.raw_array(midx)
    incl = _kernels.accumulate_down(parent, raw)
    frames = profile.frames()
    n = profile.node_count

    levels = []  # (key_of_frame, key_count, rep_per_key)
    for key_fn in (lambda f: (f.module_name,),
                   lambda f: (f.module_name, f.file_path),
                   lambda f: f.function_key):
        ids: dict[tuple, int] = {}
        rep: list[Frame] = []
        per_frame = np.empty(len(frames), dtype=np.int64)
        for fid, fr in enumerate(frames):
            k = key_fn(fr)
            kid = ids.get(k)
            if kid is None:
                kid = len(rep)
                ids[k] = kid
                rep.append(fr)
            per_frame[fid] = kid
        levels.append((per_frame, len(rep), rep))

    total = int(incl[0])
    out_parent: list[int] = [-1]
    out_incl: list[int] = [total]
    out_excl: list[int] = [total]
    labels: list[LabelEntry] = [_root_label()]
    label_id: list[int] = [0]

    def level_values(per_frame: np.ndarray, nkeys: int):
        node_keys = per_frame[frame_arr].copy()
        # the synthetic root must never count as an occurrence of a key
        # (module "" is common), so give it a sentinel of its own
        node_keys[0] = nkeys
        exc = np.zeros(nkeys, dtype=np.int64)
        if n > 1:
            np.add.at(exc, node_keys[1:], raw[1:])
        top = _kernels.topmost_flags(parent, node_keys)
        top[0] = 0
        inc = np.zeros(nkeys, dtype=np.int64)
        picked = np.flatnonzero(top)
        if picked.size:
            np.add.at(inc, node_keys[picked], incl[picked])
        return node_keys, inc, exc

    mod_keys, mod_incl, mod_excl = level_values(*levels[0][:2])
    file_keys, file_incl, file_excl = level_values(*levels[1][:2])
    fn_keys, fn_incl, fn_excl = level_values(*levels[2][:2])

    # emit only keys referenced below the root, parents before children
    used_fn = sorted(set(fn_keys[1:].tolist()))
    fn_to_file: dict[int, int] = {}
    fn_to_mod: dict[int, int] = {}
    for i in range(1, n):
        k = int(fn_keys[i])
        if k not in fn_to_file:
            fn_to_file[k] = int(file_keys[i])
            fn_to_mod[k] = int(mod_keys[i])

    mod_node: dict[int, int] = {}
    file_node: dict[int, int] = {}
    for k in used_fn:
        mk, flk = fn_to_mod[k], fn_to_file[k]
        if mk not in mod_node:
            mod_node[mk] = len(out_parent)
            out_parent.append(0)
            out_incl.append(int(mod_incl[mk]))
            out_excl.append(int(mod_excl[mk]))
            rep = levels[0][2][mk]
            labels.append(LabelEntry(rep.module_name or UNKNOWN_LABEL, None,
                                     ("m", rep.module_name)))
            label_id.append(len(labels) - 1)
        if flk not in file_node:
            file_node[flk] = len(out_parent)
            out_parent.append(mod_node[mk])
            out_incl.append(int(file_incl[flk]))
            out_excl.append(int(file_excl[flk]))
            rep = levels[1][2][flk]
            labels.append(LabelEntry(rep.file_path or UNKNOWN_LABEL, None,
                                     ("f", rep.module_name, rep.file_path)))
            label_id.append(len(labels) - 1)
        out_parent.append(file_node[flk])
        out_incl.append(int(fn_incl[k]))
        out_excl.append(int(fn_excl[k]))
        rep = levels[2][2][k]
        labels.append(LabelEntry(rep.function_name or rep.label, rep,
                                 rep.function_key))
        label_id.append(len(labels) - 1)

    return ViewTree(ViewKind.FLAT, desc,
                    np.asarray(out_parent, dtype=np.int64),
                    np.asarray(label_id, dtype=np.int64),
                    np.asarray(out_incl, dtype=np.int64),
                    np.asarray(out_excl, dtype=np.int64),
                    labels, profile)


def compute_view(profile: Profile, metric: str | int,
                 kind: ViewKind | str = ViewKind.TOP_DOWN, *,
                 hooks=None, bottom_up_inclusive: bool = False) -> ViewTree:
    """Analyze one metric of one profile into the requested shape.

    Snapshot and derived metrics only support the top-down shape, where
    every node shows its raw value (inclusive == exclusive == raw).
    """
    kind = ViewKind(kind)
    midx = _resolve_metric(profile, metric)
    desc = profile.metrics[midx]
    if kind is ViewKind.TOP_DOWN:
        tree = _topdown(profile, midx, desc)
    elif kind is ViewKind.BOTTOM_UP:
        tree = _bottomup(profile, midx, desc, bottom_up_inclusive)
    else:
        tree = _flat(profile, midx, desc)
    visitors = _hook_visitors(hooks)
    for visitor in visitors:
        tree = traverse(tree, "pre", visitor)
    return tree


def _hook_visitors(hooks) -> list:
    if hooks is None:
        from .hooks import default_registry
        hooks = default_registry()
    return list(getattr(hooks, "visitors", ()))


# -- filtering (prune / depth truncation) ---------------------------------


def _filter_tree(tree: ViewTree, keep: np.ndarray, residual_text: str) -> ViewTree:
    """Drop subtrees where ``keep`` is False, folding every removal set
    under a common parent into one synthetic residual child."""
    n = tree.size
    keep = keep.copy()
    keep[0] = True
    parent = tree.parent
    # a node survives only if its whole ancestor chain survives; each
    # sweep pushes the cut one level deeper, so this converges in at
    # most tree-depth iterations
    while True:
        parent_ok = keep[parent]
        parent_ok[0] = True
        new = keep & parent_ok
        if np.array_equal(new, keep):
            break
        keep = new
    kept = np.flatnonzero(keep)
    if kept.size == n:
        return tree
    remap = -np.ones(n, dtype=np.int64)
    remap[kept] = np.arange(kept.size)

    # removal-set roots: dropped nodes whose parent survives
    dropped_roots = np.flatnonzero(~keep & keep[parent])
    res_parent: dict[int, dict] = {}
    for i in dropped_roots.tolist():
        p = int(parent[i])
        agg = res_parent.setdefault(p, {"incl": 0, "excl": 0, "rows": []})
        vi = tree.incl[i].item()
        ve = tree.excl[i].item()
        agg["incl"] += 0 if vi != vi else vi
        agg["excl"] += 0 if ve != ve else ve
        agg["rows"].append(i)

    new_parent = [int(remap[parent[i]]) if i else -1 for i in kept.tolist()]
    new_label = tree.label_id[kept].tolist()
    new_incl = tree.incl[kept].tolist()
    new_excl = tree.excl[kept].tolist()
    labels = list(tree.labels)
    labels.append(LabelEntry(residual_text, None, (residual_text,)))
    residual_label = len(labels) - 1

    extras = {name: col[kept].tolist()
              for name, col in tree._extra_columns().items()}
    residual_rows: dict[str, list] = {"parents": [], "sources": []}
    flat = tree.kind is ViewKind.FLAT
    for p in sorted(res_parent):
        agg = res_parent[p]
        new_parent.append(int(remap[p]))
        new_label.append(residual_label)
        new_incl.append(agg["incl"])
        # residual is a leaf: for shapes that nest on inclusive it must
        # carry the removed inclusive mass as its own exclusive value
        new_excl.append(agg["excl"] if flat else agg["incl"])
        residual_rows["parents"].append(int(remap[p]))
        residual_rows["sources"].append(agg["rows"])

    return tree._rebuild(
        np.asarray(new_parent, dtype=np.int64),
        np.asarray(new_label, dtype=np.int64),
        np.asarray(new_incl, dtype=tree.incl.dtype),
        np.asarray(new_excl, dtype=tree.excl.dtype),
        labels, extras, residual_rows)


def prune(tree: ViewTree, threshold: float) -> ViewTree:
    """Remove subtrees whose inclusive value is below
    ``threshold * root inclusive``; each removal set under a parent is
    replaced by one synthetic «other» child, so the root total is
    preserved exactly. A threshold of 1 keeps only the root."""
    if not (isinstance(threshold, (int, float)) and 0 <= threshold <= 1):
        raise RangeError(f"prune threshold must be in [0, 1], got {threshold!r}")
    total = tree.total
    if tree.size <= 1:
        return tree
    if threshold >= 1:
        keep = np.zeros(tree.size, dtype=bool)
    else:
        limit = threshold * (0 if total != total else total)
        incl = np.nan_to_num(np.asarray(tree.incl, dtype=np.float64), nan=0.0)
        keep = incl >= limit if threshold > 0 else np.ones(tree.size, dtype=bool)
    return _filter_tree(tree, keep, OTHER_LABEL)


def truncate_depth(tree: ViewTree, max_depth: int) -> ViewTree:
    """Cut the tree below ``max_depth`` levels under the root, folding
    deeper subtrees into «deep» residual leaves."""
    if max_depth < 1:
        raise RangeError(f"max depth must be >= 1, got {max_depth}")
    keep = tree.depths() <= max_depth
    return _filter_tree(tree, keep, DEEP_LABEL)


# -- recursion collapsing --------------------------------------------------


def collapse_recursion(tree: ViewTree) -> ViewTree:
    """Collapse maximal runs of consecutive nodes with the same function
    into one node labeled ``name (×k)``; only direct self-recursion runs
    collapse, mutual recursion is left alone. Top-down views only."""
    if tree.kind is not ViewKind.TOP_DOWN:
        raise ViewError("collapse_recursion applies to top-down views")
    fkey_ids: dict[tuple, int] = {}
    label_fkey = np.empty(len(tree.labels), dtype=np.int64)
    for i, entry in enumerate(tree.labels):
        key = entry.frame.function_key if entry.frame is not None else (entry.text,)
        kid = fkey_ids.get(key)
        if kid is None:
            kid = len(fkey_ids)
            fkey_ids[key] = kid
        label_fkey[i] = kid
    node_fkey = label_fkey[tree.label_id]

    if tree.incl.dtype.kind == "f":
        from ._kernels import _pure
        merge = _pure.collapse_merge
    else:
        merge = _kernels.collapse_merge
    t_parent, t_label, t_incl, t_excl, t_runlen, _ = merge(
        tree.parent, node_fkey, tree.label_id, tree.incl, tree.excl)

    labels = list(tree.labels)
    collapsed_label: dict[tuple[int, int], int] = {}
    label_col = t_label.tolist()
    run_col = t_runlen.tolist()
    for i in range(len(label_col)):
        k = run_col[i]
        if k <= 1:
            continue
        orig = label_col[i]
        key = (orig, k)
        new = collapsed_label.get(key)
        if new is None:
            base = tree.labels[orig]
            new = len(labels)
            labels.append(LabelEntry(f"{base.text} (×{k})", base.frame,
                                     base.match + ("×", k)))
            collapsed_label[key] = new
        label_col[i] = new

    return ViewTree(tree.kind, tree.metric, t_parent,
                    np.asarray(label_col, dtype=np.int64),
                    _as_array(t_incl, tree.incl), _as_array(t_excl, tree.excl),
                    labels, tree.profile)


# -- search -----------------------------------------------------------------


def search(tree: ViewTree, query: str) -> set[int]:
    """Node ids whose function name contains ``query``
    (case-insensitive substring)."""
    if not query:
        raise EmptyQuery("search query must be non-empty")
    q = query.lower()
    matched = np.asarray(
        [q in (e.frame.function_name if e.frame is not None else e.text).lower()
         for e in tree.labels], dtype=bool)
    hits = matched[tree.label_id]
    return {int(i) for i in np.flatnonzero(hits)}


# -- traversal with directives ----------------------------------------------


class _MutNode:
    __slots__ = ("lid", "incl", "excl", "kids")

    def __init__(self, lid, incl, excl):
        self.lid = lid
        self.incl = incl
        self.excl = excl
        self.kids: list[_MutNode] = []


class NodeView:
    """What a visitor callback sees for one node."""

    __slots__ = ("_rec", "_labels", "_path")

    def __init__(self, rec: _MutNode, labels: list[LabelEntry],
                 path: tuple[str, ...]):
        self._rec = rec
        self._labels = labels
        self._path = path

    @property
    def label(self) -> str:
        return self._labels[self._rec.lid].text

    @property
    def frame(self) -> Frame | None:
        return self._labels[self._rec.lid].frame

    @property
    def function_name(self) -> str:
        f = self.frame
        return f.function_name if f is not None else self.label

    @property
    def module_name(self) -> str:
        f = self.frame
        return f.module_name if f is not None else ""

    @property
    def file_path(self) -> str:
        f = self.frame
        return f.file_path if f is not None else ""

    @property
    def line(self) -> int:
        f = self.frame
        return f.line if f is not None else 0

    @property
    def inclusive(self):
        return self._rec.incl

    @property
    def exclusive(self):
        return self._rec.excl

    @property
    def path(self) -> tuple[str, ...]:
        return self._path

    @property
    def child_count(self) -> int:
        return len(self._rec.kids)

    @property
    def values(self):
        """Raw metric values (profile traversal only)."""
        return getattr(self._rec, "values", None)


def _merge_into(target: _MutNode, src: _MutNode) -> None:
    target.incl += src.incl
    target.excl += src.excl
    by_label = {k.lid: k for k in target.kids}
    for kid in src.kids:
        hit = by_label.get(kid.lid)
        if hit is not None:
            _merge_into(hit, kid)
        else:
            target.kids.append(kid)
            by_label[kid.lid] = kid


def _dedupe_kids(parent: _MutNode) -> None:
    seen: dict[int, _MutNode] = {}
    out = []
    for kid in parent.kids:
        hit = seen.get(kid.lid)
        if hit is None:
            seen[kid.lid] = kid
            out.append(kid)
        else:
            _merge_into(hit, kid)
    parent.kids = out


def _source_of(labels: list[LabelEntry], rec: _MutNode) -> tuple[str, int]:
    f = labels[rec.lid].frame
    return (f.file_path, f.line) if f is not None else ("", 0)


def _apply_directive(d, rec: _MutNode, parent: _MutNode | None,
                     labels: list[LabelEntry], path) -> None:
    if d is None or d is Directive.KEEP:
        return
    if d is Directive.ELIDE:
        if parent is None:
            raise MergeError("cannot elide the root node")
        idx = next(i for i, k in enumerate(parent.kids) if k is rec)
        parent.excl += rec.excl
        parent.kids[idx:idx + 1] = rec.kids
        _dedupe_kids(parent)
        return
    if d is Directive.MERGE_WITH_PREVIOUS_SIBLING:
        if parent is None:
            raise MergeError("the root node has no siblings")
        idx = next(i for i, k in enumerate(parent.kids) if k is rec)
        if idx == 0:
            raise MergeError(f"{labels[rec.lid].text!r} has no previous sibling")
        prev = parent.kids[idx - 1]
        if _source_of(labels, prev) != _source_of(labels, rec):
            raise MergeError(
                f"{labels[prev.lid].text!r} and {labels[rec.lid].text!r} "
                "map to different source lines")
        _merge_into(prev, rec)
        del parent.kids[idx]
        return
    raise ValueError(f"unknown directive {d!r}")


def _visit(visitor, rec, labels, path):
    try:
        return visitor(NodeView(rec, labels, path))
    except Exception as exc:
        if isinstance(exc, MergeError):
            raise
        raise CallbackError(f"visitor failed: {exc}",
                            path + (labels[rec.lid].text,)) from exc


def _walk(root: _MutNode, order: str, visitor, labels) -> None:
    # directives are applied on the way out so every node is visited
    # exactly once even when the structure changes around it
    stack: list[tuple] = [(root, None, (), False, None)]
    while stack:
        rec, parent, path, expanded, directive = stack.pop()
        if expanded:
            if order == "post":
                directive = _visit(visitor, rec, labels, path)
            _apply_directive(directive, rec, parent, labels, path)
            continue
        if order == "pre":
            directive = _visit(visitor, rec, labels, path)
        stack.append((rec, parent, path, True, directive))
        kid_path = path + (labels[rec.lid].text,)
        for kid in reversed(rec.kids):
            stack.append((kid, rec, kid_path, False, None))


def _tree_to_records(tree: ViewTree) -> _MutNode:
    n = tree.size
    recs = [
        _MutNode(int(tree.label_id[i]), tree.incl[i].item(), tree.excl[i].item())
        for i in range(n)
    ]
    order, left, right = tree._child_spans()
    for i in range(n):
        recs[i].kids = [recs[int(c)] for c in order[left[i]:right[i]]]
    return recs[0]


def _records_to_tree(tree: ViewTree, root: _MutNode) -> ViewTree:
    parent: list[int] = []
    label_id: list[int] = []
    incl: list = []
    excl: list = []
    stack: list[tuple[_MutNode, int]] = [(root, -1)]
    while stack:
        rec, par = stack.pop()
        idx = len(parent)
        parent.append(par)
        label_id.append(rec.lid)
        incl.append(rec.incl)
        excl.append(rec.excl)
        for kid in reversed(rec.kids):
            stack.append((kid, idx))
    return ViewTree(tree.kind, tree.metric,
                    np.asarray(parent, dtype=np.int64),
                    np.asarray(label_id, dtype=np.int64),
                    _as_array(incl, tree.incl), _as_array(excl, tree.excl),
                    list(tree.labels), tree.profile)


def traverse(tree_or_profile, order: str = "pre",
             visitor: Callable[[NodeView], Directive | None] | None = None):
    """Visit every node in pre or post order; the visitor may return a
    Directive (elide splices a node out re-parenting its children;
    merge_with_previous_sibling requires both nodes to map to the same
    source line). Returns the transformed tree (or rebuilt profile).
    """
    if order not in ("pre", "post"):
        raise ValueError(f"order must be 'pre' or 'post', got {order!r}")
    if visitor is None:
        visitor = lambda node: None
    if isinstance(tree_or_profile, Profile):
        from .rebuild import traverse_profile
        return traverse_profile(tree_or_profile, order, visitor)
    tree = tree_or_profile
    if tree._extra_columns():
        raise ViewError("traverse does not support diff or aggregate trees")
    root = _tree_to_records(tree)
    _walk(root, order, visitor, tree.labels)
    return _records_to_tree(tree, root)


# -- hot rows (CLI "top") ---------------------------------------------------


def hot_rows(tree: ViewTree, limit: int) -> list[tuple[int, int | float, float, str]]:
    """The heaviest rows of a view: (node, value, percent, label).

    Top-down ranks nodes by exclusive value; bottom-up ranks the level-1
    functions by their attributed totals; flat ranks functions by
    exclusive value.
    """
    total = tree.total
    if tree.kind is ViewKind.BOTTOM_UP:
        ids = [i for i in range(1, tree.size) if tree.parent[i] == 0]
        value = tree.incl
    elif tree.kind is ViewKind.FLAT:
        depths = tree.depths()
        ids = [i for i in range(1, tree.size) if depths[i] == 3]
        value = tree.excl
    else:
        ids = list(range(tree.size))
        value = tree.excl
    def sort_key(i):
        v = value[i].item()
        return (-(0 if v != v else v), tree.label(i))
    ids.sort(key=sort_key)
    base = total if isinstance(total, (int, float)) and total == total and total > 0 else 0
    out = []
    for i in ids[:max(limit, 0)]:
        v = value[i].item()
        if v != v:
            v = 0
        pct = 100.0 * v / base if base else 0.0
        out.append((i, v, pct, tree.label(i)))
    return out


def as_nested(tree: ViewTree, node: int = 0) -> dict:
    """Plain-dict rendering of a view (tests and debugging)."""
    return {
        "label": tree.label(node),
        "incl": tree.incl[node].item(),
        "excl": tree.excl[node].item(),
        "children": [as_nested(tree, c) for c in tree.children(node)],
    }
