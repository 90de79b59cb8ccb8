"""Structural traversal over a Profile that can rebuild it.

Profiles are immutable, so directive-bearing traversals (elide a
library's frames, merge line-equal nodes) produce a new Profile:
raw values fold into the absorbing node and monitoring points are
re-pointed at whatever node now carries their context.
"""

from __future__ import annotations

from .errors import MergeError
from .model import MetricKind, MonitoringPoint, NodeKind, Profile
from .views import Directive, _MutNode
from .views import _visit as _visit_cb


class _ProfNode(_MutNode):
    __slots__ = ("values", "orig", "data_object")

    def __init__(self, lid, values, orig):
        super().__init__(lid, 0, 0)
        self.values = values          # list, one slot per metric
        self.orig = [orig]            # original node ids carried here
        self.data_object = False


def _merge_values(profile: Profile, target: _ProfNode, src: _ProfNode) -> None:
    for idx, v in enumerate(src.values):
        if v is None:
            continue
        kind = profile.metrics[idx].kind
        cur = target.values[idx]
        if kind is MetricKind.ADDITIVE:
            target.values[idx] = v if cur is None else cur + v
        elif cur is None:
            target.values[idx] = v


def _merge_nodes(profile: Profile, target: _ProfNode, src: _ProfNode) -> None:
    _merge_values(profile, target, src)
    target.orig.extend(src.orig)
    target.data_object = target.data_object or src.data_object
    by_label = {k.lid: k for k in target.kids}
    for kid in src.kids:
        hit = by_label.get(kid.lid)
        if hit is not None:
            _merge_nodes(profile, hit, kid)
        else:
            target.kids.append(kid)
            by_label[kid.lid] = kid


def _source_of(profile: Profile, rec: _ProfNode):
    f = profile.frame(rec.lid)
    return (f.file_path, f.line)


def traverse_profile(profile: Profile, order: str, visitor):
    """Visit every CCT node; apply any directives by rebuilding."""
    n = profile.node_count
    recs = [
        _ProfNode(profile._frame_of[i], list(profile.node_values(i)), i)
        for i in range(n)
    ]
    for i in range(n):
        if profile.node_kind(i) is NodeKind.DATA_OBJECT:
            recs[i].data_object = True
    for i in range(1, n):
        recs[profile._parent[i]].kids.append(recs[i])

    frames = profile.frames()
    labels = _FrameLabels(frames)
    changed = False

    def apply(d, rec: _ProfNode, parent: _ProfNode | None, path):
        nonlocal changed
        if d is None or d is Directive.KEEP:
            return
        if d is Directive.ELIDE:
            if parent is None:
                raise MergeError("cannot elide the root node")
            idx = next(i for i, k in enumerate(parent.kids) if k is rec)
            _merge_values(profile, parent, rec)
            parent.orig.extend(rec.orig)
            parent.kids[idx:idx + 1] = rec.kids
            seen: dict[int, _ProfNode] = {}
            out = []
            for kid in parent.kids:
                hit = seen.get(kid.lid)
                if hit is None:
                    seen[kid.lid] = kid
                    out.append(kid)
                else:
                    _merge_nodes(profile, hit, kid)
            parent.kids = out
            changed = True
            return
        if d is Directive.MERGE_WITH_PREVIOUS_SIBLING:
            if parent is None:
                raise MergeError("the root node has no siblings")
            idx = next(i for i, k in enumerate(parent.kids) if k is rec)
            if idx == 0:
                raise MergeError("node has no previous sibling")
            prev = parent.kids[idx - 1]
            if _source_of(profile, prev) != _source_of(profile, rec):
                raise MergeError("nodes map to different source lines")
            _merge_nodes(profile, prev, rec)
            del parent.kids[idx]
            changed = True
            return
        raise ValueError(f"unknown directive {d!r}")

    stack = [(recs[0], None, (), False, None)]
    while stack:
        rec, parent, path, expanded, directive = stack.pop()
        if expanded:
            if order == "post":
                directive = _visit_cb(visitor, rec, labels, path)
            apply(directive, rec, parent, path)
            continue
        if order == "pre":
            directive = _visit_cb(visitor, rec, labels, path)
        stack.append((rec, parent, path, True, directive))
        kid_path = path + (labels[rec.lid].text,)
        for kid in reversed(rec.kids):
            stack.append((kid, rec, kid_path, False, None))

    if not changed:
        return profile

    # rebuild: pre-order walk assigning fresh ids, then remap points
    new_parent: list[int] = []
    new_frame: list[int] = []
    new_values: list[list] = [[] for _ in profile.metrics]
    data_nodes: set[int] = set()
    node_of_orig: dict[int, int] = {}
    walk = [(recs[0], -1)]
    while walk:
        rec, par = walk.pop()
        idx = len(new_parent)
        new_parent.append(par)
        new_frame.append(rec.lid)
        for m, col in enumerate(new_values):
            col.append(rec.values[m])
        if rec.data_object:
            data_nodes.add(idx)
        for orig in rec.orig:
            node_of_orig[orig] = idx
        for kid in reversed(rec.kids):
            walk.append((kid, idx))

    points = [
        MonitoringPoint(tuple((role, node_of_orig[node]) for role, node in p.contexts),
                        p.values)
        for p in profile.points
    ]
    return profile._replace_structure(new_parent, new_frame, new_values,
                                      points, data_nodes)


class _FrameLabels:
    """Adapter: lets NodeView read frame labels straight off a profile's
    frame table (frame id == label id during profile traversal)."""

    def __init__(self, frames):
        self._frames = frames

    def __getitem__(self, fid):
        from .views import LabelEntry
        f = self._frames[fid]
        return LabelEntry(f.label, f, f.identity)
