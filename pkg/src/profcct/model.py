"""Generic in-memory profile representation.

A profile is a compact calling context tree (CCT): every sampled call
path is merged into the tree by common prefix, so a node is "a frame in
context" and its id doubles as an index into parallel per-node arrays.
Metric values live next to the nodes; the original samples are kept as
monitoring points (a point may reference several contexts under role
labels, which is how data-centric profilers express alloc/use/reuse
tuples).

Construction is single-writer; a fully built Profile is treated as
immutable by every analysis and may be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import ArityError, DuplicateMetric, UnknownMetric

ROOT_FUNCTION = "«root»"

Value = int | float | None


class MetricKind(str, Enum):
    ADDITIVE = "additive"      # counters; inclusive/exclusive derivable
    SNAPSHOT = "snapshot"      # point-in-time readings; never summed over time
    DERIVED = "derived"        # formula results; float, never re-aggregated


class Aggregator(str, Enum):
    SUM = "sum"
    MIN = "min"
    MAX = "max"
    MEAN = "mean"


class NodeKind(str, Enum):
    CODE = "code"
    DATA_OBJECT = "data-object"


@dataclass(frozen=True, slots=True)
class Frame:
    """One code-mapping record: where a stack frame points.

    Frames are interned per profile; identical field tuples share one
    frame id. ``line == 0`` and ``address == 0`` mean unknown.
    """

    function_name: str = ""
    module_name: str = ""
    file_path: str = ""
    line: int = 0
    address: int = 0

    def __post_init__(self):
        if not self.function_name and not self.address:
            raise ValueError("frame requires a function name or an address")
        if self.line < 0 or self.address < 0:
            raise ValueError("frame line/address must be non-negative")

    @property
    def label(self) -> str:
        return self.function_name or f"0x{self.address:x}"

    @property
    def identity(self) -> tuple[str, str, str, int]:
        """Cross-profile matching key (address excluded)."""
        return (self.function_name, self.module_name, self.file_path, self.line)

    @property
    def function_key(self) -> tuple[str, str, str]:
        """Grouping key for flat and bottom-up views: one entry per
        function regardless of line or address."""
        return (self.module_name, self.file_path, self.function_name)

    @property
    def source(self) -> tuple[str, int] | None:
        if self.file_path and self.line:
            return (self.file_path, self.line)
        return None


@dataclass(frozen=True, slots=True)
class MetricDescriptor:
    name: str
    unit: str = ""
    kind: MetricKind = MetricKind.ADDITIVE
    aggregator: Aggregator = Aggregator.SUM


@dataclass
class ProfileMeta:
    name: str = ""
    collector: str = ""
    timestamp: str = ""
    properties: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class MonitoringPoint:
    """One recorded measurement: an ordered (role, node) tuple plus the
    per-metric values. Single-context points use the role "self"."""

    contexts: tuple[tuple[str, int], ...]
    values: tuple[Value, ...]


@dataclass(frozen=True, slots=True)
class ContextNode:
    """Materialized view of one CCT node (storage is columnar)."""

    id: int
    frame: int
    parent: int | None
    children: tuple[int, ...]
    kind: NodeKind
    values: tuple[Value, ...]


def _check_values(values: Sequence[Value], nmetrics: int) -> tuple[Value, ...]:
    if len(values) != nmetrics:
        raise ArityError(f"expected {nmetrics} metric values, got {len(values)}")
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool) or v < 0:
            raise ValueError(f"metric values must be non-negative numbers, got {v!r}")
    return tuple(values)


class Profile:
    """A calling context tree with metrics, frames, and monitoring points.

    Node ids are dense and topologically ordered (``parent(i) < i``,
    root is 0); analyses rely on that to run as array sweeps.
    """

    def __init__(self, meta: ProfileMeta | None = None,
                 metrics: Sequence[MetricDescriptor] = ()):
        seen: set[str] = set()
        for m in metrics:
            if m.name in seen:
                raise DuplicateMetric(f"duplicate metric name: {m.name!r}")
            seen.add(m.name)
        self.meta = meta if meta is not None else ProfileMeta()
        self.metrics: list[MetricDescriptor] = list(metrics)
        self._frames: list[Frame] = []
        self._frame_ids: dict[Frame, int] = {}
        root_frame = self.intern_frame(Frame(function_name=ROOT_FUNCTION))
        self._parent: list[int] = [-1]
        self._frame_of: list[int] = [root_frame]
        self._data_nodes: set[int] = set()
        self._values: list[list[Value]] = [[None] for _ in self.metrics]
        self._points: list[MonitoringPoint] = []
        # frame id -> child node id, per node; built lazily after deserialize
        self._child_map: list[dict[int, int]] | None = [{}]
        self._cache: dict = {}

    # -- basic accessors ------------------------------------------------

    @property
    def root(self) -> int:
        return 0

    @property
    def node_count(self) -> int:
        return len(self._parent)

    @property
    def frame_count(self) -> int:
        return len(self._frames)

    @property
    def points(self) -> list[MonitoringPoint]:
        return self._points

    def metric_index(self, name: str) -> int:
        for i, m in enumerate(self.metrics):
            if m.name == name:
                return i
        raise UnknownMetric(f"unknown metric: {name!r}")

    def metric(self, name_or_index: str | int) -> MetricDescriptor:
        if isinstance(name_or_index, int):
            if not 0 <= name_or_index < len(self.metrics):
                raise UnknownMetric(f"no metric index {name_or_index}")
            return self.metrics[name_or_index]
        return self.metrics[self.metric_index(name_or_index)]

    def frame(self, frame_id: int) -> Frame:
        return self._frames[frame_id]

    def frames(self) -> list[Frame]:
        return list(self._frames)

    def node_frame(self, node: int) -> Frame:
        return self._frames[self._frame_of[node]]

    def parent(self, node: int) -> int | None:
        p = self._parent[node]
        return None if p < 0 else p

    def node_kind(self, node: int) -> NodeKind:
        return NodeKind.DATA_OBJECT if node in self._data_nodes else NodeKind.CODE

    def node_values(self, node: int) -> tuple[Value, ...]:
        return tuple(col[node] for col in self._values)

    def value(self, node: int, metric_index: int) -> Value:
        return self._values[metric_index][node]

    def children(self, node: int) -> tuple[int, ...]:
        lists = self._cache.get("children")
        if lists is None:
            lists = [[] for _ in range(self.node_count)]
            parent = self._parent
            for i in range(1, self.node_count):
                lists[parent[i]].append(i)
            self._cache["children"] = lists
        return tuple(lists[node])

    def node(self, node: int) -> ContextNode:
        if not 0 <= node < self.node_count:
            raise IndexError(f"no node {node}")
        p = self._parent[node]
        return ContextNode(
            id=node,
            frame=self._frame_of[node],
            parent=None if p < 0 else p,
            children=self.children(node),
            kind=self.node_kind(node),
            values=self.node_values(node),
        )

    def path(self, node: int) -> tuple[int, ...]:
        """Frame ids from just below the root down to ``node``
        (empty for the root itself)."""
        out = []
        i = node
        while i > 0:
            out.append(self._frame_of[i])
            i = self._parent[i]
        out.reverse()
        return tuple(out)

    def path_frames(self, node: int) -> tuple[Frame, ...]:
        return tuple(self._frames[f] for f in self.path(node))

    def iter_nodes(self) -> Iterator[int]:
        return iter(range(self.node_count))

    def total(self, metric: str | int) -> int | float | None:
        """Whole-profile value: the sum of raw values for additive
        metrics, the root's raw value otherwise."""
        idx = metric if isinstance(metric, int) else self.metric_index(metric)
        if self.metrics[idx].kind is MetricKind.ADDITIVE:
            return int(self.raw_array(idx).sum())
        return self._values[idx][0]

    # -- construction ---------------------------------------------------

    def intern_frame(self, frame: Frame) -> int:
        fid = self._frame_ids.get(frame)
        if fid is None:
            fid = len(self._frames)
            self._frames.append(frame)
            self._frame_ids[frame] = fid
        return fid

    def _ensure_child_map(self) -> list[dict[int, int]]:
        if self._child_map is None:
            cmap: list[dict[int, int]] = [dict() for _ in range(self.node_count)]
            parent, frame_of = self._parent, self._frame_of
            for i in range(1, self.node_count):
                cmap[parent[i]][frame_of[i]] = i
            self._child_map = cmap
        return self._child_map

    def _intern_path(self, stack: Sequence[Frame],
                     leaf_kind: NodeKind = NodeKind.CODE) -> int:
        if not stack:
            raise ArityError("sample stack must be non-empty")
        cmap = self._ensure_child_map()
        node = 0
        for fr in stack:
            fid = self.intern_frame(fr)
            nxt = cmap[node].get(fid)
            if nxt is None:
                nxt = len(self._parent)
                self._parent.append(node)
                self._frame_of.append(fid)
                for col in self._values:
                    col.append(None)
                cmap[node][fid] = nxt
                cmap.append({})
            node = nxt
        if leaf_kind is NodeKind.DATA_OBJECT:
            self._data_nodes.add(node)
        return node

    def _bump(self, node: int, values: tuple[Value, ...]) -> None:
        for idx, v in enumerate(values):
            if v is None:
                continue
            col = self._values[idx]
            if self.metrics[idx].kind is MetricKind.ADDITIVE:
                col[node] = v if col[node] is None else col[node] + v
            else:
                col[node] = v

    def add_sample(self, stack: Sequence[Frame], values: Sequence[Value],
                   leaf_kind: NodeKind = NodeKind.CODE) -> int:
        """Merge one root-first stack into the tree and record a point.

        Reuses any existing prefix; additive metric values accumulate on
        the terminal node, snapshot values overwrite it. Returns the
        terminal node id.
        """
        vals = _check_values(values, len(self.metrics))
        node = self._intern_path(stack, leaf_kind)
        self._bump(node, vals)
        self._points.append(MonitoringPoint((("self", node),), vals))
        self._cache.clear()
        return node

    def add_sample_multi(self, contexts: Sequence[tuple[str, Sequence[Frame]]],
                         values: Sequence[Value]) -> tuple[int, ...]:
        """Record a multi-context point, e.g. (alloc, use, reuse) paths.

        Each stack is interned but node raw values are untouched; the
        measurement belongs to the tuple, not to any single node.
        """
        if not contexts:
            raise ArityError("multi-context sample needs at least one context")
        vals = _check_values(values, len(self.metrics))
        nodes = tuple(self._intern_path(stack) for _, stack in contexts)
        roles = tuple(role for role, _ in contexts)
        self._points.append(MonitoringPoint(tuple(zip(roles, nodes)), vals))
        self._cache.clear()
        return nodes

    def find_node(self, stack: Sequence[Frame]) -> int | None:
        """Resolve a root-first frame path to its node id, if present."""
        cmap = self._ensure_child_map()
        node = 0
        for fr in stack:
            fid = self._frame_ids.get(fr)
            if fid is None:
                return None
            nxt = cmap[node].get(fid)
            if nxt is None:
                return None
            node = nxt
        return node

    # -- columnar access for analyses ------------------------------------

    def parent_array(self) -> np.ndarray:
        arr = self._cache.get("parent")
        if arr is None:
            arr = np.asarray(self._parent, dtype=np.int64)
            arr.setflags(write=False)
            self._cache["parent"] = arr
        return arr

    def frame_array(self) -> np.ndarray:
        arr = self._cache.get("frame_of")
        if arr is None:
            arr = np.asarray(self._frame_of, dtype=np.int64)
            arr.setflags(write=False)
            self._cache["frame_of"] = arr
        return arr

    def raw_array(self, metric_index: int) -> np.ndarray:
        """Per-node raw values with missing read as 0 (additive use)."""
        key = ("raw", metric_index)
        arr = self._cache.get(key)
        if arr is None:
            col = self._values[metric_index]
            arr = np.asarray([0 if v is None else v for v in col], dtype=np.int64)
            arr.setflags(write=False)
            self._cache[key] = arr
        return arr

    def raw_float_array(self, metric_index: int) -> np.ndarray:
        """Per-node raw values as float64 with missing read as NaN
        (snapshot/derived use)."""
        key = ("rawf", metric_index)
        arr = self._cache.get(key)
        if arr is None:
            col = self._values[metric_index]
            arr = np.asarray([np.nan if v is None else v for v in col],
                             dtype=np.float64)
            arr.setflags(write=False)
            self._cache[key] = arr
        return arr

    def raw_column(self, metric_index: int) -> list[Value]:
        return self._values[metric_index]

    # -- derived-profile construction (used by derive/traverse) ----------

    def _replace_structure(self, parent: list[int], frame_of: list[int],
                           values: list[list[Value]],
                           points: list[MonitoringPoint],
                           data_nodes: set[int]) -> "Profile":
        out = Profile(ProfileMeta(self.meta.name, self.meta.collector,
                                  self.meta.timestamp, dict(self.meta.properties)),
                      self.metrics)
        out._frames = list(self._frames)
        out._frame_ids = dict(self._frame_ids)
        out._parent = parent
        out._frame_of = frame_of
        out._values = values
        out._points = points
        out._data_nodes = data_nodes
        out._child_map = None
        return out

    def with_metric(self, descriptor: MetricDescriptor,
                    column: Sequence[Value]) -> "Profile":
        """A structurally identical profile with one extra metric column.

        Existing points gain a missing entry for the new metric."""
        if len(column) != self.node_count:
            raise ArityError("derived column length must match node count")
        for m in self.metrics:
            if m.name == descriptor.name:
                raise DuplicateMetric(f"duplicate metric name: {descriptor.name!r}")
        out = Profile(ProfileMeta(self.meta.name, self.meta.collector,
                                  self.meta.timestamp, dict(self.meta.properties)),
                      list(self.metrics) + [descriptor])
        out._frames = list(self._frames)
        out._frame_ids = dict(self._frame_ids)
        out._parent = list(self._parent)
        out._frame_of = list(self._frame_of)
        out._values = [list(col) for col in self._values] + [list(column)]
        out._points = [MonitoringPoint(p.contexts, p.values + (None,))
                       for p in self._points]
        out._data_nodes = set(self._data_nodes)
        out._child_map = None
        return out


def new_profile(meta: ProfileMeta | None = None,
                metrics: Sequence[MetricDescriptor] = ()) -> Profile:
    """Create an empty profile holding only the synthetic root node."""
    return Profile(meta, metrics)
