"""Native binary container: "PCCT" magic, u16 version, u32 length,
then one UTF-8 JSON document.

The document is written canonically (sorted keys, no whitespace), so
serializing the same profile twice yields identical bytes. Node ids may
be renumbered on load; paths, frames, values, and points survive.
"""

from __future__ import annotations

import json
import operator
import struct
from collections import deque

import numpy as np

try:
    from msgspec import json as _fastjson
except ImportError:  # stdlib json still covers everything, just slower
    _fastjson = None

from .errors import FormatError
from .model import (Aggregator, Frame, MetricDescriptor, MetricKind,
                    MonitoringPoint, NodeKind, Profile, ProfileMeta)

MAGIC = b"PCCT"
VERSION = 1
_HEADER = struct.Struct("<4sHI")


def serialize(profile: Profile) -> bytes:
    # compact the frame table to referenced frames only
    used = sorted(set(profile._frame_of))
    if len(used) == profile.frame_count:
        frame_remap = None
        frames = profile.frames()
        frame_of = profile._frame_of
    else:
        frame_remap = {old: new for new, old in enumerate(used)}
        frames = [profile.frame(old) for old in used]
        frame_of = [frame_remap[f] for f in profile._frame_of]

    def enc(obj) -> str:
        return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False)

    def num(v) -> str:
        return "null" if v is None else repr(v)

    # node and point rows are emitted by hand (keys already in sorted
    # order) because dict-building dominates serialization on
    # million-node profiles; the bytes are identical to json.dumps
    parent = profile._parent
    values = profile._values
    node_rows = ",".join(
        '{"frame":%d,"parent":%d,"values":[%s]}'
        % (frame_of[i], parent[i], ",".join(num(col[i]) for col in values))
        for i in range(profile.node_count))
    point_rows = ",".join(
        '{"ctx":[%s],"values":[%s]}'
        % (",".join("[%s,%d]" % (enc(role), node) for role, node in p.contexts),
           ",".join(num(v) for v in p.values))
        for p in profile.points)
    parts = [
        '"frames":' + enc([
            {"fn": f.function_name, "mod": f.module_name, "file": f.file_path,
             "line": f.line, "addr": f.address}
            for f in frames
        ]),
    ]
    if profile._data_nodes:
        parts.append('"kinds":' + enc(
            [[n, NodeKind.DATA_OBJECT.value]
             for n in sorted(profile._data_nodes)]))
    parts.append('"meta":' + enc({
        "name": profile.meta.name,
        "collector": profile.meta.collector,
        "timestamp": profile.meta.timestamp,
        "properties": dict(profile.meta.properties),
    }))
    parts.append('"metrics":' + enc([
        {"name": m.name, "unit": m.unit, "kind": m.kind.value,
         "aggregator": m.aggregator.value}
        for m in profile.metrics
    ]))
    parts.append('"nodes":[' + node_rows + "]")
    parts.append('"points":[' + point_rows + "]")
    body = ("{" + ",".join(parts) + "}").encode("utf-8")
    return _HEADER.pack(MAGIC, VERSION, len(body)) + body


def _require(cond: bool, message: str, offset: int = 10):
    if not cond:
        raise FormatError(message, offset)


def _get(doc: dict, key: str, typ):
    v = doc.get(key)
    _require(isinstance(v, typ), f"document key {key!r} missing or mistyped")
    return v


def _validate_column(col: list) -> None:
    # min()/max() drive the scan at C speed; mixed types raise TypeError
    try:
        smallest = min((v for v in col if v is not None), default=0)
        largest = max((v for v in col if v is not None), default=0)
    except TypeError as e:
        raise FormatError(f"bad metric value: {e}") from e
    if not isinstance(smallest, (int, float)) or isinstance(smallest, bool):
        raise FormatError(f"bad metric value {smallest!r}")
    if smallest < 0:
        raise FormatError(f"bad metric value {smallest!r}")
    if isinstance(largest, int) and largest >= 2 ** 63:
        raise FormatError(f"metric value {largest} exceeds 64 bits")


def deserialize(data: bytes) -> Profile:
    if len(data) < _HEADER.size:
        raise FormatError("truncated header", 0)
    magic, version, length = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError("bad magic, not a PCCT file", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if len(data) != _HEADER.size + length:
        raise FormatError(
            f"length field says {length} bytes, found {len(data) - _HEADER.size}", 6)
    body = data[_HEADER.size:]
    doc = None
    if _fastjson is not None:
        try:
            doc = _fastjson.decode(body)
        except Exception:
            doc = None  # re-parse below for a precise error offset
    if doc is None:
        try:
            doc = json.loads(body.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise FormatError("document is not UTF-8",
                              _HEADER.size + e.start) from e
        except json.JSONDecodeError as e:
            raise FormatError(f"bad JSON: {e.msg}", _HEADER.size + e.pos) from e
    _require(isinstance(doc, dict), "document root must be an object")

    meta_doc = _get(doc, "meta", dict)
    props = meta_doc.get("properties", {})
    _require(isinstance(props, dict), "meta.properties must be an object")
    meta = ProfileMeta(
        name=str(meta_doc.get("name", "")),
        collector=str(meta_doc.get("collector", "")),
        timestamp=str(meta_doc.get("timestamp", "")),
        properties={str(k): str(v) for k, v in props.items()},
    )

    try:
        metrics = [
            MetricDescriptor(
                name=str(m["name"]), unit=str(m.get("unit", "")),
                kind=MetricKind(m.get("kind", "additive")),
                aggregator=Aggregator(m.get("aggregator", "sum")),
            )
            for m in _get(doc, "metrics", list)
        ]
        seen = {m.name for m in metrics}
        _require(len(seen) == len(metrics), "duplicate metric name")
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"bad metric descriptor: {e}") from e

    try:
        frames = [
            Frame(function_name=str(f.get("fn", "")),
                  module_name=str(f.get("mod", "")),
                  file_path=str(f.get("file", "")),
                  line=int(f.get("line", 0)),
                  address=int(f.get("addr", 0)))
            for f in _get(doc, "frames", list)
        ]
    except (TypeError, ValueError, AttributeError) as e:
        raise FormatError(f"bad frame record: {e}") from e

    nodes = _get(doc, "nodes", list)
    nmetrics = len(metrics)
    _require(len(nodes) >= 1, "profile needs at least a root node")
    try:
        frame_of = list(map(operator.itemgetter("frame"), nodes))
        parent = list(map(operator.itemgetter("parent"), nodes))
        value_rows = list(map(operator.itemgetter("values"), nodes))
        frame_arr = np.asarray(frame_of, dtype=np.int64)
        parent_arr = np.asarray(parent, dtype=np.int64)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad node record: {e}") from e

    n = len(nodes)
    if frame_arr.min() < 0 or frame_arr.max() >= max(len(frames), 1):
        raise FormatError("node frame index out of range")
    roots = np.flatnonzero(parent_arr == -1)
    _require(len(roots) == 1, f"expected exactly one root, found {len(roots)}")
    if ((parent_arr < -1) | (parent_arr >= n)).any():
        raise FormatError("node parent index out of range")
    if (parent_arr == np.arange(n)).any():
        raise FormatError("node is its own parent")

    if any(type(row) is not list or len(row) != nmetrics for row in value_rows):
        raise FormatError("node values arity does not match metric count")
    columns: list[list] = []
    for m in range(nmetrics):
        col = [row[m] for row in value_rows]
        _validate_column(col)
        columns.append(col)

    # siblings must carry distinct frames; equal paths are not a tree
    pairs = parent_arr * max(len(frames), 1) + frame_arr
    pairs[roots[0]] = -1
    if np.unique(pairs).size != n:
        raise FormatError("duplicate sibling frame (paths must be unique)")

    # renumber so parents precede children (BFS, input order among siblings)
    if roots[0] == 0 and bool((parent_arr[1:] < np.arange(1, n)).all()):
        order = None  # already topological; keep ids
    else:
        kids: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            p = parent[i]
            if p >= 0:
                kids[p].append(i)
        order = []
        queue = deque([int(roots[0])])
        while queue:
            i = queue.popleft()
            order.append(i)
            queue.extend(kids[i])
        if len(order) != n:
            raise FormatError("unreachable nodes or parent cycle")

    kinds_doc = doc.get("kinds", [])
    _require(isinstance(kinds_doc, list), "kinds must be an array")
    data_nodes: set[int] = set()
    for entry in kinds_doc:
        try:
            node_id, kind = entry
            node_id = int(node_id)
            kind = NodeKind(kind)
        except (TypeError, ValueError) as e:
            raise FormatError(f"bad kinds entry: {entry!r}") from e
        _require(0 <= node_id < n, f"kinds entry references node {node_id}")
        if kind is NodeKind.DATA_OBJECT:
            data_nodes.add(node_id)

    points: list[MonitoringPoint] = []
    try:
        for p in _get(doc, "points", list) if "points" in doc else []:
            ctx = []
            for role, node_id in p["ctx"]:
                if (type(node_id) is not int or not 0 <= node_id < n
                        or not isinstance(role, str)):
                    raise FormatError(f"bad point context [{role!r}, {node_id!r}]")
                ctx.append((role, node_id))
            vals = tuple(p["values"])
            if len(vals) != nmetrics:
                raise FormatError("point values arity mismatch")
            if not ctx:
                raise FormatError("point context tuple must be non-empty")
            for v in vals:
                if v is not None and (isinstance(v, bool) or v < 0):
                    raise FormatError(f"bad metric value {v!r}")
            points.append(MonitoringPoint(tuple(ctx), vals))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad point record: {e}") from e

    out = Profile(meta, metrics)
    if order is None:
        out._parent = [int(p) for p in parent]
        out._frame_of = [int(f) for f in frame_of]
        out._values = columns
        out._points = points
        out._data_nodes = data_nodes
    else:
        remap = [0] * n
        for new_id, old_id in enumerate(order):
            remap[old_id] = new_id
        out._parent = [-1 if parent[old] < 0 else remap[parent[old]]
                       for old in order]
        out._frame_of = [int(frame_of[old]) for old in order]
        out._values = [[columns[m][old] for old in order]
                       for m in range(nmetrics)]
        out._points = [
            MonitoringPoint(tuple((role, remap[node]) for role, node in p.contexts),
                            p.values)
            for p in points
        ]
        out._data_nodes = {remap[i] for i in data_nodes}
    out._frames = frames
    out._frame_ids = {}
    for fid, f in enumerate(frames):
        out._frame_ids.setdefault(f, fid)
    out._child_map = None
    out._cache = {}
    return out
