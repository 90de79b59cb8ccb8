"""Flame-graph geometry and renderer-ready export documents.

Rect widths are fractions of the root total: inclusive values for
top-down, bottom-up, diff, and aggregate trees, exclusive values for
flat trees (the only column that still tiles under union-inclusive
semantics). Children tile left-first inside their parent starting at
the parent's x0; anything narrower than ``min_width`` is folded into a
trailing «…» rect so huge trees export a bounded number of rects.

Exports are canonical: sorted keys, no whitespace, coordinates rounded
to 9 significant digits. Identical inputs yield identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import RangeError
from .multi import AggregateTree, DiffTree
from .views import ViewTree

MIN_WIDTH_DEFAULT = 1 / 2000
MERGED_LABEL = "«…»"


@dataclass(frozen=True, slots=True)
class FlameRect:
    node: int                       # -1 for a merged «…» rect
    depth: int
    x0: float
    x1: float
    label: str
    color_key: str
    tag: str | None = None          # "[A]" / "[D]" / "[+]" / "[-]" / ""
    source: tuple[str, int] | None = None

    @property
    def width(self) -> float:
        return self.x1 - self.x0


def _color_key(tree: ViewTree, node: int, color_by: str,
               is_diff: bool) -> str:
    if is_diff:
        return "tag:" + tree.tag_name(node)
    frame = tree.frame(node)
    if frame is None:
        return tree.label(node) if node else ""
    return frame.file_path if color_by == "file" else frame.module_name


def layout_flame(tree: ViewTree, min_width: float = MIN_WIDTH_DEFAULT,
                 order: str = "weight",
                 color_by: str = "module") -> list[FlameRect]:
    """Deterministic rect list in pre-order (parents before children)."""
    if not (isinstance(min_width, (int, float)) and 0 <= min_width <= 0.5):
        raise RangeError(f"min_width must be in [0, 0.5], got {min_width!r}")
    if order not in ("weight", "label"):
        raise RangeError(f"order must be 'weight' or 'label', got {order!r}")
    if color_by not in ("module", "file"):
        raise RangeError(f"color_by must be 'module' or 'file', got {color_by!r}")
    is_diff = isinstance(tree, DiffTree)
    total = tree.weight(0)

    def rect(node: int, depth: int, x0: float, x1: float) -> FlameRect:
        return FlameRect(node, depth, x0, x1, tree.label(node),
                         _color_key(tree, node, color_by, is_diff),
                         tree.tag_text(node) if is_diff else None,
                         tree.source(node))

    if total <= 0:
        return [rect(0, 0, 0.0, 1.0)]

    rects: list[FlameRect] = []
    # entries: (node, x0, depth, merged_width); node -1 is a «…» rect
    stack: list[tuple[int, float, int, float]] = [(0, 0.0, 0, 0.0)]
    while stack:
        node, x0, depth, merged = stack.pop()
        if node < 0:
            rects.append(FlameRect(-1, depth, x0, x0 + merged,
                                   MERGED_LABEL, "", None, None))
            continue
        width = tree.weight(node) / total
        rects.append(rect(node, depth, x0, x0 + width))
        kids = tree.children(node)
        if order == "label":
            kids = sorted(kids, key=lambda c: (tree.label(c), c))
        x = x0
        merged = 0.0
        pending: list[tuple[int, float, int, float]] = []
        for child in kids:
            w = tree.weight(child) / total
            if w <= 0:
                continue
            if w < min_width:
                merged += w
                continue
            pending.append((child, x, depth + 1, 0.0))
            x += w
        if merged > 0:
            pending.append((-1, x, depth + 1, merged))
        stack.extend(reversed(pending))
    return rects


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


def _num(v):
    """JSON-safe number: NaN becomes null, numpy scalars unwrap."""
    if v is None:
        return None
    v = v.item() if hasattr(v, "item") else v
    if isinstance(v, float) and v != v:
        return None
    return v


def export_kind(tree: ViewTree) -> str:
    if isinstance(tree, DiffTree):
        return "diff"
    if isinstance(tree, AggregateTree):
        return "aggregate"
    return tree.kind.value


def export_view(tree: ViewTree, min_width: float = MIN_WIDTH_DEFAULT,
                order: str = "weight", color_by: str = "module") -> dict:
    """A fully self-describing document for the renderer: geometry,
    string pools, the search index, and the code-link source map."""
    rects = layout_flame(tree, min_width, order, color_by)
    label_pool: dict[str, int] = {}
    tag_pool: dict[str, int] = {}
    source_pool: dict[tuple[str, int], int] = {}

    def pool(table: dict, key) -> int:
        idx = table.get(key)
        if idx is None:
            idx = len(table)
            table[key] = idx
        return idx

    rows = []
    search: dict[str, list[int]] = {}
    for r in rects:
        label_idx = pool(label_pool, r.label)
        color_idx = pool(label_pool, r.color_key) if r.color_key else -1
        tag_idx = pool(tag_pool, r.tag) if r.tag is not None else -1
        src_idx = pool(source_pool, r.source) if r.source is not None else -1
        rows.append([r.node, r.depth, _round9(r.x0), _round9(r.x1),
                     label_idx, color_idx, tag_idx, src_idx])
        if r.node >= 0:
            name = tree.function_name(r.node)
            search.setdefault(name, []).append(r.node)

    doc = {
        "version": 1,
        "kind": export_kind(tree),
        "metric": tree.metric.name,
        "total": _num(tree.weight(0)),
        "rects": rows,
        "labels": list(label_pool),
        "tags": list(tag_pool),
        "sources": [[f, l] for f, l in source_pool],
        "searchIndex": {k: sorted(set(v)) for k, v in sorted(search.items())},
    }
    if isinstance(tree, AggregateTree):
        doc["vectors"] = [
            [_num(v) for v in tree.vectors[r.node]] if r.node >= 0 else None
            for r in rects
        ]
        doc["profiles"] = list(tree.profile_names)
    return doc


def export_json(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def table_rows(tree: ViewTree, node: int | None = None) -> list[dict]:
    """Tree-table rows, streamed per expansion: the root row when
    ``node`` is None, otherwise the children of ``node``."""
    total = tree.total
    base = total if isinstance(total, (int, float)) and total == total and total else 0
    ids = [0] if node is None else tree.children(node)
    depths = tree.depths()
    is_diff = isinstance(tree, DiffTree)
    is_agg = isinstance(tree, AggregateTree)
    rows = []
    for i in ids:
        incl = _num(tree.incl[i])
        row = {
            "id": int(i),
            "depth": int(depths[i]),
            "label": tree.label(i),
            "inclusive": incl,
            "exclusive": _num(tree.excl[i]),
            "percent": _round9(100.0 * incl / base) if base and incl is not None else 0.0,
            "expandable": bool(tree.children(i)),
            "source": list(tree.source(i)) if tree.source(i) else None,
        }
        if is_diff:
            row.update(tag=tree.tag_name(i), tagText=tree.tag_text(i),
                       m1=_num(tree.value1(i)), m2=_num(tree.value2(i)),
                       delta=_num(tree.delta(i)), ratio=_num(tree.ratio(i)))
            for name, col in tree.derived.items():
                row.setdefault("derived", {})[name] = _num(col[i])
        if is_agg:
            row.update(vector=[_num(v) for v in tree.vectors[i]],
                       stats={k: _num(v[i]) for k, v in tree.stats.items()})
        rows.append(row)
    return rows
