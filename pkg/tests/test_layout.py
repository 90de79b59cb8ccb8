import json
import random

import pytest

from profcct.errors import RangeError
from profcct.folded import parse_folded
from profcct.layout import (export_json, export_view, layout_flame,
                            table_rows)
from profcct.multi import aggregate, diff
from profcct.views import as_nested, compute_view

from conftest import build_from_samples, random_samples
from oracles import layout_oracle


def rect_map(rects):
    return {(r.label, r.depth): (r.x0, r.x1) for r in rects}


def test_layout_matches_interval_oracle(p1):
    tree = compute_view(p1, "samples", "topdown")
    rects = layout_flame(tree, min_width=0)
    want = layout_oracle(as_nested(tree))
    assert len(rects) == len(want)
    for r, (label, depth, x0, x1) in zip(rects, want):
        assert r.label == label and r.depth == depth
        assert r.x0 == pytest.approx(x0, abs=1e-12)
        assert r.x1 == pytest.approx(x1, abs=1e-12)


def test_layout_example_geometry(p1):
    tree = compute_view(p1, "samples", "topdown")
    got = rect_map(layout_flame(tree, min_width=0))
    assert got[("«root»", 0)] == (0.0, 1.0)
    assert got[("main", 1)] == (0.0, 1.0)
    # a ties d at 0.5; lexicographic break puts a first
    assert got[("a", 2)] == (0.0, 0.5)
    assert got[("d", 2)] == (0.5, 1.0)
    assert got[("b", 3)] == (0.0, pytest.approx(0.3))
    assert got[("c", 3)] == (pytest.approx(0.3), pytest.approx(0.5))


def test_layout_single_node_profile():
    p = parse_folded("")
    tree = compute_view(p, "samples", "topdown")
    rects = layout_flame(tree)
    assert len(rects) == 1
    assert (rects[0].x0, rects[0].x1) == (0.0, 1.0)


def test_layout_min_width_merges_into_ellipsis(p1):
    tree = compute_view(p1, "samples", "topdown")
    rects = layout_flame(tree, min_width=0.4)
    labels = [(r.label, r.depth) for r in rects]
    assert ("b", 3) not in labels and ("c", 3) not in labels
    merged = [r for r in rects if r.label == "«…»"]
    assert len(merged) == 1
    assert merged[0].depth == 3
    assert merged[0].width == pytest.approx(0.5)
    assert merged[0].node == -1


def test_layout_min_width_range(p1):
    tree = compute_view(p1, "samples", "topdown")
    with pytest.raises(RangeError):
        layout_flame(tree, min_width=0.7)
    with pytest.raises(RangeError):
        layout_flame(tree, min_width=-0.1)


def test_geometry_metric_consistency_random():
    rng = random.Random(17)
    p = build_from_samples(random_samples(rng, count=80))
    tree = compute_view(p, "samples", "topdown")
    total = tree.total
    for r in layout_flame(tree, min_width=0):
        if r.node < 0:
            continue
        assert abs(r.width * total - tree.incl[r.node].item()) <= 1e-9 * total


def test_tiling_no_overlap_and_depth():
    rng = random.Random(23)
    p = build_from_samples(random_samples(rng, count=60))
    tree = compute_view(p, "samples", "topdown")
    rects = layout_flame(tree, min_width=0)
    by_node = {r.node: r for r in rects if r.node >= 0}
    for r in rects:
        if r.node <= 0:
            continue
        parent = int(tree.parent[r.node])
        if parent in by_node:
            pr = by_node[parent]
            assert r.depth == pr.depth + 1
            assert r.x0 >= pr.x0 - 1e-12 and r.x1 <= pr.x1 + 1e-12
    # siblings are disjoint
    from collections import defaultdict
    groups = defaultdict(list)
    for r in rects:
        if r.node > 0:
            groups[int(tree.parent[r.node])].append(r)
    for siblings in groups.values():
        siblings.sort(key=lambda r: r.x0)
        for a, b in zip(siblings, siblings[1:]):
            assert a.x1 <= b.x0 + 1e-12


def test_exports_are_byte_identical(p1):
    tree1 = compute_view(p1, "samples", "topdown")
    tree2 = compute_view(p1, "samples", "topdown")
    assert export_json(export_view(tree1)) == export_json(export_view(tree2))


def test_export_document_shape(p1):
    doc = export_view(compute_view(p1, "samples", "topdown"), min_width=0)
    assert doc["version"] == 1
    assert doc["kind"] == "topdown"
    assert doc["metric"] == "samples"
    assert doc["total"] == 10
    assert all(len(row) == 8 for row in doc["rects"])
    assert doc["searchIndex"]["a"]
    node, depth, x0, x1, label_idx, color_idx, tag_idx, src_idx = doc["rects"][0]
    assert doc["labels"][label_idx] == "«root»"
    assert (x0, x1) == (0.0, 1.0)
    parsed = json.loads(export_json(doc))
    assert parsed["rects"] == doc["rects"]


def test_export_diff_carries_tags(p1, p2):
    d = diff(p1, p2, "samples")
    doc = export_view(d, min_width=0)
    assert doc["kind"] == "diff"
    assert set(doc["tags"]) <= {"[A]", "[D]", "[+]", "[-]", ""}
    tag_of = {}
    for row in doc["rects"]:
        if row[0] >= 0:
            tag_of[d.label_path(row[0])] = doc["tags"][row[6]]
    assert tag_of[("main", "e")] == "[A]"
    assert tag_of[("main", "a", "c")] == "[D]"
    assert tag_of[("main", "a", "b")] == "[+]"
    assert tag_of[("main", "d")] == ""


def test_export_aggregate_embeds_vectors(p1):
    doubled = parse_folded("main;a;b 6\nmain;a;c 4\nmain;d 10\n")
    agg = aggregate([p1, doubled], "samples")
    doc = export_view(agg, min_width=0)
    assert doc["kind"] == "aggregate"
    assert len(doc["vectors"]) == len(doc["rects"])
    labels = {doc["labels"][row[4]]: vec
              for row, vec in zip(doc["rects"], doc["vectors"])}
    assert labels["a"] == [5, 10]
    assert labels["d"] == [5, 10]


def test_export_sources_and_colors():
    p = parse_folded("app!main@m.c:3;libz.so!f@z.c:9 4\n")
    doc = export_view(compute_view(p, "samples", "topdown"), min_width=0)
    srcs = {tuple(s) for s in doc["sources"]}
    assert srcs == {("m.c", 3), ("z.c", 9)}
    colors = {doc["labels"][row[5]] for row in doc["rects"] if row[5] >= 0}
    assert {"app", "libz.so"} <= colors


def test_table_rows_stream_per_expansion(p1):
    tree = compute_view(p1, "samples", "topdown")
    root_rows = table_rows(tree)
    assert len(root_rows) == 1
    assert root_rows[0]["label"] == "«root»"
    assert root_rows[0]["percent"] == 100.0
    kids = table_rows(tree, 0)
    assert [r["label"] for r in kids] == ["main"]
    assert kids[0]["expandable"]
    grand = table_rows(tree, kids[0]["id"])
    assert [(r["label"], r["inclusive"], r["percent"]) for r in grand] == [
        ("a", 5, 50.0), ("d", 5, 50.0)]


def test_table_rows_diff_columns(p1, p2):
    d = diff(p1, p2, "samples")
    rows = table_rows(d, 0)
    main = rows[0]
    assert main["tag"] == "increased"
    assert main["m1"] == 10 and main["m2"] == 11 and main["delta"] == 1


def test_flat_layout_uses_exclusive_widths(p1):
    tree = compute_view(p1, "samples", "flat")
    rects = layout_flame(tree, min_width=0)
    by = rect_map(rects)
    # functions tile the file band by exclusive value: d(5), b(3), c(2)
    assert by[("d", 3)][1] - by[("d", 3)][0] == pytest.approx(0.5)
    assert by[("b", 3)][1] - by[("b", 3)][0] == pytest.approx(0.3)
    assert by[("c", 3)][1] - by[("c", 3)][0] == pytest.approx(0.2)
    # main and a have no exclusive mass, so no rects
    assert ("main", 3) not in by and ("a", 3) not in by
