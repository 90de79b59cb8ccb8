import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profcct.errors import ArityError, DuplicateMetric, UnknownMetric
from profcct.model import (Frame, MetricDescriptor, MetricKind, NodeKind,
                           ProfileMeta, new_profile)

from conftest import build_from_samples, fr, random_samples
from oracles import prefixes


CPU = MetricDescriptor("cpu", "samples")


def test_new_profile_has_only_root():
    p = new_profile(ProfileMeta(name="t"), [CPU])
    assert p.node_count == 1
    assert p.points == []
    assert p.node_frame(0).function_name == "«root»"


def test_new_profile_zero_metrics_is_valid():
    p = new_profile(ProfileMeta(), [])
    assert p.metrics == []
    assert p.node_count == 1


def test_new_profile_duplicate_metric():
    with pytest.raises(DuplicateMetric):
        new_profile(ProfileMeta(), [CPU, MetricDescriptor("cpu", "ns")])


def test_frame_requires_name_or_address():
    with pytest.raises(ValueError):
        Frame()
    Frame(address=0x40)  # fine
    with pytest.raises(ValueError):
        Frame(function_name="f", line=-1)


def test_add_sample_merges_prefixes():
    p = new_profile(ProfileMeta(), [CPU])
    p.add_sample([fr("main"), fr("a"), fr("b")], [3])
    p.add_sample([fr("main"), fr("a"), fr("c")], [2])
    # oracle: trie insertion of the two paths -> root,main,a,b,c
    assert p.node_count == 5
    main = p.children(0)
    assert len(main) == 1
    a_children = p.children(p.children(main[0])[0])
    assert len(a_children) == 2


def test_add_sample_accumulates_duplicate_stack():
    p = new_profile(ProfileMeta(), [CPU])
    n1 = p.add_sample([fr("main"), fr("a")], [1])
    n2 = p.add_sample([fr("main"), fr("a")], [1])
    assert n1 == n2
    assert p.node_count == 3
    assert p.value(n1, 0) == 2


def test_add_sample_empty_stack_rejected():
    p = new_profile(ProfileMeta(), [CPU])
    with pytest.raises(ArityError):
        p.add_sample([], [1])


def test_add_sample_value_arity_checked():
    p = new_profile(ProfileMeta(), [CPU])
    with pytest.raises(ArityError):
        p.add_sample([fr("main")], [1, 2])


def test_snapshot_values_overwrite():
    live = MetricDescriptor("live", "bytes", MetricKind.SNAPSHOT)
    p = new_profile(ProfileMeta(), [live])
    n = p.add_sample([fr("main")], [10])
    p.add_sample([fr("main")], [7])
    assert p.value(n, 0) == 7


def test_multi_context_point_keeps_roles_and_raw_untouched():
    p = new_profile(ProfileMeta(), [CPU])
    nodes = p.add_sample_multi(
        [("alloc", [fr("main"), fr("new")]),
         ("use", [fr("main"), fr("loop"), fr("load")])],
        [6])
    assert len(nodes) == 2
    assert p.points[0].contexts == (("alloc", nodes[0]), ("use", nodes[1]))
    assert all(p.value(n, 0) is None for n in nodes)


def test_data_object_leaf_kind():
    p = new_profile(ProfileMeta(), [CPU])
    n = p.add_sample([fr("main"), fr("heap_obj")], [1],
                     leaf_kind=NodeKind.DATA_OBJECT)
    assert p.node_kind(n) is NodeKind.DATA_OBJECT
    assert p.node_kind(0) is NodeKind.CODE


def test_metric_index_unknown():
    p = new_profile(ProfileMeta(), [CPU])
    with pytest.raises(UnknownMetric):
        p.metric_index("nope")


def test_frames_interned():
    p = new_profile(ProfileMeta(), [CPU])
    a = p.intern_frame(Frame(function_name="f", line=3))
    b = p.intern_frame(Frame(function_name="f", line=3))
    c = p.intern_frame(Frame(function_name="f", line=4))
    assert a == b and a != c


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_prefix_merge_properties(seed):
    rng = random.Random(seed)
    samples = random_samples(rng, count=40)
    p = build_from_samples(samples)
    distinct = set()
    for path, _ in samples:
        distinct.update(prefixes(path))
    # node count = distinct prefixes + root; every node reachable once
    assert p.node_count == len(distinct) + 1
    seen = set()
    stack = [0]
    while stack:
        n = stack.pop()
        assert n not in seen
        seen.add(n)
        stack.extend(p.children(n))
    assert len(seen) == p.node_count
    # additive consistency
    total = sum(v for _, v in samples)
    assert sum(v or 0 for v in p.raw_column(0)) == total


def test_two_samples_share_exactly_common_prefix_nodes():
    p = new_profile(ProfileMeta(), [CPU])
    p.add_sample([fr("x"), fr("y"), fr("z")], [1])
    before = p.node_count
    p.add_sample([fr("x"), fr("y"), fr("w")], [1])
    # k=2 shared frames -> k+1 shared nodes (with root), one new node
    assert p.node_count == before + 1


def test_find_node_resolves_paths(p1):
    node = p1.find_node([fr("main"), fr("a"), fr("b")])
    assert node is not None
    assert p1.node_frame(node).function_name == "b"
    assert p1.find_node([fr("main"), fr("zz")]) is None


def test_with_metric_adds_column(p1):
    d = MetricDescriptor("ratio", "", MetricKind.DERIVED)
    col = [float(i) for i in range(p1.node_count)]
    q = p1.with_metric(d, col)
    assert len(q.metrics) == 2
    assert q.value(2, 1) == 2.0
    assert all(pt.values[-1] is None for pt in q.points)
    with pytest.raises(DuplicateMetric):
        q.with_metric(d, col)
    with pytest.raises(ArityError):
        p1.with_metric(MetricDescriptor("x"), [1.0])
