import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profcct.errors import FormatError, ParseError, UnknownMetric
from profcct.folded import emit_folded, parse_folded, parse_frame, render_frame
from profcct.model import (Frame, MetricDescriptor, MetricKind, Profile,
                           ProfileMeta)

from conftest import P1_TEXT, build_from_samples, random_samples


def test_parse_example_profile():
    p = parse_folded(P1_TEXT)
    assert p.total("samples") == 10
    names = {p.node_frame(i).function_name for i in range(1, p.node_count)}
    assert names == {"main", "a", "b", "c", "d"}
    assert p.node_count == 6


def test_parse_empty_text():
    p = parse_folded("")
    assert p.node_count == 1
    assert p.total("samples") == 0


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as e:
        parse_folded("main;x notanumber")
    assert e.value.line == 1
    with pytest.raises(ParseError) as e:
        parse_folded("main 1\nmain;x -2\n")
    assert e.value.line == 2


def test_parse_rejects_empty_frame():
    with pytest.raises(ParseError):
        parse_folded("main;;x 1")


def test_duplicate_stacks_accumulate():
    p = parse_folded("a;b 1\na;b 2\n")
    assert p.total(0) == 3
    assert p.node_count == 3


def test_frame_token_grammar():
    assert parse_frame("name") == Frame(function_name="name")
    assert parse_frame("libm.so!name") == Frame(function_name="name",
                                                module_name="libm.so")
    assert parse_frame("name@src/x.c:42") == Frame(
        function_name="name", file_path="src/x.c", line=42)
    f = parse_frame("mod!name@f.py:7")
    assert (f.module_name, f.function_name, f.file_path, f.line) == (
        "mod", "name", "f.py", 7)
    # '@' without a line suffix stays part of the name
    assert parse_frame("operator@x").function_name == "operator@x"


def test_render_frame_round_trip():
    for f in (Frame(function_name="n"),
              Frame(function_name="n", module_name="m.so"),
              Frame(function_name="n", file_path="a/b.c", line=9),
              Frame(function_name="n", module_name="m", file_path="x.rs", line=1)):
        assert parse_frame(render_frame(f)) == f


def test_emit_canonical_order(p1):
    assert emit_folded(p1) == "main;a;b 3\nmain;a;c 2\nmain;d 5\n"


def test_emit_empty_profile():
    p = Profile(ProfileMeta(), [MetricDescriptor("samples")])
    assert emit_folded(p) == ""


def test_emit_unknown_metric(p1):
    with pytest.raises(UnknownMetric):
        emit_folded(p1, "xyz")


def test_emit_rejects_semicolon_names():
    p = Profile(ProfileMeta(), [MetricDescriptor("samples")])
    p.add_sample([Frame(function_name="bad;name")], [1])
    with pytest.raises(FormatError):
        emit_folded(p)


def test_emit_requires_additive():
    p = Profile(ProfileMeta(), [MetricDescriptor("live", "b", MetricKind.SNAPSHOT)])
    with pytest.raises(UnknownMetric):
        emit_folded(p, "live")


def test_round_trip_identity_on_canonical_text():
    text = emit_folded(parse_folded(P1_TEXT))
    assert emit_folded(parse_folded(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_round_trip_preserves_exclusive_values(seed):
    rng = random.Random(seed)
    samples = random_samples(rng, count=40, max_value=20)
    p = build_from_samples(samples)
    q = parse_folded(emit_folded(p))
    # path -> exclusive map preserved
    def excl_map(prof):
        out = {}
        for n in range(1, prof.node_count):
            v = prof.raw_column(0)[n]
            if v:
                out[tuple(f.function_name for f in prof.path_frames(n))] = v
        return out
    assert excl_map(q) == excl_map(p)
    assert emit_folded(q) == emit_folded(p)


def test_total_conservation_on_parse():
    rng = random.Random(7)
    samples = random_samples(rng, count=80)
    text = "".join(f"{';'.join(path)} {v}\n" for path, v in samples)
    p = parse_folded(text)
    assert p.total(0) == sum(v for _, v in samples)
