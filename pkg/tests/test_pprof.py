import gzip

import pytest

from profcct.errors import FormatError, UnknownFormat
from profcct.ingest import SourceFormat, detect_format, load_profile
from profcct.model import Frame
from profcct.native import serialize
from profcct.pprof import parse_pprof

from conftest import fr
from pprof_fixture import PprofWriter, field_varint, simple_cpu_profile


def test_single_sample_stack():
    blob = simple_cpu_profile([(["main", "a"], [7])])
    p = parse_pprof(blob)
    assert p.node_count == 3
    node = p.find_node([fr("main"), fr("a")])
    assert node is not None
    assert p.value(node, 0) == 7
    assert p.meta.collector == "pprof"


def test_leaf_first_orientation():
    # pprof chain is leaf-first; deepest CCT node must be the pprof leaf
    blob = simple_cpu_profile([(["root_fn", "mid", "leaf"], [1])])
    p = parse_pprof(blob)
    node = p.find_node([fr("root_fn"), fr("mid"), fr("leaf")])
    assert node is not None
    assert not p.children(node)


def test_two_sample_types_totals():
    stacks = [(["main", "a"], [7, 64]), (["main", "b"], [3, 128])]
    blob = simple_cpu_profile(
        stacks, sample_types=(("cpu", "samples"), ("alloc_bytes", "bytes")))
    p = parse_pprof(blob)
    assert [m.name for m in p.metrics] == ["cpu", "alloc_bytes"]
    assert p.total("cpu") == 10
    assert p.total("alloc_bytes") == 192


def test_identical_stacks_accumulate():
    blob = simple_cpu_profile([(["m", "x"], [4]), (["m", "x"], [5])])
    p = parse_pprof(blob)
    assert p.total("cpu") == 9
    assert p.node_count == 3


def test_unpacked_repeated_fields():
    blob = simple_cpu_profile([(["m", "x"], [4])], packed=False)
    p = parse_pprof(blob)
    assert p.total("cpu") == 4


def test_uncompressed_message():
    blob = simple_cpu_profile([(["m"], [1])], compressed=False)
    p = parse_pprof(blob)
    assert p.total("cpu") == 1


def test_inline_functions_expand_to_stacked_frames():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    outer = w.function("outer", "o.c")
    inner = w.function("inner", "i.c")
    main = w.simple_location("main")
    # line[0] is the innermost inline frame per the schema
    inlined = w.location([(inner, 12), (outer, 40)], address=0x100)
    w.sample([inlined, main], [5])
    p = parse_pprof(w.build())
    node = p.find_node([
        fr("main"),
        Frame(function_name="outer", file_path="o.c", line=40, address=0x100),
        Frame(function_name="inner", file_path="i.c", line=12, address=0x100),
    ])
    assert node is not None
    assert p.value(node, 0) == 5


def test_unsymbolized_location_named_by_address():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    mid = w.mapping("libfoo.so")
    lid = w.location([], address=0xDEADBEEF, mapping_id=mid)
    w.sample([lid], [2])
    p = parse_pprof(w.build())
    names = {p.node_frame(i).function_name for i in range(1, p.node_count)}
    assert names == {"0xdeadbeef"}
    frame = next(p.node_frame(i) for i in range(1, p.node_count))
    assert frame.module_name == "libfoo.so"
    assert frame.address == 0xDEADBEEF


def test_mapping_module_attached():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    lid = w.simple_location("f", module="app.bin", filename="f.go", line=8)
    w.sample([lid], [3])
    p = parse_pprof(w.build())
    frame = p.node_frame(1)
    assert (frame.module_name, frame.file_path, frame.line) == (
        "app.bin", "f.go", 8)


def test_period_metadata_stored_verbatim():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    w.sample([w.simple_location("m")], [1])
    w.extra += field_varint(12, 10000)  # period
    w.extra += field_varint(9, 1700000000123456789)  # time_nanos
    p = parse_pprof(w.build())
    assert p.meta.properties["period"] == "10000"
    assert p.meta.timestamp == "1700000000123456789"


def test_truncated_gzip_rejected():
    blob = simple_cpu_profile([(["m"], [1])])
    with pytest.raises(FormatError):
        parse_pprof(blob[:-4])


def test_corrupt_body_rejected():
    with pytest.raises(FormatError):
        parse_pprof(gzip.compress(b"\xff\xff\xff\xff"))


def test_dangling_location_rejected():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    w.sample([99], [1])
    with pytest.raises(FormatError) as e:
        parse_pprof(w.build())
    assert "99" in str(e.value)


def test_dangling_function_rejected():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    lid = w.location([(42, 1)], address=1)
    w.sample([lid], [1])
    with pytest.raises(FormatError) as e:
        parse_pprof(w.build())
    assert "42" in str(e.value)


def test_value_arity_rejected():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    w.sample([w.simple_location("m")], [1, 2])
    with pytest.raises(FormatError):
        parse_pprof(w.build())


def test_negative_value_rejected():
    w = PprofWriter()
    w.sample_type("cpu", "samples")
    payload = field_varint(1, w.simple_location("m"))
    from pprof_fixture import field_bytes, varint
    payload += field_bytes(2, varint(-5))
    w.samples.append(field_bytes(2, payload))
    with pytest.raises(FormatError):
        parse_pprof(w.build())


def test_no_sample_types_rejected():
    w = PprofWriter()
    w.sample([1], [1])
    w.simple_location("m")
    with pytest.raises(FormatError):
        parse_pprof(w.build())


# -- detection ---------------------------------------------------------------


def test_detect_folded():
    assert detect_format(b"main;a;b 3\n") is SourceFormat.FOLDED
    assert detect_format(b"just_one 10") is SourceFormat.FOLDED


def test_detect_pprof_gzip():
    blob = simple_cpu_profile([(["m"], [1])])
    assert blob[:2] == b"\x1f\x8b"
    assert detect_format(blob) is SourceFormat.PPROF


def test_detect_pprof_raw():
    blob = simple_cpu_profile([(["m"], [1])], compressed=False)
    assert detect_format(blob) is SourceFormat.PPROF


def test_detect_native(p1):
    assert detect_format(serialize(p1)) is SourceFormat.NATIVE


def test_detect_unknown():
    with pytest.raises(UnknownFormat):
        detect_format(b"")
    with pytest.raises(UnknownFormat):
        detect_format(b"\x00\x01\x02 arbitrary binary")
    with pytest.raises(UnknownFormat):
        detect_format(b"not folded because no trailing integer\n")


def test_load_profile_sets_name():
    p = load_profile(b"main;a 1\n", name="cpu.folded")
    assert p.meta.name == "cpu.folded"
    blob = simple_cpu_profile([(["m"], [1])])
    q = load_profile(blob, name="x.pb.gz")
    assert q.meta.name == "x.pb.gz"
