"""Reader for the pprof wire format (the public profile.proto schema).

The message is decoded directly from the protobuf wire encoding, so no
generated code is involved: varints, length-delimited spans, and the
handful of field numbers the schema defines. Unknown fields are
skipped, group wire types are rejected.

Stack orientation: pprof stores leaf-first location chains, which are
reversed into root-first paths here; a location with several line
entries (inlining) expands outermost-caller first so the deepest inline
frame ends up as the leaf. Locations without line records become
frames named ``0x<address>``; samples are never dropped.
"""

from __future__ import annotations

import gzip

from .errors import FormatError
from .model import (Frame, MetricDescriptor, MetricKind, Profile,
                    ProfileMeta)

GZIP_MAGIC = b"\x1f\x8b"

_WIRE_VARINT = 0
_WIRE_FIXED64 = 1
_WIRE_BYTES = 2
_WIRE_FIXED32 = 5


def _varint(data: bytes, pos: int, end: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= end:
            raise FormatError("truncated varint", pos)
        b = data[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise FormatError("varint longer than 64 bits", pos)


def _signed(v: int) -> int:
    return v - (1 << 64) if v >= (1 << 63) else v


def _fields(data: bytes, pos: int, end: int):
    """Yield (field_number, wire_type, value) triples; value is an int
    for varints/fixed ints and a (start, end) span for bytes fields."""
    while pos < end:
        key, pos = _varint(data, pos, end)
        field, wire = key >> 3, key & 7
        if field == 0:
            raise FormatError("field number 0", pos)
        if wire == _WIRE_VARINT:
            value, pos = _varint(data, pos, end)
        elif wire == _WIRE_FIXED64:
            if pos + 8 > end:
                raise FormatError("truncated fixed64", pos)
            value = int.from_bytes(data[pos:pos + 8], "little")
            pos += 8
        elif wire == _WIRE_BYTES:
            size, pos = _varint(data, pos, end)
            if pos + size > end:
                raise FormatError("length-delimited field overruns buffer", pos)
            value = (pos, pos + size)
            pos += size
        elif wire == _WIRE_FIXED32:
            if pos + 4 > end:
                raise FormatError("truncated fixed32", pos)
            value = int.from_bytes(data[pos:pos + 4], "little")
            pos += 4
        else:
            raise FormatError(f"unsupported wire type {wire}", pos)
        yield field, wire, value


def _repeated_ints(data: bytes, wire: int, value) -> list[int]:
    """A repeated integer field arrives packed (one bytes span) or as
    individual varints."""
    if wire == _WIRE_VARINT:
        return [value]
    out = []
    pos, end = value
    while pos < end:
        v, pos = _varint(data, pos, end)
        out.append(v)
    return out


def _value_type(data: bytes, span) -> tuple[int, int]:
    type_idx = unit_idx = 0
    for field, _, value in _fields(data, *span):
        if field == 1:
            type_idx = value
        elif field == 2:
            unit_idx = value
    return type_idx, unit_idx


def parse_pprof(data: bytes) -> Profile:
    if data[:2] == GZIP_MAGIC:
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError) as e:
            raise FormatError(f"corrupt gzip stream: {e}") from e
    if not data:
        raise FormatError("empty pprof message")

    sample_types: list[tuple[int, int]] = []
    sample_spans: list[tuple[int, int]] = []
    mappings: dict[int, int] = {}          # id -> filename string idx
    locations: dict[int, tuple] = {}       # id -> (mapping_id, address, lines)
    functions: dict[int, tuple] = {}       # id -> (name, filename, start_line)
    strings: list[str] = []
    scalars: dict[str, int] = {}
    period_type = None
    comments: list[int] = []

    try:
        for field, wire, value in _fields(data, 0, len(data)):
            if field == 1 and wire == _WIRE_BYTES:
                sample_types.append(_value_type(data, value))
            elif field == 2 and wire == _WIRE_BYTES:
                sample_spans.append(value)
            elif field == 3 and wire == _WIRE_BYTES:
                mid = 0
                fname = 0
                for f2, _, v2 in _fields(data, *value):
                    if f2 == 1:
                        mid = v2
                    elif f2 == 5:
                        fname = v2
                mappings[mid] = fname
            elif field == 4 and wire == _WIRE_BYTES:
                lid = mid = addr = 0
                lines: list[tuple[int, int]] = []
                for f2, w2, v2 in _fields(data, *value):
                    if f2 == 1:
                        lid = v2
                    elif f2 == 2:
                        mid = v2
                    elif f2 == 3:
                        addr = v2
                    elif f2 == 4 and w2 == _WIRE_BYTES:
                        fn_id = line_no = 0
                        for f3, _, v3 in _fields(data, *v2):
                            if f3 == 1:
                                fn_id = v3
                            elif f3 == 2:
                                line_no = _signed(v3)
                        lines.append((fn_id, line_no))
                locations[lid] = (mid, addr, lines)
            elif field == 5 and wire == _WIRE_BYTES:
                fid = name = fname = start = 0
                for f2, _, v2 in _fields(data, *value):
                    if f2 == 1:
                        fid = v2
                    elif f2 == 2:
                        name = v2
                    elif f2 == 4:
                        fname = v2
                    elif f2 == 5:
                        start = _signed(v2)
                functions[fid] = (name, fname, start)
            elif field == 6 and wire == _WIRE_BYTES:
                s, e = value
                strings.append(data[s:e].decode("utf-8", errors="replace"))
            elif field in (7, 8, 9, 10, 12, 14) and wire == _WIRE_VARINT:
                keys = {7: "drop_frames", 8: "keep_frames", 9: "time_nanos",
                        10: "duration_nanos", 12: "period",
                        14: "default_sample_type"}
                scalars[keys[field]] = _signed(value)
            elif field == 11 and wire == _WIRE_BYTES:
                period_type = _value_type(data, value)
            elif field == 13 and wire == _WIRE_VARINT:
                comments.append(value)
    except FormatError:
        raise
    except Exception as e:
        raise FormatError(f"corrupt pprof message: {e}") from e

    def st(idx: int) -> str:
        if not 0 <= idx < len(strings):
            raise FormatError(f"string table index {idx} out of range")
        return strings[idx]

    if not sample_types:
        raise FormatError("pprof message has no sample_type entries")

    names: list[str] = []
    descriptors: list[MetricDescriptor] = []
    for type_idx, unit_idx in sample_types:
        name = st(type_idx) or f"metric{len(names)}"
        unit = st(unit_idx)
        if name in names:
            name = f"{name}/{unit}" if unit else f"{name}#{len(names)}"
        while name in names:
            name += "'"
        names.append(name)
        descriptors.append(MetricDescriptor(name, unit, MetricKind.ADDITIVE))

    meta = ProfileMeta(collector="pprof",
                       timestamp=str(scalars.get("time_nanos", "")) or "")
    for key in ("period", "duration_nanos", "default_sample_type"):
        if key in scalars:
            meta.properties[key] = str(scalars[key])
    if period_type is not None:
        meta.properties["period_type"] = f"{st(period_type[0])}/{st(period_type[1])}"
    for key in ("drop_frames", "keep_frames"):
        if key in scalars and scalars[key]:
            meta.properties[key] = st(scalars[key])
    if comments:
        meta.properties["comment"] = "\n".join(st(c) for c in comments)

    profile = Profile(meta, descriptors)
    frame_cache: dict[int, list[Frame]] = {}

    def frames_for(loc_id: int) -> list[Frame]:
        cached = frame_cache.get(loc_id)
        if cached is not None:
            return cached
        if loc_id not in locations:
            raise FormatError(f"dangling location id {loc_id}")
        mid, addr, lines = locations[loc_id]
        module = st(mappings[mid]) if mid in mappings else ""
        out: list[Frame] = []
        if not lines:
            out.append(Frame(function_name=f"0x{addr:x}", module_name=module,
                             address=addr))
        else:
            for fn_id, line_no in reversed(lines):
                if fn_id == 0:
                    out.append(Frame(function_name=f"0x{addr:x}",
                                     module_name=module, address=addr))
                    continue
                if fn_id not in functions:
                    raise FormatError(f"dangling function id {fn_id}")
                name, fname, start = functions[fn_id]
                out.append(Frame(function_name=st(name) or f"0x{addr:x}",
                                 module_name=module,
                                 file_path=st(fname),
                                 line=max(line_no, 0) or max(start, 0),
                                 address=addr))
        frame_cache[loc_id] = out
        return out

    nmetrics = len(descriptors)
    for span in sample_spans:
        loc_ids: list[int] = []
        values: list[int] = []
        for field, wire, value in _fields(data, *span):
            if field == 1:
                loc_ids.extend(_repeated_ints(data, wire, value))
            elif field == 2:
                values.extend(_signed(v)
                              for v in _repeated_ints(data, wire, value))
        if len(values) != nmetrics:
            raise FormatError(
                f"sample carries {len(values)} values for {nmetrics} sample types")
        for v in values:
            if v < 0:
                raise FormatError(f"negative sample value {v}")
        stack: list[Frame] = []
        for loc_id in reversed(loc_ids):
            stack.extend(frames_for(loc_id))
        if not stack:
            stack = [Frame(function_name="«no stack»")]
        profile.add_sample(stack, values)
    return profile


def looks_like_pprof(data: bytes) -> bool:
    """Cheap structural test for an uncompressed pprof message: the
    whole buffer must decode as fields with plausible numbers/types."""
    if not data:
        return False
    interesting = False
    try:
        for field, wire, _ in _fields(data, 0, len(data)):
            if field > 15:
                return False
            if field <= 6 and wire != _WIRE_BYTES:
                return False
            if field in (1, 2, 4, 6):
                interesting = True
    except FormatError:
        return False
    return interesting
