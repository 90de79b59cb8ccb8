"""Format detection and loading.

Detection is purely content-based: magic bytes for the native container
and gzip-compressed pprof, first-line shape for folded text, then a
structural scan for uncompressed pprof. File extensions are never
consulted.
"""

from __future__ import annotations

import os
from enum import Enum

from .errors import ParseError, UnknownFormat
from .folded import parse_folded
from .model import Profile
from .native import MAGIC, deserialize
from .pprof import GZIP_MAGIC, looks_like_pprof, parse_pprof


class SourceFormat(str, Enum):
    FOLDED = "folded"
    PPROF = "pprof"
    NATIVE = "native"


def _folded_first_line(data: bytes) -> bool:
    line, _, _ = data.partition(b"\n")
    try:
        text = line.decode("utf-8").rstrip("\r").strip()
    except UnicodeDecodeError:
        return False
    stack, _, value = text.rpartition(" ")
    if not stack or not value.isdigit():
        return False
    return all(frame.strip() for frame in stack.split(";"))


def detect_format(data: bytes) -> SourceFormat:
    if not data:
        raise UnknownFormat("empty input")
    if data[:4] == MAGIC:
        return SourceFormat.NATIVE
    if data[:2] == GZIP_MAGIC:
        return SourceFormat.PPROF
    if _folded_first_line(data):
        return SourceFormat.FOLDED
    if looks_like_pprof(data):
        return SourceFormat.PPROF
    raise UnknownFormat("input matches no supported profile format")


def load_profile(data: bytes, name: str = "") -> Profile:
    """Detect and parse; ``name`` labels profiles whose format carries
    no name of its own (folded, pprof)."""
    fmt = detect_format(data)
    if fmt is SourceFormat.NATIVE:
        return deserialize(data)
    if fmt is SourceFormat.PPROF:
        profile = parse_pprof(data)
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"folded input is not UTF-8: {e}") from e
        profile = parse_folded(text)
    if name:
        profile.meta.name = name
    return profile


def load(path: str) -> Profile:
    with open(path, "rb") as fh:
        data = fh.read()
    return load_profile(data, name=os.path.basename(path))
