"""Collapsed-stack ("folded") text format.

One line per stack: semicolon-joined root-first frames followed by a
single space and a non-negative integer value. A frame is ``name``,
``module!name``, or ``name@file:line`` (the module and location parts
combine). There is no escape syntax, so frame names containing ``;``
or newlines cannot be emitted.
"""

from __future__ import annotations

import re

from .errors import FormatError, ParseError, UnknownMetric
from .model import (Frame, MetricDescriptor, MetricKind, Profile,
                    ProfileMeta)

_FRAME_RE = re.compile(
    r"^(?:(?P<mod>[^!]*)!)?(?P<name>.*?)(?:@(?P<file>[^@:]*):(?P<line>\d+))?$",
    re.DOTALL)


def parse_frame(text: str) -> Frame:
    """Parse one folded frame token."""
    m = _FRAME_RE.match(text)
    if m is None or not m.group("name"):
        raise ValueError(f"malformed frame {text!r}")
    return Frame(
        function_name=m.group("name"),
        module_name=m.group("mod") or "",
        file_path=m.group("file") or "",
        line=int(m.group("line")) if m.group("line") else 0,
    )


def render_frame(frame: Frame) -> str:
    name = frame.label
    if ";" in name or "\n" in name or (frame.module_name and "!" in frame.module_name):
        raise FormatError(f"frame name {name!r} cannot be folded (contains ';')")
    out = name
    if frame.module_name:
        out = f"{frame.module_name}!{out}"
    if frame.file_path and frame.line:
        out = f"{out}@{frame.file_path}:{frame.line}"
    return out


def parse_folded(text: str, metric_name: str = "samples",
                 unit: str = "samples",
                 meta: ProfileMeta | None = None) -> Profile:
    """Build a profile from folded text; duplicate stacks accumulate."""
    if meta is None:
        meta = ProfileMeta(collector="folded")
    profile = Profile(meta, [MetricDescriptor(metric_name, unit,
                                              MetricKind.ADDITIVE)])
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        stack_text, _, value_text = line.rpartition(" ")
        if not stack_text:
            raise ParseError("expected '<stack> <value>'", lineno)
        try:
            value = int(value_text)
        except ValueError:
            raise ParseError(f"bad sample value {value_text!r}", lineno) from None
        if value < 0:
            raise ParseError(f"negative sample value {value}", lineno)
        try:
            stack = [parse_frame(tok) for tok in stack_text.split(";")]
        except ValueError as e:
            raise ParseError(str(e), lineno) from None
        profile.add_sample(stack, [value])
    return profile


def emit_folded(profile: Profile, metric: str | int | None = None) -> str:
    """Render every node with a non-zero exclusive value, one line per
    node in lexicographic path order."""
    if metric is None:
        idx = _first_additive(profile)
    elif isinstance(metric, int):
        if not 0 <= metric < len(profile.metrics):
            raise UnknownMetric(f"no metric index {metric}")
        idx = metric
    else:
        idx = profile.metric_index(metric)
    if profile.metrics[idx].kind is not MetricKind.ADDITIVE:
        raise UnknownMetric(
            f"metric {profile.metrics[idx].name!r} is not additive")

    rendered: dict[int, str] = {}

    def frame_text(fid: int) -> str:
        s = rendered.get(fid)
        if s is None:
            s = render_frame(profile.frame(fid))
            rendered[fid] = s
        return s

    col = profile.raw_column(idx)
    lines: list[tuple[tuple[str, ...], int]] = []
    for node in range(1, profile.node_count):
        v = col[node]
        if not v:
            continue
        path = tuple(frame_text(fid) for fid in profile.path(node))
        lines.append((path, int(v)))
    lines.sort(key=lambda item: item[0])
    return "".join(f"{';'.join(path)} {v}\n" for path, v in lines)


def _first_additive(profile: Profile) -> int:
    for i, m in enumerate(profile.metrics):
        if m.kind is MetricKind.ADDITIVE:
            return i
    raise UnknownMetric("profile has no additive metric")
