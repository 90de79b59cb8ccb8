"""Exception types shared across the toolkit.

Everything derives from ProfileError so callers (and the CLI) can treat
any domain failure as a data error, distinct from usage errors.
"""


class ProfileError(Exception):
    """Base class for all profile/data errors."""


class DuplicateMetric(ProfileError):
    """A metric name is already present in the profile."""


class ArityError(ProfileError):
    """A sample's stack or value list has the wrong shape."""


class FormatError(ProfileError):
    """Malformed binary or structured input.

    ``offset`` is the byte offset at which the problem was detected,
    when one is meaningful.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (at byte {offset})")
        self.offset = offset


class UnknownFormat(ProfileError):
    """Input bytes match none of the supported profile formats."""


class ParseError(ProfileError):
    """Malformed text input. ``line`` is the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnknownMetric(ProfileError):
    """A metric name (or formula identifier) is not defined."""


class UnknownMetricSemantics(ProfileError):
    """The requested analysis would produce misleading numbers for this
    metric kind (e.g. summing snapshot or derived values)."""


class MergeError(ProfileError):
    """An illegal node-merge directive (no previous sibling, or the two
    nodes map to different source lines)."""


class RangeError(ProfileError):
    """A numeric argument is outside its documented range."""


class EmptyQuery(ProfileError):
    """A search query was empty."""


class MetricMismatch(ProfileError):
    """A multi-profile operation found a profile lacking the metric."""


class UnknownPath(ProfileError):
    """A node path does not exist in the tree."""


class UnknownRole(ProfileError):
    """A monitoring-point role label is absent from the profile."""


class FormulaError(ProfileError):
    """Formula text failed to parse. ``position`` is the 0-based
    character offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class CallbackError(ProfileError):
    """A user callback raised; carries the node path for context."""

    def __init__(self, message: str, path: tuple[str, ...] = ()):
        super().__init__(f"{message} (at {';'.join(path) or '<root>'})")
        self.path = path


class ViewError(ProfileError):
    """An operation was applied to a view kind it does not support."""
