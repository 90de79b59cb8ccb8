"""Host-callback registry for customized analysis.

Two hook points exist: ``on_visit`` callbacks run during traversals and
view computation and may return structural directives (elide, merge);
``on_metric`` callbacks compute a per-node value for ``derive``.
Callbacks must be pure functions of the node they are given.
"""

from __future__ import annotations

from typing import Callable

_HOOK_KINDS = ("on_visit", "on_metric")


class Handle:
    """Returned by registration; call ``unregister()`` to remove."""

    def __init__(self, registry: "Hooks", kind: str, callback):
        self._registry = registry
        self.kind = kind
        self.callback = callback

    def unregister(self) -> None:
        self._registry._remove(self)


class Hooks:
    """An ordered set of registered callbacks."""

    def __init__(self):
        self._visit: list[Handle] = []
        self._metric: list[Handle] = []

    @property
    def visitors(self) -> list:
        return [h.callback for h in self._visit]

    @property
    def metric_callbacks(self) -> list:
        return [h.callback for h in self._metric]

    def register(self, hook: str, callback: Callable) -> Handle:
        if hook not in _HOOK_KINDS:
            raise ValueError(f"hook must be one of {_HOOK_KINDS}, got {hook!r}")
        if not callable(callback):
            raise TypeError("callback must be callable")
        handle = Handle(self, hook, callback)
        (self._visit if hook == "on_visit" else self._metric).append(handle)
        return handle

    def _remove(self, handle: Handle) -> None:
        for bucket in (self._visit, self._metric):
            if handle in bucket:
                bucket.remove(handle)


_default = Hooks()


def default_registry() -> Hooks:
    return _default


def register_node_callback(hook: str, callback: Callable,
                           registry: Hooks | None = None) -> Handle:
    """Register a callback into ``registry`` (the process-wide default
    when omitted) and return its handle."""
    return (registry or _default).register(hook, callback)
