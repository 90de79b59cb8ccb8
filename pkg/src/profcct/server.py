"""Local HTTP service for the browser UI.

Read-only by construction: loaded profiles are immutable snapshots
keyed by stable integer handles, every endpoint is a pure function of
its query string (responses are cached, repeated GETs are
byte-identical), and source files are only ever read from inside the
configured workspace root after path canonicalization.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from collections import OrderedDict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Sequence
from urllib.parse import parse_qs, unquote, urlsplit

from .errors import ProfileError, RangeError, UnknownMetric
from .formulas import derive
from .layout import (MIN_WIDTH_DEFAULT, export_json, export_view, table_rows)
from .model import MetricKind, Profile
from .multi import aggregate, correlate, diff, histogram, roles_of
from .views import (ViewKind, collapse_recursion, compute_view, prune, search,
                    truncate_depth)


class HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _bad(message: str) -> HttpError:
    return HttpError(400, message)


class ProfileService:
    """Query evaluation over immutable profile snapshots."""

    def __init__(self, profiles: Sequence[Profile], workspace_root: str = "."):
        self.profiles = list(profiles)
        self.workspace_root = Path(workspace_root).resolve()
        self._cache: OrderedDict[tuple, bytes] = OrderedDict()
        self._lock = threading.Lock()

    # -- helpers ----------------------------------------------------------

    def profile(self, handle: str) -> Profile:
        try:
            idx = int(handle)
        except (TypeError, ValueError):
            raise _bad(f"bad profile handle {handle!r}") from None
        if not 0 <= idx < len(self.profiles):
            raise HttpError(404, f"no profile with handle {handle}")
        return self.profiles[idx]

    def _cached(self, key: tuple, build) -> bytes:
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        body = build()
        with self._lock:
            self._cache[key] = body
            while len(self._cache) > 64:
                self._cache.popitem(last=False)
        return body

    def _metric(self, profile: Profile, raw: str | None) -> str | int:
        if raw is None:
            for m in profile.metrics:
                if m.kind is MetricKind.ADDITIVE:
                    return m.name
            if profile.metrics:
                return profile.metrics[0].name
            raise HttpError(404, "profile has no metrics")
        return int(raw) if raw.isdigit() else raw

    def _tree(self, profile: Profile, q: dict):
        kind = q.get("kind", "topdown")
        try:
            kind = ViewKind(kind)
        except ValueError:
            raise _bad(f"bad view kind {kind!r}") from None
        metric = self._metric(profile, q.get("metric"))
        tree = compute_view(profile, metric, kind)
        if q.get("collapse") in ("1", "true"):
            tree = collapse_recursion(tree)
        if "threshold" in q:
            tree = prune(tree, _float(q, "threshold"))
        if "maxdepth" in q:
            tree = truncate_depth(tree, _int(q, "maxdepth"))
        return tree

    # -- endpoint bodies ----------------------------------------------------

    def profiles_doc(self) -> dict:
        out = []
        for i, p in enumerate(self.profiles):
            metrics = []
            for j, m in enumerate(p.metrics):
                total = p.total(j)
                metrics.append({"name": m.name, "unit": m.unit,
                                "kind": m.kind.value,
                                "aggregator": m.aggregator.value,
                                "total": total})
            out.append({
                "handle": i,
                "name": p.meta.name,
                "collector": p.meta.collector,
                "timestamp": p.meta.timestamp,
                "properties": dict(p.meta.properties),
                "metrics": metrics,
                "nodes": p.node_count,
                "points": len(p.points),
                "roles": sorted(roles_of(p) - {"self"}),
            })
        return {"profiles": out}

    def view_doc(self, q: dict) -> bytes:
        p = q.get("p")
        key = ("view", p, q.get("kind"), q.get("metric"), q.get("threshold"),
               q.get("maxdepth"), q.get("collapse"), q.get("minwidth"))

        def build():
            profile = self.profile(p)
            tree = self._tree(profile, q)
            min_width = _float(q, "minwidth") if "minwidth" in q else MIN_WIDTH_DEFAULT
            return export_json(export_view(tree, min_width=min_width))

        return self._cached(key, build)

    def diff_doc(self, q: dict) -> bytes:
        key = ("diff", q.get("p1"), q.get("p2"), q.get("metric"),
               q.get("kind"), q.get("normalize"))

        def build():
            p1 = self.profile(q.get("p1"))
            p2 = self.profile(q.get("p2"))
            metric = self._metric(p1, q.get("metric"))
            kind = q.get("kind", "topdown")
            tree = diff(p1, p2, metric, kind,
                        normalize_by_total=q.get("normalize") in ("1", "true"))
            if "formula" in q:
                tree = derive(tree, q["formula"], q.get("as", "derived"))
            return export_json(export_view(tree))

        return self._cached(key if "formula" not in q else
                            key + (q["formula"], q.get("as")), build)

    def _aggregate_tree(self, q: dict):
        handles = (q.get("p") or "").split(",")
        if not handles or handles == [""]:
            raise _bad("aggregate needs p=H1,H2,…")
        profiles = [self.profile(h) for h in handles]
        metric = self._metric(profiles[0], q.get("metric"))
        return aggregate(profiles, metric,
                         missing_as_zero=q.get("zeros") in ("1", "true"))

    def aggregate_doc(self, q: dict) -> bytes:
        key = ("agg", q.get("p"), q.get("metric"), q.get("zeros"))

        def build():
            return export_json(export_view(self._aggregate_tree(q)))

        return self._cached(key, build)

    def histogram_doc(self, node: int, q: dict) -> bytes:
        agg_q = {"p": q.get("agg"), "metric": q.get("metric"),
                 "zeros": q.get("zeros")}
        key = ("hist", node, agg_q["p"], agg_q["metric"], agg_q["zeros"])

        def build():
            tree = self._aggregate_tree(agg_q)
            if not 0 <= node < tree.size:
                raise HttpError(404, f"no node {node} in this aggregate")
            doc = {"node": node, "label": tree.label(node),
                   "vector": histogram(tree, node),
                   "profiles": tree.profile_names,
                   "stats": {k: v[node] for k, v in tree.stats.items()}}
            return _json_bytes(doc)

        return self._cached(key, build)

    def hover_doc(self, node: int, q: dict) -> bytes:
        profile = self.profile(q.get("p"))
        if not 0 <= node < profile.node_count:
            raise HttpError(404, f"no node {node}")
        frame = profile.node_frame(node)
        same_line = [
            i for i in range(profile.node_count)
            if profile.node_frame(i).source == frame.source
        ] if frame.source else [node]
        metrics = []
        for j, m in enumerate(profile.metrics):
            col = profile.raw_column(j)
            own = col[node]
            line_total = sum(v for i in same_line
                             if (v := col[i]) is not None) if same_line else None
            metrics.append({"name": m.name, "unit": m.unit,
                            "kind": m.kind.value,
                            "value": own, "line_total": line_total})
        doc = {"node": node,
               "function": frame.function_name,
               "module": frame.module_name,
               "file": frame.file_path or None,
               "line": frame.line or None,
               "metrics": metrics}
        return _json_bytes(doc)

    def correlate_doc(self, q: dict) -> bytes:
        key = ("corr", q.get("p"), q.get("anchor"), q.get("from"),
               q.get("to"), q.get("metric"))

        def build():
            profile = self.profile(q.get("p"))
            anchor = _int(q, "anchor")
            from_role = q.get("from")
            to_role = q.get("to")
            if not from_role or not to_role:
                raise _bad("correlate needs from=ROLE and to=ROLE")
            projection = correlate(profile, anchor, from_role, to_role)
            metric = self._metric(projection, q.get("metric"))
            tree = compute_view(projection, metric, ViewKind.TOP_DOWN)
            return export_json(export_view(tree))

        return self._cached(key, build)

    def search_doc(self, q: dict) -> bytes:
        profile = self.profile(q.get("p"))
        text = q.get("q", "")
        if not text:
            raise _bad("search needs a non-empty q parameter")
        tree = self._tree(profile, q)
        ids = sorted(search(tree, text))
        return _json_bytes({"query": text, "ids": ids})

    def rows_doc(self, q: dict) -> bytes:
        profile = self.profile(q.get("p"))
        tree = self._tree(profile, q)
        node = _int(q, "node") if "node" in q else None
        if node is not None and not 0 <= node < tree.size:
            raise HttpError(404, f"no node {node}")
        return _json_bytes({"rows": table_rows(tree, node)})

    def source_doc(self, q: dict) -> tuple[bytes, str]:
        rel = q.get("file")
        if not rel:
            raise _bad("source needs file=PATH")
        target = (self.workspace_root / rel).resolve()
        if not target.is_relative_to(self.workspace_root):
            raise HttpError(403, "path escapes the workspace root")
        if not target.is_file():
            raise HttpError(404, f"no such file: {rel}")
        start = _int(q, "from") if "from" in q else 1
        end = _int(q, "to") if "to" in q else None
        lines = target.read_text(encoding="utf-8", errors="replace").splitlines()
        start = max(start, 1)
        end = len(lines) if end is None else min(end, len(lines))
        body = "\n".join(lines[start - 1:end])
        return body.encode("utf-8"), "text/plain; charset=utf-8"


def _float(q: dict, key: str) -> float:
    try:
        return float(q[key])
    except (ValueError, TypeError):
        raise _bad(f"bad number for {key!r}") from None


def _int(q: dict, key: str) -> int:
    try:
        return int(q[key])
    except (ValueError, TypeError):
        raise _bad(f"bad integer for {key!r}") from None


def _json_bytes(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


_FALLBACK_PAGE = """<!doctype html>
<meta charset="utf-8">
<title>profcct</title>
<style>body{font:14px system-ui;margin:2rem;max-width:48rem}</style>
<h1>profcct</h1>
<p>The browser UI is not built. Build it with
<code>cd frontend && npm install && npm run build</code> and restart with
<code>--ui frontend/dist</code>, or query the API directly:</p>
<ul>
<li><a href="/api/profiles">/api/profiles</a></li>
<li>/api/view?p=0&amp;kind=topdown&amp;metric=0</li>
<li>/api/diff?p1=0&amp;p2=1&amp;metric=0</li>
<li>/api/aggregate?p=0,1&amp;metric=0</li>
</ul>
"""


class _Handler(BaseHTTPRequestHandler):
    service: ProfileService = None  # type: ignore[assignment]
    ui_dir: Path | None = None
    quiet = True

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def do_GET(self):
        try:
            self._route()
        except HttpError as e:
            self._send(e.status, _json_bytes({"error": e.message}),
                       "application/json")
        except (RangeError, UnknownMetric) as e:
            self._send(400, _json_bytes({"error": str(e)}), "application/json")
        except ProfileError as e:
            self._send(404, _json_bytes({"error": str(e)}), "application/json")
        except Exception as e:  # pragma: no cover - last resort
            self._send(500, _json_bytes({"error": f"internal error: {e}"}),
                       "application/json")

    def _route(self):
        url = urlsplit(self.path)
        q = {k: v[-1] for k, v in parse_qs(url.query).items()}
        path = unquote(url.path)
        svc = self.service

        if path == "/api/profiles":
            return self._send(200, _json_bytes(svc.profiles_doc()),
                              "application/json")
        if path == "/api/view":
            return self._send(200, svc.view_doc(q), "application/json")
        if path == "/api/diff":
            return self._send(200, svc.diff_doc(q), "application/json")
        if path == "/api/aggregate":
            return self._send(200, svc.aggregate_doc(q), "application/json")
        if path == "/api/correlate":
            return self._send(200, svc.correlate_doc(q), "application/json")
        if path == "/api/search":
            return self._send(200, svc.search_doc(q), "application/json")
        if path == "/api/rows":
            return self._send(200, svc.rows_doc(q), "application/json")
        if path == "/api/source":
            body, ctype = svc.source_doc(q)
            return self._send(200, body, ctype)
        if path.startswith("/api/node/"):
            parts = path.split("/")
            # /api/node/{id}/histogram or /api/node/{id}/hover
            if len(parts) == 5 and parts[3].lstrip("-").isdigit():
                node = int(parts[3])
                if parts[4] == "histogram":
                    return self._send(200, svc.histogram_doc(node, q),
                                      "application/json")
                if parts[4] == "hover":
                    return self._send(200, svc.hover_doc(node, q),
                                      "application/json")
            raise HttpError(404, f"unknown endpoint {path}")
        if path.startswith("/api/"):
            raise HttpError(404, f"unknown endpoint {path}")
        return self._static(path)

    def _static(self, path: str):
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                return self._send(200, _FALLBACK_PAGE.encode(),
                                  "text/html; charset=utf-8")
            raise HttpError(404, "no UI assets configured")
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not target.is_relative_to(self.ui_dir):
            raise HttpError(403, "path escapes the UI directory")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise HttpError(404, f"no such asset: {path}")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        if ctype.startswith("text/") or ctype in ("application/javascript",
                                                  "application/json"):
            ctype += "; charset=utf-8"
        return self._send(200, target.read_bytes(), ctype)

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(body)


def serve(profiles: Sequence[Profile], workspace_root: str = ".",
          port: int = 7764, bind: str = "127.0.0.1",
          ui_dir: str | None = None, quiet: bool = True) -> ThreadingHTTPServer:
    """Bind the service; the caller drives ``serve_forever()``."""
    service = ProfileService(profiles, workspace_root)
    if ui_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        ui_dir = str(bundled) if (bundled / "index.html").is_file() else None
    handler = type("BoundHandler", (_Handler,), {
        "service": service,
        "ui_dir": Path(ui_dir).resolve() if ui_dir else None,
        "quiet": quiet,
    })
    httpd = ThreadingHTTPServer((bind, port), handler)
    httpd.daemon_threads = True
    return httpd
