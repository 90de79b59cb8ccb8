"""Command-line driver.

Machine-first output: tab-separated rows on stdout, human tables behind
--pretty. Exit codes: 0 success, 1 usage error, 2 data error. Output
files are written atomically (temp file + rename), so a failing run
never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .errors import ProfileError, UnknownMetric, UnknownPath
from .folded import emit_folded, parse_frame
from .formulas import derive
from .ingest import load
from .layout import MIN_WIDTH_DEFAULT, export_json, export_view
from .model import MetricKind, Profile
from .multi import aggregate, correlate, diff
from .native import serialize
from .views import (ViewKind, collapse_recursion, compute_view, hot_rows,
                    prune, truncate_depth)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _metric_arg(profile: Profile, metric: str | None) -> str | int:
    if metric is None:
        for m in profile.metrics:
            if m.kind is MetricKind.ADDITIVE:
                return m.name
        if profile.metrics:
            return profile.metrics[0].name
        raise UnknownMetric("profile has no metrics")
    if metric.isdigit():
        return int(metric)
    return metric


def _write_atomic(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".profcct-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(data: bytes, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(data.decode("utf-8"))
        if not data.endswith(b"\n"):
            sys.stdout.write("\n")
    else:
        _write_atomic(out, data)


def _ansi_enabled() -> bool:
    return (os.environ.get("PROFCCT_NO_COLOR", "") in ("", "0")
            and sys.stdout.isatty())


def _bold(text: str) -> str:
    return f"\x1b[1m{text}\x1b[0m" if _ansi_enabled() else text


def _print_table(headers: list[str], rows: list[list[str]],
                 pretty: bool) -> None:
    if not pretty:
        for row in rows:
            print("\t".join(row))
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    print(_bold("  ".join(h.ljust(w) for h, w in zip(headers, widths))))
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def _transformed_view(profile, args):
    tree = compute_view(profile, _metric_arg(profile, args.metric), args.view)
    if getattr(args, "collapse_recursion", False):
        tree = collapse_recursion(tree)
    if getattr(args, "threshold", None) is not None:
        tree = prune(tree, args.threshold)
    if getattr(args, "max_depth", None) is not None:
        tree = truncate_depth(tree, args.max_depth)
    return tree


def _cmd_convert(args) -> int:
    profile = load(args.input)
    if args.to == "folded":
        metric = _metric_arg(profile, args.metric)
        _emit(emit_folded(profile, metric).encode(), args.output)
    else:
        _write_atomic(args.output, serialize(profile))
    return 0


def _cmd_info(args) -> int:
    profile = load(args.input)
    rows = [
        ["name", profile.meta.name],
        ["collector", profile.meta.collector],
        ["timestamp", profile.meta.timestamp],
        ["nodes", str(profile.node_count)],
        ["frames", str(profile.frame_count)],
        ["points", str(len(profile.points))],
        ["metrics", str(len(profile.metrics))],
    ]
    for key, value in sorted(profile.meta.properties.items()):
        rows.append(["property", key, value])
    for i, m in enumerate(profile.metrics):
        total = profile.total(i)
        rows.append(["metric", m.name, m.unit, m.kind.value,
                     m.aggregator.value, "" if total is None else str(total)])
    _print_table(["field", "value"], rows, args.pretty)
    return 0


def _cmd_top(args) -> int:
    profile = load(args.input)
    tree = _transformed_view(profile, args)
    rows = [[str(v), f"{pct:.2f}", label]
            for _, v, pct, label in hot_rows(tree, args.count)]
    _print_table(["value", "percent", "label"], rows, args.pretty)
    return 0


def _cmd_view(args) -> int:
    profile = load(args.input)
    tree = _transformed_view(profile, args)
    doc = export_view(tree, min_width=args.min_width)
    _emit(export_json(doc), args.output)
    return 0


def _cmd_diff(args) -> int:
    p1 = load(args.input1)
    p2 = load(args.input2)
    tree = diff(p1, p2, _metric_arg(p1, args.metric), args.view,
                normalize_by_total=args.normalize_by_total)
    if args.threshold is not None:
        tree = prune(tree, args.threshold)
    _emit(export_json(export_view(tree, min_width=args.min_width)),
          args.output)
    return 0


def _cmd_aggregate(args) -> int:
    profiles = [load(path) for path in args.inputs]
    metric = _metric_arg(profiles[0], args.metric)
    tree = aggregate(profiles, metric, missing_as_zero=args.missing_as_zero)
    if args.threshold is not None:
        tree = prune(tree, args.threshold)
    _emit(export_json(export_view(tree, min_width=args.min_width)),
          args.output)
    return 0


def _cmd_correlate(args) -> int:
    profile = load(args.input)
    try:
        from_role, to_role = args.roles.split(":", 1)
    except ValueError:
        raise ProfileError(f"--roles expects FROM:TO, got {args.roles!r}") from None
    stack = [parse_frame(tok) for tok in args.anchor.split(";") if tok]
    anchor = profile.find_node(stack)
    if anchor is None:
        raise UnknownPath(f"anchor path {args.anchor!r} not found")
    projection = correlate(profile, anchor, from_role, to_role)
    metric = _metric_arg(projection, args.metric)
    tree = compute_view(projection, metric, "topdown")
    _emit(export_json(export_view(tree, min_width=args.min_width)),
          args.output)
    return 0


def _cmd_derive(args) -> int:
    profile = load(args.input)
    out = derive(profile, args.formula, args.as_name, exclusive=args.exclusive)
    _write_atomic(args.output, serialize(out))
    return 0


def _cmd_serve(args) -> int:
    from .server import serve
    profiles = [load(path) for path in args.inputs]
    httpd = serve(profiles, args.workspace, args.port, bind=args.bind,
                  ui_dir=args.ui)
    host, port = httpd.server_address[:2]
    print(f"serving {len(profiles)} profile(s) on http://{host}:{port}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def _add_view_flags(p: argparse.ArgumentParser, with_kind: bool = True):
    if with_kind:
        p.add_argument("--view", choices=[k.value for k in ViewKind],
                       default="topdown", help="view shape")
    p.add_argument("--metric", help="metric name or index (default: first additive)")
    p.add_argument("--threshold", type=float, default=None,
                   help="prune subtrees below this fraction of the total")
    p.add_argument("--max-depth", type=int, default=None,
                   help="truncate call paths deeper than N")
    p.add_argument("--collapse-recursion", action="store_true",
                   help="collapse consecutive same-function runs")
    p.add_argument("--min-width", type=float, default=MIN_WIDTH_DEFAULT,
                   help="merge rects narrower than this fraction")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="profcct",
                     description="Calling-context-tree profile toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("convert", parents=[], help="convert to native or folded")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--to", choices=["native", "folded"], default="native")
    p.add_argument("--metric")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("info", help="print metadata and metric totals")
    p.add_argument("input")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=_cmd_info)

    p = sub.add_parser("top", help="print the heaviest rows of a view")
    p.add_argument("input")
    p.add_argument("-n", "--count", type=int, default=10)
    p.add_argument("--pretty", action="store_true")
    _add_view_flags(p)
    p.set_defaults(func=_cmd_top)

    p = sub.add_parser("view", help="export one view as a renderer document")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    _add_view_flags(p)
    p.set_defaults(func=_cmd_view)

    p = sub.add_parser("diff", help="differential view of two profiles")
    p.add_argument("input1")
    p.add_argument("input2")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--view", choices=[k.value for k in ViewKind],
                   default="topdown")
    p.add_argument("--metric")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--normalize-by-total", action="store_true",
                   help="rescale the second profile by total1/total2")
    p.add_argument("--min-width", type=float, default=MIN_WIDTH_DEFAULT)
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("aggregate", help="merge profiles with per-node stats")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--metric")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--missing-as-zero", action="store_true",
                   help="treat absent contexts as zero in the mean")
    p.add_argument("--min-width", type=float, default=MIN_WIDTH_DEFAULT)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("correlate",
                       help="project multi-context points across roles")
    p.add_argument("input")
    p.add_argument("--roles", required=True, metavar="FROM:TO")
    p.add_argument("--anchor", required=True,
                   help="folded-style path of the anchor node")
    p.add_argument("--metric")
    p.add_argument("--min-width", type=float, default=MIN_WIDTH_DEFAULT)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("derive", help="attach a formula metric, write native")
    p.add_argument("input")
    p.add_argument("--formula", required=True)
    p.add_argument("--as", dest="as_name", required=True, metavar="NAME")
    p.add_argument("--exclusive", action="store_true",
                   help="evaluate over exclusive instead of inclusive values")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("serve", help="serve profiles to the browser UI")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--port", type=int, default=7764)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--workspace", default=".",
                   help="root directory for source-code links")
    p.add_argument("--ui", default=None, help="directory of built UI assets")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ProfileError as e:
        print(f"profcct: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        name = getattr(e, "filename", None)
        what = f"{e.strerror}: {name}" if name else str(e)
        print(f"profcct: error: {what}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
