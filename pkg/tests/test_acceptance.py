"""Acceptance suite.

Each test covers one acceptance criterion at its stated tolerance and
prints one [acceptance] PASS/FAIL line (visible with ``pytest -s`` or
in the captured output of a failing run). The randomized corpus usws
fixed seeds, so every run checks identical inputs.
"""

import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from profcct.folded import emit_folded, parse_folded
from profcct.layout import export_json, export_view
from profcct.model import (Frame, MetricDescriptor, MonitoringPoint, Profile,
                           ProfileMeta)
from profcct.multi import aggregate, correlate, diff, histogram
from profcct.native import deserialize, serialize
from profcct.pprof import parse_pprof
from profcct.views import collapse_recursion, compute_view, prune

from conftest import P1_TEXT, P2_TEXT, build_from_samples, fr, random_samples
from oracles import (aggregate_oracle, bottomup_level1_oracle, diff_oracle,
                     flat_oracle, topdown_oracle)
from pprof_fixture import simple_cpu_profile


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")


def _corpus(n_profiles: int, seed: int, big_every: int = 50):
    """Randomized profiles within the stated bounds: <=10k samples,
    <=50 distinct frames, depth <=30."""
    rng = random.Random(seed)
    for i in range(n_profiles):
        if big_every and i % big_every == big_every - 1:
            count = rng.randint(5_000, 10_000)
        else:
            count = rng.randint(20, 600)
        samples = random_samples(
            rng, frames=rng.randint(3, 50),
            max_depth=rng.randint(1, 30), count=count, max_value=1_000)
        yield samples


def test_inclusive_metric_oracle():
    with criterion("inclusive-metric oracle (500 randomized profiles)"):
        for samples in _corpus(500, seed=1001):
            profile = build_from_samples(samples)
            tree = compute_view(profile, "samples", "topdown")
            incl, excl = topdown_oracle(samples)
            for node in range(tree.size):
                path = tree.label_path(node)
                assert tree.incl[node].item() == incl[path]
                assert tree.excl[node].item() == excl[path]


def test_view_cross_consistency():
    with criterion("view cross-consistency (bottom-up and flat vs top-down)"):
        for samples in _corpus(500, seed=2002):
            profile = build_from_samples(samples)
            td = compute_view(profile, "samples", "topdown")
            bu = compute_view(profile, "samples", "bottomup")
            fl = compute_view(profile, "samples", "flat")
            total = td.total
            level1 = {bu.label(i): bu.incl[i].item()
                      for i in range(1, bu.size) if bu.parent[i] == 0}
            assert sum(level1.values()) == total
            assert level1 == bottomup_level1_oracle(samples)
            depths = fl.depths()
            fn_excl = {fl.label(i): fl.excl[i].item()
                       for i in range(1, fl.size) if depths[i] == 3}
            _, excl_o = flat_oracle(samples)
            for name, value in fn_excl.items():
                assert value == excl_o[name]
                assert level1.get(name, 0) == value


def test_transform_conservation():
    with criterion("transform conservation (prune and collapse)"):
        for samples in _corpus(500, seed=3003):
            profile = build_from_samples(samples)
            td = compute_view(profile, "samples", "topdown")
            total = td.total
            for threshold in (0, 0.01, 0.25, 1):
                assert prune(td, threshold).total == total
            assert collapse_recursion(td).total == total


def test_diff_oracle():
    with criterion("diff oracle (200 random pairs, tags/deltas/antisymmetry)"):
        rng = random.Random(4004)
        swap = {"added": "deleted", "deleted": "added",
                "increased": "decreased", "decreased": "increased",
                "unchanged": "unchanged"}
        for _ in range(200):
            s1 = random_samples(rng, frames=rng.randint(3, 20),
                                max_depth=rng.randint(1, 10),
                                count=rng.randint(5, 120))
            s2 = random_samples(rng, frames=rng.randint(3, 20),
                                max_depth=rng.randint(1, 10),
                                count=rng.randint(5, 120))
            pa, pb = build_from_samples(s1), build_from_samples(s2)
            fwd = diff(pa, pb, "samples")
            got = {fwd.label_path(i): (fwd.tag_name(i), fwd.value1(i),
                                       fwd.value2(i))
                   for i in range(1, fwd.size)}
            want = diff_oracle(s1, s2)
            assert set(got) == set(want)
            for path, row in want.items():
                assert got[path] == row
            rev = diff(pb, pa, "samples")
            rgot = {rev.label_path(i): (rev.tag_name(i), rev.value1(i),
                                        rev.value2(i))
                    for i in range(1, rev.size)}
            assert set(rgot) == set(got)
            for path, (tag, m1, m2) in got.items():
                rtag, rm1, rm2 = rgot[path]
                assert rtag == swap[tag] and (rm1, rm2) == (m2, m1)
                d1 = None if (m1 is None or m2 is None) else m2 - m1
                d2 = None if (rm1 is None or rm2 is None) else rm2 - rm1
                assert d1 is None if d2 is None else d1 == -d2


def test_aggregation_oracle():
    with criterion("aggregation oracle (stats and histogram order)"):
        rng = random.Random(5005)
        for _ in range(60):
            sets = [random_samples(rng, frames=rng.randint(3, 15),
                                   max_depth=rng.randint(1, 8),
                                   count=rng.randint(5, 80))
                    for _ in range(rng.randint(1, 6))]
            profiles = [build_from_samples(s) for s in sets]
            agg = aggregate(profiles, "samples")
            want = aggregate_oracle(sets)
            got_paths = {agg.label_path(i): i for i in range(1, agg.size)}
            assert set(got_paths) == set(want)
            for path, node in got_paths.items():
                w = want[path]
                assert agg.vectors[node] == w["vector"]
                assert histogram(agg, node) == w["vector"]
                assert agg.stats["sum"][node] == w["sum"]
                assert agg.stats["min"][node] == w["min"]
                assert agg.stats["max"][node] == w["max"]
                assert agg.stats["mean"][node] == pytest.approx(w["mean"])


def test_correlation_conservation():
    with criterion("correlation conservation (alloc/use/reuse fixtures)"):
        rng = random.Random(6006)
        for _ in range(25):
            profile = Profile(ProfileMeta(name="mem"),
                              [MetricDescriptor("bytes", "bytes")])
            allocs = [[fr("main"), fr(f"alloc{i}")] for i in range(rng.randint(1, 6))]
            uses = [[fr("main"), fr("work"), fr(f"use{i}")]
                    for i in range(rng.randint(1, 6))]
            reuses = [[fr("main"), fr("work"), fr(f"reuse{i}")]
                      for i in range(rng.randint(1, 4))]
            for _ in range(rng.randint(1, 40)):
                ctx = [("alloc", rng.choice(allocs)), ("use", rng.choice(uses))]
                if rng.random() < 0.5:
                    ctx.append(("reuse", rng.choice(reuses)))
                profile.add_sample_multi(ctx, [rng.randint(1, 100)])
            anchors = {node for pt in profile.points
                       for role, node in pt.contexts if role == "alloc"}
            projected = sum(correlate(profile, a, "alloc", "use").total("bytes")
                            for a in anchors)
            carried = sum(pt.values[0] for pt in profile.points
                          if any(role == "alloc" for role, _ in pt.contexts))
            assert projected == carried


def _canon(profile: Profile):
    nodes = []
    for node in range(profile.node_count):
        path = tuple(f.identity for f in profile.path_frames(node))
        nodes.append((path, profile.node_values(node)))
    nodes.sort()
    points = []
    for p in profile.points:
        ctx = tuple((role, tuple(f.identity for f in profile.path_frames(n)))
                    for role, n in p.contexts)
        points.append((ctx, p.values))
    points.sort()
    return nodes, points


def test_format_round_trips():
    with criterion("native round-trip identity (1000 random profiles)"):
        rng = random.Random(7007)
        for _ in range(1000):
            samples = random_samples(rng, frames=rng.randint(2, 25),
                                     max_depth=rng.randint(1, 12),
                                     count=rng.randint(1, 80))
            profile = build_from_samples(samples)
            back = deserialize(serialize(profile))
            assert _canon(back) == _canon(profile)
    with criterion("folded emit/parse identity on canonical text"):
        rng = random.Random(7008)
        for _ in range(200):
            samples = random_samples(rng, frames=rng.randint(2, 25),
                                     max_depth=rng.randint(1, 12),
                                     count=rng.randint(1, 80))
            text = emit_folded(build_from_samples(samples))
            assert emit_folded(parse_folded(text)) == text
    with criterion("pprof ingestion preserves per-metric totals"):
        rng = random.Random(7009)
        for _ in range(50):
            names = [f"f{i}" for i in range(rng.randint(2, 15))]
            stacks = []
            for _ in range(rng.randint(1, 60)):
                depth = rng.randint(1, 8)
                stack = [rng.choice(names) for _ in range(depth)]
                stacks.append((stack, [rng.randint(0, 1000),
                                       rng.randint(0, 10 ** 9)]))
            blob = simple_cpu_profile(
                stacks, sample_types=(("cpu", "samples"), ("wall", "ns")))
            profile = parse_pprof(blob)
            assert profile.total("cpu") == sum(v[0] for _, v in stacks)
            assert profile.total("wall") == sum(v[1] for _, v in stacks)


def test_cli_black_box(tmp_path, capsys, monkeypatch):
    from profcct.cli import main
    golden = Path(__file__).parent / "golden"
    with criterion("CLI black-box suite (golden outputs)"):
        (tmp_path / "p1.folded").write_text(P1_TEXT)
        (tmp_path / "p2.folded").write_text(P2_TEXT)
        (tmp_path / "p1x2.folded").write_text(
            "main;a;b 6\nmain;a;c 4\nmain;d 10\n")
        monkeypatch.chdir(tmp_path)

        def run(*argv):
            assert main(list(argv)) == 0
            return capsys.readouterr().out

        run("convert", "p1.folded", "-o", "p1.pcct")
        assert run("info", "p1.pcct") == (golden / "p1.info.txt").read_text()
        assert run("top", "p1.pcct", "--view", "bottomup", "-n", "3") == \
            (golden / "p1.top_bottomup.tsv").read_text()
        assert run("convert", "p1.pcct", "--to", "folded", "-o", "-") == \
            (golden / "p1.folded.txt").read_text()
        assert run("view", "p1.pcct", "--view", "topdown",
                   "--min-width", "0").rstrip("\n") == \
            (golden / "p1.view_topdown.json").read_text().rstrip("\n")
        assert run("diff", "p1.pcct", "p2.folded",
                   "--min-width", "0").rstrip("\n") == \
            (golden / "p1p2.diff.json").read_text().rstrip("\n")
        assert run("aggregate", "p1.pcct", "p1x2.folded",
                   "--min-width", "0").rstrip("\n") == \
            (golden / "p1.aggregate.json").read_text().rstrip("\n")


# -- performance (desk-scale response-time proxy) ----------------------------


def _build_big_profile(n_nodes=1_000_000, n_funcs=3900, layers=13,
                       value_fraction=0.26, seed=7) -> Profile:
    """A production-shaped synthetic profile: a layered call graph with
    call-site locality, several sample types, and monitoring points on
    the sampled contexts."""
    rng = random.Random(seed)
    per_layer = n_funcs // layers

    def callees(f: int) -> list[int]:
        level = f // per_layer
        if level >= layers - 1:
            return []
        base = (level + 1) * per_layer
        h = (f * 2654435761) % per_layer
        return [base + (h + j) % per_layer for j in range(3 + (f % 2))]

    metrics = [MetricDescriptor("samples", "count"),
               MetricDescriptor("cpu", "nanoseconds"),
               MetricDescriptor("alloc_objects", "count"),
               MetricDescriptor("alloc_space", "bytes"),
               MetricDescriptor("inuse_space", "bytes")]
    profile = Profile(ProfileMeta(name="synthetic", collector="synthetic"),
                      metrics)
    frames = [profile.intern_frame(Frame(
        function_name=f"pkg{i % 97}.Func{i}", module_name=f"mod{i % 40}.so",
        file_path=f"src/pkg{i % 97}/file{i % 7}.go", line=(i % 500) + 1))
        for i in range(n_funcs)]
    parent = profile._parent
    frame_of = profile._frame_of
    cols = profile._values
    from collections import deque
    queue = deque()

    def add(par: int, func: int) -> int:
        nid = len(parent)
        parent.append(par)
        frame_of.append(frames[func])
        for col in cols:
            col.append(None)
        return nid

    queue.append((add(0, 0), 0))
    while queue and len(parent) < n_nodes:
        node, func = queue.popleft()
        for f2 in callees(func):
            if len(parent) >= n_nodes:
                break
            queue.append((add(node, f2), f2))
    sampled = random.Random(seed + 1).sample(
        range(1, len(parent)), int(len(parent) * value_fraction))
    for i in sampled:
        vals = (rng.randrange(1, 10_000), rng.randrange(10 ** 6, 10 ** 9),
                rng.randrange(1, 5_000), rng.randrange(10 ** 4, 10 ** 8),
                rng.randrange(10 ** 3, 10 ** 7))
        for m, v in enumerate(vals):
            cols[m][i] = v
        profile._points.append(MonitoringPoint((("self", i),), vals))
    profile._child_map = None
    return profile


def test_performance_million_nodes(tmp_path):
    from profcct import _kernels
    with criterion("performance: 1M-node load + top-down export < 10 s, "
                   "each view transform < 2 s"):
        big = _build_big_profile()
        assert big.node_count == 1_000_000
        blob = serialize(big)
        path = tmp_path / "big.pcct"
        path.write_bytes(blob)
        size_mb = len(blob) / 1e6
        del big

        t0 = time.perf_counter()
        profile = deserialize(path.read_bytes())
        t_load = time.perf_counter() - t0

        t0 = time.perf_counter()
        td = compute_view(profile, "cpu", "topdown")
        t_topdown = time.perf_counter() - t0

        t0 = time.perf_counter()
        doc = export_json(export_view(td))
        t_export = time.perf_counter() - t0

        timings = {"topdown": t_topdown}
        t0 = time.perf_counter()
        compute_view(profile, "cpu", "bottomup")
        timings["bottomup"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        compute_view(profile, "cpu", "flat")
        timings["flat"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        prune(td, 0.001)
        timings["prune"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        collapse_recursion(td)
        timings["collapse"] = time.perf_counter() - t0

        end_to_end = t_load + t_topdown + t_export
        report = (f"kernel backend={_kernels.backend()} file={size_mb:.1f}MB "
                  f"load={t_load:.2f}s topdown={t_topdown:.2f}s "
                  f"export={t_export:.2f}s (end-to-end {end_to_end:.2f}s); "
                  + " ".join(f"{k}={v:.2f}s" for k, v in timings.items()))
        print(f"[acceptance] performance numbers: {report}")
        Path(__file__).with_name("acceptance_perf.txt").write_text(report + "\n")
        assert json.loads(doc)["total"] > 0
        assert end_to_end < 10.0, report
        for name, t in timings.items():
            assert t < 2.0, f"{name} took {t:.2f}s ({report})"
