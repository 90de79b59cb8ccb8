import random

import pytest

from profcct.folded import parse_folded
from profcct.model import Frame, MetricDescriptor, Profile, ProfileMeta

P1_TEXT = "main;a;b 3\nmain;a;c 2\nmain;d 5\n"
P2_TEXT = "main;a;b 5\nmain;d 5\nmain;e 1\n"


@pytest.fixture
def p1():
    return parse_folded(P1_TEXT)


@pytest.fixture
def p2():
    return parse_folded(P2_TEXT)


def fr(name: str) -> Frame:
    return Frame(function_name=name)


def sample_paths(profile: Profile):
    """Canonical (path-of-frame-identities, values) list for comparisons."""
    out = []
    for node in range(profile.node_count):
        values = profile.node_values(node)
        path = tuple(f.identity for f in profile.path_frames(node))
        out.append((path, values))
    out.sort()
    return out


def random_samples(rng: random.Random, *, frames=10, max_depth=8,
                   count=50, max_value=100):
    """Random root-first stacks over a small frame alphabet."""
    alphabet = [f"f{i}" for i in range(frames)]
    samples = []
    for _ in range(count):
        depth = rng.randint(1, max_depth)
        path = tuple(rng.choice(alphabet) for _ in range(depth))
        samples.append((path, rng.randint(0, max_value)))
    return samples


def build_from_samples(samples, metric="samples"):
    profile = Profile(ProfileMeta(name="rnd"),
                      [MetricDescriptor(metric, "samples")])
    for path, value in samples:
        profile.add_sample([fr(name) for name in path], [value])
    return profile
