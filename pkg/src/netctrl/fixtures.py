"""Bundled example graphs and seeded random graph generators."""

from __future__ import annotations

import os
import random
from fractions import Fraction
from importlib import resources

from .graph import Graph, parse_graph

FIXTURES = (
    "example1",
    "example2",
    "counterexample1",
    "counterexample2",
    "six_node",
    "ltf_ten_node",
)

WEIGHTS = (Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2), Fraction(3, 2))


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("netctrl.data").joinpath(f"{name}.graph").read_text()


def load_fixture(name: str) -> Graph:
    return parse_graph(fixture_text(name))


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get("NETCTRL_SEED")
    return default if raw in (None, "") else int(raw)


def random_graph(rng: random.Random, n_min: int = 1, n_max: int = 10,
                 density: float | None = None) -> Graph:
    """Random weighted digraph with random nonempty leader and target sets."""
    n = rng.randint(n_min, n_max)
    if density is None:
        density = rng.uniform(0.1, 0.45)
    edges = []
    for s in range(1, n + 1):
        for d in range(1, n + 1):
            if s != d and rng.random() < density:
                edges.append((s, d, rng.choice(WEIGHTS)))
    nodes = list(range(1, n + 1))
    leaders = sorted(rng.sample(nodes, rng.randint(1, max(1, n // 3))))
    targets = sorted(rng.sample(nodes, rng.randint(1, max(1, min(n, 4)))))
    return Graph(n, tuple(edges), tuple(leaders), tuple(targets))


def random_prop5_graph(rng: random.Random, n_min: int = 4, n_max: int = 10) -> Graph:
    """Graph with a target-only independent follower SCC that no leader feeds.

    A random follower block is made strongly connected (a cycle plus chords)
    and every edge into it from outside is removed.  Leader edges into any
    other target-only independent follower SCC are dropped as well, so the
    result is never leader-target follower connected.
    """
    from .extensions import scc_analyze

    g = random_graph(rng, n_min, n_max)
    n = g.n
    nodes = list(range(1, n + 1))
    leaders = sorted(rng.sample(nodes, rng.randint(1, max(1, (n - 1) // 3))))
    followers = [v for v in nodes if v not in leaders]
    size = rng.randint(1, min(3, len(followers)))
    block = rng.sample(followers, size)
    bset = set(block)
    edges = {(s, d): w for s, d, w in g.edges if not (d in bset and s not in bset)}
    for i, v in enumerate(block):
        if size > 1:
            edges[(v, block[(i + 1) % size])] = rng.choice(WEIGHTS)
    for s in block:
        for d in block:
            if s != d and rng.random() < 0.3:
                edges.setdefault((s, d), rng.choice(WEIGHTS))
    others = [v for v in nodes if v not in bset]
    extra = rng.sample(others, rng.randint(0, min(2, len(others))))
    targets = sorted(bset | set(extra))
    g = Graph(n, tuple((s, d, w) for (s, d), w in edges.items()), tuple(leaders), tuple(targets))
    lset = set(leaders)
    fed = {v for c in scc_analyze(g).target_only_independent for v in c}
    return g.without_edges([(s, d) for s, d, _ in g.edges if s in lset and d in fed])
