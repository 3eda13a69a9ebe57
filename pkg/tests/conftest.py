import itertools
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from linkcomm.errors import GraphError
from linkcomm.graph import Graph, LinkSet, load_graph

DATA = Path(__file__).parent / "data"
BOWTIE_EDGES = [("a", "b"), ("a", "c"), ("b", "c"), ("c", "d"), ("c", "e"), ("d", "e")]

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def bowtie() -> Graph:
    return load_graph(BOWTIE_EDGES)


@pytest.fixture(scope="session")
def bowtie_path() -> Path:
    return DATA / "bowtie.txt"


def numbered(g: Graph, *numbers: int) -> LinkSet:
    """Link set from 1-based link numbers (bow-tie: 1=(a,b) ... 6=(d,e))."""
    return g.link_set(k - 1 for k in numbers)


def brute_psi(g: Graph, ids) -> Fraction:
    """Ratio node-cut straight from its definition, in exact arithmetic."""
    ids = list(ids)
    if not ids or len(ids) == g.m:
        return Fraction(1)
    inner = [0] * g.n
    for lid in ids:
        for node in g.links[lid]:
            inner[node] += 1
    cut = sum(Fraction(inner[i] * (g.degree[i] - inner[i]), g.degree[i]) for i in range(g.n))
    k_in = 2 * len(ids)
    return cut / (k_in * (1 - Fraction(k_in, 2 * g.m)))


def brute_connected(g: Graph, ids) -> bool:
    ids = set(ids)
    if not ids:
        return False
    start = next(iter(ids))
    reached = {start}
    changed = True
    while changed:
        changed = False
        nodes = {node for lid in reached for node in g.links[lid]}
        for lid in ids - reached:
            if set(g.links[lid]) & nodes:
                reached.add(lid)
                changed = True
    return reached == ids


def brute_minima(g: Graph, strict: bool = True) -> list[frozenset]:
    """Connected local minima found by plain enumeration with exact psi values."""
    values = {}
    for bits in range(1 << g.m):
        values[bits] = brute_psi(g, [j for j in range(g.m) if bits >> j & 1])
    out = []
    for bits, value in values.items():
        ids = [j for j in range(g.m) if bits >> j & 1]
        if not brute_connected(g, ids):
            continue
        nbrs = [values[bits ^ (1 << j)] for j in range(g.m)]
        if all(v > value if strict else v >= value for v in nbrs):
            out.append(frozenset(ids))
    return out


def random_connected_graph(rng: random.Random, n_range=(4, 8), m_range=(5, 16)) -> Graph:
    while True:
        n = rng.randint(*n_range)
        pairs = list(itertools.combinations(range(n), 2))
        lo, hi = max(m_range[0], n - 1), min(m_range[1], len(pairs))
        if lo > hi:
            continue
        try:
            return load_graph(rng.sample(pairs, rng.randint(lo, hi)))
        except GraphError:
            continue


@st.composite
def connected_graphs(draw, max_nodes=10, min_nodes=2):
    n = draw(st.integers(min_nodes, max_nodes))
    edges = {(draw(st.integers(0, i - 1)), i) for i in range(1, n)}
    extra = [p for p in itertools.combinations(range(n), 2) if p not in edges]
    if extra:
        edges |= set(draw(st.lists(st.sampled_from(extra), max_size=len(extra), unique=True)))
    order = draw(st.permutations(sorted(edges)))
    return load_graph(order)


@st.composite
def graphs_with_subset(draw, max_nodes=10):
    g = draw(connected_graphs(max_nodes=max_nodes))
    bits = draw(st.integers(0, (1 << g.m) - 1))
    return g, LinkSet(g.m, bits)
