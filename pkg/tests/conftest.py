import itertools
import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from regclique.graph import Graph, Partition, balanced_partition

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def graphs(draw, min_n=0, max_n=7):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [e for e, b in zip(pairs, keep) if b])


@st.composite
def graphs_with_partition(draw, min_n=1, max_n=7):
    g = draw(graphs(min_n=min_n, max_n=max_n))
    k = draw(st.integers(1, g.n))
    return g, balanced_partition(g.n, k)


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for m in range(1 << len(pairs)):
        yield Graph.from_edges(n, [e for i, e in enumerate(pairs) if m >> i & 1])


def brute_clique_number(g):
    """Largest subset that is pairwise adjacent, by plain subset scan."""
    for size in range(g.n, 0, -1):
        for c in itertools.combinations(range(g.n), size):
            if all(g.has_edge(u, v) for u, v in itertools.combinations(c, 2)):
                return size
    return 0


def brute_transversal(g, part):
    for pick in itertools.product(*[sorted(b) for b in part.blocks]):
        if all(g.has_edge(u, v) for u, v in itertools.combinations(pick, 2)):
            return True
    return False


def brute_sat(clauses, num_vars):
    """Exhaustive assignment scan; fine up to ~16 variables."""
    clauses = [tuple(c) for c in clauses]
    for m in range(1 << num_vars):
        if all(any((m >> (abs(l) - 1) & 1) == (l > 0) for l in c) for c in clauses):
            return True
    return False


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


# acceptance lines are collected here and printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
