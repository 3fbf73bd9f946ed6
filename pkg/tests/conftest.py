import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from connor.graph import from_edges, parse_edge_list

FIG1 = """\
# the running example: five vertices, arcs as u v dist cost
a b 4 2
b c 2 1
a e 5 1
e b 1 1
e c 2 6
a d 1 2
d e 2 3
"""


@pytest.fixture
def fig1():
    return parse_edge_list(FIG1)


def random_graph(n, m, seed, max_w=10):
    rng = np.random.default_rng(seed)
    arcs = set()
    for _ in range(m):
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u != v:
            arcs.add((u, v))
    return from_edges(n, [(u, v, int(rng.integers(1, max_w + 1)), int(rng.integers(1, max_w + 1)))
                          for u, v in sorted(arcs)])


@st.composite
def small_graphs(draw, max_n=7, max_w=9, zero_weights=False):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u, v in itertools.product(range(n), repeat=2) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 3 * n)))
    lo = 0 if zero_weights else 1
    w = st.integers(lo, max_w)
    return from_edges(n, [(u, v, draw(w), draw(w)) for u, v in chosen])


def simple_paths(g, s, t):
    """Every simple s->t path as (dist, cost, vertices), by exhaustive DFS."""
    out = []

    def walk(v, seen, d, c, path):
        if v == t:
            out.append((d, c, list(path)))
            return
        for e in g.out_adj[v]:
            if e.target not in seen:
                seen.add(e.target)
                path.append(e.target)
                walk(e.target, seen, d + e.dist, c + e.cost, path)
                path.pop()
                seen.discard(e.target)

    walk(s, {s}, 0, 0, [s])
    return out


def brute_csd(g, s, t, theta):
    best = [d for d, c, _ in simple_paths(g, s, t) if c <= theta]
    return min(best) if best else None


def brute_frontier(g, s, t):
    pts = {(d, c) for d, c, _ in simple_paths(g, s, t)}
    return sorted(p for p in pts if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in pts))


from hypothesis import settings as _settings

_settings.register_profile("default", deadline=None)
_settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
