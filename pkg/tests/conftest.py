import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from angelic.geometry import Polygon


def random_convex(rng: np.random.Generator, cx=0.0, cy=0.0, scale=1.0, k=7) -> Polygon:
    pts = rng.uniform(-scale, scale, size=(k, 2)) + (cx, cy)
    hull = ConvexHull(pts)
    return Polygon.from_coords(pts[hull.vertices])


def random_star(rng: np.random.Generator, cx=0.0, cy=0.0, scale=1.0, k=8) -> Polygon:
    """Star-shaped around its center; usually nonconvex."""
    gap = 0.05  # keep consecutive angles apart so the outline stays simple
    ang = np.sort(rng.uniform(0, 2 * math.pi - k * gap, k)) + np.arange(k) * gap
    r = rng.uniform(0.3 * scale, scale, k)
    return Polygon.from_coords(np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)]))


def grid_points(poly: Polygon, res: int = 200) -> tuple[np.ndarray, float]:
    """Samples of the closed polygon and a radius h such that every point of it is within h of a sample.

    A res x res grid over the bbox, kept where it falls inside, plus the
    boundary sampled at the grid step (thin spikes may hold no grid point).
    """
    from angelic.geometry import points_in_polygon

    x0, y0, x1, y1 = poly.bbox
    xs, ys = np.linspace(x0, x1, res), np.linspace(y0, y1, res)
    g = np.stack(np.meshgrid(xs, ys), -1).reshape(-1, 2)
    step = min((x1 - x0), (y1 - y0)) / (res - 1)
    edge = []
    for a, b in poly.edges():
        k = max(2, int(math.ceil(math.dist(a, b) / step)) + 1)
        t = np.linspace(0, 1, k)[:, None]
        edge.append(np.asarray(a) * (1 - t) + np.asarray(b) * t)
    pts = np.vstack([g[points_in_polygon(g, poly)], *edge])
    return pts, math.hypot((x1 - x0) / (res - 1), (y1 - y0) / (res - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_toy_domain(rng: np.random.Generator, n_max: int = 6):
    """A small digraph, a vocabulary of abstract states and two operators with exact tables."""
    from angelic.core import AbstractState, ToyGraph, ToyOperator, brute_force_valuation

    n = int(rng.integers(3, n_max + 1))
    edges = tuple(
        (a, b, float(rng.integers(1, 9)))
        for a in range(n)
        for b in range(n)
        if a != b and rng.random() < 0.45
    )
    g = ToyGraph(n, edges)
    vocab = [AbstractState.singleton(i) for i in range(n)]
    for _ in range(3):
        members = [i for i in range(n) if rng.random() < 0.5] or [int(rng.integers(n))]
        vocab.append(AbstractState.of(members))
    vocab = list(dict.fromkeys(vocab))

    def op():
        within = frozenset(i for i in range(n) if rng.random() < 0.8) or frozenset(range(n))
        ends = frozenset(i for i in within if rng.random() < 0.6) or within
        return ToyOperator(within, ends, allow_empty=bool(rng.random() < 0.3))

    a, b = op(), op()
    return g, vocab, (a, brute_force_valuation(a, g)), (b, brute_force_valuation(b, g))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
