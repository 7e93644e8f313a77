"""Bundled benchmark problems.

Each builder returns a ProblemBundle; ``scripts/make_fixtures.py`` writes them
to ``angelic/data/*.json`` and ``load_fixture`` reads them back by name.
"""
from __future__ import annotations

from importlib import resources
from typing import Callable

from .bundle import FlatProblem, ProblemBundle, loads
from .domains.door import corridor_door_puzzle
from .domains.explicit import cyclic_micro as _cyclic_micro
from .domains.flat import random_graph
from .domains.nav import NavProblem, Region, RegionDecomposition
from .geometry import Point2, Polygon, Workspace
from .roadmap import RoadmapConfig

import numpy as np

B = Polygon.box


def corridor4(n: int = 500, seed: int = 0) -> ProblemBundle:
    """S-shaped corridor through four overlapping rectangular regions."""
    ws = Workspace(B(0, 0, 10, 8), (B(2, 0, 4, 6), B(6, 2, 10, 8)))
    regions = RegionDecomposition(
        (
            Region("R1", B(0, 0, 2, 8), True),
            Region("R2", B(0, 6, 6, 8), True),
            Region("R3", B(4, 0, 6, 8), True),
            Region("R4", B(4, 0, 10, 2), True),
        )
    )
    p = NavProblem(ws, regions, Point2(1, 1), B(8.5, 0.5, 9.5, 1.5), RoadmapConfig(n, None, seed))
    return ProblemBundle("nav", "corridor4", p, "S-shaped corridor, four convex regions")


def nav_structured(n: int = 10_000, seed: int = 1) -> ProblemBundle:
    """Trap room: the goal is straight ahead of the start but walled off.

    A Euclidean heuristic pulls grid search into the large middle room, while
    the region bounds show right away that the way round is along the bottom
    corridor and up the right-hand side.
    """
    ws = Workspace(B(0, 0, 20, 20), (B(0, 1, 1.5, 20), B(3, 1, 19, 1.5), B(18, 1.5, 19, 20), B(1.5, 18.5, 18, 20)))
    regions = RegionDecomposition(
        (
            Region("Bottom", B(0, 0, 20, 1), True),
            Region("Mouth", B(1.5, 0.5, 3, 2), True),
            Region("Room", B(1.5, 1.5, 18, 18.5), True),
            Region("Right", B(19, 0, 20, 20), True),
        )
    )
    p = NavProblem(ws, regions, Point2(2, 0.5), B(19.1, 18, 19.9, 19.5), RoadmapConfig(n, None, seed))
    return ProblemBundle("nav", "nav_structured", p, "dead-end room next to a thin corridor")


def nav_revisit(n: int = 300, seed: int = 0) -> ProblemBundle:
    """The best path leaves the upper region, passes under a wall and comes back."""
    ws = Workspace(B(0, 0, 10, 4), (B(4.8, 1, 5.2, 4),))
    regions = RegionDecomposition((Region("Upper", B(0, 0.8, 10, 4), False), Region("Lower", B(0, 0, 10, 1), True)))
    p = NavProblem(ws, regions, Point2(2, 3), B(7.5, 2.5, 8.5, 3.5), RoadmapConfig(n, None, seed))
    return ProblemBundle("nav", "nav_revisit", p, "optimal path re-enters its first region")


def door_corridor(order, switch_rooms=None, n: int = 190, seed: int = 0, name: str | None = None) -> ProblemBundle:
    p = corridor_door_puzzle(tuple(order), switch_rooms, RoadmapConfig(n, None, seed))
    return ProblemBundle("door", name or f"door{len(order)}", p, "rooms in a row, one door per wall")


def door_fig1(n: int = 300, seed: int = 0) -> ProblemBundle:
    """Five doors whose switches force the toggle order 1, 3, 2, 4, 5."""
    b = door_corridor((0, 2, 1, 3, 4), None, n, seed, "door_fig1")
    return ProblemBundle("door", b.name, b.problem, "five doors; each switch sits just before its door")


def door_fig6(n: int = 300, seed: int = 0) -> ProblemBundle:
    """Six doors with every switch in the start room."""
    b = door_corridor(tuple(range(6)), [0] * 6, n, seed, "door_fig6")
    return ProblemBundle("door", b.name, b.problem, "six doors; all switches in the start room")


def flat_random(seed: int = 0, n_max: int = 50) -> ProblemBundle:
    graph, start = random_graph(np.random.default_rng(seed), n_max)
    return ProblemBundle("flat", "flat_random", FlatProblem(graph, start, {"seed": seed, "n_max": n_max}),
                         "random digraph with an admissible heuristic")


def cyclic_micro() -> ProblemBundle:
    return ProblemBundle("explicit", "cyclic_micro", _cyclic_micro(),
                         "hand-written bounds where a deferred plan is needed for the optimum")


BUILDERS: dict[str, Callable[[], ProblemBundle]] = {
    "corridor4": corridor4,
    "nav_structured": nav_structured,
    "nav_revisit": nav_revisit,
    "door1": lambda: door_corridor((0,), name="door1"),
    "door2": lambda: door_corridor((1, 0), [0, 0], name="door2"),
    "door3": lambda: door_corridor((0, 2, 1), name="door3"),
    "door4": lambda: door_corridor((0, 1, 2, 3), [0] * 4, name="door4"),
    "door_fig1": door_fig1,
    "door_fig6": door_fig6,
    "flat_random": flat_random,
    "cyclic_micro": cyclic_micro,
}


def fixture_names() -> list[str]:
    return sorted(BUILDERS)


def fixture_text(name: str) -> str:
    if name not in BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")
    return resources.files("angelic").joinpath("data", f"{name}.json").read_text()


def load_fixture(name: str, validate: bool = True) -> ProblemBundle:
    return loads(fixture_text(name), validate)
