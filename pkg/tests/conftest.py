from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from rankcost.grid import generate_instance, load_instance, neighbors

DATA = Path(__file__).parent / "data"

# first calls pay for numba compilation
settings.register_profile("default", deadline=None)
settings.load_profile("default")


def load_fixture(name):
    return load_instance((DATA / name).read_bytes())


@pytest.fixture
def fig1():
    """Two nets on 6x6 where either net's greedy shortest path strands the other.

    ..S.#.     net 1 starts top, ends in the pocket at (1,3)
    #.....
    ..E#..     net 0 ends at (2,2), starts at (2,4)
    .E##..
    ..S..#
    .#....
    """
    return load_fixture("fig1.json")


@st.composite
def instances(draw, max_side=8, max_nets=3, density=0.2):
    w = draw(st.integers(2, max_side))
    h = draw(st.integers(2, max_side))
    d = draw(st.sampled_from([0.0, density]))
    free = w * h - round(d * w * h)
    k = draw(st.integers(1, min(max_nets, free // 2)))
    seed = draw(st.integers(0, 2**31))
    return generate_instance(w, h, k, d, seed=seed)


def random_instances(n, w, h, k, density, seed=0):
    return [generate_instance(w, h, k, density, seed=(seed, i)) for i in range(n)]


def simple_paths(grid, s, e, blocked=()):
    """Every simple path from ``s`` to ``e`` avoiding ``blocked`` (small grids only)."""
    blocked = set(blocked)
    out, path, seen = [], [s], {s}

    def dfs(v):
        if v == e:
            out.append(tuple(path))
            return
        for n in neighbors(grid, v):
            if n not in seen and n not in blocked:
                seen.add(n)
                path.append(n)
                dfs(n)
                path.pop()
                seen.discard(n)

    dfs(s)
    return out


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
