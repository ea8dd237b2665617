import pytest

from searchlab.complexity import build_lower_bound_family, rho_for_subset
from searchlab.instances import HeuristicVector, PathInstance


@pytest.fixture
def chain():
    """s -> a -> b -> t, unit weights; the learner's standard fixture."""
    return PathInstance(
        ["s", "a", "b", "t"],
        [("s", "a", 1), ("a", "b", 1), ("b", "t", 1)],
        "s",
        "t",
    )


@pytest.fixture
def diamond():
    """Two disjoint s-t paths; GBFS behavior flips on the a/b order."""
    return PathInstance(
        ["s", "a", "b", "t"],
        [("s", "a", 1), ("s", "b", 1), ("a", "t", 1), ("b", "t", 1)],
        "s",
        "t",
    )


@pytest.fixture
def two_vertex():
    return PathInstance(["s", "t"], [("s", "t", 1)], "s", "t")


@pytest.fixture
def fig_family():
    """The n=8 lower-bound family x_1..x_4."""
    return build_lower_bound_family(8)


@pytest.fixture
def fig_rho():
    """The subset {2, 3} heuristic for n=8."""
    return rho_for_subset(8, {2, 3})


@pytest.fixture
def reopening_fixture():
    """5-vertex instance where an inadmissible heuristic closes 'a' on the
    expensive route before the cheap route through 'b' rediscovers it.

    Hand-simulated expectations (frozen in the tests): without reopening the
    engine returns s->a->t at cost 4; with reopening it reselects 'a' and
    returns s->b->a->t at cost 3.
    """
    instance = PathInstance(
        ["s", "a", "b", "c", "t"],
        [("s", "a", 3), ("s", "b", 1), ("b", "a", 1), ("a", "t", 1), ("s", "c", 10)],
        "s",
        "t",
    )
    rho = HeuristicVector({"s": 0, "a": 0, "b": 2, "c": 100, "t": 0})
    return instance, rho
