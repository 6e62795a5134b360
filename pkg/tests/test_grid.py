import numpy as np
import pytest
from hypothesis import given, settings

from rankcost.grid import (
    DuplicatePinError,
    GridMap,
    InstanceFormatError,
    Net,
    OutOfBoundsError,
    PinOnObstacleError,
    ProblemInstance,
    RoutingOutcome,
    Vertex,
    generate_instance,
    load_instance,
    manhattan,
    neighbors,
    save_instance,
    validate_outcome,
)

from .conftest import instances, simple_paths


@pytest.mark.parametrize("a, b, d", [((0, 0), (3, 4), 7), ((2, 2), (2, 2), 0), ((5, 1), (1, 1), 4)])
def test_manhattan(a, b, d):
    assert manhattan(Vertex(*a), Vertex(*b)) == d


def test_neighbors_corner_and_center():
    g = GridMap(3, 3)
    assert neighbors(g, Vertex(0, 0)) == [(0, 1), (1, 0)]
    assert neighbors(g, Vertex(1, 1)) == [(1, 0), (1, 2), (0, 1), (2, 1)]


def test_neighbors_skip_obstacles():
    g = GridMap(3, 3, frozenset({Vertex(1, 0)}))
    assert neighbors(g, Vertex(0, 0)) == [(0, 1)]


def test_neighbors_out_of_bounds():
    with pytest.raises(OutOfBoundsError):
        neighbors(GridMap(3, 3), Vertex(3, 0))


@given(instances())
def test_neighbors_never_blocked(inst):
    g = inst.grid
    for y in range(g.height):
        for x in range(g.width):
            ns = neighbors(g, Vertex(x, y))
            assert len(ns) <= 4
            assert all(g.in_bounds(n) and n not in g.obstacles for n in ns)
            assert all(manhattan(n, (x, y)) == 1 for n in ns)


MINIMAL = b"""{
  "version": 1,
  "width": 2,
  "height": 2,
  "obstacles": [],
  "nets": [
    {"start": [0, 0], "end": [1, 1]}
  ]
}
"""


def test_load_minimal():
    inst = load_instance(MINIMAL)
    assert inst.num_nets == 1
    assert inst.grid.size == 4
    assert save_instance(inst) == MINIMAL


def test_empty_obstacles_serialize_as_empty_list():
    assert b'"obstacles": []' in save_instance(load_instance(MINIMAL))


@pytest.mark.parametrize(
    "doc, err",
    [
        (b"{not json", InstanceFormatError),
        (b'{"version": 2, "width": 2, "height": 2, "obstacles": [], "nets": []}', InstanceFormatError),
        (b'{"version": 1, "width": 2, "height": 2, "obstacles": []}', InstanceFormatError),
        (b'{"version": 1, "width": 2, "height": 2, "obstacles": [[0]], "nets": []}', InstanceFormatError),
        (b'{"version": 1, "width": 2, "height": 2, "obstacles": [[2, 0]], "nets": []}', OutOfBoundsError),
        (b'{"version": 1, "width": 2, "height": 2, "obstacles": [],'
         b' "nets": [{"start": [0, 0], "end": [0, 2]}]}', OutOfBoundsError),
        (b'{"version": 1, "width": 2, "height": 2, "obstacles": [[1, 1]],'
         b' "nets": [{"start": [0, 0], "end": [1, 1]}]}', PinOnObstacleError),
        (b'{"version": 1, "width": 3, "height": 2, "obstacles": [],'
         b' "nets": [{"start": [0, 0], "end": [1, 1]}, {"start": [1, 1], "end": [2, 0]}]}', DuplicatePinError),
        (b'{"version": 1, "width": 3, "height": 2, "obstacles": [],'
         b' "nets": [{"start": [0, 0], "end": [0, 0]}]}', DuplicatePinError),
    ],
)
def test_load_errors(doc, err):
    with pytest.raises(err):
        load_instance(doc)


def test_error_classes_are_distinct():
    kinds = {InstanceFormatError, OutOfBoundsError, DuplicatePinError, PinOnObstacleError}
    assert len(kinds) == 4
    for a in kinds:
        for b in kinds - {a}:
            assert not issubclass(a, b)


def test_round_trip_random():
    for i in range(100):
        inst = generate_instance(3 + i % 13, 2 + i % 7, 1 + i % 3, [0.0, 0.1, 0.3][i % 3], seed=i)
        doc = save_instance(inst)
        again = load_instance(doc)
        assert again == inst
        assert save_instance(again) == doc


def test_save_is_canonical_and_sorted():
    inst = ProblemInstance(
        GridMap(4, 4, frozenset({Vertex(3, 0), Vertex(0, 2), Vertex(1, 0)})),
        (Net(Vertex(0, 0), Vertex(3, 3)),),
    )
    doc = save_instance(inst)
    assert doc == save_instance(inst)
    assert b'"obstacles": [[0,2],[1,0],[3,0]]' in doc


def test_generate_matches_smallest_suite():
    inst = generate_instance(16, 16, 4, 0.0, seed=0)
    assert (inst.grid.width, inst.grid.height, inst.num_nets) == (16, 16, 4)
    assert not inst.grid.obstacles


def test_generate_density_and_determinism():
    a = generate_instance(16, 16, 4, 0.2, seed=7)
    assert a == generate_instance(16, 16, 4, 0.2, seed=7)
    assert a != generate_instance(16, 16, 4, 0.2, seed=8)
    assert len(a.grid.obstacles) == round(0.2 * 256)


def test_generate_infeasible():
    from rankcost.grid import GenerationError

    with pytest.raises(GenerationError):
        generate_instance(2, 2, 3, 0.0, seed=0)
    with pytest.raises(GenerationError):
        generate_instance(3, 3, 2, 0.8, seed=0)


def _two_nets():
    return ProblemInstance(GridMap(3, 3), (Net(Vertex(0, 0), Vertex(2, 0)), Net(Vertex(0, 2), Vertex(2, 2))))


def test_validate_valid_outcome():
    inst = _two_nets()
    out = RoutingOutcome((
        ((0, 0), (1, 0), (2, 0)),
        ((0, 2), (1, 2), (2, 2)),
    ))
    report = validate_outcome(inst, out)
    assert report.valid and report.all_connected
    assert report.total_length == 4 == out.total_length


def test_validate_flags_shared_vertex():
    inst = _two_nets()
    out = RoutingOutcome((
        ((0, 0), (0, 1), (1, 1), (2, 1), (2, 0)),
        ((0, 2), (1, 2), (1, 1), (2, 1), (2, 2)),
    ))
    report = validate_outcome(inst, out)
    assert not report.valid
    assert any("(1, 1)" in e for e in report.errors)


def test_validate_flags_bad_steps_and_obstacles():
    inst = ProblemInstance(GridMap(3, 3, frozenset({Vertex(1, 1)})), (Net(Vertex(0, 0), Vertex(2, 2)),))
    assert not validate_outcome(inst, RoutingOutcome((((0, 0), (1, 1), (2, 2)),))).valid
    assert not validate_outcome(inst, RoutingOutcome((((0, 0), (1, 0), (1, 1), (1, 2), (2, 2)),))).valid
    assert not validate_outcome(inst, RoutingOutcome((((0, 0), (1, 0), (2, 0), (2, 1)),))).valid


def test_validate_flags_path_through_foreign_pin():
    inst = ProblemInstance(GridMap(3, 2), (Net(Vertex(0, 0), Vertex(2, 0)), Net(Vertex(1, 0), Vertex(1, 1))))
    report = validate_outcome(inst, RoutingOutcome((((0, 0), (1, 0), (2, 0)), None)))
    assert not report.valid


def test_unconnected_net_is_not_an_error():
    inst = _two_nets()
    report = validate_outcome(inst, RoutingOutcome((((0, 0), (1, 0), (2, 0)), None)))
    assert report.valid and not report.all_connected
    assert report.total_length is None


def test_fig1_has_disjoint_solution(fig1):
    """Exhaustive enumeration: the best two-path solution has length 12."""
    a, b = fig1.nets
    best = None
    for p in simple_paths(fig1.grid, a.start, a.end, set(b.pins)):
        for q in simple_paths(fig1.grid, b.start, b.end, set(p)):
            out = RoutingOutcome((p, q))
            report = validate_outcome(fig1, out)
            assert report.valid
            if best is None or report.total_length < best[0]:
                best = (report.total_length, out)
    assert best[0] == 12
    expected = RoutingOutcome((
        ((2, 4), (3, 4), (4, 4), (4, 3), (4, 2), (4, 1), (3, 1), (2, 1), (2, 2)),
        ((2, 0), (1, 0), (1, 1), (1, 2), (1, 3)),
    ))
    report = validate_outcome(fig1, expected)
    assert report.valid and report.total_length == 12


@settings(max_examples=50)
@given(instances())
def test_accepted_paths_are_grid_walks(inst):
    from rankcost.solver import sequential_route

    out = sequential_route(inst, range(inst.num_nets), np.zeros((inst.num_nets, inst.grid.size)))
    report = validate_outcome(inst, out)
    assert report.valid
    for p in out.paths:
        if p is not None:
            assert all(manhattan(a, b) == 1 for a, b in zip(p, p[1:]))
