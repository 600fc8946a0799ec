import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import percolab as pl
from percolab.lattice import (
    DimensionMismatch,
    NotSymmetric,
    Reducible,
    add,
    canonical_edge,
    make_lattice_spec,
    spec_from_config,
    spec_to_config,
)

points2 = st.tuples(st.integers(-20, 20), st.integers(-20, 20))


def brute_exterior_boundary(spec, pts):
    pts = set(pts)
    out = set()
    for x in pts:
        for g in spec.offsets:
            y = add(x, g)
            if y not in pts:
                out.add(y)
    return out


def test_make_spec_chain(chain):
    assert chain.range == 1.0
    assert chain.coarse_radius == 1
    assert chain.offsets == ((-1,), (1,))


def test_make_spec_square(square):
    assert square.range == 1.0
    assert square.coarse_radius == 1


def test_even_sublattice_is_reducible():
    with pytest.raises(Reducible):
        make_lattice_spec(2, [(2, 0), (-2, 0), (0, 2), (0, -2)])


def test_not_symmetric_without_auto():
    with pytest.raises(NotSymmetric):
        make_lattice_spec(2, [(1, 0), (0, 1), (0, -1)], auto_symmetrize=False)
    spec = make_lattice_spec(2, [(1, 0), (0, 1)])
    assert (-1, 0) in spec.offsets


def test_offset_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        make_lattice_spec(2, [(1, 0, 0)])


def test_zero_offset_rejected():
    with pytest.raises(ValueError):
        make_lattice_spec(1, [(0,)])


def test_graph_distance_examples(chain, square):
    assert pl.graph_distance(square, (0, 0), (3, 4)) == 7
    assert pl.graph_distance(chain, (0,), (5,)) == 5
    diag = make_lattice_spec(2, [(1, 0), (0, 1), (1, 1), (1, -1)])
    assert pl.graph_distance(diag, (0, 0), (2, 2)) == 2


def test_graph_distance_metric_properties(square):
    pts = [(0, 0), (2, 1), (-1, 3), (4, -2)]
    for x, y in itertools.combinations(pts, 2):
        assert pl.graph_distance(square, x, y) == pl.graph_distance(square, y, x)
    for x, y, z in itertools.permutations(pts, 3):
        assert pl.graph_distance(square, x, z) <= (
            pl.graph_distance(square, x, y) + pl.graph_distance(square, y, z)
        )


def test_box_cardinalities():
    assert pl.box(0, 1) == {(0,)}
    assert len(pl.box(1, 2)) == 9
    assert len(pl.box(2, 3)) == 125
    assert pl.box_at((5, 5), 1) == {(5 + a, 5 + b) for a in (-1, 0, 1) for b in (-1, 0, 1)}


def test_boundaries_match_definition(square, chain):
    A = pl.box(1, 2)
    ext = pl.exterior_boundary(square, A)
    assert ext == brute_exterior_boundary(square, A)
    # the ell-infinity ring at 2 minus its four corners
    ring = {p for p in pl.box(2, 2) if max(abs(p[0]), abs(p[1])) == 2}
    corners = {(2, 2), (2, -2), (-2, 2), (-2, -2)}
    assert ext == ring - corners
    assert len(ext) == 12

    assert pl.interior_boundary(chain, {(0,)}) == {(0,)}
    assert pl.exterior_boundary(chain, {(0,)}) == {(-1,), (1,)}
    assert pl.interior_boundary(square, set()) == set()
    assert pl.exterior_boundary(square, set()) == set()


def test_boundary_disjointness(square):
    A = {(0, 0), (1, 0), (1, 1), (3, 3)}
    assert pl.exterior_boundary(square, A) & A == set()
    assert pl.interior_boundary(square, A) <= A


def test_edges_within(square):
    assert pl.edges_within(square, {(0, 0), (1, 0)}) == {((0, 0), (1, 0))}
    assert len(pl.edges_within(square, pl.box(1, 2))) == 12
    assert pl.edges_within(square, {(0, 0)}) == set()


def test_edges_within_union_superset(square):
    A = pl.box_at((0, 0), 1)
    B = pl.box_at((2, 2), 1)
    union_edges = pl.edges_within(square, A | B)
    assert union_edges >= pl.edges_within(square, A) | pl.edges_within(square, B)


def test_round_to_lattice():
    assert pl.round_to_lattice((0.4, 0.6)) == (0, 1)
    assert pl.round_to_lattice((0.5,)) == (1,)
    assert pl.round_to_lattice((-0.5,)) == (0,)
    assert pl.round_to_lattice((3.0, -2.0)) == (3, -2)


@given(points2, points2)
def test_total_order_is_strict(x, y):
    assert not pl.total_order_less(x, x)
    if x != y:
        assert pl.total_order_less(x, y) != pl.total_order_less(y, x)


@given(points2, points2, points2)
def test_total_order_transitive(x, y, z):
    if pl.total_order_less(x, y) and pl.total_order_less(y, z):
        assert pl.total_order_less(x, z)


def test_total_order_example():
    assert pl.total_order_less((0, 1), (1, 0))


def test_cell_of_examples(chain):
    assert pl.cell_of(chain, (0.2,)) == (0,)
    assert pl.cell_of(chain, (1.6,)) == (3,)
    assert pl.cell_of(chain, (3.0,)) == (3,)
    assert pl.cell_of(chain, (-1.5,)) == (0,)
    assert pl.cell_of(chain, (-1.6,)) == (-3,)


@settings(max_examples=200)
@given(st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False))
def test_cells_partition_the_plane(x, y):
    spec = pl.make_lattice_spec(2, [(1, 0), (0, 1)])
    v = pl.cell_of(spec, (x, y))
    side = spec.cell_side
    assert all(c % side == 0 for c in v)
    # the half-open box of v contains the point, and no neighbor cell does
    for c, vc in zip((x, y), v):
        assert vc - side / 2 <= c < vc + side / 2


def test_cell_points(chain):
    assert pl.cell_points(chain, (3,)) == {(2,), (3,), (4,)}


def test_canonical_edge_orders():
    assert canonical_edge((1, 0), (0, 0)) == ((0, 0), (1, 0))


def test_config_round_trip(square):
    cfg = spec_to_config(square)
    back = spec_from_config(cfg)
    assert back.offsets == square.offsets
    assert back.coarse_radius == square.coarse_radius


def test_check_point_rejects_bad_length(square):
    with pytest.raises(DimensionMismatch):
        square.check_point((1, 2, 3))
