import math

import numpy as np
import pytest

import percolab as pl
from percolab.geometry import (
    BoxRegion,
    Complement,
    Cone,
    Difference,
    FullSpace,
    HalfSpace,
    Intersection,
    InvalidAperture,
    cone_cover_directions,
    contains,
    direction,
    discretize,
    region_from_dict,
    region_to_dict,
    translate,
    truncated_cone,
)

E1 = direction([1.0, 0.0])
ORIGIN = (0.0, 0.0)


def test_direction_validation():
    with pytest.raises(ValueError):
        pl.Direction((1.0, 1.0))
    assert direction([3, 4]).vector == (0.6, 0.8)
    with pytest.raises(ValueError):
        direction([0.0, 0.0])


def test_halfspace_membership():
    assert contains(HalfSpace(E1, ORIGIN), (3.0, -5.0))
    assert not contains(HalfSpace(E1, ORIGIN), (-1.0, 2.0))
    assert contains(HalfSpace(E1, ORIGIN), (0.0, 7.0))  # boundary inclusive


def test_degenerate_cone_is_a_ray():
    ray = Cone(E1, 0.0, ORIGIN)
    assert contains(ray, (2.0, 0.0))
    assert not contains(ray, (1.0, 1.0))
    assert not contains(ray, (-1.0, 0.0))


def test_full_aperture_cone_equals_halfspace():
    rng = np.random.default_rng(3)
    cone = Cone(E1, 1.0, ORIGIN)
    hs = HalfSpace(E1, ORIGIN)
    for _ in range(1000):
        y = tuple(rng.normal(scale=5.0, size=2))
        assert contains(cone, y) == contains(hs, y)


def test_cone_monotone_in_aperture():
    rng = np.random.default_rng(4)
    for _ in range(300):
        y = tuple(rng.normal(scale=3.0, size=2))
        d1, d2 = sorted(rng.uniform(0.05, 1.0, size=2))
        if contains(Cone(E1, d1, ORIGIN), y):
            assert contains(Cone(E1, d2, ORIGIN), y)


def test_translation_covariance():
    rng = np.random.default_rng(5)
    regions = [
        HalfSpace(E1, (0.5, -1.0)),
        Cone(direction([1, 2]), 0.4, (1.0, 1.0)),
        BoxRegion((0.0, 2.0), 1.5),
        truncated_cone(E1, 0.7, 3.0, ORIGIN),
        Intersection((HalfSpace(E1, ORIGIN), BoxRegion(ORIGIN, 2.0))),
        Complement(BoxRegion(ORIGIN, 1.0)),
        FullSpace(),
    ]
    for region in regions:
        for _ in range(50):
            v = tuple(rng.normal(scale=2.0, size=2))
            y = tuple(rng.normal(scale=3.0, size=2))
            shifted = translate(region, v)
            assert contains(shifted, tuple(a + b for a, b in zip(y, v))) == contains(region, y)


def test_truncated_cone_relations():
    tc = truncated_cone(E1, 0.6, 2.0, ORIGIN)
    cone = Cone(E1, 0.6, ORIGIN)
    cutoff = HalfSpace(E1, (2.0, 0.0))
    rng = np.random.default_rng(6)
    for _ in range(500):
        y = tuple(rng.normal(scale=3.0, size=2))
        if contains(tc, y, tol=0.0):
            assert contains(cone, y)
        # stay clear of the cutoff plane where both sides are inclusive
        if abs(y[0] - 2.0) > 1e-6 and contains(tc, y, tol=0.0):
            assert not contains(cutoff, y, tol=0.0)


def test_discretize_fullspace_and_empty(square):
    window = pl.box(2, 2)
    assert discretize(FullSpace(), window, 1) == window
    empty = Intersection((HalfSpace(E1, (10.0, 0.0)), HalfSpace(-E1, (-10.0, 0.0))))
    assert discretize(empty, window, 1) == set()


def test_discretize_halfspace_example(square):
    window = pl.box(2, 2)
    got = discretize(HalfSpace(E1, ORIGIN), window, 1)
    assert got == {p for p in window if p[0] >= -1}


def test_discretize_monotone(square):
    window = pl.box(3, 2)
    small = Cone(E1, 0.4, ORIGIN)
    large = Cone(E1, 0.9, ORIGIN)
    ds, dl = discretize(small, window, 1), discretize(large, window, 1)
    assert ds <= dl
    sub_window = pl.box(2, 2)
    assert discretize(large, sub_window, 1) == dl & sub_window


def test_discretize_keeps_interior_points(square):
    rng = np.random.default_rng(7)
    window = pl.box(6, 2)
    region = Cone(direction([2, 1]), 0.5, ORIGIN)
    disc = discretize(region, window, 1)
    for _ in range(300):
        y = rng.normal(scale=3.0, size=2)
        if contains(region, tuple(y), tol=0.0):
            z = pl.round_to_lattice(y)
            if max(abs(c) for c in z) <= 5:
                assert z in disc


def test_discretize_difference_medium(chain):
    # the directed-event medium in d=1: [0, 5) discretizes to cells 0, 3, 6
    med = Difference(Cone(direction([1.0]), 1.0, (0.0,)), HalfSpace(direction([1.0]), (5.0,)))
    window = pl.box(10, 1)
    got = discretize(med, window, 1)
    assert got == {(i,) for i in range(-1, 8)}


def test_discretize_d3_leaves():
    window = pl.box(2, 3)
    hs = HalfSpace(direction([1.0, 0.0, 0.0]), (0.0,) * 3)
    got = discretize(hs, window, 1)
    assert got == {p for p in window if p[0] >= -1}
    cone = Cone(direction([1.0, 0.0, 0.0]), 0.3, (0.0,) * 3)
    got_cone = discretize(cone, window, 1)
    # every cell whose center clearly lies in the cone must be present
    for p in window:
        if contains(cone, p, tol=0.0) and p != (0, 0, 0):
            assert p in got_cone


def test_cone_cover_examples():
    S = cone_cover_directions(E1, 1.0, 0.5)
    assert len(S) <= 2 * 0.5 ** (1 - 2) * 4 + 3
    rng = np.random.default_rng(8)
    cone = Cone(E1, 1.0, ORIGIN)
    for _ in range(2000):
        y = tuple(rng.normal(scale=4.0, size=2))
        if contains(cone, y, tol=0.0):
            assert any(contains(Cone(s, 0.5, ORIGIN), y) for s in S)
    assert cone_cover_directions(E1, 0.3, 0.5) == [E1]
    assert len(cone_cover_directions(direction([1.0]), 1.0, 0.25)) <= 2
    with pytest.raises(InvalidAperture):
        cone_cover_directions(E1, 0.0, 0.1)
    with pytest.raises(InvalidAperture):
        cone_cover_directions(E1, 0.5, -0.1)


def test_region_serialization_round_trip():
    region = Difference(
        Cone(direction([1, 1]), 0.5, (0.0, 1.0)),
        Intersection((HalfSpace(E1, (2.0, 0.0)), BoxRegion(ORIGIN, 3.0))),
    )
    back = region_from_dict(region_to_dict(region))
    rng = np.random.default_rng(9)
    for _ in range(200):
        y = tuple(rng.normal(scale=3.0, size=2))
        assert contains(back, y) == contains(region, y)


def test_invalid_aperture():
    with pytest.raises(InvalidAperture):
        Cone(E1, 1.5, ORIGIN)


def test_dimension_mismatch():
    from percolab.geometry import DimensionMismatch

    with pytest.raises(DimensionMismatch):
        contains(HalfSpace(E1, ORIGIN), (1.0, 2.0, 3.0))
