import math

import numpy as np
import pytest

import percolab as pl
from percolab.convex import (
    DegenerateTable,
    EmptyTable,
    MissingDirection,
    NormTable,
    choose_dual,
    convexity_defect,
    dual_directions,
    duality_residual,
    extend_homogeneous,
    load_table,
    minimizer_check,
    minimizer_violations,
    norm_table,
    polar_set,
    save_table,
    support_function,
    triangle_check,
    unit_ball,
)
from percolab.geometry import direction


def grid_directions(n, extra=()):
    out = [
        direction([math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)])
        for k in range(n)
    ]
    out.extend(direction(v) for v in extra)
    return out


def euclid_table(n=64, extra=()):
    return norm_table([(s, 1.0) for s in grid_directions(n, extra)])


def l1_table():
    dirs = grid_directions(8)
    return norm_table([(s, abs(s.vector[0]) + abs(s.vector[1])) for s in dirs])


def linf_table(n=8):
    dirs = grid_directions(n)
    return norm_table([(s, max(abs(s.vector[0]), abs(s.vector[1]))) for s in dirs])


def test_extend_euclid_345():
    tab = euclid_table(extra=[(0.6, 0.8)])
    assert extend_homogeneous(tab, (3.0, 4.0)) == pytest.approx(5.0, abs=1e-9)


def test_extend_homogeneity():
    tab = l1_table()
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.normal(size=2)
        lam = float(rng.uniform(0.1, 5.0))
        assert extend_homogeneous(tab, lam * x) == pytest.approx(
            lam * extend_homogeneous(tab, x), rel=1e-12
        )


def test_extend_linf_64_directions():
    dirs = grid_directions(64)
    tab = norm_table([(s, max(abs(s.vector[0]), abs(s.vector[1]))) for s in dirs])
    assert extend_homogeneous(tab, (1.0, 1.0)) == pytest.approx(1.0, abs=1e-3)


def test_extend_d1():
    tab = norm_table([(direction([1.0]), 2.0), (direction([-1.0]), 3.0)])
    assert extend_homogeneous(tab, (2.0,)) == pytest.approx(4.0)
    assert extend_homogeneous(tab, (-2.0,)) == pytest.approx(6.0)
    assert extend_homogeneous(tab, (0.0,)) == 0.0


def test_unit_ball_euclid_polygon():
    ball = unit_ball(euclid_table(32))
    for v in ball.vertices:
        assert math.hypot(*v) == pytest.approx(1.0, abs=1e-9)
    assert len(ball.vertices) == 32


def test_unit_ball_l1_is_cross_polytope():
    ball = unit_ball(l1_table())
    got = sorted(tuple(round(c, 9) for c in v) for v in ball.vertices)
    assert got == [(-1.0, -0.0), (-0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]


def test_scaling_halves_body():
    tab = l1_table()
    doubled = tab.scaled(2.0)
    b1 = unit_ball(tab)
    b2 = unit_ball(doubled)
    got = sorted(tuple(round(c, 12) for c in v) for v in b2.vertices)
    want = sorted(tuple(round(c / 2, 12) for c in v) for v in b1.vertices)
    assert got == want


def test_polar_euclid_is_disc():
    # intersection of tangent half-planes circumscribes the disc
    W = polar_set(euclid_table(64))
    outer = 1.0 / math.cos(math.pi / 64)
    for v in W.vertices:
        assert 1.0 - 1e-9 <= math.hypot(*v) <= outer + 1e-9


def test_polar_l1_is_linf_ball():
    W = polar_set(l1_table())
    assert sorted(W.vertices) == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]


def test_polar_support_round_trip():
    tab = l1_table()
    W = polar_set(tab)
    # support function of the polar at table directions equals the value
    for s, v, _ in tab.entries:
        assert support_function(W, s.vector) == pytest.approx(v, abs=1e-9)


def test_dual_directions_euclid_self_dual():
    tab = euclid_table(64)
    for vec in [(1.0, 0.0), (0.6, 0.8)]:
        s = direction(vec)
        pair = choose_dual(tab, s)
        dot = sum(a * b for a, b in zip(pair.s_star.vector, s.vector))
        assert dot >= math.cos(2 * math.pi / 64)


def test_dual_directions_linf():
    tab = linf_table()
    e1 = direction([1.0, 0.0])
    ds = dual_directions(tab, e1)
    assert len(ds) == 1
    assert ds[0].vector == pytest.approx((1.0, 0.0))
    corner = direction([1.0, 1.0])
    arc = dual_directions(tab, corner)
    vecs = {tuple(round(c, 6) for c in d.vector) for d in arc}
    assert (1.0, -0.0) in vecs or (1.0, 0.0) in vecs
    assert (0.0, 1.0) in vecs or (-0.0, 1.0) in vecs
    chosen = choose_dual(tab, corner)
    assert chosen.s_star.vector == pytest.approx(corner.vector)
    assert chosen.gap == pytest.approx(0.0, abs=1e-9)


def test_duality_residual_construction():
    angles = grid_directions(32)
    ltab = linf_table(32)
    vals = {s: extend_homogeneous(ltab, s.vector) for s in angles}
    pptab = norm_table([(s, v) for s, v in vals.items()])
    hs_entries = []
    for u in angles:
        ratios = [
            vals[sp] / sum(a * b for a, b in zip(u.vector, sp.vector))
            for sp in angles
            if sum(a * b for a, b in zip(u.vector, sp.vector)) > 1e-9
        ]
        hs_entries.append((u, min(ratios)))
    hstab = norm_table(hs_entries, closure="angular-linear")
    for s in angles:
        res = duality_residual(pptab, hstab, s)
        assert abs(res.value) <= 1e-9


def test_duality_residual_euclid():
    pp = euclid_table(32)
    hs = norm_table([(s, 1.0) for s in grid_directions(32)], closure="angular-linear")
    res = duality_residual(pp, hs, direction([1.0, 0.0]))
    assert abs(res.value) <= 1e-9


def test_duality_missing_direction():
    pp = euclid_table(16)
    half = [s for s in grid_directions(16) if s.vector[0] > 0.01]
    hs = norm_table([(s, 1.0) for s in half], closure="angular-linear")
    with pytest.raises(MissingDirection):
        duality_residual(pp, hs, direction([-1.0, 0.0]))


def test_triangle_check_euclid():
    assert triangle_check(euclid_table(64), 500, seed=2) <= 1e-9


def test_triangle_check_gauge_is_subadditive():
    # the polygon gauge closure is subadditive for any positive table
    rng = np.random.default_rng(3)
    dirs = grid_directions(16)
    tab = norm_table([(s, float(rng.uniform(0.5, 2.0))) for s in dirs])
    assert triangle_check(tab, 500, seed=4) <= 1e-9


def test_minimizer_checks():
    tab = euclid_table(32)
    e1 = direction([1.0, 0.0])
    assert minimizer_check(tab, e1, e1)
    ltab = linf_table()
    assert minimizer_check(ltab, e1, e1)
    # perturb one direction downward: the minimizer property breaks there
    entries = [
        (s, v * (0.9 if abs(s.vector[0] - 1.0) < 1e-12 else 1.0), u)
        for s, v, u in euclid_table(32).entries
    ]
    pert = norm_table(entries)
    s_probe = grid_directions(32)[1]
    viol = minimizer_violations(pert, s_probe, e1)
    assert any(abs(t.vector[0] - 1.0) < 1e-12 for t, _ in viol)


def test_scaling_invariance_of_duality():
    tab = linf_table()
    lam = 2.5
    scaled = tab.scaled(lam)
    s = direction([1.0, 0.0])
    assert extend_homogeneous(scaled, (1.0, 2.0)) == pytest.approx(
        lam * extend_homogeneous(tab, (1.0, 2.0))
    )
    assert choose_dual(scaled, s).s_star.vector == pytest.approx(
        choose_dual(tab, s).s_star.vector
    )
    hs = norm_table([(d, v, 0.0) for d, v, _ in tab.entries], closure="angular-linear")
    hs_scaled = hs.scaled(lam)
    r1 = duality_residual(tab, hs, s).value
    r2 = duality_residual(scaled, hs_scaled, s).value
    assert r2 == pytest.approx(lam * r1, abs=1e-12)


def test_symmetric_table_symmetric_ball():
    tab = norm_table(
        [(s, 1.0 + 0.3 * s.vector[0] ** 2) for s in grid_directions(16)], symmetric=True
    )
    ball = unit_ball(tab)
    vs = {tuple(round(c, 9) for c in v) for v in ball.vertices}
    assert vs == {tuple(round(-c, 9) for c in v) for v in ball.vertices}


def test_easy_duality_inequality():
    # table_hs below the support construction keeps nu_H(s*) <= nu(s) / <s, s*>
    angles = grid_directions(32)
    pptab = euclid_table(32)
    hs_entries = [(s, 0.9) for s in angles]  # pointwise below the construction (=1)
    hstab = norm_table(hs_entries, closure="angular-linear")
    for s in angles:
        pair = choose_dual(pptab, s)
        dot = sum(a * b for a, b in zip(s.vector, pair.s_star.vector))
        nu_h = extend_homogeneous(hstab, pair.s_star.vector)
        assert nu_h <= extend_homogeneous(pptab, s.vector) / dot + 1e-9


def test_convexity_defect_reports_nonconvexity():
    entries = []
    for s in grid_directions(16):
        bump = 1.25 if abs(s.vector[0] - 1.0) < 1e-12 else 1.0
        entries.append((s, bump))
    tab = norm_table(entries)
    assert convexity_defect(tab) > 1e-3
    assert convexity_defect(euclid_table(16)) <= 1e-12


def test_table_validation():
    with pytest.raises(EmptyTable):
        norm_table([])
    with pytest.raises(DegenerateTable):
        norm_table([(direction([1.0, 0.0]), 1.0), (direction([-1.0, 0.0]), 1.0)])
    with pytest.raises(DegenerateTable):
        NormTable(2, ((direction([1.0, 0.0]), -1.0, 0.0),))
    with pytest.raises(DegenerateTable):
        norm_table([(direction([1.0, 0.0]), 1.0), (direction([0.0, 1.0]), 1.0)], symmetric=True)


def test_csv_round_trip(tmp_path):
    tab = norm_table([(s, 1.0 + 0.1 * k, 0.01) for k, s in enumerate(grid_directions(8))])
    path = tmp_path / "table.csv"
    save_table(tab, path)
    back = load_table(path)
    assert len(back.entries) == 8
    for (s1, v1, u1), (s2, v2, u2) in zip(tab.entries, back.entries):
        assert s1.vector == pytest.approx(s2.vector)
        assert v1 == pytest.approx(v2)
        assert u1 == pytest.approx(u2)
