"""Norm tables and the direction-duality machinery.

A :class:`NormTable` samples a positively homogeneous function on the
unit sphere (directions, values, uncertainties).  In d = 2 the table is
closed into a gauge by the convex hull of the points ``s_i / value_i``:
``extend_homogeneous`` is the Minkowski functional of that polygon, which
is exactly homogeneous and subadditive by construction.  Estimated tables
need not be convex-consistent; the convexity defect (how far raw points
sit inside the hull) is reported as a statistical diagnostic.

Dual directions of ``s`` are the outward normals of the unit-ball
boundary at ``s / value(s)``: one normal on an edge interior, the closed
arc between the adjacent edge normals at a vertex.  ``choose_dual`` picks
the arc element angularly closest to ``s``.

d = 2 is the fully supported geometry path; d >= 3 supports
``extend_homogeneous`` and ``duality_residual`` through nearest-direction
interpolation of the sampled values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Direction, direction


class EmptyTable(ValueError):
    pass


class DegenerateTable(ValueError):
    pass


class MissingDirection(ValueError):
    pass


@dataclass(frozen=True)
class NormTable:
    dimension: int
    entries: tuple  # of (Direction, value, uncertainty)
    symmetric: bool = False
    closure: str = "polygon-gauge"

    def __post_init__(self):
        if not self.entries:
            raise EmptyTable("norm table has no entries")
        for s, v, u in self.entries:
            if v <= 0.0:
                raise DegenerateTable(f"non-positive value {v} at {s.vector}")
            if u < 0.0:
                raise ValueError("uncertainty must be >= 0")
        mat = np.asarray([s.vector for s, _, _ in self.entries])
        if np.linalg.matrix_rank(mat, tol=1e-9) < self.dimension:
            raise DegenerateTable("directions do not span R^d")
        if self.symmetric:
            have = {tuple(np.round(s.vector, 9)) for s, _, _ in self.entries}
            for s, _, _ in self.entries:
                if tuple(np.round([-c for c in s.vector], 9)) not in have:
                    raise DegenerateTable(f"missing antipode of {s.vector}")

    def scaled(self, lam: float) -> "NormTable":
        return NormTable(
            self.dimension,
            tuple((s, lam * v, lam * u) for s, v, u in self.entries),
            self.symmetric,
            self.closure,
        )


def norm_table(entries, symmetric: bool = False, closure: str = "polygon-gauge") -> NormTable:
    """Build a table from (direction-like, value[, uncertainty]) items.

    ``closure`` picks the interpolation rule for extend_homogeneous:
    "polygon-gauge" closes the table into the gauge of the convex hull of
    s_i / v_i (right for norms: subadditive by construction), while
    "angular-linear" interpolates the raw values between adjacent
    directions (right for half-space rate tables, which need not be
    convex).
    """
    if closure not in ("polygon-gauge", "angular-linear"):
        raise ValueError(f"unknown closure rule {closure!r}")
    rows = []
    for item in entries:
        s, v = item[0], float(item[1])
        u = float(item[2]) if len(item) > 2 else 0.0
        if not isinstance(s, Direction):
            s = direction(s)
        rows.append((s, v, u))
    if not rows:
        raise EmptyTable("norm table has no entries")
    return NormTable(rows[0][0].dimension, tuple(rows), symmetric, closure)


@dataclass(frozen=True)
class ConvexBody:
    dimension: int
    vertices: tuple  # CCW polygon in d = 2


@dataclass(frozen=True)
class DualPair:
    s: Direction
    s_star: Direction
    gap: float

    def __post_init__(self):
        if sum(a * b for a, b in zip(self.s.vector, self.s_star.vector)) <= 0.0:
            raise ValueError("dual pair must satisfy <s, s*> > 0")


# ---------------------------------------------------------------------------
# hull / gauge machinery (d = 2)


def _hull(points):
    """Andrew monotone chain; CCW vertex list without collinear points."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-15:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-15:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _edge_normals(poly):
    """Outward unit normals and offsets (n_i, c_i) with <v, n_i> <= c_i."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        ex, ey = q[0] - p[0], q[1] - p[1]
        norm = math.hypot(ex, ey)
        if norm < 1e-15:
            continue
        n = (ey / norm, -ex / norm)  # outward for CCW
        out.append((n, n[0] * p[0] + n[1] * p[1]))
    return out


def _gauge(poly_normals, x) -> float:
    """Minkowski functional of the polygon: max <x, n_i> / c_i."""
    best = 0.0
    for n, c in poly_normals:
        if c <= 1e-12:
            raise DegenerateTable("origin not interior to the unit ball")
        best = max(best, (x[0] * n[0] + x[1] * n[1]) / c)
    return best


def _ball_polygon(table: NormTable):
    pts = [tuple(c / v for c in s.vector) for s, v, _ in table.entries]
    poly = _hull(pts)
    if len(poly) < 3:
        raise DegenerateTable("unit ball degenerates to a segment")
    return poly


def unit_ball(table: NormTable) -> ConvexBody:
    """Convex hull of the points s_i / value_i (convexification forced)."""
    if table.dimension != 2:
        raise DegenerateTable("unit_ball is supported in d = 2 only")
    return ConvexBody(2, tuple(_ball_polygon(table)))


def convexity_defect(table: NormTable) -> float:
    """Max distance of raw points s_i / v_i to the hull boundary."""
    if table.dimension != 2:
        raise DegenerateTable("convexity_defect is supported in d = 2 only")
    normals = _edge_normals(_ball_polygon(table))
    worst = 0.0
    for s, v, _ in table.entries:
        p = tuple(c / v for c in s.vector)
        gamma = _gauge(normals, p)
        if gamma > 1e-12:
            r = math.hypot(*p)
            worst = max(worst, r * (1.0 / gamma - 1.0))
    return worst


def extend_homogeneous(table: NormTable, x) -> float:
    """The homogeneous extension evaluated at x (0 at the origin)."""
    x = tuple(float(c) for c in x)
    r = math.sqrt(sum(c * c for c in x))
    if r == 0.0:
        return 0.0
    if table.dimension == 1:
        want = 1.0 if x[0] > 0 else -1.0
        for s, v, _ in table.entries:
            if s.vector[0] * want > 0:
                return r * v
        raise MissingDirection(f"no table entry on the side of {x}")
    if table.dimension == 2:
        if table.closure == "polygon-gauge":
            return _gauge(_edge_normals(_ball_polygon(table)), x)
        return r * _angular_interp(table, (x[0] / r, x[1] / r))
    # d >= 3: inverse-distance interpolation over the nearest directions
    u = np.asarray(x) / r
    dirs = np.asarray([s.vector for s, _, _ in table.entries])
    vals = np.asarray([v for _, v, _ in table.entries])
    dots = dirs @ u
    if float(np.max(dots)) <= 0.0:
        raise MissingDirection("direction outside the table's span")
    ang = np.arccos(np.clip(dots, -1.0, 1.0))
    order = np.argsort(ang)[: max(3, table.dimension)]
    w = 1.0 / np.maximum(ang[order], 1e-12)
    return r * float(np.sum(w * vals[order]) / np.sum(w))


def _angular_interp(table: NormTable, u) -> float:
    """Raw table values, linear in the angle between adjacent directions."""
    items = sorted(
        (math.atan2(s.vector[1], s.vector[0]), v) for s, v, _ in table.entries
    )
    theta = math.atan2(u[1], u[0])
    two_pi = 2 * math.pi
    for i, (a, v) in enumerate(items):
        if abs((theta - a) % two_pi) < 1e-12 or abs((a - theta) % two_pi) < 1e-12:
            return v
    # bracket theta between consecutive directions (cyclically)
    angles = [a for a, _ in items]
    hi = 0
    while hi < len(angles) and angles[hi] < theta:
        hi += 1
    lo = hi - 1
    a_lo, v_lo = items[lo % len(items)]
    a_hi, v_hi = items[hi % len(items)]
    gap = (a_hi - a_lo) % two_pi
    if gap == 0.0:
        return v_lo
    if gap > math.pi:
        raise MissingDirection(f"angular gap {gap:.3f} > pi around {u}")
    t = ((theta - a_lo) % two_pi) / gap
    return (1.0 - t) * v_lo + t * v_hi


def table_uncertainty(table: NormTable, s: Direction) -> float:
    """Uncertainty at the nearest table direction (0 if absent)."""
    best, unc = -2.0, 0.0
    for t, _, u in table.entries:
        dot = sum(a * b for a, b in zip(t.vector, s.vector))
        if dot > best:
            best, unc = dot, u
    return unc


def polar_set(table: NormTable) -> ConvexBody:
    """Wulff shape: intersection of {<x, s_i> <= value_i} over the table."""
    if table.dimension != 2:
        raise DegenerateTable("polar_set is supported in d = 2 only")
    from .geometry import _clip

    bound = 10.0 * max(v for _, v, _ in table.entries) / max(
        1e-9, min(v for _, v, _ in table.entries)
    )
    bound = max(bound, 10.0)
    poly = [(-bound, -bound), (bound, -bound), (bound, bound), (-bound, bound)]
    for s, v, _ in table.entries:
        poly = _clip(poly, s.vector, v, tol=0.0)
        if not poly:
            raise DegenerateTable("polar set is empty")
    if any(max(abs(px), abs(py)) > 0.99 * bound for px, py in poly):
        raise DegenerateTable("polar set unbounded: directions do not surround 0")
    snapped = {(round(px, 9), round(py, 9)) for px, py in poly}
    return ConvexBody(2, tuple(_hull(snapped)))


def support_function(body: ConvexBody, s) -> float:
    return max(v[0] * s[0] + v[1] * s[1] for v in body.vertices)


# ---------------------------------------------------------------------------
# dual directions


def _boundary_point(table: NormTable, s: Direction):
    normals = _edge_normals(_ball_polygon(table))
    nu = _gauge(normals, s.vector)
    b = (s.vector[0] / nu, s.vector[1] / nu)
    return b, normals


def dual_directions(table: NormTable, s: Direction, tol: float = 1e-9):
    """Outward normals of the unit-ball boundary at s / value(s).

    An edge interior yields one normal; a vertex yields the endpoints of
    the closed normal arc between the adjacent edges.
    """
    if table.dimension != 2:
        raise DegenerateTable("dual_directions is supported in d = 2 only")
    b, normals = _boundary_point(table, s)
    incident = [
        n for n, c in normals if abs(b[0] * n[0] + b[1] * n[1] - c) <= tol * (1 + abs(c))
    ]
    if not incident:
        raise DegenerateTable("boundary point matched no polygon edge")
    return [Direction(n) for n in incident]


def choose_dual(table: NormTable, s: Direction) -> DualPair:
    """Deterministic pick from the dual arc: angularly closest to s."""
    duals = dual_directions(table, s)
    theta_s = math.atan2(s.vector[1], s.vector[0])

    def angdist(a, b):
        d = abs(a - b) % (2 * math.pi)
        return min(d, 2 * math.pi - d)

    if len(duals) == 1:
        star = duals[0]
    else:
        angles = sorted(math.atan2(d.vector[1], d.vector[0]) for d in duals)
        a0, a1 = angles[0], angles[1]
        if a1 - a0 > math.pi:  # arc crosses the -pi/pi cut
            a0, a1 = a1, a0 + 2 * math.pi
        th = theta_s
        while th < a0:
            th += 2 * math.pi
        if th <= a1:
            star = Direction((math.cos(th), math.sin(th)))
        else:
            star = min(
                duals,
                key=lambda d: angdist(theta_s, math.atan2(d.vector[1], d.vector[0])),
            )
    b, _ = _boundary_point(table, s)
    ball = unit_ball(table)
    gap = abs(
        b[0] * star.vector[0] + b[1] * star.vector[1] - support_function(ball, star.vector)
    )
    return DualPair(s, star, gap)


@dataclass(frozen=True)
class DualityResidual:
    s: Direction
    s_star: Direction
    value: float
    uncertainty: float


def duality_residual(table_pp: NormTable, table_hs: NormTable, s: Direction) -> DualityResidual:
    """value(s) - hs_value(s*) <s, s*> with propagated table uncertainty."""
    pair = choose_dual(table_pp, s)
    star = pair.s_star
    if all(
        sum(a * b for a, b in zip(t.vector, star.vector)) <= 0 for t, _, _ in table_hs.entries
    ):
        raise MissingDirection(f"s* = {star.vector} outside the half-space table span")
    nu_pp = extend_homogeneous(table_pp, s.vector)
    nu_hs = extend_homogeneous(table_hs, star.vector)
    dot = sum(a * b for a, b in zip(s.vector, star.vector))
    value = nu_pp - nu_hs * dot
    unc = table_uncertainty(table_pp, s) + dot * table_uncertainty(table_hs, star)
    return DualityResidual(s, star, value, unc)


def triangle_check(table: NormTable, trials: int, seed: int) -> float:
    """Max of value(x + y) - value(x) - value(y) over random pairs."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(trials):
        x = rng.normal(size=table.dimension)
        y = rng.normal(size=table.dimension)
        v = (
            extend_homogeneous(table, x + y)
            - extend_homogeneous(table, x)
            - extend_homogeneous(table, y)
        )
        worst = max(worst, v)
    return worst


def minimizer_violations(table: NormTable, s: Direction, s_star: Direction, tol: float = 1e-9):
    """Table directions contradicting s = argmin value(s') / <s*, s'>."""
    ref_dot = sum(a * b for a, b in zip(s.vector, s_star.vector))
    if ref_dot <= 0:
        raise ValueError("<s*, s> must be > 0")
    ref = extend_homogeneous(table, s.vector) / ref_dot
    out = []
    for t, v, _ in table.entries:
        dot = sum(a * b for a, b in zip(t.vector, s_star.vector))
        if dot <= 0:
            continue
        if v / dot < ref - tol:
            out.append((t, v / dot))
    return out


def minimizer_check(table: NormTable, s: Direction, s_star: Direction, tol: float = 1e-9) -> bool:
    return not minimizer_violations(table, s, s_star, tol)


# ---------------------------------------------------------------------------
# CSV round trip


def save_table(table: NormTable, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        coords = [f"s{i}" for i in range(table.dimension)]
        w.writerow(coords + ["value", "uncertainty"])
        for s, v, u in table.entries:
            w.writerow([f"{c:.17g}" for c in s.vector] + [f"{v:.17g}", f"{u:.17g}"])


def load_table(path, symmetric: bool = False, closure: str = "polygon-gauge") -> NormTable:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    d = sum(1 for h in header if h.startswith("s"))
    entries = []
    for row in rows[1:]:
        vec = [float(c) for c in row[:d]]
        entries.append((direction(vec), float(row[d]), float(row[d + 1])))
    return norm_table(entries, symmetric=symmetric, closure=closure)
