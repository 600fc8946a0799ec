"""Continuous regions and their discretization to coarse lattice cells.

A region is an immutable value tree built from half-spaces, cones,
truncated cones, boxes and boolean combinations.  Membership is inclusive
at boundaries within ``TOL`` (the paper-style ``>=`` conventions);
complements flip the tolerance so that a complement is inclusive of its
own closure too.

Discretization ``[Delta]`` maps a region to the lattice points whose
coarse cell box meets it.  The cell/region intersection test is exact for
every node type in d = 1 (interval algebra) and d = 2 (half-plane
clipping of convex polygon pieces); in d >= 3 leaf nodes are exact
(corner tests, ray clipping, concave maximization for cones) and boolean
nodes fall back to vertex-and-projection witness checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

TOL = 1e-9
RAY_TOL = 1e-9  # collinearity slack for degenerate (aperture 0) cones


class InvalidAperture(ValueError):
    """Cone aperture outside [0, 1] (or cover aperture outside (0, 1])."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Direction:
    """A unit vector of S^{d-1} (Euclidean norm 1 within 1e-12)."""

    vector: tuple

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.vector))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"direction norm {n} != 1")

    @property
    def dimension(self) -> int:
        return len(self.vector)

    def __neg__(self) -> "Direction":
        return Direction(tuple(-c for c in self.vector))


def direction(v) -> Direction:
    """Normalize a nonzero vector into a Direction."""
    v = [float(c) for c in v]
    n = math.sqrt(sum(c * c for c in v))
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return Direction(tuple(c / n for c in v))


@dataclass(frozen=True)
class HalfSpace:
    """{y : <y - anchor, direction> >= 0}."""

    direction: Direction
    anchor: tuple

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(float(c) for c in self.anchor))


@dataclass(frozen=True)
class Cone:
    """{y : <y - apex, direction> >= (1 - aperture) * |y - apex|}.

    aperture 1 is the half-space; aperture 0 degenerates to the ray
    {apex + t * direction : t >= 0}.
    """

    direction: Direction
    aperture: float
    apex: tuple

    def __post_init__(self):
        if not 0.0 <= self.aperture <= 1.0:
            raise InvalidAperture(f"aperture {self.aperture} outside [0, 1]")
        object.__setattr__(self, "apex", tuple(float(c) for c in self.apex))


@dataclass(frozen=True)
class BoxRegion:
    """Axis box {y : |y_i - center_i| <= radius} (ell-infinity ball)."""

    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("box radius must be >= 0")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


@dataclass(frozen=True)
class Intersection:
    parts: tuple


@dataclass(frozen=True)
class Difference:
    left: object
    right: object


@dataclass(frozen=True)
class Complement:
    inner: object


@dataclass(frozen=True)
class FullSpace:
    pass


def truncated_cone(s: Direction, aperture: float, cutoff: float, apex) -> Difference:
    """Cone minus the half-space beyond apex + cutoff * s."""
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    apex = tuple(float(c) for c in apex)
    tip = tuple(a + cutoff * c for a, c in zip(apex, s.vector))
    return Difference(Cone(s, aperture, apex), HalfSpace(s, tip))


def intersection(*parts):
    return Intersection(tuple(parts))


def translate(region, v):
    """The region shifted by v (covariant with contains)."""
    v = tuple(float(c) for c in v)

    def shift(p):
        return tuple(a + b for a, b in zip(p, v))

    if isinstance(region, FullSpace):
        return region
    if isinstance(region, HalfSpace):
        return HalfSpace(region.direction, shift(region.anchor))
    if isinstance(region, Cone):
        return Cone(region.direction, region.aperture, shift(region.apex))
    if isinstance(region, BoxRegion):
        return BoxRegion(shift(region.center), region.radius)
    if isinstance(region, Intersection):
        return Intersection(tuple(translate(p, v) for p in region.parts))
    if isinstance(region, Difference):
        return Difference(translate(region.left, v), translate(region.right, v))
    if isinstance(region, Complement):
        return Complement(translate(region.inner, v))
    raise TypeError(f"not a region: {region!r}")


def _check_dim(anchor, y):
    if len(anchor) != len(y):
        raise DimensionMismatch(f"point of length {len(y)} vs region in {len(anchor)}-d")


def contains(region, y, tol: float = TOL) -> bool:
    """Inclusive membership; boundary points within tol count as inside."""
    y = tuple(float(c) for c in y)
    return _contains(region, y, tol)


def _contains(region, y, tol):
    if isinstance(region, FullSpace):
        return True
    if isinstance(region, HalfSpace):
        _check_dim(region.anchor, y)
        s = region.direction.vector
        val = sum((a - b) * c for a, b, c in zip(y, region.anchor, s))
        return val >= -tol
    if isinstance(region, BoxRegion):
        _check_dim(region.center, y)
        return all(abs(a - b) <= region.radius + tol for a, b in zip(y, region.center))
    if isinstance(region, Cone):
        _check_dim(region.apex, y)
        u = tuple(a - b for a, b in zip(y, region.apex))
        norm = math.sqrt(sum(c * c for c in u))
        s = region.direction.vector
        along = sum(a * b for a, b in zip(u, s))
        if region.aperture == 0.0:
            perp2 = norm * norm - along * along
            return along >= -tol and perp2 <= RAY_TOL**2 + abs(tol)
        return along >= (1.0 - region.aperture) * norm - tol
    if isinstance(region, Intersection):
        return all(_contains(p, y, tol) for p in region.parts)
    if isinstance(region, Difference):
        return _contains(region.left, y, tol) and not _contains(region.right, y, -tol)
    if isinstance(region, Complement):
        return not _contains(region.inner, y, -tol)
    raise TypeError(f"not a region: {region!r}")


# ---------------------------------------------------------------------------
# cell-box / region intersection tests


def _cell_of(z, side: int):
    half = side / 2.0
    return tuple(side * math.floor((float(c) + half) / side) for c in z)


def discretize(region, window, coarse_radius: int):
    """[Delta] within a finite window.

    Returns {z in window : the closed cell box of cell_of(z) meets the
    region}.  Points are grouped by coarse cell so each cell is tested
    once.
    """
    side = 2 * int(coarse_radius) + 1
    half = side / 2.0
    by_cell = {}
    for z in window:
        z = tuple(z)
        by_cell.setdefault(_cell_of(z, side), []).append(z)
    out = set()
    for v, members in by_cell.items():
        if _box_meets(region, v, half):
            out.update(members)
    return out


def _box_meets(region, center, half) -> bool:
    dim = len(center)
    if dim == 1:
        lo, hi = center[0] - half - TOL, center[0] + half + TOL
        return any(a <= hi and b >= lo for a, b in _intervals(region))
    if dim == 2:
        return len(_pieces_2d(region, _box_poly(center, half))) > 0
    return _box_meets_nd(region, center, half)


# --- d = 1: exact interval algebra

_INF = float("inf")


def _intervals(region):
    """Closed-interval list (may be unbounded) equal to the region in d=1."""
    if isinstance(region, FullSpace):
        return [(-_INF, _INF)]
    if isinstance(region, HalfSpace):
        a = region.anchor[0]
        return [(a, _INF)] if region.direction.vector[0] > 0 else [(-_INF, a)]
    if isinstance(region, BoxRegion):
        return [(region.center[0] - region.radius, region.center[0] + region.radius)]
    if isinstance(region, Cone):
        a = region.apex[0]
        return [(a, _INF)] if region.direction.vector[0] > 0 else [(-_INF, a)]
    if isinstance(region, Intersection):
        acc = [(-_INF, _INF)]
        for p in region.parts:
            acc = _ivl_and(acc, _intervals(p))
        return acc
    if isinstance(region, Difference):
        return _ivl_and(_intervals(region.left), _ivl_not(_intervals(region.right)))
    if isinstance(region, Complement):
        return _ivl_not(_intervals(region.inner))
    raise TypeError(f"not a region: {region!r}")


def _ivl_and(xs, ys):
    out = []
    for a, b in xs:
        for c, d in ys:
            lo, hi = max(a, c), min(b, d)
            if lo <= hi:
                out.append((lo, hi))
    return out


def _ivl_not(xs):
    xs = sorted((a, b) for a, b in xs if a <= b)
    out = []
    cur = -_INF
    for a, b in xs:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < _INF:
        out.append((cur, _INF))
    return out


# --- d = 2: convex polygon pieces under half-plane clipping


def _box_poly(center, half):
    cx, cy = center
    return [
        (cx - half, cy - half),
        (cx + half, cy - half),
        (cx + half, cy + half),
        (cx - half, cy + half),
    ]


def _clip(poly, n, c, tol=TOL):
    """Keep {p : <p, n> <= c + tol} of a convex polygon; may degenerate."""
    if not poly:
        return []
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp = p[0] * n[0] + p[1] * n[1] - c
        fq = q[0] * n[0] + q[1] * n[1] - c
        if fp <= tol:
            out.append(p)
        if (fp < -tol and fq > tol) or (fp > tol and fq < -tol):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _halfplanes_of(region):
    """(n, c) pairs with region-side {<p, n> >= c}; convex 2d leaves only."""
    if isinstance(region, HalfSpace):
        s = region.direction.vector
        return [(s, s[0] * region.anchor[0] + s[1] * region.anchor[1])]
    if isinstance(region, BoxRegion):
        cx, cy = region.center
        r = region.radius
        return [
            ((1.0, 0.0), cx - r),
            ((-1.0, 0.0), -(cx + r)),
            ((0.0, 1.0), cy - r),
            ((0.0, -1.0), -(cy + r)),
        ]
    if isinstance(region, Cone):
        if region.aperture == 0.0:
            raise ValueError("degenerate cone has no half-plane form")
        sx, sy = region.direction.vector
        theta = math.atan2(sy, sx)
        phi = math.acos(max(-1.0, min(1.0, 1.0 - region.aperture)))
        out = []
        for sign in (+1.0, -1.0):
            ang = theta + sign * (phi - math.pi / 2.0)
            n = (math.cos(ang), math.sin(ang))
            c = n[0] * region.apex[0] + n[1] * region.apex[1]
            out.append((n, c))
        return out
    raise TypeError(f"no half-plane form: {region!r}")


def _poly_halfplanes(poly):
    """Inward half-planes {<p, n> >= c} of a CCW convex polygon."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        ex, ey = q[0] - p[0], q[1] - p[1]
        if ex * ex + ey * ey < 1e-24:
            continue
        n = (-ey, ex)
        out.append((n, n[0] * p[0] + n[1] * p[1]))
    return out


def _pieces_2d(region, universe):
    """Convex polygons covering region ∩ universe (inclusive within TOL)."""
    if isinstance(region, FullSpace):
        return [universe]
    if isinstance(region, (HalfSpace, BoxRegion, Cone)):
        if isinstance(region, Cone) and region.aperture == 0.0:
            seg = _ray_box_segment(region, universe)
            return [seg] if seg else []
        poly = universe
        for n, c in _halfplanes_of(region):
            # region side <p, n> >= c  <=>  <p, -n> <= -c
            poly = _clip(poly, (-n[0], -n[1]), -c)
            if not poly:
                return []
        return [poly]
    if isinstance(region, Intersection):
        pieces = [universe]
        for part in region.parts:
            pieces = [q for p in pieces for q in _pieces_2d(part, p)]
            if not pieces:
                return []
        return pieces
    if isinstance(region, Difference):
        return _pieces_2d(Intersection((region.left, Complement(region.right))), universe)
    if isinstance(region, Complement):
        inner = _pieces_2d(region.inner, universe)
        pieces = [universe]
        for p in inner:
            hps = _poly_halfplanes(p)
            if len(hps) < 3:
                continue  # measure-zero piece removes nothing (inclusive)
            nxt = []
            for q in pieces:
                rest = q
                for n, c in hps:
                    # outside this facet: <p, n> <= c (boundary inclusive)
                    cut = _clip(rest, n, c)
                    if cut:
                        nxt.append(cut)
                    rest = _clip(rest, (-n[0], -n[1]), -c)
                    if not rest:
                        break
            pieces = nxt
            if not pieces:
                return []
        return pieces
    raise TypeError(f"not a region: {region!r}")


def _ray_box_segment(cone, universe):
    """Clip the degenerate-cone ray against a polygon; None if disjoint."""
    apex = cone.apex
    s = cone.direction.vector
    t_lo, t_hi = 0.0, _INF
    for n, c in _poly_halfplanes(universe):
        num = c - (n[0] * apex[0] + n[1] * apex[1])
        den = n[0] * s[0] + n[1] * s[1]
        if abs(den) < 1e-15:
            if num > RAY_TOL:
                return None
            continue
        t = num / den
        if den > 0:
            t_lo = max(t_lo, t)
        else:
            t_hi = min(t_hi, t)
    if t_lo > t_hi + RAY_TOL:
        return None
    t_hi = min(t_hi, t_lo + 1.0)  # any witness segment suffices
    p = (apex[0] + t_lo * s[0], apex[1] + t_lo * s[1])
    q = (apex[0] + t_hi * s[0], apex[1] + t_hi * s[1])
    return [p, q]


# --- d >= 3: exact leaves, witness checks for boolean nodes


def _box_meets_nd(region, center, half) -> bool:
    if isinstance(region, FullSpace):
        return True
    if isinstance(region, HalfSpace):
        s = region.direction.vector
        best = sum((c - a) * sc + half * abs(sc) for c, a, sc in zip(center, region.anchor, s))
        return best >= -TOL
    if isinstance(region, BoxRegion):
        return all(
            abs(c - rc) <= half + region.radius + TOL
            for c, rc in zip(center, region.center)
        )
    if isinstance(region, Cone):
        if region.aperture == 0.0:
            return _ray_meets_box(region.apex, region.direction.vector, center, half)
        return _cone_meets_box(region, center, half)
    # boolean node: vertex + projection witness scan (approximate)
    for w in _witness_points(region, center, half):
        if all(abs(a - b) <= half + TOL for a, b in zip(w, center)) and _contains(
            region, w, TOL
        ):
            return True
    return False


def _ray_meets_box(apex, s, center, half) -> bool:
    t_lo, t_hi = 0.0, _INF
    for a, sc, c in zip(apex, s, center):
        lo, hi = c - half - RAY_TOL, c + half + RAY_TOL
        if abs(sc) < 1e-15:
            if a < lo or a > hi:
                return False
            continue
        t0, t1 = (lo - a) / sc, (hi - a) / sc
        if t0 > t1:
            t0, t1 = t1, t0
        t_lo, t_hi = max(t_lo, t0), min(t_hi, t1)
    return t_lo <= t_hi + RAY_TOL


def _cone_meets_box(cone, center, half) -> bool:
    """Concave maximization of the cone defect over the box (global)."""
    from scipy.optimize import minimize

    apex = np.asarray(cone.apex)
    s = np.asarray(cone.direction.vector)
    k = 1.0 - cone.aperture
    lo = np.asarray(center) - half
    hi = np.asarray(center) + half
    clamped_apex = np.clip(apex, lo, hi)
    if np.all(np.abs(clamped_apex - apex) < TOL):
        return True  # apex inside the box

    def negdefect(y):
        u = y - apex
        return -(float(np.dot(u, s)) - k * float(np.linalg.norm(u)))

    starts = [0.5 * (lo + hi), clamped_apex, np.clip(apex + s, lo, hi)]
    d = len(center)
    for i in range(d):
        corner = lo.copy()
        corner[i] = hi[i]
        starts.append(corner)
    starts.append(hi.copy())
    best = -_INF
    bounds = list(zip(lo, hi))
    for x0 in starts:
        res = minimize(negdefect, x0, method="L-BFGS-B", bounds=bounds)
        best = max(best, -res.fun)
        if best >= -TOL:
            return True
    return best >= -TOL


def _witness_points(region, center, half):
    pts = []
    d = len(center)
    lo = [c - half for c in center]
    hi = [c + half for c in center]
    pts.append(tuple(center))
    if d <= 4:
        for corner in itertools.product(*zip(lo, hi)):
            pts.append(corner)
    for leaf in _leaves(region):
        if isinstance(leaf, HalfSpace):
            s = leaf.direction.vector
            proj = [
                min(h, max(l, a + 2 * half * sc))
                for l, h, a, sc in zip(lo, hi, leaf.anchor, s)
            ]
            pts.append(tuple(proj))
        elif isinstance(leaf, Cone):
            pts.append(tuple(min(h, max(l, a)) for l, h, a in zip(lo, hi, leaf.apex)))
        elif isinstance(leaf, BoxRegion):
            pts.append(tuple(min(h, max(l, c)) for l, h, c in zip(lo, hi, leaf.center)))
    # small interior grid as a last resort
    for frac in (0.25, 0.75):
        pts.append(tuple(l + frac * (h - l) for l, h in zip(lo, hi)))
    return pts


def _leaves(region):
    if isinstance(region, (HalfSpace, Cone, BoxRegion)):
        yield region
    elif isinstance(region, Intersection):
        for p in region.parts:
            yield from _leaves(p)
    elif isinstance(region, Difference):
        yield from _leaves(region.left)
        yield from _leaves(region.right)
    elif isinstance(region, Complement):
        yield from _leaves(region.inner)


# ---------------------------------------------------------------------------
# direction covers


def cone_cover_directions(s_star: Direction, delta: float, eps: float):
    """Directions whose eps-cones jointly cover the delta-cone of s_star.

    The cover is an angular net of the delta-cap with spacing below the
    eps-cone half-angle arccos(1 - eps); the cardinality is O(eps^(1-d)).
    s_star is always the first element, and it alone suffices when
    eps >= delta.
    """
    if not 0.0 < delta <= 1.0:
        raise InvalidAperture(f"delta {delta} outside (0, 1]")
    if eps <= 0.0:
        raise InvalidAperture(f"eps {eps} must be > 0")
    d = s_star.dimension
    if d == 1 or eps >= delta:
        return [s_star]
    phi_delta = math.acos(max(-1.0, min(1.0, 1.0 - delta)))
    phi_eps = math.acos(max(-1.0, min(1.0, 1.0 - eps)))
    if d == 2:
        theta = math.atan2(s_star.vector[1], s_star.vector[0])
        steps = math.ceil(phi_delta / phi_eps)
        h = phi_delta / steps
        out = [s_star]
        for k in range(-steps, steps + 1):
            if k == 0:
                continue
            ang = theta + k * h
            out.append(Direction((math.cos(ang), math.sin(ang))))
        return out
    # d >= 3: normalized integer grid, angular density ~ sqrt(d)/M
    M = int(math.ceil(math.sqrt(d) / phi_eps)) + 1
    cap_cos = math.cos(min(math.pi, phi_delta + phi_eps))
    s = np.asarray(s_star.vector)
    seen = {}
    rng = range(-M, M + 1)
    for z in itertools.product(rng, repeat=d):
        if not any(z):
            continue
        v = np.asarray(z, dtype=float)
        v /= np.linalg.norm(v)
        if float(v @ s) < cap_cos - TOL:
            continue
        key = tuple(np.round(v, 12))
        if key not in seen:
            seen[key] = Direction(tuple(v))
    out = [s_star]
    out.extend(v for k, v in sorted(seen.items()))
    return out


# ---------------------------------------------------------------------------
# serialization mirroring the node algebra


def region_to_dict(region) -> dict:
    if isinstance(region, FullSpace):
        return {"fullspace": {}}
    if isinstance(region, HalfSpace):
        return {
            "halfspace": {
                "direction": list(region.direction.vector),
                "anchor": list(region.anchor),
            }
        }
    if isinstance(region, Cone):
        return {
            "cone": {
                "direction": list(region.direction.vector),
                "aperture": region.aperture,
                "apex": list(region.apex),
            }
        }
    if isinstance(region, BoxRegion):
        return {"box": {"center": list(region.center), "radius": region.radius}}
    if isinstance(region, Intersection):
        return {"intersection": [region_to_dict(p) for p in region.parts]}
    if isinstance(region, Difference):
        return {
            "difference": {
                "left": region_to_dict(region.left),
                "right": region_to_dict(region.right),
            }
        }
    if isinstance(region, Complement):
        return {"complement": region_to_dict(region.inner)}
    raise TypeError(f"not a region: {region!r}")


def region_from_dict(d: dict):
    (tag, body), = d.items()
    if tag == "fullspace":
        return FullSpace()
    if tag == "halfspace":
        return HalfSpace(direction(body["direction"]), body["anchor"])
    if tag == "cone":
        return Cone(direction(body["direction"]), float(body["aperture"]), body["apex"])
    if tag == "box":
        return BoxRegion(body["center"], float(body["radius"]))
    if tag == "intersection":
        return Intersection(tuple(region_from_dict(p) for p in body))
    if tag == "difference":
        return Difference(region_from_dict(body["left"]), region_from_dict(body["right"]))
    if tag == "complement":
        return Complement(region_from_dict(body))
    raise ValueError(f"unknown region tag {tag!r}")
