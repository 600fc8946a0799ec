"""Z^d with a finite-range translation-invariant edge set.

Lattice points are plain ``tuple[int, ...]``; edges are canonical ordered
pairs ``(lo, hi)`` with ``lo`` lexicographically smaller.  A
:class:`LatticeSpec` fixes the generator offsets, the Euclidean range ``R``
and the coarse-cell radius ``R_0``; the coarse lattice is
``((2 R_0 + 1) Z)^d`` and the cell of a real point ``x`` is the unique
coarse point whose half-open box ``[-R_0 - 1/2, R_0 + 1/2)^d`` contains it.
All values are immutable and safe to share between workers.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

Point = tuple  # tuple[int, ...]
Edge = tuple  # (Point, Point), canonically ordered


class NotSymmetric(ValueError):
    """An offset set lacks a negation and auto-symmetrization is off."""


class Reducible(ValueError):
    """The generated graph on Z^d is not connected."""


class DimensionMismatch(ValueError):
    """A point's length differs from the spec dimension."""


@dataclass(frozen=True)
class LatticeSpec:
    """Validated description of (Z^d, E).

    Attributes
    ----------
    dimension : int
        d >= 1.
    offsets : tuple of Point
        Symmetric generator set G, sorted by the total order.
    range : float
        Largest Euclidean norm among offsets (the range R of E).
    coarse_radius : int
        R_0 >= R with (Lambda_{R_0}, E(Lambda_{R_0})) connected.
    distance_ratio : float
        Metadata constant c_E with d_E <= c_E * d on a probe set; never
        used inside algorithms, only to size bounded searches.
    """

    dimension: int
    offsets: tuple
    range: float
    coarse_radius: int
    distance_ratio: float

    @property
    def cell_side(self) -> int:
        """Spacing of the coarse lattice, 2 R_0 + 1."""
        return 2 * self.coarse_radius + 1

    def check_point(self, x) -> Point:
        x = tuple(int(c) for c in x)
        if len(x) != self.dimension:
            raise DimensionMismatch(
                f"point of length {len(x)} on a {self.dimension}-d lattice"
            )
        return x


def total_order_less(x, y) -> bool:
    """Strict total order on Z^d: lexicographic coordinate comparison."""
    return tuple(x) < tuple(y)


def canonical_edge(a, b) -> Edge:
    a, b = tuple(a), tuple(b)
    return (a, b) if a < b else (b, a)


def add(x, y) -> Point:
    return tuple(a + b for a, b in zip(x, y))


def sub(x, y) -> Point:
    return tuple(a - b for a, b in zip(x, y))


def neg(x) -> Point:
    return tuple(-a for a in x)


def neighbors(spec: LatticeSpec, x):
    """The E-neighbors x + g of x, in offset order."""
    return [add(x, g) for g in spec.offsets]


def box(N: int, dimension: int):
    """Lambda_N = [-N, N]^d intersected with Z^d, as a set."""
    if N < 0:
        raise ValueError("box radius must be >= 0")
    rng = range(-N, N + 1)
    return {p for p in itertools.product(rng, repeat=dimension)}


def box_at(x, N: int):
    """x + Lambda_N intersected with Z^d."""
    x = tuple(x)
    return {add(x, p) for p in box(N, len(x))}


def edges_within(spec: LatticeSpec, pts):
    """E(A): induced edges with both endpoints in A."""
    pts = set(map(tuple, pts))
    out = set()
    for x in pts:
        for g in spec.offsets:
            y = add(x, g)
            if y in pts:
                out.add(canonical_edge(x, y))
    return out


def interior_boundary(spec: LatticeSpec, pts):
    """{x in A : some E-neighbor lies outside A}."""
    pts = set(map(tuple, pts))
    return {x for x in pts if any(add(x, g) not in pts for g in spec.offsets)}


def exterior_boundary(spec: LatticeSpec, pts):
    """{x not in A : some E-neighbor lies inside A}."""
    pts = set(map(tuple, pts))
    out = set()
    for x in pts:
        for g in spec.offsets:
            y = add(x, g)
            if y not in pts:
                out.add(y)
    return out


def round_to_lattice(x) -> Point:
    """Coordinatewise nearest integer, ties rounded half up.

    floor(c + 1/2) commutes with integer translations; it is not
    reflection-symmetric, which is the documented tie rule.
    """
    return tuple(math.floor(float(c) + 0.5) for c in x)


def cell_of(spec: LatticeSpec, x) -> Point:
    """The coarse-lattice point v with x in v + [-R_0-1/2, R_0+1/2)^d."""
    L = spec.cell_side
    half = L / 2.0
    return tuple(L * math.floor((float(c) + half) / L) for c in x)


def cell_points(spec: LatticeSpec, v):
    """Lambda(v) = v + Lambda_{R_0}: the lattice points of the cell at v."""
    return box_at(v, spec.coarse_radius)


def _box_connected(offsets, N: int, dimension: int) -> bool:
    pts = box(N, dimension)
    if not pts:
        return True
    start = next(iter(sorted(pts)))
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in offsets:
            y = add(x, g)
            if y in pts and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(pts)


def _reachable_in_box(offsets, bound: int, dimension: int):
    allowed = box(bound, dimension)
    origin = (0,) * dimension
    seen = {origin}
    queue = deque([origin])
    while queue:
        x = queue.popleft()
        for g in offsets:
            y = add(x, g)
            if y in allowed and y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def make_lattice_spec(
    dimension: int,
    offsets,
    coarse_radius: int | None = None,
    auto_symmetrize: bool = True,
) -> LatticeSpec:
    """Validate generators and derive R, R_0 and the c_E metadata.

    Irreducibility is certified on a finite box: every point of
    {-1,0,1}^d must be reachable from the origin by generator steps
    staying inside Lambda_{2 ceil(R)}; by translation invariance this
    makes (Z^d, E) connected.  R_0 is the smallest integer >= R making
    (Lambda_{R_0}, E(Lambda_{R_0})) connected, unless overridden upward.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    offs = set()
    for g in offsets:
        g = tuple(int(c) for c in g)
        if len(g) != dimension:
            raise DimensionMismatch(f"offset {g} on a {dimension}-d lattice")
        if all(c == 0 for c in g):
            raise ValueError("zero offset not allowed")
        offs.add(g)
    if not offs:
        raise ValueError("offsets must be nonempty")
    missing = {g for g in offs if neg(g) not in offs}
    if missing:
        if not auto_symmetrize:
            raise NotSymmetric(f"offsets lack negations: {sorted(missing)}")
        offs |= {neg(g) for g in missing}

    R = max(math.sqrt(sum(c * c for c in g)) for g in offs)

    bound = 2 * math.ceil(R)
    reached = _reachable_in_box(offs, bound, dimension)
    residues = box(1, dimension)
    if not residues <= reached:
        raise Reducible(
            "generators do not reach all of {-1,0,1}^d inside "
            f"Lambda_{bound}; lattice generated by G is a strict sublattice"
        )

    r0 = max(1, math.ceil(R)) if coarse_radius is None else int(coarse_radius)
    if coarse_radius is None:
        while not _box_connected(offs, r0, dimension):
            r0 += 1
    else:
        if r0 < R:
            raise ValueError(f"coarse_radius {r0} below range {R}")
        if not _box_connected(offs, r0, dimension):
            raise ValueError(f"(Lambda_{r0}, E) is not connected")

    sorted_offs = tuple(sorted(offs))
    spec = LatticeSpec(dimension, sorted_offs, R, r0, 1.0)
    # probe {-1,0,1}^d \ {0} for the d_E/d ratio; metadata only
    ratio = max(1.0, R)
    for p in sorted(residues - {(0,) * dimension}):
        de = graph_distance(spec, (0,) * dimension, p)
        ratio = max(ratio, de / math.sqrt(sum(c * c for c in p)))
    object.__setattr__(spec, "distance_ratio", ratio)
    return spec


def graph_distance(spec: LatticeSpec, x, y) -> int:
    """Length of a shortest E-path from x to y (BFS, box-bounded).

    The search box starts at c_E * d(x,y) + R and doubles if needed, so
    the call terminates and is exact even if the c_E estimate is low.
    """
    x, y = spec.check_point(x), spec.check_point(y)
    if x == y:
        return 0
    target = sub(y, x)
    eucl = math.sqrt(sum(c * c for c in target))
    bound = math.ceil(spec.distance_ratio * eucl + spec.range) + 1
    while True:
        dist = _bfs_distance(spec, target, bound)
        if dist is not None:
            return dist
        bound *= 2


def _bfs_distance(spec: LatticeSpec, target, bound: int):
    origin = (0,) * spec.dimension
    seen = {origin: 0}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        du = seen[u]
        for g in spec.offsets:
            v = add(u, g)
            if v == target:
                return du + 1
            if v not in seen and all(abs(c) <= bound for c in v):
                seen[v] = du + 1
                queue.append(v)
    return None


def spec_to_config(spec: LatticeSpec) -> dict:
    """Plain-dict form for structured text configs."""
    return {
        "dimension": spec.dimension,
        "offsets": [list(g) for g in spec.offsets],
        "coarse_radius": spec.coarse_radius,
    }


def spec_from_config(cfg: dict) -> LatticeSpec:
    return make_lattice_spec(
        int(cfg["dimension"]),
        cfg["offsets"],
        coarse_radius=cfg.get("coarse_radius"),
    )
