"""Connection events and restricted cluster exploration.

An :class:`EventSpec` is an explicit finite description of a restricted
connection event: source and target point sets, a medium region whose
discretization carries the allowed edges, and a truncation window.
Builders produce the families used for rate estimation:

* ``point_event``      — {0 <-> Ns}, coarse cells by default;
* ``q_event``          — directed point-to-point through a cone minus the
                         half-space past the target;
* ``half_space_event`` — point to the inner boundary layer of the lattice
                         half-space {<x, s> >= N}, optionally constrained
                         to the forward half-space through the origin.

Evaluation explores the open cluster of the source inside
``[medium] ∩ window`` only; the ``truncated`` flag records that the
cluster met the window's interior boundary without deciding the event, so
optimistic/pessimistic probability estimates bracket the untruncated
value.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .geometry import (
    TOL,
    BoxRegion,
    Cone,
    Difference,
    Direction,
    FullSpace,
    HalfSpace,
    discretize,
)
from .lattice import (
    LatticeSpec,
    add,
    box_at,
    canonical_edge,
    cell_of,
    cell_points,
    exterior_boundary,
    round_to_lattice,
)
from .models import Configuration, EdgeOracle  # noqa: F401  (re-export)


class IllPosedEvent(ValueError):
    """Source set lies outside the discretized medium and window."""


class DirectionOutsideCone(ValueError):
    """q_event target direction not interior to the constraint cone."""


@dataclass(frozen=True)
class EventSpec:
    source: frozenset
    target: frozenset
    medium: object
    window: BoxRegion
    coarse: bool = False
    allowed_override: frozenset | None = None
    label: tuple = ()

    def window_points(self):
        c = tuple(int(round(v)) for v in self.window.center)
        return box_at(c, int(self.window.radius))


@dataclass(frozen=True)
class EventOutcome:
    connected: bool
    truncated: bool
    explored_vertices: frozenset | None = None
    explored_edges: frozenset | None = None


def allowed_points(spec: LatticeSpec, event: EventSpec):
    """[medium] ∩ window — the vertex set the exploration may use."""
    if event.allowed_override is not None:
        return set(event.allowed_override)
    window = event.window_points()
    if isinstance(event.medium, FullSpace):
        return set(window)
    return discretize(event.medium, window, spec.coarse_radius)


def window_boundary(spec: LatticeSpec, event: EventSpec, pts):
    """Members of pts on the interior boundary of the truncation window."""
    c = event.window.center
    r = event.window.radius + 1e-12
    maxg = max(max(abs(gi) for gi in g) for g in spec.offsets)
    out = set()
    for x in pts:
        if any(abs(a - b) + maxg > r for a, b in zip(x, c)):
            # near a face: check the exact neighbor condition
            if any(
                any(abs(a + gi - b) > r for a, gi, b in zip(x, g, c))
                for g in spec.offsets
            ):
                out.add(x)
    return out


def cluster_of(oracle: EdgeOracle, x, allowed):
    """Connected component of x in the open subgraph induced on allowed.

    Deterministic given (oracle seed, x, allowed); only edges with both
    endpoints in allowed are ever queried.
    """
    spec = oracle.model.lattice
    x = spec.check_point(x)
    allowed = set(map(tuple, allowed))
    if x not in allowed:
        raise ValueError("start point not in the allowed set")
    verts = {x}
    edges = set()
    queue = deque([x])
    while queue:
        u = queue.popleft()
        for g in spec.offsets:
            w = add(u, g)
            if w not in allowed:
                continue
            e = canonical_edge(u, w)
            if e in edges or not oracle.query(e):
                continue
            edges.add(e)
            if w not in verts:
                verts.add(w)
                queue.append(w)
    return verts, edges


def evaluate_event(oracle: EdgeOracle, event: EventSpec, keep_cluster: bool = False) -> EventOutcome:
    """Explore the source cluster and decide the connection event."""
    spec = oracle.model.lattice
    if event.source & event.target:
        return EventOutcome(True, False, frozenset(event.source & event.target), frozenset())
    allowed = allowed_points(spec, event)
    sources = {tuple(s) for s in event.source} & allowed
    if not sources:
        raise IllPosedEvent("no source point inside [medium] ∩ window")
    targets = {tuple(t) for t in event.target} & allowed
    wboundary = window_boundary(spec, event, allowed) - targets

    verts = set(sources)
    edges = set()
    queue = deque(sources)
    connected = False
    touched_boundary = any(s in wboundary for s in sources)
    while queue and not connected:
        u = queue.popleft()
        for g in spec.offsets:
            w = add(u, g)
            if w not in allowed or w in verts:
                continue
            e = canonical_edge(u, w)
            if not oracle.query(e):
                continue
            edges.add(e)
            verts.add(w)
            queue.append(w)
            if w in targets:
                connected = True
                break
            if w in wboundary:
                touched_boundary = True
    truncated = touched_boundary and not connected
    if keep_cluster:
        return EventOutcome(connected, truncated, frozenset(verts), frozenset(edges))
    return EventOutcome(connected, truncated)


# ---------------------------------------------------------------------------
# event builders


def _scaled(s: Direction, N: float):
    return tuple(N * c for c in s.vector)


def point_event(
    s: Direction,
    N: float,
    spec: LatticeSpec,
    coarse: bool = True,
    alpha: float = 4.0,
) -> EventSpec:
    """{0 <-> round(N s)} in the window Lambda_{ceil(alpha N)}.

    Coarse events connect the cells Lambda(v_0) and Lambda(v_target);
    plain vertex-to-vertex events remain available with coarse=False.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    x = round_to_lattice(_scaled(s, N))
    origin = (0,) * spec.dimension
    reach = max((abs(c) for c in x), default=0) + spec.cell_side
    radius = max(math.ceil(alpha * N), reach)
    if coarse:
        source = frozenset(cell_points(spec, cell_of(spec, origin)))
        target = frozenset(cell_points(spec, cell_of(spec, x)))
    else:
        source = frozenset({origin})
        target = frozenset({x})
    return EventSpec(
        source,
        target,
        FullSpace(),
        BoxRegion(origin, radius),
        coarse=coarse,
        label=("point", tuple(s.vector), float(N), float(alpha), coarse),
    )


def q_event(
    s_prime: Direction,
    delta: float,
    s: Direction,
    N: float,
    spec: LatticeSpec,
    alpha: float = 4.0,
) -> EventSpec:
    """Directed coarse event {0 <-> Ns} through the cone of s_prime.

    The medium is Cone(s_prime, delta, 0) minus HalfSpace(s_prime, Ns):
    everything strictly before the hyperplane through the target.
    """
    if N <= 0:
        raise ValueError("N must be > 0")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta {delta} outside (0, 1]")
    cos = sum(a * b for a, b in zip(s.vector, s_prime.vector))
    if cos <= 1.0 - delta + TOL:
        raise DirectionOutsideCone(
            f"<s, s'> = {cos:.6f} not above 1 - delta = {1 - delta:.6f}"
        )
    origin = (0,) * spec.dimension
    ns = _scaled(s, N)
    x = round_to_lattice(ns)
    medium = Difference(Cone(s_prime, delta, origin), HalfSpace(s_prime, ns))
    source = frozenset(cell_points(spec, cell_of(spec, origin)))
    target = frozenset(cell_points(spec, cell_of(spec, x)))
    reach = max((abs(c) for c in x), default=0) + spec.cell_side
    radius = max(math.ceil(alpha * N), reach)
    return EventSpec(
        source,
        target,
        medium,
        BoxRegion(origin, radius),
        coarse=True,
        label=("q", tuple(s_prime.vector), float(delta), tuple(s.vector), float(N), float(alpha)),
    )


def _half_space_target(s: Direction, N: float, spec: LatticeSpec, window_pts):
    """Inner boundary layer of {x in Z^d : <x - Ns, s> >= 0} in the window.

    Any open path entering the half-space crosses this layer because the
    edge range is finite.
    """
    pts = sorted(window_pts)
    arr = np.asarray(pts, dtype=float)
    sv = np.asarray(s.vector)
    level = float(N)  # <Ns, s> = N
    inside = arr @ sv >= level - TOL
    has_outside_nbr = np.zeros(len(pts), dtype=bool)
    for g in spec.offsets:
        shift = float(np.dot(np.asarray(g, dtype=float), sv))
        has_outside_nbr |= (arr @ sv) + shift < level - TOL
    mask = inside & has_outside_nbr
    return frozenset(tuple(map(int, p)) for p, m in zip(pts, mask) if m)


def half_space_event(
    s: Direction,
    N: float,
    alpha: float,
    spec: LatticeSpec,
    window_radius: int | None = None,
) -> EventSpec:
    """{0 <-> H_s(Ns)}: reach the half-space past distance N along s."""
    if N <= 0:
        raise ValueError("N must be > 0")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    origin = (0,) * spec.dimension
    radius = int(window_radius) if window_radius is not None else math.ceil(alpha * N)
    window = BoxRegion(origin, radius)
    window_pts = box_at(origin, radius)
    target = _half_space_target(s, N, spec, window_pts)
    return EventSpec(
        frozenset({origin}),
        target,
        FullSpace(),
        window,
        label=("halfspace", tuple(s.vector), float(N), float(alpha)),
    )


def constrained_half_space_event(
    s: Direction,
    N: float,
    alpha: float,
    spec: LatticeSpec,
    window_radius: int | None = None,
) -> EventSpec:
    """{0 <->(within H_s) H_s(Ns)}: same target, forward medium only."""
    base = half_space_event(s, N, alpha, spec, window_radius)
    origin = (0,) * spec.dimension
    return EventSpec(
        base.source,
        base.target,
        HalfSpace(s, origin),
        base.window,
        label=("halfspace-constrained", tuple(s.vector), float(N), float(alpha)),
    )


def escape_event(spec: LatticeSpec, delta_pts) -> EventSpec:
    """{0 <-> Delta^c} for a finite set Delta containing 0.

    The allowed set is pinned to Delta plus its exterior boundary: the
    first exit of any escaping path lands on the boundary, so the
    indicator is unchanged while enumeration stays small.
    """
    delta = {tuple(p) for p in delta_pts}
    origin = (0,) * spec.dimension
    if origin not in delta:
        raise ValueError("Delta must contain the origin")
    target = frozenset(exterior_boundary(spec, delta))
    allowed = frozenset(delta | target)
    reach = max(max(abs(c) for c in p) for p in allowed)
    return EventSpec(
        frozenset({origin}),
        target,
        FullSpace(),
        BoxRegion(origin, reach + 1),
        allowed_override=allowed,
        label=("escape", len(delta)),
    )


def exit_event(spec: LatticeSpec, n: int) -> EventSpec:
    """{0 <-> Lambda_n^c}: the cluster of 0 leaves the box of radius n."""
    return escape_event(spec, box_at((0,) * spec.dimension, n))
