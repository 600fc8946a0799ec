"""Cluster coarse-graining into rooted embedded trees.

A cell spec fixes a finite unit cell Delta containing 0 and a fattening
parameter K; Delta_K is the union of K-boxes around Delta.  The
coarse-graining map walks the exterior boundary of the covered region V,
looking for boundary sites whose local cluster piece inside
``(z + Delta) \\ V`` escapes ``z + Delta``; the smallest such site (in the
lattice total order) becomes the next tree vertex, attached to the
smallest earlier vertex whose fattened cell's exterior boundary contains
it.  The map is a deterministic function of the cluster: the connection
test reads the cluster's own edge set, never fresh randomness.

Notes on two ambiguities, resolved here and exercised by the tests:

* the escape test uses Delta while the tree geometry uses Delta_K (the
  only reading consistent with both the tree axioms and the energy
  bound);
* the escape path may exit into a vertex already covered by V; with the
  stricter reading trees lose vertices and the covering and edge-count
  bounds below become false even on a d=1 path cluster.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .estimate import ProbEstimate
from .lattice import LatticeSpec, add, box, exterior_boundary, sub


class NotConnected(ValueError):
    pass


class ZeroNotInCluster(ValueError):
    pass


class NotReconstructible(ValueError):
    """Some vertex never becomes eligible during reconstruction."""


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CellSpec:
    """Unit cell Delta, fattening K, and derived geometry."""

    delta: frozenset
    K: int
    delta_K: frozenset
    radius: int  # max ell-infinity norm over Delta
    max_degree: int  # |exterior boundary of Delta_K|
    ext_offsets: frozenset  # exterior boundary of Delta_K, as offsets


def make_cell(spec: LatticeSpec, delta_pts, K: int) -> CellSpec:
    delta = frozenset(tuple(p) for p in delta_pts)
    origin = (0,) * spec.dimension
    if origin not in delta:
        raise ValueError("Delta must contain the origin")
    if K < 1:
        raise ValueError("K must be >= 1")
    fat = box(K, spec.dimension)
    delta_K = frozenset(add(x, b) for x in delta for b in fat)
    ext = frozenset(exterior_boundary(spec, delta_K))
    radius = max(max(abs(c) for c in p) for p in delta)
    return CellSpec(delta, int(K), delta_K, radius, len(ext), ext)


@dataclass(frozen=True)
class CoarseTree:
    """Rooted embedded tree; edges[i] = (earlier vertex, vertices[i + 1])."""

    vertices: tuple
    edges: tuple

    @property
    def root(self):
        return self.vertices[0]

    def edge_sets(self):
        return [frozenset(e) for e in self.edges]


def _cluster_adjacency(cluster):
    verts, edges = cluster
    verts = {tuple(v) for v in verts}
    adj = {}
    for e in edges:
        a, b = tuple(e[0]), tuple(e[1])
        verts.add(a)
        verts.add(b)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return verts, {v: sorted(nbrs) for v, nbrs in adj.items()}


def _escapes(z, adj, delta, V):
    """Does the open piece at z inside (z + Delta) \\ V leave z + Delta?"""
    zone = {add(z, c) for c in delta}
    seen = {z}
    stack = [z]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in zone:
                return True
            if w in V or w in seen:
                continue
            seen.add(w)
            stack.append(w)
    return False


def coarse_grain(cluster, cell: CellSpec, spec: LatticeSpec) -> CoarseTree:
    """Map a cluster containing 0 to its coarse tree; deterministic."""
    verts, adj = _cluster_adjacency(cluster)
    origin = (0,) * spec.dimension
    if origin not in verts:
        raise ZeroNotInCluster("cluster must contain the origin")
    reached = {origin}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        for w in adj.get(u, ()):
            if w not in reached:
                reached.add(w)
                queue.append(w)
    if reached != verts:
        raise NotConnected(f"{len(verts - reached)} cluster vertices unreachable from 0")

    t = [origin]
    f = []
    V = set(cell.delta_K)
    bd = {z for z in cell.ext_offsets}
    while True:
        candidates = sorted(z for z in bd if z in verts and _escapes(z, adj, cell.delta, V))
        if not candidates:
            break
        ti = candidates[0]
        v_star = min(v for v in t if sub(ti, v) in cell.ext_offsets)
        t.append(ti)
        f.append((v_star, ti))
        newcell = {add(ti, c) for c in cell.delta_K}
        V |= newcell
        bd |= {add(ti, o) for o in cell.ext_offsets}
        bd -= V
    return CoarseTree(tuple(t), tuple(f))


def reconstruct(W, cell: CellSpec, spec: LatticeSpec) -> CoarseTree:
    """Rebuild labels and edges from an unlabeled vertex set containing 0."""
    W = {tuple(p) for p in W}
    origin = (0,) * spec.dimension
    if origin not in W:
        raise ValueError("W must contain the origin")
    used = [origin]
    remaining = W - {origin}
    edges = []
    while remaining:
        eligible = sorted(
            w for w in remaining if any(sub(w, v) in cell.ext_offsets for v in used)
        )
        if not eligible:
            raise NotReconstructible(f"{len(remaining)} vertices never become eligible")
        ti = eligible[0]
        v_star = min(v for v in used if sub(ti, v) in cell.ext_offsets)
        used.append(ti)
        edges.append((v_star, ti))
        remaining.discard(ti)
    return CoarseTree(tuple(used), tuple(edges))


@dataclass(frozen=True)
class ValidityReport:
    is_tree: bool
    distinct: bool
    anchored: bool
    reconstructible: bool
    failures: tuple

    @property
    def ok(self) -> bool:
        return self.is_tree and self.distinct and self.anchored and self.reconstructible

    def __bool__(self) -> bool:
        return self.ok


def is_valid_tree(tree: CoarseTree, cell: CellSpec, spec: LatticeSpec) -> ValidityReport:
    """Check the four defining properties, each independently."""
    failures = []
    t = [tuple(v) for v in tree.vertices]
    m = len(t) - 1

    distinct = len(set(t)) == len(t)
    if not distinct:
        failures.append("repeated vertex")

    is_tree = len(tree.edges) == m
    if is_tree and m > 0:
        parent = {v: v for v in t}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        comps = len(t)
        for e in tree.edges:
            a, b = tuple(e[0]), tuple(e[1])
            if a not in parent or b not in parent:
                is_tree = False
                break
            ra, rb = find(a), find(b)
            if ra == rb:
                is_tree = False
                break
            parent[ra] = rb
            comps -= 1
        is_tree = is_tree and comps == 1
    if not is_tree:
        failures.append("(t, f) is not a tree")

    origin = (0,) * spec.dimension
    anchored = t and t[0] == origin
    if anchored:
        earlier = set()
        for i, e in enumerate(tree.edges):
            child = t[i + 1]
            pair = frozenset((tuple(e[0]), tuple(e[1])))
            earlier = set(t[: i + 1])
            if child not in pair:
                anchored = False
                break
            (other,) = pair - {child} if len(pair) == 2 else (child,)
            if other not in earlier or sub(child, other) not in cell.ext_offsets:
                anchored = False
                break
    if not anchored:
        failures.append("root/attachment condition violated")

    reconstructible = False
    if distinct and anchored:
        try:
            rebuilt = reconstruct(set(t), cell, spec)
            reconstructible = list(rebuilt.vertices) == t and [
                frozenset(e) for e in rebuilt.edges
            ] == [frozenset((tuple(a), tuple(b))) for a, b in tree.edges]
        except NotReconstructible:
            reconstructible = False
    if not reconstructible:
        failures.append("reconstruction does not reproduce the labels/edges")

    return ValidityReport(bool(is_tree), distinct, bool(anchored), reconstructible, tuple(failures))


def enumerate_trees(cell: CellSpec, l: int, window, spec: LatticeSpec, max_size: int = 4):
    """All valid trees with l vertices embedded in the window.

    Exhaustive eligible-extension search over vertex sets with
    deduplication; every such set reconstructs to exactly one tree.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if l > max_size:
        raise TooLarge(f"l={l} above the guard {max_size}")
    window = {tuple(p) for p in window}
    origin = (0,) * spec.dimension
    if origin not in window:
        raise ValueError("window must contain the origin")
    ext = sorted(cell.ext_offsets)
    levels = {frozenset((origin,))}
    for _ in range(l - 1):
        nxt = set()
        for used in levels:
            eligible = {add(v, o) for v in used for o in ext} & window
            for w in sorted(eligible - used):
                nxt.add(used | {w})
        levels = nxt
    return [reconstruct(W, cell, spec) for W in sorted(levels, key=sorted)]


def regular_tree_subtree_count(branching: int, l: int) -> int:
    """Rooted l-vertex subtrees of the b-regular tree containing the root.

    The root offers b child slots; every other vertex offers b - 1.
    """

    @lru_cache(maxsize=None)
    def branch(k: int) -> int:
        if k == 0:
            return 1
        return distribute(k - 1, branching - 1)

    @lru_cache(maxsize=None)
    def distribute(k: int, slots: int) -> int:
        if slots == 0:
            return 1 if k == 0 else 0
        return sum(branch(j) * distribute(k - j, slots - 1) for j in range(k + 1))

    if l < 1:
        return 0
    return distribute(l - 1, branching)


def energy_bound_rhs(p_exit, cell: CellSpec, c_mix: float | None, tree_edges: int) -> float:
    """(P(0 <-> Delta^c) (1 + |Delta| e^{-c_mix K / 2}))^{|f|}.

    ``c_mix=None`` declares exact factorization beyond the dependence
    range (the bundled models for K > R), zeroing the mixing correction.
    """
    if tree_edges < 0:
        raise ValueError("tree_edges must be >= 0")
    p = p_exit.p_hat if isinstance(p_exit, ProbEstimate) else float(p_exit)
    corr = 0.0 if c_mix is None else len(cell.delta) * math.exp(-c_mix * cell.K / 2.0)
    return (p * (1.0 + corr)) ** tree_edges


def covering_radius(cell: CellSpec, spec: LatticeSpec) -> int:
    """Provable ell-infinity covering constant for coarse_grain output.

    Every cluster vertex is within this distance of a tree vertex: pieces
    outside V sit within radius(Delta) of their entry site, entry sites
    within K + radius(Delta) + max_g |g|_inf of a tree vertex.
    """
    gmax = max(max(abs(c) for c in g) for g in spec.offsets)
    return cell.K + 2 * cell.radius + gmax


def tree_to_text(tree: CoarseTree) -> str:
    """Edge-list text form: root first, vertices as integer tuples."""
    idx = {v: i for i, v in enumerate(tree.vertices)}
    lines = ["v " + " ".join(str(c) for c in v) for v in tree.vertices]
    lines += [f"e {idx[tuple(a)]} {idx[tuple(b)]}" for a, b in tree.edges]
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> CoarseTree:
    verts = []
    edges = []
    for line in text.strip().splitlines():
        parts = line.split()
        if parts[0] == "v":
            verts.append(tuple(int(c) for c in parts[1:]))
        elif parts[0] == "e":
            i, j = int(parts[1]), int(parts[2])
            edges.append((verts[i], verts[j]))
        else:
            raise ValueError(f"bad tree line {line!r}")
    return CoarseTree(tuple(verts), tuple(edges))
