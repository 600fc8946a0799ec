"""Percolation measures and their samplers.

Two model families are bundled:

* ``bernoulli(p)`` — edges open independently with probability p.
* ``site_modulated(p, eps)`` — draw an independent fair sign sigma_z for
  every site; conditionally on the signs, edge {i, j} is open
  independently with probability ``p * (1 + eps * sigma_i * sigma_j)``.
  The marginal open-probability is p, the measure is translation
  invariant and insertion tolerant with theta = p * (1 - eps), and events
  on edge sets sharing no site factorize exactly, so the dependence range
  is bounded by the edge range R.

Sampling is lazy and counter-based: the state of an edge is a pure
function of (oracle seed, canonical edge coordinates), so values do not
depend on query order or on how samples are split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _hash
from .lattice import LatticeSpec, canonical_edge, edges_within


@dataclass(frozen=True)
class ModelSpec:
    """A percolation measure on the edges of a lattice spec.

    theta is the analytic insertion-tolerance lower bound; dependence_range
    is 0 for product measures and the edge range R for the sign-modulated
    family (edges sharing no site are exactly independent).
    """

    lattice: LatticeSpec
    kind: str  # "bernoulli" | "site_modulated"
    p: float
    eps: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p={self.p} outside (0, 1)")
        if not 0.0 <= self.eps < 1.0:
            raise ValueError(f"eps={self.eps} outside [0, 1)")
        if self.p * (1.0 + self.eps) >= 1.0:
            raise ValueError("p * (1 + eps) must stay below 1")
        if self.kind not in ("bernoulli", "site_modulated"):
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def theta(self) -> float:
        """Insertion-tolerance lower bound on P(edge open | rest)."""
        return self.p if self.kind == "bernoulli" else self.p * (1.0 - self.eps)

    @property
    def dependence_range(self) -> float:
        return 0.0 if self.kind == "bernoulli" else self.lattice.range


def bernoulli(lattice: LatticeSpec, p: float) -> ModelSpec:
    return ModelSpec(lattice, "bernoulli", p)


def site_modulated(lattice: LatticeSpec, p: float, eps: float) -> ModelSpec:
    return ModelSpec(lattice, "site_modulated", p, eps)


def insertion_tolerance_bound(model: ModelSpec) -> float:
    return model.theta


@dataclass
class EdgeOracle:
    """Lazy, memoized view of one configuration.

    Each edge is a deterministic function of (seed, canonical edge);
    the memo is only a cache.  Not to be shared across threads.
    """

    model: ModelSpec
    seed: int
    memo: dict = field(default_factory=dict)
    sign_memo: dict = field(default_factory=dict)

    def site_sign(self, z) -> int:
        z = tuple(z)
        s = self.sign_memo.get(z)
        if s is None:
            s = _hash.sign_bit(_hash.site_hash(z), self.seed)
            self.sign_memo[z] = s
        return s

    def query(self, a, b=None) -> bool:
        """Openness of the edge {a, b} (or of a canonical edge pair a)."""
        if b is None:
            a, b = a
        e = canonical_edge(a, b)
        v = self.memo.get(e)
        if v is None:
            u = _hash.uniform01(_hash.edge_hash(*e), self.seed)
            if self.model.kind == "bernoulli":
                prob = self.model.p
            else:
                prob = self.model.p * (
                    1.0 + self.model.eps * self.site_sign(e[0]) * self.site_sign(e[1])
                )
            v = u < prob
            self.memo[e] = v
        return v


def lazy_sampler(model: ModelSpec, seed: int) -> EdgeOracle:
    """Oracle for one configuration drawn with the given stream seed."""
    return EdgeOracle(model, int(seed))


@dataclass(frozen=True)
class Configuration:
    """An explicit assignment on the edges within a finite window."""

    window: frozenset
    open_edges: frozenset

    def is_open(self, a, b=None) -> bool:
        if b is None:
            a, b = a
        return canonical_edge(a, b) in self.open_edges


def sample_full(model: ModelSpec, window, seed: int) -> Configuration:
    """Sample every edge within the window at once.

    Agrees edge-for-edge with ``lazy_sampler(model, seed)``; the joint law
    of any finite edge set is the model's marginal regardless of order.
    """
    window = frozenset(map(tuple, window))
    oracle = lazy_sampler(model, seed)
    open_edges = frozenset(
        e for e in edges_within(model.lattice, window) if oracle.query(e)
    )
    return Configuration(window, open_edges)


def model_to_config(model: ModelSpec, declared_subcritical: bool = False) -> dict:
    from .lattice import spec_to_config

    out = {
        "kind": model.kind,
        "p": model.p,
        "lattice": spec_to_config(model.lattice),
        "declared_subcritical": bool(declared_subcritical),
    }
    if model.kind == "site_modulated":
        out["eps"] = model.eps
    return out


def model_from_config(cfg: dict) -> ModelSpec:
    from .lattice import spec_from_config

    lattice = spec_from_config(cfg["lattice"])
    kind = cfg["kind"]
    if kind == "bernoulli":
        return bernoulli(lattice, float(cfg["p"]))
    if kind == "site_modulated":
        return site_modulated(lattice, float(cfg["p"]), float(cfg.get("eps", 0.0)))
    raise ValueError(f"unknown model kind {kind!r}")
