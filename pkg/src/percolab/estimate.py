"""Monte Carlo estimation, exact enumeration, rates, and the relaxed
subadditivity (Fekete) checker.

``estimate_probability`` is a deterministic function of
``(model, event, samples, seed)``: sample ``i`` uses the stream seed
``sample_seed(seed, i)`` and edge states are keyed by coordinates, so the
worker count and chunking cannot change a single bit of the counts.
Truncated-undecided samples are tracked separately and reported as an
optimistic/pessimistic probability bracket.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta, norm

from . import _hash, _kernels
from .connectivity import EventSpec, IllPosedEvent, allowed_points, window_boundary
from .lattice import add, canonical_edge
from .models import ModelSpec

log = logging.getLogger(__name__)


class TooLarge(ValueError):
    """Enumeration would exceed the binary-variable budget."""


class AllFailures(RuntimeError):
    """Some rate cells had zero successes; fitting aborted."""


@dataclass(frozen=True)
class MCConfig:
    samples: int
    seed: int
    workers: int = 1
    ci_level: float = 0.95

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ci_level must be in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ProbEstimate:
    successes: int
    trials: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    truncated_count: int = 0
    optimistic_p: float = 0.0
    pessimistic_p: float = 0.0
    ci_level: float = 0.95

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.ci_hi - self.ci_lo)


def binomial_interval(successes: int, trials: int, level: float = 0.95):
    """Wilson score interval; Clopper-Pearson one-sided at the extremes."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    alpha = 1.0 - level
    if successes == 0:
        return 0.0, float(beta.ppf(1.0 - alpha, 1, trials))
    if successes == trials:
        return float(beta.ppf(alpha, trials, 1)), 1.0
    z = float(norm.ppf(1.0 - alpha / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# event compilation


@dataclass
class CompiledEvent:
    """Arrays feeding the kernels; see _kernels for their semantics."""

    nv: int
    n_edges: int
    indptr: np.ndarray
    nbrs: np.ndarray
    eidx: np.ndarray
    ehash: np.ndarray
    vhash: np.ndarray
    esrc_site: np.ndarray
    edst_site: np.ndarray
    n_sites: int
    sources: np.ndarray
    is_tgt: np.ndarray
    is_wb: np.ndarray
    kind: int
    p: float
    eps: float
    trivial: bool
    vertices: list = field(default_factory=list)


def compile_event(model: ModelSpec, event: EventSpec) -> CompiledEvent:
    spec = model.lattice
    trivial = bool(event.source & event.target)
    allowed = allowed_points(spec, event)
    sources = sorted({tuple(s) for s in event.source} & allowed)
    if not sources and not trivial:
        raise IllPosedEvent("no source point inside [medium] ∩ window")
    targets = {tuple(t) for t in event.target} & allowed
    wb = window_boundary(spec, event, allowed) - targets

    verts = sorted(allowed)
    index = {v: i for i, v in enumerate(verts)}
    nv = len(verts)
    d = spec.dimension

    adj = [[] for _ in range(nv)]
    edge_rows = []
    edge_ends = []
    seen = {}
    for v in verts:
        iv = index[v]
        for g in spec.offsets:
            w = add(v, g)
            iw = index.get(w)
            if iw is None:
                continue
            e = canonical_edge(v, w)
            ei = seen.get(e)
            if ei is None:
                ei = len(edge_rows)
                seen[e] = ei
                edge_rows.append(e[0] + e[1])
                edge_ends.append((index[e[0]], index[e[1]]))
            adj[iv].append((iw, ei))
    n_edges = len(edge_rows)

    indptr = np.zeros(nv + 1, dtype=np.int64)
    for i in range(nv):
        indptr[i + 1] = indptr[i] + len(adj[i])
    nbrs = np.empty(indptr[-1], dtype=np.int64)
    eidx = np.empty(indptr[-1], dtype=np.int64)
    pos = 0
    for i in range(nv):
        for (iw, ei) in adj[i]:
            nbrs[pos] = iw
            eidx[pos] = ei
            pos += 1

    if n_edges:
        rows = np.asarray(edge_rows, dtype=np.int64).reshape(n_edges, 2 * d)
        ehash = _kernels.hash_rows(_kernels.TAG_EDGE, rows.view(np.uint64))
    else:
        ehash = np.empty(0, dtype=np.uint64)
    vrows = np.asarray(verts, dtype=np.int64).reshape(nv, d) if nv else np.empty((0, d), np.int64)
    vhash = _kernels.hash_rows(_kernels.TAG_SITE, vrows.view(np.uint64)) if nv else np.empty(0, np.uint64)

    # site variables: vertices incident to at least one edge
    site_idx = np.full(nv, -1, dtype=np.int64)
    n_sites = 0
    for (a, b) in edge_ends:
        for v in (a, b):
            if site_idx[v] < 0:
                site_idx[v] = n_sites
                n_sites += 1
    esrc_site = np.asarray([site_idx[a] for a, _ in edge_ends], dtype=np.int64)
    edst_site = np.asarray([site_idx[b] for _, b in edge_ends], dtype=np.int64)

    src_arr = np.asarray([index[v] for v in sources], dtype=np.int64)
    is_tgt = np.zeros(nv, dtype=np.uint8)
    for t in targets:
        is_tgt[index[t]] = 1
    is_wb = np.zeros(nv, dtype=np.uint8)
    for b in wb:
        is_wb[index[b]] = 1

    return CompiledEvent(
        nv=nv,
        n_edges=n_edges,
        indptr=indptr,
        nbrs=nbrs,
        eidx=eidx,
        ehash=ehash,
        vhash=vhash,
        esrc_site=esrc_site,
        edst_site=edst_site,
        n_sites=n_sites,
        sources=src_arr,
        is_tgt=is_tgt,
        is_wb=is_wb,
        kind=0 if model.kind == "bernoulli" else 1,
        p=model.p,
        eps=model.eps,
        trivial=trivial,
        vertices=verts,
    )


def _chunk_ranges(samples: int, n_chunks: int = 64):
    n_chunks = min(n_chunks, samples)
    bounds = np.linspace(0, samples, n_chunks + 1, dtype=np.int64)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_chunks)]


def estimate_probability(model: ModelSpec, event: EventSpec, mc: MCConfig) -> ProbEstimate:
    """Monte Carlo estimate of P(event); worker-count invariant."""
    ce = compile_event(model, event)
    run_seed = np.uint64(mc.seed & _hash.MASK64)
    if ce.trivial:
        succ, trunc = mc.samples, 0
    else:
        args = (
            ce.indptr,
            ce.nbrs,
            ce.eidx,
            ce.ehash,
            ce.vhash,
            ce.kind,
            ce.p,
            ce.eps,
            ce.sources,
            ce.is_tgt,
            ce.is_wb,
        )
        chunks = _chunk_ranges(mc.samples)
        if mc.workers == 1:
            parts = [_kernels.mc_count(i0, i1, run_seed, *args) for i0, i1 in chunks]
        else:
            with ThreadPoolExecutor(max_workers=mc.workers) as pool:
                futs = [pool.submit(_kernels.mc_count, i0, i1, run_seed, *args) for i0, i1 in chunks]
                parts = [f.result() for f in futs]
        succ = sum(p[0] for p in parts)
        trunc = sum(p[1] for p in parts)
    p_hat = succ / mc.samples
    lo, hi = binomial_interval(succ, mc.samples, mc.ci_level)
    return ProbEstimate(
        successes=succ,
        trials=mc.samples,
        p_hat=p_hat,
        ci_lo=lo,
        ci_hi=hi,
        truncated_count=trunc,
        optimistic_p=(succ + trunc) / mc.samples,
        pessimistic_p=p_hat,
        ci_level=mc.ci_level,
    )


def evaluate_indicators(model: ModelSpec, event: EventSpec, mc: MCConfig):
    """Per-sample (connected, truncated) indicator arrays for shared-seed
    comparisons between events."""
    ce = compile_event(model, event)
    conn = np.zeros(mc.samples, dtype=np.uint8)
    trunc = np.zeros(mc.samples, dtype=np.uint8)
    if ce.trivial:
        conn[:] = 1
        return conn.astype(bool), trunc.astype(bool)
    run_seed = np.uint64(mc.seed & _hash.MASK64)
    _kernels.mc_indicators(
        0,
        mc.samples,
        run_seed,
        ce.indptr,
        ce.nbrs,
        ce.eidx,
        ce.ehash,
        ce.vhash,
        ce.kind,
        ce.p,
        ce.eps,
        ce.sources,
        ce.is_tgt,
        ce.is_wb,
        conn,
        trunc,
    )
    return conn.astype(bool), trunc.astype(bool)


def exact_probability(model: ModelSpec, event: EventSpec, edge_limit: int = 20) -> float:
    """Brute-force P(event) over all edge states (and site signs).

    The budget counts edges plus, for the sign-modulated model, the sites
    incident to them.
    """
    ce = compile_event(model, event)
    if ce.trivial:
        return 1.0
    n_vars = ce.n_edges + (ce.n_sites if ce.kind == 1 else 0)
    if n_vars > edge_limit:
        raise TooLarge(f"{n_vars} binary variables exceed the limit {edge_limit}")
    return float(
        _kernels.exact_sum(
            ce.indptr,
            ce.nbrs,
            ce.eidx,
            ce.sources,
            ce.is_tgt,
            ce.n_edges,
            ce.esrc_site,
            ce.edst_site,
            ce.n_sites,
            ce.kind,
            ce.p,
            ce.eps,
        )
    )


# ---------------------------------------------------------------------------
# rate sequences


@dataclass(frozen=True)
class RateEntry:
    N: float
    estimate: ProbEstimate
    rate: float | None
    rate_lo: float
    rate_hi: float | None


@dataclass(frozen=True)
class RateSequence:
    entries: tuple
    slope_rate: float
    slope_se: float
    endpoint_rate: float
    endpoint_se: float
    slope_rate_optimistic: float
    slope_rate_pessimistic: float
    method: str = "slope"

    @property
    def fitted_rate(self) -> float:
        return self.slope_rate if self.method == "slope" else self.endpoint_rate

    @property
    def fitted_se(self) -> float:
        return self.slope_se if self.method == "slope" else self.endpoint_se


def _log_halfwidth(est: ProbEstimate) -> float:
    if est.ci_lo <= 0.0 or est.ci_hi <= 0.0:
        return float("inf")
    return 0.5 * (math.log(est.ci_hi) - math.log(est.ci_lo))


def fit_slope(Ns, values, sigmas):
    """Weighted least-squares slope of values against Ns; (slope, se)."""
    x = np.asarray(Ns, dtype=float)
    y = np.asarray(values, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    w = 1.0 / np.maximum(s, 1e-12) ** 2
    xbar = float(np.sum(w * x) / np.sum(w))
    ybar = float(np.sum(w * y) / np.sum(w))
    sxx = float(np.sum(w * (x - xbar) ** 2))
    if sxx <= 0.0:
        raise ValueError("need at least two distinct N values")
    slope = float(np.sum(w * (x - xbar) * (y - ybar)) / sxx)
    return slope, math.sqrt(1.0 / sxx)


def rate_sequence(model: ModelSpec, event_family, N_list, mc: MCConfig) -> RateSequence:
    """Estimate -log P / N along an increasing N ladder and fit the rate.

    Both estimators are reported: the weighted LS slope of -log p against
    N (robust to additive offsets from coarse cells or boundary layers)
    and the endpoint a_N / N at the largest N.  Zero-success cells abort
    the fit with AllFailures.
    """
    Ns = [float(N) for N in N_list]
    if sorted(Ns) != Ns or any(n <= 0 for n in Ns):
        raise ValueError("N_list must be positive and increasing")
    entries = []
    failures = []
    z = float(norm.ppf(0.5 + mc.ci_level / 2.0))
    for N in Ns:
        est = estimate_probability(model, event_family(N), mc)
        if est.successes == 0:
            failures.append(N)
            entries.append(RateEntry(N, est, None, -math.log(est.ci_hi) / N, None))
            continue
        rate = -math.log(est.p_hat) / N
        rate_lo = -math.log(est.ci_hi) / N
        rate_hi = (-math.log(est.ci_lo) / N) if est.ci_lo > 0 else None
        entries.append(RateEntry(N, est, rate, rate_lo, rate_hi))
    if failures:
        raise AllFailures(f"zero successes at N in {failures}; increase samples")

    a = [-math.log(e.estimate.p_hat) for e in entries]
    sig = [max(_log_halfwidth(e.estimate) / z, 1e-9) for e in entries]
    slope, slope_se = fit_slope(Ns, a, sig)
    last = entries[-1]
    endpoint = a[-1] / Ns[-1]
    endpoint_se = sig[-1] / Ns[-1]

    def guarded(ps):
        vals = [-math.log(max(p, 1e-300)) for p in ps]
        return fit_slope(Ns, vals, sig)[0]

    slope_opt = guarded([e.estimate.optimistic_p for e in entries])
    slope_pes = guarded([e.estimate.pessimistic_p for e in entries])
    if abs(slope - endpoint) > z * (slope_se + endpoint_se):
        log.warning(
            "slope (%.4f±%.4f) and endpoint (%.4f±%.4f) estimators disagree",
            slope,
            slope_se,
            endpoint,
            endpoint_se,
        )
    return RateSequence(
        entries=tuple(entries),
        slope_rate=slope,
        slope_se=slope_se,
        endpoint_rate=endpoint,
        endpoint_se=endpoint_se,
        slope_rate_optimistic=slope_opt,
        slope_rate_pessimistic=slope_pes,
    )


# ---------------------------------------------------------------------------
# relaxed Fekete checker


# ---------------------------------------------------------------------------
# randomized MC-vs-exact coverage


def random_small_events(count: int, seed: int):
    """Reproducible small events with enumerable exact probabilities.

    Alternates lattices (chain / square) and measures (Bernoulli /
    sign-modulated); windows are sized so the enumeration stays within 18
    binary variables counting sites for the sign-modulated model.
    """
    from .connectivity import EventSpec
    from .geometry import BoxRegion, FullSpace
    from .lattice import box_at, make_lattice_spec
    from .models import bernoulli as make_bernoulli
    from .models import site_modulated as make_site_modulated

    rng = np.random.default_rng(seed)
    chain = make_lattice_spec(1, [(1,), (-1,)])
    square = make_lattice_spec(2, [(1, 0), (-1, 0), (0, 1), (0, -1)])
    out = []
    for i in range(count):
        two_d = i % 2 == 1
        modulated = (i // 2) % 2 == 1
        if not two_d:
            k = int(rng.integers(3, 7))
            pts = {(j,) for j in range(k + 1)}
            src, tgt = (0,), (k,)
            spec = chain
        elif modulated:
            pts = {(a, b) for a in (0, 1) for b in (0, 1)}
            src, tgt = (0, 0), (1, 1)
            spec = square
        else:
            pts = set(box_at((0, 0), 1))
            src, tgt = (-1, -1), (1, 1)
            spec = square
        removable = sorted(pts - {src, tgt})
        n_drop = int(rng.integers(0, 3))
        order = rng.permutation(len(removable))
        allowed = pts - {removable[j] for j in order[:n_drop]}
        p = float(rng.uniform(0.2, 0.8))
        if modulated:
            eps = float(rng.uniform(0.1, 0.5))
            p = min(p, 0.9 / (1.0 + eps))
            model = make_site_modulated(spec, p, eps)
        else:
            model = make_bernoulli(spec, p)
        reach = max(max(abs(c) for c in q) for q in allowed)
        event = EventSpec(
            frozenset({src}),
            frozenset({tgt}),
            FullSpace(),
            BoxRegion((0,) * spec.dimension, reach + 1),
            allowed_override=frozenset(allowed),
            label=("random", i),
        )
        out.append((model, event))
    return out


@dataclass(frozen=True)
class CoverageRow:
    index: int
    exact: float
    estimate: ProbEstimate
    hit: bool


@dataclass(frozen=True)
class CoverageReport:
    rows: tuple
    hits: int
    count: int


def oracle_coverage(
    count: int,
    seed: int,
    samples: int,
    ci_level: float = 0.99,
    workers: int = 1,
    edge_limit: int = 18,
) -> CoverageReport:
    """MC estimates vs exact enumeration on randomized small events."""
    rows = []
    hits = 0
    for j, (model, event) in enumerate(random_small_events(count, seed)):
        exact = exact_probability(model, event, edge_limit=edge_limit)
        mc = MCConfig(samples, _hash.absorb(seed, j), workers=workers, ci_level=ci_level)
        est = estimate_probability(model, event, mc)
        hit = est.ci_lo - 1e-12 <= exact <= est.ci_hi + 1e-12
        hits += hit
        rows.append(CoverageRow(j, exact, est, hit))
    return CoverageReport(tuple(rows), hits, count)


@dataclass(frozen=True)
class FeketeReport:
    holds: bool
    violations: tuple
    excused: tuple
    limit_estimate: float
    bounds_ok: bool
    scanned: int


def fekete_check(
    a,
    f,
    g,
    N0: int = 1,
    c_minus: float | None = None,
    c_plus: float | None = None,
    halfwidths=None,
) -> FeketeReport:
    """Scan a_{n+m+g(min)} <= a_n + a_m + f(min) over n, m >= N0.

    ``a`` is indexed from 1 (a[0] is a_1).  When ``halfwidths`` are given
    (same indexing), a violation whose deficit is covered by the three
    CI half-widths is excused and reported separately.  ``bounds_ok``
    checks c_- n < a_n < c_+ n over the scanned range n >= N0.
    """
    nmax = len(a)
    violations = []
    excused = []
    scanned = 0
    for n in range(N0, nmax + 1):
        for m in range(N0, nmax + 1):
            shift = int(g(min(n, m)))
            idx = n + m + shift
            if idx < 1 or idx > nmax:
                continue
            scanned += 1
            lhs = a[idx - 1]
            rhs = a[n - 1] + a[m - 1] + float(f(min(n, m)))
            if lhs > rhs + 1e-12:
                entry = (n, m, lhs, rhs)
                slack = 0.0
                if halfwidths is not None:
                    slack = halfwidths[idx - 1] + halfwidths[n - 1] + halfwidths[m - 1]
                if lhs - rhs <= slack:
                    excused.append(entry)
                else:
                    violations.append(entry)
    if scanned == 0:
        log.warning("fekete scan was vacuous: no index pairs in range")
    bounds_ok = True
    if c_minus is not None and c_plus is not None:
        bounds_ok = all(
            c_minus * n < a[n - 1] < c_plus * n for n in range(N0, nmax + 1)
        )
    limit_estimate = min(a[n - 1] / n for n in range(N0, nmax + 1))
    return FeketeReport(
        holds=not violations,
        violations=tuple(violations),
        excused=tuple(excused),
        limit_estimate=limit_estimate,
        bounds_ok=bounds_ok,
        scanned=scanned,
    )
