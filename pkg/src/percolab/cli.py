"""Experiment runner: YAML configs in, CSV/JSON artifacts out.

Subcommands
-----------
estimate-rate     rate ladder for one event family -> CSV + JSON summary
norm-table        direction sweep -> norm table CSV
duality-check     two norm tables -> duality residual report
coarse-grain-demo sample clusters, emit trees and a validity report
fekete-check      relaxed-subadditivity scan of a sequence
oracle-test       MC vs exact enumeration coverage on small events

Every JSON artifact embeds a manifest (config hash, seed, version,
timestamp); CSV bodies are byte-stable for identical configs.  Annotated
example configs live in ``configs/``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__
from .connectivity import (
    constrained_half_space_event,
    exit_event,
    half_space_event,
    point_event,
    q_event,
)
from .convex import duality_residual, load_table, norm_table, save_table
from .coarsegrain import (
    coarse_grain,
    covering_radius,
    is_valid_tree,
    make_cell,
    tree_to_text,
)
from .estimate import (
    AllFailures,
    MCConfig,
    estimate_probability,
    fekete_check,
    oracle_coverage,
    rate_sequence,
)
from .geometry import direction
from .lattice import box_at
from .models import lazy_sampler, model_from_config
from ._hash import absorb
from .connectivity import cluster_of


class ConfigInvalid(ValueError):
    pass


class SubcriticalityDoubt(RuntimeError):
    pass


def _require(cfg: dict, path: str):
    cur = cfg
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ConfigInvalid(f"missing config key: {path}")
        cur = cur[part]
    return cur


def _mc_from(cfg: dict) -> MCConfig:
    return MCConfig(
        samples=int(_require(cfg, "mc.samples")),
        seed=int(_require(cfg, "mc.seed")),
        workers=int(cfg.get("mc", {}).get("workers", 1)),
        ci_level=float(cfg.get("mc", {}).get("ci_level", 0.95)),
    )


def _manifest(cfg: dict, seed: int) -> dict:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str).encode()
    return {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) for c in row])


def _event_family(event_cfg: dict, spec):
    kind = _require({"event": event_cfg}, "event.kind")
    alpha = float(event_cfg.get("alpha", 4.0))
    s = direction(_require({"event": event_cfg}, "event.direction"))
    if kind == "point":
        coarse = bool(event_cfg.get("coarse", True))
        return lambda N: point_event(s, N, spec, coarse=coarse, alpha=alpha)
    if kind == "q":
        delta = float(_require({"event": event_cfg}, "event.delta"))
        cone_dir = direction(event_cfg.get("cone_direction", list(s.vector)))
        return lambda N: q_event(cone_dir, delta, s, N, spec, alpha=alpha)
    if kind == "halfspace":
        return lambda N: half_space_event(s, N, alpha, spec)
    if kind == "halfspace-constrained":
        return lambda N: constrained_half_space_event(s, N, alpha, spec)
    raise ConfigInvalid(f"unknown event.kind: {kind}")


def _probe_subcriticality(model, seed: int):
    """Refuse rate extraction when P(0 <-> Lambda_n^c) does not decay."""
    ns = (2, 4, 6)
    ps = []
    for n in ns:
        mc = MCConfig(4000, absorb(seed, n))
        ps.append(estimate_probability(model, exit_event(model.lattice, n), mc).p_hat)
    if not ps[-1] < ps[0]:
        raise SubcriticalityDoubt(
            "empirical P(0 <-> Lambda_n^c) is non-decreasing over n in "
            f"{ns}: {ps}; declare the model subcritical explicitly or lower p"
        )


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}")
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config root must be a mapping")
    return cfg


def _model_from(cfg: dict):
    model_cfg = _require(cfg, "model")
    _require(cfg, "model.kind")
    _require(cfg, "model.p")
    _require(cfg, "model.lattice.dimension")
    _require(cfg, "model.lattice.offsets")
    return model_from_config(model_cfg), bool(model_cfg.get("declared_subcritical", False))


def cmd_estimate_rate(cfg: dict, out: Path) -> dict:
    model, declared = _model_from(cfg)
    mc = _mc_from(cfg)
    family = _event_family(_require(cfg, "event"), model.lattice)
    n_list = [float(n) for n in _require(cfg, "event.N")]
    if not declared:
        _probe_subcriticality(model, mc.seed)
    seq = rate_sequence(model, family, n_list, mc)
    prefix = cfg.get("output", {}).get("prefix", "estimate-rate")
    rows = [
        (
            e.N,
            e.estimate.successes,
            e.estimate.trials,
            e.estimate.p_hat,
            e.estimate.ci_lo,
            e.estimate.ci_hi,
            e.estimate.truncated_count,
            e.rate,
            e.rate_lo,
            e.rate_hi,
        )
        for e in seq.entries
    ]
    _write_csv(
        out / f"{prefix}.csv",
        ["N", "successes", "trials", "p_hat", "ci_lo", "ci_hi", "truncated_count", "rate", "rate_lo", "rate_hi"],
        rows,
    )
    summary = {
        "slope_rate": seq.slope_rate,
        "slope_se": seq.slope_se,
        "endpoint_rate": seq.endpoint_rate,
        "endpoint_se": seq.endpoint_se,
        "slope_rate_optimistic": seq.slope_rate_optimistic,
        "slope_rate_pessimistic": seq.slope_rate_pessimistic,
        "manifest": _manifest(cfg, mc.seed),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_norm_table(cfg: dict, out: Path) -> dict:
    model, declared = _model_from(cfg)
    mc = _mc_from(cfg)
    event_cfg = dict(_require(cfg, "event"))
    n_list = [float(n) for n in _require(cfg, "event.N")]
    dirs_cfg = _require(cfg, "directions")
    if isinstance(dirs_cfg, dict):
        count = int(_require(cfg, "directions.count"))
        if model.lattice.dimension != 2:
            raise ConfigInvalid("directions.count grids are for dimension 2")
        dirs = [
            (math.cos(2 * math.pi * k / count), math.sin(2 * math.pi * k / count))
            for k in range(count)
        ]
    else:
        dirs = [list(map(float, v)) for v in dirs_cfg]
    if not declared:
        _probe_subcriticality(model, mc.seed)
    entries = []
    for k, v in enumerate(dirs):
        event_cfg["direction"] = list(v)
        family = _event_family(event_cfg, model.lattice)
        cell_mc = MCConfig(mc.samples, absorb(mc.seed, k), mc.workers, mc.ci_level)
        seq = rate_sequence(model, family, n_list, cell_mc)
        entries.append((direction(v), seq.slope_rate, seq.slope_se))
    kind = str(event_cfg.get("kind", "point"))
    closure = "angular-linear" if kind.startswith("halfspace") else "polygon-gauge"
    table = norm_table(entries, closure=closure)
    prefix = cfg.get("output", {}).get("prefix", "norm-table")
    save_table(table, out / f"{prefix}.csv")
    summary = {
        "directions": len(entries),
        "values": {str(list(s.vector)): v for s, v, _ in table.entries},
        "manifest": _manifest(cfg, mc.seed),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_duality_check(cfg: dict, out: Path) -> dict:
    pp = load_table(_require(cfg, "tables.point"))
    hs = load_table(_require(cfg, "tables.halfspace"), closure="angular-linear")
    rows = []
    worst = 0.0
    for s, _, _ in pp.entries:
        res = duality_residual(pp, hs, s)
        rows.append(
            (*s.vector, *res.s_star.vector, res.value, res.uncertainty)
        )
        worst = max(worst, abs(res.value))
    d = pp.dimension
    header = [f"s{i}" for i in range(d)] + [f"s_star{i}" for i in range(d)] + ["residual", "uncertainty"]
    prefix = cfg.get("output", {}).get("prefix", "duality-check")
    _write_csv(out / f"{prefix}.csv", header, rows)
    summary = {
        "directions": len(rows),
        "max_abs_residual": worst,
        "manifest": _manifest(cfg, 0),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_coarse_grain_demo(cfg: dict, out: Path) -> dict:
    model, _ = _model_from(cfg)
    spec = model.lattice
    seed = int(_require(cfg, "mc.seed"))
    count = int(_require(cfg, "clusters.count"))
    window_radius = int(_require(cfg, "clusters.window"))
    cell = make_cell(
        spec,
        box_at((0,) * spec.dimension, int(_require(cfg, "cell.delta_radius"))),
        int(_require(cfg, "cell.K")),
    )
    window = box_at((0,) * spec.dimension, window_radius)
    bound = covering_radius(cell, spec)
    blocks = []
    valid = 0
    max_cover = 0
    for i in range(count):
        oracle = lazy_sampler(model, absorb(seed, i))
        cluster = cluster_of(oracle, (0,) * spec.dimension, window)
        tree = coarse_grain(cluster, cell, spec)
        report = is_valid_tree(tree, cell, spec)
        valid += report.ok
        cover = max(
            min(max(abs(a - b) for a, b in zip(v, t)) for t in tree.vertices)
            for v in cluster[0]
        )
        max_cover = max(max_cover, cover)
        blocks.append(tree_to_text(tree))
    prefix = cfg.get("output", {}).get("prefix", "coarse-grain-demo")
    (out / f"{prefix}-trees.txt").write_text("\n".join(blocks))
    summary = {
        "clusters": count,
        "valid_trees": valid,
        "max_covering_distance": max_cover,
        "provable_covering_bound": bound,
        "covering_ok": max_cover <= bound,
        "manifest": _manifest(cfg, seed),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


_F_FORMS = {
    "zero": lambda c: (lambda m: 0.0),
    "sqrt": lambda c: (lambda m: c * math.sqrt(m)),
    "c_log_sq": lambda c: (lambda m: c * math.log(m) ** 2),
}
_G_FORMS = {
    "zero": lambda: (lambda m: 0),
    "log_sq": lambda: (lambda m: round(math.log(m) ** 2)),
}


def cmd_fekete_check(cfg: dict, out: Path) -> dict:
    seq_cfg = _require(cfg, "sequence")
    if isinstance(seq_cfg, dict) and "csv" in seq_cfg:
        with open(seq_cfg["csv"]) as fh:
            rows = list(csv.DictReader(fh))
        a = [float(r[seq_cfg.get("column", "a")]) for r in rows]
    else:
        a = [float(v) for v in seq_cfg]
    f_cfg = cfg.get("f", {"form": "zero"})
    g_cfg = cfg.get("g", {"form": "zero"})
    f_form = f_cfg.get("form", "zero")
    if f_form not in _F_FORMS:
        raise ConfigInvalid(f"unknown f.form: {f_form}")
    g_form = g_cfg.get("form", "zero")
    if g_form not in _G_FORMS:
        raise ConfigInvalid(f"unknown g.form: {g_form}")
    f = _F_FORMS[f_form](float(f_cfg.get("c", 1.0)))
    g = _G_FORMS[g_form]()
    report = fekete_check(
        a,
        f,
        g,
        N0=int(cfg.get("N0", 1)),
        c_minus=cfg.get("c_minus"),
        c_plus=cfg.get("c_plus"),
    )
    prefix = cfg.get("output", {}).get("prefix", "fekete-check")
    summary = {
        "holds": report.holds,
        "violations": [list(v) for v in report.violations],
        "excused": [list(v) for v in report.excused],
        "limit_estimate": report.limit_estimate,
        "bounds_ok": report.bounds_ok,
        "scanned": report.scanned,
        "manifest": _manifest(cfg, 0),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_oracle_test(cfg: dict, out: Path) -> dict:
    count = int(cfg.get("events", {}).get("count", 20))
    seed = int(_require(cfg, "mc.seed"))
    samples = int(_require(cfg, "mc.samples"))
    level = float(cfg.get("mc", {}).get("ci_level", 0.99))
    workers = int(cfg.get("mc", {}).get("workers", 1))
    report = oracle_coverage(count, seed, samples, ci_level=level, workers=workers)
    rows = [
        (r.index, r.exact, r.estimate.p_hat, r.estimate.ci_lo, r.estimate.ci_hi, int(r.hit))
        for r in report.rows
    ]
    prefix = cfg.get("output", {}).get("prefix", "oracle-test")
    _write_csv(out / f"{prefix}.csv", ["index", "exact", "p_hat", "ci_lo", "ci_hi", "hit"], rows)
    summary = {
        "hits": report.hits,
        "count": report.count,
        "manifest": _manifest(cfg, seed),
    }
    (out / f"{prefix}.json").write_text(json.dumps(summary, indent=2))
    return summary


_COMMANDS = {
    "estimate-rate": cmd_estimate_rate,
    "norm-table": cmd_norm_table,
    "duality-check": cmd_duality_check,
    "coarse-grain-demo": cmd_coarse_grain_demo,
    "fekete-check": cmd_fekete_check,
    "oracle-test": cmd_oracle_test,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="percolab", description="percolation rate laboratory experiment runner"
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("config", help="YAML config file (see configs/)")
    parser.add_argument("--out", default=".", help="artifact output directory")
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = _load_config(args.config)
        summary = _COMMANDS[args.subcommand](cfg, out)
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2
    except SubcriticalityDoubt as exc:
        print(f"subcriticality doubt: {exc}", file=sys.stderr)
        return 3
    except AllFailures as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 4
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
