"""Experiment runner: config parsing, result cache, CSV/JSON export.

A config file declares experiments (regularized-expression sweeps or raw
residue-cycle scans); every quadrature is cached on disk keyed by a
content hash of the expression, grid and regularization parameters, so an
unchanged config re-runs without performing any quadrature.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import threading
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance
from .algebra import MixedPoly
from .cutoffs import CutoffSpec
from .integrands import VARIANTS, ExprSpec, build
from .lab import ROW_FIELDS, EpsPath, SweepPoint, sweep
from .quadrature import (GridSpec, QuadratureResult, integrate_polydisc,
                         integrate_pt_cycle)
from .superforms import SectionTuple
from .testforms import TestForm, FlatBump

CACHE_FORMAT_VERSION = 1


class ConfigError(Exception):
    """Config schema violation, annotated with the offending field path."""


def _req(table, key, where):
    if key not in table:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return table[key]


# config -> domain objects ---------------------------------------------------

_UNITS = {
    "1": None,
    "1+z1/2": lambda n: MixedPoly.constant(n, 1.0)
    + 0.5 * MixedPoly.variable(n, 0),
}


def _section_from(table, n, where):
    alpha = tuple(int(a) for a in _req(table, "alpha", where))
    if len(alpha) != n:
        raise ConfigError(f"{where}.alpha: expected {n} entries")
    unit_name = table.get("unit", "1")
    if unit_name not in _UNITS:
        raise ConfigError(f"{where}.unit: unknown unit {unit_name!r} "
                          f"(known: {sorted(_UNITS)})")
    unit = _UNITS[unit_name]
    return SectionTuple([MixedPoly.monomial(n, alpha)],
                        unit_factor=unit(n) if unit else None)


def _testform_from(table, n, bump, where):
    if "terms" in table:
        # multi-term coefficient in the serialized polynomial format
        poly = MixedPoly.from_text(n, table["terms"])
    else:
        I = tuple(int(a) for a in table.get("alpha", (0,) * n))
        J = tuple(int(a) for a in table.get("beta", (0,) * n))
        if len(I) != n or len(J) != n:
            raise ConfigError(f"{where}: alpha/beta need {n} entries")
        poly = MixedPoly.monomial(n, I, 1.0, J=J)
    T = tuple(int(i) for i in table.get("T", range(n)))
    kinds = tuple(table.get("kinds", ("rho",) * n))
    try:
        return TestForm(n, len(T), [(T, poly, kinds)], bump)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _cutoff_from(table, where):
    if table is None:
        return None
    try:
        return CutoffSpec(_req(table, "family", where),
                          int(table.get("order", 1)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _path_from(table, where):
    kind = _req(table, "kind", where)
    kw = {k: float(v) for k, v in table.items() if k != "kind"}
    kw["rungs"] = int(kw.get("rungs", 6))
    try:
        return EpsPath(kind, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _grid_from(table, n, radius):
    table = table or {}
    return GridSpec(
        n, radius=radius,
        n_theta=table.get("n_theta", 16),
        panels=table.get("panels", 16),
        grading=table.get("grading", 6.0),
        gl_order=table.get("gl_order", 8),
        splits=tuple(tuple(s) for s in table["splits"])
        if "splits" in table else None)


class Experiment:
    """One declared experiment: an id plus a list of evaluation points."""

    def __init__(self, table, index):
        where = f"experiment[{index}]"
        self.id = _req(table, "id", where)
        self.kind = table.get("kind", "expr")
        self.bump = FlatBump()
        if self.kind == "cycle":
            self.path = _path_from(_req(table, "path", where),
                                   f"{where}.path")
            self.variant = "CYCLE"
            self.points = self.path.points()
        elif self.kind == "cycle_grid":
            g1 = _req(table, "eps1", where)
            g2 = _req(table, "eps2", where)
            e1 = np.geomspace(g1["start"], g1["stop"], int(g1["num"]))
            e2 = np.geomspace(g2["start"], g2["stop"], int(g2["num"]))
            self.variant = "CYCLE"
            self.path = None
            self.points = [(a, b) for a in e1 for b in e2]
        elif self.kind == "expr":
            self.variant = _req(table, "variant", where)
            if self.variant not in VARIANTS:
                raise ConfigError(f"{where}.variant: unknown {self.variant!r}")
            n = int(_req(table, "n", where))
            f = _section_from(_req(table, "f", where), n, f"{where}.f")
            g = _section_from(table["g"], n, f"{where}.g") \
                if "g" in table else None
            phi = _testform_from(table.get("phi", {}), n, self.bump,
                                 f"{where}.phi")
            chi1 = _cutoff_from(table.get("chi1",
                                          {"family": "canonical_pow",
                                           "order": 2}), f"{where}.chi1")
            chi2 = _cutoff_from(table.get("chi2"), f"{where}.chi2")
            self.path = _path_from(_req(table, "path", where),
                                   f"{where}.path")
            self.grid = _grid_from(table.get("grid"), n, self.bump.outer)
            self.points = self.path.points()
            self._make = lambda eps: ExprSpec(
                self.variant, f, phi, chi1, eps, g=g, chi2=chi2,
                weight2=bool(table.get("weight2", False)))
            try:
                self._make(self.points[0])
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        else:
            raise ConfigError(f"{where}.kind: unknown {self.kind!r}")

    def point_key(self, eps):
        if self.variant == "CYCLE":
            return ("cycle", CACHE_FORMAT_VERSION, self.bump.key(), eps)
        return (CACHE_FORMAT_VERSION, self._make(eps).key(),
                self.grid.key(), eps)

    def evaluate(self, eps):
        if self.variant == "CYCLE":
            t0 = time.perf_counter()
            v = integrate_pt_cycle(eps[0], eps[1], self.bump)
            return QuadratureResult(v, None, 0,
                                    1e3 * (time.perf_counter() - t0))
        return integrate_polydisc(build(self._make(eps)), self.grid)


class Cache:
    """Disk cache of quadrature results, one JSON file per content hash."""

    def __init__(self, root):
        self.root = root
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        os.makedirs(root, exist_ok=True)

    @staticmethod
    def digest(key):
        return hashlib.sha256(repr(key).encode()).hexdigest()

    def fetch(self, key):
        path = os.path.join(self.root, self.digest(key) + ".json")
        if not os.path.exists(path):
            with self._lock:
                self.misses += 1
            return None
        try:
            with open(path) as fh:
                d = json.load(fh)
            res = QuadratureResult(complex(d["re"], d["im"]), d["err"],
                                   d["nodes"], d["wall_ms"])
        except (ValueError, KeyError, json.JSONDecodeError):
            sys.stderr.write(f"warning: corrupt cache entry {path}; "
                             "recomputing\n")
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return res

    def store(self, key, res):
        path = os.path.join(self.root, self.digest(key) + ".json")
        payload = {"re": res.value.real, "im": res.value.imag,
                   "err": res.error_estimate, "nodes": res.nodes,
                   "wall_ms": res.wall_ms}
        with self._lock:
            tmp = path + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(payload, fh)
            os.replace(tmp, path)


def write_rows(out_dir, rows):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "rows.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        w.writeheader()
        w.writerows(rows)


def _write_manifest(out_dir, manifest):
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(exp, cache):
    rows, failures = [], 0
    for eps in exp.points:
        key = exp.point_key(eps)
        res = cache.fetch(key)
        if res is None:
            try:
                res = exp.evaluate(eps)
            except (RuntimeError, FloatingPointError) as exc:
                failures += 1
                rows.append({
                    "experiment_id": exp.id, "variant": exp.variant,
                    "path": exp.path.label() if exp.path else "grid",
                    "eps1": eps[0], "eps2": eps[1], "value_re": "",
                    "value_im": "", "error": f"failed: {exc}",
                    "nodes": 0, "wall_ms": 0.0})
                continue
            cache.store(key, res)
        p = SweepPoint(eps[0], eps[1], res.value, res.error_estimate,
                       res.nodes, res.wall_ms)
        rows.append({
            "experiment_id": exp.id, "variant": exp.variant,
            "path": exp.path.label() if exp.path else "grid",
            "eps1": p.eps1, "eps2": p.eps2, "value_re": p.value.real,
            "value_im": p.value.imag, "error": p.error, "nodes": p.nodes,
            "wall_ms": p.wall_ms})
    return rows, failures


def run_config(config_path, out_dir=None, cache_dir=None, jobs=1,
               dry_run=False):
    with open(config_path, "rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
    with open(config_path, "rb") as fh:
        config_hash = hashlib.sha256(fh.read()).hexdigest()
    out_dir = out_dir or cfg.get("run", {}).get("out_dir", "results")
    cache_dir = cache_dir or cfg.get("run", {}).get("cache_dir",
                                                    ".rescur_cache")
    tables = cfg.get("experiment", [])
    if not tables:
        raise ConfigError(f"{config_path}: no [[experiment]] tables")
    exps = [Experiment(t, i) for i, t in enumerate(tables)]
    ids = [e.id for e in exps]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate experiment ids")

    if dry_run:
        print(f"config {config_path} ok: {len(exps)} experiment(s)")
        for e in exps:
            print(f"  {e.id}: {e.variant}, {len(e.points)} point(s)")
        return 0

    cache = Cache(cache_dir)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    total_rows, total_failures = 0, 0
    per_exp = {}

    def job(exp):
        t0 = time.perf_counter()
        rows, failures = run_experiment(exp, cache)
        return exp, rows, failures, time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for exp, rows, failures, wall in pool.map(job, exps):
            write_rows(os.path.join(out_dir, exp.id), rows)
            per_exp[exp.id] = {"rows": len(rows), "failures": failures,
                               "wall_s": round(wall, 3)}
            total_rows += len(rows)
            total_failures += failures

    manifest = {
        "format_version": CACHE_FORMAT_VERSION,
        "config_hash": config_hash,
        "started_at": started,
        "rows": total_rows,
        "failures": total_failures,
        "cache_hits": cache.hits,
        "cache_misses": cache.misses,
        "experiments": per_exp,
    }
    _write_manifest(out_dir, manifest)
    for eid, info in sorted(per_exp.items()):
        print(f"{eid}: {info['rows']} rows, {info['failures']} failures, "
              f"{info['wall_s']}s")
    print(f"cache: {cache.hits} hits, {cache.misses} misses")
    return 1 if total_failures else 0


def run_suite(out_dir, ids=None):
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    results = acceptance.run_suite(ids=ids, progress=print)
    total_rows, failures = 0, 0
    per_exp = {}
    for res in results:
        sub = os.path.join(out_dir, f"criterion_{res.cid:02d}")
        write_rows(sub, res.rows)
        _write_manifest(sub, {
            "format_version": CACHE_FORMAT_VERSION,
            "config_hash": f"suite:criterion_{res.cid}",
            "started_at": started,
            "rows": len(res.rows),
            "failures": 0 if res.passed else 1,
            "criterion": res.cid,
            "name": res.name,
            "passed": res.passed,
            "detail": res.detail,
        })
        total_rows += len(res.rows)
        failures += 0 if res.passed else 1
    _write_manifest(out_dir, {
        "format_version": CACHE_FORMAT_VERSION,
        "config_hash": "suite:acceptance",
        "started_at": started,
        "rows": total_rows,
        "failures": failures,
    })
    return 1 if failures else 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="rescur",
        description="Run residue-current experiments from a config file.")
    ap.add_argument("config", nargs="?", help="TOML experiment config")
    ap.add_argument("--suite", metavar="NAME",
                    help="run a named suite (acceptance[:ids])")
    ap.add_argument("--jobs", type=int, default=1, metavar="N")
    ap.add_argument("--cache-dir")
    ap.add_argument("--out-dir")
    ap.add_argument("--dry-run", action="store_true")
    args = ap.parse_args(argv)

    try:
        if args.suite:
            name, _, tail = args.suite.partition(":")
            if name != "acceptance":
                ap.error(f"unknown suite {name!r}")
            ids = [int(x) for x in tail.split(",")] if tail else None
            return run_suite(args.out_dir or "results", ids=ids)
        if not args.config:
            ap.error("need a config file or --suite")
        return run_config(args.config, out_dir=args.out_dir,
                          cache_dir=args.cache_dir, jobs=args.jobs,
                          dry_run=args.dry_run)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
