"""Command-line front end: ``mjs run``, ``mjs sweep`` and ``mjs export``.

Exit status: 0 when every asserted check passes, 1 on an asserted failure or
a computation error, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .config import RunConfig, load_config
from .errors import ConfigError, MJSError
from .export import export_mesh
from .junction import export_gamma_csv, minimality_residual, write_table_csv
from .lp import build_ssy_test_function, lp_sides, white_inequality_check
from .stability import minimize_rayleigh

log = logging.getLogger("mjs")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


class Check:
    def __init__(self, name, passed, value=None, asserted=True):
        self.name, self.passed, self.value, self.asserted = name, bool(passed), value, asserted

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "value": self.value, "asserted": self.asserted}


def run_diagnostics(cfg: RunConfig, M):
    rep = minimality_residual(M, cfg.grid, cfg.n_gamma)
    tol = cfg.tolerances.minimality
    white = []
    for i in range(M.q):
        w = white_inequality_check(M, i, cfg.grid, cfg.n_gamma)
        white.append({"sheet": M.sheets[i].name, **w._asdict()})
    checks = [
        Check("minimal", rep.is_minimal(tol), {"max_H": max(rep.max_H), "conormal_sum": rep.max_conormal_sum},
              asserted=cfg.assert_minimal),
        Check("white_inequality", all(w["holds"] for w in white if w["applicable"]), asserted=False),
    ]
    return {"diagnostics": rep.to_dict(), "white": white}, checks


def run_stability(cfg: RunConfig, M, degree=None):
    rep = minimize_rayleigh(M, cfg.stability.basis(degree), cfg.stability.constraint_samples,
                            n_gamma=cfg.n_gamma, n_eig=cfg.stability.n_eig, min_tol=cfg.tolerances.minimality)
    checks = [Check("certificate", rep.certificate_ok, rep.Q_certificate)]
    if cfg.stability.expect is not None:
        ok = rep.unstable if cfg.stability.expect == "unstable" else rep.lambda_min >= -1e-8
        checks.append(Check(f"expect_{cfg.stability.expect}", ok, rep.lambda_min))
    return rep, checks


def run_lp(cfg: RunConfig, M, **override):
    params = cfg.lp.params(cfg.tolerances.eps_A, **override)
    phi = build_ssy_test_function(M, params)
    rep = lp_sides(M, phi, params, cfg.grid, cfg.n_gamma)
    resid = phi.identity_residual(cfg.n_gamma)
    checks = [
        Check("lp_finite", rep.finite),
        Check("compatibility_identity", resid <= cfg.tolerances.identity, resid),
        Check("lp_inequality", rep.ratio is not None and 0 <= rep.ratio <= 1, rep.ratio, asserted=False),
    ]
    out = rep.to_dict()
    out["identity_residual"] = resid
    out["W0"] = phi.info
    return rep, out, checks


def run(config_path) -> int:
    """Execute the configured suites and write their reports."""
    cfg = load_config(config_path)
    out = Path(cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}") from exc
    M = cfg.catalog.spec().build()
    checks = []
    if "diagnostics" in cfg.suites:
        d, c = run_diagnostics(cfg, M)
        write_json(d, out / "diagnostics.json")
        if cfg.output.csv:
            export_gamma_csv(M, out / "gamma.csv", cfg.n_gamma)
        checks += c
    if "stability" in cfg.suites:
        rep, c = run_stability(cfg, M)
        write_json(rep.to_dict(), out / "stability.json")
        if cfg.output.csv:
            rep.write_traces_csv(out / "certificate_traces.csv")
        checks += c
    if "lp" in cfg.suites:
        rep, d, c = run_lp(cfg, M)
        write_json(d, out / "lp.json")
        if cfg.output.csv:
            write_table_csv(rep.profiles, out / "lp_profiles.csv")
        checks += c
    failed = [ch for ch in checks if ch.asserted and not ch.passed]
    write_json({"config": cfg.model_dump(exclude={"output"}), "checks": [ch.to_dict() for ch in checks],
                "status": "fail" if failed else "ok"}, out / "summary.json")
    for ch in checks:
        log.info("%s %s%s", "PASS" if ch.passed else "FAIL", ch.name, "" if ch.asserted else " (diagnostic)")
    return EXIT_FAIL if failed else EXIT_OK


SWEEP_COLUMNS = ["value", "LHS", "RHS", "I", "II", "III", "grad_2p", "I1", "I2", "ratio", "lambda_min"]


def sweep(config_path, parameter, values, out_path=None) -> int:
    """Re-run one suite per parameter value and collect scalars into a CSV."""
    cfg = load_config(config_path)
    if parameter not in ("p", "r", "degree"):
        raise ConfigError(f"cannot sweep {parameter!r}; choose p, r or degree")
    if not values:
        return EXIT_OK
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    M = cfg.catalog.spec().build()
    rows, failed = [], False
    for x in values:
        row = {k: "" for k in SWEEP_COLUMNS}
        row["value"] = x
        if parameter == "degree":
            rep, checks = run_stability(cfg, M, degree=int(x))
            row["lambda_min"] = rep.lambda_min
        else:
            try:
                rep, _, checks = run_lp(cfg, M, **{parameter: float(x)})
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            for k in SWEEP_COLUMNS[1:-1]:
                row[k] = getattr(rep, k)
        failed |= any(c.asserted and not c.passed for c in checks)
        rows.append(row)
    path = Path(out_path) if out_path else out / f"sweep_{parameter}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(["" if row[k] is None or row[k] == "" else repr(float(row[k])) for k in SWEEP_COLUMNS])
    return EXIT_FAIL if failed else EXIT_OK


def export(config_path, mesh_path, n=8, with_certificate=False) -> int:
    cfg = load_config(config_path)
    M = cfg.catalog.spec().build()
    field = None
    if with_certificate:
        field = minimize_rayleigh(M, cfg.stability.basis(), cfg.stability.constraint_samples,
                                  n_gamma=cfg.n_gamma, verify=False).certificate
    export_mesh(M, mesh_path, n=n, field=field)
    return EXIT_OK


def _values(s):
    return [v for v in (x.strip() for x in s.split(",")) if v]


def build_parser():
    ap = argparse.ArgumentParser(prog="mjs", description="Minimal multiple-junction surface toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the configured suites")
    p.add_argument("config")
    p = sub.add_parser("sweep", help="sweep one parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=["p", "r", "degree"])
    p.add_argument("--values", type=_values, default=[])
    p.add_argument("--out")
    p = sub.add_parser("export", help="export the surface as OBJ")
    p.add_argument("config")
    p.add_argument("--mesh", required=True)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--certificate", action="store_true", help="attach the stability certificate as a scalar CSV")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    threads = os.environ.get("MJS_THREADS")
    try:
        limit = threadpool_limits(limits=int(threads)) if threads else contextlib.nullcontext()
    except ValueError:
        print(f"config error: MJS_THREADS={threads!r} is not an integer", file=sys.stderr)
        return EXIT_CONFIG
    with limit:
        try:
            if args.command == "run":
                return run(args.config)
            if args.command == "sweep":
                return sweep(args.config, args.param, args.values, args.out)
            return export(args.config, args.mesh, args.grid, args.certificate)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except MJSError as exc:
            print(f"error [{exc.module}] {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_FAIL
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_FAIL

if __name__ == "__main__":
    sys.exit(main())
