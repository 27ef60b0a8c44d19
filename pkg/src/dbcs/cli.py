"""Command-line entry point: ``dbcs --config FILE [--mode ...] [flags]``.

Modes
-----
simulate    Monte Carlo report (CSV + JSON); ``series = true`` also writes
            replication 0's log and per-round bound series.
analyze     Per-round bound series for an observed JSON-lines log.
tune-eta    Print the asymptotic-CS mixture parameter.
rho-sweep   CI coverage of ``Q_T(0)`` across AR coefficients.

Exit codes: 0 success, 2 configuration or input error, 3 runtime failure.
Every output file starts with a reproducibility header holding the resolved
configuration, the master seed and the package version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__, kernels
from .config import build_run_config, parse_config_text, read_config
from .confidence import CsConfig, Method, bounds_from_path, optimal_eta, tune_eta
from .contextual import contextual_bound_series
from .errors import ConfigError, DbcsError, DomainError, LogError, MissingBound
from .estimators import Contrast, estimate_path
from .log import read_log, write_log
from .simulation import REPORT_COLUMNS, run_monte_carlo, run_trajectory, rho_sweep

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3


def _header(rc, extra=None) -> dict:
    h = {"dbcs_version": __version__, "mode": rc.mode, "seed": rc.seed, "config": rc.echo()}
    if extra:
        h.update(extra)
    return h


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _write_csv(path, header: dict, columns, rows) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _write_json(path, obj) -> None:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _safe(name: str) -> str:
    out = "".join(c if c.isalnum() else "_" for c in name)
    return "_".join(p for p in out.split("_") if p)


# --- modes -------------------------------------------------------------------------

def cmd_simulate(rc) -> list:
    os.makedirs(rc.out, exist_ok=True)
    report = run_monte_carlo(rc.dgp, rc.policy, rc.analysis, rc.reps, seed=rc.seed,
                             stopping_horizon=rc.stopping_horizon, workers=rc.workers,
                             policy_seed=rc.policy_seed)
    header = _header(rc, {"n_reps": rc.reps, "resolved": report.config})
    written = []
    path = os.path.join(rc.out, "report.csv")
    _write_csv(path, header, REPORT_COLUMNS, [[getattr(r, c) for c in REPORT_COLUMNS] for r in report.rows])
    written.append(path)
    path = os.path.join(rc.out, "report.json")
    _write_json(path, {"header": header, "rows": [r.as_dict() for r in report.rows]})
    written.append(path)
    if rc.series:
        log, _, series = run_trajectory(rc.dgp, rc.policy, rc.analysis, rep=0, policy_seed=rc.policy_seed)
        path = os.path.join(rc.out, "trajectory.jsonl")
        write_log(replace(log, meta=_header(rc, {"rep": 0})), path)
        written.append(path)
        for (label, est), s in series.items():
            path = os.path.join(rc.out, f"series_{_safe(label)}_{_safe(est)}.csv")
            _write_csv(path, _header(rc, {"rep": 0, "method": label, "estimand": est}),
                       ("t", "center", "lower", "upper"), s.rows())
            written.append(path)
    return written


def cmd_analyze(rc) -> list:
    log = read_log(rc.log)
    methods = rc.extra["methods"]
    estimands = rc.extra["estimands"] or (Contrast(1, 0),)
    cs = rc.cs
    if cs.m is None and log.m is not None:
        cs = CsConfig(alpha=cs.alpha, eta=cs.eta, m=log.m, rho_mix=cs.rho_mix, gamma_bracket=cs.gamma_bracket)
    for m in methods:
        if m.needs_m and cs.m is None:
            raise MissingBound(f"{m.value} needs m: declare M and p_min in the log header or set m")
    for est in estimands:
        arms = (est.w, est.w2) if isinstance(est, Contrast) else (est.w,)
        if any(not 0 <= a < log.K for a in arms):
            raise ConfigError("estimands", f"{est.label} refers to an arm outside 0..{log.K - 1}")
    os.makedirs(rc.out, exist_ok=True)
    if not len(log):
        raise ConfigError("log", "log has no observations")
    actions = np.array([o.a for o in log])
    probs = np.array([o.p for o in log], dtype=np.float64)
    rewards = np.array([o.y for o in log], dtype=np.float64)
    header = _header(rc, {"log": os.path.abspath(rc.log), "rounds": len(log), "m": cs.m, "eta": cs.eta})
    written, summary = [], []

    def emit(label, est_label, s):
        path = os.path.join(rc.out, f"series_{_safe(label)}_{_safe(est_label)}.csv")
        _write_csv(path, {**header, "method": label, "estimand": est_label},
                   ("t", "center", "lower", "upper"), s.rows())
        written.append(path)
        iv = s.final()
        summary.append((label, est_label, int(s.t[-1]), iv.center, iv.lower, iv.upper))

    for est in estimands:
        t, c, S = estimate_path(actions, probs, rewards, est)
        for m in methods:
            emit(m.value, est.label, bounds_from_path(m, t, c, S, cs, est.label))
        if rc.extra["contextual"] and isinstance(est, Contrast):
            if log.context_dim is None:
                raise ConfigError("contextual", "log has no context column")
            for m in methods:
                if m in (Method.CI, Method.ASYMPTOTIC_CS):
                    emit(m.value + "+x", est.label, contextual_bound_series(log, est.w, est.w2, m, cs))
    path = os.path.join(rc.out, "summary.csv")
    _write_csv(path, header, ("method", "estimand", "t", "center", "lower", "upper"), summary)
    written.append(path)
    return written


def cmd_tune_eta(rc, stdout) -> list:
    alpha = rc.extra["alpha"]
    eta = tune_eta(alpha, rc.t_star)
    stdout.write(f"{eta:.2f}\n")
    stdout.write(json.dumps({"alpha": alpha, "t_star": rc.t_star, "eta": eta,
                             "eta_exact_argmin": optimal_eta(alpha, rc.t_star)}) + "\n")
    return []


def cmd_rho_sweep(rc) -> list:
    os.makedirs(rc.out, exist_ok=True)
    rows = rho_sweep(rc.dgp, rc.rho_grid, rc.policy, rc.reps, seed=rc.seed,
                     alpha=rc.cs.alpha, workers=rc.workers)
    path = os.path.join(rc.out, "rho_sweep.csv")
    _write_csv(path, _header(rc, {"n_reps": rc.reps}), ("rho", "coverage", "coverage_se", "mean_width", "n_reps"),
               [[r.rho, r.coverage, r.coverage_se, r.mean_width, r.n_reps] for r in rows])
    return [path]


# --- argument handling --------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="dbcs", description="Design-based confidence intervals and sequences for bandit logs.")
    p.add_argument("--config", help="key = value configuration file (packaged names such as table1.cfg also work)")
    p.add_argument("--mode", choices=("simulate", "analyze", "tune-eta", "rho-sweep"))
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--t-star", dest="t_star", type=int)
    p.add_argument("--out")
    p.add_argument("--log")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    return p


def _packaged(name):
    here = os.path.join(os.path.dirname(__file__), "configs", name)
    return here if os.path.exists(here) else None


def load_raw(args) -> dict:
    raw = {}
    if args.config:
        path = args.config
        if not os.path.exists(path) and _packaged(path):
            path = _packaged(path)
        raw = read_config(path)
    for flag in ("mode", "seed", "reps", "alpha", "eta", "m", "t_star", "out", "log"):
        v = getattr(args, flag)
        if v is not None:
            raw[flag] = str(v)
    if args.set:
        raw.update(parse_config_text("\n".join(args.set)))
    return raw


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        rc = build_run_config(load_raw(args))
        if rc.mode == "simulate":
            written = cmd_simulate(rc)
        elif rc.mode == "analyze":
            written = cmd_analyze(rc)
        elif rc.mode == "tune-eta":
            written = cmd_tune_eta(rc, stdout)
        else:
            written = cmd_rho_sweep(rc)
    except (ConfigError, LogError, DomainError, MissingBound) as exc:
        stderr.write(f"dbcs: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        stderr.write(f"dbcs: error: {exc}\n")
        return EXIT_INPUT
    except DbcsError as exc:
        stderr.write(f"dbcs: runtime error: {exc}\n")
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        stderr.write(f"dbcs: runtime error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME
    for path in written:
        stdout.write(path + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
