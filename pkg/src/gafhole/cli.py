"""Batch experiment runner: ``gaf-hole-lab <subcommand> --config FILE``.

The config is a YAML (or JSON) mapping; see README for every field and
its default. Results are written as CSV or JSON-lines, one flat record
per row, each carrying ``schema_version``, ``subcommand``, ``model_id``,
``r`` and ``seed``. Output depends only on the config and the seed, so
re-running a config reproduces the artifact byte for byte.

Exit status: 0 on success, 1 when a ``certify`` check fails, 2 on config
or precondition errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np
import yaml

from .asymptotics import PreconditionError, exceptional_scan, is_normal, radial_analysis
from .certificates import (
    ConditioningError,
    SearchExhausted,
    conditional_hole_check,
    covariance_logdet,
    omega_log_prob,
    vandermonde_search,
    volume_bound_audit,
)
from .diagnostics import gaussian_law_check, log_derivative_stats, max_modulus_deviation
from .estimators import estimate_importance, estimate_naive, summarize
from .models import model_from_dict

SCHEMA_VERSION = 1
SUBCOMMANDS = ("analyze", "scan", "estimate", "certify", "diagnose")
STOCHASTIC = ("estimate", "certify", "diagnose")
CERTIFY_CHECKS = ("omega", "conditional", "vandermonde", "covariance", "volume")
KEY_COLUMNS = ("schema_version", "subcommand", "model_id", "r", "seed")

DEFAULTS: dict[str, dict[str, Any]] = {
    "scan": {"r_min": None, "r_max": None, "flag_degenerate": True},
    "estimate": {"methods": ["naive", "importance"], "trials": 100_000, "eps_tail": 1e-10,
                 "eps_fail": 1e-12, "C0": 4.0, "C_band": 10.0, "self_normalized": False},
    "certify": {"checks": list(CERTIFY_CHECKS), "C0": 4.0, "C_band": 10.0,
                "conditional_trials": 1000, "max_tries": 1000,
                "volume": {"N": 4, "s": 1.0, "t": 3.0, "trials": 1_000_000}},
    "diagnose": {"trials": 10_000, "gaussian_trials": 100_000, "grid_size": None,
                 "logderiv": None},
}


class ConfigError(ValueError):
    """Malformed or incomplete experiment config; the message names the field."""


def _section(cfg: dict, name: str) -> dict:
    out = dict(DEFAULTS.get(name, {}))
    given = cfg.get(name) or {}
    if not isinstance(given, dict):
        raise ConfigError(f"{name}: expected a mapping")
    unknown = set(given) - set(out)
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}: unknown field")
    out.update(given)
    return out


def radii_from_config(cfg: dict) -> list[float]:
    if "radii" in cfg and "radius_range" in cfg:
        raise ConfigError("radii: give either radii or radius_range, not both")
    if "radii" in cfg:
        radii = cfg["radii"]
        if not isinstance(radii, list) or not radii:
            raise ConfigError("radii: expected a non-empty list")
        return [float(r) for r in radii]
    if "radius_range" in cfg:
        rr = cfg["radius_range"]
        try:
            start, stop, num = float(rr["start"]), float(rr["stop"]), int(rr["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("radius_range: needs start, stop and num") from exc
        if not (0 < start <= stop) or num < 1:
            raise ConfigError("radius_range: need 0 < start <= stop and num >= 1")
        return [float(r) for r in np.geomspace(start, stop, num)]
    raise ConfigError("radii: required (or radius_range)")


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: parse error: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a mapping")
    return cfg


# ---------------------------------------------------------------- rows

def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        elif isinstance(v, (list, tuple)) and len(v) == 2 and key.endswith("ci"):
            out[key + "_lo"], out[key + "_hi"] = v
        elif isinstance(v, (list, tuple)):
            out[key] = " ".join(str(x) for x in v)
        else:
            out[key] = v
    return out


def _row(sub: str, model_id: str, r, seed, **fields) -> dict:
    row = {"schema_version": SCHEMA_VERSION, "subcommand": sub, "model_id": model_id,
           "r": r, "seed": seed}
    row.update(fields)
    return _clean(row)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(row, sort_keys=False) + "\n" for row in rows)
    flat = [_flatten(row) for row in rows]
    cols = list(KEY_COLUMNS)
    for row in flat:
        cols.extend(k for k in row if k not in cols)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    writer.writeheader()
    for row in flat:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------- subcommands

def run_analyze(cfg, model, seed, workers):
    rows = []
    for r in radii_from_config(cfg):
        ra = radial_analysis(model, r)
        nr = is_normal(model, r)
        rec = ra.record()
        rec.pop("r")
        rows.append(_row("analyze", model.model_id, r, seed, **rec, max_index=ra.max_index,
                         m_inner=nr.m_inner, m_outer=nr.m_outer))
    return rows, True


def run_scan(cfg, model, seed, workers):
    p = _section(cfg, "scan")
    if p["r_min"] is None or p["r_max"] is None:
        raise ConfigError("scan.r_min: r_min and r_max are required")
    res = exceptional_scan(model, float(p["r_min"]), float(p["r_max"]),
                           flag_degenerate=bool(p["flag_degenerate"]))
    rows = [_row("scan", model.model_id, lo, seed, kind="interval", r_hi=hi,
                 log_length=math.log(hi / lo)) for lo, hi in res.intervals]
    rows.append(_row("scan", model.model_id, float(p["r_min"]), seed, kind="summary",
                     r_hi=float(p["r_max"]), log_length=res.log_measure,
                     grid_points=len(res.status), flagged=len(res.intervals)))
    return rows, True


def run_estimate(cfg, model, seed, workers):
    p = _section(cfg, "estimate")
    rows = []
    for r in radii_from_config(cfg):
        ra = radial_analysis(model, r)
        for method in p["methods"]:
            if method == "naive":
                rep = estimate_naive(model, r, int(p["trials"]), seed, p["eps_tail"],
                                     p["eps_fail"], workers)
            elif method == "importance":
                rep = estimate_importance(model, r, int(p["trials"]), seed, C0=p["C0"],
                                          self_normalized=bool(p["self_normalized"]),
                                          eps_tail=p["eps_tail"], eps_fail=p["eps_fail"],
                                          workers=workers)
            else:
                raise ConfigError(f"estimate.methods: unknown method {method!r}")
            summ = summarize(rep, ra, p["C_band"])
            rec = rep.record()
            rec.update({k: summ[k] for k in ("S", "ratio", "band_lo", "band_hi", "inside")})
            rec["log_p_hat"] = rep.log_p_hat
            rows.append(_row("estimate", model.model_id, r, seed, **rec))
    return rows, True


def run_certify(cfg, model, seed, workers):
    p = _section(cfg, "certify")
    checks = p["checks"]
    bad = [c for c in checks if c not in CERTIFY_CHECKS]
    if bad:
        raise ConfigError(f"certify.checks: unknown check {bad[0]!r}")
    rows, ok = [], True
    for r in radii_from_config(cfg):
        if "omega" in checks:
            cert = omega_log_prob(model, r, p["C0"])
            band = p["C_band"] * math.sqrt(cert.m) * math.log(cert.m) if cert.m > 1 else 0.0
            passed = cert.log_prob < 0 and 0 <= cert.margin <= band
            rec = cert.record()
            rec.pop("r")
            rows.append(_row("certify", model.model_id, r, seed, check="omega", **rec,
                             band=band, passed=passed))
            ok &= passed
        if "conditional" in checks:
            res = conditional_hole_check(model, r, int(p["conditional_trials"]), seed,
                                         p["C0"], workers=workers)
            res.pop("r")
            passed = res["fraction"] == 1.0
            rows.append(_row("certify", model.model_id, r, seed, check="conditional", **res,
                             passed=passed))
            ok &= passed
        if "vandermonde" in checks or "covariance" in checks:
            ra = radial_analysis(model, r, with_status=False)
            exps = [int(j) for j in ra.power_set if j > 0]
            try:
                pc = vandermonde_search(r, exps, int(p["max_tries"]), seed)
                found = True
            except SearchExhausted as exc:
                pc, found = exc.best, False
            if "vandermonde" in checks:
                rows.append(_row("certify", model.model_id, r, seed, check="vandermonde",
                                 n_points=len(exps) + 1, method=pc.method,
                                 tries_used=pc.tries_used,
                                 log_absdet_unit=pc.log_absdet_unit, passed=found))
                ok &= found
            if "covariance" in checks and found:
                try:
                    au = covariance_logdet(model, r, pc.points)
                    tol = 1e-6 * max(1.0, abs(au.S))
                    passed = au.margin >= -tol
                    rec = au.record()
                    rec.pop("rho")
                    rows.append(_row("certify", model.model_id, r, seed, check="covariance",
                                     **rec, passed=passed))
                except ConditioningError as exc:
                    passed = False
                    rows.append(_row("certify", model.model_id, r, seed, check="covariance",
                                     error=str(exc), partial_logdet=exc.partial_logdet,
                                     passed=False))
                ok &= passed
    if "volume" in checks:
        v = dict(DEFAULTS["certify"]["volume"])
        v.update(p["volume"] or {})
        res = volume_bound_audit(int(v["N"]), float(v["s"]), float(v["t"]), int(v["trials"]),
                                 seed, workers=workers)
        passed = bool(res.pop("pass"))
        rows.append(_row("certify", "volume-lemma", None, seed, check="volume", **res,
                         passed=passed))
        ok &= passed
    return rows, ok


def run_diagnose(cfg, model, seed, workers):
    p = _section(cfg, "diagnose")
    rows = []
    g = gaussian_law_check(int(p["gaussian_trials"]), seed)
    g.pop("seed")
    rows.append(_row("diagnose", "standard-complex-gaussian", None, seed, check="gaussian-law",
                     **g))
    for r in radii_from_config(cfg):
        res = max_modulus_deviation(model, r, int(p["trials"]), seed,
                                    grid_size=p["grid_size"], workers=workers)
        for k in ("r", "seed"):
            res.pop(k)
        rows.append(_row("diagnose", model.model_id, r, seed, check="max-modulus", **res))
    ld = p["logderiv"]
    if ld:
        res = log_derivative_stats(model, float(ld["r"]), float(ld["rho"]),
                                   int(ld.get("trials", 10_000)), seed, workers=workers)
        r = res.pop("r")
        res.pop("seed")
        rows.append(_row("diagnose", model.model_id, r, seed, check="log-derivative", **res))
    return rows, True


RUNNERS = {"analyze": run_analyze, "scan": run_scan, "estimate": run_estimate,
           "certify": run_certify, "diagnose": run_diagnose}


def run(sub: str, cfg: dict, seed: int | None = None, workers: int | None = None) -> tuple[str, bool, str]:
    """Execute one subcommand; returns (artifact text, all checks passed, format)."""
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"subcommand: unknown {sub!r}")
    if "model" not in cfg:
        raise ConfigError("model: required")
    model = model_from_dict(cfg["model"])
    if seed is None:
        seed = cfg.get("seed")
    if sub in STOCHASTIC and seed is None:
        raise ConfigError("seed: required for stochastic subcommands")
    seed = None if seed is None else int(seed)
    workers = int(workers if workers is not None else cfg.get("workers", 1))
    fmt = cfg.get("format", "jsonl" if sub == "certify" else "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format: expected csv or jsonl, got {fmt!r}")
    rows, ok = RUNNERS[sub](cfg, model, seed, workers)
    return render(rows, fmt), ok, fmt


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="gaf-hole-lab",
                                 description="Hole-probability experiments for Gaussian Taylor series.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="YAML or JSON experiment config")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--out", default=None, help="output file (default: config 'output' or stdout)")
    ap.add_argument("--workers", type=int, default=None, help="worker threads (output is unchanged)")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        text, ok, _ = run(args.subcommand, cfg, args.seed, args.workers)
    except (ConfigError, PreconditionError, ValueError) as exc:
        print(f"gaf-hole-lab: error: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.get("output")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print("gaf-hole-lab: one or more certificate checks failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
