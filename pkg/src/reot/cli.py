"""``reot`` command line: discretize, solve, verify, report.

Every command takes a JSON config (``--config``) whose keys can also be
given as flags; flags win.  Configs carry a mandatory ``version`` field and
unknown keys are rejected.  Artifacts go to ``<out>/<command>-<hash>/``
where ``hash`` is taken over the resolved config, so reruns overwrite
byte-identical reports; wall-clock data lives in ``metadata.json``.  Reports
round numbers to 9 significant digits; ``config.json`` keeps the resolved
config exactly so ``verify`` rebuilds the same problem.

Exit codes: 0 success, 2 config error, 3 infeasible problem, 4 missing
artifact, 5 solver failure or failed verification.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .contracts import (IntegrationSettings, MultilineMeanVariance, contract_from_dict,
                        multiline_support_functions, retained_moments, retained_value_at_risk_check,
                        solve_definetti_proportions, solve_mean_variance_multiline,
                        solve_quota_share_variance_premium, solve_stop_loss, solve_var_constrained,
                        stop_loss_premium)
from .dist import FAMILY_NAMES, DiscreteDistribution, JointDistribution, discretize, distribution_from_spec
from .errors import ConfigError, InfeasibleError, ReotError
from .lp import LPOptions, check_kkt, export_mps, LPSolution
from .measures import mean_variance
from .mmot import (marginal_reports, marginal_residuals, map_from_spec, off_diagonal_fraction,
                   solve_mmot, two_line_experiment)
from .treaty import DiscreteTreaty, check_feasible, deterministic_treaty, support_condition_gap

log = logging.getLogger("reot")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_MISSING, EXIT_FAILURE = 0, 2, 3, 4, 5
SCHEMA_VERSION = 1
SIG_DIGITS = 9

# schemas -------------------------------------------------------------------------

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_PROB = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_DIST = {
    "type": "object",
    "required": ["family"],
    "properties": {"family": {"enum": list(FAMILY_NAMES)}},
    "additionalProperties": _NUM,
}
_INTEGRATION = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": ["auto", "quadrature", "monte_carlo"]},
        "nodes": {"type": "integer", "minimum": 8},
        "tail": _PROB,
        "n_samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "max_quadrature_dim": {"type": "integer", "minimum": 1},
    },
}
_LP = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "max_iters": {"type": "integer", "minimum": 1},
        "feas_tol": _POS, "opt_tol": _POS, "pivot_tol": _POS,
        "refactor_every": {"type": "integer", "minimum": 1},
        "bland_after": {"type": "integer", "minimum": 1},
        "pricing": {"enum": ["auto", "full", "partial"]},
        "pool_size": {"type": "integer", "minimum": 1},
        "threads": {"type": "integer", "minimum": 1},
        "log_every": {"type": "integer", "minimum": 0},
    },
}
_BETAS = {"type": "array", "items": _POS, "minItems": 1}
_MAP = {"oneOf": [{"type": "string"}, {"type": "object", "required": ["kind"]}]}


def _schema(required, props):
    base = {"version": {"const": SCHEMA_VERSION}, "out": {"type": "string"}}
    base.update(props)
    return {"type": "object", "required": ["version", *required], "additionalProperties": False,
            "properties": base}


SCHEMAS = {
    "discretize": _schema(["distribution", "n_bins"], {
        "distribution": _DIST, "n_bins": {"type": "integer", "minimum": 1}, "tail_quantile": _PROB}),
    "stop-loss": _schema(["distribution", "budget"], {"distribution": _DIST, "budget": _NUM,
                                                      "tol": _POS}),
    "quota-share": _schema(["budget"], {"distribution": _DIST, "variance": _POS, "budget": _NUM}),
    "definetti": _schema(["means", "variances", "betas", "budget"], {
        "means": {"type": "array", "items": _NUM}, "variances": {"type": "array", "items": _POS},
        "betas": _BETAS, "budget": _NUM}),
    "mean-variance": _schema(["distributions", "betas", "budget"], {
        "distributions": {"type": "array", "items": _DIST, "minItems": 1}, "betas": _BETAS,
        "budget": _NUM, "integration": _INTEGRATION, "support_grid": {"type": "integer", "minimum": 2}}),
    "var-constrained": _schema(["distributions", "betas", "alpha", "budget"], {
        "distributions": {"type": "array", "items": _DIST, "minItems": 1}, "betas": _BETAS,
        "alpha": _PROB, "budget": _NUM, "integration": _INTEGRATION}),
    "mmot": _schema([], {
        "n_bins": {"type": "integer", "minimum": 1}, "tail_quantile": _PROB,
        "distributions": {"type": "array", "items": _DIST, "minItems": 2, "maxItems": 2},
        "marginal_maps": {"type": "array", "items": _MAP, "minItems": 2, "maxItems": 2},
        "lp": _LP, "mps": {"type": "boolean"}}),
}

DEFAULTS = {
    "discretize": {"tail_quantile": 0.999},
    "mmot": {"n_bins": 40, "tail_quantile": 0.999,
             "distributions": [{"family": "lognormal", "log_mean": -0.5 * math.log(3.0),
                                "log_sd": math.sqrt(math.log(3.0))},
                               {"family": "shifted_pareto", "scale": 3.0, "tail_index": 4.0}],
             "marginal_maps": ["half", "capped_layer"], "lp": {}, "mps": False},
    "mean-variance": {"integration": {}, "support_grid": 50},
    "var-constrained": {"integration": {}},
}

# flags mirroring config keys: (flag, key, type)
FLAGS = {
    "discretize": [("--n", "n_bins", int), ("--q", "tail_quantile", float)],
    "stop-loss": [("--budget", "budget", float)],
    "quota-share": [("--budget", "budget", float), ("--var", "variance", float)],
    "definetti": [("--budget", "budget", float)],
    "mean-variance": [("--budget", "budget", float)],
    "var-constrained": [("--budget", "budget", float), ("--alpha", "alpha", float)],
    "mmot": [("--n", "n_bins", int), ("--q", "tail_quantile", float)],
}


# serialization ----------------------------------------------------------------------

def _round(obj):
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{SIG_DIGITS}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(obj, path: Path):
    path.write_text(json.dumps(_round(obj), indent=2, sort_keys=True) + "\n")


def config_hash(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:12]


# config handling -----------------------------------------------------------------------

def load_config(command: str, path, overrides: dict) -> dict:
    cfg: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict) or "version" not in cfg:
            raise ConfigError("config must be an object with a 'version' field")
    else:
        cfg = {"version": SCHEMA_VERSION}
    cfg = {**copy.deepcopy(DEFAULTS.get(command, {})), **cfg}
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    return cfg


def _dist(spec):
    try:
        return distribution_from_spec(spec)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad distribution spec {spec!r}: {exc}") from exc


def _settings(cfg) -> IntegrationSettings:
    return IntegrationSettings(**cfg.get("integration", {}))


class Run:
    def __init__(self, command: str, cfg: dict, out_root):
        self.command = command
        self.cfg = cfg
        self.hash = config_hash({"command": command, **cfg})
        root = Path(cfg.get("out") or out_root or "runs")
        self.dir = (root / f"{command}-{self.hash}").resolve()
        self.dir.mkdir(parents=True, exist_ok=True)
        self.started = datetime.now(timezone.utc)
        self.t0 = time.perf_counter()

    def report(self, body: dict):
        body = {"command": self.command, "config_hash": self.hash, "config": self.cfg, **body}
        dump_json(body, self.dir / "report.json")
        # exact copy for verify: the report rounds every number
        exact = {"command": self.command, "config_hash": self.hash, "config": self.cfg}
        (self.dir / "config.json").write_text(json.dumps(exact, indent=2, sort_keys=True) + "\n")

    def finish(self, status: str = "ok"):
        meta = {"started": self.started.isoformat(), "finished": datetime.now(timezone.utc).isoformat(),
                "seconds": time.perf_counter() - self.t0, "status": status, "reot_version": __version__,
                "config_hash": self.hash}
        (self.dir / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
        print(self.dir)


# commands ---------------------------------------------------------------------------

def cmd_discretize(cfg, out):
    d = _dist(cfg["distribution"])
    grid = discretize(d, cfg["n_bins"], cfg["tail_quantile"])
    run = Run("discretize", cfg, out)
    grid.to_csv(run.dir / "grid.csv")
    m, v = mean_variance(grid)
    run.report({"n_bins": cfg["n_bins"], "tail_quantile": cfg["tail_quantile"], "grid_mean": m,
                "grid_variance": v, "upper_point": float(grid.support[-1]),
                "total_mass": float(grid.mass.sum())})
    run.finish()
    return EXIT_OK


def cmd_solve(kind, cfg, out):
    run = Run(kind, cfg, out)
    if kind == "stop-loss":
        mu = _dist(cfg["distribution"])
        contract, fit = solve_stop_loss(mu, cfg["budget"], cfg.get("tol", 1e-8))
        run.report({"contract": contract.to_dict(), "fit": fit.to_dict()})
    elif kind == "quota-share":
        if "distribution" in cfg:
            mu = _dist(cfg["distribution"])
        elif "variance" in cfg:
            mu = _VarianceOnly(cfg["variance"])
        else:
            raise ConfigError("quota-share needs a distribution or a variance")
        contract, fit = solve_quota_share_variance_premium(mu, cfg["budget"])
        run.report({"contract": contract.to_dict(), "fit": fit.to_dict()})
    elif kind == "definetti":
        contract, fit = solve_definetti_proportions(cfg["means"], cfg["variances"], cfg["betas"], cfg["budget"])
        run.report({"contract": contract.to_dict(), "fit": fit.to_dict()})
    elif kind == "mean-variance":
        dists = [_dist(s) for s in cfg["distributions"]]
        contract, fit = solve_mean_variance_multiline(dists, cfg["betas"], cfg["budget"], _settings(cfg))
        run.report({"contract": contract.to_dict(), "fit": fit.to_dict()})
    elif kind == "var-constrained":
        dists = [_dist(s) for s in cfg["distributions"]]
        contract, fit = solve_var_constrained(dists, cfg["betas"], cfg["alpha"], cfg["budget"], _settings(cfg))
        run.report({"contract": contract.to_dict(), "fit": fit.to_dict()})
    elif kind == "mmot":
        _solve_mmot(run, cfg)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown solver {kind}")
    run.finish()
    return EXIT_OK


class _VarianceOnly:
    """Stand-in law when only Var(X) is supplied."""

    def __init__(self, variance):
        self.variance = float(variance)


def _experiment(cfg):
    dists = [_dist(s) for s in cfg["distributions"]]
    maps = tuple(map_from_spec(m) for m in cfg["marginal_maps"])
    return two_line_experiment(cfg["n_bins"], cfg["tail_quantile"], dists, maps)


def _solve_mmot(run: Run, cfg):
    exp = _experiment(cfg)
    p = exp.problem
    if cfg.get("mps"):
        export_mps(p.lp, run.dir / "problem.mps")
    opts = LPOptions.from_dict(cfg.get("lp", {}))
    res = solve_mmot(p, opts)
    res.treaty.save(run.dir / "treaty.csv")
    exp.det.save(run.dir / "eta_det.csv")
    np.savetxt(run.dir / "duals.csv", res.lp.duals, header="dual", comments="", fmt="%.17g")
    improvement = 1.0 - res.variance / exp.var_det
    n1, n2, k1, k2 = p.shape
    run.report({
        "var_det": exp.var_det, "var_ot": res.variance, "improvement": improvement,
        "objective": res.objective, "fixed_mean": p.fixed_mean(),
        "shape": {"N1": n1, "N2": n2, "K1": k1, "M": k2, "columns": p.num_columns, "deleted": p.deleted,
                  "rows": p.lp.num_rows},
        "solution": res.to_dict(),
    })


# verify / report ------------------------------------------------------------------------

def _load_run(run_dir):
    """Report of a run with its config replaced by the exact copy when present."""
    d = Path(run_dir)
    rep = d / "report.json"
    if not rep.is_file():
        raise FileNotFoundError(f"no report.json in {d}")
    body = json.loads(rep.read_text())
    exact = d / "config.json"
    if exact.is_file():
        body["config"] = json.loads(exact.read_text())["config"]
    return d, body


def cmd_verify(run_dir, tol=1e-8, support_tol=1e-6):
    d, rep = _load_run(run_dir)
    cfg = rep["config"]
    kind = rep["command"]
    checks = {}
    if kind == "mmot":
        for f in ("treaty.csv", "treaty.json", "duals.csv"):
            if not (d / f).is_file():
                raise FileNotFoundError(f"missing artifact {d / f}")
        treaty = DiscreteTreaty.load(d / "treaty.csv")
        exp = _experiment(cfg)
        p = exp.problem
        feas = check_feasible(treaty, p.mu, tol)
        res = marginal_residuals(p, treaty)
        checks["feasibility"] = {"passed": feas.passed, **feas.to_dict()}
        checks["targets"] = {"passed": max(res["nu1"], res["nu2"]) <= tol, "nu1": res["nu1"], "nu2": res["nu2"]}
        # rebuild the primal vector over the LP columns and replay KKT with the stored duals
        x = _primal_from_treaty(p, treaty)
        duals = np.loadtxt(d / "duals.csv", skiprows=1, ndmin=1)
        kkt = check_kkt(p.lp, LPSolution("optimal", None, float(p.lp.cost @ x), duals, None), tol, x=x,
                        duals=duals) if x is not None else None
        checks["kkt"] = {"passed": bool(kkt and kkt.passed(tol)), **(kkt.to_dict() if kkt else
                                                                   {"error": "atom outside LP columns"})}
    elif kind == "mean-variance":
        contract = contract_from_dict(rep["contract"])
        dists = [_dist(s) for s in cfg["distributions"]]
        settings = _settings(cfg)
        _, v = retained_moments(contract, dists, settings)
        checks["variance_budget"] = {"passed": abs(v - cfg["budget"]) <= 1e-6, "retained_variance": v}
        gap = multiline_support_check(contract, dists, cfg.get("support_grid", 50))
        checks["support_condition"] = {"passed": gap <= support_tol, "gap": gap}
    elif kind == "var-constrained":
        contract = contract_from_dict(rep["contract"])
        dists = [_dist(s) for s in cfg["distributions"]]
        ok, info = retained_value_at_risk_check(contract, dists, cfg["alpha"], settings=_settings(cfg))
        checks["value_at_risk"] = {"passed": ok, **info}
        checks["v_star"] = {"passed": contract.v_star == cfg["budget"]}
    elif kind == "stop-loss":
        mu = _dist(cfg["distribution"])
        a = rep["contract"]["a"]
        r = abs(stop_loss_premium(mu, a) - cfg["budget"])
        # the stored deductible carries 9 significant digits
        checks["premium"] = {"passed": r <= max(1e-8, 1e-8 * abs(a) + 1e-9 * mu.sf(a)), "residual": r}
    elif kind == "definetti":
        a = np.asarray(rep["fit"]["parameters"]["a"])
        V = np.asarray(cfg["variances"])
        r = abs(float(np.sum((1 - a) ** 2 * V)) - cfg["budget"])
        checks["variance_budget"] = {"passed": r <= 1e-7, "residual": r}
    elif kind == "quota-share":
        f = rep["contract"]["factors"][0]
        var = cfg.get("variance") or _dist(cfg["distribution"]).variance
        r = abs(f * f * var - cfg["budget"])
        checks["variance_budget"] = {"passed": r <= 1e-7 * max(1.0, cfg["budget"]), "residual": r}
    else:
        raise FileNotFoundError(f"run type {kind!r} has nothing to verify")
    passed = all(c["passed"] for c in checks.values())
    dump_json({"passed": passed, "checks": checks, "config_hash": rep.get("config_hash")}, d / "verify.json")
    for name, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    return EXIT_OK if passed else EXIT_FAILURE


def multiline_support_check(contract: MultilineMeanVariance, dists, k: int = 50, candidates: int = 101):
    """Support-condition gap of a fitted multiline contract on a ``k``-per-axis quantile grid."""
    u = (np.arange(1, k + 1) - 0.5) / k
    grids = [np.unique(d.quantile(u)) for d in dists]
    mass = np.full(tuple(g.size for g in grids), 1.0 / np.prod([g.size for g in grids]))
    mu = JointDistribution(tuple(grids), mass)
    t = deterministic_treaty(mu, contract.reinsured)
    p, g = multiline_support_functions(contract)
    return support_condition_gap(t, p, g, 1.0, contract.lambda_star, candidates=candidates)


def _primal_from_treaty(p, treaty):
    n1, n2, k1, _ = p.shape
    flat_cols = p.flat_index()
    i, j = treaty.x_index.T
    k, l = treaty.y_index.T
    flat = i + n1 * j + n1 * n2 * k + n1 * n2 * k1 * l
    pos = np.searchsorted(flat_cols, flat)
    if np.any(pos >= flat_cols.size) or np.any(flat_cols[np.minimum(pos, flat_cols.size - 1)] != flat):
        return None
    x = np.zeros(p.num_columns)
    np.add.at(x, pos, treaty.mass)
    return x


def cmd_report(run_dir):
    d, rep = _load_run(run_dir)
    if rep["command"] != "mmot" or not (d / "treaty.csv").is_file():
        raise FileNotFoundError(f"no treaty artifact in {d}")
    out = d / "figures"
    out.mkdir(exist_ok=True)
    summary = {}
    for name, path in (("optimal", d / "treaty.csv"), ("deterministic", d / "eta_det.csv")):
        if not path.is_file():
            continue
        t = DiscreteTreaty.load(path)
        tables = marginal_reports(t)
        sums = {}
        for key, table in tables.items():
            table.to_csv(out / f"{name}_{key}.csv")
            if key != "support_counts":
                sums[key] = _marginal_check(t, key, table)
        counts = tables["support_counts"].mass
        summary[name] = {
            "max_row_sum_error": max(sums.values()),
            "max_support_count": int(counts.max()),
            "cells_with_split_mass": int((counts > 1).sum()),
            "off_diagonal_fraction_Y1_Y2": off_diagonal_fraction(tables["Y1_Y2"]),
        }
    dump_json(summary, out / "summary.json")
    print(out)
    return EXIT_OK


def _marginal_check(t: DiscreteTreaty, key: str, table) -> float:
    """Largest gap between the table's margins and the same margins recomputed from atoms."""
    cols = {"X1": t.x_values()[:, 0], "X2": t.x_values()[:, 1], "Y1": t.retained_values()[:, 0],
            "Y2": t.retained_values()[:, 1], "R1": t.reinsured_values()[:, 0], "R2": t.reinsured_values()[:, 1]}
    a, b = key.split("_")
    ra = DiscreteDistribution.from_samples(cols[a], t.mass)
    rb = DiscreteDistribution.from_samples(cols[b], t.mass)
    return float(max(np.max(np.abs(table.mass.sum(axis=1) - ra.mass)),
                     np.max(np.abs(table.mass.sum(axis=0) - rb.mass))))


# entry point -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reot", description="Optimal reinsurance by optimal transport.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discretize", help="bin a claim law into an equal-width grid")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--family", help=f"one of {', '.join(FAMILY_NAMES)}")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="distribution parameter (repeatable); defaults are the standard instances")
    for flag, key, typ in FLAGS["discretize"]:
        p.add_argument(flag, dest=key, type=typ)

    s = sub.add_parser("solve", help="fit an optimal contract or solve the multi-marginal LP")
    kinds = s.add_subparsers(dest="kind", required=True)
    for kind in ("stop-loss", "quota-share", "definetti", "mean-variance", "var-constrained", "mmot"):
        k = kinds.add_parser(kind)
        k.add_argument("--config")
        k.add_argument("--out")
        for flag, key, typ in FLAGS[kind]:
            k.add_argument(flag, dest=key, type=typ)
        if kind == "mmot":
            k.add_argument("--mps", action="store_const", const=True, default=None,
                           help="also write the LP in fixed-format MPS")

    v = sub.add_parser("verify", help="re-check a finished run")
    v.add_argument("--run", required=True)
    r = sub.add_parser("report", help="emit figure-data CSVs for a multi-marginal run")
    r.add_argument("--run", required=True)
    return ap


_STANDARD = {
    "lognormal": {"log_mean": -0.5 * math.log(3.0), "log_sd": math.sqrt(math.log(3.0))},
    "shifted_pareto": {"scale": 3.0, "tail_index": 4.0},
    "pareto": {"scale": 3.0, "tail_index": 4.0},
    "gamma": {"shape": 0.5, "rate": 0.5},
    "exponential": {"rate": 1.0},
    "uniform": {"lo": 0.0, "hi": 1.0},
}


def _discretize_overrides(args) -> dict:
    over = {k: getattr(args, k) for _, k, _ in FLAGS["discretize"]}
    if args.family is not None:
        spec = {"family": args.family, **_STANDARD.get(args.family, {})}
        for item in args.param:
            key, _, val = item.partition("=")
            try:
                spec[key] = float(val)
            except ValueError:
                raise ConfigError(f"bad --param {item!r}") from None
        over["distribution"] = spec
    return over


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "discretize":
            cfg = load_config("discretize", args.config, _discretize_overrides(args))
            return cmd_discretize(cfg, args.out)
        if args.command == "solve":
            over = {k: getattr(args, k) for _, k, _ in FLAGS[args.kind]}
            if args.kind == "mmot":
                over["mps"] = args.mps
            cfg = load_config(args.kind, args.config, over)
            return cmd_solve(args.kind, cfg, args.out)
        if args.command == "verify":
            return cmd_verify(args.run)
        if args.command == "report":
            return cmd_report(args.run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FileNotFoundError as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ReotError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_FAILURE  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
