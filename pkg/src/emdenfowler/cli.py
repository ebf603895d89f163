"""Command-line interface: solve, verify, shoot and glue.

Exit codes: 0 success, 1 assertion failure or negative result, 2 usage error.
Configuration resolves as defaults < config file section < command-line flags,
and the resolved configuration is echoed into every JSON report.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path

from . import __version__
from .report import SCHEMA_VERSION, dumps, svg_profile, svg_trajectory, write_csv, write_json

DEFAULTS = {
    "solve": {"family": None, "f": None, "sign": "minus", "a": None, "rmax": 200.0, "tol": 1e-10,
              "out": "out", "svg": False, "check": True},
    "verify": {"suite": None, "out": None, "seed": 0, "jobs": None},
    "shoot": {"ell": None, "m": None, "n1": None, "n2": None, "lambda": None, "p": None, "k": None,
              "dmax": 100.0, "lattice": 240, "out": "out"},
    "glue": {"ell": None, "m": None, "n1": None, "n2": None, "lambda": None, "p": None, "k": None,
             "d": None, "image": "P1", "dmax": 100.0, "lattice": 240, "out": "out"},
}

TYPES = {"rmax": float, "tol": float, "a": float, "seed": int, "jobs": int, "ell": int, "m": int,
         "n1": int, "n2": int, "lambda": float, "p": float, "k": int, "dmax": float, "lattice": int,
         "d": float, "svg": "bool", "check": "bool"}

SUITE_NAMES = ("regimes", "pohozaev", "energy", "hypotheses", "geometry", "tables",
               "exact", "blowup", "shooting", "gluing", "all")


class UsageError(Exception):
    pass


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _coerce(key, value):
    if value is None:
        return None
    kind = TYPES.get(key)
    try:
        if kind == "bool":
            return _bool(value)
        if kind is not None:
            return kind(value)
    except ValueError as exc:
        raise UsageError(f"invalid value for {key}: {value!r}") from exc
    return value


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        parser.read(path, encoding="utf-8")
        if parser.has_section(command):
            for key, value in parser.items(command):
                key = key.replace("-", "_")
                if key not in cfg:
                    raise UsageError(f"unknown key {key!r} in section [{command}]")
                cfg[key] = _coerce(key, value)
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = _coerce(key, flag)
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + k for k in missing))


def _header(command, cfg) -> dict:
    from .geometry import calibrate_sign
    return {"schema_version": SCHEMA_VERSION, "tool": "emdenfowler", "version": __version__,
            "command": command, "config": cfg, "laplacian_sign_calibration": calibrate_sign()}


# ---------------------------------------------------------------------------
# parsing of problem specifications


def parse_family(text: str):
    from .coefficients import PowerLaw, SinhRatio, SinRatio
    kind, _, rest = text.partition(":")
    parts = [x for x in rest.split(",") if x]
    try:
        if kind == "power" and len(parts) == 1:
            return PowerLaw(float(parts[0]))
        if kind == "sinh" and len(parts) in (2, 3):
            return SinhRatio(float(parts[0]), float(parts[1]), parts[2] if len(parts) == 3 else "plus")
        if kind == "sin" and len(parts) == 2:
            return SinRatio(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise UsageError(f"invalid family {text!r}: {exc}") from exc
    raise UsageError(f"invalid family {text!r}; use power:THETA, sinh:ALPHA,BETA[,plus|minus] or sin:ALPHA,BETA")


def parse_nonlinearity(text: str):
    from .coefficients import PowerDifference, PowerMinusLinear, PurePower
    kind, _, rest = text.partition(":")
    parts = [x for x in rest.split(",") if x]
    try:
        vals = [float(x) for x in parts]
        if kind == "power" and len(vals) == 2:
            return PurePower(*vals)
        if kind == "pml" and len(vals) == 2:
            return PowerMinusLinear(*vals)
        if kind == "pdiff" and len(vals) == 4:
            return PowerDifference(*vals)
    except ValueError as exc:
        raise UsageError(f"invalid nonlinearity {text!r}: {exc}") from exc
    raise UsageError(f"invalid nonlinearity {text!r}; use power:LAMBDA,P, pml:LAMBDA,P or pdiff:LAMBDA,DELTA,P,S")


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg) -> int:
    from .coefficients import PowerLaw, PurePower
    from .diagnostics import PohozaevNotApplicable, classify, energy, pohozaev_residual
    from .singular_ivp import HypothesisViolation, SingularIVP, integrate
    _require(cfg, "family", "f", "a")
    if cfg["sign"] not in ("plus", "minus"):
        raise UsageError("--sign must be plus or minus")
    try:
        prob = SingularIVP(parse_family(cfg["family"]), parse_nonlinearity(cfg["f"]), cfg["sign"],
                           cfg["a"], cfg["rmax"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(cfg["out"])
    report = _header("solve", cfg)
    try:
        tr = integrate(prob, rtol=cfg["tol"], atol=cfg["tol"] * 1e-2, check=cfg["check"])
    except HypothesisViolation as exc:
        report["status"] = "hypothesis_violation"
        report["failing"] = list(exc.names)
        report["hypotheses"] = exc.report.as_dict()
        write_json(out / "report.json", report)
        sys.stdout.write(dumps(report))
        return 1
    term = tr.termination
    report["status"] = "ok"
    report["termination"] = {"kind": term.kind, "r_stop": term.r_stop, "reason": term.reason,
                             "R_est": term.R_est, "fit_exponent": term.fit_exponent,
                             "low_confidence": term.low_confidence}
    report["events"] = {"zeros": tr.zeros, "critical_points": tr.critical_points}
    report["stats"] = tr.stats
    canon = prob.canonical()
    en = energy(tr, canon.nl, canon.sign)
    report["energy"] = {"kind": en.kind, "drift_per_unit_r": en.drift_per_unit_r, "spread": en.spread,
                        "nonincreasing": en.nonincreasing}
    if isinstance(prob.family, PowerLaw) and isinstance(prob.nl, PurePower):
        report["classification"] = classify(tr).as_dict()
        lam = canon.nl.Lambda if canon.sign == "minus" else -canon.nl.Lambda
        try:
            ph = pohozaev_residual(tr, prob.family.theta, lam, prob.nl.p)
            report["pohozaev"] = {"max_residual": ph.max_residual, "coefficient": ph.coefficient}
        except PohozaevNotApplicable as exc:
            report["pohozaev"] = {"applicable": False, "reason": str(exc)}
    write_csv(out / "trajectory.csv", tr.r, tr.w, tr.wp)
    if cfg["svg"]:
        svg_trajectory(out / "trajectory.svg", tr, f"{prob.family.label()}  {prob.nl.label()}")
    write_json(out / "report.json", report)
    sys.stdout.write(dumps(report))
    return 0


def cmd_verify(cfg) -> int:
    from .verification import run_suite
    _require(cfg, "suite")
    name = cfg["suite"]
    if name not in SUITE_NAMES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    names = [n for n in SUITE_NAMES if n != "all"] if name == "all" else [name]
    report = _header("verify", cfg)
    results = []
    for n in names:
        kw = {}
        if n == "geometry":
            kw["seed"] = cfg["seed"]
        if n == "regimes":
            kw["jobs"] = cfg["jobs"] or (os.cpu_count() or 1)
        results.append(run_suite(n, **kw))
    report["suites"] = [r.as_dict() for r in results]
    report["passed"] = all(r.passed for r in results)
    if cfg["out"]:
        write_json(Path(cfg["out"]) / f"verify_{name}.json", report)
    sys.stdout.write(dumps(report))
    return 0 if report["passed"] else 1


def _compact(cfg):
    from .shooting import CompactProblem
    _require(cfg, "ell", "m", "n1", "n2", "lambda", "p")
    try:
        return CompactProblem(cfg["ell"], cfg["m"], cfg["n1"], cfg["n2"], cfg["lambda"], cfg["p"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_shoot(cfg) -> int:
    from .shooting import NotFoundInRange, positive_solutions, shoot_k_nodal
    pr = _compact(cfg)
    report = _header("shoot", cfg)
    report["flags"] = pr.flags()
    k = cfg["k"]
    if not k:
        pos = positive_solutions(pr, value_range=(1e-2, cfg["dmax"]), n_lattice=cfg["lattice"])
        report["status"] = "positive_scan"
        report["lambda_1_reference"] = pr.m / (pr.p - 1) if pr.ell == 1 else None
        report["constant_only"] = not pos
        report["positive_solutions"] = [s.as_dict() for s in pos]
        _emit(cfg, report, "shoot.json")
        return 0
    if not pr.subcritical_nodal:
        report["status"] = "gate_failed"
        report["message"] = f"p = {pr.p} is not below {pr.nodal_bound:g}"
        _emit(cfg, report, "shoot.json")
        return 1
    try:
        sol = shoot_k_nodal(pr, k, d_range=(1.0, cfg["dmax"]), n_lattice=cfg["lattice"])
    except NotFoundInRange as exc:
        report["status"] = "not_found_in_range"
        report["bracket"] = list(exc.bracket)
        _emit(cfg, report, "shoot.json")
        return 1
    report["status"] = "ok"
    report["solution"] = sol.as_dict()
    _emit(cfg, report, "shoot.json")
    return 0


def cmd_glue(cfg) -> int:
    from .shooting import GluingRejected, NotFoundInRange, ShootingError, glue_entire, shoot_k_nodal
    pr = _compact(cfg)
    _require(cfg, "k")
    if cfg["image"] not in ("P1", "P2", "P3"):
        raise UsageError("--image must be P1, P2 or P3")
    report = _header("glue", cfg)
    report["flags"] = pr.flags()
    k = cfg["k"]
    try:
        if cfg["image"] == "P3":
            _require(cfg, "d")
            g = glue_entire(pr, 0, cfg["d"], image="P3")
        else:
            sol = None
            if k > 0:
                sol = shoot_k_nodal(pr, k, d_range=(1.0, cfg["dmax"]), n_lattice=cfg["lattice"])
            g = glue_entire(pr, k, image=cfg["image"], solution=sol)
    except NotFoundInRange as exc:
        report["status"] = "not_found_in_range"
        report["bracket"] = list(exc.bracket)
        _emit(cfg, report, "glue.json")
        return 1
    except GluingRejected as exc:
        report["status"] = "gluing_rejected"
        report["message"] = str(exc)
        _emit(cfg, report, "glue.json")
        return 1
    except ShootingError as exc:
        report["status"] = "shooting_failed"
        report["message"] = str(exc)
        _emit(cfg, report, "glue.json")
        return 1
    from .shooting import t_equation_residual
    report["status"] = "ok"
    report["glued"] = g.as_dict()
    report["t_equation_residual"] = t_equation_residual(g)
    lo, hi = g.profile.domain
    report["domain"] = [lo, hi]
    blow = [g.R_plus] + ([-g.R_minus] if g.R_minus is not None else [])
    svg_profile(Path(cfg["out"]) / "glue.svg", g.profile, [b for b in blow if b is not None and math.isfinite(b)],
                f"{g.case_tag}  l={pr.ell} m={pr.m} lambda={pr.lam:g} p={pr.p:g}")
    _emit(cfg, report, "glue.json")
    return 0


def _emit(cfg, report, name):
    write_json(Path(cfg["out"]) / name, report)
    sys.stdout.write(dumps(report))


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="emdenfowler", description="Singular Emden-Fowler solver and verification tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="integrate one singular initial value problem")
    s.add_argument("--config")
    s.add_argument("--family", help="power:THETA | sinh:ALPHA,BETA[,plus|minus] | sin:ALPHA,BETA")
    s.add_argument("--f", help="power:LAMBDA,P | pml:LAMBDA,P | pdiff:LAMBDA,DELTA,P,S")
    s.add_argument("--sign", choices=("plus", "minus"))
    s.add_argument("--a", type=float)
    s.add_argument("--rmax", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--out")
    s.add_argument("--svg", action="store_const", const=True)
    s.add_argument("--no-check", dest="check", action="store_const", const=False)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", nargs="?")
    v.add_argument("--config")
    v.add_argument("--out")
    v.add_argument("--seed", type=int)
    v.add_argument("--jobs", type=int)

    for name in ("shoot", "glue"):
        c = sub.add_parser(name, help="k-nodal compact solution" if name == "shoot" else "glued entire profile")
        c.add_argument("--config")
        c.add_argument("--ell", type=int)
        c.add_argument("--m", type=int)
        c.add_argument("--n1", type=int)
        c.add_argument("--n2", type=int)
        c.add_argument("--lambda", dest="lambda", type=float)
        c.add_argument("--p", type=float)
        c.add_argument("--k", type=int)
        c.add_argument("--dmax", type=float)
        c.add_argument("--lattice", type=int)
        c.add_argument("--out")
        if name == "glue":
            c.add_argument("--d", type=float)
            c.add_argument("--image", choices=("P1", "P2", "P3"))
    return p


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "shoot": cmd_shoot, "glue": cmd_glue}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: solve, verify, shoot or glue")
        cfg = resolve_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        sys.stderr.write(dumps({"schema_version": SCHEMA_VERSION, "error": "usage", "message": str(exc)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
