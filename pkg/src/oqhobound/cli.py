"""Command line front end.

    oqho-bound COMMAND --model model.json [options]

Commands run the pipeline up to the named stage::

    validate   -> A, B, realizability residual, Hurwitz flag
    invariant  -> + invariant covariance P and nominal cost rate
    certify    -> + decay certificate (mu, Gamma, alpha) and its verification
    bound      -> + worst-case bound per eps (closed form and numeric check)
    sweep      -> + closed-form sweep over eps (the only command with CSV output)
    oracle     -> validate + invariant + classical Monte Carlo / spectral oracle
    all        -> every stage above

The report is JSON unless ``--format csv`` is given for ``sweep``.  On
failure a JSON document with an ``error`` object and whatever stages did
complete is still written, and the exit code identifies the failure class
(2 parse, 3 invalid parameters, 4 not Hurwitz, 5 numeric failure).
"""

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bounds, certificate, matnum, oracle
from .config import DEFAULTS
from .errors import InvalidParams, OqhoError, ParseError
from .oqho import OqhoParams, build_state_space, invariant_model

COMMANDS = ("validate", "invariant", "certify", "bound", "sweep", "oracle", "all")
STAGES = {
    "validate": {"validate"},
    "invariant": {"validate", "invariant"},
    "certify": {"validate", "invariant", "certify"},
    "bound": {"validate", "invariant", "certify", "bound"},
    "sweep": {"validate", "invariant", "certify", "sweep"},
    "oracle": {"validate", "invariant", "oracle"},
    "all": {"validate", "invariant", "certify", "bound", "sweep", "oracle"},
}
CSV_COLUMNS = ("eps", "sigma", "theta_star", "bound", "mu", "alpha", "n")
MODEL_FIELDS = ("n", "m", "Theta", "K", "M", "Pi")


def _check_matrix(name, value):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError(f"field {name!r}: expected a non-empty list of rows")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise ParseError(f"field {name!r}: row {i} has {len(row)} entries, row 0 has {width}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f"field {name!r}: entry [{i}][{j}] is not a number: {x!r}")


def parse_model(text, source="<model>"):
    """Parse a JSON model document (or a previous report embedding one)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("model"), dict):
        doc = doc["model"]
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    missing = [k for k in MODEL_FIELDS if k not in doc]
    if missing:
        raise ParseError(f"{source}: missing fields {', '.join(missing)}")
    for k in ("n", "m"):
        if isinstance(doc[k], bool) or not isinstance(doc[k], int):
            raise ParseError(f"{source}: field {k!r} must be an integer")
    for k in MODEL_FIELDS[2:]:
        _check_matrix(k, doc[k])
    return OqhoParams.from_dict(doc)


def load_model(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read model file {str(path)!r}: {exc.strerror}") from exc
    return parse_model(text, str(path))


def _eps_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid eps list {text!r}") from exc
    if any(v < 0 or not math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("eps values must be finite and nonnegative")
    return values


def build_parser():
    p = argparse.ArgumentParser(
        prog="oqho-bound",
        description="Worst-case quadratic cost bounds for open quantum harmonic oscillators.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True, metavar="PATH", help="JSON model file")
    p.add_argument("--eps", type=_eps_list, default=[0.0], metavar="LIST",
                   help="comma-separated relative-entropy rate thresholds (default: 0)")
    p.add_argument("--mu", type=float, default=None,
                   help="certificate decay rate; optimised on a grid when omitted")
    p.add_argument("--grid", type=int, default=DEFAULTS.mu_grid,
                   help="grid size for the mu search (default: %(default)s)")
    p.add_argument("--theta-grid", type=int, default=DEFAULTS.theta_grid,
                   help="grid size for the numeric theta minimisation")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="report file (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.0,
                   help="risk sensitivity for the Monte Carlo exponential moment")
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--dt", type=float, default=None,
                   help="Euler-Maruyama step (default: 1e-3 * min(1, 1/||A||))")
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--config", metavar="PATH", help="JSON file overriding tolerance constants")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _finite(x):
    """JSON-safe scalar: non-finite floats become null."""
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _finite(x.tolist())
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _load_tolerances(path):
    if path is None:
        return DEFAULTS
    try:
        overrides = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path!r}: {exc}") from exc
    try:
        return DEFAULTS.updated(overrides)
    except (KeyError, TypeError) as exc:
        raise InvalidParams(str(exc)) from exc


def _stage_validate(params, tol):
    ss = build_state_space(params)
    section = {
        "A": ss.A, "B": ss.B, "J": ss.J,
        "pr_residual": ss.pr_residual,
        "realizable": ss.pr_residual <= tol.realizability_tol * (
            1.0 + matnum.operator_norm(ss.A) * matnum.operator_norm(params.Theta)),
        "hurwitz": ss.hurwitz,
        "spectral_abscissa": ss.spectral_abscissa,
    }
    return ss, section


def _stage_invariant(params, ss):
    inv = invariant_model(params, ss)
    section = {
        "P": inv.P,
        "nominal_rate": inv.nominal_rate,
        "lyapunov_residual": matnum.lyapunov_residual(ss.A, inv.P, ss.B @ ss.B.T),
    }
    return inv, section


def _stage_certify(args, params, ss, inv, tol):
    if args.mu is None:
        cert = certificate.optimize_mu(ss, inv, params, max(args.eps), grid=args.grid)
        how = "optimized"
    else:
        cert = certificate.make_certificate(ss, inv, params, args.mu)
        how = "given"
    taus = certificate.default_taus(cert.mu, tol.verify_tau_points, tol.verify_tau_span)
    check = certificate.verify_certificate(
        cert, ss, inv, params, taus, ali_tol=tol.ali_tol, margin_tol=tol.decay_margin_tol)
    section = cert.to_dict()
    section.update(selection=how, optimized_for_eps=max(args.eps) if how == "optimized" else None,
                   verification=check.to_dict())
    return cert, section


def _stage_bound(args, params, cert):
    rows = []
    for eps in args.eps:
        closed = bounds.worst_case_bound_closed(eps, params.n, cert)
        numeric = bounds.worst_case_bound_numeric(eps, params.n, cert, grid=args.theta_grid)
        row = closed.row()
        row.update(theta_max=closed.theta_max, boundary=closed.boundary,
                   bound_numeric=numeric.bound, theta_star_numeric=numeric.theta_star)
        rows.append(row)
    return rows


def _stage_oracle(args, params, ss):
    dt = args.dt if args.dt is not None else oracle.default_dt(ss.A)
    cfg = oracle.SimConfig(horizon=args.horizon, dt=dt, trajectories=args.paths,
                           seed=args.seed, theta=args.theta)
    if args.theta > 0:
        rep = oracle.simulate_exp_moment_rate(ss, params, cfg)
    else:
        rep = oracle.simulate_quadratic_rate(ss, params, cfg)
    section = rep.to_dict()
    section["spectral_rate_theta0"] = oracle.classical_spectral_rate(ss, params, 0.0)
    section["config"] = {"horizon": cfg.horizon, "dt": cfg.dt, "trajectories": cfg.trajectories,
                         "seed": cfg.seed, "theta": cfg.theta}
    return section


def execute(args):
    """Run the requested stages; returns ``(report, exit_code)``."""
    report = {
        "tool": "oqho-bound",
        "version": __version__,
        "command": args.command,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "status": "ok",
    }
    stages = STAGES[args.command]
    try:
        tol = _load_tolerances(args.config)
        report["tolerances"] = tol.to_dict()
        if args.format == "csv" and args.command != "sweep":
            raise InvalidParams("CSV output is only available for the sweep command")
        params = load_model(args.model)
        report["model"] = params.to_dict()
        report["inputs"] = {"eps": args.eps, "mu": args.mu, "grid": args.grid,
                            "theta_grid": args.theta_grid}
        ss, report["validate"] = _stage_validate(params, tol)
        if stages == {"validate"}:
            return report, 0
        inv, report["invariant"] = _stage_invariant(params, ss)
        if "certify" in stages:
            cert, report["certificate"] = _stage_certify(args, params, ss, inv, tol)
        if "bound" in stages:
            report["bounds"] = _stage_bound(args, params, cert)
        if "sweep" in stages:
            report["sweep"] = [b.row() for b in bounds.sweep(args.eps, params.n, cert)]
        if "oracle" in stages:
            report["oracle"] = _stage_oracle(args, params, ss)
        return report, 0
    except OqhoError as exc:
        report["status"] = "error"
        report["error"] = dict(exc.to_dict(), exit_code=exc.exit_code)
        return report, exc.exit_code


def render(report, fmt):
    if fmt == "csv" and "sweep" in report:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in report["sweep"]:
            w.writerow({k: repr(float(row[k])) if k != "n" else row[k] for k in CSV_COLUMNS})
        return buf.getvalue()
    return json.dumps(_finite(report), indent=2) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    report, code = execute(args)
    text = render(report, args.format if code == 0 else "json")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        print(json.dumps(report["error"]), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
