"""Command-line front end.

    homwell adapted check     theta against a flow on T^2
    homwell adapted search    least-squares search for a strongly adapted theta
    homwell condition check   homogeneous-well conditions (--kind)
    homwell well simulate     Stormer-Verlet trajectory, CSV via --out
    homwell well euler-check  Euler homogeneity residual of a potential
    homwell embed kronecker|circles|verify
    homwell tm run|suspend

Every subcommand accepts ``--config FILE``: a JSON object whose keys are the
long option names (dashes or underscores); command-line flags win. Reports go
to stdout or ``--out`` (``well simulate`` writes its CSV to ``--out`` and
takes ``--report`` for the report). Exit codes: 0 satisfied/completed, 1 violated or
infeasible, 2 usage or parse error, 3 inconclusive, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .adapted import (
    check_adapted,
    check_homwell0_impossible,
    check_homwell_condition,
    search_adapted,
)
from .embeddings import circle_product_embedding, flow_residual, kronecker_embedding, verify_conjugacy
from .expr import EvaluationError, ParseError, potential_from_expression, torus_function
from .potential import euler_residual, integrate, PhaseState, symplectic_identity_check, write_csv
from .report import (
    Report,
    adapted_to_dict,
    certificate_to_dict,
    condition_to_dict,
    emit_report,
    search_to_dict,
)
from .spectral import OneForm, ScalarField, VectorField
from .turing import (
    busy_beaver_2,
    geodesible_certificate,
    halting_reachability,
    parse_machine,
    suspension_flow_at,
    tm_run,
)

__all__ = ["main", "run_command", "build_parser", "UsageError"]

DEFAULTS = {
    "f": "sin(2*pi*y)+2",
    "flow_x": None,
    "flow_y": None,
    "theta_dx": "1",
    "theta_dy": "0",
    "R": "1",
    "k": None,
    "max_mode": 32,
    "search_max_mode": 4,
    "tol": 1e-9,
    "grid_n": None,
    "y0": 0.25,
    "constraint": None,
    "search": False,
    "V": None,
    "q0": None,
    "p0": None,
    "dt": 1e-3,
    "steps": 1000,
    "escape_radius": 1e6,
    "out": None,
    "report": None,
    "samples": 100,
    "rmin": None,
    "rmax": 10.0,
    "epsilon": 0.1,
    "euler_tol": 1e-9,
    "alpha": math.sqrt(2.0),
    "c1": 1.0,
    "c2": 1.0,
    "n": 1,
    "kind": None,
    "start": None,
    "t_max": 10.0,
    "conjugacy_tol": 1e-4,
    "machine": None,
    "builtin": None,
    "input": "",
    "max_steps": 1000,
    "t": 1.0,
    "t0": 0.0,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _torus_opts(p, search=False):
    p.add_argument("--f", help="profile f(y) of the flow f(y) d/dx (default sin(2*pi*y)+2)")
    p.add_argument("--flow-x", help="general flow: d/dx component (overrides --f)")
    p.add_argument("--flow-y", help="general flow: d/dy component")
    p.add_argument("--theta-dx", help="dx component of theta")
    p.add_argument("--theta-dy", help="dy component of theta")
    p.add_argument("--max-mode", type=int, help="projection truncation for fields")
    p.add_argument("--tol", type=float)
    p.add_argument("--grid-n", type=int)


def _common(p, out_is_report=True):
    p.add_argument("--config", help="JSON file with option values")
    flags = ("--out", "--report") if out_is_report else ("--report",)
    p.add_argument(*flags, dest="report", help="write the report here instead of stdout")


def build_parser():
    root = _Parser(prog="homwell", description="adapted 1-forms, homogeneous wells, embeddings, suspensions")
    root.add_argument("--version", action="version", version=f"homwell {__version__}")
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    adapted = groups.add_parser("adapted").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = adapted.add_parser("check")
    _torus_opts(p)
    _common(p)
    p = adapted.add_parser("search")
    _torus_opts(p)
    p.add_argument("--constraint", action="append", choices=["strongly_adapted", "homwell2_joint"])
    _common(p)

    cond = groups.add_parser("condition").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = cond.add_parser("check")
    _torus_opts(p)
    p.add_argument("--kind", choices=["homwell_k", "homwell2", "spherical", "homwell0"])
    p.add_argument("--k", type=float)
    p.add_argument("--R", help="radial profile R (default 1)")
    p.add_argument("--y0", type=float, help="orbit for the homwell0 certificate")
    p.add_argument("--search", action="store_true", default=None, help="search for (theta, r) instead of checking the given theta")
    _common(p)

    well = groups.add_parser("well").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = well.add_parser("simulate")
    p.add_argument("--V", help="potential in q1..qm and norm(q)")
    p.add_argument("--q0")
    p.add_argument("--p0")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--escape-radius", type=float)
    p.add_argument("--out", help="trajectory CSV path")
    _common(p, out_is_report=False)
    p = well.add_parser("euler-check")
    p.add_argument("--V")
    p.add_argument("--k", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--rmin", type=float)
    p.add_argument("--rmax", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--dimension", type=int)
    p.add_argument("--tol", dest="euler_tol", type=float)
    _common(p)

    embed = groups.add_parser("embed").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = embed.add_parser("kronecker")
    p.add_argument("--alpha", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    _common(p)
    p = embed.add_parser("circles")
    p.add_argument("--n", type=int)
    _common(p)
    p = embed.add_parser("verify")
    p.add_argument("--kind", choices=["kronecker", "circles"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--start", help="comma-separated source angles in [0, 1)")
    p.add_argument("--t-max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--tol", dest="conjugacy_tol", type=float)
    _common(p)

    tm = groups.add_parser("tm").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("run", "suspend"):
        p = tm.add_parser(name)
        p.add_argument("--machine", help="machine description file")
        p.add_argument("--builtin", choices=["busy-beaver-2"])
        p.add_argument("--input", help="input tape, laid out from cell 0")
        if name == "run":
            p.add_argument("--max-steps", type=int)
        else:
            p.add_argument("--t", type=float)
            p.add_argument("--t0", type=float)
        _common(p)
    return root


def _resolve(ns):
    cfg = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {ns.config} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    vals = {}
    for key, val in vars(ns).items():
        if val is None:
            val = cfg.get(key, DEFAULTS.get(key))
        vals[key] = val
    for key, val in cfg.items():
        vals.setdefault(key, val)
    for key, val in DEFAULTS.items():
        vals.setdefault(key, val)
    if vals.get("tol") is not None and not vals["tol"] > 0:
        raise UsageError("--tol must be positive")
    if vals.get("max_mode") is not None and vals["max_mode"] < 1:
        raise UsageError("--max-mode must be >= 1")
    return argparse.Namespace(**vals)


def _vector(text, name):
    try:
        return np.array([float(v) for v in str(text).split(",")], float)
    except ValueError:
        raise UsageError(f"--{name} must be a comma-separated list of numbers") from None


def _project(src, M):
    try:
        fn = torus_function(src)
    except ParseError as exc:
        raise UsageError(f"cannot parse {src!r}: {exc}") from None
    try:
        return ScalarField.from_function(fn, M, return_residual=True)
    except (EvaluationError, ValueError) as exc:
        raise UsageError(f"cannot project {src!r}: {exc}") from None


def _torus_inputs(a, M=None):
    M = M or a.max_mode
    residuals = {}
    if a.flow_x is not None or a.flow_y is not None:
        fx, residuals["flow_x"] = _project(a.flow_x or "0", M)
        fy, residuals["flow_y"] = _project(a.flow_y or "0", M)
        X = VectorField(fx, fy)
    else:
        f, residuals["f"] = _project(a.f, M)
        X = VectorField.product_flow(f)
    t1, residuals["theta_dx"] = _project(a.theta_dx, M)
    t2, residuals["theta_dy"] = _project(a.theta_dy, M)
    inputs = {
        "f": a.f if a.flow_x is None and a.flow_y is None else None,
        "flow_x": a.flow_x,
        "flow_y": a.flow_y,
        "theta_dx": a.theta_dx,
        "theta_dy": a.theta_dy,
        "max_mode": M,
        "tolerance": a.tol,
        "projection_residuals": residuals,
    }
    return X, OneForm(t1, t2), inputs


def _cmd_adapted_check(a):
    X, theta, inputs = _torus_inputs(a)
    rep = check_adapted(X, theta, a.tol, a.grid_n)
    status = "satisfied" if rep.strongly_adapted else "violated"
    return Report("adapted check", status, inputs, adapted_to_dict(rep))


def _cmd_adapted_search(a):
    M = a.max_mode if a.max_mode != DEFAULTS["max_mode"] else a.search_max_mode
    X, _, inputs = _torus_inputs(a, M=max(M, 1))
    constraints = a.constraint or ["strongly_adapted"]
    inputs["constraints"] = sorted(constraints)
    res = search_adapted(X, M, constraints, a.grid_n, a.tol)
    status = {"found": "satisfied", "infeasible": "violated", "inconclusive": "inconclusive"}[res.status]
    return Report("adapted search", status, inputs, search_to_dict(res, a.tol), res.reason)


def _cmd_condition_check(a):
    if a.kind is None:
        raise UsageError("condition check: --kind is required")
    X, theta, inputs = _torus_inputs(a)
    R, rres = _project(a.R, a.max_mode)
    inputs.update(kind=a.kind, k=a.k, R=a.R, search=bool(a.search), y0=a.y0)
    inputs["projection_residuals"]["R"] = rres
    if a.kind in ("homwell_k", "spherical") and a.k is None:
        raise UsageError(f"--kind {a.kind} needs --k")
    if a.kind == "homwell_k" and a.k == 0:
        raise UsageError("k = 0 is rejected for homwell_k; use --kind homwell0")
    if a.search:
        if a.kind == "homwell2":
            M = a.search_max_mode
            X, _, _ = _torus_inputs(a, M=M)
            res = search_adapted(X, M, ["homwell2_joint"], a.grid_n, a.tol)
            status = {"found": "satisfied", "infeasible": "violated", "inconclusive": "inconclusive"}[res.status]
            return Report("condition check", status, inputs, search_to_dict(res, a.tol), res.reason)
        if a.kind == "homwell0":
            res = search_adapted(X.__class__(X.comp_x.truncate(a.search_max_mode), X.comp_y.truncate(a.search_max_mode)),
                                 a.search_max_mode, ["strongly_adapted"], a.grid_n, a.tol)
            if res.status != "found":
                return Report("condition check", "inconclusive", inputs, search_to_dict(res, a.tol), res.reason)
            theta = res.theta
        else:
            raise UsageError("--search is supported for --kind homwell2 and homwell0")
    if a.kind == "homwell0":
        try:
            cert = check_homwell0_impossible(X, theta, a.y0, a.tol)
        except ValueError as exc:
            rep = check_homwell_condition(X, theta, R, 0.0, "homwell0", a.tol, a.y0)
            d = condition_to_dict(rep)
            status = "satisfied" if rep.satisfied else "violated"
            return Report("condition check", status, inputs, d, f"no certificate: {exc}")
        rep = check_homwell_condition(X, theta, R, 0.0, "homwell0", a.tol, a.y0)
        d = condition_to_dict(rep)
        d["certificate"] = certificate_to_dict(cert)
        return Report("condition check", "violated", inputs, d, "HomWell_0 embedding impossible")
    rep = check_homwell_condition(X, theta, R, a.k, a.kind, a.tol)
    return Report("condition check", "satisfied" if rep.satisfied else "violated", inputs, condition_to_dict(rep))


def _potential(a):
    if not a.V:
        raise UsageError("--V is required")
    try:
        return potential_from_expression(a.V, getattr(a, "dimension", None), epsilon=a.epsilon)
    except (ParseError, EvaluationError) as exc:
        raise UsageError(f"cannot parse potential {a.V!r}: {exc}") from None


def _cmd_well_simulate(a):
    if a.q0 is None or a.p0 is None:
        raise UsageError("--q0 and --p0 are required")
    q0, p0 = _vector(a.q0, "q0"), _vector(a.p0, "p0")
    if q0.shape != p0.shape:
        raise UsageError("--q0 and --p0 must have equal length")
    a.dimension = len(q0)
    V = _potential(a)
    if V.dimension != len(q0):
        raise UsageError(f"potential uses {V.dimension} coordinates but q0 has {len(q0)}")
    if not a.dt > 0 or a.steps < 1:
        raise UsageError("need --dt > 0 and --steps >= 1")
    try:
        traj = integrate(V, PhaseState(q0, p0), a.dt, a.steps, a.escape_radius)
    except EvaluationError as exc:
        return Report("well simulate", "error", {"V": a.V}, {}, str(exc))
    if a.out:
        write_csv(traj, a.out)
    ident = symplectic_identity_check(traj, V)
    inputs = {"V": a.V, "q0": list(q0), "p0": list(p0), "dt": a.dt, "steps": a.steps,
              "escape_radius": a.escape_radius, "out": a.out}
    result = {
        "trajectory": {
            "rows": len(traj),
            "steps_taken": len(traj) - 1,
            "final_q": list(traj.q[-1]),
            "final_p": list(traj.p[-1]),
            "initial_energy": float(traj.energy[0]),
            "max_energy_drift": traj.max_energy_drift,
            "kinetic_identity_residual": ident.kinetic_residual,
            "blowup_flag": traj.blowup_flag,
            "escape_radius": traj.escape_radius,
            "trajectory_status": traj.status,
            "tolerance": None,
        }
    }
    status = "error" if traj.status == "error" else "satisfied"
    return Report("well simulate", status, inputs, result, traj.message)


def _cmd_well_euler(a):
    if a.k is None:
        raise UsageError("--k is required")
    V = _potential(a)
    rmin = a.rmin if a.rmin is not None else V.epsilon
    try:
        res = euler_residual(V, a.k, a.samples, (rmin, a.rmax))
    except (ValueError, EvaluationError) as exc:
        raise UsageError(str(exc)) from None
    inputs = {"V": a.V, "k": a.k, "samples": a.samples, "radius_range": [rmin, a.rmax], "epsilon": V.epsilon}
    ok = res <= a.euler_tol
    return Report("well euler-check", "satisfied" if ok else "violated", inputs,
                  {"euler_residual": res, "tolerance": a.euler_tol})


def _embedding(a, kind):
    try:
        if kind == "kronecker":
            return kronecker_embedding(a.alpha, a.c1, a.c2)
        return circle_product_embedding(a.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_embed(a, kind):
    emb = _embedding(a, kind)
    fres = flow_residual(emb)
    eres = euler_residual(emb.potential, 2)
    result = {
        "embedding": emb.summary(),
        "flow_residual": {"value": fres, "tolerance": 1e-10, "grid": 64},
        "euler_residual": {"value": eres, "tolerance": 1e-12, "k": 2},
    }
    ok = fres <= 1e-10 and eres <= 1e-12
    return Report(f"embed {kind}", "satisfied" if ok else "violated", emb.summary()["source"], result)


def _cmd_embed_verify(a):
    if a.kind is None:
        raise UsageError("embed verify: --kind is required")
    emb = _embedding(a, a.kind)
    start = _vector(a.start, "start") if a.start else np.zeros(emb.n)
    if start.shape != (emb.n,):
        raise UsageError(f"--start needs {emb.n} angles")
    try:
        dev = verify_conjugacy(emb, start, a.t_max, a.dt)
    except (ValueError, RuntimeError) as exc:
        return Report("embed verify", "error", {}, {}, str(exc))
    inputs = {"kind": a.kind, "source": emb.summary()["source"], "start": list(start), "t_max": a.t_max, "dt": a.dt}
    result = {"conjugacy_deviation": dev, "tolerance": a.conjugacy_tol, "embedding": emb.summary()}
    return Report("embed verify", "satisfied" if dev <= a.conjugacy_tol else "violated", inputs, result)


def _machine(a):
    if a.machine:
        with open(a.machine, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return parse_machine(text), a.machine
        except ValueError as exc:
            raise UsageError(f"{a.machine}: {exc}") from None
    if a.builtin == "busy-beaver-2" or a.builtin is None:
        return busy_beaver_2(), "busy-beaver-2"
    raise UsageError(f"unknown builtin {a.builtin!r}")


def _config_dict(c):
    return {"state": c.state, "tape": [[i, s] for i, s in c.tape], "blank": c.blank}


def _cmd_tm_run(a):
    tm, name = _machine(a)
    c0 = tm.initial(a.input or None)
    final, steps, halted = tm_run(tm, c0, a.max_steps)
    reached, first = halting_reachability(tm, c0, None, a.max_steps)
    result = {
        "halted": halted,
        "steps": steps,
        "final_configuration": _config_dict(final),
        "halting_reachability": {"reached": reached, "first_time": first, "t_max": float(a.max_steps)},
        "tolerance": 0.0,
    }
    inputs = {"machine": name, "input": a.input, "max_steps": a.max_steps}
    return Report("tm run", "satisfied" if halted else "inconclusive", inputs, result,
                  "" if halted else f"no halt within {a.max_steps} steps")


def _cmd_tm_suspend(a):
    tm, name = _machine(a)
    c0 = tm.initial(a.input or None)
    if a.t < 0 or not 0 <= a.t0 < 1:
        raise UsageError("need --t >= 0 and 0 <= --t0 < 1")
    c, tau = suspension_flow_at(tm, (c0, a.t0), a.t)
    cert = geodesible_certificate()
    result = {
        "configuration": _config_dict(c),
        "fiber_time": tau,
        "certificate": {
            "pairing_value": cert.pairing_value,
            "lie_derivative_zero": cert.lie_derivative_zero,
            "torus_cross_check": cert.torus_cross_check,
            "tolerance": 0.0,
        },
    }
    inputs = {"machine": name, "input": a.input, "t": a.t, "t0": a.t0}
    return Report("tm suspend", "satisfied", inputs, result)


_COMMANDS = {
    ("adapted", "check"): _cmd_adapted_check,
    ("adapted", "search"): _cmd_adapted_search,
    ("condition", "check"): _cmd_condition_check,
    ("well", "simulate"): _cmd_well_simulate,
    ("well", "euler-check"): _cmd_well_euler,
    ("embed", "kronecker"): lambda a: _cmd_embed(a, "kronecker"),
    ("embed", "circles"): lambda a: _cmd_embed(a, "circles"),
    ("embed", "verify"): _cmd_embed_verify,
    ("tm", "run"): _cmd_tm_run,
    ("tm", "suspend"): _cmd_tm_suspend,
}


def run_command(argv, stdout=None, stderr=None) -> int:
    """Run one invocation; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    command = "homwell"
    try:
        ns = build_parser().parse_args(argv)
        command = f"{ns.group} {ns.action}"
        a = _resolve(ns)
        rep = _COMMANDS[(ns.group, ns.action)](a)
    except UsageError as exc:
        rep = Report(command, "error", {"argv": list(argv)}, {}, str(exc), exit_code=2)
        print(str(exc), file=stderr)
        stdout.write(emit_report(rep))
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=stderr)
        return 4
    try:
        text = emit_report(rep, a.report)
    except OSError as exc:
        print(f"I/O error: {exc}", file=stderr)
        return 4
    if a.report is None:
        stdout.write(text)
    if rep.message and rep.status != "satisfied":
        print(rep.message, file=stderr)
    return rep.exit_code


def main(argv=None):
    try:
        code = run_command(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # --help / --version
        code = exc.code if isinstance(exc.code, int) else 0
    sys.exit(code)


if __name__ == "__main__":
    main()
