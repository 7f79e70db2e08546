"""Command-line scenario runner.

Every subcommand accepts the keys of its scenario kind as flags (see
``schema.toml``); ``--config FILE`` values take precedence over flags.

Exit codes: 0 success, 2 configuration error, 3 blow-up or collapse detected,
4 convexity-guard stop.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, kernels
from . import curve_flow as cf
from . import diagnostics as dg
from . import fv_solver as fv
from . import sphere_ode as so
from .config import ConfigError, load_flat, scenario_from_mapping, schema_for
from .geometry import OUTFLOW
from .graph_system import ConservedState, eigenstructure_1d, jacobian_1d

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_GUARD = 4

# subcommand -> scenario kinds it accepts
COMMANDS = {
    "sphere": ("sphere",),
    "curve": ("curve",),
    "graph": ("graph1d", "graph2d"),
    "riemann": ("riemann",),
    "eigen": ("eigen",),
    "convergence": ("convergence",),
    "report": ("curve",),
}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])


def _floatify(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        if isinstance(v, float) and not np.isfinite(v):
            v = repr(v)
        out[k] = v
    return out


def _config(p, **extra):
    return fv.SolverConfig(flux_scheme=p["flux_scheme"], cfl=p["cfl"], integrator=p["integrator"],
                           t_end=p["t_end"], output_every=p.get("output_every", 10 ** 9),
                           hyperbolicity_eps=p["hyperbolicity_eps"], **extra)


def _graph_exit(termination):
    if termination == "guard":
        return EXIT_GUARD
    if termination.startswith("blowup"):
        return EXIT_BLOWUP
    return EXIT_OK


def run_sphere(sc, out):
    p = sc.parameters
    traj = so.integrate_sphere(p["n"], p["r0"], p["sigma0"], p["dt"], t_max=p["t_max"] or None)
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    head = {
        "collapse_time": traj.collapse_time,
        "max_radius": float(np.max(traj.r)),
        "energy_ratio_max_deviation": float(np.max(np.abs(traj.energy_ratio() - 1.0))),
        "steps": int(traj.t.size - 1),
    }
    if p["n"] == 2:
        head["exact_collapse_time"] = so.blowup_time_n2(p["r0"], p["sigma0"])
    code = EXIT_BLOWUP if traj.termination == "collapse" else EXIT_OK
    return traj.termination, code, head, ["trajectory.csv"]


def _initial_curve(p):
    if p["shape"] == "circle":
        return cf.circle_initial(p["r0"], p["sigma0"], p["m"])
    return cf.ellipse_initial(p["ax"], p["by"], p["m"], p["sigma0"])


def run_curve(sc, out):
    p = sc.parameters
    rec = cf.run_curve(_initial_curve(p), p["dt"], p["t_end"], output_every=p["output_every"])
    rec.write_csv(os.path.join(out, "curve.csv"))
    E = dg.total_energy(rec)
    head = {
        "final_time": float(rec.times[-1]),
        "snapshots": int(rec.n_snapshots),
        "energy_relative_drift": dg.max_drift(E) / abs(E[0]),
        "final_mean_radius": float(rec.mean_radius()[-1]),
        "message": rec.message,
    }
    code = EXIT_BLOWUP if rec.termination in (cf.COLLAPSE, cf.BLOWUP) else EXIT_OK
    return rec.termination, code, head, ["curve.csv"]


def run_report(sc, out):
    p = sc.parameters
    rec = cf.run_curve(_initial_curve(p), p["dt"], p["t_end"], output_every=p["output_every"])
    rep = dg.conservation_report(rec)
    bud = dg.curvature_budget(rec)
    flags = bud.flags()
    flags["E_U_relative_drift"] = bud.E_U_drift
    flags["pointwise_gamma_residual"] = bud.pointwise_gamma_residual
    rep.write_csv(os.path.join(out, "report.csv"))
    rep.write_summary(os.path.join(out, "summary.json"), flags)
    head = dict(rep.drifts)
    head.update(flags)
    code = EXIT_BLOWUP if rec.termination in (cf.COLLAPSE, cf.BLOWUP) else EXIT_OK
    return rec.termination, code, head, ["report.csv", "summary.json"]


def _graph_outputs(rec, out):
    rec.write_snapshots(os.path.join(out, "snapshots.csv"))
    rec.write_diagnostics(os.path.join(out, "diagnostics.csv"))
    d0, d1 = rec.diagnostics[0], rec.diagnostics[-1]
    head = {k: d1[k] for k in d1}
    head["final_time"] = rec.times[-1]
    head["steps"] = rec.n_steps
    head["entropy_admissible"] = (fv.entropy_production(rec).admissible
                                  if rec.fields[0].boundary == "periodic" else None)
    head["bv_ratio"] = (max(d["bv"] for d in rec.diagnostics) / d0["bv"]) if d0["bv"] > 0 else None
    return head, ["snapshots.csv", "diagnostics.csv"]


def run_graph(sc, out):
    p = sc.parameters
    if sc.kind == "graph1d":
        f = fv.sine_initial(p["cells"], p["length"], p["sigma_amplitude"], p["b_amplitude"],
                            p["wavenumber"], p["boundary"])
    else:
        f = fv.sine_initial_2d((p["cells_x"], p["cells_y"]), (p["length_x"], p["length_y"]),
                               p["sigma_amplitude"], (p["b1_amplitude"], p["b2_amplitude"]),
                               p["wavenumber"], p["boundary"])
    rec = fv.run(f, _config(p))
    head, files = _graph_outputs(rec, out)
    head["message"] = rec.message
    return rec.termination, _graph_exit(rec.termination), head, files


def run_riemann(sc, out):
    p = sc.parameters
    left = ConservedState(p["sigma_left"], [p["b_left"]])
    right = ConservedState(p["sigma_right"], [p["b_right"]])
    f = fv.riemann_initial(left, right, p["cells"], p["length"], OUTFLOW, lower=-0.5 * p["length"])
    rec = fv.run(f, _config(p))
    head, files = _graph_outputs(rec, out)
    head["message"] = rec.message
    return rec.termination, _graph_exit(rec.termination), head, files


def eigen_rows(samples, bound, seed, h=1e-6):
    """Residuals of the 1D eigenstructure at random (a, b)."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-bound, bound, size=(samples, 2))
    rows = []
    for a, b in pts:
        es = eigenstructure_1d(a, b)
        A = jacobian_1d(a, b)
        res = max(np.linalg.norm(A @ es.mu_plus - es.lambda_plus * es.mu_plus) / np.linalg.norm(es.mu_plus),
                  np.linalg.norm(A @ es.mu_minus - es.lambda_minus * es.mu_minus) / np.linalg.norm(es.mu_minus))
        # directional derivative of lambda_+ along mu_+ by central differences
        da, db = es.mu_plus
        lp = eigenstructure_1d(a + h * da, b + h * db).lambda_plus
        lm = eigenstructure_1d(a - h * da, b - h * db).lambda_plus
        fd = (lp - lm) / (2.0 * h)
        rows.append((a, b, es.lambda_plus, es.lambda_minus, es.gnl, res, abs(fd - es.gnl)))
    return rows


def run_eigen(sc, out):
    p = sc.parameters
    rows = eigen_rows(p["samples"], p["bound"], sc.seed)
    _write_rows(os.path.join(out, "eigen.csv"),
                ["a", "b", "lambda_plus", "lambda_minus", "gnl", "eig_residual", "gnl_fd_error"], rows)
    arr = np.array(rows)
    head = {"max_eig_residual": float(arr[:, 5].max()), "max_gnl_fd_error": float(arr[:, 6].max())}
    return "done", EXIT_OK, head, ["eigen.csv"]


def _convergence_run(args):
    cells, p = args
    f = fv.sine_initial(cells, p["length"], p["sigma_amplitude"], p["b_amplitude"], p["wavenumber"])
    rec = fv.run(f, _config(p))
    return rec.termination, rec.fields[-1]


def convergence_study(scenario, grids=None):
    """L1 errors of each grid against the reference grid, with observed rates.

    Returns a list of row dicts (cells, dx, l1_error, pairwise_rate,
    fitted_rate); ``fitted_rate`` is the least-squares slope of -log(error)
    against log(cells) over all grids.
    """
    p = dict(scenario.parameters)
    grids = list(p["grids"] if grids is None else grids)
    ref_cells = p["reference_cells"]
    jobs = [(g, p) for g in grids + [ref_cells]]
    if p.get("workers", 1) > 1:
        with ProcessPoolExecutor(max_workers=p["workers"]) as ex:
            results = list(ex.map(_convergence_run, jobs))
    else:
        results = [_convergence_run(j) for j in jobs]
    bad = [r[0] for r in results if r[0] != "t_end"]
    if bad:
        raise RuntimeError(f"convergence run stopped early: {bad[0]}")
    ref = results[-1][1]
    errs = [fv.l1_distance(fld, fv.restrict(ref, ref_cells // g)) for g, (_, fld) in zip(grids, results)]
    fitted = float(np.polyfit(np.log(grids), -np.log(errs), 1)[0])
    rows = []
    for i, (g, e) in enumerate(zip(grids, errs)):
        rate = float(np.log(errs[i - 1] / e) / np.log(g / grids[i - 1])) if i else float("nan")
        rows.append({"cells": g, "dx": p["length"] / g, "l1_error": e,
                     "pairwise_rate": rate, "fitted_rate": fitted})
    return rows


def run_convergence(sc, out):
    rows = convergence_study(sc)
    keys = ["cells", "dx", "l1_error", "pairwise_rate", "fitted_rate"]
    _write_rows(os.path.join(out, "convergence.csv"), keys, [[r[k] for k in keys] for r in rows])
    head = {"fitted_rate": rows[0]["fitted_rate"], "finest_error": rows[-1]["l1_error"]}
    return "done", EXIT_OK, head, ["convergence.csv"]


RUNNERS = {
    "sphere": run_sphere,
    "curve": run_curve,
    "graph1d": run_graph,
    "graph2d": run_graph,
    "riemann": run_riemann,
    "eigen": run_eigen,
    "convergence": run_convergence,
}


def run_scenario(scenario, command=None):
    """Run a validated scenario, write artifacts and a manifest; return the exit code."""
    out = scenario.output_dir
    os.makedirs(out, exist_ok=True)
    runner = run_report if command == "report" else RUNNERS[scenario.kind]
    termination, code, head, files = runner(scenario, out)
    if code == EXIT_BLOWUP and scenario.parameters.get("expect_collapse", False):
        code = EXIT_OK
    manifest = {
        "kind": scenario.kind,
        "command": command or scenario.kind,
        "config_hash": scenario.config_hash(),
        "seed": scenario.seed,
        "parameters": scenario.parameters,
        "termination": termination,
        "exit_code": code,
        "headline": _floatify(head),
        "artifacts": files,
        "version": __version__,
        "backend": kernels.BACKEND,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return code


def _add_flags(sub, kinds):
    seen = set()
    for kind in kinds:
        for key, entry in schema_for(kind).items():
            if key in seen:
                continue
            seen.add(key)
            flag = "--" + key.replace("_", "-")
            help_ = entry.get("doc", "")
            if "default" in entry:
                help_ = f"{help_} [default {entry['default']}]".strip()
            if "choices" in entry:
                help_ = f"{help_} {{{', '.join(entry['choices'])}}}"
            if entry["type"] == "bool":
                sub.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction,
                                 default=None, help=help_)
            elif entry["type"] == "int_list":
                sub.add_argument(flag, dest=key, type=int, nargs="+", default=None, help=help_)
            else:
                conv = {"int": int, "float": float, "str": str}[entry["type"]]
                sub.add_argument(flag, dest=key, type=conv, default=None, help=help_)


def build_parser():
    parser = argparse.ArgumentParser(prog="hmcf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hmcf {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, kinds in COMMANDS.items():
        sub = subs.add_parser(name, help=f"run a {'/'.join(kinds)} scenario")
        sub.add_argument("--config", metavar="FILE", help="flat TOML config; overrides flags")
        sub.add_argument("--output-dir", dest="output_dir", default=None)
        sub.add_argument("--seed", type=int, default=None)
        if name == "graph":
            sub.add_argument("--dim", type=int, choices=(1, 2), default=None,
                             help="1 for graph1d (default), 2 for graph2d")
        _add_flags(sub, kinds)
    return parser


def scenario_from_args(args):
    kinds = COMMANDS[args.command]
    mapping = {k: v for k, v in vars(args).items()
               if v is not None and k not in ("command", "config", "dim")}
    kind = kinds[0]
    if args.command == "graph" and args.dim == 2:
        kind = "graph2d"
    if args.config:
        with open(args.config) as fh:
            data = load_flat(fh.read())
        ckind = data.pop("kind", None)
        if ckind is not None:
            if ckind not in kinds:
                raise ConfigError([f"kind: {ckind!r} cannot run under '{args.command}'"])
            kind = ckind
        # flags that do not belong to the file's kind are dropped, file keys win
        allowed = set(schema_for(kind)) | {"output_dir", "seed"}
        mapping = {k: v for k, v in mapping.items() if k in allowed}
        mapping.update(data)
    return scenario_from_mapping(mapping, kind)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = scenario_from_args(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = run_scenario(scenario, args.command)
    print(json.dumps({"output_dir": scenario.output_dir, "exit_code": code}))
    return code


if __name__ == "__main__":
    sys.exit(main())
