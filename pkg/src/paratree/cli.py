"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 infeasible or failed check,
3 resource limit (dimension cap).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

from . import linalg as la

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def code_version():
    """sha256 over the package sources, in sorted file order."""
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def _clean(x):
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def emit(payload, args, config):
    doc = dict(config=_clean(config), code_version=code_version(), **_clean(payload))
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "csv")}


# ---------------------------------------------------------------- design

def _load_problem(path, n=None, s=None):
    from .problems import load_problem, load_edges_csv, TargetProblem

    if str(path).endswith(".csv"):
        J = load_edges_csv(path)
        if s is None:
            raise UsageError("--s is required with an edge CSV")
        n = n or 1 + max(max(e) for e in J)
        return TargetProblem(n=n, s=s, J=J)
    return load_problem(path)


def _mediator(kind, J, truncation, n):
    from .mediators import MediatorModel

    if kind == "tl":
        return MediatorModel("tl", J, truncation=truncation, n=n)
    return MediatorModel(kind, J, truncation=truncation)


def cmd_design(args):
    from . import mediators as med, theorem as th

    problem = _load_problem(args.problem, args.n, args.s)
    noise = th.NoiseBudget.uniform(args.delta)
    if args.mediator == "tl":
        rep = th.tl_main_result(problem.n, problem.s, args.epsilon, noise, args.allow_nonrigorous)
        facts = med.tl_facts(problem.n, 1.0)
        rep.hardware_params = th.hardware_parameters(facts, problem, rep.alpha_o)
        rep.hardware_params["circuit"] = {
            k: dict(zip(("L", "M", "feasible"), med.circuit_map(f))) for k, f in rep.hardware_params["f"].items()}
    else:
        facts = med.qubit_coupler_facts(args.J) if args.mediator == "qubit" else med.lc_facts(args.J)
        rep = th.general_theorem(facts, problem, noise, args.epsilon, allow_nonrigorous=args.allow_nonrigorous)
    payload = dict(report=rep.to_dict(), hardware=rep.hardware_params, facts=facts.to_dict(),
                   problem=problem.to_dict())
    emit(payload, args, _config(args))
    if not rep.feasible:
        sys.stderr.write(f"infeasible: {rep.binding_inequality}\n")
        return EXIT_INFEASIBLE
    return EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args):
    import numpy as np
    from . import verify as vf, theorem as th
    from .problems import TargetProblem, ProblemFormatError

    try:
        doc = json.loads(Path(args.design).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{args.design}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        problem = TargetProblem.from_dict(doc["problem"])
        m = doc["mediator"]
        mediator = _mediator(m["kind"], float(m.get("J", 1.0)), int(m.get("truncation", 0)), problem.n)
        eps = float(doc.get("epsilon", 0.1))
        noise = doc.get("noise", {}) or {}
        delta = float(noise.get("delta", 0.0))
        mode = noise.get("mode", "sampled")
    except KeyError as exc:
        raise ProblemFormatError(f"design file: missing field {exc}") from None
    design = vf.design_gadget(problem, mediator, eps, th.NoiseBudget.uniform(delta), alpha=doc.get("alpha"))
    warnings = []
    if delta > 0:
        rng = np.random.default_rng(args.seed)
        design.noise_sample = vf.sample_noise(design, delta, rng, worst_case=(mode == "worst"))
        design.certified = design.certified and design.report.feasible
    if not design.certified:
        warnings.append("design not covered by the feasibility theorem; reported only")
    comp = vf.verify_spectrum(design, check_bound=False)
    passed = comp.epsilon_emp <= eps
    if design.certified and not passed:
        warnings.append("certified design exceeded its bound")
    if args.csv:
        vf.write_trace_csv(comp, args.csv)
    emit(dict(comparison=comp.to_dict(), certified=design.certified, passed=passed, warnings=warnings,
              alpha=design.alpha), args, _config(args))
    return EXIT_INFEASIBLE if design.certified and not passed else EXIT_OK


# ---------------------------------------------------------------- theorem experiments

def cmd_warmup(args):
    from . import theorem as th

    dmax = th.warmup_delta_max(args.n, args.s, args.omega_p, args.r, args.epsilon)
    p = th.WarmupParams(args.n, args.s, args.omega_p, args.r, args.delta if args.delta is not None else dmax,
                        args.epsilon)
    ok, alpha, branch = th.warmup_solve(p)
    av, val, rng = th.warmup_vertex(p)
    direct = bool(val <= 1e-12 * p.epsilon * p.s * p.omega_p and rng and 0 < av <= 1)
    emit(dict(delta_max=dmax, delta=p.delta, feasible=ok or direct,
              tree=dict(feasible=ok, alpha=alpha, branch=branch),
              vertex=dict(feasible=direct, alpha=av, budget=val),
              thresholds=th.warmup_thresholds(p)), args, _config(args))
    return EXIT_OK if ok or direct else EXIT_INFEASIBLE


def cmd_pegasus40(args):
    from . import theorem as th

    inst = th.Pegasus40Instance(epsilon=args.epsilon, c=args.c)
    flavors = th.FLAVORS if args.flavor == "all" else (args.flavor,)
    out = {}
    for f in flavors:
        if args.J is not None:
            d, a, ch = th.pegasus40_at(inst, f, args.J)
            out[f] = dict(delta_max=d, J=args.J, alpha=a, checks=ch)
        else:
            r = th.pegasus40_optimize(inst, f)
            out[f] = dict(delta_max=r.delta_max, J=r.J_opt, alpha=r.alpha, checks=r.checks)
    emit(dict(results=out), args, _config(args))
    return EXIT_OK


def cmd_gapscan(args):
    from . import anneal as an

    ks = list(range(1, args.kmax + 1))
    rows = an.crossover_report(args.kmax, grid_points=args.grid, coarse=args.coarse)
    if args.csv:
        an.write_table_csv(rows, args.csv)
    me = [r["min_gap"] for r in rows if r["method"] == "minor_embedding"]
    pa = [r["min_gap"] for r in rows if r["method"] == "paramagnetic"]
    checks = {}
    if args.kmax >= 4:
        checks["para_beats_me_at_k4"] = pa[3] > me[3]
    if args.kmax >= 4:
        checks["me_exponential_rate"] = an.fit_exponential(ks[1:], me[1:])
        checks["para_power_exponent"] = an.fit_power(ks[1:], pa[1:])
    emit(dict(rows=rows, checks=checks), args, _config(args))
    if args.kmax >= 4 and not checks["para_beats_me_at_k4"]:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_normscale(args):
    from . import classical as cl

    ns = [int(x) for x in args.n_list.split(",")]
    pt = dict(sweeps=args.sweeps, restarts=args.restarts)
    fit = cl.scaling_fit(args.ensemble, ns, args.reps, args.seed, args.s, args.method, pt)
    if args.csv:
        cl.write_rows_csv(fit.rows, args.csv)
    emit(dict(a=fit.a, stderr=fit.stderr, a_median=fit.a_median, stderr_median=fit.stderr_median,
              n_list=ns), args, _config(args))
    return EXIT_OK


def cmd_audit(args):
    from . import sw

    report = sw.empirical_lemma_audit(trials=args.trials, seed=args.seed)
    emit(dict(audit=json.loads(sw.audit_json(report))), args, _config(args))
    return EXIT_OK if not report["violations"] else EXIT_INFEASIBLE


# ---------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="paratree", description="Mediator gadget design and verification.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", "-o", help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common(sub.add_parser("design", help="feasibility verdict and hardware parameters"))
    p.add_argument("problem", help="problem JSON, or edge CSV with --n/--s")
    p.add_argument("--mediator", choices=("qubit", "lc", "tl"), default="qubit")
    p.add_argument("--J", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--allow-nonrigorous", action="store_true")
    p.set_defaults(func=cmd_design)

    p = common(sub.add_parser("verify", help="exact spectral check of a small gadget"))
    p.add_argument("design", help="design JSON {problem, mediator, epsilon, alpha?, noise?}")
    p.add_argument("--csv", help="eigenvalue trace CSV")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("warmup", help="control precision for non-qubit levels"))
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--s", type=float, default=1.5)
    p.add_argument("--omega-p", type=float, default=10.0)
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_warmup)

    p = common(sub.add_parser("pegasus40", help="40-qubit coupler layout precision"))
    p.add_argument("--flavor", choices=("all",) + ("simple_2PV", "PVQ_split", "finite_dim"), default="all")
    p.add_argument("--J", type=float)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--c", type=float, default=3.5)
    p.set_defaults(func=cmd_pegasus40)

    p = common(sub.add_parser("gapscan", help="anneal minimal gaps, embedding versus mediators"))
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--coarse", type=int, default=8)
    p.add_argument("--csv", help="crossover table CSV")
    p.set_defaults(func=cmd_gapscan)

    p = common(sub.add_parser("normscale", help="classical Ising norm scaling"))
    p.add_argument("--ensemble", choices=("all_to_all", "sparse"), default="all_to_all")
    p.add_argument("--n-list", default="8,10,12,14,16,18,20")
    p.add_argument("--reps", type=int, default=40)
    p.add_argument("--s", type=float, default=1.5)
    p.add_argument("--method", choices=("exact", "pt"), default="exact")
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--csv", help="per-instance CSV")
    p.set_defaults(func=cmd_normscale)

    p = common(sub.add_parser("audit", help="random check of the block-diagonalization bounds"))
    p.add_argument("--trials", type=int, default=500)
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None):
    from .problems import ProblemFormatError

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except la.DimensionCapError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (ProblemFormatError, UsageError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
