"""Command-line front end.

Every subcommand prints JSON (or CSV where rows make sense) and maps library
errors to exit codes: 2 bad arguments, 3 numerical degeneracy, 4 accuracy.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import experiments
from .asymptotics import corollary2, theorem31, threshold_normalize
from .errors import ArgumentError, GsdError
from .model import (
    SINGULAR,
    KotzParams,
    ModelSpec,
    gsd_joint_density,
    kotz_density,
    kotz_generator,
    sd_density,
    subvector_joint_density,
    subvector_radial_density,
)
from .qp import QpProblem, solve, verify_solution
from .radial import law_from_dict, mda_certificate
from .sampler import mc_tail


def _floats(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror}") from None


def _load_model(path):
    return ModelSpec.from_dict(_read_json(path))


def _jsonable(x):
    return experiments._clean(x)


def _rows_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else r[c] for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, csv_text or None)


def cmd_qp_solve(args):
    doc = _read_json(args.input)
    try:
        problem = QpProblem(doc["Sigma"], doc["b"])
    except KeyError as exc:
        raise ArgumentError(f"input needs key {exc}") from None
    sol = solve(problem)
    report = verify_solution(problem, sol, rng=np.random.default_rng(args.seed))
    out = sol.to_dict()
    out["verification"] = report.to_dict()
    return out, None


def _asymptotics(spec, args):
    b = np.asarray(args.b, dtype=float)
    sol = solve(QpProblem(spec.mixing.Sigma, b))
    if args.mode == "custom":
        qj = None if args.q_J is None else args.q_J
        th = threshold_normalize(spec, sol, b, mode="custom", q_I=args.q_I, q_J=qj)
    else:
        th = threshold_normalize(spec, sol, b)
    fn = corollary2 if args.route == "corollary" else theorem31
    return fn(spec, b, thresholds=th, sol=sol, method=args.method, seed=args.seed)


def cmd_asym(args):
    spec = _load_model(args.model)
    asym = _asymptotics(spec, args)
    rows = []
    for u in args.u or []:
        lv = asym.log_value(u)
        rows.append({"u": u, "value": math.exp(lv), "log_value": lv})
    out = asym.to_dict()
    out["evaluate_at"] = rows
    return out, _rows_csv(rows, ("u", "value", "log_value"))


def cmd_mc_estimate(args):
    spec = _load_model(args.model)
    rows = []
    for u in args.u:
        est = mc_tail(spec, args.b, u, args.n, seed=args.seed, estimator=args.estimator, delta=args.delta)
        rows.append({"u": u, **est.to_dict()})
    payload = rows[0] if len(rows) == 1 else {"estimates": rows}
    return payload, _rows_csv(rows, ("u", "p_hat", "std_err", "hits", "n_samples", "estimator", "seed"))


def cmd_mda_check(args):
    if args.law is not None:
        try:
            doc = json.loads(args.law)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"--law is not valid JSON ({exc})") from None
    elif args.law_file is not None:
        doc = _read_json(args.law_file)
    else:
        raise ArgumentError("give a law with --law or --law-file")
    law = law_from_dict(doc)
    return mda_certificate(law).to_dict(), None


def cmd_example1(args):
    rep = experiments.run_example1(args.k, args.rho, args.p, args.u_grid, seed=args.seed, n=args.n)
    return rep, None


def cmd_example2(args):
    cond = None
    if args.conditional:
        cond = {"x": args.x_grid, "n": args.n_conditional}
        if args.u_conditional is not None:
            cond["u"] = args.u_conditional
    indep = {"n_pilot": args.n_pilot, "n_joint": args.n_pilot} if args.independence else None
    rep = experiments.run_example2(
        args.alpha1, args.alpha2, args.rho, args.a, args.u_grid, seed=args.seed, n=args.n, q=args.q,
        conditional=cond, independence=indep,
    )
    return rep, None


def cmd_densities(args):
    spec = _load_model(args.model)
    x = np.asarray(args.x, dtype=float)
    kind = args.kind
    if kind == "sd":
        val = sd_density(spec.alpha, x)
    elif kind == "kotz":
        val = kotz_density(spec, KotzParams(args.N, args.r, args.s), x)
    elif kind == "joint":
        val = gsd_joint_density(spec, kotz_generator(spec.alpha, KotzParams(args.N, args.r, args.s)), x)
    elif kind == "subvector-radial":
        if x.size != 1:
            raise ArgumentError("subvector-radial takes a single z in --x")
        val = subvector_radial_density(spec, args.index_set, float(x[0]))
    elif kind == "subvector-joint":
        idx = args.index_set or []
        A_sub = np.eye(len(idx)) if args.A_sub is None else np.asarray(args.A_sub, dtype=float).reshape(len(idx), len(idx))
        val = subvector_joint_density(spec, idx, A_sub, x)
    else:  # pragma: no cover - argparse restricts choices
        raise ArgumentError(kind)
    singular = val is SINGULAR
    return {"kind": kind, "x": x.tolist(), "density": None if singular else float(val), "singular": singular}, None


# ---------------------------------------------------------------------------


def build_parser():
    def globals_(default):
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=default(0), help="base seed for every random stream")
        g.add_argument("--output", "-o", default=default(None), help="write the result here instead of stdout")
        g.add_argument("--format", choices=("json", "csv"), default=default("json"))
        return g

    common = globals_(lambda v: v)
    # flags repeated after the subcommand must not reset values given before it
    sub_common = globals_(lambda v: argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="gsdtail", description="Tail asymptotics of GSD random vectors.",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[sub_common])
        p.set_defaults(func=fn)
        return p

    p = add("qp-solve", cmd_qp_solve, "solve min x'Sigma^-1 x subject to x >= b")
    p.add_argument("input", help="JSON file with keys Sigma and b")

    p = add("asym", cmd_asym, "leading-order tail asymptotics")
    p.add_argument("model", help="ModelSpec JSON file")
    p.add_argument("--b", type=_floats, required=True)
    p.add_argument("--mode", choices=("plain", "custom"), default="plain")
    p.add_argument("--q-I", dest="q_I", type=_floats, default=None)
    p.add_argument("--q-J", dest="q_J", type=_floats, default=None, help="entries may be -inf")
    p.add_argument("--u", type=_floats, default=None, help="evaluate the approximation at these u")
    p.add_argument("--route", choices=("theorem", "corollary"), default="theorem")
    p.add_argument("--method", choices=("auto", "quadrature", "mc", "both"), default="auto")

    p = add("mc-estimate", cmd_mc_estimate, "Monte Carlo estimate of P(X > u b)")
    p.add_argument("model")
    p.add_argument("--b", type=_floats, required=True)
    p.add_argument("--u", type=_floats, required=True)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--estimator", choices=("crude", "tilt"), default="crude")
    p.add_argument("--delta", type=float, default=0.2)

    p = add("mda-check", cmd_mda_check, "Gumbel domain-of-attraction certificate for a radial law")
    p.add_argument("--law", default=None, help='inline JSON, e.g. {"kind": "chi", "dof": 3}')
    p.add_argument("--law-file", default=None)

    p = add("example1", cmd_example1, "equicorrelated model: structure checks and MC comparison")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--u-grid", type=_floats, default=[2.0, 3.0, 4.0])
    p.add_argument("--n", type=int, default=200_000)

    p = add("example2", cmd_example2, "bivariate model in its three cases")
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--u-grid", type=_floats, default=[2.0, 3.0, 4.0])
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--conditional", action="store_true", help="add the conditional-limit check (rho = a)")
    p.add_argument("--u-conditional", type=float, default=None, help="default: P(X1 > u) = 1e-3")
    p.add_argument("--x-grid", type=_floats, default=[-1.0, 0.0, 1.0])
    p.add_argument("--n-conditional", type=int, default=2_000_000)
    p.add_argument("--independence", action="store_true", help="add the asymptotic-independence check (rho < a)")
    p.add_argument("--n-pilot", type=int, default=10**7)

    p = add("densities", cmd_densities, "pointwise density evaluation")
    p.add_argument("model")
    p.add_argument("--kind", choices=("sd", "joint", "kotz", "subvector-radial", "subvector-joint"), required=True)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--index-set", type=lambda s: [int(v) for v in _floats(s)], default=None)
    p.add_argument("--A-sub", dest="A_sub", type=_floats, default=None, help="row-major entries")
    p.add_argument("--N", type=float, default=0.0)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--s", type=float, default=1.0)
    return parser


def _render(result, fmt):
    payload, csv_text = result
    if isinstance(payload, experiments.ExperimentReport):
        return experiments.report_emit(payload, fmt)
    if fmt == "csv":
        if csv_text is None:
            raise ArgumentError("csv output is not available for this command")
        return csv_text
    return json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = _render(args.func(args), args.format)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except GsdError as exc:
        print(f"gsdtail: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"gsdtail: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
