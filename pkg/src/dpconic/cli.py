"""Command-line harness: solve / sensitivity / privatize / experiment.

Exit codes: 0 success, 2 validation error (bad inputs or config), 3 solver
failure (infeasible, unbounded, or non-convergent program).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .conic import Status, program_from_json, program_to_json, validate
from .dp import (
    NoiseSpec,
    estimate_sensitivity,
    sensitivity_sample_size,
)
from .experiments import ExperimentConfig, run_experiment
from .ldr import IdentityQuery, SumQuery, VertexChance, IndividualChance, privatize
from .solver import SolverSettings, solve
from .apps import ellipsoid as app_ellipsoid
from .apps import opf as app_opf
from .apps import regression as app_regression
from .apps import simple_lp as app_simple
from .apps import svm as app_svm

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3


def _solution_doc(sol):
    return {
        "status": sol.status.value,
        "objective": None if math.isnan(sol.objective) else sol.objective,
        "x": [float(v) for v in np.atleast_1d(sol.x)],
        "y": [float(v) for v in np.atleast_1d(sol.y)],
        "residuals": {
            "primal": sol.residuals.primal,
            "dual": sol.residuals.dual,
            "gap": None if math.isnan(sol.residuals.gap) else sol.residuals.gap,
        },
        "iterations": sol.iterations,
    }


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)


def _cmd_solve(args) -> int:
    try:
        with open(args.infile, encoding="utf-8") as fh:
            program = program_from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read program: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    errs = validate(program)
    if errs:
        print("error: invalid program: " + "; ".join(errs), file=sys.stderr)
        return EXIT_VALIDATION
    settings = SolverSettings(tol=args.tol, max_iter=args.max_iter)
    sol = solve(program, settings)
    _write(json.dumps(_solution_doc(sol), indent=1), args.out)
    if sol.status not in (Status.OPTIMAL,):
        return EXIT_SOLVER
    return EXIT_OK


def _adjacency_for(app: str, alpha: float, dataset: str | None):
    if app == "simple-lp":
        study = app_simple.SimpleLpStudy()
        return app_simple.lower_bound_adjacency(study, alpha), 1
    if app == "opf":
        net = app_opf.load_network(dataset or "triangle3")
        return app_opf.demand_adjacency(net, alpha), 1
    if app == "svm":
        train, _, _ = app_svm.synthetic_gaussian_classes(m=100, seed=0)
        return app_svm.circle_law_adjacency(train), 1
    if app == "regression":
        model = app_regression.synthetic_cubic_data(n=100, seed=0)
        return app_regression.circle_law_adjacency(model), 2
    if app == "ellipsoid":
        inst = app_ellipsoid.regular_polygon(5, radius=2.0)
        return app_ellipsoid.b_range_adjacency(inst, 0.01), 2
    raise ValueError(f"unknown app {app!r}")


def _cmd_sensitivity(args) -> int:
    try:
        adjacency, default_p = _adjacency_for(args.app, args.alpha, args.dataset)
        p = args.p or default_p
        samples = args.samples or sensitivity_sample_size(args.gamma, args.beta)
        report = estimate_sensitivity(adjacency, p, samples, args.gamma,
                                      args.beta, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(report.to_json(), args.out)
    return EXIT_OK


def _cmd_privatize(args) -> int:
    try:
        with open(args.infile, encoding="utf-8") as fh:
            program = program_from_json(fh.read())
        errs = validate(program)
        if errs:
            raise ValueError("; ".join(errs))
        query = IdentityQuery() if args.query == "identity" else SumQuery()
        k = query.noise_dim(program.n)
        noise = NoiseSpec(args.family, k, args.scale)
        if args.method == "vertex":
            chance = VertexChance(eta=args.eta, beta=args.beta)
        else:
            chance = IndividualChance(eta=args.eta)
        pp = privatize(program, noise, query, chance, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _write(program_to_json(pp.program), args.out)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = ExperimentConfig.from_json(
                fh.read(),
                seed=args.seed,
                output_dir=args.out,
                mc_samples=args.mc_samples,
            )
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = run_experiment(config)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"wrote {result['csv']} and {result['manifest']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpconic",
        description="Differentially private conic optimization studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a conic program from JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sensitivity", help="Monte Carlo sensitivity estimate")
    p.add_argument("--app", required=True, choices=("simple-lp", "opf", "svm",
                                                    "regression", "ellipsoid"))
    p.add_argument("--alpha", type=float, required=True,
                   help="adjacency radius; inf for whole-universe adjacency")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p", type=int, choices=(1, 2), default=None)
    p.add_argument("--samples", type=int, default=None,
                   help="override the sample-size rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("privatize", help="emit the transformed program JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--query", choices=("identity", "sum"), default="sum")
    p.add_argument("--family", choices=("laplace", "gaussian"), default="laplace")
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--method", choices=("vertex", "individual"), default="vertex")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_privatize)

    p = sub.add_parser("experiment", help="run a full study from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mc-samples", type=int, default=None)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
