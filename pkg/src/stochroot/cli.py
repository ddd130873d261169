"""Command-line interface.

Subcommands ``root``, ``gen``, ``bench``, ``bounds``, ``creditrisk`` and
``solvers``. Result records are JSON lines on stdout (and in ``--out``
files); every run also writes a manifest echo that can be replayed with
``--manifest``.

Exit codes: 0 success, 2 optimizer or inner solver did not converge,
3 invalid input.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .core import read_matrix, stationary_distribution, write_matrix
from .diagnostics import bounds_report, compare_solvers, graph_chain
from .exceptions import NotConvergedError, ReducibleChainError, ShapeError, StochRootError, ValidationError
from .linsolve import FORMULATIONS, METHODS, SolverOptions
from .manifolds import FixedStationaryManifold
from .matrixgen import CLASSES, TABLE_CLASSES, GeneratorSpec, generate
from .optimize import OPTIMIZERS, OptimOptions
from .roots import MANIFOLDS, compute_root, credit_risk_root

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INVALID = 3

RECORD_FIELDS = (
    "class",
    "n",
    "p",
    "manifold",
    "optimizer",
    "residual_fro",
    "stationary_err_inf",
    "iters",
    "wall_ms",
    "solver_method",
    "solver_avg_iters",
)


class InvalidInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the invalid-input code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _bool(text):
    t = str(text).lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_source(ap, graph=False):
    ap.add_argument("--input", help="matrix file ('n m' header, then rows)")
    ap.add_argument("--class", dest="cls", choices=CLASSES, help="generator class instead of --input")
    ap.add_argument("--n", type=int, default=10, help="size for generated matrices")
    if graph:
        ap.add_argument("--graph", help="adjacency matrix file; uses the walk on its largest SCC")


def _add_seed(ap):
    ap.add_argument("--seed", type=int, default=0)


def _add_optim(ap):
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--manifold", choices=MANIFOLDS, default="fixed_stationary")
    ap.add_argument("--optimizer", choices=tuple(OPTIMIZERS), default="tr")
    ap.add_argument("--tolgradnorm", type=float, default=1e-7)
    ap.add_argument("--maxiter", type=int, default=500, help="outer iterations")
    _add_solver(ap)


def _add_solver(ap):
    ap.add_argument("--formulation", choices=FORMULATIONS, default="schur")
    ap.add_argument("--method", choices=METHODS, default="cg")
    ap.add_argument("--correction", type=_bool, default=False, help="rank-one shift of the singular system")


def build_parser():
    ap = _Parser(prog="stochroot", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--manifest", help="replay the arguments stored in a manifest file")
    sub = ap.add_subparsers(dest="command")

    r = sub.add_parser("root", help="approximate a stochastic p-th root")
    _add_source(r)
    _add_seed(r)
    _add_optim(r)
    r.add_argument("--out", help="file for the root matrix; the record goes to OUT.jsonl")

    g = sub.add_parser("gen", help="generate a test matrix")
    g.add_argument("--class", dest="cls", choices=CLASSES, required=True)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--p", type=int, default=2)
    _add_seed(g)
    g.add_argument("--out", help="output file (stdout if omitted)")

    b = sub.add_parser("bench", help="both manifolds on seeded instances of several classes")
    b.add_argument("--classes", default=",".join(TABLE_CLASSES), help="comma-separated class list")
    b.add_argument("--n", type=int, default=20)
    b.add_argument("--samples", type=int, default=1, help="instances per class")
    _add_seed(b)
    _add_optim(b)
    b.add_argument("--out", help="JSON-lines output file")

    d = sub.add_parser("bounds", help="check spectral bounds of the projection system")
    _add_source(d, graph=True)
    d.add_argument("--p", type=int, default=2)
    _add_seed(d)
    d.add_argument("--samples", type=int, default=50)
    d.add_argument("--out", help="JSON-lines output file")

    c = sub.add_parser("creditrisk", help="root of the credit-rating matrix on a perturbed manifold")
    c.add_argument("--gamma", type=float, default=1e-4)
    c.add_argument("--p", type=int, default=2)
    c.add_argument("--optimizer", choices=tuple(OPTIMIZERS), default="tr")
    c.add_argument("--tolgradnorm", type=float, default=1e-7)
    c.add_argument("--maxiter", type=int, default=500)
    _add_solver(c)
    c.add_argument("--out", help="file for the root matrix; the record goes to OUT.jsonl")

    s = sub.add_parser("solvers", help="iteration counts of the projection solvers")
    _add_source(s, graph=True)
    s.add_argument("--p", type=int, default=2)
    _add_seed(s)
    s.add_argument("--samples", type=int, default=5, help="random right-hand sides")
    s.add_argument("--out", help="JSON-lines output file")
    return ap


# ------------------------------------------------------------------ helpers


def _load_source(args):
    """Matrix and a label from --graph, --input or --class."""
    if getattr(args, "graph", None):
        A, _ = graph_chain(read_matrix(args.graph))
        return A, "graph"
    if args.input:
        return read_matrix(args.input), "input"
    if args.cls:
        spec = GeneratorSpec(args.cls, args.n, args.p, args.seed)
        return generate(spec), args.cls
    raise InvalidInput("one of --input or --class is required")


def _options(args):
    return OptimOptions(tolgradnorm=args.tolgradnorm, max_outer=args.maxiter)


def _solver_options(args):
    return SolverOptions(formulation=args.formulation, method=args.method, correction=args.correction)


def _record(label, res, wall, solver_defaults):
    opt = res.optim
    summary = opt.solver_stats if opt is not None else None
    uses_solver = res.manifold == "fixed_stationary" and summary is not None and summary.solves
    rec = {
        "class": label,
        "n": int(res.X.shape[0]),
        "p": res.p,
        "manifold": res.manifold,
        "optimizer": res.optimizer,
        "residual_fro": res.residual_fro,
        "stationary_err_inf": res.stationary_err_inf,
        "iters": res.iterations,
        "wall_ms": 1e3 * wall,
        "solver_method": f"{solver_defaults.formulation}/{solver_defaults.method}" if uses_solver else None,
        "solver_avg_iters": summary.avg_iterations if uses_solver else None,
        "stop_reason": opt.stop_reason if opt is not None else "p_equals_one",
        "gradnorm": opt.gradnorm if opt is not None else 0.0,
        "solver_fallbacks": summary.fallbacks if uses_solver else 0,
        "solver_refinements": summary.refinements if uses_solver else 0,
    }
    return rec


def _emit(records, out):
    lines = [json.dumps(r, sort_keys=False) for r in records]
    for line in lines:
        print(line)
    if out:
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))


def _write_manifest(args, out):
    manifest = {k: v for k, v in vars(args).items() if k != "manifest"}
    manifest["version"] = __version__
    text = json.dumps(manifest, indent=2, sort_keys=True)
    if out:
        with open(f"{out}.manifest.json", "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)


def _converged(res):
    return res.optim is None or res.optim.stop_reason == "gradtol"


# ----------------------------------------------------------------- commands


def cmd_root(args):
    if args.p < 1:
        raise InvalidInput("--p must be positive")
    A, label = _load_source(args)
    t0 = time.perf_counter()
    res = compute_root(
        A,
        args.p,
        manifold=args.manifold,
        optimizer=args.optimizer,
        options=_options(args),
        solver_options=_solver_options(args),
        seed=args.seed,
    )
    wall = time.perf_counter() - t0
    rec = _record(label, res, wall, _solver_options(args))
    if args.out:
        write_matrix(args.out, res.X)
    _emit([rec], f"{args.out}.jsonl" if args.out else None)
    return EXIT_OK if _converged(res) else EXIT_NOT_CONVERGED


def cmd_gen(args):
    A = generate(GeneratorSpec(args.cls, args.n, args.p, args.seed))
    if args.out:
        write_matrix(args.out, A)
    else:
        n, m = A.shape
        print(f"{n} {m}")
        for row in A:
            print(" ".join(f"{v:.17g}" for v in row))
    return EXIT_OK


def cmd_bench(args):
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    for c in classes:
        if c not in CLASSES:
            raise InvalidInput(f"unknown class {c!r}")
    records = []
    for cls in classes:
        for k in range(args.samples):
            seed = args.seed + k
            try:
                A = generate(GeneratorSpec(cls, args.n, args.p, seed))
            except StochRootError as exc:
                records.append({"class": cls, "seed": seed, "error": f"{type(exc).__name__}: {exc}"})
                continue
            for manifold in MANIFOLDS:
                t0 = time.perf_counter()
                try:
                    res = compute_root(
                        A,
                        args.p,
                        manifold=manifold,
                        optimizer=args.optimizer,
                        options=_options(args),
                        solver_options=_solver_options(args),
                        seed=seed,
                    )
                except (StochRootError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
                    records.append(
                        {"class": cls, "n": int(A.shape[0]), "p": args.p, "manifold": manifold, "seed": seed,
                         "error": f"{type(exc).__name__}: {exc}"}
                    )
                    continue
                rec = _record(cls, res, time.perf_counter() - t0, _solver_options(args))
                rec["seed"] = seed
                records.append(rec)
    _emit(records, args.out)
    return EXIT_OK


def cmd_bounds(args):
    A, label = _load_source(args)
    pi = stationary_distribution(A)
    rows = bounds_report(pi, samples=args.samples, seed=args.seed)
    for r in rows:
        r["class"] = label
        r["n"] = int(A.shape[0])
    _emit(rows, args.out)
    return EXIT_OK


def cmd_creditrisk(args):
    t0 = time.perf_counter()
    pi_t, res = credit_risk_root(
        gamma=args.gamma,
        p=args.p,
        optimizer=args.optimizer,
        options=_options(args),
        solver_options=_solver_options(args),
    )
    wall = time.perf_counter() - t0
    rec = _record("credit_risk", res, wall, _solver_options(args))
    M = FixedStationaryManifold(pi_t)
    rec["gamma"] = args.gamma
    rec["pi_tilde"] = [float(v) for v in pi_t]
    rec["row_sum_err_inf"] = float(np.max(np.abs(res.X.sum(axis=1) - 1.0)))
    rec["pi_row_err_inf"] = float(np.max(np.abs(pi_t @ res.X - pi_t)))
    rec["constraint_residual"] = M.constraint_residual(res.X)
    rec["root"] = res.X.tolist()
    if args.out:
        write_matrix(args.out, res.X)
    _emit([rec], f"{args.out}.jsonl" if args.out else None)
    return EXIT_OK if _converged(res) else EXIT_NOT_CONVERGED


def cmd_solvers(args):
    A, label = _load_source(args)
    pi = stationary_distribution(A)
    S = FixedStationaryManifold(pi).rand_point(args.seed)
    rows = compare_solvers(S, pi, rhs_count=args.samples, seed=args.seed)
    for r in rows:
        r["class"] = label
        r["n"] = int(A.shape[0])
    _emit(rows, args.out)
    return EXIT_OK


COMMANDS = {
    "root": cmd_root,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "bounds": cmd_bounds,
    "creditrisk": cmd_creditrisk,
    "solvers": cmd_solvers,
}


def _apply_manifest(args):
    with open(args.manifest) as fh:
        stored = json.load(fh)
    stored.pop("version", None)
    command = stored.get("command")
    if command not in COMMANDS:
        raise InvalidInput("manifest does not name a known command")
    stored["manifest"] = None
    return argparse.Namespace(**stored)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.manifest:
            args = _apply_manifest(args)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_INVALID
        _write_manifest(args, getattr(args, "out", None))
        return COMMANDS[args.command](args)
    except ReducibleChainError as exc:
        print(
            f"error: {exc}. The chain is reducible, so no positive stationary vector exists; "
            "perturb it first (see the 'creditrisk' command) or use --manifold multinomial.",
            file=sys.stderr,
        )
        return EXIT_INVALID
    except NotConvergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (InvalidInput, ValidationError, ShapeError, StochRootError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
