"""Command-line entry point: ``tsallis-causal <command> [options]``.

Exit codes: 0 success, 1 violation or failed check, 2 cap breach, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_VIOLATION, EXIT_CAP, EXIT_INPUT = 0, 1, 2, 3
WORKERS_ENV = "TSALLIS_CAUSAL_WORKERS"


class InputError(Exception):
    """Bad user input; reported with exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- output helpers --------------------------------------------------------------


def _clean(obj):
    """JSON-ready copy with floats at 12 significant digits and exact numbers as strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (Fraction, Decimal)):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return str(obj)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, data) -> None:
    _emit(args, json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n")


def _split(value: str | None) -> list:
    if not value:
        return []
    return [v.strip() for v in value.split(",") if v.strip()]


def _load_dag(spec: str):
    from .causal import BUILTIN_DAGS, Dag, builtin_dag

    if spec in BUILTIN_DAGS:
        return builtin_dag(spec)
    path = Path(spec)
    if not path.exists():
        raise InputError(f"--dag: {spec!r} is neither a builtin ({', '.join(BUILTIN_DAGS)}) nor a file")
    return Dag.from_json(path.read_text())


def _dims_map(dag, args) -> dict:
    dims = {}
    for name in dag.names:
        observed = dag.node(name).observed
        d = args.do if observed else args.du
        if d is None:
            d = args.dims
        if d is None:
            d = dag.cardinality(name)
        if d is None:
            raise InputError(f"no dimension for node {name}; pass --dims, --do or --du")
        dims[name] = int(d)
    return dims


def _q(value: str):
    """Integers stay exact (rational bounds); anything else is a float."""
    try:
        q = Fraction(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad q {value!r}") from None
    return int(q) if q.denominator == 1 else float(q)


def _format_inequality(ineq, universe) -> str:
    from .tsallis import mask_names

    terms = []
    for m, c in ineq.coefficients:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag}"
        terms.append(f"{sign}{coef}H({''.join(mask_names(m, universe))})")
    line = " ".join(terms) + f" {ineq.relation} {ineq.bound}"
    return line + f"  # {ineq.tag}" + (f" {ineq.label}" if ineq.label else "")


# -- commands --------------------------------------------------------------------


def cmd_dseparate(args) -> int:
    from .causal import is_d_separated

    dag = _load_dag(args.dag)
    X, Y, Z = _split(args.x), _split(args.y), _split(args.z)
    if not X or not Y:
        raise InputError("--x and --y need at least one node")
    unknown = [n for n in X + Y + Z if n not in dag.names]
    if unknown:
        raise InputError(f"unknown node(s) {unknown}; the DAG has {list(dag.names)}")
    if set(X) & set(Y) or set(X) & set(Z) or set(Y) & set(Z):
        raise InputError("--x, --y and --z must be disjoint")
    result = is_d_separated(dag, X, Y, Z)
    if args.format == "json":
        _emit_json(args, {"x": X, "y": Y, "z": Z, "d_separated": result})
    else:
        _emit(args, ("true" if result else "false") + "\n")
    return EXIT_OK


def _build_system(args, dag):
    from .cones import shannon_causal, shannon_elemental, tsallis_causal

    base = shannon_elemental(dag.names)
    if getattr(args, "shannon", False) or args.q is None:
        return base + shannon_causal(dag)
    if float(args.q) < 1:
        raise InputError("constraint generation needs q >= 1")
    return base + tsallis_causal(dag, args.q, _dims_map(dag, args))


def cmd_constraints(args) -> int:
    dag = _load_dag(args.dag)
    system = _build_system(args, dag)
    if args.format == "json":
        _emit_json(args, system.to_dict())
    else:
        _emit(args, "".join(_format_inequality(i, system.universe) + "\n" for i in system))
    return EXIT_OK


def _load_system(path: str):
    from .cones import InequalitySystem

    try:
        return InequalitySystem.from_json(Path(path).read_text())
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read inequality system {path!r}: {exc}") from None


def cmd_project(args) -> int:
    from .cones import InequalitySystem, LinearInequality
    from .polytope import io as pio
    from .polytope.fm import project

    if args.system:
        system = _load_system(args.system)
    else:
        if not args.dag:
            raise InputError("project needs --dag or --system")
        system = _build_system(args, _load_dag(args.dag))
    universe = list(system.universe)
    keep = _split(args.keep)
    if not keep:
        raise InputError("--keep lists the variables to project onto")
    unknown = [k for k in keep if k not in universe]
    if unknown:
        raise InputError(f"unknown variable(s) {unknown}")
    keep_bits = sum(1 << universe.index(k) for k in keep)
    try:
        rs = system.to_rational_system()
    except ValueError as exc:
        raise InputError(f"{exc} (projection needs integer q)") from None
    eliminate = [m - 1 for m in range(1, 1 << len(universe)) if m & ~keep_bits]
    report = project(rs, eliminate, max_rows=args.max_rows, time_budget=args.time_budget,
                     redundancy=not args.no_redundancy)
    meta = report.to_dict()
    for step in meta["steps"]:
        step.pop("seconds", None)  # keep output byte-identical between runs
    if not report.completed:
        _emit_json(args, {"report": meta, "partial_system": pio.to_dict(report.system)})
        return EXIT_CAP
    # coordinates left are the subsets of the kept variables, in mask order
    kept_order = sorted(keep, key=universe.index)
    masks = [m for m in range(1, 1 << len(universe)) if not m & ~keep_bits]

    def to_keep(m):
        return sum(1 << kept_order.index(universe[b]) for b in range(len(universe)) if m >> b & 1)

    ineqs = []
    for row in report.system.rows:
        terms = {to_keep(masks[j]): c for j, c in enumerate(row.coeffs) if c}
        if terms:
            ineqs.append(LinearInequality.from_terms(terms, row.const, row.relation, "derived"))
    projected = InequalitySystem(tuple(kept_order), tuple(ineqs))
    if args.format == "text":
        _emit(args, "".join(_format_inequality(i, projected.universe) + "\n" for i in projected))
    else:
        _emit_json(args, {"report": meta, "system": projected.to_dict()})
    return EXIT_OK


def _load_distribution(args):
    from .probability import JointDistribution
    from .scenarios import scenario_distribution

    if args.dist:
        try:
            return JointDistribution.from_json(Path(args.dist).read_text())
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read distribution {args.dist!r}: {exc}") from None
    if args.scenario:
        try:
            return scenario_distribution(args.scenario)
        except (KeyError, ValueError) as exc:
            raise InputError(str(exc)) from None
    raise InputError("evaluate needs --dist or --scenario")


def cmd_evaluate(args) -> int:
    from .cones import evaluate
    from .scenarios import NO_VIOLATION_TOL, violation_scan
    from .tsallis import entropy_vector

    dist = _load_distribution(args)
    if args.system:
        if args.q is None:
            raise InputError("--q is required with --system")
        system = _load_system(args.system)
        missing = [n for n in system.universe if n not in dist.names]
        if missing:
            raise InputError(f"distribution lacks variable(s) {missing}")
        vec = entropy_vector(dist, args.q, system.universe)
        rep = evaluate(system, vec.values)
        _emit_json(args, {"q": args.q, **rep.to_dict()})
        return EXIT_OK if rep.ok else EXIT_VIOLATION
    d_o = args.do if args.do is not None else (args.dims or min(dist.shape))
    d_u = args.du if args.du is not None else 2
    grid = None if args.q is None else [float(args.q)]
    out, violated = [], False
    for i in (1, 2, 3):
        rep = violation_scan(dist, i, grid, d_o, d_u, refine=args.q is None)
        data = rep.to_dict()
        if args.q is not None:
            data.pop("q_grid")
            data["margins"] = {k: v[0] for k, v in data["margins"].items()}
        data["min_margin"] = rep.min_margin()
        violated |= rep.min_margin() < -NO_VIOLATION_TOL
        out.append(data)
    _emit_json(args, {"d_o": d_o, "d_u": d_u, "violation": violated, "inequalities": out})
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_table1(args) -> int:
    from .scenarios import TABLE1_SCENARIOS, table1_csv, table1_rows

    scenarios = _split(args.scenarios) or list(TABLE1_SCENARIOS)
    rows = table1_rows(scenarios, policy=args.policy, workers=args.workers)
    if args.format == "json":
        _emit_json(args, rows)
    else:
        _emit(args, table1_csv(rows))
    return EXIT_OK


def cmd_qsearch(args) -> int:
    from .scenarios import UniformQ, random_violation_search

    if args.samples < 1:
        raise InputError("--samples must be positive")
    rep = random_violation_search(args.edge_dim, args.outcomes, UniformQ(args.q_min, args.q_max), args.samples,
                                  args.seed, q_per_sample=args.q_per_sample, d_u=args.du or 2,
                                  classical=args.classical, workers=args.workers)
    _emit_json(args, rep.to_dict())
    return EXIT_VIOLATION if rep.found else EXIT_OK


def cmd_verify_appendix(args) -> int:
    from .quantum.suite import appendix_suite

    results = appendix_suite(args.seed, args.samples)
    ok = all(r.passed for r in results)
    if args.format == "text":
        _emit(args, "".join(f"{'PASS' if r.passed else 'FAIL'} {r.name}\n" for r in results))
    else:
        _emit_json(args, {"passed": ok, "checks": [r.to_dict() for r in results]})
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------------


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tsallis-causal", description="Tsallis entropy-vector tools for causal structures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=("json",), default_fmt="json"):
        sp.add_argument("--out", help="write output to this file instead of stdout")
        sp.add_argument("--format", choices=fmt, default=default_fmt)
        sp.add_argument("--workers", type=int, default=_default_workers(),
                        help=f"worker processes (default from ${WORKERS_ENV}, else 1)")

    def dims(sp):
        sp.add_argument("--q", type=_q, help="Tsallis order (integers give exact bounds)")
        sp.add_argument("--dims", type=int, help="dimension for every node")
        sp.add_argument("--do", type=int, help="dimension of observed nodes")
        sp.add_argument("--du", type=int, help="dimension of unobserved nodes")

    sp = sub.add_parser("dseparate", help="test a d-separation statement")
    sp.add_argument("--dag", required=True, help="builtin name or DAG JSON file")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--z", default="")
    common(sp, ("text", "json"), "text")
    sp.set_defaults(func=cmd_dseparate)

    sp = sub.add_parser("constraints", help="elemental plus causal constraints of a DAG")
    sp.add_argument("--dag", required=True)
    sp.add_argument("--shannon", action="store_true", help="Shannon causal equalities instead of Tsallis bounds")
    dims(sp)
    common(sp, ("text", "json"), "text")
    sp.set_defaults(func=cmd_constraints)

    sp = sub.add_parser("project", help="Fourier-Motzkin projection onto observed variables")
    sp.add_argument("--dag")
    sp.add_argument("--system", help="inequality system JSON (from 'constraints --format json')")
    sp.add_argument("--shannon", action="store_true")
    sp.add_argument("--keep", required=True, help="comma-separated variables to keep")
    sp.add_argument("--max-rows", type=int)
    sp.add_argument("--time-budget", type=float, help="seconds")
    sp.add_argument("--no-redundancy", action="store_true", help="skip LP redundancy removal between steps")
    dims(sp)
    common(sp, ("json", "text"))
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("evaluate", help="margins of a distribution against inequalities")
    sp.add_argument("--dist", help="JointDistribution JSON file")
    sp.add_argument("--scenario", help="fritz, magic, N=<n>, chained-<n> or shared-<D>")
    sp.add_argument("--system", help="inequality system JSON; default is the triangle bounds")
    dims(sp)
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("table1", help="d^i values for the chained-Bell and magic-square scenarios")
    sp.add_argument("--policy", choices=("best", "worst"), default="best")
    sp.add_argument("--scenarios", help="comma-separated subset, e.g. 'N=2,Magic Sq.'")
    common(sp, ("csv", "json"), "csv")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("qsearch", help="random quantum triangle strategies against the bounds")
    sp.add_argument("--edge-dim", type=int, default=2)
    sp.add_argument("--outcomes", type=int, default=4)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--du", type=int, default=2)
    sp.add_argument("--q-min", type=float, default=1.0)
    sp.add_argument("--q-max", type=float, default=100.0)
    sp.add_argument("--q-per-sample", type=int, default=4)
    sp.add_argument("--classical", action="store_true", help="diagonal states and POVMs")
    common(sp)
    sp.set_defaults(func=cmd_qsearch)

    sp = sub.add_parser("verify-appendix", help="numerical checks of the channel lemmas and conjectures")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, help="override per-check sample counts")
    common(sp, ("json", "text"))
    sp.set_defaults(func=cmd_verify_appendix)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, KeyError, ValueError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tsallis-causal: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
