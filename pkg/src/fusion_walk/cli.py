"""Command-line front end: ``fusion-walk {decompose,graph,chain,simulate,verify}``.

Every command accepts ``--format json`` for machine-readable output. Bad
arguments exit with status 2; ``verify`` exits with 1 when a check fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import chain_analysis as ca
from . import multiplicity_graph as mg
from . import simulator as sim
from .tensor_core import (
    check_prime,
    clebsch_gordan,
    composition_factors_of_tensor,
    format_factors,
)
from .verify import SUITES, run_suites

DEFAULT_MAX_P = 997
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def max_p() -> int:
    raw = os.environ.get("FUSION_WALK_MAX_P")
    if raw is None:
        return DEFAULT_MAX_P
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FUSION_WALK_MAX_P must be an integer, got {raw!r}") from None


def _prime(p: int, *, odd: bool = False) -> int:
    bound = max_p()
    if p > bound:
        raise UsageError(f"p = {p} exceeds the safety bound {bound} (set FUSION_WALK_MAX_P to raise it)")
    return check_prime(p, odd=odd)


def _weights(p: int, spec: str) -> ca.WeightFunction:
    if spec == "uniform":
        return ca.WeightFunction.uniform(p)
    if spec == "dimension":
        return ca.WeightFunction.dimension(p)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"--weights must be 'uniform', 'dimension' or a weights file; {spec!r} not found")
    return ca.WeightFunction.parse(p, path.read_text(encoding="utf-8"), name=f"file:{path.name}")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8", newline="\n")


def cmd_decompose(args: argparse.Namespace) -> int:
    p = _prime(args.p)
    d = clebsch_gordan(p, args.a, args.b)
    routes = None
    if args.factors:
        _prime(p, odd=True)
        routes = {r: composition_factors_of_tensor(p, args.a, args.b, r) for r in ("filtration", "cg")}
    if args.format == "json":
        payload = {
            "p": p,
            "a": args.a,
            "b": args.b,
            "summands": [str(s) for s in d.summands],
            "rendered": d.render(),
            "dimension": d.dimension,
        }
        if routes:
            payload["factors"] = {r: sorted(str(x) for x in f.elements()) for r, f in routes.items()}
            payload["factors_agree"] = routes["filtration"] == routes["cg"]
        _emit(payload)
    else:
        print(d.render() if args.bare else str(d))
        if routes:
            print(f"factors (filtration): {format_factors(routes['filtration'])}")
            print(f"factors (cg):         {format_factors(routes['cg'])}")
            print("AGREE" if routes["filtration"] == routes["cg"] else "DISAGREE")
    if routes and routes["filtration"] != routes["cg"]:
        return 1
    return 0


def cmd_graph(args: argparse.Namespace) -> int:
    p = _prime(args.p, odd=True)
    g = mg.build_adjacency(p, args.n)
    matrix = mg.build_reduced(p, args.n) if args.reduced else g.matrix
    if args.format == "json":
        payload = {
            "p": p,
            "n": args.n,
            "reduced": args.reduced,
            "matrix": matrix.tolist(),
        }
        if not args.reduced:
            payload["edges"] = [list(e) for e in g.edges()]
        _write(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    elif args.out == "csv":
        _write(mg.matrix_to_csv(matrix), args.output)
    else:
        if args.reduced:
            raise UsageError("--reduced is only available with --out csv or --format json")
        _write(mg.to_dot(g, dimensions=args.dimensions), args.output)
    return 0


def cmd_chain(args: argparse.Namespace) -> int:
    p = _prime(args.p, odd=True)
    w = _weights(p, args.weights)
    report = ca.chain_report(p, args.n, w, eps=args.eps or (0.25, 0.01))
    if args.format == "json":
        _emit(report.to_dict())
        return 0
    print(f"p={p} n={args.n} weights={w.name}")
    print(f"classification: {report.classification.value}")
    print(f"components: {[list(c) for c in report.components]}")
    for d in report.stationary:
        print(f"stationary ({d.component}): " + " ".join(ca.format_fraction(x) for x in d.probs))
    print("spectrum: " + " ".join(f"{x:.12g}" for x in report.spectrum))
    if report.lambda_star is None:
        print("lambda_star: n/a (weights not symmetric under i -> p-i)")
    else:
        print(f"lambda_star: {report.lambda_star:.12g}")
        for eps, bound in report.mixing_bound_at.items():
            print(f"t_mix({eps:g}) <= {bound:.12g}")
    return 0


def _initial(p: int, start: str):
    if start == "uniform":
        return sim.uniform_initial(p)
    if start in ("uniform-odd", "uniform-even"):
        return sim.uniform_initial(p, range(1 if start == "uniform-odd" else 2, p, 2))
    try:
        state = int(start)
    except ValueError:
        raise UsageError(f"--start must be a state, 'uniform', 'uniform-odd' or 'uniform-even'; got {start!r}") from None
    return sim.point_mass(p, state)


def cmd_simulate(args: argparse.Namespace) -> int:
    p = _prime(args.p, odd=True)
    config = sim.SimulationConfig(
        p=p,
        n=args.n,
        weights=_weights(p, args.weights),
        initial=_initial(p, args.start),
        steps=args.steps,
        trajectories=args.trajectories,
        seed=args.seed,
        lazy=args.lazy,
    )
    result = sim.run(config, occupancy=args.occupancy, record_trace=args.trace is not None)
    if args.trace is not None:
        args.trace.write_text(sim.trace_to_csv(result), encoding="utf-8", newline="\n")
    if args.format == "json":
        _emit(result.to_dict())
    else:
        print(f"p={p} n={args.n} weights={config.weights.name} lazy={config.lazy} seed={config.seed}")
        print(f"steps={config.steps} trajectories={config.trajectories}")
        print("counts:    " + " ".join(str(c) for c in result.counts))
        print("empirical: " + " ".join(f"{x:.6f}" for x in result.empirical))
        print("target:    " + " ".join(ca.format_fraction(x) for x in result.target))
        print(f"tv_to_target: {result.tv_to_target:.6g}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.max_p > max_p():
        raise UsageError(f"--max-p {args.max_p} exceeds the safety bound {max_p()}")
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(args.max_p, suites)
    ok = all(r.passed for r in results)
    if args.format == "json":
        _emit(
            {
                "max_p": args.max_p,
                "passed": ok,
                "checks": [
                    {
                        "suite": r.suite,
                        "name": r.name,
                        "primes": r.primes,
                        "passed": r.passed,
                        "failures": r.failures[:20],
                    }
                    for r in results
                ],
            }
        )
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            status = "PASS" if r.passed else f"FAIL ({len(r.failures)})"
            primes = f"p in {r.primes[0]}..{r.primes[-1]}" if r.primes else "no primes"
            print(f"{r.suite:<6} {r.name:<{width}}  {primes:<14} {status}")
            for failure in r.failures[:5]:
                print(f"         {failure}")
        print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusion-walk",
        description="Tensor products of simple SL2(F_p)-modules and the non-projective summand walk.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p: argparse.ArgumentParser, default: str) -> None:
        p.add_argument("--format", choices=("json", "text"), default=default)

    d = sub.add_parser("decompose", help="decompose V_a (x) V_b")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--a", type=int, required=True)
    d.add_argument("--b", type=int, required=True)
    d.add_argument("--factors", action="store_true", help="compare both composition-factor routes")
    d.add_argument("--bare", action="store_true", help="print only the summands")
    fmt(d, "text")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("graph", help="export the multiplicity graph")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", choices=("dot", "csv"), default="dot")
    g.add_argument("--reduced", action="store_true", help="emit the reduced matrix instead")
    g.add_argument("--dimensions", action="store_true", help="annotate DOT vertices with dimensions")
    g.add_argument("--output", type=Path, help="write to a file instead of stdout")
    fmt(g, "text")
    g.set_defaults(func=cmd_graph)

    c = sub.add_parser("chain", help="analyse the random walk")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--weights", default="uniform", help="uniform, dimension, or a file of 'i num/den' lines")
    c.add_argument("--eps", type=float, action="append", help="mixing-time accuracy (repeatable)")
    fmt(c, "json")
    c.set_defaults(func=cmd_chain)

    s = sub.add_parser("simulate", help="Monte Carlo simulation of the walk")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--weights", default="uniform")
    s.add_argument("--start", default="1", help="start state, or uniform / uniform-odd / uniform-even")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--trajectories", type=int, default=1)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--lazy", action="store_true", help="simulate (I + Q) / 2")
    s.add_argument("--occupancy", action="store_true", help="also count visits over all steps")
    s.add_argument("--trace", type=Path, help="write trajectory,step,state CSV here")
    fmt(s, "json")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--max-p", type=int, required=True)
    v.add_argument("--suite", choices=("cg", "graph", "chain", "all"), default="all")
    fmt(v, "text")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"fusion-walk {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
