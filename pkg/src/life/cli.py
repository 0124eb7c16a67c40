"""``life`` command line: structural reports, extreme pathways, equilibria, simulation, feasibility."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .document import (
    MissingDataError,
    ParseError,
    bundled_text,
    format_exact,
    parse_document,
    parse_state,
)
from .dynamics import SimulationBlowUp, simulate
from .equilibrium import (
    check_equilibrium_necessary,
    classify_asymptotics,
    format_decimal,
    special_equilibrium,
    stationary_distribution,
)
from .network import (
    SOURCE,
    NetworkError,
    excretion_reachable_set,
    reachable_from,
    strongly_connected_components,
    weakly_connected_components,
)
from .pathways import TableauError, extreme_pathways, feasible_flow_exists
from .stoichiometry import (
    DimensionError,
    MetaboliteState,
    deficiency,
    evaluate_stoichiometric,
    predicted_rank,
    row_roles,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_MISSING = 4
EXIT_BLOWUP = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    """File contents; ``bundled:<name>`` reads a network shipped with the package."""
    if path.startswith("bundled:"):
        return bundled_text(path.split(":", 1)[1])
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _set(vs) -> str:
    return "{" + ", ".join(vs) + "}"


def _state(path: str | None, net) -> MetaboliteState:
    if path is None:
        return MetaboliteState((Fraction(1),) * net.n)
    return parse_state(_read(path), net)


# commands


def cmd_analyze(args, out) -> int:
    net = parse_document(_read(args.network)).network
    scc = strongly_connected_components(net)
    weak = weakly_connected_components(net)
    v1 = excretion_reachable_set(net)
    v2 = [v for v in net.vertices if v not in set(v1)]
    print(f"vertices: {net.n}; edges: {net.m}", file=out)
    print(f"intakes: {_set(net.intake_vertices)}; excretions: {_set(net.excretion_vertices)}", file=out)
    print(f"assumption level: {net.assumption_level}", file=out)
    print(f"weak components ({len(weak)}): " + " ".join(_set(c) for c in weak), file=out)
    print(f"strong components ({len(scc.components)}): " + " ".join(_set(c) for c in scc.components), file=out)
    terms = []
    for c, t, x in zip(scc.components, scc.terminal, scc.excreting):
        if t:
            terms.append(f"{_set(c)} ({'excreting' if x else 'no excretion'})")
    print("terminal components: " + ("; ".join(terms) if terms else "none"), file=out)
    print(f"V1 (reaches excretion): {_set(v1)}; V2: {_set(v2)}", file=out)
    rk = predicted_rank(net)
    print(f"rank {rk} (n - k with k = {net.n - rk} closed weak components)", file=out)
    if net.n and net.m:
        exact = evaluate_stoichiometric(net, [1] * net.n).rank()
        print(f"rank of S at the all-ones state: {exact}", file=out)
    print(f"deficiency: {deficiency(net)}", file=out)
    print(check_equilibrium_necessary(net).describe(), file=out)
    return EXIT_OK


def cmd_extreme_pathways(args, out) -> int:
    net = parse_document(_read(args.network)).network
    state = _state(args.at, net)
    if not state.strict:
        zero = [v for v, x in zip(net.vertices, state) if x <= 0]
        raise NetworkError(f"extreme pathways need a strictly positive state; zero at {zero}")
    S = evaluate_stoichiometric(net, state)
    basis = extreme_pathways(S, row_roles(net))
    dim = len(S.nullspace())
    print(f"extreme pathways: {len(basis)} rows; nullspace dimension {dim}", file=out)
    csv = basis.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {args.out}", file=out)
    else:
        out.write(csv)
    return EXIT_OK


def _equilibrium_report(args):
    doc = parse_document(_read(args.network))
    flux = doc.require_flux()
    return doc, flux


def cmd_equilibrium(args, out) -> int:
    doc, flux = _equilibrium_report(args)
    report = special_equilibrium(doc.network, flux)
    out.write(report.render())
    return EXIT_OK


def cmd_classify(args, out) -> int:
    doc, flux = _equilibrium_report(args)
    result = classify_asymptotics(doc.network, flux)
    if result.report is not None:
        out.write(result.report.render())
        return EXIT_OK
    out.write(result.render())
    if result.state is not None:
        print("equilibrium (fixed-point iteration):", file=out)
        for v, x in zip(doc.network.vertices, result.state):
            print(f"  {v} = {format_decimal(x) if x is not None else 'mass-dependent'}", file=out)
    net = doc.network
    if net.is_closed and net.assumption_level != "B":
        scc = strongly_connected_components(net)
        for comp in scc.terminal_components:
            dist = stationary_distribution(net, flux, comp)
            shown = ", ".join(f"{v}={format_decimal(p)}" for v, p in dist.items())
            print(f"stationary distribution on {_set(comp)}: {shown}", file=out)
    return EXIT_OK


def _fed_traps(net):
    scc = strongly_connected_components(net)
    fed = set(reachable_from(net, SOURCE))
    return [
        c for c, t, x in zip(scc.components, scc.terminal, scc.excreting) if t and not x and any(v in fed for v in c)
    ]


def _output_path(base: str, k: int, total: int) -> str:
    if total == 1:
        return base
    root, ext = os.path.splitext(base)
    return f"{root}_{k + 1}{ext or '.csv'}"


def cmd_simulate(args, out) -> int:
    if not args.t_end > 0:
        raise UsageError("--t-end must be positive")
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    doc = parse_document(_read(args.network))
    net = doc.network
    flux = doc.require_flux()
    starts = [_state(p, net) for p in args.x0] if args.x0 else [None]
    if starts == [None]:
        raise MissingDataError("simulate needs an initial state (--x0)")

    def run(x0):
        try:
            return simulate(net, flux, [float(v) for v in x0], args.t_end, args.dt, every=args.every), None
        except SimulationBlowUp as exc:
            return exc.trace, exc

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(run, starts))

    traps = _fed_traps(net)
    code = EXIT_OK
    for k, (trace, blow) in enumerate(results):
        label = f"run {k + 1}: " if len(results) > 1 else ""
        if args.out:
            path = _output_path(args.out, k, len(results))
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(trace.to_csv())
            print(f"{label}wrote {path}", file=out)
        if blow is not None:
            print(f"{label}blow-up: {blow}; partial trace has {len(trace.times)} rows", file=out)
            code = EXIT_BLOWUP
            continue
        final = ", ".join(f"{v}={x:.6f}" for v, x in zip(net.vertices, trace.final))
        print(f"{label}final state at t={trace.times[-1]:g}: {final}", file=out)
        worst = min((viol.value for viol in trace.violations), default=None)
        if worst is None:
            print(f"{label}positivity: no component below -1e-09 (minimum {trace.min_value:.3g})", file=out)
        else:
            print(f"{label}positivity: {len(trace.violations)} violations, worst {worst:.3g}", file=out)
        for comp in traps:
            idx = [net.index[v] for v in comp]
            mass = trace.states[:, idx].sum(axis=1)
            growing = bool(np.all(np.diff(mass) > 0))
            note = "monotonically growing" if growing else "not monotone"
            print(f"{label}trap {_set(comp)} mass: {mass[0]:.6g} -> {mass[-1]:.6g} ({note})", file=out)
    return code


def cmd_feasible(args, out) -> int:
    doc = parse_document(_read(args.network))
    net = doc.network
    intakes = doc.intake_flux()
    state = _state(args.at, net)
    result = feasible_flow_exists(net, state, intakes)
    print(f"feasible: {'yes' if result.feasible else 'no'}", file=out)
    print(f"max-flow {format_exact(result.max_flow.value)} (intake total {format_exact(result.demand)})", file=out)
    cut = [net.edges[j].label for j in result.max_flow.cut]
    print(f"min-cut edges: {_set(cut)}", file=out)
    if result.witness is not None:
        print("witness flux:", file=out)
        for e, v in zip(net.edges, result.witness):
            print(f"  {e.label} = {format_exact(v)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="life", description="Analyse linear-in-flux metabolic network models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="structural report")
    p.add_argument("network")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("extreme-pathways", help="positive basis of the steady-flux cone")
    p.add_argument("network")
    p.add_argument("--at", help="state document (default: all ones)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_extreme_pathways)

    p = sub.add_parser("equilibrium", help="equilibrium at the document's fluxes")
    p.add_argument("network")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("classify", help="long-run regime at the document's fluxes")
    p.add_argument("network")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="RK4 trajectory")
    p.add_argument("network")
    p.add_argument("--x0", action="append", help="initial state document; repeat for a batch")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--every", type=int, default=None, help="keep one CSV row per this many steps")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs for a batch")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("feasible", help="max-flow feasibility of the intake fluxes")
    p.add_argument("network")
    p.add_argument("--at", help="state document (default: all ones)")
    p.set_defaults(func=cmd_feasible)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"life: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"life: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"life: cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except MissingDataError as exc:
        print(f"life: missing data: {exc.args[0]}", file=sys.stderr)
        return EXIT_MISSING
    except (NetworkError, TableauError, DimensionError, ValueError) as exc:
        print(f"life: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
