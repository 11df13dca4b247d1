"""Command-line entry point wiring all modules.

Subcommands: decompose, validate, solve, count, asp, reduce, stats.
Exit codes follow SAT-competition practice: 0 ok/valid (and true results
under --exit-status), 10 SAT/true, 20 UNSAT/false, 1 usage error, 2 input
error, 3 sub-solver failure. Every error path prints a single line with the
machine-parsable prefix "e " to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (ParseError, SubSolverFailure, TwsolveError)
from .model import CnfFormula, Program, is_tight, primal_graph
from .parsing import (parse_dimacs, parse_gr, parse_program, write_dimacs,
                      write_gr)
from .treedecomp import decompose, make_nice, parse_td, validate, write_td
from .dpasp import solve_normal_asp, solve_tight_asp
from .dgreduce import reduce_asp_to_sat, verify_guided
from .hybrid import RunStats, SolverConfig, hybrid_count, hybrid_decide

EXIT_OK = 0
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_SUBSOLVER = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _err(message):
    print(f"e {message}", file=sys.stderr)


def _read(path):
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _infer_format(path, explicit):
    if explicit and explicit != "auto":
        return explicit
    suffix = Path(path).suffix.lower()
    mapping = {".cnf": "cnf", ".dimacs": "cnf", ".gr": "gr", ".lp": "lp",
               ".td": "td"}
    if suffix in mapping:
        return mapping[suffix]
    raise ParseError(f"cannot infer format of {path!r}; use --format")


def _load_instance(path, fmt):
    fmt = _infer_format(path, fmt)
    text = _read(path)
    if fmt == "cnf":
        return parse_dimacs(text)
    if fmt == "gr":
        return parse_gr(text)
    if fmt == "lp":
        return parse_program(text)
    if fmt == "td":
        return parse_td(text)
    raise ParseError(f"unsupported format {fmt!r}")


def _as_graph(instance):
    if isinstance(instance, (CnfFormula, Program)):
        return primal_graph(instance)
    return instance


def _dedup(instance):
    if isinstance(instance, CnfFormula):
        seen = set()
        unique = []
        for clause in instance.clauses:
            if clause not in seen:
                seen.add(clause)
                unique.append(clause)
        instance.clauses = unique
    elif isinstance(instance, Program):
        seen = set()
        unique = []
        for rule in instance.rules:
            key = (rule.head, rule.pos, rule.neg)
            if key not in seen:
                seen.add(key)
                unique.append(rule)
        instance.rules = unique
    return instance


def _emit(text, output):
    if output and output != "-":
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _solver_config(args):
    return SolverConfig(
        width_threshold=args.width_threshold,
        max_depth=args.max_depth,
        sub_solver=args.sub_solver,
        seed=args.seed,
        heuristic=args.heuristic,
        jobs=args.jobs)


def _write_run_stats(args, stats):
    if getattr(args, "stats_out", None):
        Path(args.stats_out).write_text(stats.to_json() + "\n")


def _result_exit(truthy, args):
    if truthy:
        return EXIT_OK if args.exit_status else EXIT_SAT
    return EXIT_UNSAT


def _add_common(parser, hybrid=False, solver_exit=False):
    parser.add_argument("--format", choices=["auto", "cnf", "gr", "lp", "td"],
                        default="auto")
    parser.add_argument("--heuristic", choices=["min-fill", "min-degree"],
                        default="min-fill")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dedup", action="store_true",
                        help="drop duplicate clauses/rules after parsing")
    parser.add_argument("--version", action="version",
                        version=f"twsolve {__version__}")
    if hybrid:
        parser.add_argument("-W", "--width-threshold", type=int, default=10)
        parser.add_argument("-D", "--max-depth", type=int, default=2)
        parser.add_argument("--sub-solver", default="internal",
                            help='"internal" or a command template with {file}')
        parser.add_argument("--jobs", type=int, default=1)
        parser.add_argument("--stats-out", help="write run-stats JSON here")
    if solver_exit:
        parser.add_argument("--exit-status", action="store_true",
                            help="exit 0 instead of 10 on SAT/true")


def _build_parser():
    parser = _Parser(prog="twsolve", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"twsolve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="compute a tree decomposition")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-")
    _add_common(p)

    p = sub.add_parser("validate", help="check a decomposition against a graph")
    p.add_argument("--td", required=True)
    p.add_argument("--graph", required=True)
    _add_common(p)

    p = sub.add_parser("solve", help="SAT via the hybrid pipeline")
    p.add_argument("input")
    _add_common(p, hybrid=True, solver_exit=True)

    p = sub.add_parser("count", help="exact #SAT via the hybrid pipeline")
    p.add_argument("input")
    _add_common(p, hybrid=True, solver_exit=True)

    p = sub.add_parser("asp", help="answer-set existence")
    p.add_argument("input")
    p.add_argument("--mode", choices=["auto", "tight", "normal"],
                   default="auto")
    _add_common(p, solver_exit=True)

    p = sub.add_parser("reduce", help="decomposition-guided reductions")
    p.add_argument("reduction", choices=["asp2sat"])
    p.add_argument("input")
    p.add_argument("--td", help="input decomposition (.td); computed if absent")
    p.add_argument("--out-cnf", help="output DIMACS path")
    p.add_argument("--out-td", help="output decomposition path")
    p.add_argument("--report", help="width report JSON-lines path")
    _add_common(p)

    p = sub.add_parser("stats", help="instance statistics")
    p.add_argument("input")
    _add_common(p)

    return parser


def _cmd_decompose(args):
    instance = _load_instance(args.input, args.format)
    if args.dedup:
        _dedup(instance)
    graph = _as_graph(instance)
    td = decompose(graph, heuristic=args.heuristic, seed=args.seed)
    _emit(write_td(td), args.output)
    return EXIT_OK


def _cmd_validate(args):
    td = parse_td(_read(args.td))
    graph = _as_graph(_load_instance(args.graph, args.format))
    report = validate(td, graph)
    for line in report.lines():
        print(line)
    if report.ok:
        print("valid")
        return EXIT_OK
    return EXIT_INPUT


def _cmd_solve(args):
    cnf = _load_instance(args.input, args.format)
    if not isinstance(cnf, CnfFormula):
        raise ParseError("solve expects a CNF instance")
    if args.dedup:
        _dedup(cnf)
    stats = RunStats()
    sat = hybrid_decide(cnf, _solver_config(args), stats=stats)
    _write_run_stats(args, stats)
    print("s SATISFIABLE" if sat else "s UNSATISFIABLE")
    return _result_exit(sat, args)


def _cmd_count(args):
    cnf = _load_instance(args.input, args.format)
    if not isinstance(cnf, CnfFormula):
        raise ParseError("count expects a CNF instance")
    if args.dedup:
        _dedup(cnf)
    stats = RunStats()
    count = hybrid_count(cnf, _solver_config(args), stats=stats)
    _write_run_stats(args, stats)
    print(f"c s exact arb int {count}")
    return _result_exit(count > 0, args)


def _cmd_asp(args):
    program = _load_instance(args.input, args.format if args.format != "auto"
                             else "lp" if not args.input.endswith((".cnf", ".gr"))
                             else args.format)
    if not isinstance(program, Program):
        raise ParseError("asp expects a logic program")
    if args.dedup:
        _dedup(program)
    mode = args.mode
    if mode == "auto":
        mode = "tight" if is_tight(program)[0] else "normal"
    if mode == "tight":
        sat = solve_tight_asp(program, heuristic=args.heuristic,
                              seed=args.seed)
    else:
        td = decompose(primal_graph(program), heuristic=args.heuristic,
                       seed=args.seed)
        sat = solve_normal_asp(program, make_nice(td))
    print("SAT" if sat else "UNSAT")
    return _result_exit(sat, args)


def _cmd_reduce(args):
    program = _load_instance(args.input, "lp" if args.format == "auto"
                             else args.format)
    if not isinstance(program, Program):
        raise ParseError("reduce asp2sat expects a logic program")
    if args.dedup:
        _dedup(program)
    if args.td:
        td = parse_td(_read(args.td))
    else:
        td = decompose(primal_graph(program), heuristic=args.heuristic,
                       seed=args.seed)
    output = reduce_asp_to_sat(program, td)

    stem = Path(args.input).name if args.input != "-" else "out"
    out_cnf = args.out_cnf or f"{stem}.asp2sat.cnf"
    out_td = args.out_td or f"{stem}.asp2sat.td"
    report = args.report or f"{stem}.asp2sat.widths.jsonl"
    Path(out_cnf).write_text(write_dimacs(output.formula))
    Path(out_td).write_text(write_td(output.output_td))
    with open(report, "w") as handle:
        for row in output.node_report:
            handle.write(json.dumps({
                "node": row.node,
                "inputBagSize": row.input_bag_size,
                "outputBagSize": row.output_bag_size,
                "bits": row.bits}, sort_keys=True) + "\n")
    cert = output.certificate
    print(f"c asp2sat k={cert.input_width} k'={cert.output_width} "
          f"bits={cert.bits_per_atom} bound={'ok' if cert.bound_holds else 'VIOLATED'}")
    print(f"c {cert.bound_text}")
    print(f"c verified={'yes' if verify_guided(output) else 'no'}")
    print(f"c wrote {out_cnf} {out_td} {report}")
    return EXIT_OK


def _cmd_stats(args):
    instance = _load_instance(args.input, args.format)
    if args.dedup:
        _dedup(instance)
    graph = _as_graph(instance)
    if isinstance(instance, CnfFormula):
        print(f"n {instance.num_vars}")
        print(f"m {len(instance.clauses)}")
    elif isinstance(instance, Program):
        print(f"n {instance.num_atoms}")
        print(f"m {len(instance.rules)}")
    else:
        print(f"n {len(graph.vertices)}")
        print(f"m {graph.num_edges}")
    for heuristic in ("min-fill", "min-degree"):
        td = decompose(graph, heuristic=heuristic, seed=args.seed)
        print(f"width {heuristic} {td.width}")
    if isinstance(instance, Program):
        print(f"tight {'yes' if is_tight(instance)[0] else 'no'}")
    return EXIT_OK


_COMMANDS = {
    "decompose": _cmd_decompose,
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "count": _cmd_count,
    "asp": _cmd_asp,
    "reduce": _cmd_reduce,
    "stats": _cmd_stats,
}


def run(argv=None):
    """Parse argv and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except _UsageError as exc:
        _err(f"usage: {exc}")
        return EXIT_USAGE
    except ParseError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except SubSolverFailure as exc:
        _err(str(exc))
        return EXIT_SUBSOLVER
    except TwsolveError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
