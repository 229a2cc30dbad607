"""
Command-line interface for symred
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    ArityError,
    ContextError,
    DSLSyntaxError,
    ScenarioError,
    SymredError,
    UndeclaredIdentifierError,
)
from .expr_core import Context, ExpressionParser, infer_context, to_dsl
from .jet_calculus import Constraint
from .reduction import Ansatz, AnsatzReducer
from .scenarios import Request, bundled_scenarios
from .settings import configure_logging, load_settings
from .symmetry_engine import (
    DeterminingSolver,
    EvolutionaryField,
    SymmetryEngine,
    VerdictInput,
    classical_invariance_verdict,
)
from .symred_runner import ScenarioRun, SymredRunner

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2

# Errors raised while reading or resolving input rather than while checking
INPUT_ERRORS = (DSLSyntaxError, UndeclaredIdentifierError, ArityError, ContextError,
                ScenarioError, OSError)


def _names(text: Optional[str]) -> List[str]:
    return [n.strip() for n in text.split(',') if n.strip()] if text else []


def _split_relation(text: str) -> Tuple[str, str]:
    """'lhs = rhs' -> (lhs, rhs); a bare expression means expr = 0"""
    if '=' not in text:
        return text, '0'
    lhs, rhs = text.split('=', 1)
    return lhs, rhs


def _reduced_spec(text: Optional[str]) -> Dict[str, List[str]]:
    """'phi1(t), phi2(t)' -> {'phi1': ['t'], 'phi2': ['t']}"""
    spec: Dict[str, List[str]] = {}
    if not text:
        return spec
    for item in text.replace(' ', '').split(')'):
        item = item.lstrip(',')
        if not item:
            continue
        if '(' not in item:
            raise ScenarioError(f"Reduced function '{item}' needs its arguments, e.g. {item}(t)")
        name, args = item.split('(', 1)
        spec[name] = _names(args)
    return spec


def _adhoc_context(texts: Sequence[str], args: argparse.Namespace,
                   reduced: Optional[Dict[str, List[str]]] = None) -> Context:
    return infer_context(texts, indep=_names(getattr(args, 'indep', None)) or None,
                         params=_names(getattr(args, 'params', None)), reduced=reduced,
                         unknowns=_names(getattr(args, 'unknowns', None)))


def _emit(lines: Sequence[str]):
    for line in lines:
        print(line)


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_run(args: argparse.Namespace, settings: Dict) -> int:
    paths = [Path(p) for p in args.files]
    if args.bundled:
        paths += list(bundled_scenarios().values())
    if not paths:
        print("No scenario files given (pass files or --bundled)", file=sys.stderr)
        return EXIT_INPUT_ERROR

    runner = SymredRunner(settings=settings)
    report = runner.run_batch(paths)
    _emit(format_text(report))

    if args.json:
        with open(args.json, 'w') as f:
            json.dump(report, f, indent=settings.get('report', {}).get('indent', 2), ensure_ascii=False)
            f.write('\n')
        logger.info(f"📁 JSON report: {args.json}")
    return EXIT_PASS if report['summary']['failed'] == 0 else EXIT_FAIL


def format_text(report: Dict) -> List[str]:
    """Human-readable lines for a batch report"""
    lines = []
    for scenario in report['scenarios']:
        lines.append(f"== {scenario['scenario']} ({scenario['passed']} passed, {scenario['failed']} failed)")
        for check in scenario['checks']:
            status = 'PASS' if check['success'] else 'FAIL'
            detail = (f"{check['error']}: {check['message']}" if 'error' in check
                      else json.dumps(check['outcome'], ensure_ascii=False))
            lines.append(f"  [{check['index']}] {status} {check['kind']} {detail}")
    s = report['summary']
    lines.append(f"{s['passed']}/{s['checks']} checks passed in {s['scenarios']} scenario(s)")
    return lines


def cmd_scenarios(args: argparse.Namespace, settings: Dict) -> int:
    for name, path in bundled_scenarios().items():
        print(f"{name}\t{path}")
    return EXIT_PASS


def cmd_check(args: argparse.Namespace, settings: Dict) -> int:
    lhs_text, rhs_text = _split_relation(args.constraint)
    ctx = _adhoc_context([lhs_text, rhs_text, args.field], args)
    parser = ExpressionParser(ctx)
    constraint = Constraint(parser.parse(lhs_text, canonical=False), parser.parse(rhs_text))
    engine = SymmetryEngine(ctx, settings['symbolic']['order_cap'])
    report = engine.invariance_defect(constraint, EvolutionaryField(parser.parse(args.field)))
    print(to_dsl(report.defect))
    return EXIT_PASS if report.is_invariant else EXIT_FAIL


def cmd_linearize(args: argparse.Namespace, settings: Dict) -> int:
    lhs_text, rhs_text = _split_relation(args.eq)
    ctx = _adhoc_context([lhs_text, rhs_text], args)
    parser = ExpressionParser(ctx)
    delta = parser.parse(lhs_text) - parser.parse(rhs_text)
    print(to_dsl(SymmetryEngine(ctx).frechet(delta)))
    return EXIT_PASS


def cmd_map_solution(args: argparse.Namespace, settings: Dict) -> int:
    ctx = _adhoc_context([args.field, args.seed], args)
    parser = ExpressionParser(ctx)
    image = SymmetryEngine(ctx).map_solution(EvolutionaryField(parser.parse(args.field)),
                                             parser.parse(args.seed))
    print(to_dsl(image))
    return EXIT_PASS


def cmd_commutator(args: argparse.Namespace, settings: Dict) -> int:
    ctx = _adhoc_context([args.f1, args.f2], args)
    parser = ExpressionParser(ctx)
    bracket = SymmetryEngine(ctx).commutator(EvolutionaryField(parser.parse(args.f1)),
                                             EvolutionaryField(parser.parse(args.f2)))
    print(to_dsl(bracket.characteristic))
    return EXIT_PASS


def cmd_determine(args: argparse.Namespace, settings: Dict) -> int:
    lhs_text, rhs_text = _split_relation(args.constraint)
    ctx = _adhoc_context([lhs_text, rhs_text, args.template], args)
    parser = ExpressionParser(ctx)
    constraint = Constraint(parser.parse(lhs_text, canonical=False), parser.parse(rhs_text))
    solver = DeterminingSolver(SymmetryEngine(ctx, settings['symbolic']['order_cap']))
    solution = solver.solve(constraint, EvolutionaryField(parser.parse(args.template)),
                            _names(args.unknowns))
    if not solution.consistent:
        print("inconsistent")
        return EXIT_FAIL
    print(f"dimension {solution.dimension}")
    for vector in solution.basis:
        print(', '.join(f"{k} = {to_dsl(v)}" for k, v in vector.items()))
    return EXIT_PASS


def cmd_reduce(args: argparse.Namespace, settings: Dict) -> int:
    reduced = _reduced_spec(args.reduced)
    lhs_text, rhs_text = _split_relation(args.eq)
    ctx = _adhoc_context([lhs_text, rhs_text, args.ansatz], args, reduced)
    parser = ExpressionParser(ctx)
    ansatz = Ansatz.from_context(ctx, parser.parse(args.ansatz))
    system = AnsatzReducer(ctx, settings['symbolic']['order_cap']).reduce(
        parser.parse(lhs_text) - parser.parse(rhs_text), ansatz)
    _emit(system.to_dsl())
    if system.zero_set:
        print(f"# away from: {', '.join(to_dsl(z) + ' = 0' for z in system.zero_set)}")
    return EXIT_PASS if system.conforms else EXIT_FAIL


def _scenario_request(args: argparse.Namespace, settings: Dict, kind: str, request_args: Dict) -> int:
    """Run one synthesized request against a loaded scenario file"""
    runner = SymredRunner(settings=settings)
    scenario = runner.load(args.file)
    run = ScenarioRun(scenario, settings)
    if kind in ('integrate', 'roundtrip') and request_args.get('equation'):
        run.reduced(request_args['equation'])
    record = runner.run_request(run, Request(kind, 0, request_args), 1)
    print(json.dumps({k: v for k, v in record.items() if k != 'timing'}, ensure_ascii=False,
                     indent=settings['report']['indent']))
    return EXIT_PASS if record['success'] else EXIT_FAIL


def cmd_solve_reduced(args: argparse.Namespace, settings: Dict) -> int:
    request_args = {'numeric': args.numeric, 'equation': args.equation,
                    'tolerance': settings['numeric']['closed_form_tolerance']}
    return _scenario_request(args, settings, 'integrate', request_args)


def cmd_residual(args: argparse.Namespace, settings: Dict) -> int:
    request_args = {'equation': args.equation, 'solution': args.solution, 'numeric': args.numeric,
                    'tolerance': settings['numeric']['residual_tolerance']}
    return _scenario_request(args, settings, 'residual', request_args)


def cmd_verdict(args: argparse.Namespace, settings: Dict) -> int:
    verdict = classical_invariance_verdict(
        VerdictInput(args.s, args.k1, args.eq_invariant, args.sys_invariant))
    print(verdict)
    return EXIT_PASS


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='symred',
        description='Lie-Baecklund symmetries, linearization and ansatz reduction of PDEs')
    parser.add_argument('--config', default=None, help='YAML file overriding the default settings')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    verbosity.add_argument('--quiet', '-q', action='store_true', help='Warnings and errors only')
    sub = parser.add_subparsers(dest='command', required=True)

    def adhoc(p: argparse.ArgumentParser):
        p.add_argument('--indep', help='Independent variables, e.g. "t,x" (inferred from jets otherwise)')
        p.add_argument('--params', help='Names to declare as parameters')

    p = sub.add_parser('run', help='Run scenario files')
    p.add_argument('files', nargs='*', help='Scenario files (.sym)')
    p.add_argument('--bundled', action='store_true', help='Also run every bundled scenario')
    p.add_argument('--json', default=None, help='Write the JSON report to this path')
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser('scenarios', help='List bundled scenarios')
    p.set_defaults(handler=cmd_scenarios)

    p = sub.add_parser('check', help='Invariance defect of a constraint under a characteristic')
    p.add_argument('--constraint', required=True, help='Solved form, e.g. "u[x,x] = u[x]^3"')
    p.add_argument('--field', required=True, help='Characteristic, e.g. "u*u[x]"')
    adhoc(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser('linearize', help='Frechet linearization')
    p.add_argument('--eq', required=True, help='Equation expression (= 0) or "lhs = rhs"')
    adhoc(p)
    p.set_defaults(handler=cmd_linearize)

    p = sub.add_parser('map-solution', help='Characteristic evaluated on a solution')
    p.add_argument('--field', required=True)
    p.add_argument('--seed', required=True, help='Solution expression for u')
    adhoc(p)
    p.set_defaults(handler=cmd_map_solution)

    p = sub.add_parser('commutator', help='Lie bracket of two characteristics')
    p.add_argument('--f1', required=True)
    p.add_argument('--f2', required=True)
    adhoc(p)
    p.set_defaults(handler=cmd_commutator)

    p = sub.add_parser('determine', help='Solve linear determining equations for unknown coefficients')
    p.add_argument('--constraint', required=True)
    p.add_argument('--template', required=True, help='Characteristic linear in the unknowns')
    p.add_argument('--unknowns', required=True, help='Comma-separated unknown names')
    adhoc(p)
    p.set_defaults(handler=cmd_determine)

    p = sub.add_parser('reduce', help='Reduce a PDE with a polynomial ansatz')
    p.add_argument('--eq', required=True)
    p.add_argument('--ansatz', required=True, help='Expression for u, e.g. "phi1 + phi2*x^2"')
    p.add_argument('--reduced', required=True, help='Reduced functions, e.g. "phi1(t), phi2(t)"')
    adhoc(p)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser('solve-reduced', help='Integrate a scenario reduced system with RK4')
    p.add_argument('file', help='Scenario file')
    p.add_argument('--numeric', required=True, help='Numeric block name')
    p.add_argument('--equation', default=None, help='Equation to reduce first')
    p.set_defaults(handler=cmd_solve_reduced)

    p = sub.add_parser('residual', help='Residual of a scenario solution')
    p.add_argument('file', help='Scenario file')
    p.add_argument('--equation', required=True)
    p.add_argument('--solution', required=True)
    p.add_argument('--numeric', required=True)
    p.set_defaults(handler=cmd_residual)

    p = sub.add_parser('verdict', help='Classical-invariance verdict')
    p.add_argument('--s', type=int, required=True, help='Dimension of the admitted algebra')
    p.add_argument('--k1', type=int, required=True, help='Order of the reduced ODE')
    p.add_argument('--eq-invariant', action='store_true')
    p.add_argument('--sys-invariant', action='store_true')
    p.set_defaults(handler=cmd_verdict)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the symred console script

    Returns:
        0 if every check passes, 1 on a failed check, 2 on unreadable or unresolvable input
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.config)
    except (OSError, ValueError) as e:
        print(f"Cannot read config: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    level = 'DEBUG' if args.verbose else 'WARNING' if args.quiet else None
    configure_logging(settings, level)

    try:
        return args.handler(args, settings)
    except INPUT_ERRORS as e:
        message = e.format_message() if isinstance(e, DSLSyntaxError) else str(e)
        print(f"error: {type(e).__name__}: {message}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (SymredError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())
