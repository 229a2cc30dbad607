"""
symred scenario runner
Executes the requested checks of scenario files in order and assembles the report
"""

import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import psutil
import sympy

from . import __version__
from .errors import ScenarioError
from .expr_core import Context, SymbolFunction, is_zero, normalize, to_dsl
from .jet_calculus import Constraint, JetSpace
from .numeric_verify import ReducedSystemIntegrator, ResidualChecker, fd_check
from .reduction import AnsatzReducer, ReducedSystem, canonical_equation, proportional
from .scenarios import Request, Scenario, ScenarioLoader
from .settings import load_settings
from .symmetry_engine import (
    DeterminingSolver,
    EvolutionaryField,
    PointField,
    SymmetryEngine,
    SystemInvarianceChecker,
    VerdictInput,
    algebra_dimension,
    classical_invariance_verdict,
)

logger = logging.getLogger(__name__)

CONVERGENCE_WINDOW = (12.0, 20.0)


def printable(value: Any) -> Any:
    """Report form of a check input or outcome: expressions in canonical DSL"""
    if isinstance(value, sympy.Basic):
        return to_dsl(value)
    if isinstance(value, tuple):
        return '[' + ', '.join(str(v) for v in value) + ']'
    if isinstance(value, dict):
        return {to_dsl(k) if isinstance(k, sympy.Basic) else str(k): printable(v)
                for k, v in value.items()}
    if isinstance(value, list):
        return [printable(v) for v in value]
    return value


class ScenarioRun:
    """
    Execution state of one scenario

    Reduced systems are cached per equation so integrate, convergence and
    roundtrip requests reuse the most recent reduction.
    """

    def __init__(self, scenario: Scenario, settings: Dict):
        self.scenario = scenario
        self.ctx: Context = scenario.context
        order_cap = settings.get('symbolic', {}).get('order_cap', 12)
        self.numeric = settings.get('numeric', {})
        self.engine = SymmetryEngine(self.ctx, order_cap)
        self.solver = DeterminingSolver(self.engine)
        self.reducer = AnsatzReducer(self.ctx, order_cap)
        self.integrator = ReducedSystemIntegrator(self.ctx)
        self.checker = ResidualChecker(self.ctx, self.numeric)
        self.systems: Dict[str, ReducedSystem] = {}
        self.last_system: Optional[str] = None

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def generator(self, ref: Union[str, tuple]) -> Union[EvolutionaryField, PointField]:
        """Named field, or the commutator of a bracketed pair"""
        if isinstance(ref, tuple):
            first, second = (self.scenario.generator(n) for n in ref)
            return self.engine.commutator(first, second, f"[{ref[0]}, {ref[1]}]")
        return self.scenario.generator(ref)

    def target(self, name: str) -> List[Constraint]:
        """The scenario constraints, or one equation read in solved form"""
        if name == 'constraint':
            return list(self.scenario.constraints)
        equation = self.scenario.equations[name]
        return [Constraint(equation.lhs, equation.rhs, name)]

    def reduced(self, equation: str) -> ReducedSystem:
        if equation not in self.systems:
            self.systems[equation] = self.reducer.reduce(
                self.scenario.equations[equation].expr, self.scenario.ansatz)
        self.last_system = equation
        return self.systems[equation]

    def latest_system(self, request: Request) -> ReducedSystem:
        if self.last_system is not None:
            return self.systems[self.last_system]
        if len(self.scenario.equations) != 1:
            raise ScenarioError(f"{request.describe()} needs a preceding reduce request")
        return self.reduced(next(iter(self.scenario.equations)))

    def matches(self, value: sympy.Expr, expected: sympy.Expr) -> bool:
        return is_zero(value - expected, self.ctx)

    def mentions(self, expr: sympy.Expr, name: str) -> bool:
        if name in self.ctx.functions:
            return any(a.symbol_name == name for a in expr.atoms(SymbolFunction))
        return sympy.Symbol(name) in expr.free_symbols

    # ------------------------------------------------------------------
    # Request handlers (each returns outcome and success)
    # ------------------------------------------------------------------

    def check(self, request: Request) -> Dict:
        args = request.args
        field = self.generator(args['field'])
        constraints = self.target(args['target'])
        reduction = constraints + [self.scenario.rewrites[n] for n in args.get('using', [])]
        reports = [self.engine.invariance_defect(c, field, reduction) for c in constraints]
        outcome: Dict[str, Any] = {
            'defects': [to_dsl(r.defect) for r in reports],
            'invariant': all(r.is_invariant for r in reports),
        }
        if len(reports) == 1:
            f = reports[0].factorization
            outcome['factorization'] = {
                'content': to_dsl(f.content),
                'monomial': to_dsl(f.monomial),
                'primitive': to_dsl(f.primitive),
                'denominator': to_dsl(f.denominator),
            }
        success = outcome['invariant']

        if 'divisible_by' in args:
            factor = args['divisible_by']
            constants = [r.constant_multiple(factor, self.ctx) for r in reports]
            outcome['divisible'] = all(c is not None for c in constants)
            outcome['c0'] = [None if c is None else to_dsl(c) for c in constants]
            outcome['quotients'] = [to_dsl(normalize(r.defect / factor, self.ctx)) for r in reports]
            success = outcome['divisible']
        if 'independent_of' in args:
            outcome['independent'] = not any(self.mentions(r.defect, args['independent_of'])
                                              for r in reports)
            success = outcome['independent']
        return {'outcome': outcome, 'success': success}

    def determine(self, request: Request) -> Dict:
        args = request.args
        template = self.generator(args['field'])
        if not isinstance(template, EvolutionaryField):
            raise ScenarioError(f"{request.describe()}: templates must be evolutionary fields")
        constraints = self.target(args['target'])
        solution = self.solver.solve(constraints[0], template, args['unknowns'], constraints)
        verified = solution.consistent and self.solver.verify(
            constraints[0], template, solution, constraints)
        expected = args.get('expect_dimension')
        outcome = {
            'equations': len(solution.equations),
            'dimension': solution.dimension,
            'particular': printable(solution.particular),
            'basis': [printable(v) for v in solution.basis],
            'free_unknowns': solution.free_unknowns(),
            'consistent': solution.consistent,
            'verified': verified,
        }
        return {'outcome': outcome,
                'success': verified and (expected is None or solution.dimension == expected)}

    def linearize(self, request: Request) -> Dict:
        args = request.args
        linear = self.engine.frechet(self.scenario.equations[args['equation']].expr)
        outcome = {'linearization': to_dsl(linear)}
        success = True
        if 'expect' in args:
            success = outcome['matches'] = self.matches(linear, args['expect'])
        return {'outcome': outcome, 'success': success}

    def map(self, request: Request) -> Dict:
        args = request.args
        field = self.generator(args['field'])
        equation = self.scenario.equations[args['equation']].expr
        seed = args['seed']
        jets = JetSpace(self.ctx)
        seed_residual = jets.evaluate_on(equation, self.ctx.primary_dep, seed)
        image = self.engine.map_solution(field, seed)
        residual = self.engine.linearization_residual(equation, seed, image)
        outcome: Dict[str, Any] = {
            'image': to_dsl(image),
            'seed_solves': seed_residual == 0,
            'linearization_residual': to_dsl(residual),
        }
        success = seed_residual == 0 and residual == 0
        if 'expect' in args:
            # Linear target: the image is accepted up to overall sign
            if self.matches(image, args['expect']):
                outcome['sign'] = 1
            elif self.matches(image, -args['expect']):
                outcome['sign'] = -1
            else:
                outcome['sign'] = 0
            success = success and outcome['sign'] != 0
        return {'outcome': outcome, 'success': success}

    def commutator(self, request: Request) -> Dict:
        args = request.args
        bracket = self.engine.commutator(self.generator(args['first']), self.generator(args['second']))
        outcome = {'characteristic': to_dsl(bracket.characteristic)}
        success = True
        if 'expect' in args:
            success = outcome['matches'] = self.matches(bracket.characteristic, args['expect'])
        return {'outcome': outcome, 'success': success}

    def reduce(self, request: Request) -> Dict:
        args = request.args
        system = self.reduced(args['equation'])
        substituted = self.reducer.apply_ansatz(
            self.scenario.equations[args['equation']].expr, self.scenario.ansatz)
        reconstructs = is_zero(system.reconstruct() - substituted, self.ctx)
        outcome: Dict[str, Any] = {
            'equations': system.to_dsl(),
            'k1': system.k1,
            'm_prime': system.ansatz.m_prime,
            'conforms': system.conforms,
            'basis': [to_dsl(m) for m in system.basis],
            'zero_set': [to_dsl(z) for z in system.zero_set],
            'reconstructs': reconstructs,
        }
        success = system.conforms and reconstructs
        expected = args.get('expect_equations')
        if expected is not None:
            canonical = [canonical_equation(normalize(e, self.ctx)) for e in expected]
            matched = (len(canonical) == system.k1
                       and all(any(proportional(c, e) for e in system.equations) for c in canonical))
            outcome['matches'] = matched
            success = success and matched
        return {'outcome': outcome, 'success': success}

    def verify(self, request: Request) -> Dict:
        constraints = self.target(request.args['target'])
        residuals = [self.reducer.apply_ansatz(c.delta, self.scenario.ansatz) for c in constraints]
        solves = all(r == 0 for r in residuals)
        return {'outcome': {'solves': solves, 'residuals': [to_dsl(r) for r in residuals]},
                'success': solves}

    def basis(self, request: Request) -> Dict:
        constraints = self.target(request.args['target'])
        results: Dict[str, bool] = {}
        for constraint in constraints:
            for name, ok in self.reducer.basis_check(constraint, self.scenario.ansatz).items():
                results[name] = results.get(name, True) and ok
        derivatives = {n: to_dsl(self.reducer.parameter_derivative(self.scenario.ansatz, n))
                       for n in self.scenario.ansatz.reduced_functions}
        return {'outcome': {'derivatives': derivatives, 'solves_linearization': results},
                'success': all(results.values())}

    def _instantiation_checks(self, ns) -> float:
        """Largest fd disagreement of the instantiated function derivatives at z = 1/2"""
        worst = 0.0
        for inst in ns.instantiations.values():
            point = {v: 0.5 for v in inst.variables}
            for v in inst.variables:
                worst = max(worst, fd_check(inst.body, v, point, self.numeric.get('fd_step', 1e-6)).abs_diff)
        return worst

    def integrate(self, request: Request) -> Dict:
        args = request.args
        ns = self.scenario.numeric[args['numeric']]
        system = self.latest_system(request)
        rhs = self.integrator.explicit_form(system)
        trajectory = self.integrator.integrate(system, ns)
        errors = self.integrator.closed_form_errors(trajectory, ns, system.ansatz.reduced_vars[0])
        fd_worst = self._instantiation_checks(ns)
        outcome = {
            'explicit_form': {n: to_dsl(e) for n, e in rhs.items()},
            'steps': len(trajectory.times) - 1,
            'step': trajectory.step,
            'final': trajectory.final(),
            'closed_form_errors': errors,
            'instantiation_fd_max_diff': fd_worst,
        }
        within = all(e < args['tolerance'] for e in errors.values())
        success = within and fd_worst < self.numeric.get('fd_tolerance', 1e-5)
        return {'outcome': outcome, 'success': success}

    def convergence(self, request: Request) -> Dict:
        args = request.args
        ns = self.scenario.numeric[args['numeric']]
        ratio, coarse, fine = self.integrator.convergence_ratio(
            self.latest_system(request), ns, args['step'])
        lo, hi = CONVERGENCE_WINDOW
        outcome = {'ratio': ratio, 'coarse_errors': coarse, 'fine_errors': fine, 'window': [lo, hi]}
        return {'outcome': outcome, 'success': lo <= ratio <= hi}

    def residual(self, request: Request) -> Dict:
        args = request.args
        dep, candidate = self.scenario.solutions[args['solution']]
        report = self.checker.closed_form(self.scenario.equations[args['equation']].expr,
                                          candidate, self.scenario.numeric[args['numeric']], dep)
        outcome = {
            'max_residual': report.max_residual,
            'points': report.points,
            'fd_max_diff': report.fd_max_diff,
            'fd_points': report.fd_points,
            'fd_derivatives': report.fd_derivatives,
        }
        success = (report.max_residual < args['tolerance']
                   and report.fd_max_diff < self.numeric.get('fd_tolerance', 1e-5))
        return {'outcome': outcome, 'success': success}

    def roundtrip(self, request: Request) -> Dict:
        args = request.args
        ns = self.scenario.numeric[args['numeric']]
        system = self.reduced(args['equation'])
        trajectory = self.integrator.integrate(system, ns)
        report = self.checker.trajectory(self.scenario.equations[args['equation']].expr,
                                         self.scenario.ansatz, trajectory, ns, self.reducer)
        outcome = {
            'max_residual': report.max_residual,
            'points': report.points,
            'final': trajectory.final(),
        }
        return {'outcome': outcome, 'success': report.max_residual < args['tolerance']}

    def invariant(self, request: Request) -> Dict:
        args = request.args
        algebra = [self.generator(ref) for ref in args['algebra']]
        result = SystemInvarianceChecker(self.engine).check(self.scenario.systems[args['system']], algebra)
        outcome = {
            'invariant': result['invariant'],
            'solved_form': [f"{to_dsl(c.leading)} = {to_dsl(c.rhs)}" for c in result['solved_form']],
            'defects': printable(result['defects']),
        }
        expected = args.get('expect')
        success = result['invariant'] if expected is None else result['invariant'] == expected
        return {'outcome': outcome, 'success': success}

    def verdict(self, request: Request) -> Dict:
        args = request.args
        algebra = [self.generator(ref) for ref in args['algebra']]
        constraints = self.target(args['target'])
        equation_invariant = all(self.engine.invariance_defect(c, g, constraints).is_invariant
                                 for c in constraints for g in algebra)
        system = SystemInvarianceChecker(self.engine).check(self.scenario.systems[args['system']], algebra)
        s = algebra_dimension(self.engine, algebra)
        inp = VerdictInput(s, args['order'], equation_invariant, system['invariant'])
        verdict = classical_invariance_verdict(inp)
        outcome = {
            's': inp.s,
            'generators': len(algebra),
            'k1': inp.k1,
            'equation_invariant': equation_invariant,
            'system_invariant': inp.system_invariant,
            'verdict': verdict,
        }
        expected = args.get('expect')
        return {'outcome': outcome, 'success': expected is None or verdict == expected}


class SymredRunner:
    """
    Main class for running symred scenarios
    """

    def __init__(self, config_path: Optional[str] = None, settings: Optional[Dict] = None):
        """
        Initialize the runner

        Args:
            config_path: Optional YAML file overriding the default settings
            settings: Settings dictionary (takes precedence over config_path)
        """
        self.settings = settings if settings is not None else load_settings(config_path)
        self.loader = ScenarioLoader(self.settings)
        self.process = psutil.Process()

    def load(self, path: Union[str, Path]) -> Scenario:
        """Load a scenario; parse and resolution errors propagate"""
        return self.loader.load(path)

    def run_request(self, run: ScenarioRun, request: Request, index: int) -> Dict:
        """
        Execute one request, recording failures instead of raising

        Args:
            run: Scenario execution state
            request: Request to execute
            index: Position of the request in the scenario

        Returns:
            Check record
        """
        logger.info(f"🔎 [{index}] {request.describe()}")
        record: Dict[str, Any] = {
            'index': index,
            'kind': request.kind,
            'inputs': printable(request.args),
            'outcome': None,
            'success': False,
        }
        mem_before = self.process.memory_info().rss
        start_time = time.perf_counter()
        try:
            result = getattr(run, request.kind)(request)
            record['outcome'] = printable(result['outcome'])
            record['success'] = bool(result['success'])
        except Exception as e:
            logger.error(f"   ❌ {type(e).__name__}: {e}")
            record['error'] = type(e).__name__
            record['message'] = str(e)
        record['timing'] = {
            'seconds': time.perf_counter() - start_time,
            'memory_delta_mb': (self.process.memory_info().rss - mem_before) / (1024 * 1024),
        }
        if record['success']:
            logger.info(f"   ✅ passed in {record['timing']['seconds']:.2f}s")
        elif 'error' not in record:
            logger.warning(f"   ❌ failed: {record['outcome']}")
        return record

    def run_scenario(self, scenario: Union[Scenario, str, Path]) -> Dict:
        """
        Run every request of a scenario in file order

        Args:
            scenario: Loaded Scenario or a path to a scenario file

        Returns:
            Scenario record with its checks and pass/fail counts
        """
        if not isinstance(scenario, Scenario):
            scenario = self.load(scenario)
        logger.info(f"\n🚀 Scenario {scenario.name}: {len(scenario.requests)} check(s)")

        run = ScenarioRun(scenario, self.settings)
        checks = [self.run_request(run, r, i) for i, r in enumerate(scenario.requests, 1)]
        passed = sum(1 for c in checks if c['success'])
        return {
            'scenario': scenario.name,
            'path': str(scenario.path) if scenario.path else None,
            'checks': checks,
            'passed': passed,
            'failed': len(checks) - passed,
        }

    def run_batch(self, paths: Sequence[Union[str, Path]]) -> Dict:
        """
        Load every scenario first, then run them one after another

        Args:
            paths: Scenario files

        Returns:
            Report with a per-scenario record and a summary block
        """
        scenarios = [self.load(p) for p in paths]
        overall_start = time.perf_counter()
        records = [self.run_scenario(s) for s in scenarios]

        summary = {
            'scenarios': len(records),
            'checks': sum(len(r['checks']) for r in records),
            'passed': sum(r['passed'] for r in records),
            'failed': sum(r['failed'] for r in records),
        }
        logger.info(f"\n{'=' * 70}")
        logger.info("📊 RUN SUMMARY")
        logger.info(f"{'=' * 70}")
        logger.info(f"Scenarios: {summary['scenarios']}")
        logger.info(f"✅ Passed: {summary['passed']}/{summary['checks']}")
        logger.info(f"❌ Failed: {summary['failed']}")
        logger.info(f"⏱️  Total time: {time.perf_counter() - overall_start:.1f}s")

        return {'tool': 'symred', 'version': __version__, 'scenarios': records, 'summary': summary}


def strip_timing(report: Dict) -> Dict:
    """Copy of a report without the timing blocks"""
    stripped = dict(report)
    stripped['scenarios'] = [
        {**s, 'checks': [{k: v for k, v in c.items() if k != 'timing'} for c in s['checks']]}
        for s in report['scenarios']
    ]
    return stripped
