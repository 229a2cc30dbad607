"""
Residual verification of candidate solutions and finite-difference spot checks
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from ..errors import NumericDomainError
from ..expr_core import Context
from ..jet_calculus import JetSpace
from ..reduction import Ansatz, AnsatzReducer
from .instantiation import NumericScenario, compile_expression, evaluate, prepare
from .integrator import Trajectory

logger = logging.getLogger(__name__)


@dataclass
class FDCheck:
    """Symbolic derivative against its central finite difference"""

    symbolic: float
    finite_difference: float
    abs_diff: float


@dataclass
class ResidualReport:
    """Max absolute residual over the sample plus derivative spot checks"""

    max_residual: float
    points: int
    fd_max_diff: float = 0.0
    fd_points: int = 0
    fd_derivatives: int = 0


def fd_check(expr: sympy.Expr, var: sympy.Expr, point: Dict[sympy.Expr, float],
             h: float = 1e-6) -> FDCheck:
    """
    Compare d expr/d var with (f(v + h) - f(v - h)) / 2h

    Args:
        expr: Expression evaluable from the point's keys
        var: Symbol differentiated against (must be a key of point)
        point: Values for every symbol or function application in expr
        h: Finite-difference step

    Returns:
        FDCheck

    Raises:
        NumericDomainError: If evaluation fails or is not finite
    """
    if var not in point:
        raise NumericDomainError(f"Point has no value for {var}")
    args = sorted(point, key=str)
    f = compile_expression(expr, args)
    df = compile_expression(sympy.diff(expr, var), args)
    position = args.index(var)

    def shifted(by: float) -> List[float]:
        values = [float(point[a]) for a in args]
        values[position] += by
        return values

    symbolic = float(evaluate(df, shifted(0.0)))
    fd = float((evaluate(f, shifted(h)) - evaluate(f, shifted(-h))) / (2 * h))
    if not (np.isfinite(symbolic) and np.isfinite(fd)):
        raise NumericDomainError(f"Non-finite derivative of {expr} at {point}")
    return FDCheck(symbolic, fd, abs(symbolic - fd))


class ResidualChecker:
    """
    Evaluate PDE residuals at sampled points
    """

    def __init__(self, ctx: Context, settings: Optional[Dict] = None):
        """
        Initialize the checker

        Args:
            ctx: Declaration context
            settings: 'numeric' settings section (fd_step, fd_spot_checks, random_seed)
        """
        self.ctx = ctx
        self.jets = JetSpace(ctx)
        settings = settings or {}
        self.fd_step = settings.get('fd_step', 1e-6)
        self.fd_spot_checks = settings.get('fd_spot_checks', 20)
        self.seed = settings.get('random_seed', 20240917)

    def sample(self, ns: NumericScenario, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        """Uniform samples in every declared range"""
        if not ns.samples:
            raise NumericDomainError(f"Numeric block {ns.name} declares no sample ranges")
        return {var: rng.uniform(lo, hi, ns.count) for var, (lo, hi) in ns.samples.items()}

    def check_guards(self, guards: Sequence[sympy.Expr], args: Sequence[sympy.Expr],
                     values: Sequence, size: int):
        """
        Raises:
            NumericDomainError: If any guard is negative at any point
        """
        for guard in guards:
            g = evaluate(compile_expression(guard, args), values, size)
            bad = np.flatnonzero(~(g >= 0))
            if bad.size:
                raise NumericDomainError(
                    f"Guard {guard} >= 0 violated at {bad.size} of {size} point(s)")

    def _evaluate_residual(self, expr: sympy.Expr, args: Sequence[sympy.Expr],
                           values: Sequence, size: int) -> float:
        r = evaluate(compile_expression(expr, args), values, size)
        if not np.all(np.isfinite(r)):
            raise NumericDomainError("Residual is not finite at a sample point (singular point)")
        return float(np.max(np.abs(r)))

    def closed_form(self, pde: sympy.Expr, candidate: sympy.Expr, ns: NumericScenario,
                    dep: Optional[str] = None) -> ResidualReport:
        """
        Residual of pde at u = candidate(x) with exact symbolic derivatives

        Args:
            pde: Equation expression
            candidate: Closed-form expression in the independent variables
            ns: Numeric scenario with samples, guards and parameter values
            dep: Dependent variable (defaults to the primary one)

        Returns:
            ResidualReport including finite-difference spot checks of every derivative the pde uses
        """
        dep = dep or self.ctx.primary_dep
        rng = np.random.default_rng(self.seed)
        samples = self.sample(ns, rng)
        args = [sympy.Symbol(v) for v in samples]
        values = [samples[v] for v in samples]

        guards = [prepare(g, ns, self.ctx) for g in ns.guards]
        self.check_guards(guards, args, values, ns.count)

        substituted = self.jets.evaluate_on(pde, dep, candidate, normalized=False)
        residual = self._evaluate_residual(prepare(substituted, ns, self.ctx), args, values, ns.count)

        fd_max, fd_points, fd_derivatives = self._spot_check(
            prepare(candidate, ns, self.ctx), pde, dep, args, values, rng)
        logger.info(f"📊 Residual {residual:.3e} on {ns.count} point(s); "
                    f"fd spot-check of {fd_derivatives} derivative(s) {fd_max:.3e}")
        return ResidualReport(residual, ns.count, fd_max, fd_points, fd_derivatives)

    def derivative_chains(self, pde: sympy.Expr, dep: str,
                          sampled: Sequence[str]) -> List[Tuple[Tuple[str, ...], str]]:
        """
        (lower derivative, variable) pairs whose finite differences cover the pde's jets

        Every first derivative along a sampled variable is included, plus one
        step per order for each jet of dep in the pde, so a jet D_J u is reached
        as the difference quotient of its exact derivative one order lower.

        Args:
            pde: Equation expression
            dep: Dependent variable whose jets are covered
            sampled: Sampled independent variables

        Returns:
            Sorted pairs (variables of the lower derivative, differentiation variable)
        """
        chains = {((), var) for var in sampled}
        for jet in self.ctx.jets_in(pde, dep):
            path = tuple(self.ctx.indep_vars[i] for i in self.ctx.jet_info(jet)[1].steps())
            if not set(path) <= set(sampled):
                continue
            for k in range(1, len(path) + 1):
                chains.add((path[:k - 1], path[k - 1]))
        return sorted(chains, key=lambda c: (len(c[0]), c))

    def _spot_check(self, candidate: sympy.Expr, pde: sympy.Expr, dep: str,
                    args: List[sympy.Symbol], values: List[np.ndarray],
                    rng: np.random.Generator) -> Tuple[float, int, int]:
        chains = self.derivative_chains(pde, dep, [a.name for a in args])
        lower: Dict[Tuple[str, ...], sympy.Expr] = {(): candidate}
        for path, _ in chains:
            if path not in lower:
                lower[path] = sympy.diff(candidate, *[sympy.Symbol(v) for v in path])
        n = min(self.fd_spot_checks, len(values[0])) if values else 0
        worst = 0.0
        chosen = rng.choice(len(values[0]), size=n, replace=False) if n else []
        for k in chosen:
            point = {a: float(v[k]) for a, v in zip(args, values)}
            for path, var in chains:
                check = fd_check(lower[path], sympy.Symbol(var), point, self.fd_step)
                worst = max(worst, check.abs_diff)
        return worst, n, len(chains)

    def trajectory(self, pde: sympy.Expr, ansatz: Ansatz, trajectory: Trajectory,
                   ns: NumericScenario, reducer: Optional[AnsatzReducer] = None) -> ResidualReport:
        """
        Residual of pde on the ansatz with reduced functions taken from a trajectory

        Grid times are sampled from the trajectory; the eliminated variable is
        sampled from its declared range. Derivatives of the reduced functions are
        the right-hand sides stored with the trajectory.

        Args:
            pde: Equation expression
            ansatz: Ansatz
            trajectory: Integrated reduced system
            ns: Numeric scenario
            reducer: AnsatzReducer to reuse

        Returns:
            ResidualReport
        """
        reducer = reducer or AnsatzReducer(self.ctx)
        rng = np.random.default_rng(self.seed)
        t = sympy.Symbol(ansatz.reduced_vars[0])
        x = sympy.Symbol(ansatz.eliminated_var)
        if ansatz.eliminated_var not in ns.samples:
            raise NumericDomainError(f"Numeric block {ns.name} has no sample range for {x}")
        lo, hi = ns.samples[ansatz.eliminated_var]
        indices = rng.integers(0, len(trajectory.times), ns.count)
        xs = rng.uniform(lo, hi, ns.count)

        args: List[sympy.Expr] = [t, x]
        values: List[np.ndarray] = [trajectory.times[indices], xs]
        for name in ansatz.reduced_functions:
            args.append(self.ctx.apply(name, [t]))
            values.append(trajectory.values[name][indices])
            args.append(self.ctx.apply(name, [t], [1]))
            values.append(trajectory.derivatives[name][indices])

        guards = [prepare(g, ns, self.ctx) for g in ns.guards]
        self.check_guards(guards, args, values, ns.count)

        substituted = prepare(reducer.apply_ansatz(pde, ansatz), ns, self.ctx)
        residual = self._evaluate_residual(substituted, args, values, ns.count)
        logger.info(f"📊 Round-trip residual {residual:.3e} on {ns.count} point(s)")
        return ResidualReport(residual, ns.count)
