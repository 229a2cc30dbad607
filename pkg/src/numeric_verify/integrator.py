"""
Fixed-step classical Runge-Kutta integration of reduced ODE systems
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import sympy

from ..errors import ExplicitFormError, NumericDomainError, ScenarioError
from ..expr_core import Context, SymbolFunction
from ..reduction import ReducedSystem
from .instantiation import NumericScenario, compile_expression, evaluate, prepare

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """Grid values and derivatives of every reduced function"""

    times: np.ndarray
    values: Dict[str, np.ndarray]
    derivatives: Dict[str, np.ndarray]
    step: float

    def final(self) -> Dict[str, float]:
        return {name: float(v[-1]) for name, v in self.values.items()}


def rk4(f: Callable[[float, np.ndarray], np.ndarray], t0: float, y0: np.ndarray,
        step: float, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical 4th-order Runge-Kutta at a fixed step

    Args:
        f: Right-hand side f(t, y)
        t0: Initial time
        y0: Initial state
        step: Step size
        n_steps: Number of steps

    Returns:
        Tuple of (times, states) with states[k] at times[k]

    Raises:
        NumericDomainError: On a non-finite state
    """
    times = t0 + step * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, len(y0)))
    states[0] = y0
    h = step
    for k in range(n_steps):
        t, y = times[k], states[k]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        states[k + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(states[k + 1])):
            raise NumericDomainError(f"Non-finite state at t = {times[k + 1]:.6g}")
    return times, states


class ReducedSystemIntegrator:
    """
    Integrate a reduced system in one surviving variable
    """

    def __init__(self, ctx: Context):
        self.ctx = ctx

    def _variable(self, system: ReducedSystem) -> sympy.Symbol:
        if len(system.ansatz.reduced_vars) != 1:
            raise ExplicitFormError(
                f"Numeric integration needs ODEs; reduced functions depend on {system.ansatz.reduced_vars}")
        return sympy.Symbol(system.ansatz.reduced_vars[0])

    def explicit_form(self, system: ReducedSystem) -> Dict[str, sympy.Expr]:
        """
        Solve the reduced equations for the first derivatives

        Args:
            system: ReducedSystem

        Returns:
            Reduced-function name -> right-hand side of its first derivative

        Raises:
            ExplicitFormError: If the system does not determine every first derivative uniquely
        """
        t = self._variable(system)
        names = list(system.ansatz.reduced_functions)
        derivatives = [self.ctx.apply(name, [t], [1]) for name in names]
        try:
            solutions = sympy.solve(system.equations, derivatives, dict=True)
        except NotImplementedError as e:
            raise ExplicitFormError(f"Reduced system could not be solved for {derivatives}: {e}")
        if len(solutions) != 1 or any(d not in solutions[0] for d in derivatives):
            raise ExplicitFormError(
                f"Reduced system does not determine {', '.join(str(d) for d in derivatives)} uniquely")
        rhs = {}
        for name, d in zip(names, derivatives):
            value = solutions[0][d]
            if any(sum(a.orders) > 0 for a in value.atoms(SymbolFunction) if a.symbol_name in names):
                raise ExplicitFormError(f"Right-hand side for {d} still contains derivatives")
            rhs[name] = value
        return rhs

    def integrate(self, system: ReducedSystem, ns: NumericScenario,
                  step: Optional[float] = None) -> Trajectory:
        """
        RK4 trajectory of the reduced system on the scenario grid

        Args:
            system: ReducedSystem in explicit-solvable form
            ns: Numeric scenario (grid, initial values, instantiations, parameters)
            step: Step overriding the grid step

        Returns:
            Trajectory
        """
        if ns.grid is None:
            raise ScenarioError(f"Numeric block {ns.name} has no grid")
        t = self._variable(system)
        names = list(system.ansatz.reduced_functions)
        missing = [n for n in names if n not in ns.initial]
        if missing:
            raise ScenarioError(f"Numeric block {ns.name} has no initial value for {', '.join(missing)}")

        rhs = self.explicit_form(system)
        apps = [self.ctx.apply(name, [t]) for name in names]
        prepared = [prepare(rhs[n], ns, self.ctx) for n in names]
        compiled = [compile_expression(e, [t] + apps) for e in prepared]

        def f(time: float, y: np.ndarray) -> np.ndarray:
            return np.array([float(evaluate(fn, [time, *y])) for fn in compiled])

        step = step or ns.grid.step
        y0 = np.array([float(prepare(ns.initial[n], ns, self.ctx)) for n in names])
        times, states = rk4(f, ns.grid.start, y0, step, ns.grid.steps(step))
        derivatives = np.array([f(times[k], states[k]) for k in range(len(times))])

        logger.info(f"✅ RK4: {len(times) - 1} step(s) of {step:g} on [{ns.grid.start:g}, {ns.grid.stop:g}]")
        return Trajectory(
            times=times,
            values={n: states[:, i] for i, n in enumerate(names)},
            derivatives={n: derivatives[:, i] for i, n in enumerate(names)},
            step=step,
        )

    def closed_form_errors(self, trajectory: Trajectory, ns: NumericScenario,
                           var: str) -> Dict[str, float]:
        """Max abs difference between the trajectory and each declared closed form"""
        t = sympy.Symbol(var)
        errors = {}
        for name, expr in ns.closed.items():
            if name not in trajectory.values:
                raise ScenarioError(f"Closed form given for unknown reduced function {name}")
            fn = compile_expression(prepare(expr, ns, self.ctx), [t])
            exact = evaluate(fn, [trajectory.times], len(trajectory.times))
            errors[name] = float(np.max(np.abs(trajectory.values[name] - exact)))
        return errors

    def convergence_ratio(self, system: ReducedSystem, ns: NumericScenario,
                          step: float) -> Tuple[float, Dict[str, float], Dict[str, float]]:
        """
        Closed-form error ratio between step and step/2

        Returns:
            Tuple of (ratio of the largest errors, errors at step, errors at step/2)
        """
        var = system.ansatz.reduced_vars[0]
        coarse = self.closed_form_errors(self.integrate(system, ns, step), ns, var)
        fine = self.closed_form_errors(self.integrate(system, ns, step / 2), ns, var)
        if not coarse:
            raise ScenarioError(f"Numeric block {ns.name} declares no closed forms")
        ratio = max(coarse.values()) / max(max(fine.values()), np.finfo(float).tiny)
        return ratio, coarse, fine
