"""
Tests for function instantiation, RK4 integration and residual checks
"""

import math

import numpy as np
import pytest
import sympy

from src.errors import ExplicitFormError, NumericDomainError, ScenarioError
from src.expr_core import Context, parse
from src.numeric_verify import (
    FunctionInstantiation,
    NumericScenario,
    ReducedSystemIntegrator,
    ResidualChecker,
    TimeGrid,
    compile_expression,
    explicit_atoms,
    fd_check,
    instantiate,
    rk4,
)
from src.reduction import Ansatz, AnsatzReducer


@pytest.fixture
def heat_ctx():
    ctx = Context(['t', 'x'])
    ctx.add_function('phi1', default_args=['t'], reduced=True)
    ctx.add_function('phi2', default_args=['t'], reduced=True)
    return ctx


@pytest.fixture
def heat_system(heat_ctx):
    ansatz = Ansatz.from_context(heat_ctx, parse('phi1 + phi2*x^2', heat_ctx))
    return AnsatzReducer(heat_ctx).reduce(parse('u[t] - u[x,x]', heat_ctx), ansatz)


@pytest.fixture
def heat_numeric(heat_ctx):
    t = sympy.Symbol('t')
    return NumericScenario(
        name='H',
        initial={'phi1': sympy.Integer(1), 'phi2': sympy.Integer(3)},
        grid=TimeGrid('t', 0.0, 1.0, 0.01),
        samples={'x': (-1.0, 1.0)},
        count=20,
        closed={'phi1': 1 + 6 * t, 'phi2': sympy.Integer(3)},
    )


class TestRK4:

    def test_exponential_growth(self):
        times, states = rk4(lambda t, y: y, 0.0, np.array([1.0]), 0.01, 100)
        assert times[-1] == pytest.approx(1.0)
        assert abs(states[-1, 0] - math.e) < 1e-8

    def test_fourth_order_convergence(self):
        def error(step):
            _, states = rk4(lambda t, y: y, 0.0, np.array([1.0]), step, int(round(1 / step)))
            return abs(states[-1, 0] - math.e)

        assert 12.0 <= error(0.1) / error(0.05) <= 20.0

    def test_non_finite_state(self):
        with pytest.raises(NumericDomainError):
            rk4(lambda t, y: np.array([np.nan]), 0.0, np.array([1.0]), 0.1, 5)


class TestTimeGrid:

    def test_steps(self):
        assert TimeGrid('t', 0.0, 1.0, 0.1).steps() == 10
        assert TimeGrid('t', 0.0, 1.0, 0.1).steps(0.05) == 20

    def test_step_must_divide_interval(self):
        with pytest.raises(ValueError):
            TimeGrid('t', 0.0, 1.0, 0.3).steps()

    def test_invalid_grid(self):
        with pytest.raises(ValueError):
            TimeGrid('t', 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            TimeGrid('t', 1.0, 0.0, 0.1)


class TestInstantiation:

    def test_derivative_of_instantiated_function(self, ctx_x):
        ctx_x.add_function('h', 1)
        z = sympy.Dummy('z')
        square = FunctionInstantiation('h', (z,), z ** 2)
        expr = parse('d(h,1)(u) + h(u[x])', ctx_x)
        result = instantiate(expr, {'h': square})
        assert result == 2 * sympy.Symbol('u') + sympy.Symbol('u[x]') ** 2

    def test_explicit_atoms(self, utx_ctx):
        result = explicit_atoms(parse('phi2 - r', utx_ctx), utx_ctx)
        assert not result.has(sympy.Symbol('r'))
        assert result.has(sympy.sqrt(parse('phi1 - 2*x', utx_ctx)))

    def test_compile_rejects_free_names(self):
        x, y = sympy.symbols('x y')
        with pytest.raises(NumericDomainError):
            compile_expression(x + y, [x])

    def test_compile_function_application_argument(self, heat_ctx):
        t = sympy.Symbol('t')
        phi = parse('phi1', heat_ctx)
        fn = compile_expression(2 * phi + t, [t, phi])
        assert fn(1.0, 2.0) == pytest.approx(5.0)


class TestFiniteDifference:

    def test_polynomial(self):
        x = sympy.Symbol('x')
        check = fd_check(x ** 3, x, {x: 0.5})
        assert check.symbolic == pytest.approx(0.75)
        assert check.abs_diff < 1e-6

    def test_missing_variable(self):
        x, y = sympy.symbols('x y')
        with pytest.raises(NumericDomainError):
            fd_check(x * y, y, {x: 1.0})


class TestIntegrator:

    def test_explicit_form(self, heat_ctx, heat_system):
        rhs = ReducedSystemIntegrator(heat_ctx).explicit_form(heat_system)
        assert rhs['phi1'] == 2 * parse('phi2', heat_ctx)
        assert rhs['phi2'] == 0

    def test_closed_forms(self, heat_ctx, heat_system, heat_numeric):
        integrator = ReducedSystemIntegrator(heat_ctx)
        trajectory = integrator.integrate(heat_system, heat_numeric)
        assert len(trajectory.times) == 101
        assert trajectory.final()['phi1'] == pytest.approx(7.0)
        errors = integrator.closed_form_errors(trajectory, heat_numeric, 't')
        assert max(errors.values()) < 1e-10

    def test_missing_initial_value(self, heat_ctx, heat_system, heat_numeric):
        del heat_numeric.initial['phi2']
        with pytest.raises(ScenarioError):
            ReducedSystemIntegrator(heat_ctx).integrate(heat_system, heat_numeric)

    def test_partial_differential_reduction_rejected(self):
        ctx = Context(['t', 'x', 'y'])
        ctx.add_function('phi1', default_args=['t', 'x'], reduced=True)
        ansatz = Ansatz.from_context(ctx, parse('phi1*y', ctx))
        system = AnsatzReducer(ctx).reduce(parse('u[t] - u[x]', ctx), ansatz)
        with pytest.raises(ExplicitFormError):
            ReducedSystemIntegrator(ctx).explicit_form(system)


class TestResidualChecker:

    def test_exact_solution(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (-1.0, 1.0)}
        checker = ResidualChecker(heat_ctx)
        report = checker.closed_form(parse('u[t] - u[x,x]', heat_ctx),
                                     parse('exp(t + x)', heat_ctx), heat_numeric)
        assert report.max_residual < 1e-10
        assert report.points == 20
        assert report.fd_points == 20
        assert report.fd_max_diff < 1e-5
        assert report.fd_derivatives == 3

    def test_spot_checks_reach_higher_derivatives(self, heat_ctx):
        checker = ResidualChecker(heat_ctx)
        third_order = parse('u[t] - u[x,x,x]', heat_ctx)
        assert checker.derivative_chains(third_order, 'u', ['t', 'x']) == [
            ((), 't'), ((), 'x'), (('x',), 'x'), (('x', 'x'), 'x')]
        assert checker.derivative_chains(third_order, 'u', ['x']) == [
            ((), 'x'), (('x',), 'x'), (('x', 'x'), 'x')]
        assert checker.derivative_chains(parse('u[t,x]', heat_ctx), 'u', ['t', 'x']) == [
            ((), 't'), ((), 'x'), (('t',), 'x')]

    def test_third_order_residual(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (-1.0, 1.0)}
        report = ResidualChecker(heat_ctx).closed_form(
            parse('u[t] - u[x,x,x]', heat_ctx), parse('exp(t + x)', heat_ctx), heat_numeric)
        assert report.max_residual < 1e-10
        assert report.fd_derivatives == 4
        assert report.fd_max_diff < 1e-5

    def test_wrong_candidate(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (0.5, 1.0)}
        report = ResidualChecker(heat_ctx).closed_form(
            parse('u[t] - u[x,x]', heat_ctx), parse('x^3', heat_ctx), heat_numeric)
        assert report.max_residual > 1.0

    def test_guard_violation(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (-1.0, 1.0)}
        heat_numeric.guards = [parse('x - 10', heat_ctx)]
        with pytest.raises(NumericDomainError):
            ResidualChecker(heat_ctx).closed_form(parse('u[t] - u[x,x]', heat_ctx),
                                                  parse('exp(t + x)', heat_ctx), heat_numeric)

    def test_singular_point(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (-1.0, 1.0)}
        heat_numeric.count = 5
        with pytest.raises(NumericDomainError):
            ResidualChecker(heat_ctx).closed_form(parse('u[t] - u[x,x]', heat_ctx),
                                                  parse('t*ln(x - 5)', heat_ctx), heat_numeric)

    def test_roundtrip(self, heat_ctx, heat_system, heat_numeric):
        trajectory = ReducedSystemIntegrator(heat_ctx).integrate(heat_system, heat_numeric)
        report = ResidualChecker(heat_ctx).trajectory(
            parse('u[t] - u[x,x]', heat_ctx), heat_system.ansatz, trajectory, heat_numeric)
        assert report.max_residual < 1e-9

    def test_deterministic_sampling(self, heat_ctx, heat_numeric):
        heat_numeric.samples = {'t': (0.0, 1.0), 'x': (-1.0, 1.0)}
        pde, candidate = parse('u[t] - u[x,x]', heat_ctx), parse('x^2', heat_ctx)
        first = ResidualChecker(heat_ctx).closed_form(pde, candidate, heat_numeric)
        second = ResidualChecker(heat_ctx).closed_form(pde, candidate, heat_numeric)
        assert first.max_residual == second.max_residual
