"""
Tests for the general-solution ansatz and reduced-system collection
"""

import pytest
import sympy

from src.errors import CollectionError, ContextError
from src.expr_core import Context, is_zero, parse
from src.jet_calculus import Constraint
from src.reduction import Ansatz, AnsatzReducer, canonical_equation, proportional
from src.scenarios import ScenarioLoader, bundled_scenarios


@pytest.fixture
def heat_ctx():
    ctx = Context(['t', 'x'])
    ctx.add_function('phi1', default_args=['t'], reduced=True)
    ctx.add_function('phi2', default_args=['t'], reduced=True)
    return ctx


@pytest.fixture
def quadratic(heat_ctx):
    return Ansatz.from_context(heat_ctx, parse('phi1 + phi2*x^2', heat_ctx))


class TestAnsatz:

    def test_from_context(self, quadratic):
        assert quadratic.dep == 'u'
        assert quadratic.reduced_functions == ('phi1', 'phi2')
        assert quadratic.reduced_vars == ('t',)
        assert quadratic.eliminated_var == 'x'
        assert quadratic.m_prime == 2

    def test_needs_reduced_functions(self, ctx_tx):
        with pytest.raises(ContextError):
            Ansatz.from_context(ctx_tx, sympy.Symbol('x'))

    def test_must_leave_one_variable_out(self, ctx_tx):
        ctx_tx.add_function('phi', default_args=['t', 'x'], reduced=True)
        with pytest.raises(ContextError):
            Ansatz.from_context(ctx_tx, parse('phi', ctx_tx))

    def test_x_dependent_atoms(self, utx_ctx):
        ansatz = Ansatz.from_context(utx_ctx, parse('phi2 - r', utx_ctx))
        assert [a.name for a in ansatz.x_dependent_atoms(utx_ctx)] == ['r']


class TestCanonicalEquations:

    def test_content_and_sign(self):
        a, b = sympy.symbols('a b')
        assert canonical_equation(-4 * a + 6 * b) == canonical_equation(2 * a - 3 * b)

    def test_proportional(self):
        a, b = sympy.symbols('a b')
        assert proportional(2 * a - 4 * b, b - a / 2)
        assert not proportional(a, b)


class TestHeatReduction:

    def test_reduced_system(self, heat_ctx, quadratic):
        reducer = AnsatzReducer(heat_ctx)
        system = reducer.reduce(parse('u[t] - u[x,x]', heat_ctx), quadratic)
        assert system.k1 == 2
        assert system.conforms
        assert system.zero_set == []
        expected = [parse('d(phi1,1)(t) - 2*phi2', heat_ctx), parse('d(phi2,1)(t)', heat_ctx)]
        for e in expected:
            assert any(proportional(canonical_equation(e), eq) for eq in system.equations)

    def test_reconstruction(self, heat_ctx, quadratic):
        reducer = AnsatzReducer(heat_ctx)
        pde = parse('u[t] - u[x,x]', heat_ctx)
        system = reducer.reduce(pde, quadratic)
        assert is_zero(system.reconstruct() - reducer.apply_ansatz(pde, quadratic), heat_ctx)

    def test_basis_monomials(self, heat_ctx, quadratic):
        system = AnsatzReducer(heat_ctx).reduce(parse('u[t] - u[x,x]', heat_ctx), quadratic)
        assert system.basis == [sympy.Integer(1), sympy.Symbol('x') ** 2]

    def test_solves_invariant_equation(self, heat_ctx, quadratic):
        reducer = AnsatzReducer(heat_ctx)
        assert reducer.solves(Constraint(sympy.Symbol('u[x,x,x]'), sympy.Integer(0)), quadratic)
        assert not reducer.solves(Constraint(sympy.Symbol('u[x,x]'), sympy.Integer(0)), quadratic)

    def test_parameter_derivatives(self, heat_ctx, quadratic):
        reducer = AnsatzReducer(heat_ctx)
        assert reducer.parameter_derivative(quadratic, 'phi1') == 1
        assert reducer.parameter_derivative(quadratic, 'phi2') == sympy.Symbol('x') ** 2

    def test_basis_check(self, heat_ctx, quadratic):
        reducer = AnsatzReducer(heat_ctx)
        results = reducer.basis_check(Constraint(sympy.Symbol('u[x,x,x]'), sympy.Integer(0)), quadratic)
        assert results == {'phi1': True, 'phi2': True}

    def test_non_polynomial_in_eliminated_variable(self, heat_ctx):
        ansatz = Ansatz.from_context(heat_ctx, parse('phi1*exp(x)', heat_ctx))
        with pytest.raises(CollectionError):
            AnsatzReducer(heat_ctx).reduce(parse('u[t] - u', heat_ctx), ansatz)


class TestAtomReduction:

    @pytest.fixture
    def scenario(self):
        return ScenarioLoader().load(bundled_scenarios()['utx_family'])

    def test_ansatz_solves_constraint(self, scenario):
        reducer = AnsatzReducer(scenario.context)
        assert reducer.solves(scenario.constraints[0], scenario.ansatz)

    def test_parameter_derivative_through_relation(self, scenario):
        ctx = scenario.context
        derivative = AnsatzReducer(ctx).parameter_derivative(scenario.ansatz, 'phi1')
        assert is_zero(derivative + 1 / (2 * sympy.Symbol('r')), ctx)

    def test_two_equations(self, scenario):
        ctx = scenario.context
        system = AnsatzReducer(ctx).reduce(scenario.equations['E12'].expr, scenario.ansatz)
        assert system.k1 == 2
        assert system.conforms
        expected = [
            parse('d(phi2,1)(t) - A + lambda - lambda1*h(phi2)', ctx),
            parse('d(phi1,1)(t)/2 + B + lambda*phi2', ctx),
        ]
        for e in expected:
            assert any(proportional(canonical_equation(sympy.fraction(e)[0]), eq)
                       for eq in system.equations)
