"""
Tests for prolongation, invariance defects, linearization, commutators,
determining equations and the classical-invariance verdict
"""

import pytest
import sympy

from src.errors import (
    AlgebraClosureError,
    ContextError,
    MissingBindingError,
    NonlinearUnknownError,
    RankingError,
)
from src.expr_core import Context, is_zero, parse
from src.jet_calculus import Constraint
from src.symmetry_engine import (
    CLASSICAL_INVARIANT,
    INCONCLUSIVE,
    DeterminingSolver,
    EvolutionaryField,
    PointField,
    SymmetryEngine,
    SystemInvarianceChecker,
    VerdictInput,
    algebra_dimension,
    classical_invariance_verdict,
)
from src.symmetry_engine.prolongation import MAX_CACHED_FIELDS


@pytest.fixture
def cubic_ctx():
    ctx = Context(['t', 'x'], params=['A', 'B'], unknowns=['c1', 'c2', 'c3'])
    ctx.add_function('h', 1)
    return ctx


@pytest.fixture
def cubic(cubic_ctx):
    return Constraint(sympy.Symbol('u[x,x]'), parse('u[x]^3', cubic_ctx))


def field(ctx, text, name=None):
    return EvolutionaryField(parse(text, ctx), 'u', name)


class TestInvariance:

    @pytest.mark.parametrize('characteristic', [
        'u*u[x]',
        'h(u + 1/u[x])',
        'u[t] - (A/u[x]^3 + B/u[x]^2)*u[x,x]',
        'u[x]',
        '1',
    ])
    def test_admitted_fields(self, cubic_ctx, cubic, characteristic):
        report = SymmetryEngine(cubic_ctx).invariance_defect(cubic, field(cubic_ctx, characteristic))
        assert report.is_invariant
        assert report.defect == 0

    def test_non_symmetry_defect(self, cubic_ctx, cubic):
        report = SymmetryEngine(cubic_ctx).invariance_defect(cubic, field(cubic_ctx, 'u'))
        assert not report.is_invariant
        assert is_zero(report.defect + 2 * sympy.Symbol('u[x]') ** 3, cubic_ctx)
        assert report.factorization.monomial == sympy.Symbol('u[x]') ** 3

    def test_defect_as_constant_multiple(self, cubic_ctx, cubic):
        report = SymmetryEngine(cubic_ctx).invariance_defect(cubic, field(cubic_ctx, 'u'))
        ux = sympy.Symbol('u[x]')
        assert report.constant_multiple(ux ** 3, cubic_ctx) == -2
        assert report.divisible_by(-ux ** 3, cubic_ctx)
        assert report.constant_multiple(ux ** 2, cubic_ctx) is None
        assert not report.divisible_by(sympy.Symbol('u') * ux ** 3, cubic_ctx)

    def test_prolongation_of_point_field(self, ctx_tx):
        engine = SymmetryEngine(ctx_tx)
        translation = PointField((sympy.Integer(1), sympy.Integer(0)), sympy.Integer(0))
        assert translation.evolutionary(ctx_tx).characteristic == -sympy.Symbol('u[t]')
        assert engine.prolong_apply(translation, sympy.Symbol('u[x]')) == -sympy.Symbol('u[t,x]')

    def test_point_field_rejects_derivatives(self, ctx_tx):
        bad = PointField((sympy.Symbol('u[x]'), sympy.Integer(0)), sympy.Integer(0))
        with pytest.raises(ContextError):
            bad.validate(ctx_tx)

    def test_point_field_needs_every_coefficient(self, ctx_tx):
        with pytest.raises(ContextError):
            PointField((sympy.Integer(1),), sympy.Integer(0)).validate(ctx_tx)

    def test_liouville_point_symmetry(self, ctx_xy):
        ctx_xy.add_function('f', default_args=['x'])
        ctx_xy.add_function('g', default_args=['y'])
        liouville = Constraint(sympy.Symbol('u[x,y]'), parse('2*exp(u)', ctx_xy))
        q = PointField((parse('f', ctx_xy), parse('g', ctx_xy)),
                       parse('-(d(f,1)(x) + d(g,1)(y))', ctx_xy))
        assert SymmetryEngine(ctx_xy).invariance_defect(liouville, q).is_invariant

    def test_derivative_cache_is_bounded(self, ctx_tx):
        engine = SymmetryEngine(ctx_tx)
        u = sympy.Symbol('u')
        for k in range(MAX_CACHED_FIELDS + 5):
            engine.prolong_apply(EvolutionaryField(u ** (k + 1)), sympy.Symbol('u[x]'))
        assert len(engine._derivative_caches) == MAX_CACHED_FIELDS
        image = engine.prolong_apply(EvolutionaryField(u), sympy.Symbol('u[x]'))
        assert image == sympy.Symbol('u[x]')

    def test_field_order(self, cubic_ctx):
        assert field(cubic_ctx, 'u[t] - u[x,x]/u[x]^3').order(cubic_ctx) == 2
        assert field(cubic_ctx, 'u^2').order(cubic_ctx) == 0


class TestLinearization:

    def test_liouville(self, ctx_xy):
        delta = parse('u[x,y] - 2*exp(u)', ctx_xy)
        linear = SymmetryEngine(ctx_xy).frechet(delta)
        assert is_zero(linear - parse('w[x,y] - 2*exp(u)*w', ctx_xy), ctx_xy)

    def test_linear_in_aux_jets(self, cubic_ctx):
        linear = SymmetryEngine(cubic_ctx).frechet(parse('u[x,x] - u[x]^3', cubic_ctx))
        assert is_zero(linear - parse('w[x,x] - 3*u[x]^2*w[x]', cubic_ctx), cubic_ctx)

    def test_map_solution(self, ctx_xy):
        engine = SymmetryEngine(ctx_xy)
        delta = parse('u[x,y] - 2*exp(u)', ctx_xy)
        seed = parse('ln(1/(x + y)^2)', ctx_xy)
        shift = EvolutionaryField(parse('u[x] - u[y]', ctx_xy))
        image = engine.map_solution(shift, seed)
        assert image == 0
        conformal = EvolutionaryField(parse('-2*x - x^2*u[x]', ctx_xy))
        image = engine.map_solution(conformal, seed)
        assert image != 0
        assert engine.linearization_residual(delta, seed, image) == 0

    def test_map_solution_missing_binding(self, ctx_x):
        engine = SymmetryEngine(ctx_x)
        with pytest.raises(MissingBindingError):
            engine.map_solution(EvolutionaryField(parse('u[x,x]', ctx_x)),
                                {sympy.Symbol('u[x]'): sympy.Integer(1)})


class TestCommutator:

    def test_known_bracket(self, cubic_ctx):
        engine = SymmetryEngine(cubic_ctx)
        bracket = engine.commutator(field(cubic_ctx, 'u*u[x]'), field(cubic_ctx, 'h(u + 1/u[x])'))
        expected = parse('-d(h,1)(u + 1/u[x]) - h(u + 1/u[x])*u[x]', cubic_ctx)
        assert is_zero(bracket.characteristic - expected, cubic_ctx)

    def test_bracket_of_symmetries_is_a_symmetry(self, cubic_ctx, cubic):
        engine = SymmetryEngine(cubic_ctx)
        bracket = engine.commutator(field(cubic_ctx, 'u*u[x]'), field(cubic_ctx, 'h(u + 1/u[x])'))
        assert engine.invariance_defect(cubic, bracket).is_invariant

    def test_translations_commute(self, ctx_tx):
        engine = SymmetryEngine(ctx_tx)
        bracket = engine.commutator(EvolutionaryField(sympy.Symbol('u[x]')),
                                    EvolutionaryField(sympy.Symbol('u[t]')))
        assert bracket.characteristic == 0


class TestDeterminingEquations:

    def test_one_dimensional_space(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        template = field(cubic_ctx, 'c1*u*u[x] + c2*u^2')
        solution = solver.solve(cubic, template, ['c1', 'c2'])
        assert solution.consistent
        assert solution.dimension == 1
        assert solution.free_unknowns() == ['c1']
        assert solver.verify(cubic, template, solution)

    def test_trivial_space(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        solution = solver.solve(cubic, field(cubic_ctx, 'c3*u'), ['c3'])
        assert solution.dimension == 0
        assert solution.particular == {'c3': 0}

    def test_unconstrained_unknowns(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        solution = solver.solve(cubic, field(cubic_ctx, 'c1*u[x] + c2'), ['c1', 'c2'])
        assert solution.dimension == 2
        assert solution.equations == []

    def test_affine_template(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        template = field(cubic_ctx, 'u + c1*u')
        solution = solver.solve(cubic, template, ['c1'])
        assert solution.consistent
        assert solution.particular == {'c1': -1}
        assert solver.verify(cubic, template, solution)

    def test_inconsistent_system(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        solution = solver.solve(cubic, field(cubic_ctx, 'u + c1*u^2'), ['c1'])
        assert not solution.consistent

    def test_nonlinear_unknown(self, cubic_ctx, cubic):
        solver = DeterminingSolver(SymmetryEngine(cubic_ctx))
        with pytest.raises(NonlinearUnknownError):
            solver.solve(cubic, field(cubic_ctx, 'c1^2*u'), ['c1'])


class TestClassicalInvariance:

    @pytest.fixture
    def heat_ctx(self):
        return Context(['t', 'x'])

    @pytest.fixture
    def algebra(self):
        one, zero = sympy.Integer(1), sympy.Integer(0)
        return [
            PointField((one, zero), zero, name='T'),
            PointField((zero, one), zero, name='X'),
            PointField((zero, zero), sympy.Symbol('u'), name='S'),
        ]

    def test_verdict_rule(self):
        assert classical_invariance_verdict(VerdictInput(3, 2, True, True)) == CLASSICAL_INVARIANT
        assert classical_invariance_verdict(VerdictInput(2, 2, True, True)) == INCONCLUSIVE
        assert classical_invariance_verdict(VerdictInput(5, 1, False, True)) == INCONCLUSIVE
        assert classical_invariance_verdict(VerdictInput(5, 1, True, False)) == INCONCLUSIVE

    def test_verdict_input_validation(self):
        with pytest.raises(ValueError):
            VerdictInput(3, 0, True, True)
        with pytest.raises(ValueError):
            VerdictInput(-1, 1, True, True)

    def test_stationary_system_invariant(self, heat_ctx, algebra):
        checker = SystemInvarianceChecker(SymmetryEngine(heat_ctx))
        result = checker.check([sympy.Symbol('u[t]')], algebra)
        assert result['invariant']
        assert set(result['defects']) == {'T', 'X', 'S'}

    def test_system_not_invariant(self, heat_ctx):
        checker = SystemInvarianceChecker(SymmetryEngine(heat_ctx))
        result = checker.check([sympy.Symbol('u[t]')], [EvolutionaryField(sympy.Symbol('t'))])
        assert not result['invariant']

    def test_solved_form(self, heat_ctx):
        checker = SystemInvarianceChecker(SymmetryEngine(heat_ctx))
        solved = checker.solved_form([parse('u[t] - u*u[x]', heat_ctx)])
        assert solved[0].leading == sympy.Symbol('u[t]')
        assert is_zero(solved[0].rhs - parse('u*u[x]', heat_ctx), heat_ctx)

    def test_higher_order_system_rejected(self, heat_ctx):
        checker = SystemInvarianceChecker(SymmetryEngine(heat_ctx))
        with pytest.raises(RankingError):
            checker.solved_form([parse('u[x,x]', heat_ctx)])

    def test_algebra_dimension(self, heat_ctx, algebra):
        engine = SymmetryEngine(heat_ctx)
        assert algebra_dimension(engine, algebra) == 3
        assert algebra_dimension(engine, []) == 0

    def test_repeated_generator_does_not_raise_dimension(self, heat_ctx, algebra):
        one, zero = sympy.Integer(1), sympy.Integer(0)
        doubled = PointField((2 * one, zero), zero, name='T2')
        generators = [algebra[0], doubled, algebra[1]]
        assert algebra_dimension(SymmetryEngine(heat_ctx), generators) == 2

    def test_algebra_must_close(self, heat_ctx, algebra):
        zero = sympy.Integer(0)
        shift = PointField((zero, zero), sympy.Symbol('x'), name='G')
        with pytest.raises(AlgebraClosureError):
            algebra_dimension(SymmetryEngine(heat_ctx), [algebra[1], shift])
