"""
Classical-invariance verdict for conditionally invariant solutions
A first-order quasilinear system invariant under an s-dimensional algebra, with
s >= k1 + 1, yields a solution invariant in the classical Lie sense
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Union

import sympy

from ..errors import AlgebraClosureError, RankingError
from ..expr_core import Context, normalize, to_dsl
from ..jet_calculus import Constraint
from .fields import EvolutionaryField, PointField, as_evolutionary
from .prolongation import SymmetryEngine

logger = logging.getLogger(__name__)

CLASSICAL_INVARIANT = 'classical-invariant'
INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class VerdictInput:
    """Facts the classical-invariance verdict is computed from"""

    s: int
    k1: int
    equation_invariant: bool
    system_invariant: bool

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"Algebra dimension must be non-negative, got {self.s}")
        if self.k1 < 1:
            raise ValueError(f"Reduced order k1 must be at least 1, got {self.k1}")


def classical_invariance_verdict(inp: VerdictInput) -> str:
    """classical-invariant iff both invariances hold and s >= k1 + 1; inconclusive otherwise"""
    if inp.equation_invariant and inp.system_invariant and inp.s >= inp.k1 + 1:
        return CLASSICAL_INVARIANT
    return INCONCLUSIVE


def _coefficient_matrix(characteristics: Sequence[sympy.Expr], ctx: Context) -> sympy.Matrix:
    """Rows of rational coefficients over the monomials of the expanded characteristics"""
    columns: Dict[sympy.Expr, int] = {}
    rows = []
    for characteristic in characteristics:
        row: Dict[int, sympy.Rational] = {}
        for term in sympy.Add.make_args(sympy.expand(normalize(characteristic, ctx))):
            if term == 0:
                continue
            coefficient, monomial = term.as_coeff_Mul()
            column = columns.setdefault(monomial, len(columns))
            row[column] = row.get(column, sympy.Integer(0)) + coefficient
        rows.append(row)
    return sympy.Matrix([[row.get(j, 0) for j in range(len(columns))] for row in rows])


def algebra_dimension(engine: SymmetryEngine,
                      algebra: Sequence[Union[PointField, EvolutionaryField]]) -> int:
    """
    Dimension of the algebra spanned by the generators

    Generators are compared through their characteristics, so the dimension is
    the rank over the rationals of their coefficient vectors. Every pairwise
    bracket must lie in that span.

    Args:
        engine: Symmetry engine of the context
        algebra: Generators, possibly linearly dependent

    Returns:
        Rank s of the generator set

    Raises:
        AlgebraClosureError: If a bracket is not a rational combination of the generators
    """
    ctx = engine.ctx
    fields = [as_evolutionary(g, ctx) for g in algebra]
    characteristics = [f.characteristic for f in fields]
    if not any(normalize(c, ctx) != 0 for c in characteristics):
        return 0
    s = _coefficient_matrix(characteristics, ctx).rank()
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            bracket = engine.commutator(fields[i], fields[j])
            if bracket.characteristic == 0:
                continue
            extended = _coefficient_matrix(characteristics + [bracket.characteristic], ctx)
            if extended.rank() > s:
                first = fields[i].name or f"Q{i + 1}"
                second = fields[j].name or f"Q{j + 1}"
                raise AlgebraClosureError(
                    f"Bracket [{first}, {second}] = {to_dsl(bracket.characteristic)} "
                    f"is not in the span of the algebra")
    logger.info(f"📐 {len(fields)} generator(s) span an algebra of dimension {s}")
    return s


class SystemInvarianceChecker:
    """
    Invariance of a first-order quasilinear system under an operator algebra

    The system is solved for a triangular set of leading first derivatives and
    every defect is reduced modulo that solved form. Only the system itself is
    used for reduction, not the original equation.
    """

    def __init__(self, engine: SymmetryEngine):
        self.engine = engine
        self.ctx = engine.ctx

    def solved_form(self, equations: Sequence[sympy.Expr]) -> List[Constraint]:
        """
        Solve each equation for its highest-ranked first derivative not yet used

        Args:
            equations: Expressions (lhs - rhs) first-order quasilinear in the primary dependent variable

        Returns:
            Solved-form constraints

        Raises:
            RankingError: If no triangular solved form exists
        """
        dep = self.ctx.primary_dep
        solved: List[Constraint] = []
        used = set()
        for equation in equations:
            expr = normalize(equation, self.ctx)
            if solved:
                expr = self.engine.constraint_set(solved).reduce(expr)
            first_order = [j for j in self.ctx.jets_in(expr, dep)
                           if self.ctx.jet_info(j)[1].order == 1 and j not in used]
            higher = [j for j in self.ctx.jets_in(expr, dep) if self.ctx.jet_info(j)[1].order > 1]
            if higher:
                raise RankingError(f"System equation {equation} is not first order")
            leader = None
            for jet in reversed(first_order):
                coefficient = normalize(sympy.diff(expr, jet), self.ctx)
                if coefficient != 0 and not (coefficient.free_symbols & set(first_order)):
                    leader = (jet, coefficient)
                    break
            if leader is None:
                raise RankingError(
                    f"System is not solvable for a triangular set of first derivatives at {equation}")
            jet, coefficient = leader
            rhs = normalize(jet - expr / coefficient, self.ctx)
            solved.append(Constraint(jet, rhs))
            used.add(jet)
        return solved

    def check(self, equations: Sequence[sympy.Expr],
              algebra: Sequence[Union[PointField, EvolutionaryField]]) -> Dict:
        """
        Check invariance of every system equation under every generator

        Args:
            equations: System equations (lhs - rhs)
            algebra: Generators

        Returns:
            Dictionary with 'invariant' and per-generator 'defects'
        """
        solved = self.solved_form(equations)
        defects = {}
        invariant = True
        for k, generator in enumerate(algebra):
            field = as_evolutionary(generator, self.ctx)
            label = field.name or f"Q{k + 1}"
            values = []
            for constraint in solved:
                report = self.engine.invariance_defect(constraint.delta, field, solved)
                values.append(report.defect)
                invariant = invariant and report.is_invariant
            defects[label] = values
        logger.info(f"{'✅' if invariant else '❌'} System invariance under {len(algebra)} generator(s): {invariant}")
        return {'invariant': invariant, 'defects': defects, 'solved_form': solved}
