"""
Linear determining equations for templates with unknown coefficients
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import sympy
from sympy.polys.polyerrors import BasePolynomialError

from ..errors import NonlinearUnknownError
from ..expr_core import generators
from ..jet_calculus import Constraint
from .fields import EvolutionaryField
from .prolongation import SymmetryEngine

logger = logging.getLogger(__name__)


@dataclass
class DeterminingSolution:
    """
    Affine solution space particular + span(basis) of a determining system

    An empty basis with a zero particular solution is the trivial solution.
    """

    unknowns: List[sympy.Symbol]
    particular: Dict[str, sympy.Expr]
    basis: List[Dict[str, sympy.Expr]]
    equations: List[sympy.Expr] = field(default_factory=list)
    consistent: bool = True

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def free_unknowns(self) -> List[str]:
        """Unknowns that are the only nonzero entry of some basis vector"""
        names = []
        for vector in self.basis:
            nonzero = [k for k, v in vector.items() if v != 0]
            if len(nonzero) == 1:
                names.append(nonzero[0])
        return names


class DeterminingSolver:
    """
    Solve for unknown coefficients that make a template field a symmetry
    """

    def __init__(self, engine: SymmetryEngine):
        """
        Initialize the solver

        Args:
            engine: SymmetryEngine for the context holding the unknowns
        """
        self.engine = engine
        self.ctx = engine.ctx

    def determining_equations(self, defect: sympy.Expr,
                              unknowns: Sequence[sympy.Symbol]) -> List[sympy.Expr]:
        """
        Coefficients of the defect numerator over every non-unknown monomial

        Args:
            defect: Normalized invariance defect
            unknowns: Unknown coefficient symbols

        Returns:
            Expressions linear in the unknowns, each required to vanish

        Raises:
            NonlinearUnknownError: If an unknown enters nonlinearly or sits in the denominator
        """
        num, den = sympy.fraction(defect)
        unknown_set = set(unknowns)
        if den.free_symbols & unknown_set:
            raise NonlinearUnknownError(f"Unknown coefficients occur in the denominator {den}")
        num = sympy.expand(num)
        if num == 0:
            return []
        try:
            degree = sympy.Poly(num, *unknowns).total_degree()
        except BasePolynomialError as e:
            raise NonlinearUnknownError(f"Unknown coefficients enter non-polynomially: {e}")
        if degree > 1:
            raise NonlinearUnknownError(f"Unknown coefficients enter with degree {degree}")
        others = [g for g in generators(num, self.ctx) if not (g.free_symbols & unknown_set)]
        for g in generators(num, self.ctx):
            if g not in unknown_set and g.free_symbols & unknown_set:
                raise NonlinearUnknownError(f"Unknown coefficients occur inside {g}")
        if not others:
            return [num]
        return [sympy.expand(c) for c in sympy.Poly(num, *others).coeffs()]

    def solve(self, constraint: Constraint, template: EvolutionaryField,
              unknowns: Optional[Sequence[str]] = None,
              constraints: Optional[Sequence[Constraint]] = None) -> DeterminingSolution:
        """
        Compute the solution space of the determining system

        Args:
            constraint: Equation whose invariance is required
            template: Field linear in the unknown coefficients
            unknowns: Unknown names (defaults to all context unknowns)
            constraints: Reduction set overriding {constraint}

        Returns:
            DeterminingSolution with a basis of the solution space
        """
        names = list(unknowns) if unknowns is not None else list(self.ctx.unknowns)
        symbols = [sympy.Symbol(n) for n in names]
        report = self.engine.invariance_defect(constraint, template, constraints)
        equations = self.determining_equations(report.defect, symbols)
        logger.info(f"📊 {len(equations)} determining equation(s) in {len(symbols)} unknown(s)")

        zero = {n: sympy.Integer(0) for n in names}
        if not equations:
            basis = [{n: sympy.Integer(1 if n == m else 0) for n in names} for m in names]
            return DeterminingSolution(symbols, zero, basis, equations)

        A, b = sympy.linear_eq_to_matrix(equations, symbols)
        basis = [self._vector(names, v) for v in A.nullspace()]
        if all(entry == 0 for entry in b):
            return DeterminingSolution(symbols, zero, basis, equations)

        try:
            solution, params = A.gauss_jordan_solve(b)
        except ValueError:
            logger.warning("⚠️  Determining system is inconsistent")
            return DeterminingSolution(symbols, zero, [], equations, consistent=False)
        particular = solution.subs({p: 0 for p in params})
        return DeterminingSolution(symbols, self._vector(names, particular), basis, equations)

    @staticmethod
    def _vector(names: Sequence[str], column: sympy.Matrix) -> Dict[str, sympy.Expr]:
        return {n: column[i] for i, n in enumerate(names)}

    def instantiate(self, template: EvolutionaryField, values: Dict[str, sympy.Expr]) -> EvolutionaryField:
        """Template with unknowns replaced by values"""
        bindings = {sympy.Symbol(k): v for k, v in values.items()}
        return EvolutionaryField(sympy.expand(template.characteristic.xreplace(bindings)),
                                 template.dep, template.name)

    def verify(self, constraint: Constraint, template: EvolutionaryField,
               solution: DeterminingSolution,
               constraints: Optional[Sequence[Constraint]] = None) -> bool:
        """
        Re-run the invariance check for every basis vector

        For a homogeneous system each basis vector must be a symmetry; for an
        affine one, particular plus each basis vector.
        """
        candidates = [solution.particular]
        for vector in solution.basis:
            candidates.append({k: solution.particular[k] + v for k, v in vector.items()})
        for values in candidates:
            field_ = self.instantiate(template, values)
            if not self.engine.invariance_defect(constraint, field_, constraints).is_invariant:
                return False
        return True
