"""
Ansatz substitution and collection of the reduced system
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.polys.polyerrors import BasePolynomialError

from ..errors import CollectionError
from ..expr_core import Context, is_zero, normalize, to_dsl
from ..jet_calculus import Constraint, JetSpace
from ..symmetry_engine import SymmetryEngine
from .ansatz import Ansatz

logger = logging.getLogger(__name__)


@dataclass
class ReducedSystem:
    """
    Equations for the reduced functions, each required to vanish

    terms holds every collected (monomial, coefficient) pair; their weighted
    sum reconstructs the substituted expression.
    """

    equations: List[sympy.Expr]
    basis: List[sympy.Expr]
    zero_set: List[sympy.Expr]
    ansatz: Ansatz
    terms: List[Tuple[sympy.Expr, sympy.Expr]] = field(default_factory=list)

    @property
    def k1(self) -> int:
        return len(self.equations)

    @property
    def conforms(self) -> bool:
        """k1 <= m'"""
        return self.k1 <= self.ansatz.m_prime

    def reconstruct(self) -> sympy.Expr:
        return sympy.Add(*[m * c for m, c in self.terms])

    def to_dsl(self) -> List[str]:
        return [to_dsl(e) for e in self.equations]


def canonical_equation(expr: sympy.Expr) -> sympy.Expr:
    """Primitive integer content with a fixed sign"""
    _, primitive = sympy.expand(expr).as_content_primitive()
    primitive = sympy.expand(primitive)
    if primitive.could_extract_minus_sign():
        primitive = sympy.expand(-primitive)
    return primitive


def proportional(a: sympy.Expr, b: sympy.Expr) -> bool:
    ratio = sympy.cancel(a / b)
    return ratio.is_number and ratio != 0


class AnsatzReducer:
    """
    Reduce a PDE to a system for the ansatz's reduced functions
    """

    def __init__(self, ctx: Context, order_cap: int = 12):
        """
        Initialize the reducer

        Args:
            ctx: Context declaring the ansatz atoms and reduced functions
            order_cap: Order cap for constraint reduction
        """
        self.ctx = ctx
        self.jets = JetSpace(ctx)
        self.engine = SymmetryEngine(ctx, order_cap)

    def apply_ansatz(self, pde: sympy.Expr, ansatz: Ansatz) -> sympy.Expr:
        """
        Substitute u_J -> D_J(F) and normalize in the atom algebra

        Args:
            pde: Equation expression (= 0)
            ansatz: Ansatz

        Returns:
            Normalized expression in x, atoms, reduced functions and parameters

        Raises:
            MissingDerivativeRuleError: If the atom rules do not close
        """
        return self.jets.evaluate_on(pde, ansatz.dep, ansatz.expression)

    def collect_system(self, expr: sympy.Expr, ansatz: Ansatz) -> ReducedSystem:
        """
        Split an ansatz-substituted expression into equations for the reduced functions

        The numerator is grouped by monomials in the eliminated-variable-dependent
        atoms; each group is divided by the common denominator, cancelled, and its
        numerator grouped again by powers of the eliminated variable.

        Args:
            expr: Output of apply_ansatz
            ansatz: Ansatz

        Returns:
            ReducedSystem with distinct canonical equations

        Raises:
            CollectionError: If a coefficient still depends on the eliminated variable
        """
        x1 = sympy.Symbol(ansatz.eliminated_var)
        atoms = [a.symbol for a in ansatz.x_dependent_atoms(self.ctx)]
        num, den = sympy.fraction(normalize(expr, self.ctx))
        num = sympy.expand(num)

        zero_set: List[sympy.Expr] = []

        def record_zero(d: sympy.Expr):
            if d.is_number:
                return
            d = canonical_equation(d)
            if not any(proportional(d, z) for z in zero_set):
                zero_set.append(d)

        groups: List[Tuple[sympy.Expr, sympy.Expr]] = []
        if den.free_symbols & set(atoms):
            record_zero(den)
            groups = self._group(num, atoms + [x1], atoms + [x1])
            groups = [(m, c / den) for m, c in groups]
        else:
            for monomial, coefficient in self._group(num, atoms, atoms):
                c_num, c_den = sympy.fraction(sympy.cancel(coefficient / den))
                record_zero(c_den)
                for power, sub in self._group(sympy.expand(c_num), [x1], [x1] + atoms):
                    groups.append((monomial * power, sub / c_den))

        terms = []
        equations: List[sympy.Expr] = []
        basis: List[sympy.Expr] = []
        for monomial, coefficient in groups:
            terms.append((monomial, coefficient))
            c_num, _ = sympy.fraction(sympy.cancel(coefficient))
            equation = canonical_equation(c_num)
            if equation == 0:
                continue
            if any(proportional(equation, e) for e in equations):
                continue
            equations.append(equation)
            basis.append(monomial)

        system = ReducedSystem(equations, basis, zero_set, ansatz, terms)
        logger.info(f"📊 Reduced system: k1 = {system.k1}, m' = {ansatz.m_prime}")
        return system

    def _group(self, expr: sympy.Expr, gens: List[sympy.Expr],
               forbidden: List[sympy.Expr]) -> List[Tuple[sympy.Expr, sympy.Expr]]:
        """(monomial, coefficient) pairs in ascending monomial order, checked for leftovers"""
        if not gens:
            pairs = [(sympy.Integer(1), expr)]
        else:
            try:
                poly = sympy.Poly(expr, *gens)
            except BasePolynomialError as e:
                raise CollectionError(
                    f"Expression is not polynomial in {', '.join(str(g) for g in gens)}: {e}")
            pairs = []
            for exponents, coefficient in sorted(poly.terms(), key=lambda t: t[0][::-1]):
                monomial = sympy.Mul(*[g ** k for g, k in zip(gens, exponents)])
                pairs.append((monomial, coefficient))
        forbidden_set = set(forbidden)
        for monomial, coefficient in pairs:
            if coefficient.free_symbols & forbidden_set:
                raise CollectionError(
                    f"Coefficient of {to_dsl(monomial)} still depends on "
                    f"{', '.join(str(s) for s in coefficient.free_symbols & forbidden_set)}: {to_dsl(coefficient)}")
        return pairs

    def reduce(self, pde: sympy.Expr, ansatz: Ansatz) -> ReducedSystem:
        """apply_ansatz followed by collect_system"""
        return self.collect_system(self.apply_ansatz(pde, ansatz), ansatz)

    def solves(self, constraint: Constraint, ansatz: Ansatz) -> bool:
        """True iff the ansatz satisfies the constraint identically"""
        return is_zero(self.apply_ansatz(constraint.delta, ansatz), self.ctx)

    def parameter_derivative(self, ansatz: Ansatz, name: str) -> sympy.Expr:
        """
        dF/dphi with defined atoms differentiated implicitly through their relations

        Args:
            ansatz: Ansatz
            name: Reduced-function name

        Returns:
            Normalized derivative of F with respect to the application phi(...)
        """
        phi = self.ctx.default_application(name)
        F = ansatz.expression
        result = sympy.diff(F, phi)
        for atom in self.ctx.atoms.values():
            if atom.relation is None or not F.has(atom.symbol):
                continue
            d_atom = -sympy.diff(atom.relation, phi) / sympy.diff(atom.relation, atom.symbol)
            result += sympy.diff(F, atom.symbol) * d_atom
        return normalize(result, self.ctx)

    def basis_check(self, constraint: Constraint, ansatz: Ansatz) -> Dict[str, bool]:
        """
        Check that every dF/dphi_i solves the linearized invariant ODE along F

        Args:
            constraint: Invariant ODE the ansatz solves
            ansatz: Ansatz

        Returns:
            Reduced-function name -> whether its derivative solves the linearization
        """
        results = {}
        for name in ansatz.reduced_functions:
            w = self.parameter_derivative(ansatz, name)
            residual = self.engine.linearization_residual(constraint.delta, ansatz.expression, w)
            results[name] = residual == 0
            if residual != 0:
                logger.warning(f"⚠️  dF/d{name} leaves linearization residual {to_dsl(residual)}")
        return results
