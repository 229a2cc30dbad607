"""
General-solution ansatz u = F(x, phi_1, ..., phi_m') with reduced unknown functions
"""

import logging
from dataclasses import dataclass
from typing import List, Set, Tuple

import sympy

from ..errors import ContextError
from ..expr_core import Context, DefinedAtom

logger = logging.getLogger(__name__)


@dataclass
class Ansatz:
    """
    Substitution for the primary dependent variable

    The reduced functions depend on every independent variable except one,
    the eliminated variable.
    """

    dep: str
    expression: sympy.Expr
    reduced_functions: Tuple[str, ...]
    reduced_vars: Tuple[str, ...]
    eliminated_var: str

    @property
    def m_prime(self) -> int:
        return len(self.reduced_functions)

    @classmethod
    def from_context(cls, ctx: Context, expression: sympy.Expr, dep: str = None) -> 'Ansatz':
        """
        Build an ansatz from the context's reduced function declarations

        Args:
            ctx: Context declaring reduced functions with default arguments
            expression: F
            dep: Dependent variable replaced (defaults to the primary one)

        Returns:
            Ansatz

        Raises:
            ContextError: If the reduced functions do not leave exactly one variable out
        """
        functions = ctx.reduced_functions()
        if not functions:
            raise ContextError("Ansatz needs at least one reduced function")
        reduced_vars: List[str] = []
        for f in functions:
            if f.default_args is None:
                raise ContextError(f"Reduced function {f.name} needs declared arguments")
            for arg in f.default_args:
                if arg not in reduced_vars:
                    reduced_vars.append(arg)
        eliminated = [v for v in ctx.indep_vars if v not in reduced_vars]
        if len(eliminated) != 1:
            raise ContextError(
                f"Reduced functions must depend on all but one independent variable; "
                f"left out: {eliminated or 'none'}")
        ordered = tuple(v for v in ctx.indep_vars if v in reduced_vars)
        return cls(dep or ctx.primary_dep, expression, tuple(f.name for f in functions),
                   ordered, eliminated[0])

    def x_dependent_atoms(self, ctx: Context) -> List[DefinedAtom]:
        """
        Atoms that reach the eliminated variable through relations or rules

        Computed as a fixed point: an atom is dependent if its derivative in the
        variable is nonzero, or its relation or a rule mentions the variable or
        an already dependent atom.
        """
        x1 = sympy.Symbol(self.eliminated_var)
        dependent: Set[str] = set()
        changed = True
        while changed:
            changed = False
            for atom in ctx.atoms.values():
                if atom.name in dependent:
                    continue
                sources = [atom.relation] if atom.relation is not None else []
                sources += list(atom.rules.values())
                names = {s.name for src in sources for s in src.free_symbols}
                moves = atom.rules.get(x1.name, sympy.Integer(0)) != 0
                if moves or x1.name in names or names & dependent:
                    dependent.add(atom.name)
                    changed = True
        return [a for a in ctx.atoms.values() if a.name in dependent]
