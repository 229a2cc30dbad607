"""
Declaration context for expressions
Independent and dependent variables, parameters, function symbols and defined atoms
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from ..errors import ArityError, ContextError, UndeclaredIdentifierError
from .functions import SymbolFunction, apply_function
from .multi_index import MultiIndex

logger = logging.getLogger(__name__)

_JET_NAME = re.compile(r'^([A-Za-z_][A-Za-z0-9_]*)\[([A-Za-z0-9_,]*)\]$')


@dataclass
class FunctionSymbol:
    """A declared smooth function symbol"""

    name: str
    arity: int
    default_args: Optional[Tuple[str, ...]] = None
    reduced: bool = False


@dataclass
class DefinedAtom:
    """
    Atom with user-declared total-derivative rules and an algebraic relation

    The relation is a polynomial in the atom, monic, and means ``relation == 0``
    """

    name: str
    symbol: sympy.Symbol
    relation: Optional[sympy.Expr] = None
    rules: Dict[str, sympy.Expr] = field(default_factory=dict)

    @property
    def degree(self) -> int:
        if self.relation is None:
            return 0
        return sympy.degree(self.relation, self.symbol)


class Context:
    """
    Name table shared by every module

    Holds the ordered independent variables, dependent variables (including the
    auxiliary linearization variable), commuting parameters, unknown
    coefficients, function symbols and defined atoms.
    """

    def __init__(self, indep_vars: Sequence[str], dep_vars: Sequence[str] = ('u',),
                 aux_vars: Sequence[str] = ('w',), params: Sequence[str] = (),
                 unknowns: Sequence[str] = (), ln_exp_rule: bool = True):
        """
        Initialize the context

        Args:
            indep_vars: Ordered independent-variable names
            dep_vars: Dependent-variable names; the first is the primary unknown
            aux_vars: Auxiliary dependent variables (linearization variable w)
            params: Named commuting constants
            unknowns: Unknown coefficients for determining-equation templates
            ln_exp_rule: Whether ln(exp(v)) rewrites to v
        """
        self.indep_vars: List[str] = []
        self.dep_vars: List[str] = []
        self.aux_vars: List[str] = []
        self.params: List[str] = []
        self.unknowns: List[str] = []
        self.functions: Dict[str, FunctionSymbol] = {}
        self.atoms: Dict[str, DefinedAtom] = {}
        self.ln_exp_rule = ln_exp_rule
        self._categories: Dict[str, str] = {}
        self._jet_info_cache: Dict[str, Optional[Tuple[str, MultiIndex]]] = {}

        for name in indep_vars:
            self._declare(name, 'indep')
            self.indep_vars.append(name)
        for name in dep_vars:
            self._declare(name, 'dep')
            self.dep_vars.append(name)
        for name in aux_vars:
            self._declare(name, 'aux')
            self.aux_vars.append(name)
        for name in params:
            self.add_param(name)
        for name in unknowns:
            self.add_unknown(name)

    # ------------------------------------------------------------------
    # Declarations
    # ------------------------------------------------------------------

    def _declare(self, name: str, category: str):
        if name in self._categories:
            raise ContextError(
                f"Name '{name}' declared twice ({self._categories[name]} and {category})")
        if name in ('d', 'D', 'exp', 'ln'):
            raise ContextError(f"'{name}' is reserved")
        self._categories[name] = category
        self._jet_info_cache.clear()

    def add_param(self, name: str):
        self._declare(name, 'param')
        self.params.append(name)

    def add_unknown(self, name: str):
        self._declare(name, 'unknown')
        self.unknowns.append(name)

    def add_function(self, name: str, arity: Optional[int] = None,
                     default_args: Optional[Sequence[str]] = None, reduced: bool = False):
        """
        Declare a function symbol

        Args:
            name: Function-symbol name
            arity: Number of arguments (taken from default_args when omitted)
            default_args: Variables a bare use of the name is applied to
            reduced: Whether this is an unknown function of a reduction ansatz
        """
        if default_args is not None:
            default_args = tuple(default_args)
            for arg in default_args:
                if arg not in self.indep_vars:
                    raise ContextError(
                        f"Default argument '{arg}' of {name} is not an independent variable")
            if arity is not None and arity != len(default_args):
                raise ArityError(f"{name} declared with arity {arity} and {len(default_args)} arguments")
            arity = len(default_args)
        if arity is None or arity < 1:
            raise ArityError(f"Function symbol {name} needs a positive arity")
        self._declare(name, 'function')
        self.functions[name] = FunctionSymbol(name, arity, default_args, reduced)

    def add_atom(self, name: str) -> DefinedAtom:
        """Declare a defined atom; relation and rules are attached afterwards"""
        self._declare(name, 'atom')
        atom = DefinedAtom(name, sympy.Symbol(name))
        self.atoms[name] = atom
        return atom

    def set_atom_relation(self, name: str, relation: sympy.Expr):
        """
        Attach the algebraic relation ``relation == 0`` to a defined atom

        Args:
            name: Atom name
            relation: Expression polynomial in the atom
        """
        atom = self.atom(name)
        try:
            poly = sympy.Poly(sympy.expand(relation), atom.symbol)
        except sympy.PolynomialError as e:
            raise ContextError(f"Relation of atom {name} is not polynomial in {name}: {e}")
        if poly.degree() < 1:
            raise ContextError(f"Relation of atom {name} does not involve {name}")
        lead = poly.LC()
        if lead.free_symbols or isinstance(lead, SymbolFunction) or lead.atoms(SymbolFunction):
            raise ContextError(f"Relation of atom {name} must have a constant leading coefficient")
        atom.relation = sympy.expand(relation / lead)

    def set_atom_rule(self, name: str, var: str, rule: sympy.Expr):
        """Attach the total derivative D_var(atom) = rule"""
        atom = self.atom(name)
        if var not in self.indep_vars:
            raise UndeclaredIdentifierError(var)
        atom.rules[var] = rule

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def category(self, name: str) -> Optional[str]:
        return self._categories.get(name)

    def is_declared(self, name: str) -> bool:
        return name in self._categories

    @property
    def primary_dep(self) -> str:
        return self.dep_vars[0]

    @property
    def n(self) -> int:
        return len(self.indep_vars)

    def indep_index(self, name: str) -> int:
        try:
            return self.indep_vars.index(name)
        except ValueError:
            raise UndeclaredIdentifierError(name)

    def symbol(self, name: str) -> sympy.Symbol:
        """Symbol for an independent variable, parameter, unknown or defined atom"""
        category = self._categories.get(name)
        if category in ('indep', 'param', 'unknown', 'atom'):
            return sympy.Symbol(name)
        if category in ('dep', 'aux'):
            return self.jet(name, MultiIndex.zero(self.n))
        raise UndeclaredIdentifierError(name)

    def indep_symbols(self) -> List[sympy.Symbol]:
        return [sympy.Symbol(v) for v in self.indep_vars]

    def param_symbols(self) -> List[sympy.Symbol]:
        return [sympy.Symbol(p) for p in self.params]

    def unknown_symbols(self) -> List[sympy.Symbol]:
        return [sympy.Symbol(p) for p in self.unknowns]

    def function(self, name: str) -> FunctionSymbol:
        if name not in self.functions:
            raise UndeclaredIdentifierError(name)
        return self.functions[name]

    def atom(self, name: str) -> DefinedAtom:
        if name not in self.atoms:
            raise UndeclaredIdentifierError(name)
        return self.atoms[name]

    def atom_for(self, sym: sympy.Basic) -> Optional[DefinedAtom]:
        if isinstance(sym, sympy.Symbol):
            atom = self.atoms.get(sym.name)
            if atom is not None and atom.symbol == sym:
                return atom
        return None

    # ------------------------------------------------------------------
    # Jet variables
    # ------------------------------------------------------------------

    def jet(self, dep: str, index: MultiIndex) -> sympy.Symbol:
        """
        Jet variable u_J as a sympy Symbol named in DSL spelling

        Args:
            dep: Dependent or auxiliary variable name
            index: Multi-index aligned with indep_vars

        Returns:
            Symbol ``u`` for the zero index, otherwise ``u[x,x,t]`` in variable order
        """
        if self._categories.get(dep) not in ('dep', 'aux'):
            raise UndeclaredIdentifierError(dep)
        if len(index) != self.n:
            raise ValueError(f"Multi-index {index.counts} does not match {self.n} variables")
        if index.order == 0:
            return sympy.Symbol(dep)
        names = ','.join(self.indep_vars[i] for i in index.steps())
        return sympy.Symbol(f"{dep}[{names}]")

    def jet_from_names(self, dep: str, var_names: Iterable[str]) -> sympy.Symbol:
        counts = [0] * self.n
        for v in var_names:
            counts[self.indep_index(v)] += 1
        return self.jet(dep, MultiIndex(tuple(counts)))

    def jet_info(self, sym: sympy.Basic) -> Optional[Tuple[str, MultiIndex]]:
        """(dependent variable, multi-index) for a jet Symbol, or None"""
        if not isinstance(sym, sympy.Symbol):
            return None
        name = sym.name
        if name not in self._jet_info_cache:
            self._jet_info_cache[name] = self._parse_jet_name(name)
        return self._jet_info_cache[name]

    def _parse_jet_name(self, name: str) -> Optional[Tuple[str, MultiIndex]]:
        if self._categories.get(name) in ('dep', 'aux'):
            return name, MultiIndex.zero(self.n)
        match = _JET_NAME.match(name)
        if not match or self._categories.get(match.group(1)) not in ('dep', 'aux'):
            return None
        counts = [0] * self.n
        for v in match.group(2).split(','):
            if v not in self.indep_vars:
                return None
            counts[self.indep_vars.index(v)] += 1
        return match.group(1), MultiIndex(tuple(counts))

    def jets_in(self, expr: sympy.Expr, dep: Optional[str] = None) -> List[sympy.Symbol]:
        """Jet variables of expr (optionally of one dependent variable), ranked"""
        found = []
        for sym in expr.free_symbols:
            info = self.jet_info(sym)
            if info and (dep is None or info[0] == dep):
                found.append(sym)
        return sorted(found, key=self.atom_sort_key)

    # ------------------------------------------------------------------
    # Function applications
    # ------------------------------------------------------------------

    def apply(self, name: str, args: Sequence[sympy.Expr],
              orders: Optional[Sequence[int]] = None) -> sympy.Expr:
        """Apply a declared function symbol, checking arity"""
        fsym = self.function(name)
        if len(args) != fsym.arity:
            raise ArityError(f"{name} expects {fsym.arity} argument(s), got {len(args)}")
        if orders is None:
            orders = (0,) * fsym.arity
        if len(orders) != fsym.arity:
            raise ArityError(f"d({name},...) needs {fsym.arity} derivative order(s), got {len(orders)}")
        return apply_function(name, tuple(orders), args)

    def default_application(self, name: str) -> sympy.Expr:
        """Bare use of a function symbol declared with default arguments"""
        fsym = self.function(name)
        if fsym.default_args is None:
            raise ArityError(f"Function symbol {name} has no default arguments; write {name}(...)")
        return self.apply(name, [sympy.Symbol(a) for a in fsym.default_args])

    def reduced_functions(self) -> List[FunctionSymbol]:
        return [f for f in self.functions.values() if f.reduced]

    # ------------------------------------------------------------------
    # Deterministic atom order
    # ------------------------------------------------------------------

    def atom_sort_key(self, atom: sympy.Basic):
        """
        Global order: independent variables < parameters < jet variables <
        function applications < defined atoms < anything else
        """
        if isinstance(atom, sympy.Symbol):
            category = self._categories.get(atom.name)
            if category == 'indep':
                return (0, self.indep_vars.index(atom.name), ())
            if category in ('param', 'unknown'):
                ordered = self.params + self.unknowns
                return (1, ordered.index(atom.name), ())
            info = self.jet_info(atom)
            if info is not None:
                dep_order = (self.dep_vars + self.aux_vars).index(info[0])
                return (2, dep_order, info[1].rank_key())
            if category == 'atom':
                return (4, list(self.atoms).index(atom.name), ())
        if isinstance(atom, SymbolFunction):
            return (3, 0, (atom.symbol_name, atom.orders, sympy.default_sort_key(atom)))
        return (5, 0, (sympy.default_sort_key(atom),))

    def sort_atoms(self, atoms: Iterable[sympy.Basic]) -> List[sympy.Basic]:
        return sorted(set(atoms), key=self.atom_sort_key)

    def __repr__(self) -> str:
        return (f"Context(indep={self.indep_vars}, dep={self.dep_vars}, aux={self.aux_vars}, "
                f"params={self.params}, functions={list(self.functions)}, atoms={list(self.atoms)})")
