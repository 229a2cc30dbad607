"""
Expression DSL parser
Lark LALR grammar plus a resolving transformer that builds sympy expressions
against a Context
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import sympy
from lark import Lark, Transformer, Tree
from lark.exceptions import UnexpectedInput, VisitError

from ..errors import ArityError, DSLSyntaxError, SymredError, UndeclaredIdentifierError
from .context import Context
from .normal_form import normalize

logger = logging.getLogger(__name__)

# Shared with the scenario grammar
EXPRESSION_RULES = r"""
?expr: sum

?sum: product
    | sum "+" product       -> add
    | sum "-" product       -> sub

?product: unary
    | product "*" unary     -> mul
    | product "/" unary     -> div

?unary: power
    | "-" unary             -> neg
    | "+" unary

?power: atom
    | atom "^" unary        -> pow

?atom: INT                                      -> number
    | NAME "[" name_list "]"                    -> jet
    | "d" "(" NAME ("," INT)+ ")" "(" arg_list ")"  -> derivative_call
    | NAME "(" arg_list ")"                     -> call
    | NAME                                      -> name
    | "(" sum ")"

name_list: NAME ("," NAME)*
arg_list: expr ("," expr)*

NAME: /[A-Za-z_][A-Za-z0-9_]*/
COMMENT: /#[^\n]*/

%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""

EXPRESSION_GRAMMAR = "expr_start: expr\n" + EXPRESSION_RULES

BUILTIN_CALLS = {'exp': sympy.exp, 'ln': sympy.log}


@lru_cache(maxsize=None)
def _expression_parser() -> Lark:
    return Lark(EXPRESSION_GRAMMAR, start='expr_start', parser='lalr',
                lexer='contextual', maybe_placeholders=False)


def syntax_error_from(e: UnexpectedInput, text: str) -> DSLSyntaxError:
    """Convert a Lark error into a DSLSyntaxError with position and excerpt"""
    try:
        context = e.get_context(text)
    except Exception:
        context = None
    message = str(e).splitlines()[0] if str(e) else type(e).__name__
    return DSLSyntaxError(message, getattr(e, 'line', None), getattr(e, 'column', None), context)


def unwrap_visit_error(e: VisitError) -> Exception:
    """Lark wraps transformer exceptions; surface the toolkit error"""
    orig = e.orig_exc
    return orig if isinstance(orig, SymredError) else e


class ExpressionResolver(Transformer):
    """
    Build sympy expressions from a parse tree, resolving names against a Context

    Local symbols (dummy variables of instantiations, previously defined
    fields) shadow context names.
    """

    def __init__(self, ctx: Context, local_symbols: Optional[Dict[str, sympy.Expr]] = None):
        super().__init__()
        self.ctx = ctx
        self.local_symbols = local_symbols or {}

    def expr_start(self, children):
        return children[0]

    def number(self, children):
        return sympy.Integer(int(children[0]))

    def name(self, children):
        token = children[0]
        name = str(token)
        if name in self.local_symbols:
            return self.local_symbols[name]
        category = self.ctx.category(name)
        if category is None:
            raise UndeclaredIdentifierError(name, token.line, token.column)
        if category == 'function':
            return self.ctx.default_application(name)
        return self.ctx.symbol(name)

    def name_list(self, children):
        return list(children)

    def arg_list(self, children):
        return list(children)

    def jet(self, children):
        token, var_tokens = children
        dep = str(token)
        if self.ctx.category(dep) not in ('dep', 'aux'):
            raise UndeclaredIdentifierError(dep, token.line, token.column)
        for v in var_tokens:
            if self.ctx.category(str(v)) != 'indep':
                raise UndeclaredIdentifierError(str(v), v.line, v.column)
        return self.ctx.jet_from_names(dep, [str(v) for v in var_tokens])

    def call(self, children):
        token, args = children
        name = str(token)
        if name in BUILTIN_CALLS:
            if len(args) != 1:
                raise ArityError(f"{name} expects 1 argument, got {len(args)}")
            return BUILTIN_CALLS[name](args[0])
        if self.ctx.category(name) != 'function':
            raise UndeclaredIdentifierError(name, token.line, token.column)
        return self.ctx.apply(name, args)

    def derivative_call(self, children):
        token = children[0]
        orders = [int(t) for t in children[1:-1]]
        args = children[-1]
        name = str(token)
        if self.ctx.category(name) != 'function':
            raise UndeclaredIdentifierError(name, token.line, token.column)
        return self.ctx.apply(name, args, orders)

    def add(self, children):
        return children[0] + children[1]

    def sub(self, children):
        return children[0] - children[1]

    def mul(self, children):
        return children[0] * children[1]

    def div(self, children):
        return children[0] / children[1]

    def neg(self, children):
        return -children[0]

    def pow(self, children):
        return sympy.Pow(children[0], children[1])


class ExpressionParser:
    """
    Parse DSL text into canonical sympy expressions
    """

    def __init__(self, ctx: Context):
        """
        Initialize the parser

        Args:
            ctx: Declarations that names resolve against
        """
        self.ctx = ctx

    def parse(self, text: str, canonical: bool = True,
              local_symbols: Optional[Dict[str, sympy.Expr]] = None) -> sympy.Expr:
        """
        Parse an expression

        Args:
            text: DSL text
            canonical: Normalize the result
            local_symbols: Names shadowing context declarations

        Returns:
            sympy expression

        Raises:
            DSLSyntaxError, UndeclaredIdentifierError, ArityError
        """
        try:
            tree = _expression_parser().parse(text)
        except UnexpectedInput as e:
            raise syntax_error_from(e, text)
        return self.resolve(tree, canonical, local_symbols)

    def resolve(self, tree: Tree, canonical: bool = True,
                local_symbols: Optional[Dict[str, sympy.Expr]] = None) -> sympy.Expr:
        """Resolve an already parsed tree"""
        try:
            expr = ExpressionResolver(self.ctx, local_symbols).transform(tree)
        except VisitError as e:
            raise unwrap_visit_error(e)
        return normalize(expr, self.ctx) if canonical else expr


def parse(text: str, ctx: Context, canonical: bool = True) -> sympy.Expr:
    """Parse DSL text against a context (module-level convenience)"""
    return ExpressionParser(ctx).parse(text, canonical)


@dataclass
class NameUsage:
    """Names found in DSL text before any declarations exist"""

    jet_vars: List[str] = field(default_factory=list)
    dependents: List[str] = field(default_factory=list)
    calls: Dict[str, int] = field(default_factory=dict)
    bare: List[str] = field(default_factory=list)


def scan_names(texts: Sequence[str]) -> NameUsage:
    """
    Collect identifiers by role from undeclared DSL text

    Args:
        texts: Expression texts

    Returns:
        NameUsage in first-appearance order
    """
    usage = NameUsage()

    def add_unique(target: List[str], value: str):
        if value not in target:
            target.append(value)

    for text in texts:
        try:
            tree = _expression_parser().parse(text)
        except UnexpectedInput as e:
            raise syntax_error_from(e, text)
        for node in tree.iter_subtrees_topdown():
            if node.data == 'jet':
                add_unique(usage.dependents, str(node.children[0]))
                for v in node.children[1].children:
                    add_unique(usage.jet_vars, str(v))
            elif node.data in ('call', 'derivative_call'):
                name = str(node.children[0])
                if name in BUILTIN_CALLS and node.data == 'call':
                    continue
                arity = len(node.children[-1].children)
                if usage.calls.setdefault(name, arity) != arity:
                    raise ArityError(f"{name} used with {usage.calls[name]} and {arity} arguments")
            elif node.data == 'name':
                add_unique(usage.bare, str(node.children[0]))
    return usage


def infer_context(texts: Sequence[str], dep: str = 'u', aux: str = 'w',
                  indep: Optional[Sequence[str]] = None,
                  params: Optional[Sequence[str]] = None,
                  reduced: Optional[Dict[str, Sequence[str]]] = None,
                  unknowns: Optional[Sequence[str]] = None) -> Context:
    """
    Build a Context for ad-hoc command-line input

    Bracketed names become independent variables, called names become
    function symbols, and remaining bare names become parameters.

    Args:
        texts: Expression texts
        dep: Primary dependent variable
        aux: Auxiliary linearization variable
        indep: Explicit independent variables (overrides inference)
        params: Explicit parameters
        reduced: Reduced functions with their arguments, declared first
        unknowns: Unknown coefficients of a determining template

    Returns:
        Context declaring every name used
    """
    usage = scan_names(texts)
    indep_vars = list(indep) if indep else list(usage.jet_vars)
    for args in (reduced or {}).values():
        indep_vars += [a for a in args if a not in indep_vars]
    if not indep_vars:
        indep_vars = ['x']
    ctx = Context(indep_vars, dep_vars=[dep], aux_vars=[aux] if aux else [])
    for name, args in (reduced or {}).items():
        ctx.add_function(name, default_args=list(args), reduced=True)
    for name in params or []:
        ctx.add_param(name)
    for name in unknowns or []:
        ctx.add_unknown(name)
    for name, arity in usage.calls.items():
        if not ctx.is_declared(name):
            ctx.add_function(name, arity)
    for name in usage.bare:
        if not ctx.is_declared(name):
            ctx.add_param(name)
    logger.debug(f"Inferred {ctx}")
    return ctx
