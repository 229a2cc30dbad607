"""
Scenario file loader
Parses the scenario DSL completely, declares every name, resolves every
expression and cross-reference, and only then hands the Scenario to the runner
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import sympy
from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedInput

from ..errors import ContextError, ScenarioError, SymredError
from ..expr_core import Context, ExpressionParser
from ..expr_core.parser import EXPRESSION_RULES, syntax_error_from
from ..jet_calculus import Constraint, JetSpace
from ..numeric_verify import FunctionInstantiation, NumericScenario, TimeGrid
from ..reduction import Ansatz
from ..symmetry_engine import EvolutionaryField, PointField, SymmetryEngine

logger = logging.getLogger(__name__)

SCENARIO_RULES = r"""
scenario: statement*

?statement: indep_decl | dep_decl | aux_decl | param_decl | unknown_decl
    | func_decl | reduced_decl | atom_decl | rule_decl | rewrite_decl
    | constraint_decl | equation_decl | field_decl | pointfield_decl
    | ansatz_decl | system_decl | solution_decl | numeric_block
    | check_stmt | determine_stmt | linearize_stmt | map_stmt | commutator_stmt
    | reduce_stmt | verify_stmt | basis_stmt | integrate_stmt | convergence_stmt
    | residual_stmt | roundtrip_stmt | invariant_stmt | verdict_stmt

indep_decl: "indep" name_list ";"
dep_decl: "dep" name_list ";"
aux_decl: "aux" name_list ";"
param_decl: "param" name_list ";"
unknown_decl: "unknown" name_list ";"
func_decl: "func" func_spec ("," func_spec)* ";"
func_spec: NAME "/" INT                 -> func_arity
    | NAME "(" name_list ")"            -> func_args
reduced_decl: "reduced" reduced_spec ("," reduced_spec)* ";"
reduced_spec: NAME "(" name_list ")"
atom_decl: "atom" NAME ":" "rel" expr "=" expr ";"
rule_decl: "D" "[" NAME "]" "(" NAME ")" "=" expr ";"
rewrite_decl: "rewrite" NAME ":" expr "=" expr ";"
constraint_decl: "constraint" expr "=" expr ";"
equation_decl: "equation" NAME ":" expr ["=" expr] ";"
field_decl: "field" NAME "=" field_body ";"
?field_body: expr
    | "[" NAME "," NAME "]"             -> bracket
pointfield_decl: "pointfield" NAME "=" pf_item ("," pf_item)* ";"
pf_item: "xi" "(" NAME ")" "=" expr     -> pf_xi
    | "eta" "=" expr                    -> pf_eta
ansatz_decl: "ansatz" NAME "=" expr ";"
system_decl: "system" NAME ":" relation ("," relation)* ";"
relation: expr "=" expr
solution_decl: "solution" NAME ":" NAME "=" expr ";"

numeric_block: "numeric" NAME "{" numeric_item* "}"
?numeric_item: "set" assignment ("," assignment)* ";"           -> num_set
    | "instantiate" NAME "(" name_list ")" "=" expr ";"         -> num_instantiate
    | "initial" assignment ("," assignment)* ";"                -> num_initial
    | "grid" NAME "from" expr "to" expr ["step" expr] ";"       -> num_grid
    | "sample" sample_range ("," sample_range)* "count" INT ";"  -> num_sample
    | "guard" expr ">=" expr ";"                                -> num_guard
    | "closed" assignment ";"                                   -> num_closed
assignment: NAME "=" expr
sample_range: NAME "in" "[" expr "," expr "]"

check_stmt: "check" field_ref "on" target [check_option] ";"
?field_ref: NAME
    | "[" NAME "," NAME "]"             -> bracket
target: "constraint"                    -> target_constraint
    | NAME                              -> target_equation
?check_option: "using" name_list        -> opt_using
    | "divisible" "by" expr             -> opt_divisible
    | "independent" "of" NAME           -> opt_independent
determine_stmt: "determine" NAME "on" target "unknowns" name_list [expect_int] ";"
linearize_stmt: "linearize" NAME [expect_expr] ";"
map_stmt: "map" NAME "on" NAME "seed" expr [expect_expr] ";"
commutator_stmt: "commutator" NAME "," NAME [expect_expr] ";"
reduce_stmt: "reduce" NAME "with" "ansatz" [expect_exprs] ";"
verify_stmt: "verify" "ansatz" "on" target ";"
basis_stmt: "basis" "ansatz" "on" target ";"
integrate_stmt: "integrate" "with" NAME [tolerance] ";"
convergence_stmt: "convergence" "with" NAME "step" expr ";"
residual_stmt: "residual" NAME "solution" NAME "with" NAME [tolerance] ";"
roundtrip_stmt: "roundtrip" NAME "with" NAME [tolerance] ";"
invariant_stmt: "invariant" NAME "under" name_list [expect_bool] ";"
verdict_stmt: "verdict" "algebra" name_list "on" target "system" NAME "order" INT [expect_verdict] ";"

expect_expr: "expect" expr
expect_exprs: "expect" expr ("," expr)*
expect_int: "expect" INT
expect_bool: "expect" BOOL
expect_verdict: "expect" VERDICT
tolerance: "tol" expr

BOOL: "true" | "false"
VERDICT: "classical-invariant" | "inconclusive"
"""

SCENARIO_GRAMMAR = SCENARIO_RULES + EXPRESSION_RULES

DECLARATIONS = ('indep_decl', 'dep_decl', 'aux_decl', 'param_decl', 'unknown_decl',
                'func_decl', 'reduced_decl', 'atom_decl')

REQUESTS = ('check_stmt', 'determine_stmt', 'linearize_stmt', 'map_stmt', 'commutator_stmt',
            'reduce_stmt', 'verify_stmt', 'basis_stmt', 'integrate_stmt', 'convergence_stmt',
            'residual_stmt', 'roundtrip_stmt', 'invariant_stmt', 'verdict_stmt')


@lru_cache(maxsize=None)
def _scenario_parser() -> Lark:
    return Lark(SCENARIO_GRAMMAR, start='scenario', parser='lalr', lexer='contextual',
                propagate_positions=True, maybe_placeholders=False)


@dataclass
class Equation:
    """Named equation lhs = rhs"""

    name: str
    lhs: sympy.Expr
    rhs: sympy.Expr

    @property
    def expr(self) -> sympy.Expr:
        return self.lhs - self.rhs


@dataclass
class Request:
    """One requested check, in file order"""

    kind: str
    line: int
    args: Dict[str, Any]

    def describe(self) -> str:
        return f"{self.kind} (line {self.line})"


@dataclass
class Scenario:
    """
    Fully resolved scenario file
    """

    name: str
    path: Optional[Path]
    context: Context
    constraints: List[Constraint] = field(default_factory=list)
    rewrites: Dict[str, Constraint] = field(default_factory=dict)
    equations: Dict[str, Equation] = field(default_factory=dict)
    fields: Dict[str, EvolutionaryField] = field(default_factory=dict)
    pointfields: Dict[str, PointField] = field(default_factory=dict)
    ansatz: Optional[Ansatz] = None
    systems: Dict[str, List[sympy.Expr]] = field(default_factory=dict)
    solutions: Dict[str, Tuple[str, sympy.Expr]] = field(default_factory=dict)
    numeric: Dict[str, NumericScenario] = field(default_factory=dict)
    requests: List[Request] = field(default_factory=list)

    def generator(self, name: str):
        """Field or point field by name"""
        if name in self.fields:
            return self.fields[name]
        if name in self.pointfields:
            return self.pointfields[name]
        raise ScenarioError(f"Scenario {self.name} defines no field {name}")


class ScenarioLoader:
    """
    Load scenario files into resolved Scenario objects
    """

    def __init__(self, settings: Optional[Dict] = None):
        """
        Initialize the loader

        Args:
            settings: Toolkit settings (symbolic and numeric sections are used)
        """
        self.settings = settings or {}

    def load(self, path) -> Scenario:
        """
        Load a scenario file

        Args:
            path: Path to a .sym file

        Returns:
            Scenario
        """
        path = Path(path)
        with open(path, 'r') as f:
            text = f.read()
        return self.loads(text, path.stem, path)

    def loads(self, text: str, name: str = 'scenario', path: Optional[Path] = None) -> Scenario:
        """
        Parse and resolve scenario text

        Raises:
            DSLSyntaxError, UndeclaredIdentifierError, ContextError, ScenarioError
        """
        try:
            tree = _scenario_parser().parse(text)
        except UnexpectedInput as e:
            raise syntax_error_from(e, text)

        statements = list(tree.children)
        ctx = self._declare(statements)
        scenario = Scenario(name=name, path=path, context=ctx)
        builder = _ScenarioBuilder(scenario, self.settings)
        for statement in statements:
            if statement.data == 'atom_decl':
                builder.atom_relation(statement)
        for statement in statements:
            if statement.data in DECLARATIONS:
                continue
            builder.add(statement)
        builder.finish()
        logger.info(f"✅ Loaded scenario {name}: {len(scenario.requests)} request(s)")
        return scenario

    def _declare(self, statements: List[Tree]) -> Context:
        """First pass: every name is declared before any expression is resolved"""
        indep, dep, aux = [], [], []
        for s in statements:
            if s.data == 'indep_decl':
                indep += _names(s.children[0])
            elif s.data == 'dep_decl':
                dep += _names(s.children[0])
            elif s.data == 'aux_decl':
                aux += _names(s.children[0])
        if not indep:
            raise ScenarioError("Scenario declares no independent variables ('indep ...;')")

        symbolic = self.settings.get('symbolic', {})
        ctx = Context(indep, dep_vars=dep or ['u'], aux_vars=aux or ['w'],
                      ln_exp_rule=symbolic.get('ln_exp_rule', True))
        for s in statements:
            if s.data == 'param_decl':
                for n in _names(s.children[0]):
                    ctx.add_param(n)
            elif s.data == 'unknown_decl':
                for n in _names(s.children[0]):
                    ctx.add_unknown(n)
            elif s.data == 'func_decl':
                for spec in s.children:
                    if spec.data == 'func_arity':
                        ctx.add_function(str(spec.children[0]), int(spec.children[1]))
                    else:
                        ctx.add_function(str(spec.children[0]), default_args=_names(spec.children[1]))
            elif s.data == 'reduced_decl':
                for spec in s.children:
                    ctx.add_function(str(spec.children[0]), default_args=_names(spec.children[1]),
                                     reduced=True)
            elif s.data == 'atom_decl':
                ctx.add_atom(str(s.children[0]))
        return ctx


def _names(tree: Tree) -> List[str]:
    return [str(t) for t in tree.children]


def _line(tree: Tree) -> int:
    return getattr(tree.meta, 'line', 0) if hasattr(tree, 'meta') else 0


def _child(tree: Tree, data: str) -> Optional[Tree]:
    for c in tree.children:
        if isinstance(c, Tree) and c.data == data:
            return c
    return None


class _ScenarioBuilder:
    """Second pass: resolve statements in file order"""

    def __init__(self, scenario: Scenario, settings: Dict):
        self.scenario = scenario
        self.ctx = scenario.context
        self.parser = ExpressionParser(self.ctx)
        self.settings = settings
        self.engine = SymmetryEngine(self.ctx, settings.get('symbolic', {}).get('order_cap', 12))
        self.numeric_defaults = settings.get('numeric', {})

    # ------------------------------------------------------------------

    def expr(self, tree: Tree, canonical: bool = True, local_symbols=None) -> sympy.Expr:
        return self.parser.resolve(tree, canonical, local_symbols)

    def number(self, tree: Tree, values=None) -> float:
        value = self.expr(tree)
        if values:
            value = value.xreplace(values)
        if not value.is_number:
            raise ScenarioError(f"Expected a number, got {value} (line {_line(tree)})")
        return float(value)

    def field_locals(self) -> Dict[str, sympy.Expr]:
        return {n: f.characteristic for n, f in self.scenario.fields.items()}

    def _unique(self, table: Dict, name: str, what: str, line: int):
        if name in table:
            raise ScenarioError(f"{what} {name} defined twice (line {line})")
        if self.ctx.is_declared(name):
            raise ContextError(f"{what} name {name} collides with a declaration (line {line})")

    def _solved(self, lhs_tree: Tree, rhs_tree: Tree, name: Optional[str] = None) -> Constraint:
        lhs = self.expr(lhs_tree, canonical=False)
        return Constraint(lhs, self.expr(rhs_tree), name)

    # ------------------------------------------------------------------

    def add(self, s: Tree):
        handler = getattr(self, f"_{s.data}", None)
        if handler is not None:
            handler(s)
            return
        if s.data in REQUESTS:
            self.scenario.requests.append(self._request(s))
            return
        raise ScenarioError(f"Unsupported statement {s.data} (line {_line(s)})")

    def atom_relation(self, s: Tree):
        """Attach a declared atom's relation once every name is known"""
        name, lhs, rhs = s.children
        relation = self.expr(lhs, canonical=False) - self.expr(rhs, canonical=False)
        self.ctx.set_atom_relation(str(name), relation)

    def _rule_decl(self, s: Tree):
        var, atom, rule = s.children
        self.ctx.set_atom_rule(str(atom), str(var), self.expr(rule))

    def _rewrite_decl(self, s: Tree):
        name, lhs, rhs = s.children
        self._unique(self.scenario.rewrites, str(name), 'Rewrite', _line(s))
        self.scenario.rewrites[str(name)] = self._solved(lhs, rhs, str(name))

    def _constraint_decl(self, s: Tree):
        lhs, rhs = s.children
        self.scenario.constraints.append(self._solved(lhs, rhs))

    def _equation_decl(self, s: Tree):
        name = str(s.children[0])
        self._unique(self.scenario.equations, name, 'Equation', _line(s))
        lhs = self.expr(s.children[1])
        rhs = self.expr(s.children[2]) if len(s.children) > 2 else sympy.Integer(0)
        self.scenario.equations[name] = Equation(name, lhs, rhs)

    def _field_decl(self, s: Tree):
        name, body = str(s.children[0]), s.children[1]
        self._unique(self.scenario.fields, name, 'Field', _line(s))
        if isinstance(body, Tree) and body.data == 'bracket':
            first, second = (self.scenario.generator(str(t)) for t in body.children)
            self.scenario.fields[name] = self.engine.commutator(first, second, name)
            return
        characteristic = self.expr(body, local_symbols=self.field_locals())
        self.scenario.fields[name] = EvolutionaryField(characteristic, self.ctx.primary_dep, name)

    def _pointfield_decl(self, s: Tree):
        name = str(s.children[0])
        self._unique(self.scenario.pointfields, name, 'Point field', _line(s))
        xi = [sympy.Integer(0)] * self.ctx.n
        eta = sympy.Integer(0)
        for item in s.children[1:]:
            if item.data == 'pf_xi':
                var, value = item.children
                xi[self.ctx.indep_index(str(var))] = self.expr(value)
            else:
                eta = self.expr(item.children[0])
        pointfield = PointField(tuple(xi), eta, self.ctx.primary_dep, name)
        pointfield.validate(self.ctx)
        self.scenario.pointfields[name] = pointfield

    def _ansatz_decl(self, s: Tree):
        dep, body = s.children
        if self.ctx.category(str(dep)) != 'dep':
            raise ScenarioError(f"Ansatz target {dep} is not a dependent variable (line {_line(s)})")
        if self.scenario.ansatz is not None:
            raise ScenarioError(f"Second ansatz (line {_line(s)})")
        self.scenario.ansatz = Ansatz.from_context(self.ctx, self.expr(body), str(dep))

    def _system_decl(self, s: Tree):
        name = str(s.children[0])
        self._unique(self.scenario.systems, name, 'System', _line(s))
        self.scenario.systems[name] = [
            self.expr(r.children[0]) - self.expr(r.children[1]) for r in s.children[1:]]

    def _solution_decl(self, s: Tree):
        name, dep, body = s.children
        self._unique(self.scenario.solutions, str(name), 'Solution', _line(s))
        if self.ctx.category(str(dep)) != 'dep':
            raise ScenarioError(f"Solution target {dep} is not a dependent variable (line {_line(s)})")
        self.scenario.solutions[str(name)] = (str(dep), self.expr(body))

    def _numeric_block(self, s: Tree):
        name = str(s.children[0])
        self._unique(self.scenario.numeric, name, 'Numeric block', _line(s))
        ns = NumericScenario(name=name)
        grid_item = None
        for item in s.children[1:]:
            if item.data == 'num_set':
                for assignment in item.children:
                    target, value = assignment.children
                    if self.ctx.category(str(target)) != 'param':
                        raise ScenarioError(f"'set {target}' does not name a parameter (line {_line(item)})")
                    ns.values[sympy.Symbol(str(target))] = self.expr(value)
            elif item.data == 'num_instantiate':
                fname, variables, body = item.children
                fsym = self.ctx.function(str(fname))
                dummies = {n: sympy.Dummy(n) for n in _names(variables)}
                if len(dummies) != fsym.arity:
                    raise ScenarioError(
                        f"Instantiation of {fname} needs {fsym.arity} variable(s) (line {_line(item)})")
                ns.instantiations[str(fname)] = FunctionInstantiation(
                    str(fname), tuple(dummies.values()), self.expr(body, local_symbols=dummies))
            elif item.data == 'num_initial':
                for assignment in item.children:
                    target, value = assignment.children
                    ns.initial[str(target)] = self.expr(value)
            elif item.data == 'num_grid':
                grid_item = item
            elif item.data == 'num_sample':
                ns.count = int(item.children[-1])
                for rng in item.children[:-1]:
                    var, lo, hi = rng.children
                    self.ctx.indep_index(str(var))
                    ns.samples[str(var)] = (lo, hi)
            elif item.data == 'num_guard':
                lhs, rhs = item.children
                ns.guards.append(self.expr(lhs) - self.expr(rhs))
            elif item.data == 'num_closed':
                target, value = item.children[0].children
                ns.closed[str(target)] = self.expr(value)

        # Numbers may use the block's parameter values
        ns.samples = {v: (self.number(lo, ns.values), self.number(hi, ns.values))
                      for v, (lo, hi) in ns.samples.items()}
        if grid_item is not None:
            var = str(grid_item.children[0])
            self.ctx.indep_index(var)
            start = self.number(grid_item.children[1], ns.values)
            stop = self.number(grid_item.children[2], ns.values)
            step = (self.number(grid_item.children[3], ns.values) if len(grid_item.children) > 3
                    else self.numeric_defaults.get('rk4_step', 1e-3))
            ns.grid = TimeGrid(var, start, stop, step)
        self.scenario.numeric[name] = ns

    # ------------------------------------------------------------------
    # Requests
    # ------------------------------------------------------------------

    def _target(self, tree: Tree) -> str:
        if tree.data == 'target_constraint':
            if not self.scenario.constraints:
                raise ScenarioError(f"Scenario has no constraint (line {_line(tree)})")
            return 'constraint'
        name = str(tree.children[0])
        if name not in self.scenario.equations:
            raise ScenarioError(f"Unknown equation {name} (line {_line(tree)})")
        return name

    def _field_name(self, node, line: int) -> Any:
        if isinstance(node, Tree) and node.data == 'bracket':
            names = tuple(str(t) for t in node.children)
            for n in names:
                self.scenario.generator(n)
            return names
        self.scenario.generator(str(node))
        return str(node)

    def _require(self, table: Dict, name: str, what: str, line: int) -> str:
        if name not in table:
            raise ScenarioError(f"Unknown {what} {name} (line {line})")
        return name

    def _tolerance(self, s: Tree, key: str) -> float:
        tol = _child(s, 'tolerance')
        if tol is not None:
            return self.number(tol.children[0])
        return float(self.numeric_defaults.get(key, 1e-8))

    def _request(self, s: Tree) -> Request:
        line = _line(s)
        kind = s.data[:-len('_stmt')]
        c = s.children
        args: Dict[str, Any] = {}
        expect_expr = _child(s, 'expect_expr')
        if expect_expr is not None:
            args['expect'] = self.expr(expect_expr.children[0])

        if kind == 'check':
            args['field'] = self._field_name(c[0], line)
            args['target'] = self._target(c[1])
            option = c[2] if len(c) > 2 else None
            if option is not None:
                if option.data == 'opt_using':
                    names = _names(option.children[0])
                    for n in names:
                        self._require(self.scenario.rewrites, n, 'rewrite', line)
                    args['using'] = names
                elif option.data == 'opt_divisible':
                    args['divisible_by'] = self.expr(option.children[0])
                else:
                    param = str(option.children[0])
                    if self.ctx.category(param) is None and param not in self.ctx.functions:
                        raise ScenarioError(f"Unknown name {param} (line {line})")
                    args['independent_of'] = param
        elif kind == 'determine':
            args['field'] = self._field_name(c[0], line)
            args['target'] = self._target(c[1])
            args['unknowns'] = _names(c[2])
            for n in args['unknowns']:
                if self.ctx.category(n) != 'unknown':
                    raise ScenarioError(f"{n} is not declared as an unknown (line {line})")
            expect = _child(s, 'expect_int')
            args['expect_dimension'] = int(expect.children[0]) if expect is not None else None
        elif kind == 'linearize':
            args['equation'] = self._require(self.scenario.equations, str(c[0]), 'equation', line)
        elif kind == 'map':
            args['field'] = self._field_name(c[0], line)
            args['equation'] = self._require(self.scenario.equations, str(c[1]), 'equation', line)
            args['seed'] = self.expr(c[2])
        elif kind == 'commutator':
            args['first'] = self._field_name(c[0], line)
            args['second'] = self._field_name(c[1], line)
        elif kind == 'reduce':
            args['equation'] = self._require(self.scenario.equations, str(c[0]), 'equation', line)
            expect = _child(s, 'expect_exprs')
            args['expect_equations'] = ([self.expr(e) for e in expect.children]
                                        if expect is not None else None)
        elif kind in ('verify', 'basis'):
            args['target'] = self._target(c[0])
        elif kind == 'integrate':
            args['numeric'] = self._require(self.scenario.numeric, str(c[0]), 'numeric block', line)
            args['tolerance'] = self._tolerance(s, 'closed_form_tolerance')
        elif kind == 'convergence':
            args['numeric'] = self._require(self.scenario.numeric, str(c[0]), 'numeric block', line)
            args['step'] = self.number(c[1])
        elif kind == 'residual':
            args['equation'] = self._require(self.scenario.equations, str(c[0]), 'equation', line)
            args['solution'] = self._require(self.scenario.solutions, str(c[1]), 'solution', line)
            args['numeric'] = self._require(self.scenario.numeric, str(c[2]), 'numeric block', line)
            args['tolerance'] = self._tolerance(s, 'residual_tolerance')
        elif kind == 'roundtrip':
            args['equation'] = self._require(self.scenario.equations, str(c[0]), 'equation', line)
            args['numeric'] = self._require(self.scenario.numeric, str(c[1]), 'numeric block', line)
            args['tolerance'] = self._tolerance(s, 'residual_tolerance')
        elif kind == 'invariant':
            args['system'] = self._require(self.scenario.systems, str(c[0]), 'system', line)
            args['algebra'] = [self._field_name(t, line) for t in c[1].children]
            expect = _child(s, 'expect_bool')
            args['expect'] = (str(expect.children[0]) == 'true') if expect is not None else None
        elif kind == 'verdict':
            args['algebra'] = [self._field_name(t, line) for t in c[0].children]
            args['target'] = self._target(c[1])
            args['system'] = self._require(self.scenario.systems, str(c[2]), 'system', line)
            args['order'] = int(c[3])
            expect = _child(s, 'expect_verdict')
            args['expect'] = str(expect.children[0]) if expect is not None else None
        return Request(kind, line, args)

    def finish(self):
        """Checks that need the complete scenario"""
        JetSpace(self.ctx).check_atom_consistency()
        for c in self.scenario.constraints:
            self.engine.constraint_set([c])
        needs_ansatz = {'reduce', 'verify', 'basis', 'integrate', 'convergence', 'roundtrip'}
        for r in self.scenario.requests:
            if r.kind in needs_ansatz and self.scenario.ansatz is None:
                raise ScenarioError(f"{r.describe()} needs an ansatz")
