"""
Print expressions in the DSL's own syntax so printed text parses back to the same value
"""

import sympy
from sympy.printing.precedence import precedence
from sympy.printing.str import StrPrinter


class DSLPrinter(StrPrinter):
    """
    StrPrinter with ``^`` powers, ``ln`` and parenthesized rational exponents
    """

    def _print_Pow(self, expr, rational=False):
        prec = precedence(expr)
        if expr.base.is_Pow or precedence(expr.base) <= prec:
            base = f"({self._print(expr.base)})"
        else:
            base = self._print(expr.base)
        exponent = expr.exp
        if exponent is sympy.S.NegativeOne:
            return f"1/{base}"
        if exponent.is_Integer and exponent >= 0:
            return f"{base}^{exponent}"
        return f"{base}^({self._print(exponent)})"

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_exp(self, expr):
        return f"exp({self._print(expr.args[0])})"

    def _print_Rational(self, expr):
        if expr.q == 1:
            return str(expr.p)
        return f"{expr.p}/{expr.q}"


_PRINTER = DSLPrinter()


def to_dsl(expr) -> str:
    """Render an expression as DSL text"""
    return _PRINTER.doprint(sympy.sympify(expr))
