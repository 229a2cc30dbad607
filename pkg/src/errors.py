"""
Exception hierarchy for the symmetry reduction toolkit
"""

from typing import Optional


class SymredError(Exception):
    """Base class for every error raised by the toolkit"""


class DSLSyntaxError(SymredError):
    """
    Raised when expression or scenario text does not match the grammar
    """

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, context: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.context = context
        super().__init__(self.format_message())

    def format_message(self) -> str:
        """Format the message with position and an excerpt"""
        where = ""
        if self.line is not None and self.column is not None:
            where = f" at line {self.line}, column {self.column}"
        text = f"Syntax error{where}: {self.message}"
        if self.context:
            text += f"\n{self.context}"
        return text


class UndeclaredIdentifierError(SymredError):
    """Raised when an expression uses a name that the context does not declare"""

    def __init__(self, name: str, line: Optional[int] = None, column: Optional[int] = None):
        self.name = name
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"Undeclared identifier '{name}'{where}")


class ArityError(SymredError):
    """Raised when a function symbol is applied to the wrong number of arguments"""


class ContextError(SymredError):
    """Raised for invalid declarations: duplicate names, bad atom relations or rules"""


class ZeroDenominatorError(SymredError):
    """Raised when normalization meets a denominator that is symbolically zero"""


class MissingBindingError(SymredError):
    """Raised when a total substitution meets an unbound jet variable"""


class MissingDerivativeRuleError(SymredError):
    """Raised when a total derivative needs an undeclared defined-atom rule"""


class InconsistentConstraintError(SymredError):
    """Raised when prolongation reaches one leader with two different right-hand sides"""


class RankingError(SymredError):
    """Raised for constraints not in solved form or reductions past the order cap"""


class NonlinearUnknownError(SymredError):
    """Raised when unknown coefficients enter a determining system nonlinearly"""


class CollectionError(SymredError):
    """Raised when a reduced-system coefficient still depends on the eliminated variable"""


class ExplicitFormError(SymredError):
    """Raised when a reduced system cannot be solved for the first derivatives"""


class NumericDomainError(SymredError):
    """Raised for guard violations, singular points and non-finite numeric states"""


class AlgebraClosureError(SymredError):
    """Raised when a bracket of two generators leaves the span of the algebra"""


class ScenarioError(SymredError):
    """Raised when a scenario references something it never defined"""
