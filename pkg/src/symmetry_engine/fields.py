"""
Generalized vector fields: evolutionary (characteristic only) and classical point fields
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import sympy

from ..errors import ContextError
from ..expr_core import Context, MultiIndex, normalize


@dataclass(frozen=True)
class EvolutionaryField:
    """Q = eta d/du with the characteristic eta on the jet space"""

    characteristic: sympy.Expr
    dep: str = 'u'
    name: Optional[str] = None

    def order(self, ctx: Context) -> int:
        """Highest jet order in the characteristic (0 for point-like fields)"""
        orders = [ctx.jet_info(j)[1].order for j in ctx.jets_in(self.characteristic, self.dep)]
        return max(orders, default=0)


@dataclass(frozen=True)
class PointField:
    """
    Classical point field Q = sum xi_i d/dx_i + eta d/du

    Coefficients depend on the independent variables and u only.
    """

    xi: Tuple[sympy.Expr, ...]
    eta: sympy.Expr
    dep: str = 'u'
    name: Optional[str] = None

    def validate(self, ctx: Context):
        if len(self.xi) != ctx.n:
            raise ContextError(f"Point field needs {ctx.n} xi coefficient(s), got {len(self.xi)}")
        zero = MultiIndex.zero(ctx.n)
        for coefficient in (*self.xi, self.eta):
            for jet in ctx.jets_in(coefficient):
                if ctx.jet_info(jet)[1] != zero:
                    raise ContextError(
                        f"Point field coefficient {coefficient} depends on derivative {jet}")

    def evolutionary(self, ctx: Context) -> EvolutionaryField:
        """
        Evolutionary representative eta - sum xi_j u_{x_j}

        Args:
            ctx: Declaration context

        Returns:
            EvolutionaryField with the same name
        """
        self.validate(ctx)
        characteristic = self.eta
        for i, xi in enumerate(self.xi):
            characteristic -= xi * ctx.jet(self.dep, MultiIndex.unit(ctx.n, i))
        return EvolutionaryField(normalize(characteristic, ctx), self.dep, self.name)


def as_evolutionary(field, ctx: Context) -> EvolutionaryField:
    """Accept either field kind and return the evolutionary form"""
    if isinstance(field, PointField):
        return field.evolutionary(ctx)
    return field
