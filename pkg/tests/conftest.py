"""
Shared fixtures for the symred test suite
"""

import random

import pytest
import sympy

from src.expr_core import Context, parse
from src.settings import load_settings


@pytest.fixture
def ctx_x():
    return Context(['x'])


@pytest.fixture
def ctx_tx():
    return Context(['t', 'x'])


@pytest.fixture
def ctx_xy():
    return Context(['x', 'y'])


@pytest.fixture
def utx_ctx():
    """t, x with h/1, reduced phi1(t), phi2(t) and the atom r^2 = phi1 - 2x"""
    ctx = Context(['t', 'x'], params=['A', 'B', 'lam', 'lam1'])
    ctx.add_function('h', 1)
    ctx.add_function('phi1', default_args=['t'], reduced=True)
    ctx.add_function('phi2', default_args=['t'], reduced=True)
    ctx.add_atom('r')
    ctx.set_atom_relation('r', parse('r^2 - phi1 + 2*x', ctx, canonical=False))
    ctx.set_atom_rule('r', 'x', parse('-1/r', ctx))
    ctx.set_atom_rule('r', 't', parse('d(phi1,1)(t)/(2*r)', ctx))
    return ctx


@pytest.fixture
def settings():
    return load_settings()


def random_polynomial(rng: random.Random, atoms, terms: int = 3, degree: int = 2) -> sympy.Expr:
    """Small integer-coefficient polynomial in the given atoms"""
    expr = sympy.Integer(0)
    for _ in range(terms):
        monomial = sympy.Integer(rng.choice([-3, -2, -1, 1, 2, 3]))
        for _ in range(rng.randint(0, degree)):
            monomial *= rng.choice(atoms)
        expr += monomial
    return sympy.expand(expr)


@pytest.fixture
def make_polynomial():
    return random_polynomial
