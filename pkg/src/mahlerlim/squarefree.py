"""Exact square-free decomposition of univariate polynomials over Q(i).

Multiple roots cannot be located to better than ``eps^(1/k)`` in floating
point, which is too coarse for Jensen's formula when the root sits on the unit
circle.  Splitting ``P = a * prod f_k^k`` with square-free ``f_k`` first keeps
every numerical root simple.
"""
from __future__ import annotations

from fractions import Fraction

from .laurent import GaussQ

ZERO = GaussQ()
ONE = GaussQ(1)


def _inv(c: GaussQ) -> GaussQ:
    d = c.re * c.re + c.im * c.im
    return GaussQ(c.re / d, -c.im / d)


def _trim(a: list[GaussQ]) -> list[GaussQ]:
    while a and not a[-1]:
        a.pop()
    return a


def _monic(a: list[GaussQ]) -> list[GaussQ]:
    inv = _inv(a[-1])
    return [x * inv for x in a]


def _deriv(a: list[GaussQ]) -> list[GaussQ]:
    return _trim([GaussQ(Fraction(k)) * a[k] for k in range(1, len(a))])


def _sub(a: list[GaussQ], b: list[GaussQ]) -> list[GaussQ]:
    n = max(len(a), len(b))
    a = a + [ZERO] * (n - len(a))
    b = b + [ZERO] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def _divmod(a: list[GaussQ], b: list[GaussQ]) -> tuple[list[GaussQ], list[GaussQ]]:
    a = list(a)
    inv = _inv(b[-1])
    q = [ZERO] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] * inv
        q[shift] = f
        for i, x in enumerate(b):
            a[i + shift] = a[i + shift] - f * x
        a.pop()
        _trim(a)
    return _trim(q), a


def _exact_div(a, b):
    q, r = _divmod(a, b)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def _gcd(a: list[GaussQ], b: list[GaussQ]) -> list[GaussQ]:
    while b:
        a, b = b, _divmod(a, b)[1]
        if b:
            b = _monic(b)
    return _monic(a)


def squarefree_parts(coefs: list[GaussQ]) -> tuple[GaussQ, list[tuple[int, list[GaussQ]]]]:
    """Yun's algorithm: ``P = lead * prod_k f_k^k`` with monic square-free ``f_k``.

    ``coefs`` are ascending dense coefficients; returns ``(lead, [(k, f_k), ...])``
    omitting constant factors.
    """
    f = _trim(list(coefs))
    if not f:
        raise ValueError("zero polynomial")
    lead = f[-1]
    f = _monic(f)
    out = []
    if len(f) == 1:
        return lead, out
    a = _gcd(f, _deriv(f))
    b = _exact_div(f, a)
    c = _exact_div(_deriv(f), a)
    d = _sub(c, _deriv(b))
    k = 1
    while len(b) > 1:
        g = _gcd(b, d) if d else b
        if len(g) > 1:
            out.append((k, g))
        b = _exact_div(b, g)
        c = _exact_div(d, g) if d else []
        d = _sub(c, _deriv(b))
        k += 1
    return lead, out
