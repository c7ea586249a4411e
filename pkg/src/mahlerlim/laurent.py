"""Sparse Laurent polynomials with exact Gaussian-rational coefficients.

A polynomial in ``Z1 ... Zn`` is stored as a map from exponent tuples to
:class:`GaussQ` coefficients.  Zero coefficients are never stored, so the zero
polynomial is the empty map.  Floating point only appears in :func:`evaluate`
and in :func:`to_arrays`, which feed the numerical kernels.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .torushom import TorusHom

__all__ = [
    "GaussQ",
    "LaurentPoly",
    "PolySyntaxError",
    "parse",
    "format_poly",
    "evaluate",
    "substitute",
    "strip_monomial",
    "multiply",
    "is_zero",
    "to_arrays",
]


class PolySyntaxError(ValueError):
    """Raised for malformed polynomial text; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class GaussQ:
    """Gaussian rational ``re + im*i`` with exact :class:`Fraction` parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other: GaussQ) -> GaussQ:
        return GaussQ(self.re + other.re, self.im + other.im)

    def __sub__(self, other: GaussQ) -> GaussQ:
        return GaussQ(self.re - other.re, self.im - other.im)

    def __neg__(self) -> GaussQ:
        return GaussQ(-self.re, -self.im)

    def __mul__(self, other: GaussQ) -> GaussQ:
        return GaussQ(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        return _format_coef(self)


ONE = GaussQ(1)


class LaurentPoly:
    """Immutable sparse Laurent polynomial in ``nvars`` variables.

    Parameters
    ----------
    nvars : int
        Number of variables, at least 1.
    terms : mapping
        Exponent tuple -> coefficient.  Coefficients may be ints, Fractions,
        complex numbers with integral parts, or :class:`GaussQ`.  Zero
        entries are dropped.
    """

    __slots__ = ("_nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if int(nvars) < 1:
            raise ValueError("nvars must be positive")
        self._nvars = int(nvars)
        clean: dict[tuple[int, ...], GaussQ] = {}
        for exp, c in (terms or {}).items():
            e = tuple(int(x) for x in exp)
            if len(e) != self._nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {self._nvars}")
            c = _as_gauss(c)
            if c:
                clean[e] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> LaurentPoly:
        # trusted constructor: caller guarantees clean terms
        obj = cls.__new__(cls)
        obj._nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, c, nvars: int = 1) -> LaurentPoly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exponent: Sequence[int], c=1) -> LaurentPoly:
        return cls(len(exponent), {tuple(exponent): c})

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> Mapping[tuple[int, ...], GaussQ]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._nvars == other._nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"LaurentPoly({self._nvars}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    def __mul__(self, other):
        return multiply(self, other)

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        _check_same_nvars(self, other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, GaussQ()) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPoly._raw(self._nvars, out)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly._raw(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def max_abs_exponent(self) -> int:
        return max((abs(x) for e in self._terms for x in e), default=0)


def _as_gauss(c) -> GaussQ:
    if isinstance(c, GaussQ):
        return c
    if isinstance(c, complex):
        return GaussQ(Fraction(c.real), Fraction(c.imag))
    return GaussQ(Fraction(c))


def _check_same_nvars(p: LaurentPoly, q: LaurentPoly):
    if p.nvars != q.nvars:
        raise ValueError(f"dimension mismatch: {p.nvars} vs {q.nvars} variables")


def is_zero(p: LaurentPoly) -> bool:
    return not p._terms


def multiply(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Exact product of two Laurent polynomials in the same variables."""
    _check_same_nvars(p, q)
    out: dict[tuple[int, ...], GaussQ] = {}
    for e1, c1 in p._terms.items():
        for e2, c2 in q._terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, GaussQ()) + c1 * c2
    return LaurentPoly._raw(p.nvars, {e: c for e, c in out.items() if c})


def substitute(p: LaurentPoly, A: TorusHom) -> LaurentPoly:
    """Power substitution: ``Z_i -> Z_1^{a_i1} ... Z_m^{a_im}``.

    Each exponent vector ``e`` becomes ``A^T e``; colliding exponents are
    summed exactly, so the result may be the zero polynomial.
    """
    n, m = A.rows, A.cols
    if p.nvars != n:
        raise ValueError(f"dimension mismatch: polynomial has {p.nvars} variables, matrix has {n} rows")
    cols = A.columns()
    out: dict[tuple[int, ...], GaussQ] = {}
    for e, c in p._terms.items():
        f = tuple(sum(ei * aij for ei, aij in zip(e, col)) for col in cols)
        out[f] = out.get(f, GaussQ()) + c
    return LaurentPoly._raw(m, {e: c for e, c in out.items() if c})


def strip_monomial(p: LaurentPoly) -> tuple[tuple[int, ...], LaurentPoly]:
    """Write ``P = Z^{-k} Q`` with ``k >= 0`` and ``Q`` a polynomial.

    ``k_i`` is ``-min_i`` when some exponent of ``Z_i`` is negative and 0
    otherwise, so ``Q`` keeps any positive common power (``Z1^2 + Z1`` is
    returned unchanged with ``k = (0,)``).
    """
    if is_zero(p):
        raise ValueError("cannot strip a monomial from the zero polynomial")
    mins = [min(e[i] for e in p._terms) for i in range(p.nvars)]
    k = tuple(max(0, -x) for x in mins)
    q = {tuple(a + b for a, b in zip(e, k)): c for e, c in p._terms.items()}
    return k, LaurentPoly._raw(p.nvars, q)


def evaluate(p: LaurentPoly, t: Sequence[float]) -> complex:
    """Evaluate at the torus point ``(exp(2 pi i t_1), ..., exp(2 pi i t_n))``."""
    if len(t) != p.nvars:
        raise ValueError(f"dimension mismatch: point has {len(t)} angles, polynomial has {p.nvars} variables")
    acc = 0j
    for e, c in p._terms.items():
        phase = math.fsum(ei * ti for ei, ti in zip(e, t)) % 1.0
        acc += complex(c) * cmath.exp(2j * math.pi * phase)
    return acc


def to_arrays(p: LaurentPoly) -> tuple[np.ndarray, np.ndarray]:
    """Exponents as an ``(T, n)`` int64 array and coefficients as complex128."""
    items = sorted(p._terms.items())
    exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), p.nvars)
    coefs = np.array([complex(c) for _, c in items], dtype=np.complex128)
    return exps, coefs


# --- text format -----------------------------------------------------------

def _term_key(e: tuple[int, ...]):
    # variables that occur sort ahead of absent ones; constants come last
    return tuple((x == 0, x) for x in e)


def _format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _format_coef(c: GaussQ) -> str:
    if not c.im:
        return _format_rational(c.re)
    if not c.re:
        return _format_rational(c.im) + "i"
    sign = "-" if c.im < 0 else "+"
    return f"({_format_rational(c.re)}{sign}{_format_rational(abs(c.im))}i)"


def _format_monomial(e: tuple[int, ...]) -> str:
    parts = []
    for i, x in enumerate(e, start=1):
        if x == 1:
            parts.append(f"Z{i}")
        elif x:
            parts.append(f"Z{i}^{x}")
    return "*".join(parts)


def format_poly(p: LaurentPoly) -> str:
    """Canonical text; ``parse(format_poly(P), P.nvars) == P``."""
    if is_zero(p):
        return "0"
    out = []
    for e in sorted(p._terms, key=_term_key):
        c = p._terms[e]
        negative = c.re < 0 or (c.re == 0 and c.im < 0)
        if negative:
            c = -c
        mono = _format_monomial(e)
        if not mono:
            body = _format_coef(c)
        elif c == ONE:
            body = mono
        else:
            cs = _format_coef(c)
            if "/" in cs and not cs.startswith("("):
                cs = f"({cs})"
            body = f"{cs}*{mono}"
        if not out:
            out.append("-" + body if negative else body)
        else:
            out.append(("- " if negative else "+ ") + body)
    return " ".join(out)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.max_var = 0

    def error(self, msg: str):
        raise PolySyntaxError(msg, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def digits(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected digits")
        return self.text[start:self.pos]

    def rational(self) -> Fraction:
        self.skip()
        start = self.pos
        whole = self.digits()
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.pos += 1
            frac = ""
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                frac += self.text[self.pos]
                self.pos += 1
            return Fraction(f"{whole}.{frac or '0'}")
        if self.peek() == "/":
            self.pos += 1
            den = int(self.digits())
            if den == 0:
                self.pos = start
                self.error("zero denominator")
            return Fraction(int(whole), den)
        return Fraction(int(whole))

    def maybe_i(self) -> bool:
        if self.peek() == "i":
            self.pos += 1
            return True
        return False

    def paren_coef(self) -> GaussQ:
        self.take("(")
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        first = sign * self.rational()
        if self.maybe_i():
            c = GaussQ(0, first)
        else:
            c = GaussQ(first)
            if self.peek() in ("+", "-"):
                s = -1 if self.text[self.pos] == "-" else 1
                self.pos += 1
                im = s * self.rational()
                if not self.maybe_i():
                    self.error("expected 'i' after imaginary part")
                c = GaussQ(first, im)
        self.take(")")
        return c

    def coef(self) -> GaussQ:
        if self.peek() == "(":
            return self.paren_coef()
        q = self.rational()
        return GaussQ(0, q) if self.maybe_i() else GaussQ(q)

    def factor(self) -> tuple[int, int]:
        self.take("Z")
        idx = int(self.digits())
        if idx < 1:
            self.error("variable index must be at least 1")
        power = 1
        if self.peek() == "^":
            self.pos += 1
            neg = False
            if self.peek() in ("+", "-"):
                neg = self.text[self.pos] == "-"
                self.pos += 1
            power = int(self.digits())
            if neg:
                power = -power
        self.max_var = max(self.max_var, idx)
        return idx, power

    def term(self) -> tuple[GaussQ, dict[int, int]]:
        c = ONE
        mono: dict[int, int] = {}
        if self.peek() != "Z":
            c = self.coef()
            if self.peek() != "*":
                return c, mono
            self.pos += 1
        while True:
            idx, power = self.factor()
            mono[idx] = mono.get(idx, 0) + power
            if self.peek() != "*":
                return c, mono
            self.pos += 1

    def poly(self) -> list[tuple[GaussQ, dict[int, int]]]:
        terms = []
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        while True:
            c, mono = self.term()
            terms.append((c if sign > 0 else -c, mono))
            nxt = self.peek()
            if nxt == "":
                return terms
            if nxt not in "+-":
                self.error(f"unexpected {nxt!r}")
            sign = -1 if nxt == "-" else 1
            self.pos += 1


def parse(text: str, expected_nvars: int | None = None) -> LaurentPoly:
    """Parse polynomial text such as ``"(1/2)*Z1^2*Z2^-1 - 3 + 2i*Z3"``.

    Like terms are combined and zero terms dropped.  Without
    ``expected_nvars`` the variable count is the largest index mentioned
    (1 for a constant).
    """
    ps = _Parser(text)
    if ps.peek() == "":
        ps.error("empty polynomial")
    raw = ps.poly()
    if expected_nvars is not None and ps.max_var > expected_nvars:
        raise ValueError(f"variable Z{ps.max_var} exceeds expected {expected_nvars} variables")
    n = expected_nvars if expected_nvars is not None else max(ps.max_var, 1)
    out: dict[tuple[int, ...], GaussQ] = {}
    for c, mono in raw:
        e = [0] * n
        for idx, power in mono.items():
            e[idx - 1] = power
        key = tuple(e)
        out[key] = out.get(key, GaussQ()) + c
    return LaurentPoly._raw(n, {e: c for e, c in out.items() if c})


def polys_from_text(texts: Iterable[str], nvars: int | None = None) -> list[LaurentPoly]:
    """Parse several polynomials into a common number of variables."""
    texts = list(texts)
    if nvars is None:
        nvars = max(parse(t).nvars for t in texts)
    return [parse(t, nvars) for t in texts]
