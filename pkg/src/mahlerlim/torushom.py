"""Integer matrices as continuous homomorphisms between tori.

An ``n x m`` integer matrix ``A`` acts on angle coordinates by
``t -> A t mod 1`` and so defines ``q_A : T^m -> T^n``.  Heights use the
row-vector convention: ``v`` annihilates ``A`` when ``v . A = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from . import kernels

__all__ = [
    "TorusHom",
    "BoydHeight",
    "SignSplit",
    "compose",
    "apply",
    "integer_rank",
    "is_surjective",
    "boyd_height",
    "base_b_family",
    "sign_split",
    "parse_matrix",
    "left_kernel_basis",
]


class MatrixFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TorusHom:
    """Integer ``rows x cols`` matrix; represents ``q_A: T^cols -> T^rows``."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("matrix dimensions must be positive")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, n: int) -> TorusHom:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def column(cls, vec: Sequence[int]) -> TorusHom:
        return cls(tuple((int(x),) for x in vec))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def columns(self) -> list[tuple[int, ...]]:
        return list(zip(*self.entries))

    def transpose(self) -> TorusHom:
        return TorusHom(tuple(self.columns()))

    def max_norm(self) -> int:
        return max(abs(x) for row in self.entries for x in row)

    def to_text(self) -> str:
        return ";".join(",".join(str(x) for x in row) for row in self.entries)

    def __matmul__(self, other: TorusHom) -> TorusHom:
        return compose(self, other)

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class BoydHeight:
    """Finite height with a minimal witness, or ``value=None`` for infinity."""

    value: int | None
    witness: tuple[int, ...] | None = None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def as_number(self) -> float:
        return math.inf if self.value is None else float(self.value)

    def __ge__(self, other):
        return self.as_number() >= _height_number(other)

    def __gt__(self, other):
        return self.as_number() > _height_number(other)

    def __le__(self, other):
        return self.as_number() <= _height_number(other)

    def __lt__(self, other):
        return self.as_number() < _height_number(other)

    def __eq__(self, other):
        if isinstance(other, BoydHeight):
            return self.value == other.value
        if isinstance(other, (int, float)):
            return self.as_number() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return "infinite" if self.value is None else str(self.value)


INFINITE = BoydHeight(None)


def _height_number(x) -> float:
    if isinstance(x, BoydHeight):
        return x.as_number()
    return float(x)


@dataclass(frozen=True)
class SignSplit:
    diagonal: tuple[int, ...]
    r_plus: tuple[int, ...]

    def reconstruct(self) -> tuple[int, ...]:
        return tuple(d * r for d, r in zip(self.diagonal, self.r_plus))


def parse_matrix(text: str) -> TorusHom:
    """Parse ``"1,1;4,4;16,16"`` (rows by ``;``, entries by ``,``)."""
    try:
        rows = [[int(x) for x in row.split(",")] for row in text.strip().split(";")]
        return TorusHom(tuple(tuple(r) for r in rows))
    except ValueError as exc:
        raise MatrixFormatError(f"malformed matrix {text!r}: {exc}") from None


def _as_hom(A) -> TorusHom:
    if isinstance(A, TorusHom):
        return A
    return TorusHom(tuple(tuple(row) for row in A))


def compose(A: TorusHom, B: TorusHom) -> TorusHom:
    """Matrix product ``A B``, i.e. ``q_A o q_B``."""
    A, B = _as_hom(A), _as_hom(B)
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} times {B.shape}")
    bcols = B.columns()
    return TorusHom(tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in bcols)
                          for row in A.entries))


def apply(A: TorusHom, t: Sequence[float]) -> tuple[float, ...]:
    """Angle action ``(A t) mod 1``, landing in ``[0, 1)``."""
    A = _as_hom(A)
    if len(t) != A.cols:
        raise ValueError(f"dimension mismatch: point has {len(t)} angles, matrix has {A.cols} columns")
    out = []
    for row in A.entries:
        x = math.fsum(a * ti for a, ti in zip(row, t)) % 1.0
        out.append(0.0 if x >= 1.0 else x)
    return tuple(out)


def integer_rank(A: TorusHom) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    M = [list(row) for row in _as_hom(A).entries]
    nr, nc = len(M), len(M[0])
    rank, prev = 0, 1
    for col in range(nc):
        piv = next((r for r in range(rank, nr) if M[r][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][col]
        for r in range(rank + 1, nr):
            for c in range(col + 1, nc):
                M[r][c] = (p * M[r][c] - M[r][col] * M[rank][c]) // prev
            M[r][col] = 0
        prev = p
        rank += 1
        if rank == nr:
            break
    return rank


def is_surjective(A: TorusHom) -> bool:
    A = _as_hom(A)
    return integer_rank(A) == A.rows


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    M = [r[:] for r in rows]
    nr, nc = len(M), len(M[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(nr):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return M[:r], pivots


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def left_kernel_basis(A: TorusHom) -> tuple[list[int], list[int], list[list[int]], int]:
    """Integer description of ``{v : v . A = 0}``.

    Returns ``(pivots, free, N, D)``: the kernel is parametrised by the free
    coordinates ``c = v[free]`` with ``v[pivots] = -(N c) / D`` exactly.
    """
    A = _as_hom(A)
    At = [[Fraction(x) for x in col] for col in A.columns()]  # m x n
    R, pivots = _rref(At)
    n = A.rows
    free = [j for j in range(n) if j not in pivots]
    dens = [x.denominator for row in R for x in row]
    D = reduce(_lcm, dens, 1)
    N = [[int(R[i][j] * D) for j in free] for i in range(len(pivots))]
    return pivots, free, N, D


def _kernel_vectors(pivots, free, N, D, n) -> list[list[int]]:
    basis = []
    for k, _ in enumerate(free):
        v = [0] * n
        v[free[k]] = D
        for i, p in enumerate(pivots):
            v[p] = -N[i][k]
        g = reduce(math.gcd, v, 0)
        basis.append([x // g for x in v])
    return basis


def _normalize_sign(v: Sequence[int]) -> tuple[int, ...]:
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def boyd_height(A) -> BoydHeight:
    """Exact minimum ``||v||_inf`` over nonzero integer ``v`` with ``v . A = 0``.

    Infinite exactly when ``A`` has full row rank.  The witness is the
    lexicographically smallest minimiser whose first nonzero entry is positive.

    The search parametrises the left kernel by its free coordinates, takes a
    cleared-denominator kernel vector as a ceiling ``U`` and scans free-coordinate
    shells ``||c||_inf = 1, 2, ...`` until every vector of norm ``<= best`` has
    been seen.  Since ``||c||_inf <= ||v||_inf`` this is exhaustive.
    """
    A = _as_hom(A)
    n = A.rows
    if integer_rank(A) == n:
        return INFINITE
    pivots, free, N, D = left_kernel_basis(A)
    basis = _kernel_vectors(pivots, free, N, D, n)
    best_vec = min((_normalize_sign(v) for v in basis), key=lambda v: (max(map(abs, v)), v))
    best = max(abs(x) for x in best_vec)
    if len(free) == 1:
        # a rank-1 kernel lattice is generated by its primitive vector
        return BoydHeight(best, best_vec)
    ceiling = best
    candidates: list[tuple[int, ...]] = []
    for s in range(1, ceiling + 1):
        for v in kernels.shell_hits(N, D, pivots, free, n, s, best):
            norm = max(abs(x) for x in v)
            if norm < best:
                best, candidates = norm, []
            if norm == best:
                candidates.append(_normalize_sign(v))
        if s >= best:
            break
    if not candidates:
        candidates = [best_vec]
    return BoydHeight(best, min(candidates))


def base_b_family(n: int, m: int, b: int) -> TorusHom:
    """``n x m`` matrix whose every column is ``(1, b, ..., b^(n-1))``; height ``b`` for ``n >= 2``."""
    if n < 1 or m < 1 or b < 1:
        raise ValueError("n, m, b must be positive")
    return TorusHom(tuple((b ** i,) * m for i in range(n)))


def sign_split(r: Sequence[int]) -> SignSplit:
    """Factor ``r = D r_plus`` with ``D = diag(+-1)`` and ``r_plus >= 0`` (zero takes +1)."""
    return SignSplit(tuple(-1 if x < 0 else 1 for x in r), tuple(abs(int(x)) for x in r))

