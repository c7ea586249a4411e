"""Boyd-Lawton convergence studies and the closed-form identity suite.

A convergence run fixes polynomials ``P_1..P_k`` in ``n`` variables and walks
a schedule of ``b`` values.  Each step substitutes the base-``b`` matrix
(``n x m``, every column ``(1, b, ..., b^(n-1))``), re-certifies that its
Boyd height is exactly ``b`` and measures the substituted polynomials on
``T^m``: Jensen or circle quadrature for ``m = 1``, QMC for ``m >= 2``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .laurent import LaurentPoly, evaluate, is_zero, multiply, parse, substitute
from .measures import (CLASSIC, MeasureEstimate, MeasureError, MeasureKind, QmcConfig,
                       boyd_lawton_estimate, circle_measure, mahler1_exact, torus_qmc)
from .torushom import (BoydHeight, TorusHom, apply, base_b_family, boyd_height, compose,
                       sign_split)

__all__ = [
    "VectorFamily",
    "MatrixFamily",
    "ExperimentSpec",
    "ConvergenceRecord",
    "ConvergenceError",
    "CaseResult",
    "run_convergence",
    "matrix_convergence",
    "identity_suite",
    "property_suite",
    "zeta",
    "hurwitz_zeta",
    "reference_value",
]


# --- special values -------------------------------------------------------------

def hurwitz_zeta(s: int, a, digits: int = 15) -> mpmath.mpf:
    """``sum_{k>=0} (k + a)^-s`` for integer ``s >= 2`` and ``a > 0``, by Euler-Maclaurin.

    With ``N`` explicit terms, the tail is ``x^(1-s)/(s-1) + x^-s/2`` plus the
    Bernoulli corrections ``B_2j/(2j)! * s(s+1)..(s+2j-2) * x^(-s-2j+1)`` at
    ``x = N + a``.  With ``N > digits + s`` the corrections shrink
    geometrically; summation stops once one falls below ``10^-(digits+5)``
    relative to the total.
    """
    if s < 2:
        raise ValueError("s must be at least 2")
    if digits < 1:
        raise ValueError("digits must be positive")
    with mpmath.workdps(digits + 15):
        a = mpmath.mpf(a)
        if a <= 0:
            raise ValueError("a must be positive")
        eps = mpmath.mpf(10) ** -(digits + 5)
        N = int(digits + s) + 10
        total = mpmath.fsum((k + a) ** -s for k in range(N))
        x = N + a
        total += x ** (1 - s) / (s - 1) + x ** -s / 2
        rising = mpmath.mpf(s)          # s (s+1) ... (s+2j-2)
        xpow = x ** (-s - 1)
        j = 1
        while True:
            term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * xpow
            total += term
            if abs(term) < eps * abs(total):
                break
            rising *= (s + 2 * j - 1) * (s + 2 * j)
            xpow /= x * x
            j += 1
            if j > 4 * digits + 50:
                raise ArithmeticError("Euler-Maclaurin tail did not settle")
        return +total


def zeta(s: int, digits: int = 15) -> mpmath.mpf:
    """Riemann zeta at an integer ``s >= 2``, accurate to ``digits`` decimals."""
    return hurwitz_zeta(s, 1, digits)


def _constant_formulas() -> dict[str, Callable[[], mpmath.mpf]]:
    pi = mpmath.pi
    return {
        "classic-linear-3": lambda: 7 * zeta(3, 20) / (2 * pi ** 2),
        "max-4-linear": lambda: 9 * zeta(3, 20) / (2 * pi ** 2) - 93 * zeta(5, 20) / (2 * pi ** 4),
        "prod-(z-1)^3": lambda: -3 * zeta(3, 20) / 2,
        "prod-linear-2": lambda: mpmath.mpf(9) / 2 * mpmath.log(2 * zeta(2, 20)) - mpmath.mpf(15) / 4 * zeta(3, 20),
        # m(1 + Z1 + Z2) = 3 sqrt(3) / (4 pi) * L(chi_-3, 2)
        "classic-linear-2": lambda: (3 * mpmath.sqrt(3) / (4 * pi)
                                     * (hurwitz_zeta(2, mpmath.mpf(1) / 3, 20)
                                        - hurwitz_zeta(2, mpmath.mpf(2) / 3, 20)) / 9),
    }


@lru_cache(maxsize=None)
def reference_value(name: str) -> float:
    """Reference constant for a named identity, computed at 20 digits and rounded to 12."""
    formulas = _constant_formulas()
    if name not in formulas:
        raise KeyError(f"no reference constant named {name!r}")
    with mpmath.workdps(30):
        return float(mpmath.mpf(mpmath.nstr(formulas[name](), 12)))


# --- convergence runs -----------------------------------------------------------

@dataclass(frozen=True)
class VectorFamily:
    """``r = (1, b, ..., b^(n-1))``: limits of 1-variable measures."""

    @property
    def m(self) -> int:
        return 1


@dataclass(frozen=True)
class MatrixFamily:
    """``n x m`` base-``b`` matrices, ``m >= 2``: limits of integrals over ``T^m``."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("matrix family needs m >= 2")


class ConvergenceError(MeasureError):
    """Every step of a convergence run was skipped."""


@dataclass
class ExperimentSpec:
    kind: MeasureKind
    polys: list[LaurentPoly]
    family: VectorFamily | MatrixFamily = field(default_factory=VectorFamily)
    b_schedule: tuple[int, ...] = (5, 10, 20, 40)
    reference: float | None = None
    cfg: QmcConfig = field(default_factory=QmcConfig)
    tol: float | None = None

    def __post_init__(self):
        self.polys = list(self.polys)
        self.b_schedule = tuple(int(b) for b in self.b_schedule)
        if not self.b_schedule:
            raise ValueError("empty b schedule")
        if any(b < 1 for b in self.b_schedule):
            raise ValueError("b values must be positive")
        if any(x >= y for x, y in zip(self.b_schedule, self.b_schedule[1:])):
            raise ValueError("b schedule must be strictly increasing")
        if not self.polys or any(is_zero(p) for p in self.polys):
            raise ValueError("polynomials must be nonzero")
        n = {p.nvars for p in self.polys}
        if len(n) != 1:
            raise ValueError("polynomials have different numbers of variables")
        if n.pop() < 2:
            raise ValueError("convergence runs need at least 2 variables (base-b heights are infinite for n = 1)")

    @property
    def n(self) -> int:
        return self.polys[0].nvars


@dataclass(frozen=True)
class ConvergenceRecord:
    b: int
    mu: BoydHeight
    m_vars: int
    estimate: MeasureEstimate | None
    reference: float | None = None
    deviation: float | None = None

    @property
    def skipped(self) -> bool:
        return self.estimate is None


def _step(spec: ExperimentSpec, b: int) -> ConvergenceRecord:
    m = spec.family.m
    A = base_b_family(spec.n, m, b)
    mu = boyd_height(A)
    if mu != b:
        raise AssertionError(f"height certification failed: base-{b} matrix has height {mu}")
    subs = [substitute(p, A) for p in spec.polys]
    if any(is_zero(s) for s in subs):
        return ConvergenceRecord(b, mu, m, None, spec.reference, None)
    if m == 1:
        if spec.kind.name == "classic":
            inner = mahler1_exact(subs[0], root_tol=spec.tol or 1e-12)
        else:
            inner = circle_measure(spec.kind, subs, panel_tol=spec.tol or 1e-10)
    else:
        inner = torus_qmc(spec.kind, subs, spec.cfg)
    detail = {"b": b, "mu": str(mu), "m": m, **inner.detail}
    est = MeasureEstimate(inner.value, inner.error_estimate, inner.method, detail)
    dev = None if spec.reference is None else abs(est.value - spec.reference)
    return ConvergenceRecord(b, mu, m, est, spec.reference, dev)


def run_convergence(spec: ExperimentSpec) -> list[ConvergenceRecord]:
    """One record per scheduled ``b``, in schedule order.

    Steps whose substitution vanishes identically are kept as skipped records.
    Raises :class:`ConvergenceError` when every step is skipped.
    """
    records = [_step(spec, b) for b in spec.b_schedule]
    if all(r.skipped for r in records):
        raise ConvergenceError("every step produced the zero polynomial; increase b")
    return records


def matrix_convergence(spec: ExperimentSpec) -> list[ConvergenceRecord]:
    """:func:`run_convergence` restricted to matrix families (``m >= 2``)."""
    if not isinstance(spec.family, MatrixFamily):
        raise ValueError("matrix_convergence needs a MatrixFamily spec")
    return run_convergence(spec)


# --- verification suites --------------------------------------------------------

@dataclass(frozen=True)
class CaseResult:
    name: str
    passed: bool
    computed: float | None = None
    reference: float | None = None
    tolerance: float | None = None
    error: float | None = None
    method: str = ""
    note: str = ""
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "computed": self.computed,
                "reference": self.reference, "tolerance": self.tolerance, "error": self.error,
                "method": self.method, "note": self.note}


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _compare(name, est: MeasureEstimate, ref: float, tol: float, secs: float, note: str = "") -> CaseResult:
    dev = abs(est.value - ref)
    return CaseResult(name, bool(dev < tol), est.value, ref, tol, est.error_estimate,
                      est.method, note or f"deviation {dev:.3g}", secs)


def _linear(n: int, const: int = 1) -> LaurentPoly:
    return parse(" + ".join(f"Z{i}" for i in range(1, n + 1)) + f" + {const}", n)


def identity_suite(full: bool = False, qmc_samples: int = 1 << 22, qmc_shifts: int = 8) -> list[CaseResult]:
    """Closed-form identities; ``full`` adds the QMC and matrix-family cases and ``max-4-linear``."""
    out = []
    z1 = parse("Z1 - 1")
    ref = reference_value("prod-(z-1)^3")
    est, secs = _timed(lambda: circle_measure(MeasureKind.prod(3), [z1, z1, z1]))
    out.append(_compare("prod-(z-1)^3", est, ref, 1e-4, secs))

    p3 = _linear(3)
    ref = reference_value("classic-linear-3")
    est, secs = _timed(lambda: boyd_lawton_estimate(CLASSIC, [p3], 50))
    out.append(_compare("classic-linear-3", est, ref, 1e-2, secs))
    if not full:
        return out

    cfg = QmcConfig(samples=qmc_samples, shifts=qmc_shifts)
    est, secs = _timed(lambda: torus_qmc(CLASSIC, [p3], cfg))
    out.append(_compare("classic-linear-3-qmc", est, ref, 2e-2, secs))

    lin = [parse(f"Z{i} + 1", 4) for i in range(1, 5)]
    ref = reference_value("max-4-linear")
    est, secs = _timed(lambda: boyd_lawton_estimate(MeasureKind.max(4), lin, 20))
    out.append(_compare("max-4-linear", est, ref, 2e-2, secs))

    q = parse("Z1 + Z2 + 2")
    ref = reference_value("prod-linear-2")
    est, secs = _timed(lambda: torus_qmc(MeasureKind.prod(3), [q, q, q], cfg))
    out.append(_compare("prod-linear-2", est, ref, 3e-2, secs))

    spec = ExperimentSpec(MeasureKind.prod(3), [q, q, q], MatrixFamily(2), (4, 8, 16), ref, cfg)
    recs, secs = _timed(lambda: matrix_convergence(spec))
    last = recs[-1]
    out.append(_compare("prod-linear-2-matrix", last.estimate, ref, 3e-2, secs,
                        "deviations " + ", ".join(f"b={r.b}: {r.deviation:.3g}" for r in recs)))
    return out


def brute_force_height(A: TorusHom, limit: int) -> int | None:
    """Smallest ``||v||_inf <= limit`` with ``v . A = 0``, or ``None``; plain enumeration."""
    cols = A.columns()
    n = A.rows
    best = None
    for v in np.ndindex(*([2 * limit + 1] * n)):
        v = [x - limit for x in v]
        norm = max(abs(x) for x in v)
        if norm == 0 or (best is not None and norm >= best):
            continue
        if all(sum(a * b for a, b in zip(v, c)) == 0 for c in cols):
            best = norm
    return best


def _random_poly(rng: np.random.Generator, nvars: int, terms: int, span: int = 2, coef: int = 5) -> LaurentPoly:
    while True:
        d = {}
        for _ in range(terms):
            e = tuple(int(x) for x in rng.integers(-span, span + 1, size=nvars))
            c = int(rng.integers(-coef, coef + 1))
            d[e] = c
        p = LaurentPoly(nvars, d)
        if not is_zero(p):
            return p


def _random_univariate(rng: np.random.Generator, max_deg: int = 8) -> LaurentPoly:
    while True:
        deg = int(rng.integers(1, max_deg + 1))
        c = rng.integers(-5, 6, size=deg + 1)
        if c[-1] and c[0]:
            return LaurentPoly(1, {(k,): int(x) for k, x in enumerate(c) if x})


def _random_matrix(rng: np.random.Generator, rows: int, cols: int, span: int = 3) -> TorusHom:
    return TorusHom(tuple(tuple(int(x) for x in rng.integers(-span, span + 1, size=cols))
                          for _ in range(rows)))


def _check(name: str, fn) -> CaseResult:
    t0 = time.perf_counter()
    try:
        ok, note = fn()
    except Exception as exc:  # report, not raise
        ok, note = False, f"{type(exc).__name__}: {exc}"
    return CaseResult(name, bool(ok), note=note, method="property", seconds=time.perf_counter() - t0)


def _prop_base_b():
    bad = [(n, m, b) for n in range(2, 5) for m in range(1, 4) for b in range(1, 11)
           if boyd_height(base_b_family(n, m, b)) != b]
    return not bad, f"{3 * 3 * 10 - len(bad)}/90 base-b heights exact"


def _prop_zero_component(rng):
    bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 6))
        r = [int(x) for x in rng.integers(-9, 10, size=n)]
        r[int(rng.integers(n))] = 0
        if boyd_height(TorusHom.column(r)) != 1:
            bad += 1
    return bad == 0, f"{50 - bad}/50 zero-component vectors have height 1"


def _prop_brute_force(rng, count=200):
    bad = 0
    for _ in range(count):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, n))
        A = _random_matrix(rng, n, m, 3)
        h = boyd_height(A)
        if h.is_infinite:
            ok = _full_rank(A) and brute_force_height(A, 3) is None
        else:
            ok = brute_force_height(A, h.value) == h.value
            cols = A.columns()
            ok = ok and all(sum(a * b for a, b in zip(h.witness, c)) == 0 for c in cols)
        bad += not ok
    return bad == 0, f"{count - bad}/{count} random matrices match brute force"


def _full_rank(A: TorusHom) -> bool:
    M = np.array(A.entries, dtype=float)
    return np.linalg.matrix_rank(M) == A.rows


def _prop_sign_split(rng):
    bad = 0
    for _ in range(100):
        r = [int(x) for x in rng.integers(-12, 13, size=int(rng.integers(2, 5)))]
        s = sign_split(r)
        bad += s.reconstruct() != tuple(r) or boyd_height(TorusHom.column(r)) != boyd_height(TorusHom.column(s.r_plus))
    return bad == 0, f"{100 - bad}/100 sign splits preserve the height"


def _prop_composition(rng, count=100):
    bad = 0
    for _ in range(count):
        l = int(rng.integers(1, 4))
        m = int(rng.integers(2, 4))
        n = int(rng.integers(1, 3))
        b = int(rng.integers(1, 4))
        B = _random_matrix(rng, l, m, 2)
        while boyd_height(B) < b:
            B = _random_matrix(rng, l, m, 2)
        need = l * B.max_norm() * b
        A = base_b_family(m, n, need + int(rng.integers(0, 3)))
        ok = boyd_height(compose(B, A)) >= b
        bad += not ok
    return bad == 0, f"{count - bad}/{count} compositions respect the lower bound"


def _prop_functoriality(rng):
    bad = 0
    for _ in range(40):
        n, m, k = (int(x) for x in rng.integers(1, 4, size=3))
        P = _random_poly(rng, n, 4)
        A = _random_matrix(rng, n, m, 2)
        B = _random_matrix(rng, m, k, 2)
        bad += substitute(substitute(P, A), B) != substitute(P, compose(A, B))
    return bad == 0, f"{40 - bad}/40 substitutions compose"


def _prop_evaluation(rng):
    worst = 0.0
    for _ in range(40):
        n, m = (int(x) for x in rng.integers(1, 4, size=2))
        P = _random_poly(rng, n, 4)
        A = _random_matrix(rng, n, m, 3)
        t = [float(x) for x in rng.random(m)]
        worst = max(worst, abs(evaluate(substitute(P, A), t) - evaluate(P, apply(A, t))))
    return worst < 1e-10, f"max |P^(A)(t) - P(A t)| = {worst:.2g}"


def _prop_jensen_vs_quadrature(rng):
    worst = 0.0
    for _ in range(30):
        P = _random_univariate(rng)
        worst = max(worst, abs(mahler1_exact(P).value - circle_measure(CLASSIC, [P]).value))
    return worst < 1e-5, f"max |Jensen - quadrature| = {worst:.2g}"


def _prop_multiplicativity(rng):
    worst = 0.0
    for _ in range(30):
        P, Q = _random_univariate(rng), _random_univariate(rng)
        lhs = mahler1_exact(multiply(P, Q)).value
        worst = max(worst, abs(lhs - mahler1_exact(P).value - mahler1_exact(Q).value))
    return worst < 1e-9, f"max multiplicativity defect = {worst:.2g}"


def _prop_inversion(rng):
    worst = 0.0
    inv = TorusHom(((-1,),))
    for _ in range(30):
        P = _random_univariate(rng)
        worst = max(worst, abs(mahler1_exact(substitute(P, inv)).value - mahler1_exact(P).value))
    return worst < 1e-9, f"max inversion defect = {worst:.2g}"


def _random_unimodular(rng) -> TorusHom:
    M = [[1, 0], [0, 1]]
    for _ in range(int(rng.integers(1, 5))):
        i = int(rng.integers(2))
        j = 1 - i
        op = int(rng.integers(3))
        if op == 0:
            k = int(rng.choice([-2, -1, 1, 2]))
            M[i] = [a + k * b for a, b in zip(M[i], M[j])]
        elif op == 1:
            M[0], M[1] = M[1], M[0]
        else:
            M[i] = [-a for a in M[i]]
    return TorusHom(tuple(tuple(r) for r in M))


def _prop_unimodular(rng, cfg):
    worst = -math.inf
    for _ in range(3):
        P = _random_poly(rng, 2, 3, span=1, coef=3)
        A = _random_unimodular(rng)
        x = torus_qmc(CLASSIC, [P], cfg)
        y = torus_qmc(CLASSIC, [substitute(P, A)], cfg)
        worst = max(worst, abs(x.value - y.value) - 3 * (x.error_estimate + y.error_estimate) - 1e-3)
    return worst < 0, f"max excess over the statistical band = {worst:.2g}"


def _prop_surjective(cfg):
    A = TorusHom(((1, 0, 2), (0, 1, -1)))
    P = parse("Z1 + Z2 + 1")
    x = torus_qmc(CLASSIC, [P], cfg)
    y = torus_qmc(CLASSIC, [substitute(P, A)], cfg)
    dev = abs(x.value - y.value)
    band = 3 * (x.error_estimate + y.error_estimate) + 1e-3
    return boyd_height(A).is_infinite and dev < band, f"|T^3 - T^2| = {dev:.2g} (band {band:.2g})"


def _prop_limit_consistency(cfg):
    P = parse("Z1 + Z2 + 1")
    v = run_convergence(ExperimentSpec(CLASSIC, [P], VectorFamily(), (40,)))[-1].estimate
    w = run_convergence(ExperimentSpec(CLASSIC, [P], MatrixFamily(2), (16,), cfg=cfg))[-1].estimate
    dev = abs(v.value - w.value)
    band = 3 * (v.error_estimate + w.error_estimate) + 1e-2
    return dev < band, f"|vector - matrix| = {dev:.2g} (band {band:.2g})"


def property_suite(full: bool = False, seed: int = 0) -> list[CaseResult]:
    """Exact and tolerance-based property checks; ``full`` adds the statistical (QMC) ones."""
    rng = np.random.default_rng(seed)
    out = [
        _check("height-base-b", _prop_base_b),
        _check("height-zero-component", lambda: _prop_zero_component(rng)),
        _check("height-brute-force", lambda: _prop_brute_force(rng)),
        _check("height-sign-split", lambda: _prop_sign_split(rng)),
        _check("height-composition-bound", lambda: _prop_composition(rng)),
        _check("substitution-functoriality", lambda: _prop_functoriality(rng)),
        _check("evaluation-compatibility", lambda: _prop_evaluation(rng)),
        _check("jensen-vs-quadrature", lambda: _prop_jensen_vs_quadrature(rng)),
        _check("jensen-multiplicativity", lambda: _prop_multiplicativity(rng)),
        _check("inversion-invariance", lambda: _prop_inversion(rng)),
    ]
    if full:
        cfg = QmcConfig(samples=1 << 18, shifts=8, seed=seed)
        out += [
            _check("unimodular-invariance", lambda: _prop_unimodular(rng, cfg)),
            _check("surjective-composition", lambda: _prop_surjective(cfg)),
            _check("limit-consistency", lambda: _prop_limit_consistency(cfg)),
        ]
    return out


def summarize(results: Sequence[CaseResult]) -> bool:
    return all(r.passed for r in results)
