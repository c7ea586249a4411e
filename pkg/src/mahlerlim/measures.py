"""Classical, max and product Mahler measures.

Three evaluation routes:

* :func:`mahler1_exact` -- Jensen's formula from the roots of a 1-variable
  polynomial;
* :func:`circle_measure` -- adaptive Gauss-Legendre on the circle, with panels
  split at roots lying on the circle;
* :func:`torus_qmc` -- randomly shifted Kronecker points on ``[0,1)^n``.

:func:`boyd_lawton_estimate` reduces an ``n``-variable measure to one variable
through the substitution ``r = (1, b, ..., b^(n-1))``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from . import kernels
from .laurent import GaussQ, LaurentPoly, is_zero, strip_monomial, substitute, to_arrays
from .roots import find_roots
from .squarefree import squarefree_parts
from .torushom import base_b_family, boyd_height

__all__ = [
    "MeasureKind",
    "MeasureEstimate",
    "QmcConfig",
    "MeasureError",
    "ZeroSubstitutionError",
    "CLASSIC",
    "mahler1_exact",
    "circle_measure",
    "torus_qmc",
    "boyd_lawton_estimate",
    "measure",
]

JENSEN = "JensenExact"
CIRCLE = "CircleQuadrature"
QMC = "TorusQMC"
BOYD_LAWTON = "BoydLawtonLimit"

ON_CIRCLE_TOL = 1e-6
MIN_WIDTH = 1e-12
GL_NODES = 12
# graded pieces narrower than this fraction of their panel are not bisected:
# below it the integrand is dominated by rounding noise near the singularity
GRADED_FINAL = 2.0 ** -20
QMC_CHUNK = 1 << 16
# exact square-free splitting is skipped above this degree (rational arithmetic cost)
SQUAREFREE_MAX_DEGREE = 1000
NOISE_FACTOR = 4.0
_EPS = float(np.finfo(float).eps)


class MeasureError(ValueError):
    """Invalid input to a measure computation."""


class ZeroSubstitutionError(MeasureError):
    """A power substitution annihilated a polynomial; a larger ``b`` is needed."""


@dataclass(frozen=True)
class MeasureKind:
    """``classic`` (one polynomial), or ``max`` / ``prod`` of ``k`` polynomials."""

    name: str
    k: int = 1

    def __post_init__(self):
        if self.name not in ("classic", "max", "prod"):
            raise ValueError(f"unknown measure kind {self.name!r}")
        if self.k < 1 or (self.name == "classic" and self.k != 1):
            raise ValueError(f"invalid polynomial count {self.k} for {self.name}")

    @classmethod
    def classic(cls) -> MeasureKind:
        return cls("classic", 1)

    @classmethod
    def max(cls, k: int) -> MeasureKind:
        return cls("max", k)

    @classmethod
    def prod(cls, k: int) -> MeasureKind:
        return cls("prod", k)

    @property
    def code(self) -> int:
        return {"classic": 0, "max": 1, "prod": 2}[self.name]

    def __str__(self):
        return "classic" if self.name == "classic" else f"{self.name}({self.k})"


CLASSIC = MeasureKind.classic()


@dataclass
class MeasureEstimate:
    value: float
    error_estimate: float
    method: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "error": self.error_estimate,
                "method": self.method, "detail": dict(self.detail)}


@dataclass(frozen=True)
class QmcConfig:
    """Kronecker-point settings; ``samples`` are per random shift."""

    samples: int = 1 << 18
    shifts: int = 8
    seed: int = 0
    clip: float = 1e-300

    def __post_init__(self):
        if self.samples < 1024:
            raise ValueError("samples must be at least 1024")
        if self.shifts < 2:
            raise ValueError("shifts must be at least 2")
        if not 0.0 < self.clip < 1.0:
            raise ValueError("clip must lie in (0, 1)")


# --- shared validation and packing ------------------------------------------

def _check(kind: MeasureKind, polys: Sequence[LaurentPoly]) -> list[LaurentPoly]:
    polys = list(polys)
    if not polys:
        raise MeasureError("no polynomials given")
    expected = 1 if kind.name == "classic" else kind.k
    if len(polys) != expected:
        raise MeasureError(f"{kind} expects {expected} polynomial(s), got {len(polys)}")
    if len({p.nvars for p in polys}) != 1:
        raise MeasureError("polynomials have different numbers of variables")
    if any(is_zero(p) for p in polys):
        raise MeasureError("zero polynomial has no Mahler measure")
    return polys


def _pack(polys: Sequence[LaurentPoly], flat: bool = False):
    """Concatenate term arrays; single-term polynomials get their exact log|c|."""
    exps, coefs, offsets, consts = [], [], [0], []
    for p in polys:
        e, c = to_arrays(p)
        exps.append(e)
        coefs.append(c)
        offsets.append(offsets[-1] + len(c))
        consts.append(_log_abs_coef(next(iter(p.terms.values()))) if len(p) == 1 else math.nan)
    e = np.ascontiguousarray(np.concatenate(exps), dtype=np.int64)
    if flat:
        e = np.ascontiguousarray(e[:, 0])
    return (e, np.ascontiguousarray(np.concatenate(coefs)),
            np.array(offsets, dtype=np.int64), np.array(consts, dtype=np.float64))


def _log_abs_coef(c) -> float:
    sq = c.re * c.re + c.im * c.im
    return 0.5 * (math.log(sq.numerator) - math.log(sq.denominator))


def _combine(kind: MeasureKind, logs: np.ndarray) -> np.ndarray:
    if kind.name == "max":
        return logs.max(axis=0)
    if kind.name == "prod":
        return logs.prod(axis=0)
    return logs[0]


# --- Jensen -----------------------------------------------------------------

def _univariate_arrays(p: LaurentPoly):
    """Exponents shifted to start at 0, and complex coefficients."""
    _, q = strip_monomial(p)
    e, c = to_arrays(q)
    e = e[:, 0]
    return e - e.min(), c


def mahler1_exact(p: LaurentPoly, root_tol: float = 1e-12) -> MeasureEstimate:
    """``log|a_d| + sum_{|alpha|>1} log|alpha|`` from the roots of ``p``."""
    if p.nvars != 1:
        raise MeasureError("Jensen evaluation requires 1 variable")
    if is_zero(p):
        raise MeasureError("zero polynomial has no Mahler measure")
    if len(p) == 1:
        c = next(iter(p.terms.values()))
        return MeasureEstimate(_log_abs_coef(c), 0.0, JENSEN,
                               {"degree": 0, "root_tol": root_tol, "max_residual": 0.0})
    e, c = _univariate_arrays(p)
    lead = abs(c[np.argmax(e)])
    res = find_roots(e, c, tol=root_tol)
    detail = {"degree": int(e.max()), "iterations": res.iterations, "root_tol": root_tol,
              "max_residual": res.max_weierstrass, "max_backward_error": res.max_backward_error}
    logs = [math.log(lead)] + [math.log(a) for a in np.abs(res.roots) if a > 1.0]
    if res.max_weierstrass > root_tol and e.max() <= SQUAREFREE_MAX_DEGREE:
        # clustered roots: redo Jensen on the exact square-free parts
        _, q = strip_monomial(p)
        dense = [GaussQ()] * (int(e.max()) + 1)
        for k, v in q.items():
            dense[k[0] - int(min(x[0] for x in q.terms))] = v
        lead_q, parts = squarefree_parts(dense)
        if any(k > 1 for k, _ in parts):
            logs = [_log_abs_coef(lead_q)]
            worst = 0.0
            for k, f in parts:
                fe = np.array([i for i, x in enumerate(f) if x], dtype=np.int64)
                fc = np.array([complex(x) for x in f if x])
                r = find_roots(fe, fc, tol=root_tol)
                worst = max(worst, r.max_weierstrass)
                logs += [k * math.log(a) for a in np.abs(r.roots) if a > 1.0]
            detail.update(squarefree=[[k, len(f) - 1] for k, f in parts], max_residual=worst)
    value = math.fsum(logs)
    return MeasureEstimate(value, 0.0, JENSEN, detail)


# --- circle quadrature --------------------------------------------------------

@lru_cache(maxsize=4)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _circle_angles(roots: np.ndarray) -> np.ndarray:
    near = roots[np.abs(np.abs(roots) - 1.0) < ON_CIRCLE_TOL]
    ang = (np.angle(near) / (2 * np.pi)) % 1.0
    ang[ang > 1.0 - MIN_WIDTH] = 0.0
    return np.sort(ang)


def _dedupe(ang: np.ndarray, tol: float) -> np.ndarray:
    if ang.size == 0:
        return ang
    ang = np.sort(ang)
    keep = np.concatenate([[True], np.diff(ang) > tol])
    return ang[keep]


def _contains(sorted_ang: np.ndarray, x: np.ndarray, tol: float) -> np.ndarray:
    if sorted_ang.size == 0:
        return np.zeros(x.shape, dtype=bool)
    i = np.clip(np.searchsorted(sorted_ang, x), 1, sorted_ang.size - 1)
    d = np.minimum(np.abs(sorted_ang[i] - x), np.abs(sorted_ang[i - 1] - x))
    d = np.minimum(d, np.minimum(np.abs(sorted_ang[0] + 1 - x), np.abs(x + 1 - sorted_ang[-1])))
    return d <= tol


def _graded(a: float, c: float, toward_left: bool):
    """Dyadic mesh on [a, c] shrinking toward ``a`` (or ``c``); last entry is the tail piece."""
    L = c - a
    J = max(0, math.ceil(math.log2(L / MIN_WIDTH))) if L > MIN_WIDTH else 0
    cuts = L * 2.0 ** -np.arange(J + 1)
    pieces = [(cuts[j + 1], cuts[j]) for j in range(J)]
    tail = (0.0, cuts[J]) if J else None
    if toward_left:
        pieces = [(a + lo, a + hi) for lo, hi in pieces]
        tail = (a, a + tail[1]) if tail else None
    else:
        pieces = [(c - hi, c - lo) for lo, hi in pieces]
        tail = (c - tail[1], c) if tail else None
    return pieces, tail


def circle_measure(kind: MeasureKind, polys: Sequence[LaurentPoly], panel_tol: float = 1e-10,
                   root_tol: float = 1e-12, clip: float = 1e-300) -> MeasureEstimate:
    """Integrate ``log|P|``, ``max log|P_i|`` or ``prod log|P_i|`` over ``t in [0,1)``.

    ``[0,1)`` is split at the angles of roots with ``||alpha| - 1| < 1e-6``.
    Where the integrand is singular (any root for classic/prod, a common root
    for max) the panel end gets a dyadic mesh down to width ``1e-12``.  Each
    piece is then bisected until Gauss-Legendre on the piece and on its two
    halves agree within the piece's share of ``panel_tol``.  The error
    estimate is the sum of the final deltas plus the unrefined tail pieces.
    """
    polys = _check(kind, polys)
    if polys[0].nvars != 1:
        raise MeasureError("circle quadrature requires 1 variable")
    per_poly = []
    for p in polys:
        if len(p) == 1:
            per_poly.append(np.empty(0))
            continue
        e, c = _univariate_arrays(p)
        per_poly.append(_circle_angles(find_roots(e, c, tol=root_tol).roots))
    breaks = _dedupe(np.concatenate(per_poly + [np.zeros(1)]), MIN_WIDTH)
    if kind.name == "max":
        sets = [_dedupe(a, MIN_WIDTH) for a in per_poly]
        singular = breaks[np.all([_contains(s, breaks, 1e-9) for s in sets], axis=0)] if sets else breaks[:0]
    else:
        singular = _dedupe(np.concatenate(per_poly), MIN_WIDTH)
    is_sing = _contains(singular, breaks, 1e-9) if singular.size else np.zeros(breaks.size, bool)

    packed = _pack(polys, flat=True)
    log_clip = math.log(clip)
    # rounding scale of each |P_i(e(t))|: eps * (terms + 4) * sum |c|
    offs = packed[2]
    scale = np.array([_EPS * (offs[i + 1] - offs[i] + 4) * float(np.abs(packed[1][offs[i]:offs[i + 1]]).sum())
                      for i in range(len(polys))])
    scale[~np.isnan(packed[3])] = 0.0

    def f(t):
        logs = kernels.circle_logabs(*packed, t, log_clip)
        vals = _combine(kind, logs)
        # first-order effect of evaluation rounding on the integrand
        with np.errstate(over="ignore"):
            dl = scale[:, None] * np.exp(-logs)
        if kind.name == "prod":
            others = np.stack([np.prod(np.delete(logs, i, axis=0), axis=0) for i in range(len(polys))])
            noise = np.sum(np.abs(others) * dl, axis=0)
        elif kind.name == "max":
            noise = dl[np.argmax(logs, axis=0), np.arange(logs.shape[1])]
        else:
            noise = dl[0]
        return vals, noise

    xn, wn = _gl(GL_NODES)

    def rule(a, b):
        # evaluate [0.5, 1) as [-0.5, 0): keeps relative precision next to t = 1
        wrap = (a >= 0.5).astype(np.float64)
        a, b = a - wrap, b - wrap
        nodes = a[:, None] + (b - a)[:, None] * xn[None, :]
        vals, noise = f(nodes.ravel())
        return (b - a) * (vals.reshape(nodes.shape) @ wn), (b - a) * (noise.reshape(nodes.shape) @ wn)

    lo, hi, share, final, tails = [], [], [], [], []
    ends = np.append(breaks, 1.0)
    sing_ends = np.append(is_sing, is_sing[0])
    for i in range(breaks.size):
        a, b = float(ends[i]), float(ends[i + 1])
        W = b - a
        sl, sr = bool(sing_ends[i]), bool(sing_ends[i + 1])
        pieces = []
        if sl and sr:
            mid = 0.5 * (a + b)
            p1, t1 = _graded(a, mid, True)
            p2, t2 = _graded(mid, b, False)
            pieces, tl = p1 + p2, [t1, t2]
        elif sl:
            pieces, t1 = _graded(a, b, True)
            tl = [t1]
        elif sr:
            pieces, t1 = _graded(a, b, False)
            tl = [t1]
        else:
            pieces, tl = [(a, b)], []
        for x, y in pieces:
            lo.append(x)
            hi.append(y)
            share.append(panel_tol * (y - x) / W)
            final.append(len(pieces) > 1 and (y - x) < GRADED_FINAL * W)
        tails.extend(t for t in tl if t is not None)

    a = np.array(lo)
    b = np.array(hi)
    tol = np.array(share)
    fixed = np.array(final, dtype=bool)
    q, _ = rule(a, b)
    total, err, evaluations = 0.0, 0.0, a.size
    parts = []
    if tails:
        ta = np.array([t[0] for t in tails])
        tb = np.array([t[1] for t in tails])
        tq, _ = rule(ta, tb)
        parts.append(tq)
        err += float(np.sum(np.abs(tq)))
    while a.size:
        m = 0.5 * (a + b)
        ql, nl = rule(a, m)
        qr, nr = rule(m, b)
        evaluations += 2 * a.size
        fine = ql + qr
        delta = np.abs(fine - q)
        # differences below the evaluation noise cannot be reduced by bisection
        accept = (delta <= tol) | (delta <= NOISE_FACTOR * (nl + nr)) | ((b - a) < 2 * MIN_WIDTH) | fixed
        parts.append(fine[accept])
        err += float(np.sum(delta[accept]))
        keep = ~accept
        a, m, b, tol = a[keep], m[keep], b[keep], tol[keep] / 2
        ql, qr = ql[keep], qr[keep]
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        tol = np.concatenate([tol, tol])
        q = np.concatenate([ql, qr])
        fixed = np.zeros(a.size, dtype=bool)
    total = math.fsum(np.concatenate(parts)) if parts else 0.0
    detail = {"panels": int(breaks.size), "singular_points": int(singular.size),
              "gl_nodes": GL_NODES, "panel_tol": panel_tol, "intervals": int(evaluations)}
    return MeasureEstimate(total, err, CIRCLE, detail)


# --- quasi-Monte Carlo on T^n -------------------------------------------------

@lru_cache(maxsize=16)
def kronecker_multipliers(n: int) -> tuple[int, ...]:
    """64-bit fixed-point ``frac(phi^-j)``, ``phi^(n+1) = phi + 1`` (the R_n sequence)."""
    with mpmath.workdps(60):
        phi = mpmath.findroot(lambda x: x ** (n + 1) - x - 1, 1.5)
        return tuple(int(mpmath.floor(mpmath.frac(phi ** -(j + 1)) * 2 ** 64)) for j in range(n))


def _threads() -> int:
    env = os.environ.get("MAHLER_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _shift(seed: int, index: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed % (1 << 64), index]))
    return rng.integers(0, 1 << 64, size=n, dtype=np.uint64, endpoint=False)


def torus_qmc(kind: MeasureKind, polys: Sequence[LaurentPoly], cfg: QmcConfig = QmcConfig()) -> MeasureEstimate:
    """Randomly shifted Kronecker rule for the measure of ``kind`` over ``T^n``.

    Each ``log|P_i|`` is clamped below at ``log(cfg.clip)``.  The value is the
    mean over shifts and the error estimate the sample standard deviation of
    the per-shift means.  Chunk sums are combined in a fixed order, so the
    result does not depend on ``MAHLER_THREADS``.
    """
    polys = _check(kind, polys)
    n = polys[0].nvars
    exps, coefs, offsets, consts = _pack(polys)
    detail = {"samples": cfg.samples, "shifts": cfg.shifts, "seed": cfg.seed, "clip": cfg.clip,
              "nvars": n, "backend": kernels.BACKEND}
    if not np.any(np.isnan(consts)):
        # only monomials: the integrand is the constant itself
        value = float(_combine(kind, np.maximum(consts, math.log(cfg.clip))[:, None])[0])
        return MeasureEstimate(value, 0.0, QMC, detail)
    alpha = np.array(kronecker_multipliers(n), dtype=np.uint64)
    log_clip = math.log(cfg.clip)
    starts = list(range(0, cfg.samples, QMC_CHUNK))
    shifts = [_shift(cfg.seed, s, n) for s in range(cfg.shifts)]
    jobs = [(s, st) for s in range(cfg.shifts) for st in starts]

    def run(job):
        s, st = job
        cnt = min(QMC_CHUNK, cfg.samples - st)
        return kernels.torus_sum(alpha, shifts[s], st, cnt, exps, coefs, offsets, consts,
                                 kind.code, log_clip)

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            sums = list(pool.map(run, jobs))
    else:
        sums = [run(j) for j in jobs]
    per = len(starts)
    means = np.array([math.fsum(sums[s * per:(s + 1) * per]) / cfg.samples for s in range(cfg.shifts)])
    value = math.fsum(means) / cfg.shifts
    err = float(np.std(means, ddof=1))
    return MeasureEstimate(value, err, QMC, detail)


# --- Boyd-Lawton reduction ----------------------------------------------------

def boyd_lawton_estimate(kind: MeasureKind, polys: Sequence[LaurentPoly], b: int,
                         tol: float | None = None) -> MeasureEstimate:
    """One-variable measure of ``P_i(Z, Z^b, ..., Z^(b^(n-1)))``.

    Classic uses Jensen (``tol`` is the root tolerance); max and prod use
    circle quadrature (``tol`` is the panel tolerance).
    """
    polys = _check(kind, polys)
    if b < 2:
        raise MeasureError("family parameter b must be at least 2")
    n = polys[0].nvars
    r = base_b_family(n, 1, b)
    mu = boyd_height(r)
    subs = [substitute(p, r) for p in polys]
    if any(is_zero(s) for s in subs):
        raise ZeroSubstitutionError(f"substitution with b={b} produced the zero polynomial; increase b")
    if kind.name == "classic":
        inner = mahler1_exact(subs[0], root_tol=tol or 1e-12)
    else:
        inner = circle_measure(kind, subs, panel_tol=tol or 1e-10)
    detail = {"b": b, "mu": str(mu), "inner_method": inner.method,
              "degree": max(s.max_abs_exponent() for s in subs), **inner.detail}
    return MeasureEstimate(inner.value, inner.error_estimate, BOYD_LAWTON, detail)


# --- dispatch -------------------------------------------------------------------

METHODS = ("jensen", "circle", "qmc", "boyd-lawton")


def default_method(kind: MeasureKind, nvars: int) -> str:
    if nvars == 1:
        return "jensen" if kind.name == "classic" else "circle"
    return "qmc"


def measure(kind: MeasureKind, polys: Sequence[LaurentPoly], method: str | None = None,
            **params) -> MeasureEstimate:
    """Dispatch on ``method`` (``jensen``, ``circle``, ``qmc`` or ``boyd-lawton``).

    ``params`` are passed through: ``root_tol`` / ``panel_tol`` / ``cfg`` / ``b``, ``tol``.
    """
    polys = _check(kind, polys)
    n = polys[0].nvars
    method = method or default_method(kind, n)
    if method == "jensen":
        if kind.name != "classic":
            raise MeasureError("jensen method requires a classic measure")
        if n != 1:
            raise MeasureError("jensen method requires 1 variable")
        return mahler1_exact(polys[0], root_tol=params.get("root_tol", 1e-12))
    if method == "circle":
        if n != 1:
            raise MeasureError("circle method requires 1 variable")
        return circle_measure(kind, polys, panel_tol=params.get("panel_tol", 1e-10))
    if method == "qmc":
        return torus_qmc(kind, polys, params.get("cfg", QmcConfig()))
    if method == "boyd-lawton":
        if "b" not in params:
            raise MeasureError("boyd-lawton method requires b")
        return boyd_lawton_estimate(kind, polys, params["b"], params.get("tol"))
    raise MeasureError(f"unknown method {method!r}")
