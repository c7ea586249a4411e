"""Simultaneous root finding for sparse univariate polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

MAX_ITER = 500


class RootFindingError(ArithmeticError):
    def __init__(self, message: str, worst_residual: float):
        super().__init__(f"{message} (worst residual {worst_residual:.3g})")
        self.worst_residual = worst_residual


@dataclass
class RootResult:
    roots: np.ndarray
    iterations: int
    max_backward_error: float
    max_weierstrass: float


def initial_guesses(exps: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    """Starting points from the upper convex hull of ``(k, log|c_k|)``.

    Each hull edge ``k_i -> k_j`` contributes ``k_j - k_i`` points on a circle
    of radius ``(|c_{k_i}| / |c_{k_j}|)^(1/(k_j - k_i))``.
    """
    keep = coefs != 0
    exps, coefs = exps[keep], coefs[keep]
    order = np.argsort(exps)
    ks = exps[order]
    ls = np.log(np.abs(coefs[order]))
    hull: list[int] = []
    for i in range(len(ks)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or below the chord a -> i
            cross = (ks[b] - ks[a]) * (ls[i] - ls[a]) - (ls[b] - ls[a]) * (ks[i] - ks[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    deg = int(ks[-1])
    out = np.empty(deg, dtype=np.complex128)
    pos = 0
    sigma = 0.7
    for a, b in zip(hull[:-1], hull[1:]):
        cnt = int(ks[b] - ks[a])
        radius = math.exp((ls[a] - ls[b]) / cnt)
        ang = 2 * np.pi * np.arange(cnt) / cnt + 2 * np.pi * pos / deg + sigma
        out[pos:pos + cnt] = radius * np.exp(1j * ang)
        pos += cnt
    return out


def weierstrass_residuals(exps: np.ndarray, coefs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``|Q(z_i)| / (|a_d| prod_{j != i} |z_i - z_j|)`` relative to ``max(1, |z_i|)``, in log space."""
    deg = int(exps.max())
    lead = abs(coefs[np.argmax(exps)])
    az = np.abs(z)
    out = np.empty(z.shape[0])
    block = max(1, (1 << 20) // max(deg, 1))
    for s in range(0, z.shape[0], block):
        sl = np.arange(s, min(s + block, z.shape[0]))
        diff = np.abs(z[sl, None] - z[None, :])
        diff[np.arange(sl.size), sl] = 1.0
        with np.errstate(divide="ignore"):
            logprod = np.log(diff).sum(axis=1)
            lp = _log_abs_value(exps, coefs, z[sl], deg)
        out[sl] = np.exp(lp - math.log(lead) - logprod) / np.maximum(1.0, az[sl])
    return out


def _log_abs_value(exps, coefs, z, deg):
    az = np.abs(z)
    big = az > 1.0
    res = np.empty(z.shape[0])
    with np.errstate(divide="ignore"):
        if np.any(~big):
            res[~big] = np.log(np.abs((z[~big, None] ** exps[None, :]) @ coefs))
        if np.any(big):
            w = 1.0 / z[big]
            res[big] = deg * np.log(az[big]) + np.log(np.abs((w[:, None] ** (deg - exps)[None, :]) @ coefs))
    return res


def backward_errors(exps: np.ndarray, coefs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``|p(z)| / sum |c_k| |z|^k``, evaluated with ``z^-deg`` scaling outside the disk."""
    deg = int(exps.max())
    ac = np.abs(coefs)
    az = np.abs(z)
    big = az > 1.0
    out = np.empty(z.shape[0])
    if np.any(~big):
        zs = z[~big]
        out[~big] = np.abs((zs[:, None] ** exps[None, :]) @ coefs) / ((az[~big, None] ** exps[None, :]) @ ac)
    if np.any(big):
        w = 1.0 / z[big]
        e = (deg - exps)[None, :]
        out[big] = np.abs((w[:, None] ** e) @ coefs) / ((np.abs(w)[:, None] ** e) @ ac)
    return out


def find_roots(exps, coefs, tol: float = 1e-12, maxiter: int = MAX_ITER) -> RootResult:
    """All roots of ``sum c_k Z^k`` (``exps >= 0``, constant term nonzero).

    A root is accepted when its Weierstrass correction is below ``tol`` or its
    relative backward error is at rounding level (clustered or multiple roots
    cannot reach a small Weierstrass correction in double precision).
    """
    exps = np.asarray(exps, dtype=np.int64)
    coefs = np.asarray(coefs, dtype=np.complex128)
    keep = coefs != 0
    exps, coefs = exps[keep], coefs[keep]
    if exps.size == 0:
        raise ValueError("zero polynomial has no roots")
    if exps.min() != 0:
        raise ValueError("polynomial must have a nonzero constant term")
    deg = int(exps.max())
    if deg == 0:
        return RootResult(np.empty(0, dtype=np.complex128), 0, 0.0, 0.0)
    if deg == 1:
        c0 = coefs[exps == 0].sum()
        c1 = coefs[exps == 1].sum()
        return RootResult(np.array([-c0 / c1]), 0, 0.0, 0.0)
    z = initial_guesses(exps, coefs)
    iters, _ = kernels.aberth(exps, coefs, z, tol, maxiter)
    berr = backward_errors(exps, coefs, z)
    wres = weierstrass_residuals(exps, coefs, z)
    be_tol = np.finfo(float).eps * (4 * deg + 8)
    bad = ~((wres <= tol) | (berr <= be_tol)) | ~np.isfinite(z)
    if np.any(bad):
        worst = float(np.max(np.where(np.isfinite(wres), np.minimum(wres, berr), np.inf)[bad]))
        raise RootFindingError(f"root iteration did not converge after {iters} iterations", worst)
    return RootResult(z, int(iters), float(berr.max()), float(wres.max()))
