"""Pure numpy implementations of the hot kernels.

Signatures mirror ``_ckernels``; ``kernels`` picks one at import time.
"""
import numpy as np

NAME = "python"

_TWO_PI = 2.0 * np.pi
_INV_2_53 = 2.0 ** -53
_EPS = np.finfo(float).eps


# --- torus integrand --------------------------------------------------------

def _logabs_fixed(u, exps, coefs, lo, hi, const_log, log_clip):
    """log|P| at fixed-point angles ``u`` (uint64, shape (N, n))."""
    if not np.isnan(const_log):
        return np.full(u.shape[0], const_log)
    eu = exps.astype(np.uint64)  # two's complement wrap is exact mod 2^64
    re = np.zeros(u.shape[0])
    im = np.zeros(u.shape[0])
    for t in range(lo, hi):
        ph = np.zeros(u.shape[0], dtype=np.uint64)
        for j in range(exps.shape[1]):
            if exps[t, j]:
                ph += u[:, j] * eu[t, j]
        ang = (ph >> np.uint64(11)).astype(np.float64) * (_INV_2_53 * _TWO_PI)
        c, s = np.cos(ang), np.sin(ang)
        cr, ci = coefs[t].real, coefs[t].imag
        re += cr * c - ci * s
        im += cr * s + ci * c
    with np.errstate(divide="ignore"):
        out = np.log(np.hypot(re, im))
    return np.maximum(out, log_clip)


def torus_sum(alpha, shift, start, count, exps, coefs, offsets, const_logs, kind, log_clip):
    """Sum of the integrand over Kronecker points ``start .. start+count-1``.

    Point ``k`` has fixed-point angles ``k * alpha + shift (mod 2^64)``.
    ``kind``: 0 sum of logs (classic, single poly), 1 max, 2 product.
    """
    idx = np.arange(start, start + count, dtype=np.uint64)
    u = idx[:, None] * alpha[None, :] + shift[None, :]
    acc = None
    for i in range(len(offsets) - 1):
        val = _logabs_fixed(u, exps, coefs, offsets[i], offsets[i + 1], const_logs[i], log_clip)
        if acc is None:
            acc = val
        elif kind == 1:
            acc = np.maximum(acc, val)
        elif kind == 2:
            acc = acc * val
        else:
            acc = acc + val
    return float(np.sum(acc))


# --- circle integrand -------------------------------------------------------

def circle_logabs(exps, coefs, offsets, const_logs, t, log_clip):
    """``log|P_i(exp(2 pi i t))|`` for each packed 1-variable polynomial."""
    t = np.asarray(t, dtype=np.float64)
    k = len(offsets) - 1
    out = np.empty((k, t.shape[0]))
    for i in range(k):
        if not np.isnan(const_logs[i]):
            out[i] = const_logs[i]
            continue
        re = np.zeros(t.shape[0])
        im = np.zeros(t.shape[0])
        for j in range(offsets[i], offsets[i + 1]):
            ph = exps[j] * t
            ph -= np.floor(ph)
            ang = _TWO_PI * ph
            c, s = np.cos(ang), np.sin(ang)
            cr, ci = coefs[j].real, coefs[j].imag
            re += cr * c - ci * s
            im += cr * s + ci * c
        with np.errstate(divide="ignore"):
            out[i] = np.maximum(np.log(np.hypot(re, im)), log_clip)
    return out


# --- Aberth iteration -------------------------------------------------------

def _newton_and_backward(z, exps, coefs, deg):
    """Newton ratio p/p' and relative backward error at each point of ``z``."""
    az = np.abs(z)
    big = az > 1.0
    ratio = np.empty_like(z)
    berr = np.empty(z.shape[0])
    k = exps.astype(np.float64)
    ac = np.abs(coefs)
    if np.any(~big):
        zs = z[~big]
        pw = zs[:, None] ** exps[None, :]
        p = pw @ coefs
        with np.errstate(divide="ignore", invalid="ignore"):
            dp = (pw / zs[:, None]) @ (k * coefs)
        ratio[~big] = p / dp
        berr[~big] = np.abs(p) / ((np.abs(zs)[:, None] ** exps[None, :]) @ ac)
    if np.any(big):
        zb = z[big]
        w = 1.0 / zb
        pw = w[:, None] ** (deg - exps)[None, :]
        ps = pw @ coefs
        dps = pw @ (k * coefs)
        ratio[big] = zb * ps / dps
        berr[big] = np.abs(ps) / ((np.abs(w)[:, None] ** (deg - exps)[None, :]) @ ac)
    return ratio, berr


def aberth(exps, coefs, z, tol, maxiter):
    """Aberth-Ehrlich iteration (Jacobi form) on a sparse polynomial.

    ``exps`` are nonnegative with minimum 0; ``z`` holds ``deg`` starting
    points and is updated in place.  A root is frozen once its correction is
    below ``tol * |z|`` or its backward error is at rounding level.
    Returns ``(iterations, converged_mask)``.
    """
    deg = int(exps.max())
    done = np.zeros(z.shape[0], dtype=bool)
    be_tol = _EPS * (4 * deg + 8)
    block = max(1, (1 << 21) // max(deg, 1))
    it = 0
    for it in range(1, maxiter + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            it -= 1
            break
        ratio, berr = _newton_and_backward(z[act], exps, coefs, deg)
        corr = np.empty(act.size, dtype=z.dtype)
        for s in range(0, act.size, block):
            sl = act[s:s + block]
            diff = z[sl, None] - z[None, :]
            diff[np.arange(sl.size), sl] = 1.0
            S = (1.0 / diff).sum(axis=1) - 1.0
            r = ratio[s:s + block]
            corr[s:s + block] = r / (1.0 - r * S)
        finite = np.isfinite(corr)
        corr[~finite] = 0.0
        z[act] -= corr
        small = np.abs(corr) <= tol * np.abs(z[act])
        done[act] = (small & finite) | (berr <= be_tol)
    return it, done


# --- height shell search ----------------------------------------------------

def shell_hits(N, D, pivots, free, n, s, bound):
    """Integer kernel vectors whose free part lies on the shell ``||c||_inf = s``.

    ``N`` (r x k int64), ``D``: pivot coordinates are ``-(N c) / D`` and must
    be integral.  Only vectors with ``||v||_inf <= bound`` are returned.
    """
    k = len(free)
    span = np.arange(-s, s + 1, dtype=np.int64)
    out = []
    if k == 1:
        grids = [np.array([[-s], [s]], dtype=np.int64)]
    else:
        rest = np.stack(np.meshgrid(*([span] * (k - 1)), indexing="ij"), -1).reshape(-1, k - 1)
        rest_norm = np.abs(rest).max(axis=1)
        grids = []
        for c0 in span:
            sel = rest if abs(c0) == s else rest[rest_norm == s]
            if sel.size:
                grids.append(np.concatenate([np.full((sel.shape[0], 1), c0, dtype=np.int64), sel], axis=1))
    for c in grids:
        if len(pivots):
            P = c @ N.T
            ok = np.all(P % D == 0, axis=1)
            c, P = c[ok], P[ok]
            vp = -(P // D)
            ok = np.abs(vp).max(axis=1) <= bound
            c, vp = c[ok], vp[ok]
        else:
            vp = np.zeros((c.shape[0], 0), dtype=np.int64)
        if not c.shape[0]:
            continue
        v = np.zeros((c.shape[0], n), dtype=np.int64)
        v[:, free] = c
        if len(pivots):
            v[:, pivots] = vp
        out.extend(tuple(int(x) for x in row) for row in v)
    return out
