"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels``.  Set ``MAHLERLIM_BACKEND=python`` to force
the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_INT64_SAFE = 1 << 62


def _load():
    if os.environ.get("MAHLERLIM_BACKEND", "").lower() == "python":
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels
    return _ckernels


_impl = _load()
BACKEND: str = _impl.NAME


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def use_backend(name: str):
    """Switch the active backend (``"python"`` or ``"cython"``); returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    _impl = available_backends()[name]
    BACKEND = _impl.NAME
    return prev


def torus_sum(*args):
    return _impl.torus_sum(*args)


def circle_logabs(*args):
    return _impl.circle_logabs(*args)


def aberth(exps, coefs, z, tol, maxiter):
    return _impl.aberth(exps, coefs, z, tol, maxiter)


def shell_hits(N, D, pivots, free, n, s, bound):
    k = len(free)
    nmax = max((abs(x) for row in N for x in row), default=0)
    if max(nmax * k * s, D, bound) >= _INT64_SAFE:
        return _shell_hits_exact(N, D, pivots, free, n, s, bound)
    arr = np.array(N, dtype=np.int64).reshape(len(pivots), k)
    return _impl.shell_hits(arr, int(D), list(pivots), list(free), n, int(s), int(bound))


def _shell_hits_exact(N, D, pivots, free, n, s, bound):
    # arbitrary-precision path for entries that could overflow int64
    from itertools import product

    out = []
    for c in product(range(-s, s + 1), repeat=len(free)):
        if max(abs(x) for x in c) != s:
            continue
        v = [0] * n
        ok = True
        for i, p in enumerate(pivots):
            acc = sum(a * b for a, b in zip(N[i], c))
            if acc % D:
                ok = False
                break
            v[p] = -(acc // D)
            if abs(v[p]) > bound:
                ok = False
                break
        if ok:
            for j, f in enumerate(free):
                v[f] = c[j]
            out.append(tuple(v))
    return out
