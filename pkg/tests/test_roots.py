import numpy as np
import pytest

from mahlerlim import kernels
from mahlerlim.roots import (RootFindingError, backward_errors, find_roots, initial_guesses,
                             weierstrass_residuals)


def _poly_from_roots(roots):
    c = np.poly(roots)[::-1]  # ascending
    return np.arange(len(c)), c.astype(complex)


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    prev = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


def _match(found, expected, tol):
    found = list(found)
    for r in expected:
        i = int(np.argmin([abs(f - r) for f in found]))
        assert abs(found.pop(i) - r) < tol


def test_known_roots(backend):
    roots = [2.0, -0.5, 1j, -1j, 0.3 + 0.4j]
    e, c = _poly_from_roots(roots)
    res = find_roots(e, c)
    _match(res.roots, roots, 1e-10)


def test_unit_roots_sparse(backend):
    d = 500
    res = find_roots(np.array([0, d]), np.array([-1.0 + 0j, 1.0]))
    assert np.allclose(np.abs(res.roots), 1.0, atol=1e-12)
    ang = np.sort(np.angle(res.roots) % (2 * np.pi))
    assert np.allclose(np.diff(ang), 2 * np.pi / d, atol=1e-9)


def test_multiple_root_accepted_by_backward_error(backend):
    e, c = _poly_from_roots([1.0, 1.0, 1.0, -2.0])
    res = find_roots(e, c)
    assert res.max_backward_error < 1e-12
    assert sum(abs(r - 1) < 1e-4 for r in res.roots) == 3


def test_high_degree_base_b_substitution(backend):
    # 1 + Z + Z^30 + Z^900: the base-30 image of Z1 + Z2 + Z3 + 1
    e = np.array([0, 1, 30, 900])
    c = np.ones(4, dtype=complex)
    res = find_roots(e, c)
    assert res.roots.size == 900
    assert np.max(backward_errors(e, c, res.roots)) < 1e-12


def test_degree_zero_and_one():
    assert find_roots(np.array([0]), np.array([3.0 + 0j])).roots.size == 0
    (r,) = find_roots(np.array([0, 1]), np.array([1.0 + 0j, 2.0])).roots
    assert r == -0.5


def test_requires_constant_term():
    with pytest.raises(ValueError):
        find_roots(np.array([1, 2]), np.array([1.0 + 0j, 1.0]))


def test_iteration_cap_reports_residual():
    e, c = _poly_from_roots([0.5, 2.0, 3.0, -1.0, 1j])
    with pytest.raises(RootFindingError) as info:
        find_roots(e, c, maxiter=1)
    assert info.value.worst_residual > 0


def test_initial_guesses_follow_newton_polygon():
    # roots of modulus 1e-3 and 1e3
    e, c = _poly_from_roots([1e-3, -1e-3, 1e3, -1e3])
    z = np.sort(np.abs(initial_guesses(e, c)))
    assert np.allclose(z, [1e-3, 1e-3, 1e3, 1e3], rtol=1e-6)


def test_residual_functions_vanish_at_roots():
    roots = np.array([0.5, -2.0, 1j])
    e, c = _poly_from_roots(roots)
    assert np.all(weierstrass_residuals(e, c, roots) < 1e-14)
    assert np.all(backward_errors(e, c, roots) < 1e-15)
