import random

import pytest

from mahlerlim import kernels
from mahlerlim.torushom import (BoydHeight, MatrixFormatError, TorusHom, apply, base_b_family,
                                boyd_height, compose, integer_rank, is_surjective, left_kernel_basis,
                                parse_matrix, sign_split)

from oracles import brute_height


def M(*rows):
    return TorusHom(tuple(tuple(r) for r in rows))


class TestCompose:
    def test_identity(self):
        B = M((1, 2), (3, 4))
        assert compose(TorusHom.identity(2), B) == B

    def test_zero_map(self):
        assert compose(M((1, 1)), M((1,), (-1,))) == M((0,))

    def test_diagonal(self):
        assert compose(M((2, 0), (0, 3)), M((1,), (1,))) == M((2,), (3,))

    def test_matmul_operator(self):
        A, B = M((1, 2)), M((3,), (4,))
        assert A @ B == M((11,))

    def test_mismatch(self):
        with pytest.raises(ValueError):
            compose(M((1, 2)), M((1, 2)))


class TestApply:
    def test_identity(self):
        assert apply(TorusHom.identity(2), (0.1, 0.7)) == (0.1, 0.7)

    def test_doubling(self):
        assert apply(M((2,)), (0.75,)) == (0.5,)

    def test_sum(self):
        assert apply(M((1, 1)), (0.5, 0.75)) == (0.25,)

    def test_negative_entries_land_in_unit_interval(self):
        (x,) = apply(M((-3,)), (0.1,))
        assert 0.0 <= x < 1.0 and abs(x - 0.7) < 1e-12

    def test_mismatch(self):
        with pytest.raises(ValueError):
            apply(M((1, 1)), (0.5,))


class TestRank:
    def test_identity(self):
        assert integer_rank(TorusHom.identity(3)) == 3

    def test_proportional(self):
        assert integer_rank(M((1, 2), (2, 4))) == 1

    def test_family(self):
        assert integer_rank(base_b_family(3, 5, 7)) == 1

    def test_surjective(self):
        assert is_surjective(TorusHom.identity(2))
        assert is_surjective(M((1, 1)))
        assert not is_surjective(TorusHom.column((2, 3)))

    def test_big_entries(self):
        big = 10 ** 30
        assert integer_rank(M((big, 1), (big + 1, 1))) == 2


class TestHeight:
    def test_one_two(self):
        h = boyd_height(TorusHom.column((1, 2)))
        assert h == BoydHeight(2, (2, -1))

    def test_zero_component(self):
        assert boyd_height(TorusHom.column((3, 0))) == 1

    def test_base_b(self):
        h = boyd_height(base_b_family(3, 2, 4))
        assert h.value == 4 and h.witness == (0, 4, -1)

    def test_identity_infinite(self):
        h = boyd_height(TorusHom.identity(2))
        assert h.is_infinite and h.witness is None and str(h) == "infinite"

    def test_infinite_compares_above_integers(self):
        inf = boyd_height(TorusHom.identity(2))
        assert inf > 10 ** 9 and inf >= boyd_height(TorusHom.column((1, 2)))

    def test_witness_annihilates(self):
        A = M((3, 5), (7, -2), (4, 9), (1, 1))
        h = boyd_height(A)
        assert all(sum(v * a for v, a in zip(h.witness, col)) == 0 for col in A.columns())
        assert max(map(abs, h.witness)) == h.value

    def test_one_dimensional_kernel_with_huge_entries(self):
        b = 10 ** 25
        h = boyd_height(base_b_family(2, 1, b))
        assert h == BoydHeight(b, (b, -1))

    def test_int64_overflow_routes_to_exact_search(self):
        b = 2 ** 62
        A = M((1,), (b,), (b,))
        h = boyd_height(A)
        assert h == BoydHeight(1, (0, 1, -1))

    @pytest.mark.parametrize("backend", sorted(kernels.available_backends()))
    def test_backends_agree(self, backend):
        rng = random.Random(5)
        prev = kernels.use_backend(backend)
        try:
            for _ in range(30):
                n = rng.randint(2, 4)
                m = rng.randint(1, n - 1)
                A = TorusHom(tuple(tuple(rng.randint(-4, 4) for _ in range(m)) for _ in range(n)))
                h = boyd_height(A)
                expect = brute_height(A.entries, 4) if integer_rank(A) < n else None
                if expect is not None:
                    assert h.value == expect
        finally:
            kernels.use_backend(prev)


class TestFamily:
    def test_column(self):
        assert base_b_family(2, 1, 5) == TorusHom.column((1, 5))

    def test_displayed(self):
        assert base_b_family(3, 2, 2) == M((1, 1), (2, 2), (4, 4))

    def test_single_row(self):
        A = base_b_family(1, 3, 9)
        assert A == M((1, 1, 1)) and boyd_height(A).is_infinite

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            base_b_family(2, 0, 3)


class TestSignSplit:
    def test_examples(self):
        s = sign_split((-3, 2))
        assert s.diagonal == (-1, 1) and s.r_plus == (3, 2)
        s = sign_split((0, -5))
        assert s.diagonal == (1, -1) and s.r_plus == (0, 5)
        s = sign_split((4, 7))
        assert s.diagonal == (1, 1) and s.r_plus == (4, 7)

    def test_reconstruct(self):
        assert sign_split((-3, 0, 8)).reconstruct() == (-3, 0, 8)


class TestParseMatrix:
    def test_rows_and_columns(self):
        assert parse_matrix("1,1;4,4;16,16") == base_b_family(3, 2, 4)
        assert parse_matrix(" 1 ; 2 ").shape == (2, 1)

    @pytest.mark.parametrize("bad", ["1,x", "", "1,2;3", "1.5"])
    def test_malformed(self, bad):
        with pytest.raises((MatrixFormatError, ValueError)):
            parse_matrix(bad)

    def test_round_trip(self):
        A = M((1, -2), (3, 0))
        assert parse_matrix(A.to_text()) == A


def test_kernel_parametrisation():
    A = M((1, 1), (2, 2), (4, 4))
    pivots, free, N, D = left_kernel_basis(A)
    assert len(pivots) == 1 and len(free) == 2
    for c in [(1, 0), (0, 1), (3, -2)]:
        v = [0] * 3
        for j, f in enumerate(free):
            v[f] = c[j] * D
        for i, p in enumerate(pivots):
            v[p] = -sum(N[i][j] * c[j] for j in range(len(free)))
        assert all(sum(x * a for x, a in zip(v, col)) == 0 for col in A.columns())
