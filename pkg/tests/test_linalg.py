import itertools

import numpy as np
import pytest

from hdl.ff import ff_make
from hdl.linalg import (
    BudgetExceeded,
    MismatchError,
    bilinear,
    contains,
    contains_vector,
    dim_intersection,
    enumerate_subspaces,
    frob_subspace,
    gaussian_binomial,
    hermitian,
    intersect,
    perp,
    points,
    span,
    zero,
)
from hdl.invariants import _q_pascal, gaussian_counts

F4 = ff_make(2, 2)
F3 = ff_make(3)


def _random_space(rng, field, n, k):
    return span(field, n, rng.integers(0, field.order, size=(k, n)).tolist())


@pytest.mark.parametrize("q", [2, 3, 4])
def test_grassmannian_counts(q):
    F = ff_make(2, 2) if q == 4 else ff_make(q)
    for n in range(1, 5):
        for k in range(n + 1):
            got = sum(1 for _ in enumerate_subspaces(n, k, F))
            assert got == gaussian_binomial(n, k, q) == _q_pascal(n, k, q)


def test_gaussian_suite():
    assert gaussian_counts().passed


def test_known_binomials():
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(6, 1, 4) == 1365
    assert gaussian_binomial(3, 5, 2) == 0


def test_rref_canonical_and_hashable():
    a = span(F4, 3, [[1, 2, 3], [0, 1, 1]])
    b = span(F4, 3, [[1, 3, 2], [0, 1, 1]])
    c = span(F4, 3, [[F4.mul(2, 1), F4.mul(2, 2), F4.mul(2, 3)], [0, 1, 1]])
    assert a == c and hash(a) == hash(c)
    assert (a == b) == (a.rows.tobytes() == b.rows.tobytes())


def test_dimension_formula_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        A = _random_space(rng, F4, n, int(rng.integers(0, n + 1)))
        B = _random_space(rng, F4, n, int(rng.integers(0, n + 1)))
        S, I = A + B, intersect(A, B)
        assert S.dim + I.dim == A.dim + B.dim
        assert dim_intersection(A, B) == I.dim
        assert contains(S, A) and contains(A, I) and contains(B, I)
        for v in I.rows:
            assert contains_vector(A, v) and contains_vector(B, v)


def test_perp_involution_and_dimension():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        V = _random_space(rng, F4, n, int(rng.integers(0, n + 1)))
        P = perp(V, bilinear(n))
        assert P.dim == n - V.dim
        assert perp(P, bilinear(n)) == V
        for x in V.rows:
            for y in P.rows:
                assert bilinear(n).evaluate(F4, x, y) == 0


def test_hermitian_perp_is_bilinear_perp_of_frobenius():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        V = _random_space(rng, F4, n, int(rng.integers(0, n + 1)))
        H = perp(V, hermitian(n, 2))
        assert H == perp(frob_subspace(V, 1, 2), bilinear(n))
        for x in V.rows:
            for y in H.rows:
                assert hermitian(n, 2).evaluate(F4, x, y) == 0


def test_hermitian_needs_quadratic_extension():
    V = span(F3, 2, [[1, 0]])
    with pytest.raises(MismatchError):
        perp(V, hermitian(2, 3))


def test_frobenius_on_subspaces():
    F = ff_make(2, 4)
    rng = np.random.default_rng(4)
    for _ in range(30):
        V = _random_space(rng, F, 4, 2)
        assert frob_subspace(frob_subspace(V, 1, 2), -1, 2) == V
        assert frob_subspace(V, 4, 2) == V
        assert frob_subspace(V, 2, 4) == V


def test_points_and_zero():
    assert sum(1 for _ in points(F4, 3)) == 21
    assert zero(F4, 3).dim == 0


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        list(enumerate_subspaces(6, 3, F4, budget=10))
