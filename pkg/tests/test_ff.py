import itertools

import numpy as np
import pytest

from hdl.ff import FieldError, embed, embedding_table, ff_make, frobenius, gf, least_irreducible
from hdl.invariants import _add_table, _poly_mul_table, field_axioms, prime_powers


def _irreducible_brute(coeffs, p):
    # no factor of degree <= m/2, by multiplying out all monic pairs
    m = len(coeffs) - 1
    target = tuple(coeffs)
    for a in range(1, m // 2 + 1):
        b = m - a
        for fa in itertools.product(range(p), repeat=a):
            for fb in itertools.product(range(p), repeat=b):
                f = list(fa) + [1]
                g = list(fb) + [1]
                prod = [0] * (m + 1)
                for i, x in enumerate(f):
                    for j, y in enumerate(g):
                        prod[i + j] = (prod[i + j] + x * y) % p
                if tuple(prod) == target:
                    return False
    return True


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (2, 4), (3, 2), (2, 6), (5, 2), (3, 3)])
def test_modulus_is_least_irreducible(p, m):
    mod = least_irreducible(p, m)
    assert mod[-1] == 1 and _irreducible_brute(mod, p)
    # every smaller monic encoding is reducible
    enc = sum(c * p**k for k, c in enumerate(mod[:-1]))
    for smaller in range(enc):
        cs = [(smaller // p**k) % p for k in range(m)] + [1]
        assert not _irreducible_brute(cs, p)


def test_f4_known_values():
    F = ff_make(2, 2)
    assert F.modulus == [1, 1, 1]
    g = F.gen
    assert F.mul(g, g) == F.add(g, 1)
    assert F.fmt(g) == "01"


@pytest.mark.parametrize("p,m", [pm for pm in prime_powers(256) if pm[0] ** pm[1] <= 64])
def test_tables_match_schoolbook(p, m):
    F = ff_make(p, m)
    M = _poly_mul_table(p, m, F.modulus)
    A = _add_table(p, m)
    for a, b in itertools.product(range(F.order), repeat=2):
        assert F.mul(a, b) == M[a, b]
        assert F.add(a, b) == A[a, b]


def test_generator_is_least_primitive():
    for p, m in [(2, 2), (2, 4), (3, 2), (7, 1), (2, 5)]:
        F = ff_make(p, m)
        order = lambda a: next(k for k in range(1, F.order) if F.pow(a, k) == 1)
        prims = [a for a in range(1, F.order) if order(a) == F.order - 1]
        assert F.gen == prims[0]


def test_field_axioms_exhaustive_small():
    assert field_axioms(32).passed


def test_inverse_and_division():
    F = gf(27)
    for a in range(1, 27):
        assert F.mul(a, F.inv(a)) == 1
        x = F(a)
        assert (x / x).value == 1
        assert (x ** -1 * x).value == 1
        assert (x - x).value == 0 and (-x + x).value == 0
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_frobenius_additive_and_order():
    F = ff_make(2, 4)
    t = F.frob_table(2)
    for a, b in itertools.product(range(16), repeat=2):
        assert t[F.add(a, b)] == F.add(int(t[a]), int(t[b]))
        assert t[F.mul(a, b)] == F.mul(int(t[a]), int(t[b]))
    x = np.arange(16)
    for _ in range(4):
        x = t[x]
    assert (x == np.arange(16)).all()
    r = F.root_table(2)
    assert (r[t] == np.arange(16)).all()


def test_subfield_membership():
    F = ff_make(2, 4)
    assert sum(F.in_subfield(a, 2) for a in range(16)) == 4
    assert sum(F.in_subfield(a, 1) for a in range(16)) == 2


@pytest.mark.parametrize("small,big", [((2, 1), (2, 2)), ((2, 2), (2, 4)), ((2, 2), (2, 6)), ((3, 1), (3, 2)), ((2, 3), (2, 6))])
def test_embedding_is_a_ring_map(small, big):
    S, B = ff_make(*small), ff_make(*big)
    e = embedding_table(S, B)
    assert len(set(e.tolist())) == S.order
    for a, b in itertools.product(range(S.order), repeat=2):
        assert e[S.add(a, b)] == B.add(int(e[a]), int(e[b]))
        assert e[S.mul(a, b)] == B.mul(int(e[a]), int(e[b]))
    assert embed(S(1), B) == B(1)


def test_frobenius_element_api():
    F = ff_make(2, 2)
    base = ff_make(2, 1)
    x = F(F.gen)
    assert frobenius(frobenius(x, 1, base), 1, base) == x


def test_errors():
    with pytest.raises(FieldError):
        ff_make(4, 1)
    with pytest.raises(FieldError):
        ff_make(2, 30)
    assert gf(16) is ff_make(2, 4)
