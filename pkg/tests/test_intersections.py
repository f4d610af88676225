import numpy as np
import pytest

from hdl.components import standard_basepoint
from hdl.ff import ff_make
from hdl.intersections import (
    InvalidStratum,
    Perm,
    StratumKey,
    _p_plus_form,
    allowed_keys,
    catalog_nu1_nu1,
    catalog_nu2_nu2,
    double_fermat_points,
    fixture_exponents,
    form_values,
    hermitian_diagonalize,
    key_ok,
    nur_intersection,
    open_intersection,
    p_minus,
    pair_fixture,
    projective_points,
    s_perm,
    same_basepoint_intersection,
    w_perm,
)
from hdl.lattice import lat_intersect, lat_sum

F4 = ff_make(2, 2)


def test_perm_validation():
    assert Perm((2, 1, 3))(1) == 2
    with pytest.raises(InvalidStratum):
        Perm((1, 1, 3))


def test_w_and_s_are_bijections_for_all_keys():
    total = 0
    for n in range(3, 9):
        for i in range(1, n):
            for i2 in range(i, n):
                for d2 in range(n // 2 + 1):
                    for d1 in range(d2 + 1):
                        for k in allowed_keys(n, i, i2, d1, d2):
                            assert key_ok(n, k)
                            w = w_perm(n, i, d2, k.j1, k.j2)
                            s = s_perm(i, i2, d1, d2, k.j1, k.j2)
                            assert sorted(w.images) == list(range(1, n + 1))
                            assert sorted(s.images) == list(range(1, 2 * i))
                            total += 1
    assert total > 300


def test_constraint_keys_at_n6():
    keys = lambda d: sorted((k.j1, k.j2) for k in allowed_keys(6, 2, 2, *d))
    assert keys((0, 1)) == [(0, 0), (1, 0)]
    assert keys((0, 2)) == [(0, 0), (0, 1), (1, 1)]
    assert keys((1, 1)) == [(0, 0)]
    assert keys((0, 3)) == [(0, 1)]
    assert keys((1, 2)) == [(0, 0)]
    assert not key_ok(6, StratumKey(2, 2, 0, 1, -1, 0))


@pytest.mark.parametrize("d", [(0, 1), (0, 2), (1, 1), (0, 3), (1, 2)])
def test_fixture_realizes_pair_invariants(d):
    fx = pair_fixture(F4, 6, *d)
    assert fx.l == d[0] + d[1] == sum(a for a in fx.exps if a > 0)
    assert fx.exps == fixture_exponents(6, *d)


def test_fixture_rejects_impossible():
    with pytest.raises(ValueError):
        fixture_exponents(6, 2, 1)


@pytest.mark.parametrize("p,m,q,n,expect", [(2, 2, 2, 5, 165), (2, 4, 2, 5, 3729), (3, 2, 3, 5, 2440), (2, 4, 4, 4, None)])
def test_diagonalization_matches_counts(p, m, q, n, expect):
    F = ff_make(p, m)
    bx = standard_basepoint(F, n)
    A = hermitian_diagonalize(n, F, q)
    J = np.fliplr(np.eye(n, dtype=np.int64))
    anti = double_fermat_points(bx, q)
    diag = double_fermat_points(bx, q, diag=True)
    assert len(anti) == len(diag)
    if expect is not None:
        assert len(anti) == expect
    # the transform carries diagonal points to anti-diagonal points
    from hdl import _kern

    img = _kern.matmul(diag, A, F.kern)
    assert (form_values(img, J, F, q, 1) == 0).all()


def test_fermat_hypersurface_count_oracle():
    # |{x in P^3(F_4): sum x_i^3 = 0}| = (q^3+1)(q^2+1) = 45
    X = projective_points(F4, 4)
    assert len(X) == 85
    assert int((form_values(X, np.eye(4, dtype=np.int64), F4, 2, 1) == 0).sum()) == 45


def test_same_basepoint_n5():
    r = same_basepoint_intersection(standard_basepoint(F4, 5), 2, 1, 2)
    assert r.passed
    assert r.counts["lattices"] == r.counts["anti_diagonal"] == r.counts["diagonal"] == r.counts["dl_stratum"] == 165
    assert r.counts["closure_triples"] == r.counts["locus_triples"] == 1485


def test_nu1_nu1_catalog():
    reps = catalog_nu1_nu1(F4, 2)
    assert all(r.passed for r in reps)
    assert [r.counts["points"] for r in reps] == [1, 0, 0, 0, 0]


def test_nu1_nu2_minus_locus():
    fx = pair_fixture(F4, 6, 0, 2)
    r = open_intersection(fx, 1, 2, 2)
    assert r.passed and r.counts["points"] == 5
    assert {p[0] for p in r.data["points"]} == set(p_minus(fx, 2))


def test_degenerate_form_on_p_plus():
    rk, literal = _p_plus_form(pair_fixture(F4, 6, 0, 1), 2)
    # the form restricted to P_+ has rank 4: a cone over the 45-point surface
    assert rk == 4 and literal == 165


@pytest.mark.parametrize("d,count", [((0, 1), 45), ((0, 2), 1)])
def test_nur_nur(d, count):
    fx = pair_fixture(F4, 6, *d)
    r = nur_intersection(fx, 2)
    assert r.passed and r.counts["lattice_side"] == count
    if d == (0, 2):
        assert r.data["points"] == [lat_sum(fx.bx.lat, fx.bx2.lat)]


@pytest.mark.parametrize("d", [(0, 3), (1, 2)])
def test_nu2_nu2_small_fixtures(d):
    r = catalog_nu2_nu2(F4, 2, [d])[0]
    assert r.passed, [c.name for c in r.checks if not c.passed]
