import itertools

import numpy as np
import pytest

from hdl.ff import ff_make
from hdl.invariants import duality_algebra, pair_length_identity
from hdl.lattice import (
    Cochar,
    WindowError,
    bounded_by,
    describe,
    diagonal,
    dominance_leq,
    enumerate_bounded,
    from_generators,
    from_laurent,
    gu_Phi,
    idx,
    inv_pos,
    is_t_stable,
    lat_contains,
    lat_dual,
    lat_frob,
    lat_intersect,
    lat_scale,
    lat_sum,
    length,
    nu,
    pair_invariants,
    rewindow,
    standard,
)
from hdl.linalg import enumerate_subspaces, gaussian_binomial

F4 = ff_make(2, 2)


def _random_lattice(rng, n, N=2, lo=-1, hi=1):
    base = standard(F4, n, N, hi)
    a, b = idx(n, N, lo, 1), idx(n, N, hi, 1)
    g = np.zeros((int(rng.integers(1, n + 1)), 2 * N * n), dtype=np.int64)
    g[:, a:b] = rng.integers(0, 4, size=(g.shape[0], b - a))
    return from_generators(F4, n, np.vstack([base.rows, g]), N)


def _inv_by_g(E):
    """Invariant relative to Λ0 from g(j) = dim (E + t^jΛ0)/t^jΛ0 = Σ max(j - a_i, 0)."""
    n = E.n
    W = rewindow(E, E.N + 2)
    N = W.N
    g = {}
    for j in range(-N + 1, N):
        T = standard(F4, n, N, j)
        g[j] = lat_sum(W, T).dim - T.dim
    out = []
    for k in range(-N + 2, N - 1):
        c = (g[k + 1] - g[k]) - (g[k] - g[k - 1])
        out += [k] * c
    return tuple(sorted(out, reverse=True))


def test_inv_pos_examples():
    n = 4
    L0 = standard(F4, n)
    bigger = lat_sum(L0, from_laurent(F4, n, [{(-1, 1): 1}]))
    assert inv_pos(L0, bigger).glpart == (0, 0, 0, -1)
    smaller = lat_intersect(L0, from_generators(F4, n, [np.eye(4 * n, dtype=np.int64)[idx(n, 2, 0, 2)]]) + standard(F4, n, 2, 1))
    assert inv_pos(L0, lat_sum(smaller, standard(F4, n, 2, 1))).glpart == (1, 1, 1, 0)
    assert inv_pos(L0, diagonal(F4, n, [2, -1, 0, 1])).glpart == (2, 1, 0, -1)


def test_inv_pos_against_enlarged_window_oracle():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(2, 5))
        E = _random_lattice(rng, n, N=2, lo=-2, hi=2)
        assert inv_pos(standard(F4, n), E).glpart == _inv_by_g(E)
        # window independence
        assert inv_pos(standard(F4, n, 4), rewindow(E, 4)).glpart == inv_pos(standard(F4, n), E).glpart


def test_bounded_enumeration_against_subspace_brute_force():
    n = 2
    L0 = standard(F4, n)
    lo = lat_scale(L0, 1)
    hi = lat_scale(L0, -1)
    found = set()
    for k in range(2 * n + 1):
        for V in enumerate_subspaces(2 * n, k, F4):
            # V ⊆ t^{-1}Λ0 / tΛ0 with basis t^{-1}e1, t^{-1}e2, e1, e2
            rows = np.zeros((V.dim, 4 * n), dtype=np.int64)
            for r, v in enumerate(V.rows):
                rows[r, idx(n, 2, -1, 1) : idx(n, 2, 1, 1)] = v
            E = from_generators(F4, n, np.vstack([lo.rows, rows]) if V.dim else lo.rows)
            if E.dim - lo.dim == V.dim and is_t_stable(E):
                found.add(E)
    for mu_ in [Cochar((1, -1)), Cochar((1, 0)), Cochar((0, -1)), Cochar((1, 1)), Cochar((0, 0)), Cochar((-1, -1))]:
        listed = set(enumerate_bounded(L0, mu_))
        brute = {E for E in found if inv_pos(L0, E).total == mu_.total and bounded_by(E, L0, mu_)}
        assert listed == brute, mu_


def test_minuscule_cell_counts():
    for n in (3, 4, 5):
        L0 = standard(F4, n)
        assert sum(1 for _ in enumerate_bounded(L0, Cochar((1,) + (0,) * (n - 1)))) == gaussian_binomial(n, 1, 4)
        assert sum(1 for _ in enumerate_bounded(L0, Cochar((0,) * (n - 1) + (-1,)))) == gaussian_binomial(n, 1, 4)


def test_lattice_operations():
    rng = np.random.default_rng(6)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        A, B = _random_lattice(rng, n), _random_lattice(rng, n)
        S, I = lat_sum(A, B), lat_intersect(A, B)
        assert length(S, A) == length(B, I)
        assert lat_contains(S, A) and lat_contains(A, I)
        assert is_t_stable(S) and is_t_stable(I)
        assert lat_dual(S) == lat_intersect(lat_dual(A), lat_dual(B))


def test_duality_suite():
    assert duality_algebra(exhaustive_n=2, sampled_n=5, samples=20).passed


def test_standard_self_dual_and_phi_fixed():
    for n in range(1, 6):
        L0 = standard(F4, n)
        assert lat_dual(L0) == L0 and gu_Phi(L0, 2) == L0
        assert lat_dual(lat_scale(L0, 1)) == lat_scale(L0, -1)


def test_phi_squared_is_sigma_squared_random():
    rng = np.random.default_rng(7)
    for _ in range(40):
        E = _random_lattice(rng, int(rng.integers(2, 6)))
        assert gu_Phi(gu_Phi(E, 2), 2) == lat_frob(E, 2, 2)


def test_cocharacters():
    assert nu(6, 2).glpart == (1, 0, 0, 0, -1, -1)
    assert nu(6, 2).dual().glpart == (1, 1, 0, 0, 0, -1)
    assert nu(6, 3).glpart == (1, 1, 0, 0, 0, 0)
    assert dominance_leq(Cochar((0, 0, 0)), Cochar((1, 0, -1)))
    with pytest.raises(ValueError):
        dominance_leq(Cochar((1, 0)), Cochar((0, 0)))


def test_pair_invariants():
    assert pair_length_identity().passed
    inv = pair_invariants(standard(F4, 6, 3), diagonal(F4, 6, [2, 1, 0, 0, -1, -2], 3))
    assert (inv.l, inv.d1, inv.d2) == (3, 1, 2)


def test_window_errors():
    L0 = standard(F4, 3)
    with pytest.raises(WindowError):
        lat_scale(L0, 3)
    with pytest.raises(WindowError):
        diagonal(F4, 3, [-3, 0, 0])
    with pytest.raises(WindowError):
        rewindow(L0, 1)


def test_describe():
    assert "t^-1" in describe(lat_sum(standard(F4, 2), from_laurent(F4, 2, [{(-1, 1): 1}])))
