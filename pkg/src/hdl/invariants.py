"""Structural invariant suites, each checked against an independent oracle.

Every suite returns a CaseReport so the CLI and the tests share one format.
"""
from __future__ import annotations

import itertools

import numpy as np

from .components import standard_basepoint
from .ff import ff_make, gf, is_prime
from .flags import (
    FlagType,
    all_positions,
    bruhat_leq,
    dl_mask,
    flag_batches,
    identity,
    perm_length,
    perm_mul,
    relpos_of_perm,
    simple,
    Twist,
)
from .intersections import CaseReport, NU2_CASES, fixture_exponents, pair_fixture
from .lattice import (
    Cochar,
    diagonal,
    enumerate_bounded,
    from_generators,
    idx,
    gu_Phi,
    inv_pos,
    lat_contains,
    lat_dual,
    lat_frob,
    pair_invariants,
    standard,
)
from .linalg import gaussian_binomial, rref_batches, span


# ------------------------------------------------------------ fields


def prime_powers(limit: int) -> list[tuple[int, int]]:
    out = []
    for p in range(2, limit + 1):
        if is_prime(p):
            m = 1
            while p**m <= limit:
                out.append((p, m))
                m += 1
    return sorted(out, key=lambda pm: (pm[0] ** pm[1], pm[0]))


def _poly_mul_table(p: int, m: int, modulus: list[int]) -> np.ndarray:
    """Schoolbook product of all pairs of base-p digit vectors, reduced by the modulus."""
    Q = p**m
    a = np.arange(Q)
    D = np.stack([(a // p**k) % p for k in range(m)], axis=1)
    prod = np.zeros((Q, Q, 2 * m - 1), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            prod[:, :, i + j] += D[:, None, i] * D[None, :, j]
    prod %= p
    for k in range(2 * m - 2, m - 1, -1):
        top = prod[:, :, k].copy()
        for j in range(m + 1):
            prod[:, :, k - m + j] = (prod[:, :, k - m + j] - top * modulus[j]) % p
    w = p ** np.arange(m)
    return (prod[:, :, :m] * w).sum(axis=2)


def _add_table(p: int, m: int) -> np.ndarray:
    Q = p**m
    a = np.arange(Q)
    out = np.zeros((Q, Q), dtype=np.int64)
    for k in range(m):
        d = (a // p**k) % p
        out += ((d[:, None] + d[None, :]) % p) * p**k
    return out


def field_axioms(limit: int = 256) -> CaseReport:
    """Exhaustive axioms for every field of order <= limit, products against schoolbook arithmetic."""
    rep = CaseReport("field axioms", {"max_order": limit})
    bad = []
    for p, m in prime_powers(limit):
        F = ff_make(p, m)
        Q = F.order
        A = _add_table(p, m)
        M = _poly_mul_table(p, m, F.modulus)
        el = np.arange(Q)
        fast = np.array([[F.mul(int(x), int(y)) for y in el] for x in el]) if Q <= 16 else None
        lg = F.log
        Mt = np.where((el[:, None] == 0) | (el[None, :] == 0), 0, F.exp[np.maximum(lg[:, None], 0) + np.maximum(lg[None, :], 0)])
        ok = np.array_equal(Mt, M) and (fast is None or np.array_equal(fast, M))
        ok &= all(F.add(int(x), int(y)) == A[x, y] for x in range(Q) for y in range(0, Q, max(1, Q // 16)))
        ok &= np.array_equal(A, A.T) and np.array_equal(M, M.T)
        ok &= bool((A[0] == el).all() and (M[1] == el).all())
        ok &= bool(((A == 0).sum(axis=1) == 1).all())
        ok &= bool(((M[1:, 1:] == 1).sum(axis=1) == 1).all())
        ok &= bool((M[1:, 1:] != 0).all())
        for a in range(Q):
            ok &= bool(np.array_equal(A[A[a]], A[a][A]))
            ok &= bool(np.array_equal(M[M[a]], M[a][M]))
            ok &= bool(np.array_equal(M[a][A], A[M[a][:, None], M[a][None, :]]))
            if not ok:
                break
        pw = [1]
        for _ in range(Q - 1):
            pw.append(int(M[pw[-1], F.gen]))
        ok &= pw[-1] == 1 and len(set(pw[:-1])) == Q - 1
        if Q > 2:
            frob = np.array([F.pow(int(x), p) for x in el])
            ok &= bool(np.array_equal(frob[A], A[frob[:, None], frob[None, :]]))
        if not ok:
            bad.append(repr(F))
    rep.counts["fields"] = len(prime_powers(limit))
    rep.add("all axioms hold on every field", not bad, bad, [])
    return rep


# ------------------------------------------------------------ counts


def _q_pascal(n: int, k: int, q: int) -> int:
    if k == 0 or k == n:
        return 1
    if k < 0 or k > n:
        return 0
    return _q_pascal(n - 1, k - 1, q) + q**k * _q_pascal(n - 1, k, q)


def _brute_grassmannian(n: int, k: int, field) -> int:
    vecs = list(itertools.product(range(field.order), repeat=n))
    seen = set()
    for tup in itertools.combinations(vecs, k):
        V = span(field, n, [list(v) for v in tup])
        if V.dim == k:
            seen.add(V)
    return len(seen)


def gaussian_counts(max_n: int = 6, max_k: int = 3, qs=(2, 3)) -> CaseReport:
    rep = CaseReport("gaussian binomial counts", {"max_n": max_n, "max_k": max_k, "q": list(qs)})
    bad = []
    total = 0
    for q in qs:
        for n in range(1, max_n + 1):
            for k in range(0, min(max_k, n) + 1):
                got = sum(B.shape[0] for B in rref_batches(n, k, q))
                total += got
                if not got == gaussian_binomial(n, k, q) == _q_pascal(n, k, q):
                    bad.append((q, n, k, got))
    for n in range(1, 5):
        for k in range(1, min(3, n) + 1):
            if _brute_grassmannian(n, k, ff_make(2)) != gaussian_binomial(n, k, 2):
                bad.append(("brute", n, k))
    F4 = ff_make(2, 2)
    for d, dims in [(3, (1, 2)), (4, (1, 2, 3)), (4, (1, 3)), (5, (2, 3)), (4, (2,))]:
        got = sum(b.shape[0] for b in flag_batches(d, dims, 4, field=F4))
        if got != FlagType(d, dims).count(4):
            bad.append(("flags", d, dims, got))
    rep.counts["subspaces"] = total
    rep.add("enumeration counts = product formula = q-Pascal recurrence", not bad, bad, [])
    return rep


# ------------------------------------------------------------ duality


def _bounds(n: int) -> list[Cochar]:
    out = []
    for plus in range(n + 1):
        for minus in range(n + 1 - plus):
            out.append(Cochar((1,) * plus + (0,) * (n - plus - minus) + (-1,) * minus))
    return out


def _duality_checks(E, L0, q, bad):
    D = lat_dual(E)
    if lat_dual(D) != E:
        bad.append(("dual²", E.rows.tolist()))
    if gu_Phi(gu_Phi(E, q), q) != lat_frob(E, 2, q):
        bad.append(("Φ²", E.rows.tolist()))
    if inv_pos(L0, D) != inv_pos(L0, E).dual():
        bad.append(("inv of dual", E.rows.tolist()))


def duality_algebra(q: int = 2, exhaustive_n: int = 3, sampled_n: int = 6, samples: int = 60, seed: int = 0) -> CaseReport:
    """Bidual, Φ² = σ², order reversal and the dual invariant; exhaustive for small n, sampled above."""
    F = ff_make(2, 2)
    rep = CaseReport("duality and Φ² = σ²", {"q": q, "field": repr(F), "exhaustive_n": exhaustive_n, "sampled_n": sampled_n, "seed": seed})
    bad: list = []
    seen = 0
    for n in range(1, exhaustive_n + 1):
        L0 = standard(F, n)
        lats = sorted({E for mu_ in _bounds(n) for E in enumerate_bounded(L0, mu_)}, key=lambda e: e.rows.tobytes())
        for E in lats:
            _duality_checks(E, L0, q, bad)
            seen += 1
        duals = {E: lat_dual(E) for E in lats[:40]}
        for A, B in itertools.product(lats[:40], repeat=2):
            if lat_contains(B, A) and not lat_contains(duals[A], duals[B]):
                bad.append(("order", A.rows.tolist(), B.rows.tolist()))
    rng = np.random.default_rng(seed)
    for n in range(exhaustive_n + 1, sampled_n + 1):
        L0 = standard(F, n)
        tL0 = standard(F, n, 2, 1)
        lo, hi = idx(n, 2, -1, 1), idx(n, 2, 1, 1)
        for _ in range(samples):
            g = np.zeros((int(rng.integers(1, n + 1)), 4 * n), dtype=np.int64)
            g[:, lo:hi] = rng.integers(0, F.order, size=(g.shape[0], hi - lo))
            E = from_generators(F, n, np.vstack([tL0.rows, g]))
            _duality_checks(E, L0, q, bad)
            seen += 1
    rep.counts["lattices"] = seen
    rep.add("all duality identities hold", not bad, len(bad), 0)
    rep.witnesses = bad[:5]
    return rep


# ------------------------------------------------------------ pair invariants


def pair_length_identity(field=None) -> CaseReport:
    """d1 + d2 = l for every listed fixture and every self-dual diagonal pair with entries in [-2, 2]."""
    F = field or ff_make(2, 2)
    rep = CaseReport("d1 + d2 = l", {"field": repr(F), "n": 6})
    bad = []
    for d1, d2 in NU2_CASES:
        fx = pair_fixture(F, 6, d1, d2)
        inv = pair_invariants(fx.bx.lat, fx.bx2.lat)
        if (inv.d1, inv.d2, inv.l) != (d1, d2, d1 + d2):
            bad.append((d1, d2, inv.d1, inv.d2, inv.l))
    n = 6
    L0 = standard(F, n, 3)
    pairs = 0
    for half in itertools.product(range(-2, 3), repeat=n // 2):
        a = list(half) + [-x for x in reversed(half)]
        inv = pair_invariants(L0, diagonal(F, n, a, 3))
        pairs += 1
        if inv.d1 + inv.d2 != inv.l or inv.l != sum(x for x in a if x > 0):
            bad.append(tuple(a))
    rep.counts["pairs"] = pairs + len(NU2_CASES)
    rep.add("d1 + d2 = l and l = Σ max(a_i, 0)", not bad, bad, [])
    return rep


# ------------------------------------------------------------ strata


def closure_identities(max_d: int = 5, Q: int = 4, q: int = 2) -> CaseReport:
    """Closure stratum ≤ w equals the union of exact strata w' ≤ w, for one twist e ∈ {1, 2}."""
    F = gf(Q)
    rep = CaseReport("closure = union of smaller strata", {"max_d": max_d, "field": repr(F), "q": q})
    bad = []
    types = []
    for d in range(2, max_d + 1):
        types += [FlagType(d, (k,)) for k in range(1, d)]
    types += [FlagType(3, (1, 2)), FlagType(4, (1, 3)), FlagType(4, (1, 2, 3))]
    strata = 0
    for ft in types:
        batches = list(flag_batches(ft.d, ft.dims, Q, field=F))
        for e in (1, 2):
            pos = all_positions(ft.d, ft.dims, ft.twisted(e).dims)
            exact = {}
            for p in pos:
                exact[p] = np.concatenate([dl_mask(b, ft, [Twist(e, p)], F, q) for b in batches])
            total = np.zeros_like(next(iter(exact.values())))
            for p in pos:
                total |= exact[p]
            if not total.all() or sum(int(m.sum()) for m in exact.values()) != total.size:
                bad.append((ft.d, ft.dims, e, "partition"))
            for p in pos:
                strata += 1
                closed = np.concatenate([dl_mask(b, ft, [Twist(e, p, True)], F, q) for b in batches])
                union = np.zeros_like(closed)
                for p2 in pos:
                    if bruhat_leq(p2, p):
                        union |= exact[p2]
                if not np.array_equal(closed, union):
                    bad.append((ft.d, ft.dims, e, str(p)))
    rep.counts["strata"] = strata
    rep.add("exact strata partition the flag variety and closures are unions", not bad, bad, [])
    return rep


# ------------------------------------------------------------ Bruhat order


def reduced_word(w: tuple) -> list[int]:
    """Indices i with w = s_{i_1} ... s_{i_k}, found by peeling right descents."""
    word = []
    w = tuple(w)
    d = len(w)
    while w != identity(d):
        i = next(j for j in range(d - 1) if w[j] > w[j + 1]) + 1
        word.append(i)
        w = perm_mul(w, simple(d, i))
    return word[::-1]


def subword_interval(w: tuple) -> set:
    """{u : u is a product of a subword of a reduced word of w}, the Bruhat interval below w."""
    d = len(w)
    S = {identity(d)}
    for i in reduced_word(w):
        s = simple(d, i)
        S |= {perm_mul(x, s) for x in S}
    return S


def bruhat_oracle(max_d: int = 6, parabolic_d: int = 4) -> CaseReport:
    """Rank-matrix domination vs the subword criterion, on all pairs of S_d and on double cosets."""
    rep = CaseReport("Bruhat order vs subword criterion", {"max_d": max_d, "parabolic_d": parabolic_d})
    bad = []
    pairs = 0
    for d in range(1, max_d + 1):
        full = tuple(range(1, d))
        perms = list(itertools.permutations(range(1, d + 1)))
        pos = {w: relpos_of_perm(w, full, full) for w in perms}
        for w in perms:
            if len(reduced_word(w)) != perm_length(w):
                bad.append(("word", w))
            below = subword_interval(w)
            for u in perms:
                pairs += 1
                if bruhat_leq(pos[u], pos[w]) != (u in below):
                    bad.append((u, w))
    for d in range(2, parabolic_d + 1):
        comps = [tuple(c) for r in range(d) for c in itertools.combinations(range(1, d), r)]
        for left in comps:
            for right in comps:
                ps = all_positions(d, left, right)
                for p in ps:
                    below = subword_interval(p.rep)
                    for p2 in ps:
                        pairs += 1
                        if bruhat_leq(p2, p) != (p2.rep in below):
                            bad.append((left, right, p2.rep, p.rep))
    rep.counts["pairs"] = pairs
    rep.add("rank domination = subword criterion", not bad, len(bad), 0)
    rep.witnesses = bad[:5]
    return rep


SUITES = {
    "field-axioms": field_axioms,
    "gaussian-counts": gaussian_counts,
    "duality": duality_algebra,
    "pair-length": pair_length_identity,
    "closure": closure_identities,
    "bruhat": bruhat_oracle,
}


def run_all() -> list[CaseReport]:
    return [f() for f in SUITES.values()]
