"""Lattices in F_Q((t))^n truncated to a window.

A lattice E with t^N Λ₀ ⊆ E ⊆ t^{-N} Λ₀ is stored as the t-stable subspace
E / t^N Λ₀ of the 2Nn-dimensional space t^{-N}Λ₀ / t^N Λ₀.  The coordinate of
t^j e_i (j = -N..N-1, i = 1..n) is (j + N) * n + (i - 1), so lower valuations
come first and RREF pivots sit at the most negative powers.

Duality is taken for the anti-diagonal bilinear form B(x, y) = sum x_i y_{n+1-i}:
E^∨ = {y : B(E, y) ⊆ O}.  On the window this is the perp for the pairing
Res B(x, y) dt, which pairs coordinate k with coordinate 2Nn - 1 - k.  The
Frobenius σ acts on coefficients only, and Φ(E) = σ(E^∨).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from . import _kern
from .ff import Field
from .linalg import BudgetExceeded, MismatchError, Subspace, default_budget, frob_power, gaussian_binomial, rref_batches

DEFAULT_WINDOW = 2


class WindowError(ValueError):
    pass


# ------------------------------------------------------------ cocharacters


@dataclass(frozen=True)
class Cochar:
    glpart: tuple
    gmpart: int = 0

    def __post_init__(self):
        object.__setattr__(self, "glpart", tuple(int(a) for a in self.glpart))

    @property
    def n(self) -> int:
        return len(self.glpart)

    @property
    def dominant(self) -> bool:
        return all(a >= b for a, b in zip(self.glpart, self.glpart[1:]))

    @property
    def total(self) -> int:
        return sum(self.glpart)

    def dual(self) -> "Cochar":
        return Cochar(tuple(-a for a in reversed(self.glpart)), -self.gmpart)

    def __str__(self):
        return "(" + ",".join(map(str, self.glpart)) + ")"


def _vec(n: int, plus: int = 0, minus: int = 0) -> tuple:
    return (1,) * plus + (0,) * (n - plus - minus) + (-1,) * minus


def mu(n: int) -> Cochar:
    """ε0 + ε1 + ε2."""
    return Cochar(_vec(n, 2), 1)


def nu(n: int, i: int) -> Cochar:
    """ν_i = ε1+...+ε_{i-1} - ε_{i∨} - ... - ε_{1∨}; for n = 2r even, ν_r = ε1+...+ε_{r-1}."""
    if n % 2 == 0 and i == n // 2:
        return Cochar(_vec(n, i - 1))
    if not 1 <= i <= (n - 1) // 2:
        raise ValueError(f"no ν_{i} for n={n}")
    return Cochar(_vec(n, i - 1, i))


def nu_plus(n: int, i: int) -> Cochar:
    return Cochar(_vec(n, i - 1))


def nu_minus(n: int, i: int) -> Cochar:
    return Cochar(_vec(n, 0, i))


def xi(n: int, i: int) -> Cochar:
    return Cochar(_vec(n, 2 * i - 1))


def tau(n: int, i: int) -> Cochar:
    if n % 2 == 0 and i == n // 2:
        return Cochar((1,) * n, 1)
    return Cochar((0,) * n, 1)


def dominance_leq(lam: Cochar, mu_: Cochar) -> bool:
    if not (lam.dominant and mu_.dominant):
        raise ValueError("dominance order needs dominant cocharacters")
    if lam.n != mu_.n or lam.total != mu_.total or lam.gmpart != mu_.gmpart:
        raise ValueError(f"incomparable cocharacters {lam} and {mu_} (totals differ)")
    a = b = 0
    for x, y in zip(lam.glpart, mu_.glpart):
        a += x
        b += y
        if a > b:
            return False
    return True


# ------------------------------------------------------------ lattices


class TLattice:
    __slots__ = ("field", "n", "N", "rows", "_hash")

    def __init__(self, field: Field, n: int, N: int, rows: np.ndarray):
        rows.flags.writeable = False
        self.field = field
        self.n = n
        self.N = N
        self.rows = rows
        self._hash = None

    @property
    def size(self) -> int:
        return 2 * self.N * self.n

    @property
    def dim(self) -> int:
        """dim E / t^N Λ₀."""
        return self.rows.shape[0]

    @property
    def volume(self) -> int:
        """length(E / Λ₀) in the virtual sense: dim(E/t^NΛ₀) - Nn."""
        return self.dim - self.N * self.n

    def __eq__(self, other):
        return (
            isinstance(other, TLattice)
            and self.field is other.field
            and (self.n, self.N) == (other.n, other.N)
            and self.rows.shape == other.rows.shape
            and np.array_equal(self.rows, other.rows)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.N, self.rows.shape[0], self.rows.tobytes()))
        return self._hash

    def __le__(self, other: "TLattice") -> bool:
        return lat_contains(other, self)

    def __add__(self, other):
        return lat_sum(self, other)

    def __and__(self, other):
        return lat_intersect(self, other)

    def subspace(self) -> Subspace:
        return Subspace(self.field, self.size, self.rows)

    def __repr__(self):
        return f"TLattice(n={self.n}, N={self.N}, vol={self.volume}, gens={describe(self)})"


def _check(A: TLattice, B: TLattice) -> None:
    if A.field is not B.field or A.n != B.n or A.N != B.N:
        raise MismatchError("lattices in different windows")


def idx(n: int, N: int, j: int, i: int) -> int:
    """Window coordinate of t^j e_i (i is 1-based)."""
    return (j + N) * n + (i - 1)


def _shift(rows: np.ndarray, n: int, k: int) -> np.ndarray:
    """Multiply window vectors by t^k, dropping what leaves the window."""
    out = np.zeros_like(rows)
    L = rows.shape[1]
    s = k * n
    if s >= 0:
        if s < L:
            out[:, s:] = rows[:, : L - s]
    else:
        if -s < L:
            out[:, : L + s] = rows[:, -s:]
    return out


def _closure_rows(rows: np.ndarray, n: int, N: int) -> np.ndarray:
    parts = [rows]
    cur = rows
    for _ in range(2 * N - 1):
        cur = _shift(cur, n, 1)
        if not cur.any():
            break
        parts.append(cur)
    return np.vstack(parts)


def _make(field: Field, n: int, N: int, rows: np.ndarray) -> TLattice:
    if rows.shape[0] == 0:
        return TLattice(field, n, N, np.zeros((0, 2 * N * n), dtype=np.int64))
    return TLattice(field, n, N, _kern.rref(np.ascontiguousarray(rows, dtype=np.int64), field.kern))


def from_generators(field: Field, n: int, gens, N: int = DEFAULT_WINDOW) -> TLattice:
    """Smallest lattice containing t^N Λ₀ and the given window vectors."""
    g = np.asarray(gens, dtype=np.int64).reshape(-1, 2 * N * n)
    return _make(field, n, N, _closure_rows(g, n, N))


def from_laurent(field: Field, n: int, vectors: Sequence[dict], N: int = DEFAULT_WINDOW) -> TLattice:
    """Generators given as {(j, i): coeff} meaning sum coeff t^j e_i."""
    out = np.zeros((len(vectors), 2 * N * n), dtype=np.int64)
    for r, v in enumerate(vectors):
        for (j, i), c in v.items():
            if j >= N:
                continue
            if j < -N:
                raise WindowError(f"t^{j} e_{i} is outside the window N={N}")
            out[r, idx(n, N, j, i)] = c
    return from_generators(field, n, out, N)


@lru_cache(maxsize=1024)
def standard(field: Field, n: int, N: int = DEFAULT_WINDOW, k: int = 0) -> TLattice:
    """t^k Λ₀."""
    return diagonal(field, n, [k] * n, N)


def diagonal(field: Field, n: int, exps: Sequence[int], N: int = DEFAULT_WINDOW) -> TLattice:
    """span(t^{a_i} e_i)."""
    rows = []
    for i, a in enumerate(exps, start=1):
        if a < -N:
            raise WindowError(f"t^{a} e_{i} is outside the window N={N}")
        for j in range(a, N):
            v = np.zeros(2 * N * n, dtype=np.int64)
            v[idx(n, N, j, i)] = 1
            rows.append(v)
    if not rows:
        return TLattice(field, n, N, np.zeros((0, 2 * N * n), dtype=np.int64))
    return _make(field, n, N, np.array(rows))


def lat_sum(A: TLattice, B: TLattice) -> TLattice:
    _check(A, B)
    return _make(A.field, A.n, A.N, np.vstack([A.rows, B.rows]))


def lat_intersect(A: TLattice, B: TLattice) -> TLattice:
    _check(A, B)
    if A.dim == 0 or B.dim == 0:
        return _make(A.field, A.n, A.N, np.zeros((0, A.size), dtype=np.int64))
    return TLattice(A.field, A.n, A.N, _kern.intersect(A.rows, B.rows, A.field.kern))


def lat_contains(A: TLattice, B: TLattice) -> bool:
    """B ⊆ A."""
    _check(A, B)
    if B.dim > A.dim:
        return False
    if B.dim == 0:
        return True
    return _kern.rank(np.vstack([A.rows, B.rows]), A.field.kern) == A.dim


def length(big: TLattice, small: TLattice) -> int:
    """length(big / small) for small ⊆ big."""
    if not lat_contains(big, small):
        raise ValueError("length of a non-inclusion")
    return big.dim - small.dim


def lat_scale(E: TLattice, k: int, strict: bool = True) -> TLattice:
    """t^k E.  With strict=False returns t^k E + t^N Λ₀ when t^k E leaves the window."""
    n, N = E.n, E.N
    if k == 0:
        return E
    rows = E.rows
    if k > 0:
        # t^k E ⊇ t^N Λ₀ iff E ⊇ t^{N-k} Λ₀
        if strict and not lat_contains(E, standard(E.field, n, N, N - k)):
            raise WindowError(f"t^{k} E leaves the window N={N}")
        return _make(E.field, n, N, _shift(rows, n, k))
    m = -k
    if rows[:, : m * n].any():
        raise WindowError(f"t^{k} E leaves the window N={N}")
    tail = standard(E.field, n, N, N - m).rows
    return _make(E.field, n, N, np.vstack([_shift(rows, n, k), tail]))


def lat_dual(E: TLattice) -> TLattice:
    L = E.size
    if E.dim == 0:
        return TLattice(E.field, E.n, E.N, np.eye(L, dtype=np.int64))
    return TLattice(E.field, E.n, E.N, _kern.nullspace(np.ascontiguousarray(E.rows[:, ::-1]), L, E.field.kern))


def lat_frob(E: TLattice, e: int, q: int) -> TLattice:
    if e == 0 or E.dim == 0:
        return E
    return _make(E.field, E.n, E.N, frob_power(E.field, q, e)[E.rows])


def gu_Phi(E: TLattice, q: int) -> TLattice:
    """Φ(E) = σ(E^∨)."""
    return lat_frob(lat_dual(E), 1, q)


def pairing_coeff(X: np.ndarray, Y: np.ndarray, n: int, N: int, m: int, field: Field) -> np.ndarray:
    """Matrix of the t^m coefficients of B(x, y) = Σ x_i y_{n+1-i} for window rows x, y."""
    L = 2 * N * n
    a = np.arange(L)
    j = a // n - N
    i = a % n
    jb = m - j + N
    ok = (jb >= 0) & (jb < 2 * N)
    b = jb[ok] * n + (n - 1 - i[ok])
    Xs = np.ascontiguousarray(np.atleast_2d(X)[:, a[ok]])
    Ys = np.ascontiguousarray(np.atleast_2d(Y)[:, b].T)
    return _kern.matmul(Xs, Ys, field.kern)


def rewindow(E: TLattice, N2: int) -> TLattice:
    """The same lattice in a window of size N2 >= N."""
    n, N = E.n, E.N
    if N2 < N:
        raise WindowError("can only enlarge the window")
    pad = (N2 - N) * n
    rows = np.zeros((E.dim, 2 * N2 * n), dtype=np.int64)
    rows[:, pad : pad + E.size] = E.rows
    extra = standard(E.field, n, N2, N).rows
    return _make(E.field, n, N2, np.vstack([rows, extra]))


def is_t_stable(E: TLattice) -> bool:
    return E.dim == 0 or _kern.rank(np.vstack([E.rows, _shift(E.rows, E.n, 1)]), E.field.kern) == E.dim


# ------------------------------------------------------------ relative position


def _rank_rows(M: np.ndarray, field: Field) -> int:
    return 0 if M.shape[0] == 0 else _kern.rank(M, field.kern)


def _jordan_parts(V: TLattice, U: TLattice) -> list[int]:
    """Jordan block sizes of t on V/U (U ⊆ V), largest first."""
    f = V.field
    base = U.dim
    ranks = [V.dim - base]
    cur = V.rows
    while ranks[-1] > 0:
        cur = _shift(cur, V.n, 1)
        ranks.append(_rank_rows(np.vstack([U.rows, cur]), f) - base)
    # ranks[k] = sum max(0, part - k); #parts >= k+1 is ranks[k] - ranks[k+1]
    parts = []
    for k in range(len(ranks) - 1):
        ge = ranks[k] - ranks[k + 1]
        nxt = (ranks[k + 1] - ranks[k + 2]) if k + 2 < len(ranks) else 0
        parts += [k + 1] * (ge - nxt)
    return sorted(parts, reverse=True)


def inv_pos(E0: TLattice, E: TLattice) -> Cochar:
    """Decreasing (a_i) with E = span(t^{a_i} b_i) for some basis (b_i) of E0."""
    _check(E0, E)
    S = lat_sum(E0, E)
    I = lat_intersect(E0, E)
    neg = [-p for p in _jordan_parts(S, E0)]
    pos = _jordan_parts(E0, I)
    a = pos + [0] * (E.n - len(pos) - len(neg)) + sorted(neg, reverse=True)
    return Cochar(tuple(a))


def bounded_by(E: TLattice, base: TLattice, mu_: Cochar) -> bool:
    return dominance_leq(inv_pos(base, E), mu_)


def exact_pos(E: TLattice, base: TLattice, mu_: Cochar) -> bool:
    return inv_pos(base, E).glpart == mu_.glpart


# ------------------------------------------------------------ enumeration


def complement_rows(A: TLattice, B: TLattice) -> np.ndarray:
    """Rows of A (in RREF) completing a basis of B to one of A, for B ⊆ A."""
    f = A.field
    out = []
    cur = B.rows.copy()
    r = B.dim
    for row in A.rows:
        test = np.vstack([cur, row[None, :]])
        rr = _rank_rows(test, f)
        if rr > r:
            cur = test
            r = rr
            out.append(row)
    return np.array(out, dtype=np.int64).reshape(-1, A.size)


def enumerate_bounded(E0: TLattice, mu_: Cochar, budget: int | None = None) -> Iterator[TLattice]:
    """All E with inv_pos(E0, E) ≼ mu_, for bounds with entries in {-1, 0, 1}.

    Such E satisfy tE0 ⊆ E ⊆ t^{-1}E0.  They are built in two minuscule steps:
    first E- = E ∩ E0 (a subspace of E0/tE0), then E/E- inside t^{-1}E-/E-,
    meeting E0/E- trivially.
    """
    budget = default_budget() if budget is None else budget
    if not mu_.dominant:
        raise ValueError("bound must be dominant")
    a = mu_.glpart
    if max(a) > 1 or min(a) < -1:
        raise ValueError("only bounds with entries in {-1,0,1} are supported")
    n = E0.n
    plus_max = sum(1 for x in a if x == 1)
    seen = 0
    for c in range(plus_max + 1):
        up = c - mu_.total
        if up < 0 or c + up > n:
            continue
        cand = Cochar((1,) * c + (0,) * (n - c - up) + (-1,) * up, mu_.gmpart)
        if not dominance_leq(cand, mu_):
            continue
        for E in _two_step(E0, c, up):
            seen += 1
            if seen > budget:
                raise BudgetExceeded(seen, budget, "lattices")
            yield E


def _grassmannian_lifts(V: TLattice, W: TLattice, k: int) -> Iterator[TLattice]:
    """Lattices W + (lift of a k-dim subspace of V/W), V/W killed by t."""
    f = W.field
    basis = complement_rows(V, W)
    m = basis.shape[0]
    for batch in rref_batches(m, k, f.order):
        for C in batch:
            if k == 0:
                yield W
            else:
                yield _make(f, W.n, W.N, np.vstack([W.rows, _kern.matmul(C, basis, f.kern)]))


def _two_step(E0: TLattice, c: int, up: int) -> Iterator[TLattice]:
    tE0 = lat_scale(E0, 1, strict=False)
    for lower in _grassmannian_lifts(E0, tE0, E0.n - c):
        if up == 0:
            yield lower
            continue
        top = lat_scale(lower, -1)
        for E in _grassmannian_lifts(top, lower, up):
            if lat_intersect(E, E0) == lower:
                yield E


# ------------------------------------------------------------ pair invariants


@dataclass(frozen=True)
class PairInvariants:
    l: int
    d1: int
    d2: int


def pair_invariants(Lx: TLattice, Lx2: TLattice) -> PairInvariants:
    tLx = lat_scale(Lx, 1)
    l = length(Lx, lat_intersect(Lx, Lx2))
    # t²Λx' + tΛx = t(tΛx' + Λx), computed without leaving the window
    A = lat_sum(lat_scale(Lx2, 2, strict=False), tLx)
    d1 = length(A, tLx)
    # (Λx ∩ tΛx') + tΛx = Λx ∩ (tΛx' + tΛx)
    B = lat_intersect(Lx, lat_scale(lat_sum(Lx2, Lx), 1))
    d2 = length(B, tLx)
    if d1 + d2 != l:
        raise AssertionError(f"d1 + d2 != l for the pair: {d1} + {d2} != {l}")
    return PairInvariants(l, d1, d2)


def exx_plus(Lx: TLattice, Lx2: TLattice) -> TLattice:
    """(Λx + Λx') ∩ t^{-1}Λx."""
    return lat_intersect(lat_sum(Lx, Lx2), lat_scale(Lx, -1))


def exx_minus(Lx: TLattice, Lx2: TLattice) -> TLattice:
    """(Λx ∩ Λx') + tΛx."""
    return lat_sum(lat_intersect(Lx, Lx2), lat_scale(Lx, 1))


def e_plusminus(Ep: TLattice, Em: TLattice, Lx2: TLattice) -> TLattice:
    """E+ ∩ (E- + Λx')."""
    return lat_intersect(Ep, lat_sum(Em, Lx2))


# ------------------------------------------------------------ display


def describe(E: TLattice) -> str:
    """Generators as '+'-joined Laurent monomials, e.g. 't^-1 e1'."""
    f = E.field
    out = []
    for row in E.rows:
        terms = []
        for k in np.flatnonzero(row):
            j = k // E.n - E.N
            i = k % E.n + 1
            c = int(row[k])
            coef = "" if c == 1 else f.fmt(c) + "*"
            terms.append(f"{coef}t^{j}e{i}")
        out.append("+".join(terms))
    return "[" + ", ".join(out) + "]"
