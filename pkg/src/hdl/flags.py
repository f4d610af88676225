"""Flags in F^d, relative positions, Bruhat order and Deligne-Lusztig strata.

Relative position of two flags (V_1 < ... < V_l) and (V'_1 < ... < V'_m) is the
rank matrix r[a][b] = dim(V_a ∩ V'_b), with a, b running over 0..l+1 and
0..m+1 (V_0 = 0, V_{l+1} = F^d).  A permutation w of {1..d} has position

    r_w[a][b] = #{ j <= dim V'_b : w(j) <= dim V_a },

i.e. (E_•, w E_•) for the standard flag E_•.  Every rank matrix of a pair of
flags comes from a double coset W_I w W_J; its minimal-length element is the
canonical representative.

The unitary twist of a flag uses the anti-diagonal bilinear form and the
q-power Frobenius F:  e odd sends (V_1 < ... < V_l) to
(F^e V_l^⊥ < ... < F^e V_1^⊥), e even sends it to (F^e V_1 < ... < F^e V_l).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from numba import njit

from . import _kern
from .ff import Field
from .linalg import (
    BudgetExceeded,
    MismatchError,
    Subspace,
    bil_perp_rows,
    default_budget,
    dim_intersection,
    frob_power,
    frob_subspace,
    gaussian_binomial,
    intersect,
    rref_batches,
    span,
)

Perm = tuple  # one-line notation, 1-based images


class TypeMismatch(MismatchError):
    pass


@dataclass(frozen=True)
class FlagType:
    d: int
    dims: tuple

    def __post_init__(self):
        dims = tuple(self.dims)
        object.__setattr__(self, "dims", dims)
        if any(not 1 <= x <= self.d - 1 for x in dims):
            raise ValueError(f"flag dims {dims} out of range for d={self.d}")
        if any(a >= b for a, b in zip(dims, dims[1:])):
            raise ValueError(f"flag dims {dims} not strictly increasing")

    def twisted(self, e: int) -> "FlagType":
        if e % 2:
            return FlagType(self.d, tuple(self.d - x for x in reversed(self.dims)))
        return self

    def count(self, Q: int) -> int:
        """Number of flags of this type over F_Q."""
        c = 1
        top = self.d
        for x in reversed(self.dims):
            c *= gaussian_binomial(top, x, Q)
            top = x
        return c


def type_to_dims(d: int, indices: Sequence[int]) -> FlagType:
    """I_d^{i_1,...,i_l} (simple reflections s_{i_1..i_l} removed) -> dims (i_1..i_l)."""
    return FlagType(d, tuple(sorted(indices)))


class Flag:
    __slots__ = ("type", "spaces")

    def __init__(self, ftype: FlagType, spaces: Sequence[Subspace], check: bool = True):
        spaces = tuple(spaces)
        if check:
            if len(spaces) != len(ftype.dims):
                raise ValueError("wrong number of spaces for flag type")
            for V, x in zip(spaces, ftype.dims):
                if V.dim != x or V.n != ftype.d:
                    raise ValueError(f"space of dim {V.dim} in ambient {V.n}, expected {x} in {ftype.d}")
            for A, B in zip(spaces, spaces[1:]):
                if not A <= B:
                    raise ValueError("flag spaces are not nested")
        self.type = ftype
        self.spaces = spaces

    @property
    def field(self) -> Field:
        return self.spaces[0].field

    def __eq__(self, other):
        return isinstance(other, Flag) and self.type == other.type and self.spaces == other.spaces

    def __hash__(self):
        return hash((self.type, self.spaces))

    def __repr__(self):
        return f"Flag({self.type.dims}, {list(self.spaces)})"


def make_flag(*spaces: Subspace) -> Flag:
    d = spaces[0].n
    return Flag(FlagType(d, tuple(V.dim for V in spaces)), spaces)


# ------------------------------------------------------------ permutations


def perm_length(w: Perm) -> int:
    return sum(1 for a in range(len(w)) for b in range(a + 1, len(w)) if w[a] > w[b])


def perm_mul(u: Perm, v: Perm) -> Perm:
    """(u v)(j) = u(v(j))."""
    return tuple(u[v[j] - 1] for j in range(len(v)))


def perm_inverse(w: Perm) -> Perm:
    inv = [0] * len(w)
    for j, x in enumerate(w):
        inv[x - 1] = j + 1
    return tuple(inv)


def identity(d: int) -> Perm:
    return tuple(range(1, d + 1))


def simple(d: int, i: int) -> Perm:
    """s_i swaps i and i+1."""
    w = list(range(1, d + 1))
    w[i - 1], w[i] = w[i], w[i - 1]
    return tuple(w)


def _bounds(d: int, dims: tuple) -> tuple:
    return (0,) + tuple(dims) + (d,)


def perm_ranks(w: Perm, left: tuple, right: tuple) -> tuple:
    d = len(w)
    L = _bounds(d, left)
    R = _bounds(d, right)
    return tuple(tuple(sum(1 for j in range(rb) if w[j] <= la) for rb in R) for la in L)


@lru_cache(maxsize=None)
def coset_table(d: int, left: tuple, right: tuple) -> dict:
    """rank matrix -> minimal-length permutation, by exhausting S_d."""
    if d > 8:
        raise ValueError("coset tables are built for d <= 8")
    table: dict = {}
    for w in itertools.permutations(range(1, d + 1)):
        r = perm_ranks(w, left, right)
        best = table.get(r)
        if best is None or (perm_length(w), w) < (perm_length(best), best):
            table[r] = w
    return table


@dataclass(frozen=True)
class RelPos:
    d: int
    left: tuple
    right: tuple
    ranks: tuple
    rep: Perm

    def transpose(self) -> "RelPos":
        r = tuple(zip(*self.ranks))
        return relpos_from_ranks(self.d, self.right, self.left, r)

    @property
    def is_identity(self) -> bool:
        return self.rep == identity(self.d)

    def __str__(self):
        return "[" + " ".join(map(str, self.rep)) + "]"


def relpos_from_ranks(d: int, left: tuple, right: tuple, ranks: tuple) -> RelPos:
    table = coset_table(d, tuple(left), tuple(right))
    ranks = tuple(tuple(int(x) for x in row) for row in ranks)
    rep = table.get(ranks)
    if rep is None:
        raise ValueError(f"rank matrix {ranks} is not a relative position")
    return RelPos(d, tuple(left), tuple(right), ranks, rep)


def relpos_of_perm(w: Perm, left: Sequence[int], right: Sequence[int]) -> RelPos:
    left, right = tuple(left), tuple(right)
    return relpos_from_ranks(len(w), left, right, perm_ranks(tuple(w), left, right))


def all_positions(d: int, left: Sequence[int], right: Sequence[int]) -> list[RelPos]:
    left, right = tuple(left), tuple(right)
    t = coset_table(d, left, right)
    return [RelPos(d, left, right, r, w) for r, w in sorted(t.items(), key=lambda kv: (perm_length(kv[1]), kv[1]))]


def spaces_relpos(A: Sequence[Subspace], B: Sequence[Subspace]) -> RelPos:
    d = A[0].n if A else B[0].n
    L = tuple(V.dim for V in A)
    R = tuple(V.dim for V in B)
    inner = [[dim_intersection(X, Y) for Y in B] for X in A]
    full_rows = [tuple([0] * (len(R) + 2))]
    for a, x in enumerate(L):
        full_rows.append(tuple([0] + inner[a] + [x]))
    full_rows.append((0,) + R + (d,))
    return relpos_from_ranks(d, L, R, tuple(full_rows))


def relpos(F: Flag, G: Flag) -> RelPos:
    if F.type.d != G.type.d:
        raise MismatchError("flags in different ambient dimensions")
    return spaces_relpos(F.spaces, G.spaces)


def bruhat_leq(p: RelPos, p2: RelPos) -> bool:
    if (p.d, p.left, p.right) != (p2.d, p2.left, p2.right):
        raise TypeMismatch(f"positions of different types: {p.left}|{p.right} vs {p2.left}|{p2.right}")
    return all(a >= b for ra, rb in zip(p.ranks, p2.ranks) for a, b in zip(ra, rb))


# ------------------------------------------------------------ unitary twist


def gu_frobenius_spaces(spaces: Sequence[Subspace], e: int, q: int) -> list[Subspace]:
    if e < 1:
        raise ValueError("twist exponent must be >= 1")
    if e % 2 == 0:
        return [frob_subspace(V, e, q) for V in spaces]
    out = []
    for V in reversed(spaces):
        P = Subspace(V.field, V.n, bil_perp_rows(V.rows, V.n, V.field))
        out.append(frob_subspace(P, e, q))
    return out


def gu_frobenius_flag(F: Flag, e: int, q: int) -> Flag:
    return Flag(F.type.twisted(e), gu_frobenius_spaces(F.spaces, e, q), check=False)


@dataclass(frozen=True)
class Twist:
    """Condition relpos(F, F^(e)) = target (exact) or <= target (closure)."""

    e: int
    target: RelPos
    closure: bool = False

    def check_type(self, ftype: FlagType) -> None:
        tt = ftype.twisted(self.e)
        if (self.target.d, self.target.left, self.target.right) != (ftype.d, ftype.dims, tt.dims):
            raise TypeMismatch(
                f"twist e={self.e} needs a position of type {ftype.dims}|{tt.dims}, "
                f"got {self.target.left}|{self.target.right}"
            )


def twist(ftype: FlagType, e: int, w: Perm | None = None, closure: bool = False) -> Twist:
    """Twist condition for flags of `ftype`; w=None means the identity coset."""
    w = identity(ftype.d) if w is None else tuple(w)
    return Twist(e, relpos_of_perm(w, ftype.dims, ftype.twisted(e).dims), closure)


def dl_member(F: Flag, twists: Sequence[Twist], q: int) -> bool:
    for t in twists:
        t.check_type(F.type)
        p = relpos(F, gu_frobenius_flag(F, t.e, q))
        if t.closure:
            if not bruhat_leq(p, t.target):
                return False
        elif p.ranks != t.target.ranks:
            return False
    return True


# ------------------------------------------------------------ batch engine


@njit(cache=True)
def _batch_matmul(C, B, fk):
    # C (k, r), B (c, r, d) -> (c, k, d)
    c = B.shape[0]
    out = np.zeros((c, C.shape[0], B.shape[2]), dtype=np.int64)
    for i in range(c):
        out[i] = _kern.matmul(C, B[i], fk)
    return out


@njit(cache=True)
def _dl_mask(members, dims, d, es, ftabs, targets, closure, fk):
    c = members.shape[0]
    l = dims.size
    nt = es.size
    out = np.ones(c, dtype=np.bool_)
    T = np.zeros((l, d, d), dtype=np.int64)
    tdims = np.zeros(l, dtype=np.int64)
    for f in range(c):
        for k in range(nt):
            e = es[k]
            tab = ftabs[k]
            for b in range(l):
                if e % 2 == 1:
                    a = l - 1 - b
                    V = members[f, a, : dims[a], ::-1].copy()
                    P = _kern.nullspace(V, d, fk)
                    tdims[b] = d - dims[a]
                    for i in range(tdims[b]):
                        for j in range(d):
                            T[b, i, j] = tab[P[i, j]]
                else:
                    tdims[b] = dims[b]
                    for i in range(dims[b]):
                        for j in range(d):
                            T[b, i, j] = tab[members[f, b, i, j]]
            ok = True
            for a in range(l):
                for b in range(l):
                    S = np.empty((dims[a] + tdims[b], d), dtype=np.int64)
                    S[: dims[a]] = members[f, a, : dims[a]]
                    S[dims[a] :] = T[b, : tdims[b]]
                    r = dims[a] + tdims[b] - _kern.rank(S, fk)
                    t = targets[k, a, b]
                    if closure[k]:
                        if r < t:
                            ok = False
                    elif r != t:
                        ok = False
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                out[f] = False
                break
    return out


def _inner_flags(top: int, dims: tuple, Q: int) -> np.ndarray:
    """Coefficient flags of type dims inside F^top: array (m, l, top, top)."""
    batches = list(flag_batches(top, dims, Q, chunk=1 << 30))
    if not batches:
        return np.zeros((0, len(dims), top, top), dtype=np.int64)
    return np.concatenate(batches)


def flag_batches(d: int, dims: tuple, Q: int, chunk: int = 1 << 15, field: Field | None = None) -> Iterator[np.ndarray]:
    """All flags of type dims over F_Q as arrays (count, l, d, d); member a in rows [:dims[a]].

    Order: by the top space (RREF order), then recursively by the inner flag.
    """
    l = len(dims)
    if l == 0:
        yield np.zeros((1, 0, d, d), dtype=np.int64)
        return
    top = dims[-1]
    if l == 1:
        for B in rref_batches(d, top, Q, chunk):
            out = np.zeros((B.shape[0], 1, d, d), dtype=np.int64)
            out[:, 0, :top] = B
            yield out
        return
    if field is None:
        from .ff import gf

        field = gf(Q)
    inner = _inner_flags(top, dims[:-1], Q)
    m = inner.shape[0]
    step = max(1, chunk // m)
    for B in rref_batches(d, top, Q, step):
        c = B.shape[0]
        out = np.zeros((c, m, l, d, d), dtype=np.int64)
        out[:, :, l - 1, :top] = B[:, None]
        for k in range(m):
            for a in range(l - 1):
                C = np.ascontiguousarray(inner[k, a, : dims[a], :top])
                out[:, k, a, : dims[a]] = _batch_matmul(C, B, field.kern)
        yield out.reshape(c * m, l, d, d)


def _twist_arrays(ftype: FlagType, twists: Sequence[Twist], field: Field, q: int):
    l = len(ftype.dims)
    es = np.array([t.e for t in twists], dtype=np.int64)
    ftabs = np.stack([frob_power(field, q, t.e) for t in twists]) if twists else np.zeros((0, field.order), dtype=np.int64)
    targets = np.zeros((len(twists), l, l), dtype=np.int64)
    for k, t in enumerate(twists):
        t.check_type(ftype)
        targets[k] = np.array(t.target.ranks, dtype=np.int64)[1 : l + 1, 1 : l + 1]
    closure = np.array([t.closure for t in twists], dtype=np.bool_)
    return es, ftabs, targets, closure


def dl_mask(batch: np.ndarray, ftype: FlagType, twists: Sequence[Twist], field: Field, q: int) -> np.ndarray:
    es, ftabs, targets, closure = _twist_arrays(ftype, twists, field, q)
    if len(twists) == 0:
        return np.ones(batch.shape[0], dtype=bool)
    return _dl_mask(batch, np.array(ftype.dims, dtype=np.int64), ftype.d, es, ftabs, targets, closure, field.kern)


def batch_to_flag(arr: np.ndarray, ftype: FlagType, field: Field) -> Flag:
    spaces = []
    for a, x in enumerate(ftype.dims):
        spaces.append(span(field, ftype.d, arr[a, :x]))
    return Flag(ftype, spaces, check=False)


def dl_enumerate(
    ftype: FlagType, twists: Sequence[Twist], field: Field, q: int, budget: int | None = None
) -> Iterator[Flag]:
    budget = default_budget() if budget is None else budget
    for t in twists:
        t.check_type(ftype)
    need = ftype.count(field.order)
    if need > budget:
        raise BudgetExceeded(need, budget, "flags")
    for batch in flag_batches(ftype.d, ftype.dims, field.order, field=field):
        mask = dl_mask(batch, ftype, twists, field, q)
        for idx in np.flatnonzero(mask):
            yield batch_to_flag(batch[idx], ftype, field)


# ------------------------------------------------------------ projection witnesses


def open_stratum_conditions(V1: Subspace, q: int) -> tuple[bool, bool, bool]:
    """(V1 ⊆ F(V1^⊥), dim(V1 + F²V1) = dim V1 + 1, F³V1 ⊆ V1^⊥)."""
    d = V1.n
    perp = Subspace(V1.field, d, bil_perp_rows(V1.rows, d, V1.field))
    c1 = V1 <= frob_subspace(perp, 1, q)
    c2 = (V1 + frob_subspace(V1, 2, q)).dim == V1.dim + 1
    c3 = frob_subspace(V1, 3, q) <= perp
    return c1, c2, c3


def projection_witness(V1: Subspace, q: int) -> Subspace:
    """V2 = F^{-1}(V1^⊥ ∩ F²(V1^⊥)) for V1 in the open stratum."""
    if not all(open_stratum_conditions(V1, q)):
        raise ValueError("V1 is not in the open stratum")
    d = V1.n
    P = Subspace(V1.field, d, bil_perp_rows(V1.rows, d, V1.field))
    return frob_subspace(intersect(P, frob_subspace(P, 2, q)), -1, q)


def projection_witness_dual(V2: Subspace, q: int) -> Subspace:
    """V1 = F(V2^⊥) ∩ F^{-1}(V2^⊥), the converse construction from the larger space."""
    d = V2.n
    P = Subspace(V2.field, d, bil_perp_rows(V2.rows, d, V2.field))
    V1 = intersect(frob_subspace(P, 1, q), frob_subspace(P, -1, q))
    if V1.dim != d - V2.dim - 1:
        raise ValueError("V2 is not in the open stratum")
    return V1


def fil12(V1: Subspace, V2: Subspace, q: int) -> bool:
    """V1 ⊆ F(V2^⊥) ⊆ V2 ⊆ F(V1^⊥)."""
    d = V1.n
    f = V1.field
    A = frob_subspace(Subspace(f, d, bil_perp_rows(V2.rows, d, f)), 1, q)
    B = frob_subspace(Subspace(f, d, bil_perp_rows(V1.rows, d, f)), 1, q)
    return V1 <= A and A <= V2 and V2 <= B


def open_twists(d: int, i: int) -> list:
    """Twists cutting out the open stratum X^{F,F²,F³}([1],[s_{i-1}],[1]) on (i-1)-spaces."""
    t = FlagType(d, (i - 1,))
    return [twist(t, 1), twist(t, 2, simple(d, i - 1)), twist(t, 3)]


def closed_twists(d: int, i: int) -> list:
    t = FlagType(d, (i - 1,))
    return [twist(t, 1), twist(t, 2, simple(d, i - 1), closure=True), twist(t, 3)]


def dual_twists(d: int, i: int, closure: bool) -> list:
    """X^{F,F²}([1], ≤[s_{d-i}]) (or the exact stratum) on (d-i)-spaces."""
    t = FlagType(d, (d - i,))
    return [twist(t, 1), twist(t, 2, simple(d, d - i), closure=closure)]


def projection_image_report(d: int, i: int, field: Field, q: int, forward: bool = True, budget: int | None = None) -> dict:
    """Witnesses for the open stratum and forward containment of the projection image."""
    if not 2 <= i <= d // 2:
        raise ValueError("need 2 <= i <= d/2")
    t1 = FlagType(d, (i - 1,))
    t12 = FlagType(d, (i - 1, d - i))
    out = {"d": d, "i": i, "field": repr(field), "q": q}
    n_open = n_ok = 0
    witnesses = []
    for fl in dl_enumerate(t1, open_twists(d, i), field, q, budget):
        n_open += 1
        V1 = fl.spaces[0]
        V2 = projection_witness(V1, q)
        flag = Flag(t12, [V1, V2])
        if V2.dim == d - i and fil12(V1, V2, q) and dl_member(flag, [twist(t12, 1)], q) and flag.spaces[0] == V1:
            n_ok += 1
        elif len(witnesses) < 3:
            witnesses.append([V1.rows.tolist()])
    out.update(open_points=n_open, witnessed=n_ok)
    if forward:
        n_flags = bad1 = bad2 = 0
        for fl in dl_enumerate(t12, [twist(t12, 1)], field, q, budget):
            n_flags += 1
            V1, V2 = fl.spaces
            if not dl_member(Flag(t1, [V1]), closed_twists(d, i), q):
                bad1 += 1
            if not dl_member(Flag(FlagType(d, (d - i,)), [V2]), dual_twists(d, i, True), q):
                bad2 += 1
        out.update(flags=n_flags, forward_failures=bad1, forward_failures_dual=bad2)
    out["counterexamples"] = witnesses
    out["pass"] = n_ok == n_open and (not forward or (out["forward_failures"] == 0 and out["forward_failures_dual"] == 0))
    return out


def projection_dual_image_report(d: int, i: int, field: Field, q: int, budget: int | None = None) -> dict:
    """Every point of the open stratum on (d-i)-spaces lifts via projection_witness_dual."""
    t2 = FlagType(d, (d - i,))
    t12 = FlagType(d, (i - 1, d - i))
    n_open = n_ok = 0
    for fl in dl_enumerate(t2, dual_twists(d, i, False), field, q, budget):
        n_open += 1
        V2 = fl.spaces[0]
        V1 = projection_witness_dual(V2, q)
        if fil12(V1, V2, q) and dl_member(Flag(t12, [V1, V2]), [twist(t12, 1)], q):
            n_ok += 1
    return {"d": d, "i": i, "field": repr(field), "q": q, "open_points": n_open, "witnessed": n_ok, "pass": n_ok == n_open}
