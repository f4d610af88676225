"""Subspaces of F^n in reduced row echelon form.

A Subspace is an immutable value: equal subspaces have byte-identical RREF
bases, so they hash and compare cheaply.

>>> from hdl.ff import ff_make
>>> F2 = ff_make(2)
>>> a = span(F2, 3, [[1, 0, 0]]); b = span(F2, 3, [[0, 1, 0]])
>>> (a + b).dim
2
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import _kern
from .ff import Field

DEFAULT_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    def __init__(self, needed: int, budget: int, what: str = "objects"):
        super().__init__(f"enumeration needs {needed} {what}, budget is {budget}")
        self.needed = needed
        self.budget = budget


class MismatchError(ValueError):
    pass


def default_budget() -> int:
    return int(os.environ.get("HDL_BUDGET", DEFAULT_BUDGET))


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for j in range(k):
        num *= q ** (n - j) - 1
        den *= q ** (j + 1) - 1
    return num // den


class Subspace:
    __slots__ = ("field", "n", "rows", "_hash")

    def __init__(self, field: Field, n: int, rows: np.ndarray):
        # rows must already be RREF without zero rows; use span() otherwise
        rows.flags.writeable = False
        self.field = field
        self.n = n
        self.rows = rows
        self._hash = None

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    def key(self) -> bytes:
        return self.rows.tobytes()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.field.order, self.rows.shape[0], self.rows.tobytes()))
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.field is other.field
            and self.n == other.n
            and self.rows.shape == other.rows.shape
            and np.array_equal(self.rows, other.rows)
        )

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)

    def __le__(self, other: "Subspace") -> bool:
        return contains(other, self)

    def __lt__(self, other: "Subspace") -> bool:
        return self.dim < other.dim and contains(other, self)

    def __repr__(self) -> str:
        f = self.field.fmt
        body = "; ".join(" ".join(f(int(x)) for x in r) for r in self.rows)
        return f"Subspace(n={self.n}, dim={self.dim}, [{body}])"

    def lines(self) -> list[list[int]]:
        return [[int(x) for x in r] for r in self.rows]


def _check(A: Subspace, B: Subspace) -> None:
    if A.n != B.n or A.field is not B.field:
        raise MismatchError(f"ambient mismatch: {A.field!r}^{A.n} vs {B.field!r}^{B.n}")


def from_rref(field: Field, n: int, rows) -> Subspace:
    return Subspace(field, n, np.ascontiguousarray(rows, dtype=np.int64).reshape(-1, n))


def span(field: Field, n: int, vectors) -> Subspace:
    M = np.asarray(vectors, dtype=np.int64).reshape(-1, n)
    if M.shape[0] == 0:
        return zero(field, n)
    return Subspace(field, n, _kern.rref(M, field.kern))


def zero(field: Field, n: int) -> Subspace:
    return Subspace(field, n, np.zeros((0, n), dtype=np.int64))


def full(field: Field, n: int) -> Subspace:
    return Subspace(field, n, np.eye(n, dtype=np.int64))


def subspace_sum(A: Subspace, B: Subspace) -> Subspace:
    _check(A, B)
    if A.dim == 0:
        return B
    if B.dim == 0:
        return A
    return span(A.field, A.n, np.vstack([A.rows, B.rows]))


def intersect(A: Subspace, B: Subspace) -> Subspace:
    _check(A, B)
    if A.dim == 0 or B.dim == 0:
        return zero(A.field, A.n)
    return Subspace(A.field, A.n, _kern.intersect(A.rows, B.rows, A.field.kern))


def contains(A: Subspace, B: Subspace) -> bool:
    """B ⊆ A."""
    _check(A, B)
    if B.dim == 0:
        return True
    if B.dim > A.dim:
        return False
    return _kern.rank(np.vstack([A.rows, B.rows]), A.field.kern) == A.dim


def contains_vector(A: Subspace, v) -> bool:
    v = np.asarray(v, dtype=np.int64).reshape(1, A.n)
    if not v.any():
        return True
    return _kern.rank(np.vstack([A.rows, v]), A.field.kern) == A.dim


def dim(A: Subspace) -> int:
    return A.dim


def dim_intersection(A: Subspace, B: Subspace) -> int:
    if A.dim == 0 or B.dim == 0:
        return 0
    return A.dim + B.dim - _kern.rank(np.vstack([A.rows, B.rows]), A.field.kern)


@dataclass(frozen=True)
class PairingDesc:
    """Anti-diagonal pairing on F^d.

    bilinear:  <x, y> = sum_i x_i y_{d+1-i}
    hermitian: <x, y> = sum_i x_i^q y_{d+1-i}   (twist on the first slot)
    """

    kind: str
    d: int
    q: int = 0

    def __post_init__(self):
        if self.kind not in ("bilinear", "hermitian"):
            raise ValueError(f"unknown pairing kind {self.kind!r}")
        if self.kind == "hermitian" and self.q < 2:
            raise ValueError("hermitian pairing needs q")

    def evaluate(self, field: Field, x, y) -> int:
        if self.kind == "hermitian":
            x = [field.pow(int(a), self.q) for a in x]
        acc = 0
        d = self.d
        for i in range(d):
            acc = field.add(acc, field.mul(int(x[i]), int(y[d - 1 - i])))
        return acc


def bilinear(d: int) -> PairingDesc:
    return PairingDesc("bilinear", d)


def hermitian(d: int, q: int) -> PairingDesc:
    return PairingDesc("hermitian", d, q)


def _check_hermitian_field(field: Field, q: int) -> None:
    qq = q * q
    o = field.order
    # F_{q^2} ⊆ field iff field order is a power of q^2
    while o > 1 and o % qq == 0:
        o //= qq
    if o != 1:
        raise MismatchError(f"{field!r} does not contain F_{qq}")


def bil_perp_rows(rows: np.ndarray, n: int, field: Field) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    return _kern.nullspace(np.ascontiguousarray(rows[:, ::-1]), n, field.kern)


def perp(V: Subspace, P: PairingDesc) -> Subspace:
    if V.n != P.d:
        raise MismatchError(f"pairing dimension {P.d} vs ambient {V.n}")
    rows = V.rows
    if P.kind == "hermitian":
        _check_hermitian_field(V.field, P.q)
        rows = V.field.frob_table(P.q)[rows]
    return Subspace(V.field, V.n, bil_perp_rows(rows, V.n, V.field))


def frob_power(field: Field, q: int, e: int) -> np.ndarray:
    """Table of x -> x^(q^e); negative e gives the inverse map."""
    if e == 0:
        return np.arange(field.order, dtype=np.int64)
    r = pow(q, abs(e))
    t = field.frob_table(_reduce_power(field, r))
    if e > 0:
        return t
    inv = np.empty_like(t)
    inv[t] = np.arange(field.order, dtype=np.int64)
    return inv


def _reduce_power(field: Field, r: int) -> int:
    # r is a power of p; x^(p^m) = x, so reduce the exponent of p mod m
    p, m = field.p, field.m
    k = 0
    while r > 1:
        r //= p
        k += 1
    return p ** (k % m)


def frob_subspace(V: Subspace, e: int, q: int) -> Subspace:
    """Coordinatewise x -> x^(q^e).  Negative e applies the inverse Frobenius."""
    if e == 0 or V.dim == 0:
        return V
    t = frob_power(V.field, q, e)
    return span(V.field, V.n, t[V.rows])


def frob_vectors(M: np.ndarray, field: Field, q: int, e: int) -> np.ndarray:
    return frob_power(field, q, e)[M]


# ---------------------------------------------------------------- enumeration


def rref_batches(n: int, k: int, Q: int, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """All k x n RREF matrices over a field of order Q, as int64 arrays (count, k, n).

    Order: pivot tuples lexicographically, then free entries as a base-Q
    counter over the free positions in row-major order (last position fastest).
    """
    if k == 0:
        yield np.zeros((1, 0, n), dtype=np.int64)
        return
    for piv in itertools.combinations(range(n), k):
        free = [(r, c) for r in range(k) for c in range(piv[r] + 1, n) if c not in piv]
        nf = len(free)
        total = Q**nf
        rr = np.array([f[0] for f in free], dtype=np.int64)
        cc = np.array([f[1] for f in free], dtype=np.int64)
        for start in range(0, total, chunk):
            stop = min(total, start + chunk)
            idx = np.arange(start, stop, dtype=np.int64)
            out = np.zeros((stop - start, k, n), dtype=np.int64)
            for r in range(k):
                out[:, r, piv[r]] = 1
            for j in range(nf - 1, -1, -1):
                out[:, rr[j], cc[j]] = idx % Q
                idx //= Q
            yield out


def enumerate_subspaces(n: int, k: int, field: Field, budget: int | None = None) -> Iterator[Subspace]:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    budget = default_budget() if budget is None else budget
    need = gaussian_binomial(n, k, field.order)
    if need > budget:
        raise BudgetExceeded(need, budget, "subspaces")
    for batch in rref_batches(n, k, field.order):
        for M in batch:
            yield Subspace(field, n, M)


def enumerate_vectors(field: Field, n: int) -> Iterator[list[int]]:
    for t in itertools.product(range(field.order), repeat=n):
        yield list(t)


def points(field: Field, n: int) -> Iterable[Subspace]:
    """Projective points of P^{n-1}."""
    return enumerate_subspaces(n, 1, field)
