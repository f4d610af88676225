"""Finite fields F_{p^m} with exp/log tables, Frobenius maps and tower embeddings.

Elements are plain ints: the polynomial a_0 + a_1 x + ... + a_{m-1} x^{m-1}
over F_p is stored as a_0 + a_1 p + ... + a_{m-1} p^{m-1}.  The modulus is the
monic irreducible of degree m whose encoding (as the same base-p integer,
leading 1 included) is smallest, i.e. the lexicographically least one.

>>> F = ff_make(2, 2)
>>> g = F.gen
>>> F.mul(g, g) == F.add(g, 1)
True
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 1 << 20
ADD_TABLE_MAX = 1024


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


def _digits(x: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(x % p)
        x //= p
    return out


def _undigits(ds, p: int) -> int:
    x = 0
    for d in reversed(ds):
        x = x * p + d
    return x


def _polymod(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a by monic b, coefficient lists low degree first."""
    a = list(a)
    db = len(b) - 1
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] % p
        if c:
            for j in range(db + 1):
                a[k - db + j] = (a[k - db + j] - c * b[j]) % p
    return [c % p for c in a[:db]]


def _monic_polys(p: int, deg: int):
    for low in range(p**deg):
        yield _digits(low, p, deg) + [1]


def is_irreducible(coeffs: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    deg = len(coeffs) - 1
    for d in range(1, deg // 2 + 1):
        for f in _monic_polys(p, d):
            if not any(_polymod(coeffs, f, p)):
                return False
    return True


def least_irreducible(p: int, m: int) -> list[int]:
    for low in range(p**m):
        c = _digits(low, p, m) + [1]
        if m == 1 or (c[0] != 0 and is_irreducible(c, p)):
            return c
    raise FieldError(f"no irreducible polynomial of degree {m} over F_{p}")


class Field:
    """The field F_{p^m}.  Use ff_make to get the cached instance."""

    def __init__(self, p: int, m: int):
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        if m < 1:
            raise FieldError("degree must be positive")
        if p**m > MAX_ORDER:
            raise FieldError(f"field order {p}^{m} exceeds {MAX_ORDER}")
        self.p = p
        self.m = m
        self.order = Q = p**m
        self.modulus = least_irreducible(p, m)

        # x * (basis x^k) reduction: multiply-by-x on encoded ints
        def times_x(a: int) -> int:
            ds = [0] + _digits(a, p, m)
            top = ds[m]
            if top:
                for j in range(m):
                    ds[j] = (ds[j] - top * self.modulus[j]) % p
            return _undigits(ds[:m], p)

        self._times_x = times_x
        self.gen = self._find_primitive()
        exp = np.zeros(2 * (Q - 1), dtype=np.int64)
        log = np.full(Q, -1, dtype=np.int64)
        x = 1
        for k in range(Q - 1):
            exp[k] = x
            log[x] = k
            x = self._slow_mul(x, self.gen)
        exp[Q - 1 :] = exp[: Q - 1]
        self.exp = exp
        self.log = log
        if p == 2:
            self.neg = np.arange(Q, dtype=np.int64)
        else:
            self.neg = np.array(
                [_undigits([(-d) % p for d in _digits(a, p, m)], p) for a in range(Q)],
                dtype=np.int64,
            )
        if p != 2 and Q <= ADD_TABLE_MAX:
            a = np.arange(Q)
            tab = np.zeros((Q, Q), dtype=np.int64)
            pw = 1
            for _ in range(m):
                da = (a // pw) % p
                tab += ((da[:, None] + da[None, :]) % p) * pw
                pw *= p
            self.addtab = tab.reshape(-1)
        else:
            self.addtab = np.zeros(0, dtype=np.int64)
        self.kern = (p, Q, self.exp, self.log, self.neg, self.addtab)
        self._frob_tables: dict[int, np.ndarray] = {}

    def _slow_mul(self, a: int, b: int) -> int:
        acc = 0
        for d in _digits(b, self.p, self.m):
            for _ in range(d):
                acc = self._slow_add(acc, a)
            a = self._times_x(a)
        return acc

    def _slow_add(self, a: int, b: int) -> int:
        p = self.p
        if p == 2:
            return a ^ b
        return _undigits(
            [(x + y) % p for x, y in zip(_digits(a, p, self.m), _digits(b, p, self.m))], p
        )

    def _find_primitive(self) -> int:
        Q = self.order
        if Q == 2:
            return 1
        n = Q - 1
        primes = [f for f in range(2, n + 1) if n % f == 0 and is_prime(f)]
        for g in range(2, Q):
            if all(self._slow_pow(g, n // f) != 1 for f in primes):
                return g
        raise FieldError("no primitive element")  # pragma: no cover

    def _slow_pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._slow_mul(r, a)
            a = self._slow_mul(a, a)
            e >>= 1
        return r

    # fast arithmetic on ints
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.addtab.size:
            return int(self.addtab[a * self.order + b])
        return self._slow_add(a, b)

    def neg_(self, a: int) -> int:
        return int(self.neg[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, int(self.neg[b]))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        return int(self.exp[(int(self.log[a]) * e) % (self.order - 1)])

    def elements(self) -> range:
        return range(self.order)

    def in_subfield(self, a: int, d: int) -> bool:
        """True iff a lies in the subfield of order p^d."""
        return self.pow(a, self.p**d) == a

    def frob_table(self, r: int) -> np.ndarray:
        """Lookup table of x -> x^r for a power r of p (cached)."""
        t = self._frob_tables.get(r)
        if t is None:
            t = np.array([self.pow(a, r) for a in range(self.order)], dtype=np.int64)
            self._frob_tables[r] = t
        return t

    def root_table(self, r: int) -> np.ndarray:
        """Inverse of frob_table(r): x -> the unique y with y^r = x."""
        return self.frob_table(self.order // r if r > 1 else 1)

    def fmt(self, a: int) -> str:
        """Coefficient string, constant term first (e.g. '01' is x in F_4)."""
        return "".join(str(d) for d in _digits(a, self.p, self.m))

    def __call__(self, value: int) -> "FieldElem":
        return FieldElem(self, value % self.order if value >= 0 else int(value))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.m})"

    def __reduce__(self):
        return (ff_make, (self.p, self.m))


@lru_cache(maxsize=None)
def ff_make(p: int, m: int = 1) -> Field:
    return Field(p, m)


def gf(order: int) -> Field:
    """Field by order, e.g. gf(16)."""
    for p in range(2, order + 1):
        if order % p == 0:
            m = 0
            x = order
            while x % p == 0:
                x //= p
                m += 1
            if x != 1:
                break
            return ff_make(p, m)
    raise FieldError(f"{order} is not a prime power")


@dataclass(frozen=True)
class FieldElem:
    owner: Field
    value: int

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.owner is not self.owner:
                raise FieldError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return _from_int(self.owner, other)
        return NotImplemented

    def __add__(self, other):
        return FieldElem(self.owner, self.owner.add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.owner, self.owner.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElem(self.owner, self.owner.sub(self._coerce(other), self.value))

    def __neg__(self):
        return FieldElem(self.owner, self.owner.neg_(self.value))

    def __mul__(self, other):
        return FieldElem(self.owner, self.owner.mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElem(self.owner, self.owner.mul(self.value, self.owner.inv(self._coerce(other))))

    def __pow__(self, e: int):
        if e < 0:
            return FieldElem(self.owner, self.owner.pow(self.owner.inv(self.value), -e))
        return FieldElem(self.owner, self.owner.pow(self.value, e))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.owner!r}({self.owner.fmt(self.value)})"


def _from_int(F: Field, k: int) -> int:
    """Image of the integer k in F (through the prime field)."""
    return k % F.p


def _check_subfield(sub: Field, big: Field) -> int:
    if sub.p != big.p or big.m % sub.m:
        raise FieldError(f"{sub!r} is not a subfield of {big!r}")
    return big.m // sub.m


def frobenius(x: FieldElem, e: int, base: Field) -> FieldElem:
    """x^(|base|^e)."""
    if e < 0:
        raise FieldError("e must be nonnegative")
    F = x.owner
    _check_subfield(base, F)
    r = pow(base.order, e, F.order - 1) if F.order > 2 else 1
    if x.value == 0:
        return x
    return FieldElem(F, int(F.exp[(int(F.log[x.value]) * r) % (F.order - 1)]))


@lru_cache(maxsize=None)
def _embedding_root(sub: Field, big: Field) -> int:
    """Least (as an int) root in `big` of the modulus of `sub`."""
    mod = sub.modulus
    for r in range(big.order):
        acc = 0
        for c in reversed(mod):
            acc = big.add(big.mul(acc, r), _from_int(big, c))
        if acc == 0:
            return r
    raise FieldError("modulus has no root")  # pragma: no cover


@lru_cache(maxsize=None)
def embedding_table(sub: Field, big: Field) -> np.ndarray:
    _check_subfield(sub, big)
    r = _embedding_root(sub, big)
    out = np.zeros(sub.order, dtype=np.int64)
    for a in range(sub.order):
        acc = 0
        for d in reversed(_digits(a, sub.p, sub.m)):
            acc = big.add(big.mul(acc, r), d)
        out[a] = acc
    return out


def embed(x: FieldElem, target: Field) -> FieldElem:
    if x.owner is target:
        return x
    return FieldElem(target, int(embedding_table(x.owner, target)[x.value]))
