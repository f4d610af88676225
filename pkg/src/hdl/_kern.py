"""Compiled inner loops for linear algebra over F_{p^m}.

`fk` is the tuple (p, Q, exp, log, neg, addtab) exported as Field.kern.
Matrices are int64 arrays of field elements.
"""
import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def gadd(a, b, fk):
    p, Q, exp, log, neg, addtab = fk
    if p == 2:
        return a ^ b
    if addtab.size > 0:
        return addtab[a * Q + b]
    r = 0
    w = 1
    while a > 0 or b > 0:
        r += ((a % p + b % p) % p) * w
        a //= p
        b //= p
        w *= p
    return r


@njit(cache=True, inline="always")
def gneg(a, fk):
    if fk[0] == 2:
        return a
    return fk[4][a]


@njit(cache=True, inline="always")
def gmul(a, b, fk):
    if a == 0 or b == 0:
        return 0
    log = fk[3]
    return fk[2][log[a] + log[b]]


@njit(cache=True, inline="always")
def ginv(a, fk):
    Q = fk[1]
    return fk[2][(Q - 1 - fk[3][a]) % (Q - 1)]


@njit(cache=True)
def rref_inplace(M, fk):
    """Reduce M to RREF in place; returns the rank (nonzero rows come first)."""
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if M[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                t = M[piv, j]
                M[piv, j] = M[r, j]
                M[r, j] = t
        iv = ginv(M[r, c], fk)
        if iv != 1:
            for j in range(c, cols):
                M[r, j] = gmul(M[r, j], iv, fk)
        for i in range(rows):
            if i != r:
                f = M[i, c]
                if f != 0:
                    nf = gneg(f, fk)
                    for j in range(c, cols):
                        x = M[r, j]
                        if x != 0:
                            M[i, j] = gadd(M[i, j], gmul(nf, x, fk), fk)
        r += 1
    return r


@njit(cache=True)
def rref(M, fk):
    A = M.copy()
    r = rref_inplace(A, fk)
    return A[:r].copy()


@njit(cache=True)
def rank(M, fk):
    A = M.copy()
    return rref_inplace(A, fk)


@njit(cache=True)
def nullspace(M, ncols, fk):
    """RREF basis of {y : M y = 0} (right kernel)."""
    A = M.copy()
    r = rref_inplace(A, fk) if A.shape[0] > 0 else 0
    piv = np.full(r, -1, dtype=np.int64)
    ispiv = np.zeros(ncols, dtype=np.bool_)
    for i in range(r):
        for j in range(ncols):
            if A[i, j] != 0:
                piv[i] = j
                ispiv[j] = True
                break
    out = np.zeros((ncols - r, ncols), dtype=np.int64)
    k = 0
    for f in range(ncols):
        if ispiv[f]:
            continue
        out[k, f] = 1
        for i in range(r):
            if A[i, f] != 0:
                out[k, piv[i]] = gneg(A[i, f], fk)
        k += 1
    rref_inplace(out, fk)
    return out


@njit(cache=True)
def intersect(A, B, fk):
    """RREF basis of rowspace(A) ∩ rowspace(B) (Zassenhaus)."""
    n = A.shape[1]
    ra = A.shape[0]
    rb = B.shape[0]
    Z = np.zeros((ra + rb, 2 * n), dtype=np.int64)
    for i in range(ra):
        for j in range(n):
            Z[i, j] = A[i, j]
            Z[i, n + j] = A[i, j]
    for i in range(rb):
        for j in range(n):
            Z[ra + i, j] = B[i, j]
    r = rref_inplace(Z, fk)
    cnt = 0
    start = r
    for i in range(r):
        zero = True
        for j in range(n):
            if Z[i, j] != 0:
                zero = False
                break
        if zero:
            start = i
            break
    cnt = r - start
    out = np.empty((cnt, n), dtype=np.int64)
    for i in range(cnt):
        for j in range(n):
            out[i, j] = Z[start + i, n + j]
    rref_inplace(out, fk)
    return out


@njit(cache=True)
def matmul(A, B, fk):
    n, k = A.shape
    m = B.shape[1]
    C = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for l in range(k):
            a = A[i, l]
            if a != 0:
                for j in range(m):
                    b = B[l, j]
                    if b != 0:
                        C[i, j] = gadd(C[i, j], gmul(a, b, fk), fk)
    return C


@njit(cache=True)
def solve_rows(B, V, fk):
    """Coefficients X with X @ B = V for B of full row rank; -1 row marker if unsolvable.

    Returns (X, ok) where ok[i] says whether V[i] lies in rowspace(B).
    """
    k, n = B.shape
    m = V.shape[0]
    # augment [B^T | V^T] and row reduce
    A = np.zeros((n, k + m), dtype=np.int64)
    for i in range(k):
        for j in range(n):
            A[j, i] = B[i, j]
    for i in range(m):
        for j in range(n):
            A[j, k + i] = V[i, j]
    rref_inplace(A, fk)
    X = np.zeros((m, k), dtype=np.int64)
    ok = np.ones(m, dtype=np.bool_)
    for row in range(n):
        lead = -1
        for c in range(k):
            if A[row, c] != 0:
                lead = c
                break
        if lead < 0:
            for i in range(m):
                if A[row, k + i] != 0:
                    ok[i] = False
        else:
            for i in range(m):
                X[i, lead] = A[row, k + i]
    return X, ok


@njit(cache=True)
def form_diag(X, A, Y, fk):
    """Row-wise x_r A y_r^T."""
    P = X.shape[0]
    k = A.shape[0]
    out = np.zeros(P, dtype=np.int64)
    for r in range(P):
        acc = 0
        for j in range(k):
            if X[r, j] == 0:
                continue
            s = 0
            for l in range(k):
                s = gadd(s, gmul(A[j, l], Y[r, l], fk), fk)
            acc = gadd(acc, gmul(X[r, j], s, fk), fk)
        out[r] = acc
    return out
