"""Irreducible components of the unitary affine Deligne-Lusztig variety.

Points are lattices E in the window model (see hdl.lattice) with Φ(E) = σ(E^∨):

* nu1:  E ⊆ Λx of colength 1 with tΦ(E) ⊆ E,
* nur:  Λx ⊆ E of colength r-1 with tE ⊆ Φ(E)   (n = 2r even),
* non-minuscule index i: triples (E, E+, E-) with (E+, E-) in Y_i and
  E-/... a fiber point W = E/E- of the bundle E+/E- (dim 2i-1).

Y_i is the set of pairs Λx ⊆ E+ (colength i-1), E- ⊆ Λx (colength i),
tE+ ⊆ E- with E+ ⊆ Φ(E-), E- ⊆ Φ(E+), tΦ(E-) ⊆ E-.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterator, Optional

import numpy as np

from . import _kern
from .ff import Field
from .flags import Flag, FlagType, dl_enumerate, twist
from .lattice import (
    Cochar,
    TLattice,
    _make,
    _shift,
    complement_rows,
    diagonal,
    dominance_leq,
    gu_Phi,
    inv_pos,
    lat_contains,
    lat_intersect,
    lat_scale,
    lat_sum,
    nu,
    nu_minus,
    nu_plus,
    standard,
    xi,
)
from .linalg import (
    MismatchError,
    Subspace,
    bil_perp_rows,
    enumerate_subspaces,
    frob_subspace,
    intersect,
    span,
    zero,
)


class ContextError(ValueError):
    pass


# ------------------------------------------------------------ basepoints


class Basepoint:
    """A lattice Λx with an O-basis b_1..b_n, identifying Λx/tΛx with F^n."""

    def __init__(self, lat: TLattice, basis: np.ndarray, label: str = ""):
        self.lat = lat
        self.basis = np.ascontiguousarray(basis, dtype=np.int64)
        self.label = label
        self.field = lat.field
        self.n = lat.n
        self.N = lat.N
        self.t_lat = lat_scale(lat, 1, strict=False)
        self.tinv_lat = lat_scale(lat, -1)
        self.tinv_basis = _shift(self.basis, self.n, -1)
        self._B = np.vstack([self.basis, self.t_lat.rows])
        self._Binv = np.vstack([self.tinv_basis, lat.rows])

    def _coords(self, B: np.ndarray, rows: np.ndarray) -> np.ndarray:
        X, ok = _kern.solve_rows(B, rows, self.field.kern)
        if not ok.all():
            raise ContextError("lattice not between the expected bounds")
        return X[:, : self.n]

    def to_residue(self, M: TLattice) -> Subspace:
        """M/tΛx as a subspace of F^n, for tΛx ⊆ M ⊆ Λx."""
        return span(self.field, self.n, self._coords(self._B, M.rows))

    def from_residue(self, V: Subspace) -> TLattice:
        lift = _kern.matmul(V.rows, self.basis, self.field.kern) if V.dim else np.zeros((0, self.lat.size), np.int64)
        return _make(self.field, self.n, self.N, np.vstack([self.t_lat.rows, lift]))

    def to_residue_up(self, M: TLattice) -> Subspace:
        """M/Λx as a subspace of F^n (basis t^{-1}b_i), for Λx ⊆ M ⊆ t^{-1}Λx."""
        return span(self.field, self.n, self._coords(self._Binv, M.rows))

    def from_residue_up(self, V: Subspace) -> TLattice:
        lift = _kern.matmul(V.rows, self.tinv_basis, self.field.kern) if V.dim else np.zeros((0, self.lat.size), np.int64)
        return _make(self.field, self.n, self.N, np.vstack([self.lat.rows, lift]))

    def __repr__(self):
        return f"Basepoint({self.label or 'Λ'})"


def standard_basepoint(field: Field, n: int, N: int = 2) -> Basepoint:
    return diagonal_basepoint(field, n, [0] * n, N, "Λ0")


def diagonal_basepoint(field: Field, n: int, exps, N: int = 2, label: str = "") -> Basepoint:
    """Λ = span(t^{a_i} e_i); self-dual for the anti-diagonal form iff a_i = -a_{n+1-i}."""
    lat = diagonal(field, n, exps, N)
    basis = np.zeros((n, 2 * N * n), dtype=np.int64)
    for i, a in enumerate(exps):
        basis[i, (a + N) * n + i] = 1
    return Basepoint(lat, basis, label or "diag(" + ",".join(map(str, exps)) + ")")


# ------------------------------------------------------------ bounds


def _inv_matches(E: TLattice, base: TLattice, bound: Cochar) -> bool:
    """bounded_by, but an unequal total means 'not a point' rather than an error."""
    a = inv_pos(base, E)
    if a.total != bound.total:
        return False
    return dominance_leq(a, bound)


def nu_star(n: int, i: int) -> Cochar:
    return nu(n, i).dual()


# ------------------------------------------------------------ minuscule components


def in_nu1(E: TLattice, Lx: TLattice, q: int) -> bool:
    if not _inv_matches(E, Lx, nu_star(E.n, 1)):
        return False
    return lat_contains(E, lat_scale(gu_Phi(E, q), 1))


def in_nur(E: TLattice, Lx: TLattice, q: int) -> bool:
    n = E.n
    if n % 2:
        raise ValueError("ν_r components need n even")
    if not _inv_matches(E, Lx, nu_star(n, n // 2)):
        return False
    return lat_contains(gu_Phi(E, q), lat_scale(E, 1))


# ------------------------------------------------------------ Y_i


def check_index(n: int, i: int) -> None:
    if not 2 <= i <= (n - 1) // 2:
        raise ValueError(f"index i={i} outside [2, {(n - 1) // 2}] for n={n}")


def Yi_bounds_ok(Ep: TLattice, Em: TLattice, Lx: TLattice, i: int) -> bool:
    n = Lx.n
    return (
        _inv_matches(Ep, Lx, nu_plus(n, i).dual())
        and _inv_matches(Em, Lx, nu_minus(n, i).dual())
        and _inv_matches(Em, Ep, xi(n, i))
    )


def in_Yi(Ep: TLattice, Em: TLattice, Lx: TLattice, i: int, q: int) -> bool:
    check_index(Lx.n, i)
    if not Yi_bounds_ok(Ep, Em, Lx, i):
        return False
    Pp = gu_Phi(Ep, q)
    Pm = gu_Phi(Em, q)
    return lat_contains(Pm, Ep) and lat_contains(Pp, Em) and lat_contains(Em, lat_scale(Pm, 1))


def flag_to_Y(bp: Basepoint, V1: Subspace, V2: Subspace) -> tuple[TLattice, TLattice]:
    """(V1 ⊂ V2) in Λx/tΛx  ->  E+ = Λx + t^{-1}V1, E- = tΛx + V2."""
    return bp.from_residue_up(V1), bp.from_residue(V2)


def Y_to_flag(bp: Basepoint, Ep: TLattice, Em: TLattice) -> tuple[Subspace, Subspace]:
    """(E+, E-) -> (tE+/tΛx ⊂ E-/tΛx)."""
    return bp.to_residue_up(Ep), bp.to_residue(Em)


def enumerate_Y_flags(n: int, i: int, field: Field, q: int, budget: Optional[int] = None) -> Iterator[tuple[Subspace, Subspace]]:
    """Flags V1 ⊂ V2 (dims i-1, n-i) with V1 ⊆ F(V2^⊥) ⊆ V2 ⊆ F(V1^⊥).

    Such flags are parametrized by U = F(V2^⊥), a totally isotropic i-space
    (U ⊆ F(U^⊥)), and V1 ⊆ U ∩ F^{-2}U of dim i-1.
    """
    check_index(n, i)
    t = FlagType(n, (i,))
    for flag in dl_enumerate(t, [twist(t, 1)], field, q, budget):
        U = flag.spaces[0]
        Uperp = Subspace(field, n, bil_perp_rows(U.rows, n, field))
        V2 = frob_subspace(Uperp, -1, q)
        room = intersect(U, frob_subspace(U, -2, q))
        if room.dim < i - 1:
            continue
        for C in enumerate_subspaces(room.dim, i - 1, field):
            V1 = span(field, n, _kern.matmul(C.rows, room.rows, field.kern)) if i > 1 else zero(field, n)
            yield V1, V2


def enumerate_Y(bp: Basepoint, i: int, q: int, budget: Optional[int] = None) -> Iterator[tuple[TLattice, TLattice]]:
    for V1, V2 in enumerate_Y_flags(bp.n, i, bp.field, q, budget):
        yield flag_to_Y(bp, V1, V2)


# ------------------------------------------------------------ fibers


class FiberContext:
    """Quotient bases for E+/E- and Φ(E-)/Φ(E+) over a fixed Y_i point."""

    def __init__(self, Ep: TLattice, Em: TLattice, Lx: TLattice, i: int, q: int, check: bool = True):
        if check and not in_Yi(Ep, Em, Lx, i, q):
            raise ContextError("(E+, E-) is not a point of Y_i")
        self.Ep, self.Em, self.Lx, self.i, self.q = Ep, Em, Lx, i, q
        self.field = Ep.field
        self.Pp = gu_Phi(Ep, q)
        self.Pm = gu_Phi(Em, q)
        self.Q1 = complement_rows(Ep, Em)
        self.Q2 = complement_rows(self.Pm, self.Pp)
        self.m = self.Q1.shape[0]
        if self.m != 2 * i - 1 or self.Q2.shape[0] != 2 * i - 1:
            raise ContextError("fiber has the wrong dimension")
        self._B1 = np.vstack([Em.rows, self.Q1])
        self._B2 = np.vstack([self.Pp.rows, self.Q2])

    def _reduce(self, B: np.ndarray, rows: np.ndarray, k: int) -> Subspace:
        if rows.shape[0] == 0:
            return zero(self.field, self.m)
        X, ok = _kern.solve_rows(B, rows, self.field.kern)
        if not ok.all():
            raise ContextError("vector outside the quotient")
        return span(self.field, self.m, X[:, k:])

    def reduce1(self, rows: np.ndarray) -> Subspace:
        """Image of window vectors of E+ in E+/E-."""
        return self._reduce(self._B1, rows, self.Em.dim)

    def reduce2(self, rows: np.ndarray) -> Subspace:
        """Image of window vectors of Φ(E-) in Φ(E-)/Φ(E+)."""
        return self._reduce(self._B2, rows, self.Pp.dim)

    def lift(self, W: Subspace) -> np.ndarray:
        if W.dim == 0:
            return np.zeros((0, self.Ep.size), dtype=np.int64)
        return _kern.matmul(W.rows, self.Q1, self.field.kern)

    def lattice(self, W: Subspace) -> TLattice:
        """E = E- + lift(W)."""
        return _make(self.field, self.Ep.n, self.Ep.N, np.vstack([self.Em.rows, self.lift(W)]))

    def fiber_point(self, E: TLattice) -> Subspace:
        if not (lat_contains(E, self.Em) and lat_contains(self.Ep, E)):
            raise ContextError("E is not between E- and E+")
        return self.reduce1(E.rows)


def phi1(W: Subspace, ctx: FiberContext) -> Subspace:
    """Image of W under E+/E- -> Φ(E-)/Φ(E+)."""
    return ctx.reduce2(ctx.lift(W))


def frob_wperp(W: Subspace, ctx: FiberContext, PE: TLattice | None = None) -> Subspace:
    """F(W^⊥) = Φ(E)/Φ(E+) inside Φ(E-)/Φ(E+).  PE = Φ(E) if already known."""
    PE = gu_Phi(ctx.lattice(W), ctx.q) if PE is None else PE
    return ctx.reduce2(PE.rows)


def phi2_image(W: Subspace, ctx: FiberContext, PE: TLattice | None = None) -> Subspace:
    """Image of F(tW^⊥) = tΦ(E)/tΦ(E+) under Λx/tΛx -> E+/E-."""
    PE = gu_Phi(ctx.lattice(W), ctx.q) if PE is None else PE
    tP = lat_scale(PE, 1)
    if not lat_contains(ctx.Lx, tP):
        raise ContextError("tΦ(E) is not inside Λx")
    return ctx.reduce1(tP.rows)


def cdphi1(W: Subspace, ctx: FiberContext, PE: TLattice | None = None) -> bool:
    return phi1(W, ctx) <= frob_wperp(W, ctx, PE)


def cdphi2(W: Subspace, ctx: FiberContext, PE: TLattice | None = None) -> bool:
    return phi2_image(W, ctx, PE) <= W


def _check_fiber(E, Ep, Em, i):
    if not (lat_contains(E, Em) and lat_contains(Ep, E)) or E.dim - Em.dim != i - 1:
        raise ContextError("E is not an (i-1)-dimensional fiber point over (E+, E-)")


def in_Xi(E: TLattice, Ep: TLattice, Em: TLattice, Lx: TLattice, i: int, q: int, ctx: FiberContext | None = None) -> bool:
    """The theorem's condition φ1(W) ⊆ F(W^⊥) for W = E/E-."""
    _check_fiber(E, Ep, Em, i)
    ctx = ctx or FiberContext(Ep, Em, Lx, i, q)
    return cdphi1(ctx.fiber_point(E), ctx)


def in_open_stratum(E: TLattice, Ep: TLattice, Em: TLattice, Lx: TLattice, i: int, q: int) -> bool:
    """E ⊆ Φ(E) and E ∩ Λx = E-."""
    _check_fiber(E, Ep, Em, i)
    return lat_contains(gu_Phi(E, q), E) and lat_intersect(E, Lx) == Em


def resolution_lift(E: TLattice, Lx: TLattice, i: int) -> Optional[tuple[TLattice, TLattice]]:
    """(E + Λx, E ∩ Λx) when these have the shape of a Y_i point over E, else None."""
    Ep = lat_sum(E, Lx)
    Em = lat_intersect(E, Lx)
    if E.dim - Em.dim != i - 1 or not Yi_bounds_ok(Ep, Em, Lx, i):
        return None
    return Ep, Em


def in_open_at(E: TLattice, Lx: TLattice, i: int, q: int) -> bool:
    """E lies in the open stratum of the i-th component at Λx."""
    lifted = resolution_lift(E, Lx, i)
    if lifted is None:
        return False
    Ep, Em = lifted
    return in_Yi(Ep, Em, Lx, i, q) and in_open_stratum(E, Ep, Em, Lx, i, q)


# ------------------------------------------------------------ enumeration


@dataclass(frozen=True)
class ComponentPoint:
    variant: str
    E: TLattice
    Ep: Optional[TLattice] = None
    Em: Optional[TLattice] = None
    base: str = ""


def fiber_subspaces(ctx: FiberContext) -> Iterator[Subspace]:
    return enumerate_subspaces(ctx.m, ctx.i - 1, ctx.field)


def enumerate_component(variant: str, bp: Basepoint, i: int, q: int, budget: Optional[int] = None, open_only: bool = False) -> Iterator[ComponentPoint]:
    n = bp.n
    from .lattice import enumerate_bounded

    if variant == "nu1":
        for E in enumerate_bounded(bp.lat, nu_star(n, 1), budget):
            if in_nu1(E, bp.lat, q):
                yield ComponentPoint("nu1", E, base=bp.label)
        return
    if variant == "nur":
        if n % 2:
            raise ValueError("ν_r components need n even")
        for E in enumerate_bounded(bp.lat, nu_star(n, n // 2), budget):
            if in_nur(E, bp.lat, q):
                yield ComponentPoint("nur", E, base=bp.label)
        return
    if variant != "nonminuscule":
        raise ValueError(f"unknown component variant {variant!r}")
    check_index(n, i)
    for Ep, Em in enumerate_Y(bp, i, q, budget):
        ctx = FiberContext(Ep, Em, bp.lat, i, q, check=False)
        for W in fiber_subspaces(ctx):
            E = ctx.lattice(W)
            if open_only:
                ok = lat_contains(gu_Phi(E, q), E) and lat_intersect(E, bp.lat) == Em
            else:
                ok = cdphi1(W, ctx)
            if ok:
                yield ComponentPoint("nonminuscule", E, Ep, Em, bp.label)


@dataclass
class RedundancyReport:
    n: int
    i: int
    field: str
    y_points: int = 0
    triples: int = 0
    cdphi1: int = 0
    both: int = 0
    counterexamples: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cdphi1 == self.both and not self.counterexamples


def xi_condition_redundancy_check(bp: Basepoint, i: int, q: int, budget: Optional[int] = None, limit: int = 10) -> RedundancyReport:
    """Exhaustively compare {cdphi1} with {cdphi1 and cdphi2} over π1^{-1}(Y_i)."""
    rep = RedundancyReport(bp.n, i, repr(bp.field))
    for Ep, Em in enumerate_Y(bp, i, q, budget):
        ctx = FiberContext(Ep, Em, bp.lat, i, q)
        rep.y_points += 1
        for W in fiber_subspaces(ctx):
            rep.triples += 1
            PE = gu_Phi(ctx.lattice(W), q)
            if cdphi1(W, ctx, PE):
                rep.cdphi1 += 1
                if cdphi2(W, ctx, PE):
                    rep.both += 1
                elif len(rep.counterexamples) < limit:
                    rep.counterexamples.append((Ep, Em, W))
    return rep
