import pytest

from hdl.components import (
    ContextError,
    FiberContext,
    Y_to_flag,
    check_index,
    enumerate_Y,
    enumerate_Y_flags,
    enumerate_component,
    flag_to_Y,
    in_Yi,
    in_nu1,
    in_open_at,
    standard_basepoint,
    xi_condition_redundancy_check,
)
from hdl.ff import ff_make
from hdl.flags import FlagType, dl_enumerate, twist
from hdl.intersections import enumerate_component_nu1, make_fiber, open_fiber_points

F4 = ff_make(2, 2)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_nu1_component_is_hermitian_hypersurface(n):
    bp = standard_basepoint(F4, n)
    t = FlagType(n, (n - 1,))
    model = {bp.from_residue(fl.spaces[0]) for fl in dl_enumerate(t, [twist(t, 1)], F4, 2)}
    direct = {p.E for p in enumerate_component("nu1", bp, 1, 2)}
    lines = set(enumerate_component_nu1(bp, 2))
    assert model == direct == lines


@pytest.mark.parametrize("n", [4, 6])
def test_nur_component_is_isotropic_grassmannian(n):
    bp = standard_basepoint(F4, n)
    t = FlagType(n, (n // 2 - 1,))
    model = {fl.spaces[0] for fl in dl_enumerate(t, [twist(t, 1)], F4, 2)}
    direct = {bp.to_residue_up(p.E) for p in enumerate_component("nur", bp, 2, 2)}
    assert model == direct
    assert len(model) == {4: 45, 6: 6237}[n]


@pytest.mark.parametrize("n,count", [(5, 1485), (6, 31185)])
def test_Y_enumerator_matches_generic_stratum(n, count):
    t = FlagType(n, (1, n - 2))
    generic = {tuple(fl.spaces) for fl in dl_enumerate(t, [twist(t, 1)], F4, 2)}
    fast = set(enumerate_Y_flags(n, 2, F4, 2))
    assert fast == generic and len(fast) == count


def test_Y_roundtrip_and_membership():
    bp = standard_basepoint(F4, 5)
    for k, (Ep, Em) in enumerate(enumerate_Y(bp, 2, 2)):
        assert in_Yi(Ep, Em, bp.lat, 2, 2)
        V1, V2 = Y_to_flag(bp, Ep, Em)
        assert flag_to_Y(bp, V1, V2) == (Ep, Em)
        if k > 200:
            break


def test_fast_fiber_matches_lattice_level_open_points():
    bp = standard_basepoint(F4, 5)
    direct = {p.E for p in enumerate_component("nonminuscule", bp, 2, 2, open_only=True)}
    fast = set()
    for V1, V2 in enumerate_Y_flags(5, 2, F4, 2):
        fb = make_fiber(bp, V1, V2, 2)
        for w in open_fiber_points(fb):
            fast.add(fb.lattice(w))
    assert fast == direct and len(direct) == 11880
    for E in list(direct)[:300]:
        assert in_open_at(E, bp.lat, 2, 2)


def test_redundancy_n5():
    r = xi_condition_redundancy_check(standard_basepoint(F4, 5), 2, 2)
    assert (r.y_points, r.triples, r.cdphi1, r.both) == (1485, 31185, 19305, 19305)
    assert r.passed


def test_index_range():
    with pytest.raises(ValueError):
        check_index(4, 2)
    check_index(5, 2)


def test_fiber_context_rejects_non_Y_pairs():
    bp = standard_basepoint(F4, 5)
    with pytest.raises(ContextError):
        FiberContext(bp.lat, bp.lat, bp.lat, 2, 2)


def test_nu1_membership_of_base():
    bp = standard_basepoint(F4, 4)
    assert not in_nu1(bp.lat, bp.lat, 2)
