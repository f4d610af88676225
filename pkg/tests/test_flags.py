import itertools

import numpy as np
import pytest

from hdl.ff import ff_make
from hdl.flags import (
    Flag,
    FlagType,
    Twist,
    TypeMismatch,
    all_positions,
    bruhat_leq,
    dl_enumerate,
    dl_mask,
    dl_member,
    fil12,
    flag_batches,
    batch_to_flag,
    gu_frobenius_flag,
    identity,
    projection_witness,
    projection_image_report,
    open_stratum_conditions,
    open_twists,
    perm_inverse,
    perm_length,
    perm_mul,
    relpos,
    relpos_of_perm,
    simple,
    twist,
)
from hdl.invariants import bruhat_oracle, closure_identities, reduced_word, subword_interval
from hdl.linalg import dim_intersection, enumerate_subspaces, span

F4 = ff_make(2, 2)
F16 = ff_make(2, 4)


def test_permutation_algebra():
    for w in itertools.permutations(range(1, 5)):
        assert perm_mul(w, perm_inverse(w)) == identity(4)
        assert perm_length(w) == perm_length(perm_inverse(w))
        assert len(reduced_word(w)) == perm_length(w)


def test_bruhat_matches_subword_criterion():
    assert bruhat_oracle(max_d=5, parabolic_d=4).passed


def test_bruhat_interval_sizes():
    # |[e, w0]| = d! and |[e, s_i]| = 2
    for d in range(1, 6):
        w0 = tuple(range(d, 0, -1))
        assert len(subword_interval(w0)) == len(list(itertools.permutations(range(d))))
        for i in range(1, d):
            assert len(subword_interval(simple(d, i))) == 2


def test_relpos_from_spaces_matches_rank_convention():
    # coordinate flags moved by a permutation matrix realize that permutation
    d = 4
    std = [span(F4, d, np.eye(d, dtype=np.int64)[:k].tolist()) for k in range(1, d)]
    for w in itertools.permutations(range(1, d + 1)):
        moved = [span(F4, d, [[1 if c == w[j] - 1 else 0 for c in range(d)] for j in range(k)]) for k in range(1, d)]
        p = relpos(Flag(FlagType(d, (1, 2, 3)), std), Flag(FlagType(d, (1, 2, 3)), moved))
        assert p.rep == tuple(w)


def test_transpose_and_positions():
    for d, left, right in [(4, (2,), (2,)), (5, (1, 3), (2,)), (4, (1, 2, 3), (1, 2, 3))]:
        ps = all_positions(d, left, right)
        assert len({p.ranks for p in ps}) == len(ps)
        for p in ps:
            assert p.transpose().transpose() == p
            assert bruhat_leq(p, p)
        # identity is the unique minimum
        mins = [p for p in ps if all(bruhat_leq(p, p2) for p2 in ps)]
        assert len(mins) == 1 and mins[0].is_identity


def test_hermitian_curve_as_stratum():
    # 3-spaces V of F_4^4 with V = F(V^⊥)-position identity: the Fermat surface, 45 points
    t = FlagType(4, (3,))
    pts = list(dl_enumerate(t, [twist(t, 1)], F4, 2))
    assert len(pts) == 45
    t1 = FlagType(3, (1,))
    assert len(list(dl_enumerate(t1, [twist(t1, 1)], F4, 2))) == 9


def test_batch_mask_agrees_with_member():
    rng = np.random.default_rng(0)
    for d, dims in [(4, (2,)), (4, (1, 3)), (5, (2,)), (3, (1, 2))]:
        ft = FlagType(d, dims)
        for e in (1, 2, 3):
            pos = all_positions(d, dims, ft.twisted(e).dims)
            for p in pos[:: max(1, len(pos) // 3)]:
                for closure in (False, True):
                    tw = [Twist(e, p, closure)]
                    for b in itertools.islice(flag_batches(d, dims, 4, field=F4), 2):
                        mask = dl_mask(b, ft, tw, F4, 2)
                        for j in rng.choice(b.shape[0], size=min(40, b.shape[0]), replace=False):
                            assert mask[j] == dl_member(batch_to_flag(b[j], ft, F4), tw, 2)


def test_closure_is_union_of_strata():
    assert closure_identities(max_d=4).passed


def test_twisted_frobenius_types():
    ft = FlagType(5, (1, 3))
    assert ft.twisted(1).dims == (2, 4)
    assert ft.twisted(2).dims == (1, 3)
    V1 = span(F4, 5, [[1, 0, 0, 0, 0]])
    V2 = span(F4, 5, np.eye(5, dtype=np.int64)[:3].tolist())
    G = gu_frobenius_flag(Flag(ft, [V1, V2]), 1, 2)
    assert G.type.dims == (2, 4)
    assert gu_frobenius_flag(G, 1, 2) == Flag(ft, [V1, V2])


def test_type_mismatch():
    ft = FlagType(4, (2,))
    bad = Twist(1, relpos_of_perm(identity(4), (1,), (3,)))
    with pytest.raises(TypeMismatch):
        dl_member(Flag(ft, [span(F4, 4, [[1, 0, 0, 0], [0, 1, 0, 0]])]), [bad], 2)
    with pytest.raises(ValueError):
        FlagType(4, (2, 2))


def test_open_stratum_conditions_equal_twist_conditions():
    # explicit three conditions vs relative positions (1,[1]), (2,[s1]), (3,[1]) on lines
    d = 4
    t = FlagType(d, (1,))
    tw = open_twists(d, 2)
    explicit = set()
    for V in enumerate_subspaces(d, 1, F16):
        if all(open_stratum_conditions(V, 2)):
            explicit.add(V)
    via_twists = {fl.spaces[0] for fl in dl_enumerate(t, tw, F16, 2)}
    assert explicit == via_twists
    assert len(explicit) == 324


def test_witness_lies_in_filtration():
    t = FlagType(4, (1,))
    for fl in itertools.islice(dl_enumerate(t, open_twists(4, 2), F16, 2), 50):
        V1 = fl.spaces[0]
        V2 = projection_witness(V1, 2)
        assert V2.dim == 2 and fil12(V1, V2, 2)
        assert dim_intersection(V1, V2) == 1


def test_witness_rejects_closed_boundary():
    V1 = span(F4, 4, [[1, 0, 0, 0]])
    if not all(open_stratum_conditions(V1, 2)):
        with pytest.raises(ValueError):
            projection_witness(V1, 2)


def test_projection_image_small():
    r = projection_image_report(4, 2, F16, 2)
    assert r["pass"] and r["open_points"] == 324 and r["forward_failures"] == 0
