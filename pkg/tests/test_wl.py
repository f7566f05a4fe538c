from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupwl import constructors as C
from groupwl import graphs as GR
from groupwl import wl
from groupwl.corpus import parse_group
from groupwl.errors import BudgetExceeded
from groupwl.group_core import permuted_copy


def refines(fine: wl.Coloring, coarse: wl.Coloring) -> bool:
    """Every class of ``fine`` sits inside one class of ``coarse``."""
    pairs = np.unique(np.stack([fine.color_of.ravel(), coarse.color_of.ravel()]), axis=1)
    return np.unique(pairs[0]).size == pairs.shape[1]


def test_version_one_initial_classes():
    Z4, V = wl.group_structure(C.cyclic(4)), wl.group_structure(C.abelian([2, 2]))
    _, _, v = wl.run(Z4, V, 2, rounds=0, criterion="set")
    assert v.distinguished and v.round == 0


def test_graph_k3_initial_classes():
    c = wl.initial_coloring(wl.graph_structure(GR.complete(3)), 2)
    assert c.num_classes == 2


def test_version_two_singletons_are_cyclic_types():
    G = parse_group("2x4")
    c = wl.initial_coloring(wl.group_structure(G, 2), 1)
    assert c.num_classes == len(set(np.asarray(G.elt_order).tolist()))


@pytest.mark.parametrize("desc", ["S3", "Q8", "D4", "Z6"])
@pytest.mark.parametrize("mode", ["counting", "countfree"])
def test_refinement_is_monotone(desc, mode):
    S = wl.group_structure(parse_group(desc))
    c = wl.initial_coloring(S, 2)
    for _ in range(3):
        nxt = wl.refine_round(S, c, mode)
        assert refines(nxt, c)
        c = nxt


def test_countfree_is_coarser_than_counting():
    S = wl.group_structure(parse_group("D4"))
    a = b = wl.initial_coloring(S, 2)
    for _ in range(3):
        a = wl.refine_round(S, a, "counting")
        b = wl.refine_round(S, b, "countfree")
        assert refines(a, b)


def test_individualization_refines():
    Z6 = C.cyclic(6)
    S = wl.group_structure(Z6)
    base = wl.run_single(S, 2, "counting")
    ind = wl.run_single(wl.individualize(S, [1]), 2, "counting")
    assert refines(ind, base)
    diag = ind.element_colors()
    assert np.unique(diag).size == 6
    same = wl.run_single(wl.individualize(S, [Z6.identity]), 2, "counting")
    assert refines(same, base)


def test_s3_counting_distinguishes_from_z6():
    _, _, v = wl.run(wl.group_structure(C.symmetric(3)), wl.group_structure(C.cyclic(6)),
                     2, "counting", "stable")
    assert v.distinguished


def test_theorem_family_set_versus_multiset():
    G, H = C.theorem_family(1, 3)
    SG, SH = wl.group_structure(G), wl.group_structure(H)
    _, _, vs = wl.run(SG, SH, 2, "countfree", 10, "set")
    _, _, vm = wl.run(SG, SH, 2, "countfree", 10, "multiset")
    assert not vs.distinguished and vm.distinguished and vm.round == 0


def test_domain_size_rule():
    _, _, v = wl.run(wl.group_structure(C.cyclic(4)), wl.group_structure(C.cyclic(6)), 2)
    assert v.distinguished and v.round == 0


def test_budget():
    with pytest.raises(BudgetExceeded):
        wl.initial_coloring(wl.group_structure(C.cyclic(64)), 3, budget=1000)


def test_kinds_must_match():
    with pytest.raises(ValueError):
        wl.run(wl.group_structure(C.cyclic(4)), wl.graph_structure(GR.cycle(4)), 2)
    with pytest.raises(ValueError):
        wl.run(wl.group_structure(C.cyclic(4), 1), wl.group_structure(C.cyclic(4), 2), 2)


def test_thread_count_does_not_change_colors():
    S = wl.group_structure(parse_group("Q16"))
    a = wl.run_single(S, 2, "counting", threads=1)
    b = wl.run_single(S, 2, "counting", threads=4)
    assert np.array_equal(a.color_of, b.color_of)
    assert a.history == b.history


def test_cfi_k4_counting_three_wl():
    base = GR.complete(4)
    plain = wl.graph_structure(GR.cfi(base).graph)
    odd = wl.graph_structure(GR.cfi(base, [(0, 1)]).graph)
    even = wl.graph_structure(GR.cfi(base, [(0, 1), (0, 2)]).graph)
    assert wl.run(plain, odd, 3, "counting")[2].distinguished
    assert not wl.run(plain, even, 3, "counting")[2].distinguished


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["S3", "D4", "Q8", "Dic3", "A4", "2x4"]), st.randoms(use_true_random=False),
       st.sampled_from([1, 2]))
def test_relabeled_copy_never_distinguished(desc, r, version):
    G = parse_group(desc)
    perm = list(range(G.order))
    r.shuffle(perm)
    P = permuted_copy(G, perm)
    _, _, v = wl.run(wl.group_structure(G, version), wl.group_structure(P, version), 2, "counting")
    assert not v.distinguished


def test_canonize_examples():
    assert wl.canonize(C.cyclic(6)).digest != wl.canonize(C.symmetric(3)).digest
    Q = C.quaternion(8)
    ref = wl.canonize(Q).digest
    rng = np.random.default_rng(3)
    for _ in range(3):
        assert wl.canonize(permuted_copy(Q, rng.permutation(8))).digest == ref


def test_canonical_table_is_a_group_table():
    from groupwl.group_core import validate_cayley
    cert = wl.canonize(C.dihedral(5))
    t = np.frombuffer(cert.table, dtype=np.int64).reshape(10, 10)
    validate_cayley(t)
    assert len(cert.fingerprints()) == 10
