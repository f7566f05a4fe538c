from __future__ import annotations

import itertools

import numpy as np
import pytest

from groupwl import constructors as C
from groupwl.corpus import SMALL_GROUPS, parse_group
from groupwl.errors import CapExceeded, NotAbelian
from groupwl.group_core import _closure_mask, permuted_copy
from groupwl.iso import (
    AbelianView, abelian_basis, abelian_isomorphic, oracle_isomorphic, small_generating_tuple,
    verify_isomorphism, wl_pipeline,
)


def test_small_groups_pairwise_non_isomorphic():
    groups = [parse_group(d) for d in SMALL_GROUPS]
    for G, H in itertools.combinations(groups, 2):
        if G.order == H.order:
            assert oracle_isomorphic(G, H).isomorphic is False, (G.name, H.name)


def test_oracle_witness_on_relabeled_copies():
    rng = np.random.default_rng(5)
    for d in ["S4", "Dic3", "D6", "Q16", "mekler:p3:path3", "sdp:3:7^2:2,4"]:
        G = parse_group(d)
        P = permuted_copy(G, rng.permutation(G.order))
        res = oracle_isomorphic(G, P)
        assert res.isomorphic and verify_isomorphism(G, P, res.witness)


def test_oracle_cap():
    with pytest.raises(CapExceeded):
        oracle_isomorphic(C.cyclic(500), C.cyclic(500))


def test_generating_tuples_generate():
    for d in ["Z12", "S4", "2^3", "A5", "mekler:p3:path3"]:
        G = parse_group(d)
        gens = small_generating_tuple(G)
        assert _closure_mask(G, gens).all()
    assert len(small_generating_tuple(parse_group("Z12"))) == 1
    assert len(small_generating_tuple(parse_group("S4"))) == 2


def order21_count(G, n=49):
    """Largest number, over order-3 elements h, of order-7 elements x in the
    normal 7-subgroup with |<h, x>| = 21."""
    best = 0
    for h in np.flatnonzero(np.asarray(G.elt_order) == 3):
        cnt = sum(1 for x in range(1, n) if _closure_mask(G, [int(h), x]).sum() == 21)
        best = max(best, cnt)
    return best


def test_coprime_pair_by_independent_invariant():
    a, b, c = (parse_group(f"sdp:3:7^2:{s}") for s in ("2,2", "2,4", "4,2"))
    counts = [order21_count(G) for G in (a, b, c)]
    assert counts == [48, 12, 12]
    assert oracle_isomorphic(a, b).isomorphic is False
    assert oracle_isomorphic(b, c).isomorphic is True


def test_abelian_oracle_agrees_with_generic_oracle():
    specs = [[2, 2, 2, 2], [2, 2, 4], [4, 4], [2, 8], [16], [3, 3, 3], [3, 9], [27],
             [2, 3, 4], [4, 6], [2, 12], [24], [5, 5], [25], [2, 2, 3, 3], [6, 6], [4, 9], [36]]
    groups = [C.abelian(s) for s in specs]
    for G, H in itertools.combinations(groups, 2):
        if G.order != H.order:
            continue
        a, o = abelian_isomorphic(G, H), oracle_isomorphic(G, H)
        assert a.isomorphic == o.isomorphic
        if a.isomorphic:
            assert verify_isomorphism(G, H, a.witness)


def test_abelian_examples():
    assert not abelian_isomorphic(C.abelian([4, 4]), C.abelian([2, 8])).isomorphic
    res = abelian_isomorphic(C.abelian([2, 4]), C.abelian([4, 2]))
    assert res.isomorphic and verify_isomorphism(C.abelian([2, 4]), C.abelian([4, 2]), res.witness)
    with pytest.raises(NotAbelian):
        abelian_isomorphic(C.symmetric(3), C.cyclic(6))
    L, R = C.theorem_family(1, 5, explicit=False)
    assert abelian_isomorphic(L, R).isomorphic is False


def test_abelian_basis_is_a_direct_decomposition():
    for spec in ([2, 4, 4], [3, 9], [2, 2, 8], [6, 10]):
        G = C.abelian(spec)
        basis = abelian_basis(G)
        assert int(np.prod([G.elt_order[b] for b in basis])) == G.order
        assert _closure_mask(G, basis).all()


def test_abelian_view_coordinates():
    G = C.abelian([2, 4, 2])
    V = AbelianView(G)
    assert sorted(V.cyclic_orders) == [2, 2, 4]
    for x in range(G.order):
        assert int(V.encode(V.decode(x))) == x
    for x in range(0, G.order, 3):
        for y in range(0, G.order, 5):
            want = int(V.encode(V.decode(x) + V.decode(y)))
            assert G.mul(x, y) == want
    with pytest.raises(NotAbelian):
        AbelianView(C.symmetric(3))


def test_pipeline_verdicts():
    assert wl_pipeline(C.cyclic(4), C.abelian([2, 2])).verdict == "non-isomorphic"
    rng = np.random.default_rng(8)
    for d in ["Q8", "D6", "A4", "Dic3"]:
        G = parse_group(d)
        for version in (1, 2):
            res = wl_pipeline(G, permuted_copy(G, rng.permutation(G.order)), version=version)
            assert res.verdict == "inconclusive"
