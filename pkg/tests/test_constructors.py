from __future__ import annotations

import numpy as np
import pytest

from groupwl import constructors as C
from groupwl.corpus import CONSTRUCTOR_OUTPUTS, parse_group
from groupwl.errors import BadScalarOrder, CapExceeded, InvalidAction
from groupwl.group_core import is_normal, validate_cayley
from groupwl.iso import oracle_isomorphic


def test_abelian_examples():
    G = C.abelian([2, 3])
    assert G.order == 6 and G.elt_order.max() == 6
    A = C.abelian([2, 2, 4])
    assert A.order == 16 and A.elt_order.max() == 4
    assert int((A.elt_order == 2).sum()) == 7
    assert not oracle_isomorphic(C.abelian([4, 4]), C.abelian([2, 8])).isomorphic


def test_abelian_matches_iterated_direct_product():
    A = C.abelian([2, 3, 4])
    B = C.direct_product(C.direct_product(C.cyclic(2), C.cyclic(3)), C.cyclic(4))
    assert np.array_equal(np.asarray(A.table), np.asarray(B.table))


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        C.abelian([2] * 13)
    with pytest.raises(CapExceeded):
        C.symmetric(7)
    with pytest.raises(CapExceeded):
        C.abelian([2] * 5, cap=16)
    assert C.abelian([2] * 5, cap=32).order == 32


def test_theorem_family_orders():
    G, H = C.theorem_family(1, 3)
    assert G.order == H.order == 512
    assert not oracle_isomorphic(G, H, cap=600).isomorphic
    G5, H5 = C.theorem_family(1, 5)
    assert isinstance(G5, C.AbelianGroup)
    assert G5.order == H5.order == 2 ** 15
    for q, n in [(1, 2), (2, 3), (3, 4)]:
        gs, hs = C.theorem_family_spec(q, n)
        assert np.prod(gs) == np.prod(hs) == 2 ** (3 * q * n)


def test_implicit_abelian_arithmetic():
    A = C.AbelianGroup([2, 4, 4])
    E = A.to_group()
    for a in range(0, 32, 3):
        assert A.element_order(a) == E.elt_order[a]
        for b in range(0, 32, 5):
            assert A.mul(a, b) == E.mul(a, b)
        assert A.mul(a, A.inv(a)) == 0


def test_direct_products():
    assert oracle_isomorphic(C.direct_product(C.cyclic(2), C.cyclic(3)), C.cyclic(6)).isomorphic
    assert C.direct_product(C.alternating(5), C.alternating(5)).order == 3600
    Q = C.quaternion(8)
    assert oracle_isomorphic(C.direct_product(Q, C.cyclic(1)), Q).isomorphic


def test_permutation_groups():
    S3 = C.symmetric(3)
    assert S3.order == 6 and not S3.is_abelian
    assert C.alternating(5).order == 60
    assert C.symmetric(4).order == 24 and C.alternating(4).order == 12


def test_symmetric_composition_convention():
    perms = C.symmetric_perms(3)
    S3 = C.symmetric(3)
    for a in range(6):
        for b in range(6):
            comp = tuple(perms[a][perms[b][x]] for x in range(3))
            assert tuple(perms[S3.mul(a, b)]) == comp


def test_semidirect_examples():
    H, N = C.cyclic(2), C.cyclic(3)
    assert oracle_isomorphic(C.semidirect(H, N, C.trivial_action(H, N)), C.direct_product(H, N)).isomorphic
    assert oracle_isomorphic(C.semidirect(H, N, C.inversion_action(H, N)), C.symmetric(3)).isomorphic
    a = parse_group("sdp:3:7^2:2,2")
    b = parse_group("sdp:3:7^2:2,4")
    assert a.order == b.order == 147
    assert not oracle_isomorphic(a, b).isomorphic


def test_semidirect_shape():
    H, N = C.cyclic(3), C.abelian([7, 7])
    G = C.semidirect(H, N, C.scalar_action(H, N, 7, [2, 4]))
    normal = list(range(N.order))
    assert is_normal(G, normal)
    comp = [h * N.order for h in range(H.order)]
    assert sorted(G.mul(x, y) for x in comp for y in comp[:1]) == comp
    assert set(normal) & set(comp) == {G.identity}
    for x in comp:
        for y in comp:
            assert G.mul(x, y) in comp


def test_scalar_action_examples():
    H, N = C.cyclic(3), C.abelian([7, 7])
    P = C.scalar_action(H, N, 7, [1, 1]).perms
    assert np.array_equal(P, np.tile(np.arange(49), (3, 1)))
    C.scalar_action(H, C.cyclic(7), 7, [2]).validate()
    with pytest.raises(BadScalarOrder):
        C.scalar_action(H, C.cyclic(7), 7, [3])


def test_invalid_action_reports():
    H, N = C.cyclic(2), C.cyclic(3)
    bad = C.ActionTable(H, N, np.array([[0, 1, 2], [1, 2, 0]]))
    with pytest.raises(InvalidAction, match="automorphism"):
        bad.validate()
    H3 = C.cyclic(3)
    inv = C.ActionTable(H3, N, np.array([[0, 1, 2], [0, 2, 1], [0, 2, 1]]))
    with pytest.raises(InvalidAction, match="homomorphism"):
        inv.validate()
    with pytest.raises(InvalidAction):
        C.semidirect(C.cyclic(2), C.cyclic(4), C.inversion_action(C.cyclic(2), C.cyclic(4)),
                     require_coprime=True)


def test_dihedral_and_dicyclic():
    D = C.dihedral(4)
    assert D.order == 8 and int((D.elt_order == 2).sum()) == 5
    Q = C.quaternion(8)
    assert int((Q.elt_order == 2).sum()) == 1 and int((Q.elt_order == 4).sum()) == 6
    assert not oracle_isomorphic(D, Q).isomorphic


@pytest.mark.parametrize("desc", CONSTRUCTOR_OUTPUTS)
def test_constructor_outputs_validate(desc):
    G = parse_group(desc)
    validate_cayley(np.asarray(G.table))
