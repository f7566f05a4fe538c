from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupwl import constructors as C
from groupwl.errors import FormatError, NoIdentity, NotASubgroup, NotAssociative, NotLatinSquare
from groupwl.group_core import (
    center, centralizer, commutator_subgroup, derived_series, element_order, format_cayley,
    generated_subgroup, is_associative_bruteforce, is_normal, is_subgroup, marked_equivalent,
    marked_type_key, minimal_normal_subgroups, normal_closure, parse_cayley, pattern_equivalent,
    pattern_key, permuted_copy, socle, socle_factors, solvability_bound, validate_cayley,
)

CORPUS = ["Z6", "2x4", "S3", "D4", "Q8", "A4", "Dic3", "4x4", "S4", "Q16", "D8", "3^2"]


def groups():
    from groupwl.corpus import parse_group
    return [parse_group(d) for d in CORPUS]


def reduced_latin_squares(n):
    """All Latin squares with first row and column 0..n-1, by backtracking."""
    grid = [[-1] * n for _ in range(n)]
    for i in range(n):
        grid[0][i] = grid[i][0] = i
    cells = [(r, c) for r in range(1, n) for c in range(1, n)]
    out = []

    def fill(k):
        if k == len(cells):
            out.append([row[:] for row in grid])
            return
        r, c = cells[k]
        used = set(grid[r][:c]) | {grid[i][c] for i in range(r)}
        for v in range(n):
            if v not in used:
                grid[r][c] = v
                fill(k + 1)
        grid[r][c] = -1

    fill(0)
    return out


def test_cyclic_three_validates():
    G = validate_cayley([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    assert G.order == 3 and G.identity == 0


def test_repeated_row_entry_rejected():
    with pytest.raises(NotLatinSquare):
        validate_cayley([[0, 1], [1, 1]])


def test_latin_square_without_identity_rejected():
    with pytest.raises(NoIdentity):
        validate_cayley([[1, 2, 0], [0, 1, 2], [2, 0, 1]])


def test_five_by_five_loops_match_bruteforce_associativity():
    squares = reduced_latin_squares(5)
    assert len(squares) == 56
    rejected = 0
    for sq in squares:
        t = np.array(sq)
        if is_associative_bruteforce(t):
            assert validate_cayley(t).order == 5
            continue
        rejected += 1
        with pytest.raises(NotAssociative) as info:
            validate_cayley(t)
        a, b, c = info.value.witness
        assert t[t[a, b], c] != t[a, t[b, c]]
    assert rejected > 0


def test_bruteforce_associativity_detects_nonabelian_groups():
    for G in groups():
        assert is_associative_bruteforce(np.asarray(G.table))


def test_element_orders():
    assert element_order(C.cyclic(6), 1) == 6
    Z = C.abelian([2, 4])
    assert element_order(Z, 1 * 4 + 1) == 4
    assert element_order(Z, Z.identity) == 1


def test_orders_divide_group_order():
    for G in groups():
        assert all(G.order % int(o) == 0 for o in G.elt_order)
        assert all(G.power(g, int(G.elt_order[g])) == G.identity for g in range(G.order))


def test_generated_subgroups():
    Z6 = C.cyclic(6)
    assert generated_subgroup(Z6, []).elements.tolist() == [Z6.identity]
    assert generated_subgroup(Z6, [2]).elements.tolist() == [0, 2, 4]
    S3 = C.symmetric(3)
    trans = next(g for g in range(6) if S3.elt_order[g] == 2)
    three = next(g for g in range(6) if S3.elt_order[g] == 3)
    cl = generated_subgroup(S3, [trans, three])
    assert len(cl) == 6
    for x in cl.elements:
        prod = S3.identity
        for i in cl.word(int(x)):
            prod = S3.mul(prod, cl.gens[i])
        assert prod == x


def test_centralizers_and_center():
    Z = C.abelian([2, 6])
    assert len(centralizer(Z, 5)) == Z.order
    S3 = C.symmetric(3)
    trans = next(g for g in range(6) if S3.elt_order[g] == 2)
    assert len(centralizer(S3, trans)) == 2
    assert center(S3).tolist() == [S3.identity]
    for G in groups():
        Z = center(G)
        assert is_subgroup(G, Z)
        for g in range(G.order):
            assert G.order % len(centralizer(G, g)) == 0


def test_derived_series():
    s = derived_series(C.symmetric(3))
    assert [len(x) for x in s.subgroups] == [6, 3, 1] and s.solvability_class == 2
    assert derived_series(C.abelian([2, 4])).solvability_class <= 1
    a5 = derived_series(C.alternating(5))
    assert a5.solvability_class is None and not a5.solvable
    assert len(a5.subgroups[-1]) == 60


def test_nilpotent_solvability_bound():
    from groupwl.mekler import mekler_group, to_cayley
    from groupwl.graphs import path
    for G in [C.abelian([2, 4, 4]), C.quaternion(16), C.dihedral(8), to_cayley(mekler_group(path(3), 3))]:
        assert derived_series(G).solvability_class <= solvability_bound(G.order)


def test_commutator_subgroup_rejects_non_subgroup():
    S3 = C.symmetric(3)
    three = next(g for g in range(6) if S3.elt_order[g] == 3)
    with pytest.raises(NotASubgroup):
        commutator_subgroup(S3, [S3.identity, three])


def test_normal_closures():
    S3 = C.symmetric(3)
    trans = next(g for g in range(6) if S3.elt_order[g] == 2)
    three = next(g for g in range(6) if S3.elt_order[g] == 3)
    assert len(normal_closure(S3, [three])) == 3
    assert len(normal_closure(S3, [trans])) == 6
    A5 = C.alternating(5)
    assert all(len(normal_closure(A5, [g])) == 60 for g in range(60) if g != A5.identity)
    A4 = C.alternating(4)
    double = next(g for g in range(12) if A4.elt_order[g] == 2)
    assert len(normal_closure(A4, [double])) == 4
    P = C.direct_product(C.symmetric(3), C.cyclic(5))
    factor = [g * 5 for g in range(6)]
    assert set(normal_closure(P, [trans * 5]).tolist()) <= set(factor)


def test_normal_closure_is_normal():
    for G in groups():
        for g in range(0, G.order, 3):
            assert is_normal(G, normal_closure(G, [g]))


def test_socles():
    assert len(socle(C.cyclic(12))) == 6
    assert len(socle(C.alternating(5))) == 60
    S4 = C.symmetric(4)
    soc = socle(S4)
    assert len(soc) == 4 and all(S4.elt_order[g] <= 2 for g in soc)


def test_socle_contains_minimal_normals():
    for G in groups():
        soc = set(socle(G).tolist())
        assert is_normal(G, sorted(soc))
        for N in minimal_normal_subgroups(G):
            assert set(N.tolist()) <= soc


def test_socle_factors_of_semisimple_group():
    A5 = C.alternating(5)
    G = C.direct_product(A5, C.alternating(5))
    factors = socle_factors(G)
    assert sorted(len(f) for f in factors) == [60, 60]
    assert len(socle(G)) == 3600
    for f in factors:
        for g in f[1:6]:
            assert len(normal_closure(G, [int(g)], within=f)) == 60


def test_marked_equivalence_examples():
    Z4, V = C.cyclic(4), C.abelian([2, 2])
    assert marked_equivalent(Z4, [1], Z4, [1], 1) and marked_equivalent(Z4, [1], Z4, [1], 2)
    assert not any(marked_equivalent(Z4, [1], V, [v], 2) for v in range(4))
    Z5 = C.cyclic(5)
    assert marked_equivalent(Z5, [1], Z5, [2], 2)


def test_version_two_is_an_equivalence(rng):
    G = C.dihedral(4)
    tuples = [tuple(int(x) for x in rng.integers(G.order, size=2)) for _ in range(25)]
    for u in tuples:
        assert marked_equivalent(G, u, G, u, 2)
    for u, v in itertools.product(tuples, repeat=2):
        assert marked_equivalent(G, u, G, v, 2) == marked_equivalent(G, v, G, u, 2)
        assert marked_equivalent(G, u, G, v, 2) == (marked_type_key(G, u) == marked_type_key(G, v))
    for u, v, w in itertools.islice(itertools.product(tuples, repeat=3), 2000):
        if marked_equivalent(G, u, G, v, 2) and marked_equivalent(G, v, G, w, 2):
            assert marked_equivalent(G, u, G, w, 2)


def test_pattern_key_matches_pattern_equivalence(rng):
    G, H = C.symmetric(3), C.cyclic(6)
    for _ in range(300):
        u = [int(x) for x in rng.integers(6, size=3)]
        v = [int(x) for x in rng.integers(6, size=3)]
        assert pattern_equivalent(G, u, H, v) == (pattern_key(G, u) == pattern_key(H, v))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(CORPUS), st.randoms(use_true_random=False))
def test_permuted_copy_is_a_group(desc, r):
    from groupwl.corpus import parse_group
    G = parse_group(desc)
    perm = list(range(G.order))
    r.shuffle(perm)
    P = permuted_copy(G, perm)
    assert P.identity == perm[G.identity]
    assert sorted(P.elt_order.tolist()) == sorted(G.elt_order.tolist())
    t = np.asarray(G.table)
    pt = np.asarray(P.table)
    p = np.array(perm)
    assert np.array_equal(pt[p[:, None], p[None, :]], p[t])


def test_permuted_copy_identity_permutation():
    G = C.quaternion(8)
    P = permuted_copy(G, range(8))
    assert np.array_equal(np.asarray(P.table), np.asarray(G.table))


def test_cayley_format_round_trip():
    G = C.dihedral(5)
    H = parse_cayley(format_cayley(G))
    assert np.array_equal(np.asarray(H.table), np.asarray(G.table))
    with pytest.raises(FormatError):
        parse_cayley("cayley v1 n=2\n0 1\n1 0\n1\n")
    with pytest.raises(FormatError):
        parse_cayley("cayley v1 n=2\n0 1\n")
    with pytest.raises(FormatError):
        parse_cayley("cayley v2 n=1\n0\n")
