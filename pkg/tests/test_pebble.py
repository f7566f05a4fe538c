from __future__ import annotations

import numpy as np
import pytest

from groupwl import constructors as C
from groupwl import pebble as PB
from groupwl.corpus import parse_group
from groupwl.errors import CapExceeded, IllegalMove
from groupwl.group_core import permuted_copy
from groupwl.iso import AbelianView


def test_check_win_examples():
    Z4, V = C.cyclic(4), C.abelian([2, 2])
    s = PB.new_game(Z4, V, 2)
    assert PB.check_win(s) == "ongoing"
    s.pebbles[0] = (Z4.identity, V.identity)
    assert PB.check_win(s) == "ongoing"
    s.pebbles[1] = (1, 1)
    assert PB.check_win(s) == "spoiler"
    assert PB.check_win(PB.new_game(C.cyclic(4), C.cyclic(6), 1)) == "spoiler"


def test_illegal_moves():
    G = C.cyclic(4)
    s = PB.new_game(G, G, 2, q=1)
    dup = PB.BruteDuplicator(G, G)
    with pytest.raises(IllegalMove):
        PB.play(s, PB.SpoilerMove((0, 1), "left", (1, 2)), dup)
    with pytest.raises(IllegalMove):
        PB.play(s, PB.SpoilerMove((0,), "left", (9,)), dup)
    with pytest.raises(IllegalMove):
        PB.play(s, PB.SpoilerMove((5,), "left", (1,)), dup)
    with pytest.raises(IllegalMove):
        PB.play(s, PB.SpoilerMove((0,), "up", (1,)), dup)
    s2 = PB.new_game(G, G, 2, q=2)
    with pytest.raises(IllegalMove):
        PB.play(s2, PB.SpoilerMove((0, 0), "left", (1, 2)), dup)


def test_play_places_pairs_on_the_chosen_side():
    G = C.cyclic(5)
    s = PB.new_game(G, G, 2, q=2)
    s = PB.play(s, PB.SpoilerMove((0, 1), "right", (2, 3)), PB.BruteDuplicator(G, G))
    assert [h for _, h in s.placed()] == [2, 3]
    assert s.round == 1 and PB.check_win(s) == "ongoing"


@pytest.mark.parametrize("pair", [("Z4", "2^2"), ("Z6", "S3"), ("D4", "Q8"), ("Z8", "2x4")])
@pytest.mark.parametrize("budget", [1, 2])
def test_exhaustive_game_is_monotone(pair, budget):
    G, H = parse_group(pair[0]), parse_group(pair[1])
    wins = PB.spoiler_wins_by_round(G, H, budget, 4)
    assert all(not a or b for a, b in zip(wins, wins[1:]))


def test_z4_versus_klein_four():
    Z4, V = C.cyclic(4), C.abelian([2, 2])
    assert not any(PB.spoiler_wins_by_round(Z4, V, 1, 4))
    assert PB.exhaustive_spoiler(Z4, V, 2, 2)


def test_z6_versus_s3():
    assert PB.exhaustive_spoiler(C.cyclic(6), C.symmetric(3), 2, 3)


def test_exhaustive_game_cap():
    with pytest.raises(CapExceeded):
        PB.spoiler_wins_by_round(C.cyclic(64), C.cyclic(64), 3, 1)


def test_relabeled_copy_never_won():
    rng = np.random.default_rng(1)
    for desc in ["S3", "Q8", "D4", "A4"]:
        G = parse_group(desc)
        P = permuted_copy(G, rng.permutation(G.order))
        assert not any(PB.spoiler_wins_by_round(G, P, 2, 3, version=2))
        dup = PB.BruteDuplicator(G, P)
        for seed in range(5):
            rec = PB.run_game(PB.new_game(G, P, 2, q=2), PB.RandomSpoiler(seed), dup, 10)
            assert rec.winner == "duplicator"


def test_greedy_duplicator_loses_on_non_isomorphic_pair():
    Z4, V = C.cyclic(4), C.abelian([2, 2])
    rec = PB.run_game(PB.new_game(Z4, V, 1), PB.ScriptSpoiler(["0 left 1"]), PB.BruteDuplicator(Z4, V), 5)
    assert rec.winner == "spoiler" and rec.rounds == 1


def test_script_spoiler_and_trace():
    lines = ["# opening", "0 left 1", "1 right 2  # second pebble", ""]
    sp = PB.ScriptSpoiler(lines)
    assert len(sp.moves) == 2
    G = C.cyclic(5)
    rec = PB.run_game(PB.new_game(G, G, 2), sp, PB.BruteDuplicator(G, G), 10)
    assert rec.winner == "duplicator" and rec.rounds == 2
    assert rec.trace[0].startswith("round 1: lift [0] left [1] -> [(1, 1)] : ongoing")
    with pytest.raises(IllegalMove):
        PB.ScriptSpoiler(["0 left"])


def test_all_spoiler_moves_count():
    G = C.cyclic(3)
    s = PB.new_game(G, G, 2, q=2)
    moves = list(PB.all_spoiler_moves(s))
    assert len(moves) == 2 * 2 * 3 + 1 * 2 * 9


def family_game(q=1, n=5):
    L, R = C.theorem_family(q, n, explicit=False)
    return L, R, PB.new_game(L, R, 5 * q // 4, q=q)


def test_family_identity_answered_by_identity():
    L, R, s = family_game()
    dup = PB.FamilyDuplicator(seed=1)
    assert dup(s, PB.SpoilerMove((0,), "left", (L.identity,))) == [R.identity]
    assert dup(s, PB.SpoilerMove((0,), "right", (R.identity,))) == [L.identity]


def test_family_double_answered_by_double():
    L, R, s = family_game()
    dup = PB.FamilyDuplicator(seed=2)
    m = np.asarray(L.cyclic_orders)
    digits = np.where(m == 4, 2, 0)
    digits[m == 2] = 0
    e = int(L.encode(digits))
    assert L.element_order(e) == 2 and PB._square_mask(L, [e])[0]
    a = dup(s, PB.SpoilerMove((0,), "left", (e,)))[0]
    assert R.element_order(a) == 2 and PB._square_mask(R, [a])[0]


def test_family_invariants_survive_random_games():
    L, R, s = family_game()
    dup = PB.FamilyDuplicator(seed=3)

    def invariant(state):
        inv = PB.family_invariants(state)
        assert inv.ok, inv

    for seed in range(20):
        rec = PB.run_game(s, PB.RandomSpoiler(seed), dup, 10, invariant)
        assert rec.winner == "duplicator"


def test_family_duplicator_on_table_groups():
    G, H = C.theorem_family(1, 3)
    L, R = AbelianView(G), AbelianView(H)
    assert L.cyclic_orders == (4, 4, 4, 2, 2, 2)
    s = PB.new_game(L, R, 1)
    rec = PB.run_game(s, PB.RandomSpoiler(0), PB.FamilyDuplicator(seed=0), 10)
    assert rec.winner == "duplicator"


def test_subgroup_shape_and_containment():
    A = C.AbelianGroup([2, 4])
    full = list(range(A.order))
    assert PB.subgroup_shape(A, full) == (1, 1)
    assert PB.containment_count(A, full) == 0
    two = int(A.encode([0, 2]))
    assert PB.containment_count(A, [A.identity, two]) == 1
    one = int(A.encode([1, 0]))
    assert PB.containment_count(A, [A.identity, one]) == 0
