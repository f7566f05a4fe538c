"""Count-free pebble games on pairs of groups.

Two engines live here.

``exhaustive_spoiler`` decides the count-free (k+1)-pebble game exactly by
backward induction over all positions ``(u, v)`` in ``G^k x H^k``.  A round
places the spare pebble on ``x`` (either side), Duplicator answers ``y``, and
Spoiler then lifts one of the k old pebbles; the pebbles left on the board
are checked for marked equivalence.  The opening places a whole k-tuple on
one side and Duplicator answers with a k-tuple.

``play`` runs the q-ary game round by round with pluggable Spoilers and
Duplicators: Spoiler lifts between 1 and q pebble pairs, puts them on one
side, Duplicator answers all of them at once, and every placed pair is then
checked.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CapExceeded, IllegalMove, StrategyStuck
from .group_core import marked_equivalent, marked_map, marked_type_key, pattern_key

log = logging.getLogger(__name__)

SEARCH_CAP = 5_000_000


# --------------------------------------------------------------------------
# exhaustive game solving


def _tuple_index(n: int, k: int) -> np.ndarray:
    """coords[i, rank] = i-th coordinate of the tuple with that rank."""
    return np.array(np.unravel_index(np.arange(n ** k), (n,) * k)).reshape(k, -1)


def _substitution(n: int, k: int) -> np.ndarray:
    """sub[j, x, rank] = rank of the tuple with coordinate j replaced by x."""
    coords = _tuple_index(n, k)
    weights = n ** np.arange(k - 1, -1, -1)
    base = np.arange(n ** k)
    sub = np.empty((k, n, n ** k), dtype=np.int64)
    for j in range(k):
        without = base - coords[j] * weights[j]
        sub[j] = without[None, :] + np.arange(n)[:, None] * weights[j]
    return sub


def _position_keys(G, k: int, version: int) -> list:
    coords = _tuple_index(G.order, k).T.tolist()
    key = pattern_key if version == 1 else marked_type_key
    return [key(G, u) for u in coords]


def spoiler_wins_by_round(left, right, budget: int, rounds: int, version: int = 1,
                          cap: int = SEARCH_CAP) -> list[bool]:
    """Entry r says whether Spoiler wins the count-free game within r rounds,
    for r = 0..rounds, ``budget`` being the number of pebbles on the board."""
    n, m, k = left.order, right.order, budget
    if n != m:
        return [True] * (rounds + 1)
    if k < 1:
        raise ValueError("budget must be at least 1")
    if (n ** k) ** 2 > cap:
        raise CapExceeded(f"{(n ** k) ** 2} positions exceed the search cap {cap}")
    # positions whose pebblings are marked equivalent are merged via canonical keys
    kl, kr = _position_keys(left, k, version), _position_keys(right, k, version)
    ids = {key: i for i, key in enumerate(sorted(set(kl) | set(kr)))}
    lost = np.array([ids[x] for x in kl])[:, None] != np.array([ids[x] for x in kr])[None, :]
    sub = _substitution(n, k)
    W = lost.copy()
    out = [_opening(W)]
    stable = False
    for _ in range(rounds):
        if stable:
            out.append(out[-1])
            continue
        spoiler_left = np.zeros(W.shape, dtype=bool)
        spoiler_right = np.ones((n,) + W.shape, dtype=bool)  # indexed by y
        for x in range(n):
            all_y = np.ones(W.shape, dtype=bool)
            for y in range(n):
                acc = np.zeros(W.shape, dtype=bool)
                for j in range(k):
                    acc |= W[sub[j, x][:, None], sub[j, y][None, :]]
                all_y &= acc
                spoiler_right[y] &= acc
            spoiler_left |= all_y
        new = W | spoiler_left | spoiler_right.any(axis=0)
        stable = np.array_equal(new, W)
        W = new
        out.append(_opening(W))
    return out


def _opening(W: np.ndarray) -> bool:
    # a whole k-tuple goes down on one side, answered by a k-tuple on the other
    return bool(W.all(axis=1).any() or W.all(axis=0).any())


def exhaustive_spoiler(left, right, budget: int, rounds: int, version: int = 1,
                       cap: int = SEARCH_CAP) -> bool:
    """True iff Spoiler wins the count-free (budget+1)-pebble game within
    ``rounds`` rounds."""
    return spoiler_wins_by_round(left, right, budget, rounds, version, cap)[-1]


# --------------------------------------------------------------------------
# round-by-round play


@dataclass
class GameState:
    left: object
    right: object
    pebbles: list[Optional[tuple[int, int]]]
    budget: int
    q: int = 1
    round: int = 0
    version: int = 2

    def placed(self) -> list[tuple[int, int]]:
        return [p for p in self.pebbles if p is not None]


@dataclass(frozen=True)
class SpoilerMove:
    lifted: tuple[int, ...]
    side: str
    elements: tuple[int, ...]


def new_game(left, right, budget: int, q: int = 1, version: int = 2) -> GameState:
    if budget < 1 or q < 1:
        raise ValueError("budget and q must be positive")
    return GameState(left, right, [None] * budget, budget, q, 0, version)


def check_win(state: GameState) -> str:
    """'spoiler' if the pebbled map is not a marked equivalence, else 'ongoing'."""
    if state.left.order != state.right.order:
        return "spoiler"
    pairs = state.placed()
    if not pairs:
        return "ongoing"
    u = [g for g, _ in pairs]
    v = [h for _, h in pairs]
    ok = marked_equivalent(state.left, u, state.right, v, state.version)
    return "ongoing" if ok else "spoiler"


Duplicator = Callable[[GameState, SpoilerMove], Sequence[int]]


def _validate_move(state: GameState, move: SpoilerMove) -> None:
    if not 1 <= len(move.lifted) <= state.q:
        raise IllegalMove(f"must lift between 1 and {state.q} pebbles, lifted {len(move.lifted)}")
    if len(set(move.lifted)) != len(move.lifted):
        raise IllegalMove("a pebble was lifted twice")
    if any(not 0 <= i < state.budget for i in move.lifted):
        raise IllegalMove("no such pebble")
    if move.side not in ("left", "right"):
        raise IllegalMove(f"unknown side {move.side!r}")
    if len(move.elements) != len(move.lifted):
        raise IllegalMove("one element per lifted pebble")
    group = state.left if move.side == "left" else state.right
    if any(not 0 <= e < group.order for e in move.elements):
        raise IllegalMove("element out of range")


def play(state: GameState, move: SpoilerMove, duplicator: Duplicator) -> GameState:
    """Apply one round: lift, place, let Duplicator answer all placements at once."""
    _validate_move(state, move)
    pebbles = list(state.pebbles)
    for i in move.lifted:
        pebbles[i] = None
    lifted = replace(state, pebbles=pebbles)
    answers = list(duplicator(lifted, move))
    other = state.right if move.side == "left" else state.left
    if len(answers) != len(move.elements) or any(not 0 <= a < other.order for a in answers):
        raise IllegalMove("duplicator returned an invalid response")
    for i, e, a in zip(move.lifted, move.elements, answers):
        pebbles[i] = (e, a) if move.side == "left" else (a, e)
    return replace(state, pebbles=pebbles, round=state.round + 1)


def _oriented(state: GameState, side: str):
    """(spoiler group, duplicator group, spoiler-side pebbles, duplicator-side pebbles)."""
    pairs = state.placed()
    if side == "left":
        return state.left, state.right, [g for g, _ in pairs], [h for _, h in pairs]
    return state.right, state.left, [h for _, h in pairs], [g for g, _ in pairs]


# --------------------------------------------------------------------------
# Duplicators


class BruteDuplicator:
    """Copies Spoiler through a fixed isomorphism when one exists; otherwise
    answers greedily, keeping the pebbled map a marked equivalence if it can."""

    def __init__(self, left, right, isomorphism: dict | None = None):
        self.iso = isomorphism
        if self.iso is None and left.order == right.order:
            from .iso import oracle_isomorphic

            res = oracle_isomorphic(left, right)
            self.iso = res.witness if res.isomorphic else None
        if self.iso is not None and not isinstance(self.iso, dict):
            self.iso = {g: int(h) for g, h in enumerate(self.iso)}
        self.inv = {v: k for k, v in self.iso.items()} if self.iso is not None else None

    def __call__(self, state: GameState, move: SpoilerMove) -> list[int]:
        if self.iso is not None:
            table = self.iso if move.side == "left" else self.inv
            return [int(table[e]) for e in move.elements]
        mine, theirs, u, v = _oriented(state, move.side)
        answers = []
        for e in move.elements:
            pick = 0
            for cand in range(theirs.order):
                if marked_equivalent(mine, u + [e], theirs, v + [cand], state.version):
                    pick = cand
                    break
            u.append(e)
            v.append(pick)
            answers.append(pick)
        return answers


def _square_mask(A, elements: Sequence[int]) -> np.ndarray:
    """Which elements of an Abelian group A (given as cyclic orders) are doubles."""
    digits = A.decode(np.asarray(elements, dtype=np.int64))
    m = np.asarray(A.cyclic_orders)
    ok = (m % 2 == 1) | (digits % 2 == 0)
    return ok.all(axis=-1)


def _rank2(count: int) -> int:
    return int(count).bit_length() - 1


def containment_count(A, subgroup: Sequence[int]) -> int:
    """Number of Z/2 factors of the subgroup S that lie in cyclic Z/4's of A:
    dim(S[2] meet 2A) - dim(2S) over F_2."""
    S = np.asarray(sorted(set(int(s) for s in subgroup)), dtype=np.int64)
    orders = np.asarray(A.element_order(S))
    s2 = S[orders <= 2]
    squares = s2[_square_mask(A, s2)]
    doubled = {A.mul(int(s), int(s)) for s in S}
    return _rank2(len(squares)) - _rank2(len(doubled))


def subgroup_shape(A, subgroup: Sequence[int]) -> tuple[int, int]:
    """(a, b) with S = (Z/2)^a x (Z/4)^b for a subgroup of exponent dividing 4."""
    S = list(set(int(s) for s in subgroup))
    orders = np.asarray(A.element_order(np.asarray(S)))
    if orders.max(initial=1) > 4:
        raise ValueError("subgroup has an element of order above 4")
    rank_s2 = _rank2(int((orders <= 2).sum()))
    b = _rank2(len({A.mul(s, s) for s in S}))
    return rank_s2 - b, b


@dataclass
class FamilyStrategyState:
    shape: tuple[int, int]
    containment_left: int
    containment_right: int
    marked: bool

    @property
    def ok(self) -> bool:
        return self.marked and self.containment_left == self.containment_right


def family_invariants(state: GameState) -> FamilyStrategyState:
    pairs = state.placed()
    u = [g for g, _ in pairs]
    v = [h for _, h in pairs]
    phi = marked_map(state.left, u, state.right, v)
    if phi is None:
        return FamilyStrategyState((0, 0), -1, -2, False)
    shape = subgroup_shape(state.left, list(phi))
    return FamilyStrategyState(shape, containment_count(state.left, list(phi)),
                               containment_count(state.right, list(phi.values())), True)


class FamilyDuplicator:
    """Duplicator for the two Abelian groups of exponent 4 in the separating family.

    Each Spoiler element is answered in turn.  An element already generated
    by the pebbles is mapped through the current marked isomorphism.  Otherwise
    a response must keep the extended map a marked isomorphism and keep the
    containment counts equal; among such responses one that also preserves
    "is a double in the ambient group" elementwise is preferred.  Candidates are
    sampled at random first and then scanned exhaustively; failure raises
    StrategyStuck.
    """

    def __init__(self, seed: int = 0, samples: int = 4000):
        self.rng = random.Random(seed)
        self.samples = samples

    def __call__(self, state: GameState, move: SpoilerMove) -> list[int]:
        mine, theirs, u, v = _oriented(state, move.side)
        answers = []
        for e in move.elements:
            a = self._respond(mine, theirs, u, v, e, state)
            u.append(e)
            v.append(a)
            answers.append(a)
        return answers

    def _respond(self, mine, theirs, u, v, e, state) -> int:
        phi = marked_map(mine, u, theirs, v)
        if phi is None:
            raise StrategyStuck(f"pebbled map is already broken: {u} -> {v}")
        if e in phi:
            return int(phi[e])
        target_order = int(mine.element_order(e))
        strong = weak = None
        for cand in self._candidates(theirs):
            if int(theirs.element_order(cand)) != target_order:
                continue
            ext = marked_map(mine, u + [e], theirs, v + [cand])
            if ext is None:
                continue
            src, dst = list(ext.keys()), list(ext.values())
            if containment_count(mine, src) != containment_count(theirs, dst):
                continue
            if np.array_equal(_square_mask(mine, src), _square_mask(theirs, dst)):
                strong = cand
                break
            if weak is None:
                weak = cand
        pick = strong if strong is not None else weak
        if pick is None:
            raise StrategyStuck(
                f"no response for {e} at round {state.round}; pebbles {state.pebbles}")
        return int(pick)

    def _candidates(self, A):
        for _ in range(self.samples):
            yield self.rng.randrange(A.order)
        yield from range(A.order)


# --------------------------------------------------------------------------
# Spoilers


class RandomSpoiler:
    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def __call__(self, state: GameState) -> SpoilerMove:
        j = self.rng.randint(1, state.q)
        lifted = tuple(sorted(self.rng.sample(range(state.budget), min(j, state.budget))))
        side = self.rng.choice(("left", "right"))
        group = state.left if side == "left" else state.right
        return SpoilerMove(lifted, side, tuple(self.rng.randrange(group.order) for _ in lifted))


class ScriptSpoiler:
    """Moves read from lines ``<pebbles> <left|right> <elements>``, comma separated."""

    def __init__(self, lines: Sequence[str]):
        self.moves = []
        for ln in lines:
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            parts = ln.split()
            if len(parts) != 3:
                raise IllegalMove(f"bad script line {ln!r}")
            lifted = tuple(int(x) for x in parts[0].split(","))
            elements = tuple(int(x) for x in parts[2].split(","))
            self.moves.append(SpoilerMove(lifted, parts[1], elements))
        self.pos = 0

    def __call__(self, state: GameState) -> SpoilerMove | None:
        if self.pos >= len(self.moves):
            return None
        self.pos += 1
        return self.moves[self.pos - 1]


@dataclass
class GameRecord:
    winner: str
    rounds: int
    trace: list[str] = field(default_factory=list)


def run_game(state: GameState, spoiler, duplicator: Duplicator, rounds: int,
             invariant: Callable[[GameState], None] | None = None) -> GameRecord:
    trace = []
    if check_win(state) == "spoiler":
        return GameRecord("spoiler", 0, ["round 0: sizes differ -> spoiler wins"])
    for _ in range(rounds):
        move = spoiler(state)
        if move is None:
            break
        state = play(state, move, duplicator)
        result = check_win(state)
        placed = [state.pebbles[i] for i in move.lifted]
        trace.append(f"round {state.round}: lift {list(move.lifted)} {move.side} "
                     f"{list(move.elements)} -> {placed} : {result}")
        if invariant is not None:
            invariant(state)
        if result == "spoiler":
            return GameRecord("spoiler", state.round, trace)
    return GameRecord("duplicator", state.round, trace)


def all_spoiler_moves(state: GameState):
    """Every legal move; used by small exhaustive checks."""
    for j in range(1, state.q + 1):
        for lifted in itertools.combinations(range(state.budget), j):
            for side, group in (("left", state.left), ("right", state.right)):
                for els in itertools.product(range(group.order), repeat=j):
                    yield SpoilerMove(lifted, side, els)
