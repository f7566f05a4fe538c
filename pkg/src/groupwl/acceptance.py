"""The tagged acceptance suite.  Each check returns a CriterionResult whose
``passed`` flag includes its runtime limit."""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import corpus, graphs, iso, mekler, pebble, wl
from .constructors import alternating, cyclic, direct_product, theorem_family
from .group_core import (is_associative_bruteforce, permuted_copy, socle, socle_factors,
                         validate_cayley)

log = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    tag: str
    title: str
    ok: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.ok and self.seconds <= self.limit

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        note = "" if self.seconds <= self.limit else " (over time limit)"
        return (f"[{mark}] {self.number}. {self.tag}: {self.title} "
                f"({self.seconds:.1f}s, limit {self.limit:.0f}s){note}")

    def to_json(self) -> dict:
        return {"number": self.number, "tag": self.tag, "title": self.title,
                "passed": self.passed, "ok": self.ok, "seconds": round(self.seconds, 3),
                "limit_seconds": self.limit, "details": self.details}


# --------------------------------------------------------------------------
# 1


def check_axioms(threads=None) -> tuple[bool, dict]:
    checked, failures = {}, []
    for desc in corpus.CONSTRUCTOR_OUTPUTS:
        G = corpus.parse_group(desc)
        if G.order > 2000:
            continue
        try:
            H = validate_cayley(np.asarray(G.table))
            ok = H.identity == G.identity
            if G.order <= 150:
                ok &= is_associative_bruteforce(np.asarray(G.table))
        except Exception as exc:  # reported, not raised
            ok = False
            failures.append(f"{desc}: {exc}")
        checked[desc] = G.order
        if not ok and not any(f.startswith(desc) for f in failures):
            failures.append(desc)
    for q, n in ((1, 2), (1, 3)):
        A, B = theorem_family(q, n, explicit=True)
        if not (A.order == B.order == 2 ** (3 * q * n)):
            failures.append(f"theorem family orders q={q} n={n}")
    return not failures, {"groups": checked, "failures": failures}


# --------------------------------------------------------------------------
# 2


def check_invariance(threads=None, samples: int = 200, seed: int = 7) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    groups = [corpus.parse_group(d) for d in corpus.INVARIANCE_CORPUS]
    runs, bad = 0, []
    for s in range(samples):
        G = groups[int(rng.integers(len(groups)))]
        P = permuted_copy(G, rng.permutation(G.order))
        version = 1 + s % 2
        for k in (1, 2):
            for mode in ("counting", "countfree"):
                SG, SP = wl.group_structure(G, version), wl.group_structure(P, version)
                _, _, v = wl.run(SG, SP, k, mode, "stable", "multiset", threads)
                runs += 1
                if v.distinguished:
                    bad.append(f"{G.name} k={k} {mode} v{version} round {v.round}")
    return not bad, {"samples": samples, "runs": runs, "distinguished": bad}


# --------------------------------------------------------------------------
# 3


def check_pebble_equivalence(threads=None, max_order: int = 12, max_rounds: int = 3) -> tuple[bool, dict]:
    groups = corpus.small_corpus(max_order)
    pairs = list(itertools.combinations(range(len(groups)), 2))
    # a group against a relabeled copy of itself as well
    rng = np.random.default_rng(3)
    copies = {i: permuted_copy(G, rng.permutation(G.order)) for i, G in enumerate(groups)}
    cases, mismatches, spoiler_wins = 0, [], 0
    jobs = [(groups[i], groups[j]) for i, j in pairs] + [(G, copies[i]) for i, G in enumerate(groups)]
    for G, H in jobs:
        for k in (1, 2):
            game = pebble.spoiler_wins_by_round(G, H, k, max_rounds, version=1)
            for r in range(max_rounds + 1):
                _, _, v = wl.run(wl.group_structure(G, 1), wl.group_structure(H, 1), k,
                                 "countfree", r, "set", threads)
                cases += 1
                spoiler_wins += game[r]
                if v.distinguished != game[r]:
                    mismatches.append(f"{G.name} vs {H.name} k={k} r={r}: "
                                      f"wl={v.distinguished} game={game[r]}")
    return not mismatches, {"cases": cases, "groups": len(groups), "spoiler_wins": spoiler_wins,
                            "mismatches": mismatches}


# --------------------------------------------------------------------------
# 4


def check_theorem12(threads=None, games: int = 1000, max_rounds: int = 20) -> tuple[bool, dict]:
    G, H = theorem_family(1, 3, explicit=True)
    SG, SH = wl.group_structure(G, 1), wl.group_structure(H, 1)
    _, _, vs = wl.run(SG, SH, 2, "countfree", 10, "set", threads)
    _, _, vm = wl.run(SG, SH, 2, "countfree", 10, "multiset", threads)
    ab = iso.abelian_isomorphic(G, H)
    order2 = (G.order_counts().get(2, 0), H.order_counts().get(2, 0))
    details = {"set_verdict": {"distinguished": vs.distinguished, "round": vs.round},
               "multiset_verdict": {"distinguished": vm.distinguished, "round": vm.round},
               "abelian_isomorphic": ab.isomorphic, "order_two_counts": list(order2)}
    L, R = theorem_family(1, 5, explicit=False)
    losses = stuck = broken = 0
    rounds_played = 0

    def invariant(state):
        nonlocal broken
        if not pebble.family_invariants(state).ok:
            broken += 1

    for seed in range(games):
        state = pebble.new_game(L, R, budget=5 // 4, q=1, version=2)
        try:
            rec = pebble.run_game(state, pebble.RandomSpoiler(seed), pebble.FamilyDuplicator(seed),
                                  max_rounds, invariant)
        except pebble.StrategyStuck as exc:
            stuck += 1
            log.error("strategy stuck: %s", exc)
            continue
        losses += rec.winner == "spoiler"
        rounds_played += rec.rounds
    details["family_games"] = {"games": games, "losses": losses, "stuck": stuck,
                               "invariant_violations": broken, "rounds_played": rounds_played}
    ok = (not vs.distinguished and vm.distinguished and ab.isomorphic is False
          and order2 == (63, 31) and losses == stuck == broken == 0)
    return ok, details


# --------------------------------------------------------------------------
# 5


def _mekler_checks(g: graphs.Graph, p: int = 3) -> list[str]:
    M = mekler.mekler_group(g, p)
    errs = []
    expected = p ** (g.num_vertices + g.num_vertices * (g.num_vertices - 1) // 2 - g.num_edges)
    if M.order != expected:
        errs.append("order formula")
    G = mekler.to_cayley(M)
    if G.order != expected:
        errs.append("enumerated order")
    gi = [M.index(M.generator(v)) for v in range(M.n)]
    for u, v in itertools.combinations(range(M.n), 2):
        commute = G.mul(gi[u], gi[v]) == G.mul(gi[v], gi[u])
        if commute != g.has_edge(u, v) or M.commute(M.generator(u), M.generator(v)) != commute:
            errs.append(f"commute({u},{v})")
    orders = np.asarray(G.elt_order)
    if not ((orders == p) | (np.arange(G.order) == G.identity)).all():
        errs.append("exponent")
    mism, central = mekler.commutation_mismatches(G, M)
    if mism:
        errs.append(f"centralizer formula: {mism} mismatches")
    zmask = mekler.gen_span_membership(M, mekler.center_of(M))
    nc = p ** len(M.non_edges)
    formula_center = zmask[np.arange(G.order) // nc]
    if not np.array_equal(formula_center, central):
        errs.append("center")
    return errs


def check_mekler(threads=None, max_vertices: int = 4) -> tuple[bool, dict]:
    failures, count = {}, 0
    for n in range(1, max_vertices + 1):
        for g in graphs.all_labeled_graphs(n):
            errs = _mekler_checks(g)
            count += 1
            if errs:
                failures[f"n={n} edges={g.sorted_edges()}"] = errs
    return not failures, {"graphs": count, "failures": failures}


# --------------------------------------------------------------------------
# 6


def check_cfi(threads=None) -> tuple[bool, dict]:
    details, ok = {}, True
    for name, base in (("k4", graphs.complete(4)), ("prism", graphs.prism(3))):
        edges = base.sorted_edges()
        plain = graphs.cfi(base).graph
        odd = graphs.cfi(base, edges[:1]).graph
        even = graphs.cfi(base, edges[:2]).graph
        deg = plain.degrees()
        counts = (plain.num_vertices, plain.num_edges)
        expected = (graphs.cfi_vertex_count(base), 3 * graphs.cfi_vertex_count(base) // 2)
        shape_ok = counts == expected and bool((deg == 3).all())
        if name == "k4":
            shape_ok &= counts == (40, 60)
        S = wl.graph_structure
        _, _, v_odd = wl.run(S(plain), S(odd), 3, "counting", "stable", "multiset", threads)
        _, _, v_even = wl.run(S(plain), S(even), 3, "counting", "stable", "multiset", threads)
        good = shape_ok and v_odd.distinguished and not v_even.distinguished
        ok &= good
        details[name] = {"vertices": counts[0], "edges": counts[1], "regular3": bool((deg == 3).all()),
                         "odd_distinguished": v_odd.distinguished, "odd_round": v_odd.round,
                         "even_distinguished": v_even.distinguished, "even_round": v_even.round}
    return ok, details


# --------------------------------------------------------------------------
# 7


def check_coprime(threads=None) -> tuple[bool, dict]:
    A = corpus.parse_group("sdp:3:7^2:2,2")
    B = corpus.parse_group("sdp:3:7^2:2,4")
    # the same action precomposed with the inversion automorphism of Z3
    C = corpus.parse_group("sdp:3:7^2:4,2")
    o_ab = iso.oracle_isomorphic(A, B)
    p_ab = iso.wl_pipeline(A, B, 2, "countfree", 10, version=2, threads=threads)
    o_bc = iso.oracle_isomorphic(B, C)
    p_bc = iso.wl_pipeline(B, C, 2, "countfree", 10, version=2, threads=threads)
    v1 = iso.wl_pipeline(A, B, 2, "countfree", 10, version=1, threads=threads)
    details = {
        "pair_oracle": o_ab.verdict, "pair_pipeline": p_ab.verdict, "pair_pipeline_reason": p_ab.reason,
        "taunt_pair_oracle": o_bc.verdict, "taunt_pair_pipeline": p_bc.verdict,
        "pair_pipeline_version1_k2": v1.verdict,
    }
    ok = (o_ab.isomorphic is False and p_ab.isomorphic is False
          and o_bc.isomorphic is True and p_bc.isomorphic is None)
    return ok, details


# --------------------------------------------------------------------------
# 8


def check_simple_products(threads=None) -> tuple[bool, dict]:
    A5 = alternating(5)
    G = direct_product(A5, A5)
    H = direct_product(A5, cyclic(60))
    res = iso.wl_pipeline(G, H, 2, "countfree", 10, version=1, threads=threads)
    soc = socle(G)
    factors = socle_factors(G)
    simple = all(len(f) == 60 for f in factors)
    details = {"pipeline": res.verdict, "reason": res.reason, "socle_order": int(len(soc)),
               "socle_factors": [int(len(f)) for f in factors]}
    ok = res.isomorphic is False and len(soc) == G.order and len(factors) == 2 and simple
    return ok, details


# --------------------------------------------------------------------------
# 9


def check_canonize(threads=None, relabelings: int = 20, seed: int = 11) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    certs: dict[str, str] = {}
    unstable = []
    groups = {d: corpus.parse_group(d) for d in corpus.CANON_CORPUS}
    for d, G in groups.items():
        ref = wl.canonize(G, 2, threads=threads).digest
        certs[d] = ref
        for _ in range(relabelings):
            P = permuted_copy(G, rng.permutation(G.order))
            if wl.canonize(P, 2, threads=threads).digest != ref:
                unstable.append(d)
                break
    clashes, unconfirmed = [], []
    names = list(groups)
    for a, b in itertools.combinations(names, 2):
        if certs[a] == certs[b]:
            clashes.append(f"{a}={b}")
        if groups[a].order == groups[b].order and iso.oracle_isomorphic(groups[a], groups[b]).isomorphic:
            unconfirmed.append(f"{a}~{b}")
    ok = not unstable and not clashes and not unconfirmed
    return ok, {"groups": len(names), "relabelings": relabelings, "unstable": unstable,
                "certificate_clashes": clashes, "oracle_isomorphic_pairs": unconfirmed,
                "digests": {k: v[:16] for k, v in certs.items()}}


CRITERIA: dict[str, tuple[int, str, float, Callable]] = {
    "axioms": (1, "constructor outputs pass validation", 60, check_axioms),
    "invariance": (2, "WL never separates a group from a relabeled copy", 300, check_invariance),
    "pebble-equivalence": (3, "count-free WL agrees with the exhaustive game", 600,
                           check_pebble_equivalence),
    "theorem12": (4, "separating Abelian family and the family Duplicator", 300, check_theorem12),
    "mekler": (5, "Mekler group lemmas on all graphs up to 4 vertices", 600, check_mekler),
    "cfi": (6, "CFI twist parity under counting 3-WL", 900, check_cfi),
    "coprime": (7, "coprime extension pipeline", 300, check_coprime),
    "simple-products": (8, "products of simple groups pipeline", 1200, check_simple_products),
    "canonize": (9, "canonical certificates", 900, check_canonize),
}


def run_criterion(tag: str, threads: int | None = None) -> CriterionResult:
    number, title, limit, fn = CRITERIA[tag]
    t0 = time.perf_counter()
    try:
        ok, details = fn(threads)
    except Exception as exc:
        log.exception("criterion %s raised", tag)
        ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
    return CriterionResult(number, tag, title, bool(ok), time.perf_counter() - t0, limit, details)


def run_all(only: list[str] | None = None, threads: int | None = None,
            echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    tags = list(CRITERIA) if not only else only
    for t in tags:
        if t not in CRITERIA:
            raise KeyError(f"unknown criterion tag {t!r}")
    out = []
    for t in tags:
        res = run_criterion(t, threads)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
