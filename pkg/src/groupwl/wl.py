"""Weisfeiler-Leman refinement of k-tuples over groups and graphs.

The refinement step is the folklore one: the new color of ``v = (v_1..v_k)``
is its old color together with the aggregate, over all elements ``x``, of the
vector ``(C[v(1/x)], ..., C[v(k/x)])`` where ``v(i/x)`` replaces coordinate i
by x.  Counting mode aggregates a multiset, count-free mode a set.

Tuples are addressed by mixed-radix rank, so a coloring is an integer array
of shape ``(n,) * k``.  Keys are never hashed: every round builds the exact
key rows, deduplicates them with a byte-wise sort, and numbers the distinct
keys in sorted order.  Ids therefore depend only on the keys, not on element
labels, chunking or worker count, and two structures refined together share
one id space.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, NotGenerated
from .graphs import Graph
from .group_core import Group, marked_type_key

TUPLE_BUDGET = 200_000_000
_CHUNK_ELEMS = 1 << 22

KINDS = ("group-v1", "group-v2", "graph")


@dataclass(frozen=True)
class Structure:
    """A group (Version I or II) or a graph, plus individualized elements."""

    kind: str
    n: int
    group: Group | None = None
    graph: Graph | None = None
    individualized: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown structure kind {self.kind!r}")


def group_structure(G: Group, version: int = 1) -> Structure:
    if version not in (1, 2):
        raise ValueError("version must be 1 or 2")
    return Structure(f"group-v{version}", G.order, group=G)


def graph_structure(g: Graph) -> Structure:
    return Structure("graph", g.num_vertices, graph=g)


def individualize(S: Structure, elements: Sequence[int]) -> Structure:
    els = tuple(int(x) for x in elements)
    if any(not 0 <= x < S.n for x in els):
        raise ValueError("individualized element out of range")
    return replace(S, individualized=S.individualized + els)


@dataclass
class Coloring:
    k: int
    round: int
    color_of: np.ndarray                      # shape (n,)*k, dense ids
    history: list[str] = field(default_factory=list)
    histograms: list[dict[int, int]] = field(default_factory=list)

    @property
    def class_sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.color_of, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.color_of).size)

    def element_colors(self) -> np.ndarray:
        """Colors of the diagonal tuples (g, ..., g)."""
        n = self.color_of.shape[0]
        idx = np.arange(n)
        return self.color_of[(idx,) * self.k]


@dataclass
class Verdict:
    distinguished: bool
    criterion: str
    round: int | str
    witness: int | None = None
    reason: str = ""


def _check_budget(n: int, k: int, budget: int) -> None:
    if k not in (1, 2, 3):
        raise BudgetExceeded(f"k={k} unsupported; use 1, 2 or 3")
    if n ** k > budget:
        raise BudgetExceeded(f"{n}^{k} tuples exceed the budget of {budget}")


def _grids(n: int, k: int, a0: int, a1: int) -> list[np.ndarray]:
    """Open coordinate grids for the tuples whose first coordinate is in [a0, a1)."""
    shape = [a1 - a0] + [n] * (k - 1)
    grids = []
    for i in range(k):
        s = [1] * k
        s[i] = shape[i]
        base = np.arange(a0, a1) if i == 0 else np.arange(n)
        grids.append(base.reshape(s).astype(np.int64))
    return grids


def _chunks(n: int, k: int, per_row: int) -> list[tuple[int, int]]:
    rows_per_a = n ** (k - 1) * max(1, per_row)
    step = max(1, _CHUNK_ELEMS // max(1, rows_per_a))
    return [(a, min(n, a + step)) for a in range(0, n, step)]


class _Packer:
    """Packs small digits into as few int64 words as needed (each < 2^62)."""

    def __init__(self, shape):
        self.shape = shape
        self.words: list[np.ndarray] = []
        self.cur = np.zeros(shape, dtype=np.int64)
        self.cap = 1

    def push(self, digit, base: int) -> None:
        if self.cap * base >= 2 ** 62:
            self.words.append(self.cur)
            self.cur = np.zeros(self.shape, dtype=np.int64)
            self.cap = 1
        self.cur = self.cur * base + digit
        self.cap *= base

    def rows(self) -> np.ndarray:
        cols = self.words + [self.cur]
        return np.stack([np.broadcast_to(c, self.shape).ravel() for c in cols], axis=1)


def _raw_initial(S: Structure, k: int, threads: int) -> np.ndarray:
    """Initial pattern of every k-tuple extended by the individualized elements.

    Individualized elements behave like pebbles that never move: tuple
    ``v`` is described by the pattern of ``v + individualized``, keeping only
    the relations that involve at least one position of ``v``.
    """
    n = S.n
    ext = list(S.individualized)
    m = k + len(ext)
    table = np.asarray(S.group.table) if S.group is not None else None
    adj = S.graph.adjacency() if S.graph is not None else None
    chunks = _chunks(n, k, m * m)

    def work(bounds):
        a0, a1 = bounds
        shape = (a1 - a0,) + (n,) * (k - 1)
        g = _grids(n, k, a0, a1) + [np.asarray(c, dtype=np.int64) for c in ext]
        pk = _Packer(shape)
        for i in range(m):
            for j in range(i + 1, m):
                if i < k:
                    pk.push(g[i] == g[j], 2)
        if S.kind == "group-v1":
            for i in range(m):
                for j in range(m):
                    prod = table[g[i], g[j]]
                    digit = np.full(shape, m, dtype=np.int64)
                    for l in range(m - 1, -1, -1):
                        if i < k or j < k or l < k:
                            digit = np.where(prod == g[l], l, digit)
                    pk.push(digit, m + 1)
        else:
            for i in range(min(k, m)):
                for j in range(i + 1, m):
                    pk.push(adj[g[i], g[j]], 2)
        return pk.rows()

    return np.concatenate(_map(work, chunks, threads), axis=0)


def _v2_joint_ids(structs: list[Structure], k: int) -> list[np.ndarray]:
    """Version II: one id per marked isomorphism type of the extended tuple,
    numbered in sorted key order across all structures."""
    all_keys: dict = {}
    per = []
    for S in structs:
        n = S.n
        tuples = np.array(np.unravel_index(np.arange(n ** k), (n,) * k)).T.tolist()
        ext = list(S.individualized)
        ks = [marked_type_key(S.group, t + ext) for t in tuples]
        for key in ks:
            all_keys.setdefault(key, None)
        per.append(ks)
    ranked = {key: i for i, key in enumerate(sorted(all_keys))}
    return [np.array([ranked[key] for key in ks], dtype=np.int64)[:, None] for ks in per]


def _map(fn, items, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _densify(raws: list[np.ndarray], n: list[int], k: int) -> list[np.ndarray]:
    """Rows of raw words -> dense ids, numbered in sorted row order."""
    flat = _as_void(np.concatenate(raws, axis=0))
    _, inv = np.unique(flat, return_inverse=True)
    out, pos = [], 0
    for r, size in zip(raws, n):
        out.append(inv[pos:pos + r.shape[0]].reshape((size,) * k).astype(np.int64))
        pos += r.shape[0]
    return out


def _fingerprint(colors: np.ndarray) -> str:
    flat = colors.ravel()
    _, first, inv = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return hashlib.sha256(rank[inv].astype(np.int64).tobytes()).hexdigest()[:16]


def _histogram(colors: np.ndarray) -> dict[int, int]:
    ids, counts = np.unique(colors, return_counts=True)
    return {int(i): int(c) for i, c in zip(ids, counts)}


def initial_colorings(structs: Sequence[Structure], k: int, threads: int | None = None,
                      budget: int = TUPLE_BUDGET) -> list[Coloring]:
    """Round-0 colorings of several structures with one shared id space."""
    threads = threads or os.cpu_count() or 1
    kinds = {S.kind for S in structs}
    if len(kinds) != 1:
        raise ValueError("structures of different kinds cannot share a coloring")
    for S in structs:
        _check_budget(S.n, k, budget)
    if structs[0].kind == "group-v2":
        raws = _v2_joint_ids(list(structs), k)
    else:
        raws = [_raw_initial(S, k, threads) for S in structs]
    dense = _densify(raws, [S.n for S in structs], k)
    return [Coloring(k, 0, c, [_fingerprint(c)], [_histogram(c)]) for c in dense]


def initial_coloring(S: Structure, k: int, threads: int | None = None,
                     budget: int = TUPLE_BUDGET) -> Coloring:
    return initial_colorings([S], k, threads, budget)[0]


# --------------------------------------------------------------------------
# refinement


def _substitution_codes(C: np.ndarray, k: int, K: int, a0: int, a1: int) -> np.ndarray:
    """For tuples with first coordinate in [a0, a1): rows over x of the code
    of (C[v(1/x)], ..., C[v(k/x)]).  Shape (rows, n)."""
    n = C.shape[0]
    if k == 1:
        return np.broadcast_to(C[None, :], (a1 - a0, n))
    if k == 2:
        first = C.T[None, :, :]                      # C[x, b]  at [a, b, x]
        second = C[a0:a1][:, None, :]                # C[a, x]
        return (first * K + second).reshape(-1, n)
    first = C.transpose(1, 2, 0)[None]                   # C[x, b, c] at [a, b, c, x]
    second = C[a0:a1].transpose(0, 2, 1)[:, None, :, :]  # C[a, x, c]
    third = C[a0:a1][:, :, None, :]                      # C[a, b, x]
    return ((first * K + second) * K + third).reshape(-1, n)


def _key_rows(C: np.ndarray, k: int, K: int, mode: str, use_hist: bool,
              a0: int, a1: int, dtype) -> np.ndarray:
    codes = _substitution_codes(C, k, K, a0, a1)
    rows = codes.shape[0]
    old = C[a0:a1].reshape(-1, 1)
    if use_hist:
        width = K ** k
        flat = (np.arange(rows, dtype=np.int64)[:, None] * width + codes).ravel()
        counts = np.bincount(flat, minlength=rows * width).reshape(rows, width)
        if mode == "countfree":
            counts = counts > 0
        body = counts.astype(dtype)
    else:
        body = np.sort(codes, axis=1)
        if mode == "countfree":
            dup = np.zeros_like(body, dtype=bool)
            dup[:, 1:] = body[:, 1:] == body[:, :-1]
            body = np.where(dup, np.iinfo(np.int64).max, body)
            body.sort(axis=1)
            body = np.where(body == np.iinfo(np.int64).max, K ** k, body)
        body = body.astype(dtype)
    return np.ascontiguousarray(np.hstack([old.astype(dtype), body]))


def _as_void(rows: np.ndarray) -> np.ndarray:
    # Big-endian bytes make the byte order of a row match its numeric order.
    be = rows.astype(rows.dtype.newbyteorder(">"))
    return np.ascontiguousarray(be).view(np.dtype((np.void, be.dtype.itemsize * be.shape[1]))).ravel()


def refine_joint(colorings: Sequence[Coloring], mode: str = "counting",
                 threads: int | None = None) -> list[Coloring]:
    """One refinement round applied to several colorings with a shared id space."""
    if mode not in ("counting", "countfree"):
        raise ValueError(f"unknown mode {mode!r}")
    threads = threads or os.cpu_count() or 1
    k = colorings[0].k
    n = colorings[0].color_of.shape[0]
    if any(c.k != k or c.color_of.shape[0] != n for c in colorings):
        raise ValueError("joint refinement needs equal k and domain size")
    K = int(max(int(c.color_of.max()) for c in colorings)) + 1
    if K ** k >= 2 ** 62:
        raise BudgetExceeded(f"{K} classes overflow the {k}-dimensional substitution code")
    use_hist = K ** k <= n
    top = max(n, K ** k + 1, K)
    dtype = np.uint16 if top < 2 ** 16 else np.uint32 if top < 2 ** 32 else np.uint64
    width = (K ** k if use_hist else n) + 1
    chunks = _chunks(n, k, width)
    per_struct = []
    for col in colorings:
        C = col.color_of

        def work(bounds, C=C):
            rows = _as_void(_key_rows(C, k, K, mode, use_hist, bounds[0], bounds[1], dtype))
            uniq, inv = np.unique(rows, return_inverse=True)
            return uniq, inv

        per_struct.append(_map(work, chunks, threads))
    all_uniq = np.concatenate([u for parts in per_struct for u, _ in parts])
    keys, remap = np.unique(all_uniq, return_inverse=True)
    out, pos = [], 0
    for col, parts in zip(colorings, per_struct):
        new = np.empty(n ** k, dtype=np.int64)
        start = 0
        for uniq, inv in parts:
            ids = remap[pos:pos + uniq.size]
            pos += uniq.size
            new[start:start + inv.size] = ids[inv]
            start += inv.size
        new = new.reshape((n,) * k)
        out.append(Coloring(k, col.round + 1, new, col.history + [_fingerprint(new)],
                            col.histograms + [_histogram(new)]))
    return out


def refine_round(S: Structure, C: Coloring, mode: str = "counting",
                 threads: int | None = None) -> Coloring:
    return refine_joint([C], mode, threads)[0]


def same_partition(a: Coloring, b: Coloring) -> bool:
    return a.history[-1] == b.history[-1] and a.num_classes == b.num_classes


# --------------------------------------------------------------------------
# comparison


def _compare(hg: dict[int, int], hh: dict[int, int], criterion: str) -> int | None:
    ids = sorted(set(hg) | set(hh))
    for c in ids:
        if criterion == "multiset":
            if hg.get(c, 0) != hh.get(c, 0):
                return c
        elif (c in hg) != (c in hh):
            return c
    return None


def run(SG: Structure, SH: Structure, k: int, mode: str = "countfree",
        rounds: int | str = "stable", criterion: str = "multiset",
        threads: int | None = None, budget: int = TUPLE_BUDGET,
        stop_early: bool = True) -> tuple[Coloring, Coloring, Verdict]:
    """Refine both structures together and report the earliest round at which
    the chosen criterion separates them."""
    if criterion not in ("set", "multiset"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if SG.kind != SH.kind:
        raise ValueError("cannot compare structures of different kinds")
    if SG.n != SH.n:
        empty = lambda S: Coloring(k, 0, np.zeros((0,) * k, dtype=np.int64))
        return empty(SG), empty(SH), Verdict(True, criterion, 0, None, "domain sizes differ")
    limit = None if rounds == "stable" else int(rounds)
    CG, CH = initial_colorings([SG, SH], k, threads, budget)
    stable = False
    while True:
        witness = _compare(CG.histograms[-1], CH.histograms[-1], criterion)
        if witness is not None:
            verdict = Verdict(True, criterion, CG.round, witness)
            if stop_early:
                return CG, CH, verdict
        if limit is not None and CG.round >= limit:
            break
        NG, NH = refine_joint([CG, CH], mode, threads)
        # cross-structure identifications can split too, so count jointly
        stable = _joint_classes(NG, NH) == _joint_classes(CG, CH)
        CG, CH = NG, NH
        if stable:
            break
    first = _first_difference(CG, CH, criterion)
    if first is not None:
        r, w = first
        return CG, CH, Verdict(True, criterion, r, w)
    label: int | str = "stable-equal" if stable else CG.round
    return CG, CH, Verdict(False, criterion, label)


def _joint_classes(CG: Coloring, CH: Coloring) -> int:
    return int(np.union1d(np.unique(CG.color_of), np.unique(CH.color_of)).size)


def _first_difference(CG: Coloring, CH: Coloring, criterion: str):
    for r, (hg, hh) in enumerate(zip(CG.histograms, CH.histograms)):
        w = _compare(hg, hh, criterion)
        if w is not None:
            return r, w
    return None


def run_single(S: Structure, k: int, mode: str = "countfree", rounds: int | str = "stable",
               threads: int | None = None, budget: int = TUPLE_BUDGET) -> Coloring:
    limit = None if rounds == "stable" else int(rounds)
    C = initial_coloring(S, k, threads, budget)
    while limit is None or C.round < limit:
        N = refine_round(S, C, mode, threads)
        if N.num_classes == C.num_classes:
            return N
        C = N
    return C


# --------------------------------------------------------------------------
# canonization


@dataclass(frozen=True)
class Certificate:
    order: int
    table: bytes = field(repr=False)
    digest: str = ""

    def fingerprints(self) -> list[str]:
        n = self.order
        rows = np.frombuffer(self.table, dtype=np.int64).reshape(n, n)
        return [hashlib.sha256(r.tobytes()).hexdigest()[:12] for r in rows]


def _relabeled_table(G: Group, labels: np.ndarray) -> np.ndarray:
    t = np.asarray(G.table, dtype=np.int64)
    new = np.empty_like(t)
    new[np.ix_(labels, labels)] = labels[t]
    return new


def _candidate_groups(base: Coloring, d: int) -> list[np.ndarray]:
    """Candidate d-tuples with distinct entries, grouped by an isomorphism
    invariant class and ordered by (class size, class id)."""
    n = base.color_of.shape[0]
    if d <= base.k:
        # the color of (g_1..g_d, g_d, ..., g_d) in the stable coloring
        idx = np.array(np.unravel_index(np.arange(n ** d), (n,) * d))
        full = tuple(idx[min(i, d - 1)] for i in range(base.k))
        colors = base.color_of[full]
        distinct = np.ones(idx.shape[1], dtype=bool)
        for i in range(d):
            for j in range(i + 1, d):
                distinct &= idx[i] != idx[j]
        colors = np.where(distinct, colors, -1)
        ids, counts = np.unique(colors[distinct], return_counts=True)
        order = sorted(zip(counts.tolist(), ids.tolist()))
        return [idx[:, colors == c].T for _, c in order]
    elem = base.element_colors()
    ids, counts = np.unique(elem, return_counts=True)
    size = dict(zip(ids.tolist(), counts.tolist()))
    combos = np.array(np.meshgrid(*([ids] * d), indexing="ij")).reshape(d, -1).T.tolist()
    combos.sort(key=lambda c: (int(np.prod([size[x] for x in c])), c))
    groups = []
    for combo in combos:
        pools = [np.flatnonzero(elem == c) for c in combo]
        tuples = np.array(np.meshgrid(*pools, indexing="ij")).reshape(d, -1).T
        keep = np.array([len(set(t)) == d for t in tuples.tolist()], dtype=bool)
        if keep.any():
            groups.append(tuples[keep])
    return groups


def _discretize(S: Structure, k: int, mode: str, rounds: int | str,
                threads: int | None) -> np.ndarray | None:
    """Refine until the element coloring is discrete; None if it never is."""
    limit = None if rounds == "stable" else int(rounds)
    n = S.n
    C = initial_coloring(S, k, threads)
    while True:
        diag = C.element_colors()
        if np.unique(diag).size == n:
            return diag
        if limit is not None and C.round >= limit:
            return None
        N = refine_round(S, C, mode, threads)
        if N.num_classes == C.num_classes:
            return None
        C = N


def canonize(G: Group, d: int = 2, mode: str = "countfree", rounds: int | str = "stable",
             threads: int | None = None, max_candidates: int = 20000) -> Certificate:
    """Individualize-and-refine certificate.

    Stable 2-WL (Version I) colors the d-tuples of distinct elements; the
    classes are visited by (size, id), ids being label independent.  In the
    first class holding a generating tuple whose individualization makes the
    element coloring discrete, every such tuple is tried, elements are
    relabeled by their final colors, and the smallest relabeled table wins.
    """
    from .group_core import _closure_mask

    S = group_structure(G, 1)
    base = run_single(S, 2, mode, rounds, threads)
    tried = 0
    for tuples in _candidate_groups(base, d):
        best: np.ndarray | None = None
        for tup in tuples.tolist():
            if not _closure_mask(G, tup).all():
                continue
            tried += 1
            if tried > max_candidates:
                raise BudgetExceeded(f"more than {max_candidates} candidate tuples")
            diag = _discretize(individualize(S, tup), 2, mode, rounds, threads)
            if diag is None:
                continue
            labels = np.argsort(np.argsort(diag, kind="stable"), kind="stable")
            table = _relabeled_table(G, labels)
            if best is None or _lex_less(table, best):
                best = table
        if best is not None:
            raw = best.astype(np.int64).tobytes()
            return Certificate(G.order, raw, hashlib.sha256(raw).hexdigest())
    raise NotGenerated(f"no generating {d}-tuple makes the coloring discrete")


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a.ravel() != b.ravel())
    return bool(diff.size) and a.ravel()[diff[0]] < b.ravel()[diff[0]]
