"""Finite groups given by Cayley tables.

Elements are the indices ``0..n-1``; the identity is located during validation
and is not assumed to be ``0``.  Tables are numpy arrays (or read-only memmaps
for the handful of groups too large to hold in RAM) and are never mutated after
validation, so every query here is safe to call from several threads.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import (
    FormatError,
    NoIdentity,
    NotASubgroup,
    NotAssociative,
    NotLatinSquare,
    TooLarge,
    GroupWLError,
)

SOCLE_CAP = 5000
_CHUNK = 1 << 22  # table entries handled per vectorized step


def index_dtype(n: int) -> np.dtype:
    for dt in (np.uint8, np.uint16, np.uint32):
        if n <= np.iinfo(dt).max + 1:
            return np.dtype(dt)
    return np.dtype(np.int64)


class Group:
    """A validated finite group.  Build through :func:`validate_cayley`."""

    def __init__(self, table, identity: int, inverse: np.ndarray, elt_order: np.ndarray,
                 name: str | None = None):
        self.table = table
        self.order = int(table.shape[0])
        self.identity = int(identity)
        self.inverse = inverse
        self.elt_order = elt_order
        self.name = name
        self._abelian: bool | None = None
        self._gens: list[int] | None = None

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Group{label} order={self.order} identity={self.identity}>"

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def power(self, a: int, m: int) -> int:
        m %= int(self.elt_order[a])
        result, base = self.identity, a
        while m:
            if m & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            m >>= 1
        return result

    def elements(self) -> range:
        return range(self.order)

    @property
    def is_abelian(self) -> bool:
        if self._abelian is None:
            self._abelian = all(
                np.array_equal(self.table[g, :], self.table[:, g]) for g in self.generators()
            )
        return self._abelian

    def generators(self) -> list[int]:
        """A small generating set, chosen greedily by descending element order."""
        if self._gens is None:
            order = np.argsort(-self.elt_order.astype(np.int64), kind="stable")
            gens: list[int] = []
            mask = np.zeros(self.order, dtype=bool)
            mask[self.identity] = True
            for g in order:
                if mask[g]:
                    continue
                gens.append(int(g))
                mask = _closure_mask(self, gens, start=mask)
                if mask.all():
                    break
            self._gens = gens
        return list(self._gens)

    @property
    def exponent(self) -> int:
        return int(np.lcm.reduce(self.elt_order.astype(np.int64)))

    def order_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.elt_order, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


# --------------------------------------------------------------------------
# validation


def _as_table(table) -> np.ndarray:
    if isinstance(table, np.memmap):
        return table
    arr = np.asarray(table)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise FormatError(f"Cayley table must be a non-empty square array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise FormatError("Cayley table entries must be integers")
    n = arr.shape[0]
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise FormatError(f"Cayley table entries must lie in [0, {n})")
    out = np.ascontiguousarray(arr, dtype=index_dtype(n))
    out.setflags(write=False)
    return out


@numba.njit(cache=True)
def _latin_kernel(t, columns):
    n = t.shape[0]
    stamp = np.full(n, -1, np.int64)
    for r in range(n):
        for c in range(n):
            v = t[r, c]
            if stamp[v] == r:
                return 0, r
            stamp[v] = r
    if columns:
        width = 64
        seen = np.zeros((n, width), np.bool_)
        for c0 in range(0, n, width):
            c1 = min(n, c0 + width)
            seen[:] = False
            for r in range(n):
                for c in range(c0, c1):
                    v = t[r, c]
                    if seen[v, c - c0]:
                        return 1, c
                    seen[v, c - c0] = True
    return -1, -1


def _check_latin(t, n: int, columns: bool = True) -> None:
    kind, where = _latin_kernel(t, columns)
    if kind == 0:
        raise NotLatinSquare(f"row {where} repeats an entry", ("row", int(where)))
    if kind == 1:
        raise NotLatinSquare(f"column {where} repeats an entry", ("column", int(where)))


def _find_identity(t, n: int) -> int:
    idx = np.arange(n)
    diag = np.asarray(t[idx, idx], dtype=np.int64)
    for e in np.flatnonzero(diag == idx):
        if np.array_equal(np.asarray(t[e, :]), idx) and np.array_equal(np.asarray(t[:, e]), idx):
            return int(e)
    raise NoIdentity("no two-sided identity element")


def _right_closure(t, n: int, gens: list[int]) -> np.ndarray:
    """Everything reachable from ``gens`` by right multiplication with ``gens``."""
    seen = np.zeros(n, dtype=bool)
    g = np.asarray(gens, dtype=np.int64)
    seen[g] = True
    frontier = np.unique(g)
    while frontier.size:
        prods = np.asarray(t[frontier[:, None], g[None, :]], dtype=np.int64).ravel()
        prods = np.unique(prods)
        frontier = prods[~seen[prods]]
        seen[frontier] = True
    return seen


def _check_associative(t, n: int) -> None:
    # If (xy)g = x(yg) holds for all x, y and every g in a set W that reaches
    # the whole table under right multiplication, the table is associative:
    # the right nucleus is closed under products.  W is grown greedily from a
    # few evenly spaced candidates so that it stays small.
    gens: list[int] = []
    reach = np.zeros(n, dtype=bool)
    while not reach.all():
        open_ = np.flatnonzero(~reach)
        picks = open_[np.linspace(0, open_.size - 1, min(8, open_.size)).astype(np.int64)]
        best, best_reach = -1, None
        for c in picks[::-1]:
            r = _right_closure(t, n, gens + [int(c)])
            if best_reach is None or r.sum() > best_reach.sum():
                best, best_reach = int(c), r
        gens.append(best)
        reach = best_reach
    x, y, g = _assoc_kernel(t, np.asarray(gens, dtype=np.int64))
    if x >= 0:
        raise NotAssociative((int(x), int(y), int(g)))


@numba.njit(cache=True)
def _assoc_kernel(t, gens):
    n = t.shape[0]
    d = gens.shape[0]
    cols = np.empty((n, d), np.int64)
    for y in range(n):
        for k in range(d):
            cols[y, k] = t[y, gens[k]]
    for x in range(n):
        for y in range(n):
            xy = t[x, y]
            for k in range(d):
                if cols[xy, k] != t[x, cols[y, k]]:
                    return x, y, gens[k]
    return -1, -1, -1


def _inverses(t, n: int, e: int) -> np.ndarray:
    inv = np.empty(n, dtype=np.int64)
    rows = max(1, _CHUNK // n)
    for r0 in range(0, n, rows):
        block = np.asarray(t[r0:r0 + rows])
        inv[r0:r0 + block.shape[0]] = np.argmax(block == e, axis=1)
    return inv


def _orders(t, n: int, e: int) -> np.ndarray:
    idx = np.arange(n, dtype=np.int64)
    orders = np.zeros(n, dtype=np.int64)
    cur = idx.copy()
    m = 1
    live = idx
    while live.size:
        done = cur == e
        orders[live[done]] = m
        live, cur = live[~done], cur[~done]
        if live.size:
            cur = np.asarray(t[cur, live], dtype=np.int64)
        m += 1
    return orders


def validate_cayley(table, name: str | None = None) -> Group:
    """Check the group axioms on ``table`` and return the validated group.

    Raises NotLatinSquare, NoIdentity or NotAssociative (with a witness triple).
    """
    t = _as_table(table)
    n = t.shape[0]
    # Column scans of a disk-backed table are strided and slow.  They are
    # also redundant there: rows that are permutations, a two-sided identity
    # and associativity already force a group, whose columns are permutations.
    _check_latin(t, n, columns=not isinstance(t, np.memmap))
    e = _find_identity(t, n)
    _check_associative(t, n)
    inverse = _inverses(t, n, e)
    orders = _orders(t, n, e)
    inverse.setflags(write=False)
    orders.setflags(write=False)
    return Group(t, e, inverse, orders, name=name)


def is_associative_bruteforce(table) -> bool:
    t = np.asarray(table, dtype=np.int64)
    # [a, b, c] -> (ab)c on the left, a(bc) on the right
    return bool(np.array_equal(t[t, :], t[:, t]))


# --------------------------------------------------------------------------
# element-level queries


def element_order(G: Group, g: int) -> int:
    return int(G.elt_order[g])


def _closure_mask(G: Group, gens: Sequence[int], start: np.ndarray | None = None) -> np.ndarray:
    """Boolean mask of the subgroup generated by ``gens`` (and ``start``, if it is one)."""
    n = G.order
    seen = np.zeros(n, dtype=bool) if start is None else start.copy()
    seen[G.identity] = True
    g = np.asarray(list(gens), dtype=np.int64)
    if g.size == 0:
        return seen
    frontier = np.flatnonzero(seen)
    t = G.table
    while frontier.size:
        prods = np.unique(np.asarray(t[frontier[:, None], g[None, :]], dtype=np.int64).ravel())
        frontier = prods[~seen[prods]]
        seen[frontier] = True
    return seen


def subgroup_generated(G: Group, elements: Iterable[int]) -> np.ndarray:
    """Sorted element array of the subgroup generated by ``elements``.

    Generators are added one at a time and skipped when already contained, so
    large generating sets (conjugacy classes, commutator sets) stay cheap.
    """
    mask = np.zeros(G.order, dtype=bool)
    mask[G.identity] = True
    gens: list[int] = []
    for s in np.unique(np.fromiter(elements, dtype=np.int64)):
        if mask[s]:
            continue
        gens.append(int(s))
        mask = _closure_mask(G, gens, start=mask)
    return np.flatnonzero(mask)


@dataclass
class Closure:
    """A generated subgroup together with a shortest discovered word per element."""

    gens: tuple[int, ...]
    elements: np.ndarray
    parent: dict[int, tuple[int, int]] = field(repr=False)

    def __contains__(self, x: int) -> bool:
        return int(x) in self.parent

    def __len__(self) -> int:
        return len(self.elements)

    def word(self, x: int) -> list[int]:
        """Positions into ``gens`` whose left-to-right product equals ``x``."""
        word: list[int] = []
        x = int(x)
        while True:
            prev, i = self.parent[x]
            if i < 0:
                break
            word.append(i)
            x = prev
        return word[::-1]


def generated_subgroup(G: Group, gens: Sequence[int]) -> Closure:
    gens = tuple(int(g) for g in gens)
    e = G.identity
    parent: dict[int, tuple[int, int]] = {e: (e, -1)}
    layer = [e]
    while layer:
        nxt = []
        for x in layer:
            for i, g in enumerate(gens):
                y = G.mul(x, g)
                if y not in parent:
                    parent[y] = (x, i)
                    nxt.append(y)
        layer = nxt
    return Closure(gens, np.array(sorted(parent), dtype=np.int64), parent)


def centralizer(G: Group, g: int) -> np.ndarray:
    return np.flatnonzero(np.asarray(G.table[g, :]) == np.asarray(G.table[:, g]))


def center(G: Group) -> np.ndarray:
    mask = np.ones(G.order, dtype=bool)
    for g in G.generators():
        mask &= np.asarray(G.table[g, :]) == np.asarray(G.table[:, g])
    return np.flatnonzero(mask)


def is_subgroup(G: Group, S: Iterable[int]) -> bool:
    s = np.unique(np.fromiter(S, dtype=np.int64))
    if s.size == 0 or G.identity not in s:
        return False
    mask = np.zeros(G.order, dtype=bool)
    mask[s] = True
    rows = max(1, _CHUNK // max(1, s.size))
    for r0 in range(0, s.size, rows):
        prods = np.asarray(G.table[s[r0:r0 + rows, None], s[None, :]])
        if not mask[prods].all():
            return False
    return True


def commutator_subgroup(G: Group, S: Iterable[int] | None = None) -> np.ndarray:
    s = np.arange(G.order) if S is None else np.unique(np.fromiter(S, dtype=np.int64))
    if S is not None and not is_subgroup(G, s):
        raise NotASubgroup("commutator_subgroup needs a subgroup")
    t, inv = G.table, G.inverse.astype(np.int64)
    comms: set[int] = set()
    rows = max(1, _CHUNK // max(1, s.size))
    for r0 in range(0, s.size, rows):
        a = s[r0:r0 + rows, None]
        b = s[None, :]
        ab = np.asarray(t[a, b], dtype=np.int64)
        ainv_binv = np.asarray(t[inv[a], inv[b]], dtype=np.int64)
        comms.update(np.unique(np.asarray(t[ainv_binv, ab])).tolist())
    return subgroup_generated(G, comms)


@dataclass
class DerivedSeries:
    subgroups: list[np.ndarray]
    solvability_class: int | None  # None when the series stalls above {e}

    @property
    def solvable(self) -> bool:
        return self.solvability_class is not None


def derived_series(G: Group) -> DerivedSeries:
    series = [np.arange(G.order)]
    while True:
        nxt = commutator_subgroup(G, series[-1])
        if nxt.size == series[-1].size:
            return DerivedSeries(series, None)
        series.append(nxt)
        if nxt.size == 1:
            return DerivedSeries(series, len(series) - 1)


def conjugacy_class(G: Group, g: int) -> np.ndarray:
    x = np.arange(G.order)
    return np.unique(np.asarray(G.table[np.asarray(G.table[x, g], dtype=np.int64), G.inverse]))


def conjugacy_classes(G: Group, within: np.ndarray | None = None) -> list[np.ndarray]:
    """Conjugacy classes of G (or of the orbits of ``within`` acting by conjugation)."""
    conj = np.arange(G.order) if within is None else np.asarray(within, dtype=np.int64)
    members = np.arange(G.order) if within is None else conj
    seen = np.zeros(G.order, dtype=bool)
    inv = G.inverse.astype(np.int64)
    classes = []
    for g in members:
        if seen[g]:
            continue
        cls = np.unique(np.asarray(G.table[np.asarray(G.table[conj, g], dtype=np.int64), inv[conj]]))
        seen[cls] = True
        classes.append(cls)
    return classes


def normal_closure(G: Group, S: Iterable[int], within: np.ndarray | None = None) -> np.ndarray:
    """Smallest subgroup containing S and closed under conjugation by G (or ``within``)."""
    conj = np.arange(G.order) if within is None else np.asarray(within, dtype=np.int64)
    inv = G.inverse.astype(np.int64)
    pending = set(int(s) for s in S)
    if not pending:
        raise GroupWLError("normal_closure needs a non-empty set")
    images: set[int] = set()
    for s in pending:
        images.update(np.unique(np.asarray(G.table[np.asarray(G.table[conj, s], dtype=np.int64), inv[conj]])).tolist())
    return subgroup_generated(G, images)


def is_normal(G: Group, S: Iterable[int]) -> bool:
    s = np.unique(np.fromiter(S, dtype=np.int64))
    mask = np.zeros(G.order, dtype=bool)
    mask[s] = True
    inv = G.inverse.astype(np.int64)
    for g in G.generators():
        conj = np.asarray(G.table[np.asarray(G.table[g, s], dtype=np.int64), inv[g]])
        if not mask[conj].all():
            return False
    return True


def _minimal_normal(G: Group, within: np.ndarray | None = None) -> list[np.ndarray]:
    """Minimal normal subgroups, as minimal elements among normal closures of single elements."""
    members = np.arange(G.order) if within is None else np.asarray(within, dtype=np.int64)
    classes = conjugacy_classes(G, within=within) if within is not None else conjugacy_classes(G)
    seen: dict[bytes, np.ndarray] = {}
    for cls in classes:
        g = int(cls[0])
        if g == G.identity:
            continue
        ncl = normal_closure(G, [g], within=members if within is not None else None)
        seen.setdefault(ncl.tobytes(), ncl)
    closures = sorted(seen.values(), key=len)
    minimal: list[np.ndarray] = []
    for i, N in enumerate(closures):
        if not any(len(M) < len(N) and np.isin(M, N).all() for M in closures[:i]):
            minimal.append(N)
    return minimal


def minimal_normal_subgroups(G: Group, cap: int = SOCLE_CAP) -> list[np.ndarray]:
    if G.order > cap:
        raise TooLarge(f"order {G.order} exceeds socle cap {cap}")
    return _minimal_normal(G)


def socle(G: Group, cap: int = SOCLE_CAP) -> np.ndarray:
    mins = minimal_normal_subgroups(G, cap)
    if not mins:
        return np.array([G.identity])
    return subgroup_generated(G, np.concatenate(mins))


def socle_factors(G: Group, cap: int = SOCLE_CAP) -> list[np.ndarray]:
    """Simple direct factors of Soc(G) for semisimple G.

    Raises GroupWLError when some minimal normal subgroup is Abelian, since
    then the factors are not determined.
    """
    mins = minimal_normal_subgroups(G, cap)
    for N in mins:
        a = int(N[N != G.identity][0])
        if len(centralizer_in(G, a, N)) == len(N):
            raise GroupWLError("group has an Abelian minimal normal subgroup; not semisimple")
    soc = subgroup_generated(G, np.concatenate(mins)) if mins else np.array([G.identity])
    factors = _minimal_normal(G, within=soc)
    return sorted(factors, key=lambda f: (len(f), f.tolist()))


def centralizer_in(G: Group, g: int, S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=np.int64)
    return S[np.asarray(G.table[g, S]) == np.asarray(G.table[S, g])]


# --------------------------------------------------------------------------
# marked equivalence


def pattern_equivalent(G, u: Sequence, H, v: Sequence) -> bool:
    """Version I: same equality pattern and same ``u_i u_j = u_l`` relations."""
    k = len(u)
    if k != len(v):
        return False
    for i in range(k):
        for j in range(k):
            if (u[i] == u[j]) != (v[i] == v[j]):
                return False
            uij, vij = G.mul(u[i], u[j]), H.mul(v[i], v[j])
            for l in range(k):
                if (uij == u[l]) != (vij == v[l]):
                    return False
    return True


def pattern_key(G, u: Sequence) -> tuple:
    """Canonical Version I key: equal keys iff ``pattern_equivalent``."""
    k = len(u)
    eq = tuple(u[i] == u[j] for i in range(k) for j in range(k))
    rel = []
    for i in range(k):
        for j in range(k):
            x = G.mul(u[i], u[j])
            rel.extend(x == u[l] for l in range(k))
    return (eq, tuple(rel))


def marked_map(G, u: Sequence, H, v: Sequence) -> dict | None:
    """Joint breadth-first closure of ``u`` and ``v``.

    Returns the isomorphism <u> -> <v> extending ``u_i -> v_i`` as a dict, or
    None at the first inconsistency.  Works for anything with ``mul`` and
    ``identity``.
    """
    if len(u) != len(v):
        return None
    fwd = {G.identity: H.identity}
    back = {H.identity: G.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        y = fwd[x]
        for a, b in zip(u, v):
            xa, yb = G.mul(x, a), H.mul(y, b)
            seen = fwd.get(xa)
            if seen is None:
                if yb in back:
                    return None
                fwd[xa] = yb
                back[yb] = xa
                queue.append(xa)
            elif seen != yb:
                return None
    return fwd


def marked_equivalent(G, u: Sequence, H, v: Sequence, version: int = 2) -> bool:
    if len(u) != len(v):
        return False
    if version == 1:
        return pattern_equivalent(G, u, H, v)
    if version == 2:
        return marked_map(G, u, H, v) is not None
    raise ValueError(f"unknown version {version!r}")


def marked_type_key(G, u: Sequence) -> tuple:
    """Canonical key of the marked subgroup <u>: equal keys iff marked equivalent.

    Elements of <u> are labelled in breadth-first order from the identity,
    multiplying on the right by ``u_1, ..., u_k`` in turn; the key is the
    labelled right-multiplication table.
    """
    labels = {G.identity: 0}
    order = [G.identity]
    rows: list[int] = []
    i = 0
    while i < len(order):
        x = order[i]
        for a in u:
            y = G.mul(x, a)
            lab = labels.get(y)
            if lab is None:
                lab = labels[y] = len(order)
                order.append(y)
            rows.append(lab)
        i += 1
    return (len(order), tuple(rows))


# --------------------------------------------------------------------------
# relabelling and files


def permuted_copy(G: Group, perm: Sequence[int], name: str | None = None) -> Group:
    """The same abstract group with element ``a`` renamed ``perm[a]``."""
    p = np.asarray(perm, dtype=np.int64)
    n = G.order
    if sorted(p.tolist()) != list(range(n)):
        raise ValueError("perm must be a permutation of range(n)")
    t = np.asarray(G.table, dtype=np.int64)
    new = np.empty((n, n), dtype=np.int64)
    new[np.ix_(p, p)] = p[t]
    return validate_cayley(new, name=name or (f"{G.name}~" if G.name else None))


def format_cayley(G: Group) -> str:
    n = G.order
    lines = [f"cayley v1 n={n}"]
    t = np.asarray(G.table)
    lines.extend(" ".join(map(str, row)) for row in t.tolist())
    return "\n".join(lines) + "\n"


def parse_cayley(text: str, name: str | None = None) -> Group:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty Cayley file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "cayley" or head[1] != "v1" or not head[2].startswith("n="):
        raise FormatError(f"bad header {lines[0]!r}")
    try:
        n = int(head[2][2:])
    except ValueError as exc:
        raise FormatError(f"bad order in header {lines[0]!r}") from exc
    if n < 1:
        raise FormatError("order must be positive")
    body = lines[1:]
    if len(body) != n:
        raise FormatError(f"expected {n} rows, found {len(body)}")
    rows = []
    for r, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != n:
            raise FormatError(f"row {r} has {len(parts)} entries, expected {n}")
        try:
            rows.append([int(x, 10) for x in parts])
        except ValueError as exc:
            raise FormatError(f"row {r} has a non-integer entry") from exc
    return validate_cayley(np.array(rows, dtype=np.int64), name=name)


def read_cayley(path: str | Path) -> Group:
    path = Path(path)
    return parse_cayley(path.read_text(), name=path.stem)


def write_cayley(G: Group, path: str | Path) -> None:
    Path(path).write_text(format_cayley(G))


def solvability_bound(n: int) -> int:
    """ceil(log2 log2 n) + 1, the derived-length yardstick used for nilpotent groups."""
    if n <= 2:
        return 1
    return math.ceil(math.log2(max(1.0, math.log2(n)))) + 1
