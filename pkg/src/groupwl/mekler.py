"""Class-2 exponent-p groups built from graphs.

Generators ``x_0..x_{n-1}`` correspond to vertices; ``x_i`` and ``x_j`` commute
exactly when ``ij`` is an edge.  Every element has a unique normal form

    x_0^{a_0} ... x_{n-1}^{a_{n-1}} * prod_{(j,i) non-edge, j<i} [x_j, x_i]^{alpha_(j,i)}

with ``[u, v] = u^-1 v^-1 u v``.  Collecting a product into normal form moves
``x_j^{b_j}`` left past ``x_i^{a_i}`` for ``i > j``, which costs the central
factor ``[x_j, x_i]^{-a_i b_j}``.

Elements are indexed by reading the generator exponents and then the
commutator exponents as base-p digits, most significant first.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import BadPrime, CapExceeded
from .graphs import Graph, complement, components
from .group_core import Group, validate_cayley

MEKLER_CAP = 3 ** 10
IN_MEMORY_ORDER = 20000


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class MeklerElement:
    gen: tuple[int, ...]
    comm: tuple[int, ...]


class MeklerGroup:
    def __init__(self, graph: Graph, p: int):
        if not is_prime(p) or p < 3:
            raise BadPrime(f"p must be an odd prime, got {p}")
        self.graph = graph
        self.p = p
        self.n = graph.num_vertices
        self.non_edges = [(j, i) for j in range(self.n) for i in range(j + 1, self.n)
                          if not graph.has_edge(j, i)]
        self.comm_index = {e: k for k, e in enumerate(self.non_edges)}
        self.rank = self.n + len(self.non_edges)

    def __repr__(self) -> str:
        return f"<MeklerGroup n={self.n} p={self.p} order={self.p}^{self.rank}>"

    @property
    def order(self) -> int:
        return self.p ** self.rank

    @property
    def identity_element(self) -> MeklerElement:
        return MeklerElement((0,) * self.n, (0,) * len(self.non_edges))

    def generator(self, v: int, power: int = 1) -> MeklerElement:
        gen = [0] * self.n
        gen[v] = power % self.p
        return MeklerElement(tuple(gen), (0,) * len(self.non_edges))

    def commutator_basis(self, j: int, i: int) -> MeklerElement:
        comm = [0] * len(self.non_edges)
        comm[self.comm_index[(j, i)]] = 1
        return MeklerElement((0,) * self.n, tuple(comm))

    def element(self, gen: Sequence[int], comm: Sequence[int] | None = None) -> MeklerElement:
        comm = [0] * len(self.non_edges) if comm is None else comm
        if len(gen) != self.n or len(comm) != len(self.non_edges):
            raise ValueError("exponent vectors have the wrong length")
        return MeklerElement(tuple(int(a) % self.p for a in gen), tuple(int(c) % self.p for c in comm))

    # arithmetic --------------------------------------------------------

    def delta(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        return [(-a[i] * b[j]) % self.p for j, i in self.non_edges]

    def multiply(self, x: MeklerElement, y: MeklerElement) -> MeklerElement:
        p = self.p
        d = self.delta(x.gen, y.gen)
        return MeklerElement(
            tuple((s + t) % p for s, t in zip(x.gen, y.gen)),
            tuple((s + t + u) % p for s, t, u in zip(x.comm, y.comm, d)),
        )

    def inverse(self, x: MeklerElement) -> MeklerElement:
        p = self.p
        return MeklerElement(
            tuple((-a) % p for a in x.gen),
            tuple((-c - x.gen[i] * x.gen[j]) % p for c, (j, i) in zip(x.comm, self.non_edges)),
        )

    def power(self, x: MeklerElement, m: int) -> MeklerElement:
        out = self.identity_element
        for _ in range(m % self.p if self.p > 2 else m):
            out = self.multiply(out, x)
        return out

    def commute(self, x: MeklerElement, y: MeklerElement) -> bool:
        return self.multiply(x, y) == self.multiply(y, x)

    # indexing ----------------------------------------------------------

    def index(self, x: MeklerElement) -> int:
        out = 0
        for digit in x.gen + x.comm:
            out = out * self.p + digit
        return out

    def from_index(self, idx: int) -> MeklerElement:
        digits = []
        for _ in range(self.rank):
            digits.append(idx % self.p)
            idx //= self.p
        digits.reverse()
        return MeklerElement(tuple(digits[:self.n]), tuple(digits[self.n:]))

    def gen_index(self, x: MeklerElement) -> int:
        out = 0
        for digit in x.gen:
            out = out * self.p + digit
        return out

    # group-like protocol on indices, for closure and marked-equivalence code
    @property
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return self.index(self.multiply(self.from_index(a), self.from_index(b)))


def mekler_group(graph: Graph, p: int) -> MeklerGroup:
    return MeklerGroup(graph, p)


def support(M: MeklerGroup, x: MeklerElement) -> frozenset[int]:
    return frozenset(i for i, a in enumerate(x.gen) if a)


def sub_word(M: MeklerGroup, x: MeklerElement, S: Iterable[int]) -> MeklerElement:
    S = set(S)
    return M.element([a if i in S else 0 for i, a in enumerate(x.gen)])


def centralizer_formula(M: MeklerGroup, x: MeklerElement) -> list[MeklerElement]:
    """Generators of C(x): one sub-word per component of the complement of the
    support-induced subgraph, every vertex adjacent to the whole support, and
    the commutator basis."""
    supp = sorted(support(M, x))
    gens: list[MeklerElement] = []
    if supp:
        induced = M.graph.induced(supp)
        for comp in components(complement(induced)):
            gens.append(sub_word(M, x, [supp[c] for c in comp]))
    for v in range(M.n):
        if v not in supp and all(M.graph.has_edge(v, s) for s in supp):
            gens.append(M.generator(v))
    gens.extend(M.commutator_basis(j, i) for j, i in M.non_edges)
    return gens


def center_of(M: MeklerGroup) -> list[MeklerElement]:
    """Generators of Z(G): the commutator basis and every dominating vertex."""
    gens = [M.generator(v) for v in range(M.n)
            if all(M.graph.has_edge(v, w) for w in range(M.n) if w != v)]
    gens.extend(M.commutator_basis(j, i) for j, i in M.non_edges)
    return gens


def _rank_mod_p(rows: np.ndarray, p: int) -> int:
    A = np.array(rows, dtype=np.int64) % p
    if A.size == 0:
        return 0
    r = 0
    for c in range(A.shape[1]):
        piv = next((i for i in range(r, A.shape[0]) if A[i, c]), None)
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        for i in range(A.shape[0]):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        r += 1
        if r == A.shape[0]:
            break
    return r


def formula_subgroup_order(M: MeklerGroup, gens: Sequence[MeklerElement]) -> int:
    """Order of a subgroup generated by ``gens`` when it contains G'."""
    rows = [g.gen for g in gens if any(g.gen)]
    return M.p ** (_rank_mod_p(np.array(rows).reshape(-1, M.n), M.p) + len(M.non_edges))


def gen_span_membership(M: MeklerGroup, gens: Sequence[MeklerElement]) -> np.ndarray:
    """Boolean mask over generator-part indices (``p^n`` of them) of the span of
    the generator parts of ``gens``; a subgroup containing G' is exactly the
    preimage of this span."""
    p, n = M.p, M.n
    digits = _all_digit_vectors(p, n)
    rows = np.array([g.gen for g in gens if any(g.gen)], dtype=np.int64).reshape(-1, n)
    base = _rank_mod_p(rows, p)
    mask = np.zeros(p ** n, dtype=bool)
    for idx, vec in enumerate(digits):
        mask[idx] = _rank_mod_p(np.vstack([rows, vec[None, :]]), p) == base
    return mask


def _all_digit_vectors(p: int, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(p ** length, dtype=np.int64)
    w = p ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // w) % p


def to_cayley(M: MeklerGroup, cap: int = MEKLER_CAP, workdir: str | Path | None = None) -> Group:
    """Cayley table in normal-form index order.

    Orders above ``IN_MEMORY_ORDER`` are written to a disk-backed memmap inside
    ``workdir`` (a fresh temporary directory by default).
    """
    n_el = M.order
    if n_el > cap:
        raise CapExceeded(f"Mekler group order {n_el} exceeds cap {cap}")
    p, n, m = M.p, M.n, len(M.non_edges)
    ng, nc = p ** n, p ** m
    gd = _all_digit_vectors(p, n)
    cd = _all_digit_vectors(p, m)
    gw = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    cw = p ** np.arange(m - 1, -1, -1, dtype=np.int64)
    GA = ((gd[:, None, :] + gd[None, :, :]) % p) @ gw                  # (ng, ng)
    CA = ((cd[:, None, :] + cd[None, :, :]) % p) @ cw                  # (nc, nc)
    if m:
        jj = np.array([j for j, _ in M.non_edges])
        ii = np.array([i for _, i in M.non_edges])
        D = ((-gd[:, None, ii] * gd[None, :, jj]) % p) @ cw            # (ng, ng)
    else:
        D = np.zeros((ng, ng), dtype=np.int64)
    dtype = np.uint16 if n_el <= 65536 else np.uint32
    if n_el > IN_MEMORY_ORDER:
        root = Path(workdir) if workdir is not None else Path(tempfile.mkdtemp(prefix="mekler-"))
        fname = root / f"mekler_{n}_{p}_{m}.bin"
        table = np.memmap(fname, dtype=dtype, mode="w+", shape=(n_el, n_el))
    else:
        table = np.empty((n_el, n_el), dtype=dtype)
    _fill_table(table, GA, CA, D, nc)
    if isinstance(table, np.memmap):
        table.flush()
        table = np.memmap(table.filename, dtype=dtype, mode="r", shape=(n_el, n_el))
    return validate_cayley(table, name=f"mekler_n{n}_p{p}_m{m}")


@numba.njit(cache=True)
def _fill_table(table, GA, CA, D, nc):
    ng = GA.shape[0]
    for xg in range(ng):
        for xc in range(nc):
            x = xg * nc + xc
            for yg in range(ng):
                base = GA[xg, yg] * nc
                shift = D[xg, yg]
                for yc in range(nc):
                    table[x, yg * nc + yc] = base + CA[CA[xc, yc], shift]


def commutation_mismatches(G: Group, M: MeklerGroup, tile: int = 4096) -> tuple[int, np.ndarray]:
    """Compare brute-force commutation in the Cayley table with the centralizer formula.

    Returns the number of ordered pairs (x, y) where ``xy == yx`` disagrees with
    ``y in centralizer_formula(x)``, and the brute-force center as a mask.
    """
    p, n, m = M.p, M.n, len(M.non_edges)
    nc = p ** m
    ng = p ** n
    gd = _all_digit_vectors(p, n)
    member = np.zeros((ng, ng), dtype=bool)
    for g in range(ng):
        x = M.element(gd[g].tolist())
        member[g] = gen_span_membership(M, centralizer_formula(M, x))
    N = G.order
    mismatches = 0
    central = np.ones(N, dtype=bool)
    for r0 in range(0, N, tile):
        r1 = min(N, r0 + tile)
        for c0 in range(r0, N, tile):
            c1 = min(N, c0 + tile)
            mismatches += _tile_mismatches(np.asarray(G.table[r0:r1, c0:c1]),
                                           np.asarray(G.table[c0:c1, r0:r1]),
                                           r0, c0, nc, member, central)
    return mismatches, central


@numba.njit(cache=True)
def _tile_mismatches(xy, yx, r0, c0, nc, member, central):
    bad = 0
    for a in range(xy.shape[0]):
        x = r0 + a
        gx = x // nc
        for b in range(xy.shape[1]):
            y = c0 + b
            if y < x:
                continue
            comm = xy[a, b] == yx[b, a]
            gy = y // nc
            if comm != member[gx, gy]:
                bad += 1
            if y != x and comm != member[gy, gx]:
                bad += 1
            if not comm:
                central[x] = False
                central[y] = False
    return bad
