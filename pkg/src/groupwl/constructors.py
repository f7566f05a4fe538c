"""Cayley tables for the group families used in experiments.

Index conventions are fixed so that files are reproducible:

* ``abelian([m1, ..., mr])``: mixed radix with the first factor most
  significant, so it agrees with iterated :func:`direct_product`.
* ``direct_product(G, H)``: ``(g, h) -> |H|*g + h``.
* ``semidirect(H, N, theta)``: ``(h, n) -> |N|*h + n``.
* ``symmetric(m)``: permutations of ``0..m-1`` in lexicographic order,
  composed as ``(s*t)(x) = s(t(x))``; ``alternating(m)`` keeps the even ones
  in the same relative order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadScalarOrder, CapExceeded, InvalidAction
from .group_core import Group, validate_cayley

ENUM_CAP = 4096


def _check_cap(n: int, cap: int | None, what: str) -> None:
    cap = ENUM_CAP if cap is None else cap
    if n > cap:
        raise CapExceeded(f"{what} has order {n}, above the enumeration cap {cap}")


def _digits(n_total: int, orders: Sequence[int]) -> list[np.ndarray]:
    idx = np.arange(n_total, dtype=np.int64)
    out = []
    for m in reversed(orders):
        out.append(idx % m)
        idx //= m
    return out[::-1]


def _weights(orders: Sequence[int]) -> list[int]:
    w, acc = [], 1
    for m in reversed(orders):
        w.append(acc)
        acc *= m
    return w[::-1]


def abelian(cyclic_orders: Sequence[int], cap: int | None = None, name: str | None = None) -> Group:
    orders = [int(m) for m in cyclic_orders]
    if any(m < 1 for m in orders):
        raise ValueError("cyclic orders must be positive")
    orders = [m for m in orders if m > 1] or [1]
    n = math.prod(orders)
    _check_cap(n, cap, "abelian group")
    table = np.zeros((n, n), dtype=np.int64)
    for d, m, w in zip(_digits(n, orders), orders, _weights(orders)):
        table += ((d[:, None] + d[None, :]) % m) * w
    return validate_cayley(table, name=name or "x".join(f"Z{m}" for m in orders))


def cyclic(m: int, cap: int | None = None) -> Group:
    return abelian([m], cap=cap, name=f"Z{m}")


class AbelianGroup:
    """An Abelian group held implicitly as a product of cyclic groups.

    Elements are mixed-radix integers exactly as in :func:`abelian`, so
    ``AbelianGroup(spec).to_group()`` equals ``abelian(spec)``.
    """

    def __init__(self, cyclic_orders: Sequence[int], name: str | None = None):
        self.cyclic_orders = tuple(int(m) for m in cyclic_orders if int(m) > 1)
        self.order = math.prod(self.cyclic_orders)
        self.identity = 0
        self.name = name or "x".join(f"Z{m}" for m in self.cyclic_orders)
        self._w = np.array(_weights(self.cyclic_orders) or [1], dtype=np.int64)
        self._m = np.array(self.cyclic_orders or (1,), dtype=np.int64)

    def __repr__(self) -> str:
        return f"<AbelianGroup {self.name} order={self.order}>"

    def decode(self, x):
        x = np.asarray(x, dtype=np.int64)
        return (x[..., None] // self._w) % self._m

    def encode(self, digits) -> np.ndarray:
        d = np.asarray(digits, dtype=np.int64) % self._m
        return (d * self._w).sum(axis=-1)

    def mul(self, a: int, b: int) -> int:
        return int(self.encode(self.decode(a) + self.decode(b)))

    def inv(self, a: int) -> int:
        return int(self.encode(-self.decode(a)))

    def power(self, a: int, m: int) -> int:
        return int(self.encode(self.decode(a) * m))

    def element_order(self, a) -> np.ndarray | int:
        d = self.decode(a)
        per = self._m // np.gcd(d, self._m)
        out = np.lcm.reduce(per, axis=-1)
        return int(out) if np.ndim(out) == 0 else out

    def to_group(self, cap: int | None = None) -> Group:
        return abelian(self.cyclic_orders, cap=cap, name=self.name)


def direct_product(G: Group, H: Group, cap: int | None = None, name: str | None = None) -> Group:
    n = G.order * H.order
    _check_cap(n, cap, "direct product")
    tg = np.asarray(G.table, dtype=np.int64)
    th = np.asarray(H.table, dtype=np.int64)
    g = np.repeat(np.arange(G.order), H.order)
    h = np.tile(np.arange(H.order), G.order)
    table = tg[g[:, None], g[None, :]] * H.order + th[h[:, None], h[None, :]]
    if name is None and G.name and H.name:
        name = f"{G.name}x{H.name}"
    return validate_cayley(table, name=name)


def _perm_table(perms: np.ndarray) -> np.ndarray:
    m = perms.shape[1]
    codes = perms @ (m ** np.arange(m - 1, -1, -1, dtype=np.int64))
    order = np.argsort(codes)
    sorted_codes = codes[order]
    n = perms.shape[0]
    table = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        comp = perms[a][perms]          # row b: x -> perms[a][perms[b][x]]
        c = comp @ (m ** np.arange(m - 1, -1, -1, dtype=np.int64))
        table[a] = order[np.searchsorted(sorted_codes, c)]
    return table


def _parity(p: Sequence[int]) -> int:
    seen, parity = [False] * len(p), 0
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def symmetric_perms(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.int64).reshape(-1, max(m, 1))


def symmetric(m: int, cap: int | None = None) -> Group:
    _check_cap(math.factorial(m), cap, f"S{m}")
    return validate_cayley(_perm_table(symmetric_perms(m)), name=f"S{m}")


def alternating(m: int, cap: int | None = None) -> Group:
    _check_cap(max(1, math.factorial(m) // 2), cap, f"A{m}")
    perms = symmetric_perms(m)
    even = np.array([_parity(p) == 0 for p in perms.tolist()])
    return validate_cayley(_perm_table(perms[even]), name=f"A{m}")


def alternating_perms(m: int) -> np.ndarray:
    perms = symmetric_perms(m)
    return perms[np.array([_parity(p) == 0 for p in perms.tolist()])]


@dataclass
class ActionTable:
    """theta: H -> Aut(N), stored as ``perms[h][n] = theta_h(n)``."""

    domain: Group
    target: Group
    perms: np.ndarray

    def validate(self) -> None:
        H, N, P = self.domain, self.target, np.asarray(self.perms, dtype=np.int64)
        if P.shape != (H.order, N.order):
            raise InvalidAction(f"action table has shape {P.shape}, expected {(H.order, N.order)}")
        for h in range(H.order):
            if sorted(P[h].tolist()) != list(range(N.order)):
                raise InvalidAction(f"theta({h}) is not a permutation of N")
        if not np.array_equal(P[H.identity], np.arange(N.order)):
            raise InvalidAction("theta(identity) is not the identity map")
        tn = np.asarray(N.table, dtype=np.int64)
        for h in range(H.order):
            img = P[h]
            bad = np.argwhere(tn[img[:, None], img[None, :]] != img[tn])
            if bad.size:
                a, b = bad[0]
                raise InvalidAction(f"theta({h}) is not an automorphism: fails on ({a}, {b})")
        th = np.asarray(H.table, dtype=np.int64)
        for h1 in range(H.order):
            lhs = P[th[h1]]                 # theta(h1 h2) for every h2
            rhs = P[h1][P]                  # theta(h1) o theta(h2)
            bad = np.argwhere(lhs != rhs)
            if bad.size:
                h2 = int(bad[0][0])
                raise InvalidAction(f"theta is not a homomorphism: fails on ({h1}, {h2})")


def semidirect(H: Group, N: Group, theta: ActionTable, cap: int | None = None,
               name: str | None = None, require_coprime: bool = False) -> Group:
    """Pairs (h, n) with (h1, n1)(h2, n2) = (h1 h2, theta_{h2^-1}(n1) n2)."""
    if theta.domain is not H or theta.target is not N:
        raise InvalidAction("action table belongs to different groups")
    if require_coprime and math.gcd(H.order, N.order) != 1:
        raise InvalidAction(f"|H|={H.order} and |N|={N.order} are not coprime")
    n = H.order * N.order
    _check_cap(n, cap, "semidirect product")
    theta.validate()
    P = np.asarray(theta.perms, dtype=np.int64)
    th = np.asarray(H.table, dtype=np.int64)
    tn = np.asarray(N.table, dtype=np.int64)
    hinv = np.asarray(H.inverse, dtype=np.int64)
    h = np.repeat(np.arange(H.order), N.order)
    k = np.tile(np.arange(N.order), H.order)
    hh = th[h[:, None], h[None, :]]
    moved = P[hinv[h][None, :], k[:, None]]     # theta_{h2^-1}(n1)
    nn = tn[moved, k[None, :]]
    return validate_cayley(hh * N.order + nn, name=name)


def trivial_action(H: Group, N: Group) -> ActionTable:
    return ActionTable(H, N, np.tile(np.arange(N.order), (H.order, 1)))


def inversion_action(H: Group, N: Group) -> ActionTable:
    """H of order 2 acting on Abelian N by inversion."""
    if H.order != 2:
        raise InvalidAction("inversion action needs |H| = 2")
    P = np.empty((2, N.order), dtype=np.int64)
    P[H.identity] = np.arange(N.order)
    P[1 - H.identity] = N.inverse
    return ActionTable(H, N, P)


def _cyclic_generator(H: Group) -> int:
    gens = np.flatnonzero(H.elt_order == H.order)
    if gens.size == 0:
        raise InvalidAction("acting group is not cyclic")
    return int(gens[0])


def scalar_action(H: Group, N: Group, p: int, scalars: Sequence[int],
                  generator: int | None = None) -> ActionTable:
    """The generator of cyclic H multiplies coordinate i of N = (Z/p)^d by scalars[i].

    N must be laid out as ``abelian([p] * d)``.
    """
    m = H.order
    d = len(scalars)
    if N.order != p ** d:
        raise InvalidAction(f"N has order {N.order}, expected {p}^{d}")
    if math.gcd(m, p) != 1:
        raise BadScalarOrder(f"gcd(|H|={m}, p={p}) != 1")
    for s in scalars:
        if pow(int(s), m, p) != 1:
            raise BadScalarOrder(f"scalar {s} has order not dividing {m} mod {p}")
    g = _cyclic_generator(H) if generator is None else int(generator)
    if H.elt_order[g] != m:
        raise InvalidAction(f"element {g} does not generate H")
    digits = _digits(N.order, [p] * d)
    weights = _weights([p] * d)
    P = np.empty((m, N.order), dtype=np.int64)
    h = H.identity
    for j in range(m):
        img = np.zeros(N.order, dtype=np.int64)
        for dig, s, w in zip(digits, scalars, weights):
            img += (dig * pow(int(s), j, p) % p) * w
        P[h] = img
        h = H.mul(h, g)
    return ActionTable(H, N, P)


def dihedral(m: int, cap: int | None = None) -> Group:
    """Dihedral group of order 2m."""
    C2, Cm = cyclic(2), cyclic(m)
    return semidirect(C2, Cm, inversion_action(C2, Cm), cap=cap, name=f"D{m}")


def dicyclic(m: int, cap: int | None = None) -> Group:
    """Dicyclic group of order 4m: <a, x | a^2m = 1, x^2 = a^m, x a x^-1 = a^-1>.

    Element ``a^i x^j`` has index ``2i + j``.  m = 2 gives Q8.
    """
    n = 4 * m
    _check_cap(n, cap, "dicyclic group")
    idx = np.arange(n)
    i, j = idx // 2, idx % 2
    i1, j1 = i[:, None], j[:, None]
    i2, j2 = i[None, :], j[None, :]
    exp = i1 + np.where(j1 == 1, -i2, i2) + np.where((j1 == 1) & (j2 == 1), m, 0)
    table = 2 * (exp % (2 * m)) + (j1 ^ j2)
    return validate_cayley(table, name=f"Dic{m}")


def quaternion(order: int = 8, cap: int | None = None) -> Group:
    if order % 4 or order < 8:
        raise ValueError("quaternion order must be a multiple of 4, at least 8")
    G = dicyclic(order // 4, cap=cap)
    G.name = f"Q{order}"
    return G


def theorem_family_spec(q: int, n: int) -> tuple[list[int], list[int]]:
    if q < 1 or n < 2:
        raise ValueError("need q >= 1 and n >= 2")
    return [2] * (q * n) + [4] * (q * n), [2] * (q * (n - 2)) + [4] * (q * (n + 1))


def theorem_family(q: int, n: int, explicit: bool | None = None, cap: int | None = None):
    """(Z2)^{qn} x (Z4)^{qn} and (Z2)^{q(n-2)} x (Z4)^{q(n+1)}, both of order 2^{3qn}.

    Returns Cayley-table groups when the order is within the cap (or when
    ``explicit`` is True), otherwise implicit :class:`AbelianGroup` objects.
    """
    gs, hs = theorem_family_spec(q, n)
    order = 2 ** (3 * q * n)
    limit = ENUM_CAP if cap is None else cap
    if explicit is None:
        explicit = order <= limit
    names = (f"2^{q*n}x4^{q*n}", f"2^{q*(n-2)}x4^{q*(n+1)}")
    if explicit:
        return abelian(gs, cap=cap, name=names[0]), abelian(hs, cap=cap, name=names[1])
    return AbelianGroup(gs, name=names[0]), AbelianGroup(hs, name=names[1])
