"""Family descriptors and the named test corpora.

Descriptor grammar (factors joined by ``x`` form a direct product)::

    2^3x4^3      cyclic factors, exponent = repetition
    Z6, 6        cyclic group
    S4, A5       symmetric / alternating group of degree m
    D4           dihedral group of order 2m
    Q8, Q16      generalized quaternion group of the given order
    Dic3         dicyclic group of order 4m
    sdp:3:7^2:2,4            Z3 acting on (Z7)^2 by diagonal scalars
    theorem:1:3:left         one member of the separating Abelian family
    mekler:p3:path3          Cayley table of a Mekler group
    cfi:k4, cfi:prism:odd    CFI graph, optionally twisted (odd, or t=0-1,2-3)
    graph:k4, graph:path4    plain graphs
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import constructors as C
from . import graphs as GR
from .errors import FormatError
from .graphs import Graph
from .group_core import Group
from .mekler import mekler_group, to_cayley


@dataclass(frozen=True)
class Built:
    kind: str                     # "group" or "graph"
    value: Union[Group, Graph]
    descriptor: str


def parse_graph_name(name: str) -> Graph:
    name = name.lower()
    if name == "prism":
        return GR.prism(3)
    m = re.fullmatch(r"(k|path|cycle|empty|prism)(\d+)", name)
    if not m:
        raise FormatError(f"unknown graph {name!r}")
    kind, n = m.group(1), int(m.group(2))
    return {"k": GR.complete, "path": GR.path, "cycle": GR.cycle,
            "empty": GR.empty, "prism": GR.prism}[kind](n)


def _factor(tok: str, cap: int | None):
    """A cyclic order list (Abelian token) or a Group."""
    m = re.fullmatch(r"(?:Z)?(\d+)(?:\^(\d+))?", tok)
    if m:
        return [int(m.group(1))] * int(m.group(2) or 1)
    m = re.fullmatch(r"(S|A|D|Q|Dic)(\d+)", tok)
    if not m:
        raise FormatError(f"unknown group factor {tok!r}")
    kind, k = m.group(1), int(m.group(2))
    build = {"S": C.symmetric, "A": C.alternating, "D": C.dihedral,
             "Q": C.quaternion, "Dic": C.dicyclic}[kind]
    G = build(k, cap=cap)
    G.name = tok
    return G


def parse_group(desc: str, cap: int | None = None) -> Group:
    if desc.startswith("sdp:"):
        parts = desc.split(":")
        if len(parts) != 4:
            raise FormatError(f"bad semidirect descriptor {desc!r}")
        m = int(parts[1])
        base = re.fullmatch(r"(\d+)\^(\d+)", parts[2])
        if not base:
            raise FormatError(f"bad module descriptor {parts[2]!r}")
        p, d = int(base.group(1)), int(base.group(2))
        scalars = [int(s) for s in parts[3].split(",")]
        if len(scalars) != d:
            raise FormatError("one scalar per coordinate required")
        H, N = C.cyclic(m), C.abelian([p] * d)
        G = C.semidirect(H, N, C.scalar_action(H, N, p, scalars), cap=cap,
                         require_coprime=True)
        G.name = desc
        return G
    if desc.startswith("theorem:"):
        parts = desc.split(":")
        if len(parts) != 4 or parts[3] not in ("left", "right"):
            raise FormatError(f"bad family descriptor {desc!r}")
        G, H = C.theorem_family(int(parts[1]), int(parts[2]), explicit=True, cap=cap)
        return G if parts[3] == "left" else H
    if desc.startswith("mekler:"):
        M = parse_mekler(desc)
        G = to_cayley(M) if cap is None else to_cayley(M, cap=cap)
        G.name = desc
        return G
    factors = [_factor(t, cap) for t in desc.split("x")]
    result: Group | None = None
    pending: list[int] = []

    def flush():
        nonlocal result, pending
        if pending:
            A = C.abelian(pending, cap=cap)
            result = A if result is None else C.direct_product(result, A, cap=cap)
            pending = []

    for f in factors:
        if isinstance(f, list):
            pending += f
        else:
            flush()
            result = f if result is None else C.direct_product(result, f, cap=cap)
    flush()
    result.name = desc
    return result


def parse_mekler(desc: str):
    m = re.fullmatch(r"mekler:p(\d+):(\w+)", desc)
    if not m:
        raise FormatError(f"bad Mekler descriptor {desc!r}")
    return mekler_group(parse_graph_name(m.group(2)), int(m.group(1)))


def parse_cfi(desc: str) -> Graph:
    parts = desc.split(":")
    base = parse_graph_name(parts[1])
    twist: list[tuple[int, int]] = []
    if len(parts) > 2:
        spec = parts[2]
        if spec == "odd":
            twist = [base.sorted_edges()[0]]
        elif spec == "even":
            twist = base.sorted_edges()[:2]
        elif spec.startswith("t="):
            twist = [tuple(int(v) for v in e.split("-")) for e in spec[2:].split(",") if e]
        else:
            raise FormatError(f"bad twist spec {spec!r}")
    return GR.cfi(base, twist).graph


def build(desc: str, cap: int | None = None) -> Built:
    if desc.startswith("cfi:"):
        return Built("graph", parse_cfi(desc), desc)
    if desc.startswith("graph:"):
        return Built("graph", parse_graph_name(desc[6:]), desc)
    return Built("group", parse_group(desc, cap), desc)


# --------------------------------------------------------------------------
# corpora

# every group of order at most 12 up to isomorphism, one descriptor each
SMALL_GROUPS = [
    "Z1", "Z2", "Z3", "Z4", "2^2", "Z5", "Z6", "S3", "Z7",
    "Z8", "2x4", "2^3", "D4", "Q8", "Z9", "3^2", "Z10", "D5", "Z11",
    "Z12", "2x6", "D6", "A4", "Dic3",
]

CANON_CORPUS = [
    "Z6", "Z8", "Z12", "Z16", "Z64", "S3", "D4", "D5", "D6", "D8", "D16", "D32",
    "Q8", "Q16", "Q32", "2x4", "2x8", "4x4", "3x3", "4x8", "2x32", "A4", "S4", "Dic3",
]

INVARIANCE_CORPUS = [
    "Z6", "Z8", "2^3", "2x4", "D4", "Q8", "S3", "A4", "Dic3", "D6", "Z12",
    "4x4", "D8", "Q16", "S4", "3^2", "mekler:p3:path3",
]

# one output per constructor path, all of order at most 2000
CONSTRUCTOR_OUTPUTS = [
    "Z1", "Z2", "Z17", "Z60", "2^2x4", "2x3", "3^2x9", "4^2x2^3", "S3", "S4", "S5", "A4", "A5",
    "A5xZ2", "A5xA4", "S4xS3", "D4", "D17", "Q8", "Q32", "Dic3", "Dic5",
    "sdp:3:7^2:2,2", "sdp:3:7^2:2,4", "sdp:3:7^2:4,4", "sdp:2:3^1:2",
    "sdp:5:11^1:3", "theorem:1:3:left", "theorem:1:3:right",
    "mekler:p3:path3", "mekler:p3:k3", "mekler:p3:empty2", "mekler:p3:path4",
    "mekler:p5:path3",
]


def small_corpus(max_order: int = 12) -> list[Group]:
    out = []
    for d in SMALL_GROUPS:
        G = parse_group(d)
        if G.order <= max_order:
            out.append(G)
    return out
