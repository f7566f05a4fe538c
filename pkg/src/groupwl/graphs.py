"""Simple graphs, CFI gadgets and CFI graphs.

CFI vertex numbering: gadgets follow base-vertex order.  Inside the gadget of
base vertex v, the external pairs ``(a_i, b_i)`` come first, one pair per
incident base edge in sorted edge order, followed by the internal vertices
(even-weight bit strings of length deg(v)) in lexicographic order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeTooLow, Disconnected, FormatError, GraphError


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: frozenset
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for e in self.edges:
            u, v = e
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < v < self.num_vertices):
                raise GraphError(f"edge {e} out of range or not normalised")
        if self.labels is not None and len(self.labels) != self.num_vertices:
            raise GraphError("one label per vertex required")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[str] | None = None) -> "Graph":
        es = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            e = _edge(u, v)
            if e in es:
                raise GraphError(f"duplicate edge {e}")
            es.add(e)
        return cls(n, frozenset(es), tuple(labels) if labels is not None else None)

    def __len__(self) -> int:
        return self.num_vertices

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.num_vertices, self.num_vertices), dtype=bool)
        for u, v in self.edges:
            A[u, v] = A[v, u] = True
        return A

    def neighbors(self, v: int) -> list[int]:
        return sorted(w for e in self.edges if v in e for w in e if w != v)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def induced(self, vertices: Iterable[int]) -> "Graph":
        vs = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(vs)}
        return Graph.from_edges(len(vs), [(pos[u], pos[v]) for u, v in self.edges
                                          if u in pos and v in pos])


def complement(g: Graph) -> Graph:
    n = g.num_vertices
    return Graph.from_edges(n, [e for e in itertools.combinations(range(n), 2) if e not in g.edges])


def components(g: Graph) -> list[list[int]]:
    parent = list(range(g.num_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for v in range(g.num_vertices):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def is_connected(g: Graph) -> bool:
    return g.num_vertices <= 1 or len(components(g)) == 1


# --------------------------------------------------------------------------
# small named graphs


def complete(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def empty(n: int) -> Graph:
    return Graph.from_edges(n, [])


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def prism(m: int = 3) -> Graph:
    """Two m-cycles joined by a perfect matching (the 3-prism for m = 3)."""
    edges = [(i, (i + 1) % m) for i in range(m)]
    edges += [(m + i, m + (i + 1) % m) for i in range(m)]
    edges += [(i, m + i) for i in range(m)]
    return Graph.from_edges(2 * m, edges)


def all_labeled_graphs(n: int) -> list[Graph]:
    pairs = list(itertools.combinations(range(n), 2))
    return [Graph.from_edges(n, [p for p, bit in zip(pairs, bits) if bit])
            for bits in itertools.product((0, 1), repeat=len(pairs))]


# --------------------------------------------------------------------------
# CFI


def even_strings(d: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=d)
            if bits.count("1") % 2 == 0]


def cfi_gadget(d: int) -> Graph:
    """2d external vertices a_0, b_0, ..., then the even-weight strings of length d."""
    if d < 2:
        raise DegreeTooLow("gadget degree must be at least 2")
    labels = [f"{c}{i}" for i in range(d) for c in "ab"]
    edges = []
    for s in even_strings(d):
        u = len(labels)
        labels.append(s)
        for i, bit in enumerate(s):
            edges.append((u, 2 * i + (bit == "1")))
    return Graph.from_edges(len(labels), edges, labels)


@dataclass(frozen=True)
class Gadget:
    external: dict            # base edge -> (a vertex, b vertex)
    internal: tuple[int, ...]


@dataclass(frozen=True)
class CfiGraph:
    graph: Graph
    gadget_map: dict          # base vertex -> Gadget
    twist_set: frozenset


def cfi(base: Graph, twist_set: Iterable[tuple[int, int]] = ()) -> CfiGraph:
    twists = frozenset(_edge(*e) for e in twist_set)
    for e in twists:
        if e not in base.edges:
            raise GraphError(f"twisted pair {e} is not a base edge")
    if not is_connected(base):
        raise Disconnected("CFI base graph must be connected")
    deg = base.degrees()
    if base.num_vertices and deg.min() < 2:
        raise DegreeTooLow(f"vertex {int(np.argmin(deg))} has degree {int(deg.min())} < 2")
    base_edges = base.sorted_edges()
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    gadgets = {}
    for v in range(base.num_vertices):
        incident = [e for e in base_edges if v in e]
        gadget = cfi_gadget(len(incident))
        offset = len(labels)
        labels.extend(f"{v}:{lab}" for lab in gadget.labels)
        edges.extend((offset + a, offset + b) for a, b in gadget.edges)
        ext = {e: (offset + 2 * i, offset + 2 * i + 1) for i, e in enumerate(incident)}
        internal = tuple(range(offset + 2 * len(incident), len(labels)))
        gadgets[v] = Gadget(ext, internal)
    for e in base_edges:
        x, y = e
        ax, bx = gadgets[x].external[e]
        ay, by = gadgets[y].external[e]
        if e in twists:
            edges += [(ax, by), (bx, ay)]
        else:
            edges += [(ax, ay), (bx, by)]
    return CfiGraph(Graph.from_edges(len(labels), edges, labels), gadgets, twists)


def cfi_vertex_count(base: Graph) -> int:
    return int(sum(2 * d + 2 ** (d - 1) for d in base.degrees()))


# --------------------------------------------------------------------------
# files


def format_graph(g: Graph) -> str:
    lines = [f"graph v1 n={g.num_vertices} m={g.num_edges}"]
    lines += [f"{u} {v}" for u, v in g.sorted_edges()]
    if g.labels is not None:
        lines += [f"# label {v} {lab}" for v, lab in enumerate(g.labels)]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty graph file")
    head = lines[0].split()
    if (len(head) != 4 or head[:2] != ["graph", "v1"] or not head[2].startswith("n=")
            or not head[3].startswith("m=")):
        raise FormatError(f"bad header {lines[0]!r}")
    try:
        n, m = int(head[2][2:]), int(head[3][2:])
    except ValueError as exc:
        raise FormatError(f"bad header {lines[0]!r}") from exc
    edges, labels = [], {}
    for ln in lines[1:]:
        if ln.startswith("#"):
            parts = ln.split(maxsplit=3)
            if len(parts) == 4 and parts[1] == "label":
                labels[int(parts[2])] = parts[3]
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"bad edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise FormatError(f"bad edge line {ln!r}") from exc
    if len(edges) != m:
        raise FormatError(f"expected {m} edges, found {len(edges)}")
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) out of range")
    lab = tuple(labels.get(v, "") for v in range(n)) if labels else None
    return Graph.from_edges(n, edges, lab)


def read_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_text())


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g))
