"""Undirected, unweighted graphs and sets of their links.

Nodes and links get dense 0-based ids in first-seen input order; the
original node labels are kept on the graph so results can be reported in
the caller's vocabulary.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Iterator, Sequence
from os import PathLike

import numpy as np

from linkcomm.errors import (
    DisconnectedGraph,
    DuplicateEdge,
    EdgeListSyntaxError,
    EmptyInput,
    EmptySet,
    SelfLoop,
    SizeMismatch,
)

__all__ = [
    "Graph",
    "LinkSet",
    "components",
    "is_connected",
    "load_graph",
    "main_component",
    "parse_edge_list",
    "read_edge_list",
    "symmetric_difference_distance",
]


class Graph:
    """Immutable connected graph without self-loops or parallel links.

    Attributes
    ----------
    n, m : int
        Number of nodes and links.
    links : tuple of (int, int)
        Endpoints of each link, indexed by link id.
    adjacency : tuple of tuple of (int, int)
        ``adjacency[i]`` lists ``(neighbour, link_id)`` pairs of node ``i``.
    degree : tuple of int
    labels : tuple
        Original label of every node id.
    """

    __slots__ = (
        "n",
        "m",
        "links",
        "adjacency",
        "degree",
        "labels",
        "incident_mask",
        "_label_index",
        "_arrays",
    )

    def __init__(self, links: Sequence[tuple[int, int]], labels: Sequence[Hashable]):
        n = len(labels)
        if not links:
            raise EmptyInput("graph has no links")
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for lid, (u, v) in enumerate(links):
            if u == v:
                raise SelfLoop(f"self-loop at node {labels[u]!r}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise DuplicateEdge(f"duplicate link {labels[u]!r} - {labels[v]!r}")
            seen.add(key)
            adjacency[u].append((v, lid))
            adjacency[v].append((u, lid))

        self.n = n
        self.m = len(links)
        self.links = tuple((int(u), int(v)) for u, v in links)
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self.degree = tuple(len(a) for a in adjacency)
        self.labels = tuple(labels)
        self._label_index = {label: i for i, label in enumerate(self.labels)}
        self.incident_mask = tuple(sum(1 << lid for _, lid in a) for a in self.adjacency)
        self._arrays = None

        if min(self.degree) == 0:
            raise DisconnectedGraph("graph has isolated nodes")
        if not self._connected():
            raise DisconnectedGraph("graph is not connected")

    def _connected(self) -> bool:
        seen = bytearray(self.n)
        seen[0] = 1
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for v, _ in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    stack.append(v)
        return count == self.n

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def node_id(self, label: Hashable) -> int:
        return self._label_index[label]

    def link_labels(self, lid: int) -> tuple:
        u, v = self.links[lid]
        return (self.labels[u], self.labels[v])

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(src, dst, degree)`` as numpy arrays, for vectorised evaluation."""
        if self._arrays is None:
            ends = np.asarray(self.links, dtype=np.int64).reshape(self.m, 2)
            self._arrays = (ends[:, 0].copy(), ends[:, 1].copy(), np.asarray(self.degree, dtype=np.float64))
        return self._arrays

    def empty_set(self) -> LinkSet:
        return LinkSet(self.m)

    def full_set(self) -> LinkSet:
        return LinkSet(self.m, (1 << self.m) - 1)

    def link_set(self, ids: Iterable[int]) -> LinkSet:
        return LinkSet.from_ids(self.m, ids)


def load_graph(edges: Iterable[tuple[Hashable, Hashable]]) -> Graph:
    """Build a :class:`Graph` from pairs of node labels.

    Raises ``EmptyInput``, ``SelfLoop``, ``DuplicateEdge`` or
    ``DisconnectedGraph`` when the edge list is not a valid input.
    """
    index: dict[Hashable, int] = {}
    links = []
    for u, v in edges:
        for label in (u, v):
            if label not in index:
                index[label] = len(index)
        links.append((index[u], index[v]))
    return Graph(links, list(index))


def parse_edge_list(text: str) -> list[tuple[str, str]]:
    """Parse whitespace-separated label pairs, one per line; ``#`` lines are comments."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise EdgeListSyntaxError(f"line {lineno}: expected two node labels, got {len(fields)}")
        edges.append((fields[0], fields[1]))
    return edges


def read_edge_list(path: str | PathLike) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(parse_edge_list(fh.read()))


def _bit_ids(bits: int, count: int) -> list[int]:
    if count <= 48:
        out = []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out
    raw = np.frombuffer(bits.to_bytes((bits.bit_length() + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).tolist()


class LinkSet:
    """A set of link ids stored as an ``m``-bit integer.

    Mutable with a single writer. Equality compares contents; use ``bits``
    when a hashable key is needed.
    """

    __slots__ = ("m", "bits", "_count")

    def __init__(self, m: int, bits: int = 0):
        if bits >> m:
            raise ValueError(f"bits outside 0..{m - 1}")
        self.m = m
        self.bits = bits
        self._count = bits.bit_count()

    @classmethod
    def from_ids(cls, m: int, ids: Iterable[int]) -> LinkSet:
        bits = 0
        for lid in ids:
            if not 0 <= lid < m:
                raise ValueError(f"link id {lid} outside 0..{m - 1}")
            bits |= 1 << lid
        return cls(m, bits)

    def __len__(self) -> int:
        return self._count

    def __contains__(self, lid: int) -> bool:
        return (self.bits >> lid) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter(_bit_ids(self.bits, self._count))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinkSet):
            return NotImplemented
        return self.m == other.m and self.bits == other.bits

    __hash__ = None  # mutable

    def __repr__(self) -> str:
        return f"LinkSet({sorted(self)})"

    def ids(self) -> list[int]:
        return _bit_ids(self.bits, self._count)

    def copy(self) -> LinkSet:
        return LinkSet(self.m, self.bits)

    def add(self, lid: int) -> None:
        if lid not in self:
            self.bits |= 1 << lid
            self._count += 1

    def discard(self, lid: int) -> None:
        if lid in self:
            self.bits ^= 1 << lid
            self._count -= 1

    def toggle(self, lid: int) -> None:
        self._count += -1 if lid in self else 1
        self.bits ^= 1 << lid

    def _check(self, other: LinkSet) -> None:
        if self.m != other.m:
            raise SizeMismatch(f"link sets over {self.m} and {other.m} links")

    def __and__(self, other: LinkSet) -> LinkSet:
        self._check(other)
        return LinkSet(self.m, self.bits & other.bits)

    def __or__(self, other: LinkSet) -> LinkSet:
        self._check(other)
        return LinkSet(self.m, self.bits | other.bits)

    def __xor__(self, other: LinkSet) -> LinkSet:
        self._check(other)
        return LinkSet(self.m, self.bits ^ other.bits)

    def __sub__(self, other: LinkSet) -> LinkSet:
        self._check(other)
        return LinkSet(self.m, self.bits & ~other.bits)

    def complement(self) -> LinkSet:
        return LinkSet(self.m, ((1 << self.m) - 1) ^ self.bits)

    def issubset(self, other: LinkSet) -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0


def symmetric_difference_distance(a: LinkSet, b: LinkSet) -> int:
    """Number of links in exactly one of ``a`` and ``b``."""
    a._check(b)
    return (a.bits ^ b.bits).bit_count()


def _component_bits(g: Graph, members: set[int]) -> list[int]:
    comps = []
    remaining = set(members)
    while remaining:
        start = min(remaining)
        remaining.discard(start)
        bits = 1 << start
        stack = list(g.links[start])
        visited_nodes = set(stack)
        while stack:
            u = stack.pop()
            for v, lid in g.adjacency[u]:
                if lid in remaining:
                    remaining.discard(lid)
                    bits |= 1 << lid
                    if v not in visited_nodes:
                        visited_nodes.add(v)
                        stack.append(v)
        comps.append(bits)
    return comps


def components(g: Graph, links: LinkSet) -> list[LinkSet]:
    """Connected components of the link-induced subgraph.

    Largest first; equal sizes are ordered by their smallest link id.
    """
    comps = [LinkSet(g.m, b) for b in _component_bits(g, set(links))]
    comps.sort(key=lambda c: (-len(c), (c.bits & -c.bits).bit_length()))
    return comps


def is_connected(g: Graph, links: LinkSet) -> bool:
    """True iff ``links`` induces a connected subgraph. The empty set is not connected."""
    if len(links) == 0:
        return False
    return len(_component_bits(g, set(links))) == 1


def main_component(g: Graph, links: LinkSet) -> LinkSet:
    if len(links) == 0:
        raise EmptySet("empty link set has no components")
    return components(g, links)[0]
