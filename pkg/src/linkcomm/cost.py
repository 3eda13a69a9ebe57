"""Node cut, internal connectivity and the ratio node-cut of link sets.

For a link set ``L`` with internal degrees ``x_i`` (links of ``L`` at node
``i``) and degrees ``k_i``::

    sigma(L) = sum_i x_i (k_i - x_i) / k_i          node cut
    tau(L)   = sum_i x_i**2 / k_i                   internal connectivity
    psi(L)   = sigma / (K (1 - K / 2m)),  K = 2|L|  ratio node-cut

``psi`` of the empty set and of the full link set is defined as 1.
"""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction
from typing import Literal, NamedTuple

import numpy as np

from linkcomm.errors import IllegalToggle
from linkcomm.graph import Graph, LinkSet

__all__ = [
    "Move",
    "SubgraphState",
    "apply_toggle",
    "delta_psi_link",
    "delta_psi_node",
    "psi",
    "psi_exact",
    "psi_of",
    "psi_value",
    "sigma",
    "sigma_of",
    "strictly_lower",
    "tau",
]

Direction = Literal["add", "remove"]

REFRESH_EVERY = 4096
# float differences below this are re-decided with exact rational arithmetic
EXACT_TIE_BAND = 1e-9


def psi_value(sigma_: float, k_in: int, two_m: int) -> float:
    if k_in == 0 or k_in == two_m:
        return 1.0
    return sigma_ / (k_in * (1.0 - k_in / two_m))


class Move(NamedTuple):
    kind: Literal["link", "node"]
    target: int
    direction: Direction


class SubgraphState:
    """A link set with cached internal degrees and node cut.

    Single writer; :meth:`clone` is the way to branch a search.
    """

    __slots__ = ("graph", "links", "internal_degree", "sigma_cached", "_since_refresh")

    def __init__(self, graph: Graph, links: LinkSet | Iterable[int] = ()):
        if not isinstance(links, LinkSet):
            links = graph.link_set(links)
        self.graph = graph
        self.links = links.copy()
        x = [0] * graph.n
        for lid in self.links:
            u, v = graph.links[lid]
            x[u] += 1
            x[v] += 1
        self.internal_degree = x
        self.sigma_cached = _sigma_from_degrees(graph.degree, x)
        self._since_refresh = 0

    def clone(self) -> SubgraphState:
        new = SubgraphState.__new__(SubgraphState)
        new.graph = self.graph
        new.links = self.links.copy()
        new.internal_degree = list(self.internal_degree)
        new.sigma_cached = self.sigma_cached
        new._since_refresh = self._since_refresh
        return new

    @property
    def k_in_total(self) -> int:
        return 2 * len(self.links)

    @property
    def size(self) -> int:
        return len(self.links)

    @property
    def psi(self) -> float:
        return psi_value(self.sigma_cached, 2 * len(self.links), 2 * self.graph.m)

    def __repr__(self) -> str:
        return f"SubgraphState({sorted(self.links)}, psi={self.psi:.6g})"

    def nodes(self) -> list[int]:
        """Nodes attached to at least one link of the set."""
        return [i for i, x in enumerate(self.internal_degree) if x]

    def is_boundary(self, node: int) -> bool:
        x = self.internal_degree[node]
        return 0 < x < self.graph.degree[node]

    def boundary_nodes(self) -> list[int]:
        deg = self.graph.degree
        return [i for i, x in enumerate(self.internal_degree) if 0 < x < deg[i]]

    def node_add_links(self, node: int) -> list[int]:
        """Links that including ``node`` would add: its missing links into the attached node set."""
        x = self.internal_degree
        bits = self.links.bits
        return [lid for w, lid in self.graph.adjacency[node] if x[w] and not (bits >> lid) & 1]

    def node_remove_links(self, node: int) -> list[int]:
        bits = self.links.bits
        return [lid for _, lid in self.graph.adjacency[node] if (bits >> lid) & 1]

    def toggle_links(self, lids: Iterable[int]) -> None:
        """Flip membership of every link in ``lids``, updating the caches in O(len(lids))."""
        g = self.graph
        deg = g.degree
        ends = g.links
        x = self.internal_degree
        links = self.links
        ds = 0.0
        count = 0
        for lid in lids:
            u, v = ends[lid]
            step = -1 if (links.bits >> lid) & 1 else 1
            links.toggle(lid)
            # change of x*(k-x)/k at both endpoints when x -> x+step
            xu, xv, ku, kv = x[u], x[v], deg[u], deg[v]
            ds += step * ((ku - 2 * xu - step) / ku + (kv - 2 * xv - step) / kv)
            x[u] = xu + step
            x[v] = xv + step
            count += 1
        self.sigma_cached += ds
        self._since_refresh += count
        if self._since_refresh >= REFRESH_EVERY:
            self.refresh()

    def refresh(self) -> None:
        self.sigma_cached = _sigma_from_degrees(self.graph.degree, self.internal_degree)
        self._since_refresh = 0


def _sigma_from_degrees(deg, x) -> float:
    return sum(xi * (k - xi) / k for xi, k in zip(x, deg) if xi)


def sigma_of(g: Graph, links: LinkSet) -> float:
    """Node cut recomputed from scratch."""
    ids = links.ids()
    if not ids:
        return 0.0
    src, dst, deg = g.arrays
    x = np.bincount(src[ids], minlength=g.n) + np.bincount(dst[ids], minlength=g.n)
    return float(np.sum(x * (deg - x) / deg))


def psi_of(g: Graph, links: LinkSet) -> float:
    """Ratio node-cut recomputed from scratch."""
    return psi_value(sigma_of(g, links), 2 * len(links), 2 * g.m)


def psi_exact(g: Graph, links: LinkSet) -> Fraction:
    k_in = 2 * len(links)
    if k_in == 0 or k_in == 2 * g.m:
        return Fraction(1)
    x = [0] * g.n
    for lid in links:
        u, v = g.links[lid]
        x[u] += 1
        x[v] += 1
    s = sum((Fraction(xi * (k - xi), k) for xi, k in zip(x, g.degree) if xi), Fraction(0))
    return s / (k_in * (1 - Fraction(k_in, 2 * g.m)))


def strictly_lower(g: Graph, psi_a: float, a: LinkSet, psi_b: float, b: LinkSet) -> bool:
    """``psi(a) < psi(b)``, settled exactly when the float values are too close to call."""
    if psi_a < psi_b - EXACT_TIE_BAND:
        return True
    if psi_a > psi_b + EXACT_TIE_BAND:
        return False
    return psi_exact(g, a) < psi_exact(g, b)


def sigma(s: SubgraphState) -> float:
    return s.sigma_cached


def tau(s: SubgraphState) -> float:
    deg = s.graph.degree
    return sum(xi * xi / deg[i] for i, xi in enumerate(s.internal_degree) if xi)


def psi(s: SubgraphState) -> float:
    return s.psi


def _delta_sigma(s: SubgraphState, lids: list[int], step: int) -> float:
    g = s.graph
    deg = g.degree
    x = s.internal_degree
    change: dict[int, int] = {}
    for lid in lids:
        u, v = g.links[lid]
        change[u] = change.get(u, 0) + step
        change[v] = change.get(v, 0) + step
    ds = 0.0
    for i, d in change.items():
        xi, k = x[i], deg[i]
        ds += ((xi + d) * (k - xi - d) - xi * (k - xi)) / k
    return ds


def _psi_after(s: SubgraphState, lids: list[int], step: int) -> float:
    ds = _delta_sigma(s, lids, step)
    return psi_value(s.sigma_cached + ds, 2 * (len(s.links) + step * len(lids)), 2 * s.graph.m)


def _step(direction: Direction) -> int:
    if direction == "add":
        return 1
    if direction == "remove":
        return -1
    raise ValueError(f"unknown direction {direction!r}")


def delta_psi_link(s: SubgraphState, lid: int, direction: Direction) -> float:
    """Change of psi from adding or removing one link."""
    step = _step(direction)
    if (lid in s.links) != (step < 0):
        raise IllegalToggle(f"cannot {direction} link {lid}")
    return _psi_after(s, [lid], step) - s.psi


def node_move_links(s: SubgraphState, node: int, direction: Direction) -> list[int]:
    """Links toggled by a node move; raises IllegalToggle when the move is not available."""
    if _step(direction) > 0:
        lids = s.node_add_links(node)
        if not lids:
            raise IllegalToggle(f"node {node} has no missing links into the subgraph")
    else:
        if not s.internal_degree[node]:
            raise IllegalToggle(f"node {node} is not attached to the subgraph")
        lids = s.node_remove_links(node)
    return lids


def delta_psi_node(s: SubgraphState, node: int, direction: Direction) -> float:
    """Change of psi from including a node with its links into the subgraph, or excluding it."""
    lids = node_move_links(s, node, direction)
    return _psi_after(s, lids, _step(direction)) - s.psi


def apply_toggle(s: SubgraphState, move: Move) -> SubgraphState:
    """Apply ``move`` to ``s`` in place and return ``s``."""
    if move.kind == "link":
        step = _step(move.direction)
        if (move.target in s.links) != (step < 0):
            raise IllegalToggle(f"cannot {move.direction} link {move.target}")
        s.toggle_links([move.target])
    elif move.kind == "node":
        s.toggle_links(node_move_links(s, move.target, move.direction))
    else:
        raise ValueError(f"unknown move kind {move.kind!r}")
    return s
