"""Exhaustive psi landscape of small graphs.

Every subset of links is a place; a subset is addressed by its bitmask, so
place ``i`` holds the links whose bits are set in ``i``. The landscape is
the oracle the heuristic search is checked against.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from linkcomm.cost import EXACT_TIE_BAND, psi_exact
from linkcomm.errors import NotAMinimum, TooLarge
from linkcomm.graph import Graph, LinkSet, symmetric_difference_distance

__all__ = [
    "MAX_LINKS",
    "CommunityRecord",
    "Landscape",
    "LandscapePlace",
    "VerificationReport",
    "enumerate_landscape",
    "exact_range",
    "local_minima",
    "verify_search_result",
]

MAX_LINKS = 24
_CHUNK = 1 << 20


@dataclass(frozen=True)
class LandscapePlace:
    links: LinkSet
    psi: float
    connected: bool
    size: int


@dataclass(frozen=True)
class CommunityRecord:
    """A local minimum of the landscape.

    ``range`` is the distance to the nearest strictly lower place, or
    ``m + 1`` when no lower place exists.
    """

    links: LinkSet
    psi: float
    range: int
    is_local_minimum: bool = True


def _link_neighbour_masks(g: Graph) -> list[int]:
    return [g.incident_mask[u] | g.incident_mask[v] for u, v in g.links]


def _connected_bits(link_nbr: list[int], bits: int) -> bool:
    if not bits:
        return False
    reach = frontier = bits & -bits
    while frontier:
        grown = 0
        f = frontier
        while f:
            low = f & -f
            grown |= link_nbr[low.bit_length() - 1]
            f ^= low
        frontier = grown & bits & ~reach
        reach |= frontier
    return reach == bits


class Landscape(Sequence):
    """All ``2**m`` places of a graph, indexed by subset bitmask."""

    def __init__(self, graph: Graph, psi: np.ndarray):
        self.graph = graph
        self.psi = psi
        self._link_nbr = _link_neighbour_masks(graph)

    def __len__(self) -> int:
        return len(self.psi)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        return LandscapePlace(
            links=LinkSet(self.graph.m, index),
            psi=float(self.psi[index]),
            connected=self.is_connected(index),
            size=index.bit_count(),
        )

    def is_connected(self, bits: int) -> bool:
        return _connected_bits(self._link_nbr, bits)

    def by_size(self, size: int) -> Iterator[LandscapePlace]:
        """Places on one circle of latitude, in bitmask order."""
        sizes = np.bitwise_count(np.arange(len(self), dtype=np.uint64))
        for i in np.flatnonzero(sizes == size):
            yield self[int(i)]


def enumerate_landscape(g: Graph, max_links: int = MAX_LINKS) -> Landscape:
    """Evaluate psi on every subset of links (vectorised, in chunks)."""
    if g.m > max_links:
        raise TooLarge(f"{g.m} links; exhaustive enumeration is limited to {max_links}")
    total = 1 << g.m
    two_m = 2 * g.m
    masks = np.asarray(g.incident_mask, dtype=np.uint64)
    deg = np.asarray(g.degree, dtype=np.float64)
    psi = np.empty(total, dtype=np.float64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        sig = np.zeros(len(idx))
        for mask, k in zip(masks, deg):
            x = np.bitwise_count(idx & mask).astype(np.float64)
            sig += x * (k - x) / k
        k_in = 2.0 * np.bitwise_count(idx).astype(np.float64)
        pole = (k_in == 0) | (k_in == two_m)
        with np.errstate(divide="ignore", invalid="ignore"):
            chunk = sig / (k_in * (1.0 - k_in / two_m))
        chunk[pole] = 1.0
        psi[start : start + len(idx)] = chunk
    return Landscape(g, psi)


def _neighbour_minimum(landscape: Landscape) -> np.ndarray:
    m = landscape.graph.m
    idx = np.arange(len(landscape), dtype=np.int64)
    best = np.full(len(landscape), np.inf)
    for j in range(m):
        np.minimum(best, landscape.psi[idx ^ (1 << j)], out=best)
    return best


def _is_minimum_exact(landscape: Landscape, bits: int, strict: bool = True) -> bool:
    g = landscape.graph
    value = psi_exact(g, LinkSet(g.m, bits))
    for j in range(g.m):
        other = bits ^ (1 << j)
        if abs(landscape.psi[other] - landscape.psi[bits]) <= EXACT_TIE_BAND:
            theirs = psi_exact(g, LinkSet(g.m, other))
            if theirs < value or (strict and theirs == value):
                return False
        elif landscape.psi[other] < landscape.psi[bits]:
            return False
    return True


def _lower_places(landscape: Landscape, bits: int) -> np.ndarray:
    """Bitmasks of all places with psi strictly below place ``bits``."""
    g = landscape.graph
    here = landscape.psi[bits]
    clear = np.flatnonzero(landscape.psi < here - EXACT_TIE_BAND)
    near = np.flatnonzero(np.abs(landscape.psi - here) <= EXACT_TIE_BAND)
    if len(near) > 1:
        value = psi_exact(g, LinkSet(g.m, bits))
        extra = [i for i in near.tolist() if psi_exact(g, LinkSet(g.m, i)) < value]
        if extra:
            clear = np.concatenate([clear, np.asarray(extra, dtype=clear.dtype)])
    return clear


def _range_of(landscape: Landscape, bits: int) -> int:
    lower = _lower_places(landscape, bits)
    if len(lower) == 0:
        return landscape.graph.m + 1
    return int(np.bitwise_count(lower.astype(np.uint64) ^ np.uint64(bits)).min())


def local_minima(g: Graph, landscape: Landscape, strict: bool = True) -> list[CommunityRecord]:
    """Connected places strictly lower than each of their one-link neighbours.

    With ``strict=False`` a neighbour of equal psi does not disqualify a
    place (plateau minima are kept). Records are sorted by their link ids
    and carry the exact range.
    """
    psi = landscape.psi
    nbr = _neighbour_minimum(landscape)
    maybe = np.flatnonzero(psi <= nbr + EXACT_TIE_BAND)
    records = []
    for i in maybe.tolist():
        if not landscape.is_connected(i):
            continue
        if psi[i] > nbr[i] - EXACT_TIE_BAND and not _is_minimum_exact(landscape, i, strict):
            continue
        records.append(CommunityRecord(LinkSet(g.m, i), float(psi[i]), _range_of(landscape, i)))
    records.sort(key=lambda r: r.links.ids())
    return records


def exact_range(g: Graph, landscape: Landscape, community: LinkSet) -> int:
    """Distance from ``community`` to the nearest strictly lower place (``m + 1`` if none)."""
    if not _is_minimum_exact(landscape, community.bits):
        warnings.warn(f"{community!r} is not a local minimum", NotAMinimum, stacklevel=2)
    return _range_of(landscape, community.bits)


@dataclass
class VerificationReport:
    matched: list[tuple[LinkSet, float, float]] = field(default_factory=list)
    missed: list[LinkSet] = field(default_factory=list)
    spurious: list[tuple[LinkSet, int]] = field(default_factory=list)

    @property
    def max_psi_discrepancy(self) -> float:
        return max((abs(a - b) for _, a, b in self.matched), default=0.0)

    @property
    def ok(self) -> bool:
        return not self.missed and not self.spurious


def verify_search_result(g: Graph | int, found, oracle: list[CommunityRecord]) -> VerificationReport:
    """Compare search output with the oracle minima by exact link-set equality.

    ``g`` is the graph or just its link count. ``found`` may hold any
    records with ``links`` and ``psi`` attributes. Spurious entries carry
    their distance to the nearest oracle minimum.
    """
    m = g if isinstance(g, int) else g.m
    report = VerificationReport()
    by_bits = {r.links.bits: r for r in oracle}
    seen = set()
    for rec in found:
        hit = by_bits.get(rec.links.bits)
        if hit is not None:
            report.matched.append((rec.links, rec.psi, hit.psi))
            seen.add(rec.links.bits)
        else:
            dist = min((symmetric_difference_distance(rec.links, r.links) for r in oracle), default=m + 1)
            report.spurious.append((rec.links, dist))
    report.missed = [r.links for r in oracle if r.links.bits not in seen]
    return report
