"""Greedy local search ("adaptation") over the psi landscape.

Moves either toggle single links (link-wise) or include/exclude a node with
all its links into the current node set (node-wise). A phase keeps taking
the best move in one direction; up to ``max_tunnel`` consecutive
non-improving links may be crossed before the phase gives up and rolls back
to the best state it saw. Phases alternate between inclusion and exclusion
until two in a row bring no improvement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from linkcomm.cost import EXACT_TIE_BAND, Move, SubgraphState, psi_exact, psi_value
from linkcomm.errors import ConfigError, EmptySeed
from linkcomm.graph import LinkSet, components, is_connected

__all__ = [
    "AdaptationConfig",
    "AdaptationResult",
    "Resolution",
    "adapt",
    "candidate_moves",
    "greedy_phase",
    "handle_fragmentation",
    "is_local_minimum",
]

Mode = Literal["node_wise", "link_wise"]

# a move counts as an improvement only if it lowers psi by more than this
IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class Resolution:
    """Minimal range a community must have, in links or as a fraction of its size."""

    value: float
    relative: bool = True

    def __post_init__(self):
        if self.relative:
            if not 0.0 < self.value < 1.0:
                raise ConfigError(f"relative resolution must lie in (0, 1), got {self.value}")
        elif self.value < 1 or int(self.value) != self.value:
            raise ConfigError(f"absolute resolution must be a positive integer, got {self.value}")

    @classmethod
    def absolute(cls, links: int) -> Resolution:
        return cls(links, relative=False)

    def minimal_range(self, size: int) -> int:
        if self.relative:
            return max(1, math.ceil(self.value * size))
        return int(self.value)

    def max_tunnel(self, size: int) -> int:
        return self.minimal_range(size) - 1


@dataclass(frozen=True)
class AdaptationConfig:
    mode: Mode = "link_wise"
    resolution: Resolution = field(default_factory=lambda: Resolution(0.1))
    start_direction: Literal["include_first", "exclude_first"] = "include_first"
    max_tunnel: int | None = None  # overrides the resolution-derived bound
    debug_check: bool = False  # shadow-recompute every cached delta

    def __post_init__(self):
        if self.mode not in ("node_wise", "link_wise"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.start_direction not in ("include_first", "exclude_first"):
            raise ConfigError(f"unknown start direction {self.start_direction!r}")
        if self.max_tunnel is not None and self.max_tunnel < 0:
            raise ConfigError("max_tunnel must be >= 0")

    def tunnel_for(self, size: int) -> int:
        if self.max_tunnel is not None:
            return self.max_tunnel
        return self.resolution.max_tunnel(size)


@dataclass
class AdaptationResult:
    community: SubgraphState
    psi: float
    steps_taken: int
    fragmented: bool
    components_spawned: list[LinkSet] = field(default_factory=list)


class _CandidateCache:
    """Node-cut changes of all available moves in one direction.

    Entries hold ``(delta_sigma, links_toggled)``. Psi after a move also
    depends on the total size, which every move changes, so it is derived
    on demand; only entries near a move are recomputed.
    """

    def __init__(self, state: SubgraphState, step: int, node_mode: bool, debug: bool = False):
        self.state = state
        self.step = step
        self.node_mode = node_mode
        self.debug = debug
        self.entries: dict[int, tuple[float, int]] = {}
        self.rebuild()

    def _link_entry(self, lid: int):
        s = self.state
        g = s.graph
        x = s.internal_degree
        u, v = g.links[lid]
        ku, kv = g.degree[u], g.degree[v]
        inside = (s.links.bits >> lid) & 1
        if self.step > 0:
            if inside or not (x[u] or x[v]):
                return None
            return ((ku - 2 * x[u] - 1) / ku + (kv - 2 * x[v] - 1) / kv, 1)
        if not inside or not (x[u] < ku or x[v] < kv):
            return None
        return ((2 * x[u] - ku - 1) / ku + (2 * x[v] - kv - 1) / kv, 1)

    def _node_entry(self, node: int):
        s = self.state
        if self.step > 0:
            lids = s.node_add_links(node)
        else:
            if not s.is_boundary(node):
                return None
            lids = s.node_remove_links(node)
        if not lids:
            return None
        return (_delta_sigma(s, lids, self.step), len(lids))

    def _targets_all(self):
        s = self.state
        g = s.graph
        attached = s.nodes() if self.step > 0 else s.boundary_nodes()
        if self.node_mode:
            if self.step < 0:
                return attached
            out = set(attached)
            for i in attached:
                out.update(w for w, _ in g.adjacency[i])
            return out
        return {lid for i in attached for _, lid in g.adjacency[i]}

    def _fresh(self) -> dict[int, tuple[float, int]]:
        evaluate = self._node_entry if self.node_mode else self._link_entry
        fresh = {}
        for t in self._targets_all():
            e = evaluate(t)
            if e is not None:
                fresh[t] = e
        return fresh

    def rebuild(self, state: SubgraphState | None = None) -> None:
        if state is not None:
            self.state = state
        self.entries = self._fresh()

    def touch(self, nodes) -> None:
        """Re-evaluate every entry whose value can depend on ``nodes``."""
        g = self.state.graph
        if self.node_mode:
            targets = set(nodes)
            for i in nodes:
                targets.update(w for w, _ in g.adjacency[i])
            evaluate = self._node_entry
        else:
            targets = {lid for i in nodes for _, lid in g.adjacency[i]}
            evaluate = self._link_entry
        for t in targets:
            e = evaluate(t)
            if e is None:
                self.entries.pop(t, None)
            else:
                self.entries[t] = e
        if self.debug:
            self.check()

    def check(self) -> None:
        fresh = self._fresh()
        assert fresh.keys() == self.entries.keys(), "candidate set drifted"
        for t, (ds, nl) in fresh.items():
            cds, cnl = self.entries[t]
            assert nl == cnl and abs(ds - cds) <= 1e-9, f"stale delta for {t}"

    def ranked(self) -> list[tuple[float, int, int]]:
        """``(psi_after, target, links_toggled)`` for every legal move, best first."""
        s = self.state
        sig = s.sigma_cached
        size = s.size
        two_m = 2 * s.graph.m
        out = []
        for t, (ds, nl) in self.entries.items():
            if self.step < 0 and nl >= size:
                continue  # never empty the subgraph
            out.append((psi_value(sig + ds, 2 * (size + self.step * nl), two_m), t, nl))
        out.sort()
        return out

    def best(self):
        s = self.state
        sig = s.sigma_cached
        size = s.size
        two_m = 2 * s.graph.m
        step = self.step
        best = None
        for t, (ds, nl) in self.entries.items():
            if step < 0 and nl >= size:
                continue
            p = psi_value(sig + ds, 2 * (size + step * nl), two_m)
            if best is None or p < best[0] or (p == best[0] and t < best[1]):
                best = (p, t, nl)
        return best


def _delta_sigma(s: SubgraphState, lids, step: int) -> float:
    g = s.graph
    x = s.internal_degree
    change: dict[int, int] = {}
    for lid in lids:
        u, v = g.links[lid]
        change[u] = change.get(u, 0) + step
        change[v] = change.get(v, 0) + step
    ds = 0.0
    for i, d in change.items():
        xi, k = x[i], g.degree[i]
        ds += ((xi + d) * (k - xi - d) - xi * (k - xi)) / k
    return ds


def _step_of(direction: str) -> int:
    if direction in ("include", "add"):
        return 1
    if direction in ("exclude", "remove"):
        return -1
    raise ValueError(f"unknown direction {direction!r}")


def candidate_moves(state: SubgraphState, direction: str, cfg: AdaptationConfig) -> list[tuple[Move, float]]:
    """All moves available in ``direction`` with their psi change, best first (ties by id)."""
    step = _step_of(direction)
    node_mode = cfg.mode == "node_wise"
    cache = _CandidateCache(state, step, node_mode)
    kind = "node" if node_mode else "link"
    move_dir = "add" if step > 0 else "remove"
    here = state.psi
    return [(Move(kind, t, move_dir), p - here) for p, t, _ in cache.ranked()]


def _run_phase(state: SubgraphState, step: int, cfg: AdaptationConfig) -> tuple[SubgraphState, int]:
    g = state.graph
    node_mode = cfg.mode == "node_wise"
    budget = cfg.tunnel_for(state.size)
    cache = _CandidateCache(state, step, node_mode, cfg.debug_check)
    best_psi = state.psi
    saved: SubgraphState | None = None  # best state, kept while tunnelling
    uphill = 0
    steps = 0
    while True:
        choice = cache.best()
        if choice is None:
            break
        predicted, target, nlinks = choice
        cost = nlinks if node_mode else 1
        improving = predicted < best_psi - IMPROVE_EPS
        if not improving and uphill + cost > budget:
            break
        may_fragment = node_mode and step < 0
        if saved is None and (not improving or may_fragment):
            saved = state.clone()
        if node_mode:
            lids = state.node_add_links(target) if step > 0 else state.node_remove_links(target)
        else:
            lids = [target]
        touched = {i for lid in lids for i in g.links[lid]}
        state.toggle_links(lids)
        steps += 1
        if may_fragment and not is_connected(g, state.links):
            state = SubgraphState(g, components(g, state.links)[0])
            cache.rebuild(state)
        else:
            cache.touch(touched)
        if state.psi < best_psi - IMPROVE_EPS:
            best_psi = state.psi
            saved = None
            uphill = 0
        else:
            uphill += cost
            if uphill > budget:
                break
    if saved is not None:
        state = saved
    return state, steps


def greedy_phase(state: SubgraphState, direction: str, cfg: AdaptationConfig) -> SubgraphState:
    """One inclusion or exclusion phase. May return a new state object; the input can be modified."""
    return _run_phase(state, _step_of(direction), cfg)[0]


def _toggle_psi(state: SubgraphState) -> np.ndarray:
    """Psi after toggling each link; ``inf`` where the toggle would empty the set."""
    g = state.graph
    src, dst, deg = g.arrays
    x = np.asarray(state.internal_degree, dtype=np.float64)
    raw = state.links.bits.to_bytes((g.m + 7) // 8, "little")
    inside = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little", count=g.m).astype(bool)
    step = np.where(inside, -1.0, 1.0)
    xu, xv, ku, kv = x[src], x[dst], deg[src], deg[dst]
    ds = step * (ku - 2 * xu - step) / ku + step * (kv - 2 * xv - step) / kv
    k_new = 2.0 * (state.size + step)
    two_m = 2 * g.m
    with np.errstate(divide="ignore", invalid="ignore"):
        after = (state.sigma_cached + ds) / (k_new * (1.0 - k_new / two_m))
    after[k_new == two_m] = 1.0
    after[k_new == 0] = np.inf  # emptying is not a move
    return after


def _best_single_toggle(state: SubgraphState) -> int | None:
    """Link whose toggle lowers psi the most, judged exactly near ties; ``None`` if none lowers it."""
    g = state.graph
    after = _toggle_psi(state)
    here = state.psi
    best = int(np.argmin(after))
    if after[best] < here - EXACT_TIE_BAND:
        return best
    near = np.flatnonzero(np.abs(after - here) <= EXACT_TIE_BAND)
    if len(near):
        current = psi_exact(g, state.links)
        lower = []
        for lid in near.tolist():
            trial = state.links.copy()
            trial.toggle(lid)
            if len(trial) and (value := psi_exact(g, trial)) < current:
                lower.append((value, lid))
        if lower:
            return min(lower)[1]
    return None


def is_local_minimum(g, links: LinkSet) -> bool:
    """True iff every one-link neighbour of ``links`` (unconnected ones included) has strictly higher psi.

    Ties are decided exactly, so a neighbour of equal psi disqualifies.
    """
    state = SubgraphState(g, links)
    after = _toggle_psi(state)
    here = state.psi
    if len(links) == 1:
        after[links.ids()[0]] = 1.0  # the empty set
    if np.any(after < here - EXACT_TIE_BAND):
        return False
    near = np.flatnonzero(np.abs(after - here) <= EXACT_TIE_BAND)
    if len(near):
        current = psi_exact(g, links)
        for lid in near.tolist():
            trial = links.copy()
            trial.toggle(lid)
            if psi_exact(g, trial) <= current:
                return False
    return True


def _adapt_core(state: SubgraphState, cfg: AdaptationConfig) -> tuple[SubgraphState, int]:
    step = 1 if cfg.start_direction == "include_first" else -1
    steps = 0
    while True:
        idle = 0
        while idle < 2:
            before = state.psi
            state, n = _run_phase(state, step, cfg)
            steps += n
            idle = 0 if state.psi < before - IMPROVE_EPS else idle + 1
            step = -step
        if cfg.mode != "link_wise":
            return state, steps
        lid = _best_single_toggle(state)
        if lid is None:
            return state, steps
        state.toggle_links([lid])
        steps += 1


def handle_fragmentation(state: SubgraphState, cfg: AdaptationConfig) -> list[SubgraphState]:
    """Split an unconnected result and re-adapt each part until all results are connected.

    Results are distinct, ordered by psi then link ids.
    """
    g = state.graph
    if is_connected(g, state.links):
        return [state]
    results: dict[int, SubgraphState] = {}
    seen: set[int] = set()
    queue = components(g, state.links)
    while queue:
        part = queue.pop(0)
        if part.bits in seen:
            continue
        seen.add(part.bits)
        adapted, _ = _adapt_core(SubgraphState(g, part), cfg)
        if is_connected(g, adapted.links):
            results.setdefault(adapted.links.bits, adapted)
        else:
            queue.extend(components(g, adapted.links))
    return sorted(results.values(), key=lambda s: (s.psi, s.links.ids()))


def adapt(seed: SubgraphState, cfg: AdaptationConfig) -> AdaptationResult:
    """Greedy descent from ``seed`` to a connected local optimum. The seed is not modified."""
    g = seed.graph
    if seed.size == 0:
        raise EmptySeed("cannot adapt an empty link set")
    if is_connected(g, seed.links):
        state = seed.clone()
    else:
        state = SubgraphState(g, components(g, seed.links)[0])
    state, steps = _adapt_core(state, cfg)
    if cfg.mode == "link_wise":
        parts = handle_fragmentation(state, cfg)
    else:
        parts = [state]
    best = parts[0]
    return AdaptationResult(
        community=best,
        psi=best.psi,
        steps_taken=steps,
        fragmented=len(parts) > 1 or parts[0] is not state,
        components_spawned=[p.links.copy() for p in parts[1:]],
    )
