"""Degree-weighted line graph, used to cross-check the node-cut measures.

The line graph has one vertex per original link; two links sharing node
``i`` are joined with weight ``1/k_i``. In matrix form ``E = D.T @ D`` with
``D = B / sqrt(k)`` and ``B`` the node-link incidence matrix. The search
code never touches this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from linkcomm.graph import Graph, LinkSet

__all__ = ["LineGraph", "build_line_graph", "line_graph_cut", "line_graph_internal"]


@dataclass(frozen=True)
class LineGraph:
    size: int
    incidence: sp.csr_matrix  # B, n x m
    normalized: sp.csr_matrix  # D, n x m
    weighted_adjacency: sp.csr_matrix  # E, m x m, diagonal included
    node_weights: np.ndarray  # 1/k_i

    def back_projection(self) -> sp.csr_matrix:
        """``D @ D.T``: the original adjacency with link weights ``1/sqrt(k_i k_j)`` (plus diagonal)."""
        return (self.normalized @ self.normalized.T).tocsr()


def build_line_graph(g: Graph) -> LineGraph:
    src, dst, deg = g.arrays
    rows = np.concatenate([src, dst])
    cols = np.concatenate([np.arange(g.m), np.arange(g.m)])
    b = sp.csr_matrix((np.ones(2 * g.m), (rows, cols)), shape=(g.n, g.m))
    d = sp.diags(1.0 / np.sqrt(deg)) @ b
    e = (d.T @ d).tocsr()
    return LineGraph(g.m, b, d.tocsr(), e, 1.0 / deg)


def _membership(lg: LineGraph, links: LinkSet) -> np.ndarray:
    mu = np.zeros(lg.size)
    mu[list(links)] = 1.0
    return mu


def line_graph_cut(lg: LineGraph, links: LinkSet) -> float:
    """Weight of line-graph edges leaving ``links``: sum of ``E_kl`` for k in, l out."""
    mu = _membership(lg, links)
    return float(mu @ (lg.weighted_adjacency @ (1.0 - mu)))


def line_graph_internal(lg: LineGraph, links: LinkSet) -> float:
    """Quadratic form ``mu.T @ E @ mu`` including the diagonal."""
    mu = _membership(lg, links)
    return float(mu @ (lg.weighted_adjacency @ mu))
