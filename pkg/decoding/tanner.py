"""
Tanner Graph
Dense edge indexing of a parity-check matrix for vectorised message passing
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy import sparse

from codes.matrix import ParityCheckMatrix


@dataclass(frozen=True)
class TannerGraph:
    """
    Bipartite VN/CN graph with edges numbered 0..E-1.

    Edges are enumerated check by check, variables ascending, so every
    check's edge list is contiguous and every variable's edge list is sorted
    by check index.
    """

    n_vars: int
    n_checks: int
    edge_var: np.ndarray
    edge_check: np.ndarray
    var_edges: Tuple[Tuple[int, ...], ...]
    check_edges: Tuple[Tuple[int, ...], ...]

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.shape[0])

    @cached_property
    def _var_incidence(self) -> sparse.csr_matrix:
        # (n_vars, E); row v sums the edges of variable v in edge order
        data = np.ones(self.num_edges)
        return sparse.csr_matrix(
            (data, (self.edge_var, np.arange(self.num_edges))),
            shape=(self.n_vars, self.num_edges),
        )

    @cached_property
    def check_table(self) -> np.ndarray:
        """(n_checks, max_check_degree) edge ids, padded with E."""
        width = max(len(edges) for edges in self.check_edges)
        table = np.full((self.n_checks, width), self.num_edges, dtype=np.int64)
        for c, edges in enumerate(self.check_edges):
            table[c, :len(edges)] = edges
        return table

    @cached_property
    def check_table_mask(self) -> np.ndarray:
        return self.check_table < self.num_edges

    def sum_at_variables(self, edge_values: np.ndarray) -> np.ndarray:
        """Per-variable sums of (B, E) edge values -> (B, n_vars)."""
        return np.asarray(self._var_incidence @ edge_values.T).T

    def gather_checks(self, edge_values: np.ndarray, pad: float = 1.0) -> np.ndarray:
        """(B, E) -> (B, n_checks, max_degree), padded entries set to ``pad``."""
        batch = edge_values.shape[0]
        padded = np.concatenate([edge_values, np.full((batch, 1), pad)], axis=1)
        return padded[:, self.check_table]

    def scatter_checks(self, table_values: np.ndarray) -> np.ndarray:
        """Inverse of gather_checks: (B, n_checks, max_degree) -> (B, E)."""
        out = np.empty((table_values.shape[0], self.num_edges))
        out[:, self.check_table[self.check_table_mask]] = table_values[:, self.check_table_mask]
        return out


def build_tanner(pcm: ParityCheckMatrix) -> TannerGraph:
    """One edge per nonzero entry of H."""
    edge_var = []
    edge_check = []
    check_edges = []
    var_edges = [[] for _ in range(pcm.n)]
    for c, row in enumerate(pcm.rows):
        ids = []
        for v in row:
            e = len(edge_var)
            edge_var.append(v)
            edge_check.append(c)
            var_edges[v].append(e)
            ids.append(e)
        check_edges.append(tuple(ids))

    edge_var = np.asarray(edge_var, dtype=np.int64)
    edge_check = np.asarray(edge_check, dtype=np.int64)
    edge_var.setflags(write=False)
    edge_check.setflags(write=False)
    return TannerGraph(
        n_vars=pcm.n,
        n_checks=pcm.m,
        edge_var=edge_var,
        edge_check=edge_check,
        var_edges=tuple(tuple(edges) for edges in var_edges),
        check_edges=tuple(check_edges),
    )


def exclusive_products(table: np.ndarray) -> np.ndarray:
    """
    For every position j along the last axis, the product of all other
    entries. Prefix/suffix cumulative products, no division.
    """
    prefix = np.ones_like(table)
    suffix = np.ones_like(table)
    prefix[..., 1:] = np.cumprod(table[..., :-1], axis=-1)
    suffix[..., :-1] = np.cumprod(table[..., :0:-1], axis=-1)[..., ::-1]
    return prefix * suffix
