"""
Binary Linear Code Representation
Parity-check matrices, GF(2) elimination and brute-force code oracles
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

logger = logging.getLogger('wbpdecode')

# Brute-force enumeration guard (2^20 codewords)
MAX_ENUMERATION_DIMENSION = 20


class CodeTooLargeError(ValueError):
    """Raised when a brute-force oracle is asked to enumerate 2^k codewords with k > 20."""


@dataclass(frozen=True)
class ParityCheckMatrix:
    """
    Binary m x n parity-check matrix.

    Rows are kept as sorted tuples of 0-based variable indices; the dense
    matrix, bitset rows and column adjacency are derived once on demand.
    """

    n: int
    m: int
    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not (self.n > self.m >= 1):
            raise ValueError(f"Parity-check matrix needs n > m >= 1, got n={self.n}, m={self.m}")
        if len(self.rows) != self.m:
            raise ValueError(f"Expected {self.m} rows, got {len(self.rows)}")
        seen = set()
        for c, row in enumerate(self.rows):
            if not row:
                raise ValueError(f"Row {c} of the parity-check matrix is empty")
            if any(v < 0 or v >= self.n for v in row):
                raise ValueError(f"Row {c} references a column outside [0, {self.n})")
            if list(row) != sorted(set(row)):
                raise ValueError(f"Row {c} must list distinct, sorted column indices")
            seen.update(row)
        missing = sorted(set(range(self.n)) - seen)
        if missing:
            raise ValueError(f"Columns {missing} of the parity-check matrix are empty")

    @classmethod
    def from_dense(cls, matrix) -> 'ParityCheckMatrix':
        """Build from any 0/1 array-like of shape (m, n)."""
        H = np.asarray(matrix, dtype=np.uint8) & 1
        if H.ndim != 2:
            raise ValueError("Parity-check matrix must be 2-dimensional")
        m, n = H.shape
        rows = tuple(tuple(int(v) for v in np.flatnonzero(H[c])) for c in range(m))
        return cls(n=n, m=m, rows=rows)

    @cached_property
    def dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, row in enumerate(self.rows):
            H[c, list(row)] = 1
        H.setflags(write=False)
        return H

    @cached_property
    def bitsets(self) -> Tuple[int, ...]:
        return tuple(sum(1 << v for v in row) for row in self.rows)

    @cached_property
    def columns(self) -> Tuple[Tuple[int, ...], ...]:
        cols = [[] for _ in range(self.n)]
        for c, row in enumerate(self.rows):
            for v in row:
                cols[v].append(c)
        return tuple(tuple(col) for col in cols)

    @property
    def row_degrees(self) -> Tuple[int, ...]:
        return tuple(len(row) for row in self.rows)

    @property
    def column_degrees(self) -> Tuple[int, ...]:
        return tuple(len(col) for col in self.columns)

    @property
    def num_edges(self) -> int:
        return sum(self.row_degrees)


def rank_gf2(pcm: ParityCheckMatrix) -> int:
    """
    Rank of the parity-check matrix over GF(2).

    Gaussian elimination on integer bitsets, one pivot per column.
    """
    work = list(pcm.bitsets)
    rank = 0
    for col in range(pcm.n):
        pivot = None
        for r in range(rank, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(len(work)):
            if r != rank and (work[r] >> col) & 1:
                work[r] ^= work[rank]
        rank += 1
        if rank == len(work):
            break
    return rank


def syndrome(pcm: ParityCheckMatrix, bits) -> np.ndarray:
    """
    H * bits^T over GF(2).

    Accepts a single word of length n or a batch of shape (B, n).
    """
    word = np.asarray(bits, dtype=np.int64)
    if word.shape[-1] != pcm.n:
        raise ValueError(f"Word length {word.shape[-1]} does not match code length {pcm.n}")
    return ((word @ pcm.dense.T.astype(np.int64)) % 2).astype(np.uint8)


def null_space_basis(pcm: ParityCheckMatrix) -> np.ndarray:
    """
    Basis of the code (right null space of H over GF(2)), shape (k, n).

    Row-reduces H to reduced echelon form; each free column yields one basis
    vector.
    """
    R = pcm.dense.astype(np.uint8).copy()
    pivots = []
    row = 0
    for col in range(pcm.n):
        candidates = np.flatnonzero(R[row:, col]) if row < pcm.m else []
        if len(candidates) == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            R[[row, pivot]] = R[[pivot, row]]
        mask = R[:, col].astype(bool)
        mask[row] = False
        R[mask] ^= R[row]
        pivots.append(col)
        row += 1
        if row == pcm.m:
            break

    pivot_set = set(pivots)
    free = [c for c in range(pcm.n) if c not in pivot_set]
    basis = np.zeros((len(free), pcm.n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = R[r, f]
    return basis


def enumerate_codewords(pcm: ParityCheckMatrix) -> np.ndarray:
    """
    All 2^k codewords, shape (2^k, n), uint8.

    Codeword i is the GF(2) combination of basis vectors selected by the
    bits of i; index 0 is the all-zero word.
    """
    basis = null_space_basis(pcm)
    k = basis.shape[0]
    if k > MAX_ENUMERATION_DIMENSION:
        raise CodeTooLargeError(
            f"Refusing to enumerate 2^{k} codewords (limit k <= {MAX_ENUMERATION_DIMENSION})"
        )
    index = np.arange(1 << k, dtype=np.int64)
    selectors = ((index[:, None] >> np.arange(k)) & 1).astype(np.int64)
    return ((selectors @ basis.astype(np.int64)) % 2).astype(np.uint8)


def min_distance(pcm: ParityCheckMatrix) -> int:
    """Minimum Hamming weight over the nonzero codewords (brute force, k <= 20)."""
    codewords = enumerate_codewords(pcm)
    weights = codewords[1:].sum(axis=1)
    return int(weights.min())


@dataclass(frozen=True)
class CodeSpec:
    """A parity-check matrix plus the derived code parameters."""

    pcm: ParityCheckMatrix
    k: int
    d_min: Optional[int] = None
    name: str = field(default='code', compare=False)

    def __post_init__(self):
        if not 0 < self.k < self.pcm.n:
            raise ValueError(f"Code dimension k={self.k} gives a rate outside (0, 1)")
        if self.d_min is not None and self.d_min < 1:
            raise ValueError(f"d_min must be a positive integer, got {self.d_min}")

    @classmethod
    def from_pcm(cls, pcm: ParityCheckMatrix, d_min: Optional[int] = None,
                 name: str = 'code') -> 'CodeSpec':
        """
        Derive k from the GF(2) rank and, when not supplied, d_min by
        brute force (only when k <= 20).
        """
        k = pcm.n - rank_gf2(pcm)
        if d_min is None and k <= MAX_ENUMERATION_DIMENSION:
            d_min = min_distance(pcm)
        elif d_min is None:
            logger.info(f"d_min of {name} not computed (k={k} exceeds brute-force limit)")
        spec = cls(pcm=pcm, k=k, d_min=d_min, name=name)
        logger.debug(f"Loaded {name}: n={pcm.n} k={k} rate={spec.rate:.4f} d_min={d_min}")
        return spec

    @property
    def n(self) -> int:
        return self.pcm.n

    @property
    def rate(self) -> float:
        return self.k / self.pcm.n

    @property
    def r_pack(self) -> Optional[float]:
        """Packing radius sqrt(d_min) in the BPSK signal space."""
        if self.d_min is None:
            return None
        return math.sqrt(self.d_min)
