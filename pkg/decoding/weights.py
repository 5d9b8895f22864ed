"""
WBP Weight Sets
Trainable weights of the unrolled decoder and their binary file format

File layout (little-endian):
    8 bytes   magic b'WBPW\\x00\\x01\\x00\\x00'
    3 x int64 L, n, E
    float64   vn_channel (L*n), vn_edge (L*E), out_channel (L*n), out_edge (L*E)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .tanner import TannerGraph

logger = logging.getLogger('wbpdecode')

MAGIC = b'WBPW\x00\x01\x00\x00'
FIELDS = ('vn_channel', 'vn_edge', 'out_channel', 'out_edge')


@dataclass
class WeightSet:
    """
    Per-layer weights: vn_channel and out_channel are (L, n); vn_edge and
    out_edge are (L, E), indexed by Tanner edge id.
    """

    vn_channel: np.ndarray
    vn_edge: np.ndarray
    out_channel: np.ndarray
    out_edge: np.ndarray

    def __post_init__(self):
        for name in FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        L, n = self.vn_channel.shape
        E = self.vn_edge.shape[1]
        expected = {'vn_channel': (L, n), 'vn_edge': (L, E), 'out_channel': (L, n), 'out_edge': (L, E)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @classmethod
    def ones(cls, graph: TannerGraph, layers: int) -> 'WeightSet':
        """Unit weights: the decoder computes plain BP."""
        if layers < 1:
            raise ValueError(f"Need at least one layer, got {layers}")
        n, E = graph.n_vars, graph.num_edges
        return cls(np.ones((layers, n)), np.ones((layers, E)),
                   np.ones((layers, n)), np.ones((layers, E)))

    @classmethod
    def zeros_like(cls, other: 'WeightSet') -> 'WeightSet':
        return cls(*(np.zeros_like(a) for a in other.arrays()))

    @property
    def shape(self) -> Tuple[int, int, int]:
        """(L, n, E)"""
        return (self.vn_channel.shape[0], self.vn_channel.shape[1], self.vn_edge.shape[1])

    @property
    def layers(self) -> int:
        return self.shape[0]

    def arrays(self) -> Tuple[np.ndarray, ...]:
        return tuple(getattr(self, name) for name in FIELDS)

    def copy(self):
        return type(self)(*(a.copy() for a in self.arrays()))

    def check_compatible(self, graph: TannerGraph, layers: int):
        expected = (layers, graph.n_vars, graph.num_edges)
        if self.shape != expected:
            raise ValueError(f"Weights dimensioned (L, n, E)={self.shape}, decoder needs {expected}")

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    def to_vector(self) -> np.ndarray:
        """All entries concatenated in declared field order."""
        return np.concatenate([a.ravel() for a in self.arrays()])

    @classmethod
    def from_vector(cls, vector: np.ndarray, shape: Tuple[int, int, int]):
        L, n, E = shape
        sizes = (L * n, L * E, L * n, L * E)
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != sum(sizes):
            raise ValueError(f"Vector of {vector.size} entries does not fit (L, n, E)={shape}")
        parts = np.split(vector, np.cumsum(sizes)[:-1])
        return cls(parts[0].reshape(L, n), parts[1].reshape(L, E),
                   parts[2].reshape(L, n), parts[3].reshape(L, E))

    def to_bytes(self) -> bytes:
        header = np.asarray(self.shape, dtype='<i8').tobytes()
        return MAGIC + header + self.to_vector().astype('<f8').tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, source: str = '<bytes>'):
        if len(data) < len(MAGIC) + 24 or data[:len(MAGIC)] != MAGIC:
            raise ValueError(f"{source}: not a weight file (bad magic)")
        L, n, E = (int(x) for x in np.frombuffer(data, dtype='<i8', count=3, offset=len(MAGIC)))
        if min(L, n, E) < 1:
            raise ValueError(f"{source}: invalid header (L, n, E)=({L}, {n}, {E})")
        body = np.frombuffer(data, dtype='<f8', offset=len(MAGIC) + 24)
        try:
            return cls.from_vector(body.astype(np.float64), (L, n, E))
        except ValueError as e:
            raise ValueError(f"{source}: {e}") from e

    def save(self, path: Union[str, Path]):
        path = Path(path)
        path.write_bytes(self.to_bytes())
        logger.debug(f"Wrote weights (L, n, E)={self.shape} to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]):
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            logger.error(f"Cannot read weight file {path}: {e}")
            raise
        return cls.from_bytes(data, source=str(path))


class GradientSet(WeightSet):
    """Gradient of the loss with respect to every WeightSet entry."""

    def max_abs(self) -> float:
        return float(max(np.abs(a).max() for a in self.arrays()))
