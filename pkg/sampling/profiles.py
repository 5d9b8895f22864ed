"""
Per-Shell Error Ratio Profiles
Theta profiles, the interpolate/extend/threshold fill rule and CSV persistence
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from core.csvio import read_csv, write_csv
from .shells import ShellPartition

logger = logging.getLogger('wbpdecode')

CSV_COLUMNS = ('shell_index', 'r_lo', 'r_hi', 'theta', 'errors', 'trials')


@dataclass(eq=False)
class ThetaProfile:
    """
    Error ratio theta_l per shell with the (errors, trials) counts behind it.

    Shell indices are 0-based.
    """

    theta: np.ndarray
    errors: np.ndarray = None
    trials: np.ndarray = None
    gamma: float = 1.0
    filled: bool = False

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        size = self.theta.shape[0]
        self.errors = np.zeros(size, dtype=np.int64) if self.errors is None else np.asarray(self.errors, dtype=np.int64)
        self.trials = np.zeros(size, dtype=np.int64) if self.trials is None else np.asarray(self.trials, dtype=np.int64)
        if self.theta.ndim != 1 or self.errors.shape != (size,) or self.trials.shape != (size,):
            raise ValueError("theta, errors and trials must be 1-D arrays of one length")
        if (self.theta < 0).any() or (self.theta > 1).any():
            raise ValueError("theta entries must lie in [0, 1]")
        if (self.errors < 0).any() or (self.errors > self.trials).any():
            raise ValueError("Counts must satisfy 0 <= errors <= trials")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")

    @classmethod
    def uniform(cls, count: int, gamma: float = 1.0) -> 'ThetaProfile':
        """theta = 1 on every shell (sampling pmf equals the Chi masses)."""
        return cls(theta=np.ones(count), gamma=gamma)

    @classmethod
    def from_counts(cls, errors, trials, gamma: float = 1.0) -> 'ThetaProfile':
        """Per-shell Monte Carlo ratio errors/trials; unvisited shells get 0."""
        errors = np.asarray(errors, dtype=np.int64)
        trials = np.asarray(trials, dtype=np.int64)
        theta = np.divide(errors, trials, out=np.zeros(errors.shape, dtype=np.float64), where=trials > 0)
        return cls(theta=theta, errors=errors, trials=trials, gamma=gamma)

    @property
    def count(self) -> int:
        return self.theta.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.theta > 0)

    def is_zero(self) -> bool:
        return not (self.theta > 0).any()


def fill_theta(theta_raw: Union[Sequence[float], ThetaProfile], partition: ShellPartition,
               gamma: float, tail_extend: int = 5) -> ThetaProfile:
    """
    Repair a raw Monte Carlo theta profile.

    Between the first and last nonzero shells theta is interpolated linearly
    in radius across the zero gaps; below the first nonzero shell its value is
    held for ``tail_extend`` shells, above the last nonzero shell its value is
    held up to the outermost shell. Entries above gamma are then zeroed.

    Args:
        theta_raw: Raw ratios (or a ThetaProfile whose counts are carried over)
        partition: Shell partition the ratios belong to
        gamma: Upper threshold in (0, 1]
        tail_extend: Number of shells the lower edge is extended by

    Returns:
        Filled ThetaProfile (all-zero when theta_raw is all-zero)
    """
    errors = trials = None
    if isinstance(theta_raw, ThetaProfile):
        errors, trials = theta_raw.errors, theta_raw.trials
        theta_raw = theta_raw.theta
    raw = np.asarray(theta_raw, dtype=np.float64)
    if raw.shape != (partition.count,):
        raise ValueError(f"theta has {raw.size} entries, partition has {partition.count} shells")
    if (raw < 0).any() or (raw > 1).any():
        raise ValueError("theta entries must lie in [0, 1]")
    if tail_extend < 0:
        raise ValueError(f"tail_extend must be nonnegative, got {tail_extend}")

    filled = np.zeros_like(raw)
    nonzero = np.flatnonzero(raw > 0)
    if nonzero.size:
        lo, hi = int(nonzero[0]), int(nonzero[-1])
        centers = partition.centers
        filled[lo:hi + 1] = np.interp(centers[lo:hi + 1], centers[nonzero], raw[nonzero])
        filled[max(0, lo - tail_extend):lo] = raw[lo]
        filled[hi + 1:] = raw[hi]
        filled[filled > gamma] = 0.0
    else:
        logger.debug("fill_theta: raw profile is all zero")

    return ThetaProfile(theta=filled, errors=errors, trials=trials, gamma=gamma, filled=True)


def write_theta_csv(destination: Union[str, Path, TextIO], profile: ThetaProfile,
                    partition: ShellPartition):
    """Columns: shell_index, r_lo, r_hi, theta, errors, trials."""
    if profile.count != partition.count:
        raise ValueError(f"Profile has {profile.count} shells, partition has {partition.count}")
    b = partition.boundaries
    rows = (
        (l, float(b[l]), float(b[l + 1]), float(profile.theta[l]),
         int(profile.errors[l]), int(profile.trials[l]))
        for l in range(profile.count)
    )
    write_csv(destination, CSV_COLUMNS, rows)


def read_theta_csv(path: Union[str, Path], gamma: float = 1.0,
                   expected_shells: Optional[int] = None) -> ThetaProfile:
    """Load a profile written by write_theta_csv; shell indices must be 0..M-1 in order."""
    rows = read_csv(path, CSV_COLUMNS)
    if expected_shells is not None and len(rows) != expected_shells:
        raise ValueError(f"{path}: theta file has {len(rows)} shells, expected {expected_shells}")
    try:
        indices = [int(r['shell_index']) for r in rows]
        theta = [float(r['theta']) for r in rows]
        errors = [int(r['errors']) for r in rows]
        trials = [int(r['trials']) for r in rows]
    except (TypeError, ValueError) as e:
        raise ValueError(f"{path}: malformed theta row: {e}") from e
    if indices != list(range(len(rows))):
        raise ValueError(f"{path}: shell_index column must run 0..{len(rows) - 1}")
    return ThetaProfile(theta=theta, errors=errors, trials=trials, gamma=gamma)
