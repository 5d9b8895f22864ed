"""
Radial Shells of the AWGN Observation Space
Scaled-Chi radius law, shell partitions, the tilted sampling pmf and shell sampling

The norm of an n-dimensional N(0, sigma^2 I) vector follows a Chi law with
n degrees of freedom and scale sigma. Shells are equal-width radius bands
covering all but epsilon of that law.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special, stats

logger = logging.getLogger('wbpdecode')

BISECTION_MAXITER = 200
MASS_TOLERANCE = 1e-9


class PartitionError(ValueError):
    """The radius range could not be bracketed by bisection."""


class DegenerateProfileError(ValueError):
    """Every sqrt(theta_l) * P_l is zero; the tilted pmf does not exist."""


def chi_pdf(r, n: int, sigma: float):
    """
    Density of the noise norm: r^(n-1) exp(-r^2 / 2 sigma^2) / (2^(n/2-1) sigma^n Gamma(n/2)).
    """
    if np.any(np.asarray(r) < 0):
        raise ValueError("Radius must be nonnegative")
    return stats.chi.pdf(r, n, scale=sigma)


def chi_cdf(r, n: int, sigma: float):
    """Regularized lower incomplete gamma P(n/2, r^2 / 2 sigma^2)."""
    r = np.asarray(r, dtype=np.float64)
    return special.gammainc(0.5 * n, r * r / (2.0 * sigma * sigma))


def chi_sf(r, n: int, sigma: float):
    """Upper tail 1 - chi_cdf, computed without cancellation."""
    r = np.asarray(r, dtype=np.float64)
    return special.gammaincc(0.5 * n, r * r / (2.0 * sigma * sigma))


@dataclass(frozen=True)
class ShellPartition:
    """
    M equal-width shells [r_{l}, r_{l+1}] for l = 0..M-1 (0-based).
    """

    n: int
    sigma: float
    count: int
    r_min: float
    r_max: float

    def __post_init__(self):
        if self.n < 1 or self.count < 1:
            raise ValueError(f"Need n >= 1 and at least one shell, got n={self.n}, M={self.count}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.r_min < self.r_max:
            raise ValueError(f"Radius range [{self.r_min}, {self.r_max}] is empty or negative")

    @property
    def width(self) -> float:
        return (self.r_max - self.r_min) / self.count

    @cached_property
    def boundaries(self) -> np.ndarray:
        edges = self.r_min + self.width * np.arange(self.count + 1)
        edges[-1] = self.r_max
        edges.setflags(write=False)
        return edges

    @cached_property
    def centers(self) -> np.ndarray:
        mids = 0.5 * (self.boundaries[:-1] + self.boundaries[1:])
        mids.setflags(write=False)
        return mids

    def shell_of(self, radius: float) -> Optional[int]:
        """Index of the shell containing radius, or None outside [r_min, r_max]."""
        if radius < self.r_min or radius > self.r_max:
            return None
        index = int(np.searchsorted(self.boundaries, radius, side='right')) - 1
        return min(max(index, 0), self.count - 1)

    def shell_indices(self, radii: np.ndarray) -> np.ndarray:
        """Vectorised shell_of; radii outside the range map to -1."""
        radii = np.asarray(radii, dtype=np.float64)
        index = np.searchsorted(self.boundaries, radii, side='right') - 1
        index = np.clip(index, 0, self.count - 1)
        outside = (radii < self.r_min) | (radii > self.r_max)
        return np.where(outside, -1, index)

    def truncated_cdf(self, r) -> np.ndarray:
        """Chi CDF conditioned on [r_min, r_max]."""
        lo = chi_cdf(self.r_min, self.n, self.sigma)
        hi = chi_cdf(self.r_max, self.n, self.sigma)
        r = np.clip(np.asarray(r, dtype=np.float64), self.r_min, self.r_max)
        return (chi_cdf(r, self.n, self.sigma) - lo) / (hi - lo)


def _quantile(q: float, n: int, sigma: float, upper: bool) -> float:
    """Radius whose lower (or upper) tail probability equals q."""
    def f(r):
        if upper:
            return float(chi_sf(r, n, sigma)) - q
        return float(chi_cdf(r, n, sigma)) - q

    def bracketed(r):
        return f(r) < 0 if upper else f(r) > 0

    hi = sigma * (np.sqrt(n) + 1.0)
    while not bracketed(hi):
        hi *= 2.0
        if hi > 1e12 * sigma:
            raise PartitionError(f"Cannot bracket the {q} tail quantile for n={n}, sigma={sigma}")
    try:
        return float(optimize.bisect(f, 0.0, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps,
                                     maxiter=BISECTION_MAXITER))
    except RuntimeError as e:
        logger.error(f"Bisection failed for n={n}, sigma={sigma}, q={q}: {e}")
        raise PartitionError(str(e)) from e


def build_partition(n: int, sigma: float, count: int, epsilon: float) -> ShellPartition:
    """
    Equal-width shells over [r_min, r_max] with Pr(r outside) < epsilon.

    Args:
        n: Code length (noise dimension)
        sigma: Noise standard deviation
        count: Number of shells M (>= 2)
        epsilon: Total tail probability left outside, in (0, 0.1)

    Returns:
        ShellPartition
    """
    if count < 2:
        raise ValueError(f"Need at least 2 shells, got {count}")
    if not 0.0 < epsilon < 0.1:
        raise ValueError(f"epsilon must lie in (0, 0.1), got {epsilon}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r_min = _quantile(0.5 * epsilon, n, sigma, upper=False)
    r_max = _quantile(0.5 * epsilon, n, sigma, upper=True)
    partition = ShellPartition(n=n, sigma=sigma, count=count, r_min=r_min, r_max=r_max)
    logger.debug(f"Shell range n={n} sigma={sigma:.6g}: [{r_min:.6g}, {r_max:.6g}], dr={partition.width:.6g}")
    return partition


@dataclass(frozen=True, eq=False)
class RadialPmf:
    """Probability masses over the shells of one partition."""

    masses: np.ndarray
    partition: ShellPartition

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.float64)
        if masses.shape != (self.partition.count,):
            raise ValueError(f"Expected {self.partition.count} masses, got shape {masses.shape}")
        if (masses < 0).any() or not np.isfinite(masses).all():
            raise ValueError("Shell masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"Shell masses sum to {masses.sum()!r}, not 1")
        masses.setflags(write=False)
        object.__setattr__(self, 'masses', masses)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.masses > 0)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Running mass, pinned to 1 from the last supported shell on."""
        cdf = np.cumsum(self.masses)
        cdf[self.support[-1]:] = 1.0
        return cdf


def shell_masses(partition: ShellPartition) -> RadialPmf:
    """
    Chi mass of every shell, renormalized to the truncated range.

    Shells below the median use lower-tail differences, the rest upper-tail
    differences, so neither side loses digits.
    """
    b = partition.boundaries
    lower = chi_cdf(b, partition.n, partition.sigma)
    upper = chi_sf(b, partition.n, partition.sigma)
    raw = np.where(lower[:-1] < 0.5, lower[1:] - lower[:-1], upper[:-1] - upper[1:])
    raw = np.clip(raw, 0.0, None)
    total = raw.sum()
    if total <= 0:
        raise PartitionError(f"Partition [{partition.r_min}, {partition.r_max}] carries no Chi mass")
    return RadialPmf(masses=raw / total, partition=partition)


def is_pmf(base: RadialPmf, theta) -> RadialPmf:
    """
    Tilted sampling pmf P*_l = sqrt(theta_l) P_l / sum_j sqrt(theta_j) P_j.

    Args:
        base: Untilted Chi masses P
        theta: Per-shell error ratios (array or ThetaProfile)

    Returns:
        RadialPmf on the same partition

    Raises:
        DegenerateProfileError: when every sqrt(theta_l) * P_l is zero
    """
    theta = np.asarray(getattr(theta, 'theta', theta), dtype=np.float64)
    if theta.shape != base.masses.shape:
        raise ValueError(f"theta has {theta.size} entries, partition has {base.masses.size} shells")
    if (theta < 0).any() or (theta > 1).any():
        raise ValueError("theta entries must lie in [0, 1]")
    numerator = np.sqrt(theta) * base.masses
    total = numerator.sum()
    if total <= 0:
        raise DegenerateProfileError("Tilted pmf is undefined: every theta_l * P_l is zero")
    return RadialPmf(masses=numerator / total, partition=base.partition)


def sample_noise(pmf: RadialPmf, rng: np.random.Generator,
                 size: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw noise vectors shell-first.

    The shell comes from the pmf, the radius is uniform inside that shell and
    the direction is a normalized standard Gaussian vector.

    Returns:
        (z, shell_index): shapes (n,) and () for size=None, else (size, n) and (size,)
    """
    count = 1 if size is None else size
    partition = pmf.partition
    shells = np.searchsorted(pmf.cumulative, rng.random(count), side='right')
    shells = np.minimum(shells, partition.count - 1)
    lo = partition.boundaries[shells]
    hi = partition.boundaries[shells + 1]
    radii = lo + rng.random(count) * (hi - lo)
    directions = rng.standard_normal((count, partition.n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    z = radii[:, None] * directions
    if size is None:
        return z[0], shells[0]
    return z, shells
