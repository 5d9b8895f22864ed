"""
Theta Profile Diagnostics
Binary entropy of the error ratio and monotone-trend checks
"""
from typing import List, Tuple

import numpy as np
from scipy import special

from sampling.profiles import ThetaProfile


def theta_entropy(theta):
    """
    Binary entropy H(theta) in bits, with H(0) = H(1) = 0.

    Peaks at 1 for theta = 0.5, where a shell is most informative for training.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if (theta < 0).any() or (theta > 1).any():
        raise ValueError("theta must lie in [0, 1]")
    # entr(x) = -x ln x with entr(0) = 0
    bits = (special.entr(theta) + special.entr(1.0 - theta)) / np.log(2.0)
    return float(bits) if bits.ndim == 0 else bits


def theta_trend_violations(profile: ThetaProfile, z: float = 2.0) -> List[Tuple[int, int]]:
    """
    Consecutive visited shells (i, j), i < j, where theta drops by more than
    ``z`` binomial standard errors.

    Error ratios are expected to grow with the noise radius; an empty list
    means the profile is nondecreasing up to sampling noise.
    """
    visited = np.flatnonzero(profile.trials > 0)
    theta = profile.theta
    variance = np.zeros_like(theta)
    variance[visited] = theta[visited] * (1.0 - theta[visited]) / profile.trials[visited]
    violations = []
    for i, j in zip(visited[:-1], visited[1:]):
        drop = theta[i] - theta[j]
        if drop > 0 and drop > z * np.sqrt(variance[i] + variance[j]):
            violations.append((int(i), int(j)))
    return violations
