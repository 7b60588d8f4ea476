"""Monte-Carlo expectation oracle.

Plain sample-mean estimation over i.i.d. standard Gaussian draws, with a
standard error attached so callers can gate closed-form identities at a
stated number of standard errors.  This is the independent brute-force
route against which every analytic formula in the package is validated.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

__all__ = ["McEstimate", "estimate", "estimate_correlated"]

_CHUNK = 1 << 20


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    def within(self, value: float, n_sigma: float = 4.0) -> bool:
        """True if ``value`` lies within n_sigma standard errors of the mean."""
        return abs(self.mean - value) <= n_sigma * self.std_error


def _accumulate(values: np.ndarray, acc: list[float]) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("integrand produced non-finite values")
    acc[0] += values.size
    acc[1] += float(values.sum())
    acc[2] += float(np.square(values).sum())


def _finish(acc: list[float]) -> McEstimate:
    n, s, ss = acc
    mean = s / n
    var = max(ss / n - mean * mean, 0.0) * n / (n - 1)
    return McEstimate(mean=mean, std_error=sqrt(var / n), n_samples=int(n))


def estimate(g, n_samples: int, rng: np.random.Generator, dim: int = 1) -> McEstimate:
    """Sample mean and standard error of ``g`` over standard Gaussian draws.

    ``g`` must be vectorized: it receives an array of shape (chunk,) when
    dim == 1, else (chunk, dim), and returns one value per sample.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    acc = [0.0, 0.0, 0.0]
    remaining = n_samples
    while remaining > 0:
        chunk = min(remaining, _CHUNK)
        z = rng.standard_normal(chunk if dim == 1 else (chunk, dim))
        _accumulate(np.asarray(g(z), dtype=np.float64), acc)
        remaining -= chunk
    return _finish(acc)


def estimate_correlated(
    g, rho: float, n_samples: int, rng: np.random.Generator
) -> McEstimate:
    """Like :func:`estimate` for g(z, z') with corr(z, z') = rho.

    Correlated pairs are built as (z, rho*z + sqrt(1-rho^2) z') from two
    independent standard Gaussian streams.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if abs(rho) > 1.0:
        raise ValueError(f"|rho| must be <= 1, got {rho}")
    comp = sqrt(1.0 - rho * rho)
    acc = [0.0, 0.0, 0.0]
    remaining = n_samples
    while remaining > 0:
        chunk = min(remaining, _CHUNK)
        z1 = rng.standard_normal(chunk)
        z2 = rho * z1 + comp * rng.standard_normal(chunk)
        _accumulate(np.asarray(g(z1, z2), dtype=np.float64), acc)
        remaining -= chunk
    return _finish(acc)
