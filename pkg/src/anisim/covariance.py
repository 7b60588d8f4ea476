"""Structured covariance models with fast Q and Q^{1/2} application.

Four variants are supported: identity, spiked (isotropic plus one amplified
direction), diagonal, and dense.  All are normalized at construction so the
operator norm is exactly one; the applied rescaling factor is kept on the
spec for reporting.  Spiked and diagonal variants store spectra rather than
d x d matrices, so applying Q or Q^{1/2} costs O(d) and experiments at
d = 10^4 stay cheap.  Dense exists for small-d cross-validation.

The Q-geometry statistics used throughout the learning analysis (the
alignment ratio ||Q^{1/2}w*|| / ||Q^{1/2}||_F, the typical correlation at
random initialization, and the lambda / lambda' decomposition of Q w*) are
computed by :meth:`CovarianceSpec.alignment_stats`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

__all__ = [
    "AlignmentStats",
    "CovarianceSpec",
    "Identity",
    "Spiked",
    "Diagonal",
    "Dense",
    "covariance_from_config",
]


@dataclass(frozen=True)
class AlignmentStats:
    """Alignment statistics of (Q, w*) entering schedules and diagnostics."""

    theta_ratio: float  # ||Q^{1/2}w*|| / ||Q^{1/2}||_F
    typical_m0: float  # ||Qw*|| / (||Q^{1/2}w*|| ||Q^{1/2}||_F)
    lambda_: float  # <Qw*, w*> = ||Q^{1/2}w*||^2
    lambda_prime: float  # sqrt(||Qw*||^2 - ||Q^{1/2}w*||^4)
    trace_q: float  # ||Q^{1/2}||_F^2
    frob_q: float  # ||Q||_F


class CovarianceSpec:
    """Base class: a PSD matrix Q with ||Q|| = 1 and structured fast paths."""

    d: int
    normalization_scale: float = 1.0

    def apply_q(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_q_sqrt(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def trace(self) -> float:
        raise NotImplementedError

    def frob_norm(self) -> float:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.d:
            raise ValueError(f"dimension mismatch: expected {self.d}, got {v.shape[-1]}")
        return v

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        """Draw x ~ N(0, Q) as Q^{1/2} g with g standard Gaussian."""
        shape = self.d if n is None else (n, self.d)
        return self.apply_q_sqrt(rng.standard_normal(shape))

    def q_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """<u, v>_Q = u^T Q v."""
        u = self._check_dim(u)
        v = self._check_dim(v)
        return float(u @ self.apply_q(v))

    def q_norm(self, v: np.ndarray) -> float:
        """||Q^{1/2} v||."""
        v = self._check_dim(v)
        return sqrt(max(float(v @ self.apply_q(v)), 0.0))

    def alignment_stats(self, w_star: np.ndarray) -> AlignmentStats:
        """All six alignment statistics for a unit vector w*."""
        w_star = self._check_dim(w_star)
        norm = np.linalg.norm(w_star)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"w_star must be a unit vector, got norm {norm}")
        qw = self.apply_q(w_star)
        lam = float(w_star @ qw)
        qw_norm_sq = float(qw @ qw)
        lam_prime = sqrt(max(qw_norm_sq - lam * lam, 0.0))
        trace_q = self.trace()
        return AlignmentStats(
            theta_ratio=sqrt(lam / trace_q),
            typical_m0=sqrt(qw_norm_sq) / (sqrt(lam) * sqrt(trace_q)),
            lambda_=lam,
            lambda_prime=lam_prime,
            trace_q=trace_q,
            frob_q=self.frob_norm(),
        )


class Identity(CovarianceSpec):
    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = int(d)

    def apply_q(self, v):
        return self._check_dim(v)

    def apply_q_sqrt(self, v):
        return self._check_dim(v)

    def trace(self) -> float:
        return float(self.d)

    def frob_norm(self) -> float:
        return sqrt(self.d)

    def to_config(self) -> dict:
        return {"type": "identity", "d": self.d}

    def __repr__(self) -> str:
        return f"Identity(d={self.d})"


class Spiked(CovarianceSpec):
    """Q = (I + kappa * theta theta^T) / (1 + kappa), top eigenvalue 1 along theta."""

    def __init__(self, d: int, kappa: float, theta: np.ndarray):
        if d < 1:
            raise ValueError("d must be >= 1")
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (d,):
            raise ValueError(f"theta must have shape ({d},)")
        norm = np.linalg.norm(theta)
        if norm == 0.0:
            raise ValueError("theta must be nonzero")
        theta = theta / norm
        theta.setflags(write=False)
        self.d = int(d)
        self.kappa = float(kappa)
        self.theta = theta
        # eigenvalue along theta is 1, orthogonal eigenvalues are 1/(1+kappa)
        self._low = 1.0 / (1.0 + self.kappa)
        self._sqrt_low = 1.0 / sqrt(1.0 + self.kappa)

    def apply_q(self, v):
        v = self._check_dim(v)
        proj = v @ self.theta
        return self._low * v + (1.0 - self._low) * np.multiply.outer(proj, self.theta)

    def apply_q_sqrt(self, v):
        v = self._check_dim(v)
        proj = v @ self.theta
        return self._sqrt_low * v + (1.0 - self._sqrt_low) * np.multiply.outer(
            proj, self.theta
        )

    def trace(self) -> float:
        return 1.0 + (self.d - 1) * self._low

    def frob_norm(self) -> float:
        return sqrt(1.0 + (self.d - 1) * self._low**2)

    def to_config(self) -> dict:
        return {
            "type": "spiked",
            "d": self.d,
            "kappa": self.kappa,
            "theta": self.theta.tolist(),
        }

    def __repr__(self) -> str:
        return f"Spiked(d={self.d}, kappa={self.kappa})"


class Diagonal(CovarianceSpec):
    def __init__(self, spectrum: np.ndarray):
        spectrum = np.asarray(spectrum, dtype=np.float64)
        if spectrum.ndim != 1 or spectrum.size == 0:
            raise ValueError("spectrum must be a non-empty 1-D vector")
        if np.any(spectrum < 0):
            raise ValueError("spectrum must be nonnegative")
        top = float(spectrum.max())
        if top == 0.0:
            raise ValueError("spectrum must have a positive top eigenvalue")
        spectrum = spectrum / top
        spectrum.setflags(write=False)
        self.d = int(spectrum.size)
        self.spectrum = spectrum
        self.normalization_scale = top
        self._sqrt_spectrum = np.sqrt(spectrum)

    def apply_q(self, v):
        return self._check_dim(v) * self.spectrum

    def apply_q_sqrt(self, v):
        return self._check_dim(v) * self._sqrt_spectrum

    def trace(self) -> float:
        return float(self.spectrum.sum())

    def frob_norm(self) -> float:
        return float(np.linalg.norm(self.spectrum))

    def to_config(self) -> dict:
        return {
            "type": "diagonal",
            "spectrum": (self.spectrum * self.normalization_scale).tolist(),
        }

    def __repr__(self) -> str:
        return f"Diagonal(d={self.d})"


class Dense(CovarianceSpec):
    """Dense symmetric PSD matrix; square root precomputed by eigen-decomposition."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("matrix must be square")
        asym = float(np.abs(matrix - matrix.T).max())
        if asym > 1e-10:
            raise ValueError(f"matrix must be symmetric (max asymmetry {asym:.2e})")
        matrix = 0.5 * (matrix + matrix.T)
        eigvals, eigvecs = np.linalg.eigh(matrix)
        if eigvals[-1] <= 0.0:
            raise ValueError("matrix must have a positive top eigenvalue")
        if np.any(eigvals < -1e-10 * eigvals[-1]):
            raise ValueError(f"matrix is not PSD (min eigenvalue {eigvals[0]:.2e})")
        top = float(eigvals[-1])
        eigvals = np.clip(eigvals / top, 0.0, None)
        self.d = int(matrix.shape[0])
        self.normalization_scale = top
        self._eigvals = eigvals
        self._eigvecs = eigvecs
        self._q = (eigvecs * eigvals) @ eigvecs.T
        self._q_sqrt = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T

    def apply_q(self, v):
        return self._check_dim(v) @ self._q

    def apply_q_sqrt(self, v):
        return self._check_dim(v) @ self._q_sqrt

    def trace(self) -> float:
        return float(self._eigvals.sum())

    def frob_norm(self) -> float:
        return float(np.linalg.norm(self._eigvals))

    def to_config(self) -> dict:
        return {
            "type": "dense",
            "matrix": (self._q * self.normalization_scale).tolist(),
        }

    def __repr__(self) -> str:
        return f"Dense(d={self.d})"


def covariance_from_config(config: dict, theta: np.ndarray | None = None) -> CovarianceSpec:
    """Build a spec from its JSON dict form.

    ``theta`` supplies the spike direction when the config carries the
    symbolic values "w_star" or "random" (resolved by the caller).
    """
    kind = config.get("type")
    if kind == "identity":
        return Identity(int(config["d"]))
    if kind == "spiked":
        t = config.get("theta")
        if isinstance(t, str):
            if theta is None:
                raise ValueError(f'symbolic theta "{t}" requires a resolved direction')
            t = theta
        return Spiked(int(config["d"]), float(config["kappa"]), np.asarray(t, dtype=np.float64))
    if kind == "diagonal":
        return Diagonal(np.asarray(config["spectrum"], dtype=np.float64))
    if kind == "dense":
        return Dense(np.asarray(config["matrix"], dtype=np.float64))
    raise ValueError(f"unknown covariance type: {kind!r}")
