"""Correlated statistical query lower-bound construction.

The hard family behind the lower bound is nothing more than i.i.d. standard
Gaussian directions: in dimension d they are nearly orthogonal in the
Q-geometry, with the largest pairwise normalized correlation of order
v sqrt(log p) where v = min(||Q||_F / ||Q^{1/2}||_F^2, 1/sqrt(d)).  From the
maximum correlation one reads off the tolerance any correlational-query
algorithm needs (tau^2 <= eps^{k/2} for degree-k links) and, through the
tau ~ n^{-1/2} heuristic, a sample-complexity scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt

import numpy as np

from .covariance import CovarianceSpec

__all__ = [
    "CsqFamilyReport",
    "CsqBound",
    "SampleComplexity",
    "build_family",
    "csq_tolerance",
    "epsilon_bound",
    "sample_complexity_heuristic",
]

# Absolute constant of the family construction.  The pairwise bound comes
# from a Hanson-Wright / Gaussian tail union bound over ~q pairs whose
# bookkeeping is only pinned down "for a sufficiently large constant"; the
# union-bound calculation gives sqrt(2 log q) against sqrt(log(q v^{k/2})),
# a ratio below 2 throughout the regime of interest, so 2 is the smallest
# integer constant making the bound hold with high probability.
LEMMA_CONSTANT = 2.0

_SCAN_BLOCK = 256


@dataclass(frozen=True)
class CsqFamilyReport:
    """A sampled nearly-Q-orthogonal family and its measured correlations."""

    family_size: int
    dim: int
    max_pairwise_q_corr: float  # empirical eps-hat
    min_q_norm_sq: float  # min_i ||Q^{1/2} w_i||^2
    epsilon_bound: float | None  # theoretical eps at q = p^2, k = 2
    v: float  # min(||Q||_F / ||Q^{1/2}||_F^2, 1 / sqrt(d))
    corr_multiplier: float  # eps-hat / (v sqrt(log p)): the folded constant


@dataclass(frozen=True)
class CsqBound:
    """Theoretical tolerance bound for a query budget, or not-applicable."""

    v: float
    epsilon: float | None
    applicable: bool
    regime_frob_ok: bool  # ||Q^{1/2}||_F^2 >= ||Q||_F sqrt(log d)
    regime_logd_ok: bool  # ||Q||_F >= sqrt(log d)


@dataclass(frozen=True)
class SampleComplexity:
    """The tau = n^{-1/2} heuristic under both readings found in the text."""

    tau_sq: float
    n_tau2: float  # n = tau^-2   (tau^2 = 1/n)
    n_tau4: float  # n = tau^-4   (tau^2 = 1/sqrt(n))
    n_displayed: float  # log(d)^{k/2} d (||Q||_F / ||Q^{1/2}||_F^2)^{k/2}


def _v_ratio(spec: CovarianceSpec) -> float:
    return min(spec.frob_norm() / spec.trace(), 1.0 / sqrt(spec.d))


def build_family(spec: CovarianceSpec, p: int, rng: np.random.Generator) -> CsqFamilyReport:
    """Sample p i.i.d. N(0, I_d) vectors and scan all pairwise normalized
    Q-correlations with a running max over B x B tiles (no p x p matrix is
    materialized, so p = 10^4 stays feasible)."""
    if p < 2:
        raise ValueError("family size p must be >= 2")
    w = rng.standard_normal((p, spec.d))
    qw = spec.apply_q(w)
    q_norm_sq = np.einsum("ij,ij->i", w, qw)
    inv_norms = 1.0 / np.sqrt(q_norm_sq)

    max_corr = 0.0
    for s1 in range(0, p, _SCAN_BLOCK):
        e1 = min(s1 + _SCAN_BLOCK, p)
        for s2 in range(s1, p, _SCAN_BLOCK):
            e2 = min(s2 + _SCAN_BLOCK, p)
            grams = (w[s1:e1] @ qw[s2:e2].T) * np.multiply.outer(
                inv_norms[s1:e1], inv_norms[s2:e2]
            )
            if s1 == s2:
                np.fill_diagonal(grams, 0.0)
            max_corr = max(max_corr, float(np.abs(grams).max()))

    v = _v_ratio(spec)
    bound = epsilon_bound(spec, q_queries=p * p, k=2)
    return CsqFamilyReport(
        family_size=p,
        dim=spec.d,
        max_pairwise_q_corr=max_corr,
        min_q_norm_sq=float(q_norm_sq.min()),
        epsilon_bound=bound.epsilon,
        v=v,
        corr_multiplier=max_corr / (v * sqrt(log(p))),
    )


def csq_tolerance(epsilon: float, k: int) -> float:
    """The tolerance bound tau^2 <= epsilon^{k/2}."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must be in (0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    return epsilon ** (k / 2.0)


def epsilon_bound(
    spec: CovarianceSpec, q_queries: int, k: int, constant: float = LEMMA_CONSTANT
) -> CsqBound:
    """eps = C v sqrt(log(q v^{k/2})), or a not-applicable marker when the
    log argument does not exceed one.  The regime assumptions on Q's spectrum
    are evaluated and reported alongside."""
    if q_queries < 1:
        raise ValueError("q_queries must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    v = _v_ratio(spec)
    frob = spec.frob_norm()
    log_d = log(max(spec.d, 2))
    regime_frob_ok = spec.trace() >= frob * sqrt(log_d)
    regime_logd_ok = frob >= sqrt(log_d)
    arg = q_queries * v ** (k / 2.0)
    if arg <= 1.0:
        return CsqBound(v, None, False, regime_frob_ok, regime_logd_ok)
    return CsqBound(v, constant * v * sqrt(log(arg)), True, regime_frob_ok, regime_logd_ok)


def sample_complexity_heuristic(
    spec: CovarianceSpec, k: int, q_queries: int
) -> SampleComplexity:
    """Sample-complexity scale implied by the tolerance bound.

    The text uses both tau = n^{-1/2} and tau^2 = n^{-1/2}; both readings are
    reported, next to the displayed closed form in terms of Q's norms.
    """
    bound = epsilon_bound(spec, q_queries, k)
    if not bound.applicable:
        raise ValueError("epsilon bound not applicable for these parameters")
    tau_sq = csq_tolerance(bound.epsilon, k) if bound.epsilon <= 1.0 else 1.0
    ratio = spec.frob_norm() / spec.trace()
    log_d = log(max(spec.d, 2))
    return SampleComplexity(
        tau_sq=tau_sq,
        n_tau2=1.0 / tau_sq,
        n_tau4=1.0 / tau_sq**2,
        n_displayed=log_d ** (k / 2.0) * spec.d * ratio ** (k / 2.0),
    )
