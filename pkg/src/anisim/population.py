"""Deterministic population dynamics and closed-form Gaussian integrals.

These are the theory-side oracles: the Hermite-series correlation drift, the
simplified one-dimensional recursion m <- m + eta_tilde * m^{k*-1}, its ODE
escape-time estimate, the perpendicular (G2) expectation, and the two
Gaussian integral identities the derivation rests on.  Every sigma'-dependent
closed form below uses the step convention sigma'(x) = 1{x > 0} and has been
validated against the Monte-Carlo oracle rather than trusted from any
sign-convention constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, factorial, log, sqrt

import numpy as np

from .hermite import (
    HermiteCoeffs,
    gauss_hermite_nodes,
    hermite_scale_expand,
    synthesize,
)
from .sim_model import LinkFunction, SimInstance, drift_products

__all__ = [
    "PopulationParams",
    "population_params",
    "effective_eta_tilde",
    "paper_eta_tilde",
    "population_drift",
    "population_recursion",
    "escape_time_estimate",
    "g2_magnitude",
    "gauss_int1",
    "gauss_int2",
]

SQRT_2PI = sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PopulationParams:
    """Inputs of the population drift: series coefficients and geometry."""

    drift_coeffs: np.ndarray  # products b_l * c_l, index = power of m
    k_star: int
    eta_tilde: float
    lambda_: float
    lambda_prime: float


def effective_eta_tilde(inst: SimInstance, eta: float, cr: float) -> float:
    """Effective recursion rate matching a vanilla-SGD run on ``inst``.

    The per-step correlation gain is (eta/||Q^{1/2}w0||) * lambda * g(m) with
    g the drift series; to leading order g(m) ~ lead * m^{k*-1}, so with
    ||Q^{1/2}w0|| = cr * sqrt(lambda) the recursion rate is

        eta_tilde = eta * lead * sqrt(lambda) / cr.

    Uses the actual leading drift product, not a lower-bound constant.
    """
    prods = drift_products(inst.link)
    lead = abs(float(prods[inst.link.k_star - 1]))
    return eta * lead * sqrt(inst.stats.lambda_) / cr


def paper_eta_tilde(eta: float, lambda_: float, q_norm_w0: float, c: float = 1.0) -> float:
    """The schedule-side rate c * eta * lambda / (2 ||Q^{1/2}w0||).

    ``c`` is the (unspecified) drift-inequality constant; callers that want
    the rate matching an actual run should prefer :func:`effective_eta_tilde`,
    which uses the measured leading drift product instead.
    """
    return c * eta * lambda_ / (2.0 * q_norm_w0)


def population_params(inst: SimInstance, eta_tilde: float, truncation: int = 40) -> PopulationParams:
    return PopulationParams(
        drift_coeffs=drift_products(inst.link, truncation),
        k_star=inst.link.k_star,
        eta_tilde=eta_tilde,
        lambda_=inst.stats.lambda_,
        lambda_prime=inst.stats.lambda_prime,
    )


def population_drift(m: float, params: PopulationParams, truncation: int | None = None) -> float:
    """The aligned population gradient term lambda * sum_l b_l c_l m^l.

    This is the projection of the expected gradient onto the signal
    direction; the per-step correlation gain is this value scaled by
    eta / ||Q^{1/2}w_{t+1}||.  Links satisfying the drift-coefficient
    inequality in its literal orientation give a negative value.
    """
    coeffs = params.drift_coeffs
    if truncation is not None:
        coeffs = coeffs[: truncation + 1]
    return params.lambda_ * float(np.polynomial.polynomial.polyval(m, coeffs))


def population_recursion(
    m0: float,
    eta_tilde: float,
    k_star: int,
    max_steps: int,
    target: float = 0.5,
    record_every: int = 1,
):
    """Iterate m <- m + eta_tilde * m^{k*-1}, clipped at 1.

    Returns (trajectory, hit_time) where the trajectory holds every
    ``record_every``-th value starting from m0 and hit_time is the first
    step index with m >= target (None if not reached in max_steps).
    """
    if not 0.0 < m0 < 1.0:
        raise ValueError("m0 must be in (0, 1)")
    if not m0 < target <= 1.0:
        raise ValueError("target must be in (m0, 1]")
    power = k_star - 1
    m = m0
    trajectory = [m]
    hit = None
    for t in range(1, max_steps + 1):
        m = min(m + eta_tilde * m**power, 1.0)
        if t % record_every == 0:
            trajectory.append(m)
        if hit is None and m >= target:
            hit = t
            break
    return np.asarray(trajectory), hit


def escape_time_estimate(m0: float, eta_tilde: float, k_star: int, target: float = 0.5) -> float:
    """Escape time from the continuous-time limit m' = eta_tilde * m^{k*-1}."""
    if not 0.0 < m0 < target <= 1.0:
        raise ValueError("need 0 < m0 < target <= 1")
    if eta_tilde <= 0.0:
        raise ValueError("eta_tilde must be positive")
    if k_star == 1:
        return (target - m0) / eta_tilde
    if k_star == 2:
        return log(target / m0) / eta_tilde
    p = k_star - 2
    return (m0**-p - target**-p) / (p * eta_tilde)


def g2_magnitude(m: float, q_t: float, link: LinkFunction | HermiteCoeffs) -> float:
    """Closed form of the perpendicular expectation E[f(z*) sigma'(z_t) z*_perp].

    With z_t = m z* + sqrt(1-m^2) z_perp and z*_perp carrying correlation q_t
    to z_perp, conditioning on z* via the exponential identity gives

        q_t / sqrt(2 pi (2 p + 1)) * E f(Z / sqrt(2 p + 1)),
        p = m^2 / (2 (1 - m^2)),

    for the step sigma'.  The scaled expectation is evaluated exactly through
    the degree-0 term of the H_k(gamma x) expansion of each link coefficient.
    This term is O(m^{k*}): the source of the lambda' correction to the
    aligned drift.
    """
    if abs(m) >= 1.0:
        raise ValueError("|m| must be < 1")
    coeffs = link.coeffs if isinstance(link, LinkFunction) else link
    s = 1.0 / (1.0 - m * m)  # 2 p_t + 1
    gamma = sqrt(1.0 - m * m)
    scaled_mean = 0.0
    for k in range(len(coeffs)):
        a_k = coeffs[k]
        if a_k == 0.0 or k % 2 == 1:
            continue
        scaled_mean += a_k / sqrt(factorial(k)) * hermite_scale_expand(k, gamma)[0]
    return q_t / sqrt(2.0 * np.pi * s) * scaled_mean


def gauss_int1(p: float, x: float) -> float:
    """E_Y[ 1{p X + sqrt(1-p^2) Y > 0} * Y ] at X = x, step convention.

    Equals exp(-p^2 x^2 / (2 (1-p^2))) / sqrt(2 pi): at p = 0 this is
    E[Y 1{Y>0}] = 1/sqrt(2 pi), the constant pinned by the Monte-Carlo
    oracle (the +/-1 sign convention doubles it).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("p must be in [0, 1)")
    return exp(-(p * p) * (x * x) / (2.0 * (1.0 - p * p))) / SQRT_2PI


def gauss_int2(link_coeffs: HermiteCoeffs, c: float, quad_order: int = 200) -> float:
    """E_X[f(X) exp(-c X^2)] computed by two independent routes.

    The left route integrates f(x) exp(-c x^2) by Gauss-Hermite quadrature;
    the right applies the rescaling identity
    E[f(X) e^{-cX^2}] = E[f(X / sqrt(2c+1))] / sqrt(2c+1) through the
    degree-0 scale-expansion projection.  The two must agree to 1e-8; the
    agreed value is returned.
    """
    if c < 0.0:
        raise ValueError("c must be >= 0")
    s = 2.0 * c + 1.0
    gamma = 1.0 / sqrt(s)
    right = 0.0
    for k in range(len(link_coeffs)):
        a_k = link_coeffs[k]
        if a_k == 0.0 or k % 2 == 1:
            continue
        right += a_k / sqrt(factorial(k)) * hermite_scale_expand(k, gamma)[0]
    right /= sqrt(s)

    nodes, weights = gauss_hermite_nodes(max(quad_order, 4 * len(link_coeffs)))
    f = synthesize(link_coeffs)
    left = float(np.sum(weights * f(nodes) * np.exp(-c * nodes**2)))

    if abs(left - right) > 1e-8 * (1.0 + abs(right)):
        raise ArithmeticError(
            f"gauss_int2 routes disagree: quadrature {left!r} vs expansion {right!r}"
        )
    return right
