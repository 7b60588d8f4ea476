"""Single index model data generation.

Labels are produced as y = f(<x, w*/||Q^{1/2}w*||>) with x ~ N(0, Q); the
normalization makes the latent projection z* exactly standard normal, so the
link f is a function of a standard Gaussian.  Links are normalized to mean
zero and unit second moment and carry their information exponent k*, the
smallest degree with a nonzero Hermite coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt
from typing import Callable

import numpy as np

from .covariance import AlignmentStats, CovarianceSpec
from .hermite import (
    HermiteCoeffs,
    hermite_eval,
    information_exponent,
    step_coeffs,
    sign_coeffs,
    synthesize,
    xf_coeffs,
)

__all__ = [
    "LinkFunction",
    "SimInstance",
    "CoeffCheck",
    "normalize_link",
    "hermite_link",
    "sign_link",
    "link_from_config",
    "make_instance",
    "generate_sample",
    "generate_batch",
    "check_assumption_coeff",
]

LINK_COEFF_DEGREE = 40  # truncation for coefficient vectors of non-polynomial links


@dataclass(frozen=True)
class LinkFunction:
    """Normalized link: coefficients, information exponent, and evaluator.

    ``coeffs`` holds orthonormal Hermite coefficients with a_0 = 0 and
    sum a_k^2 = 1 for links synthesized from a finite coefficient vector.
    For closed-form links with slowly decaying expansions (sign), the
    evaluator is exact and the stored truncation carries slightly less than
    unit mass; ``complete`` records which case applies.
    """

    coeffs: HermiteCoeffs
    k_star: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    complete: bool = True
    bounded: bool = field(default=False)

    def __post_init__(self) -> None:
        a = self.coeffs.coeffs
        if abs(a[0]) > 1e-8:
            raise ValueError(f"link must have zero mean, got a_0 = {a[0]}")
        mass = float(np.sum(a * a))
        if self.complete and abs(mass - 1.0) > 1e-6:
            raise ValueError(f"link must have unit second moment, got {mass}")
        if not self.complete and mass > 1.0 + 1e-6:
            raise ValueError(f"coefficient mass exceeds one: {mass}")
        if self.k_star != information_exponent(self.coeffs):
            raise ValueError("k_star inconsistent with coefficients")

    def __call__(self, z):
        return self.evaluator(z)


def normalize_link(raw: HermiteCoeffs) -> LinkFunction:
    """Zero the mean, rescale to unit second moment, detect k*."""
    a = np.asarray(raw.coeffs).copy()
    a[0] = 0.0
    norm = np.linalg.norm(a)
    if norm < 1e-12:
        raise ValueError("degenerate link: no coefficient of degree >= 1")
    a /= norm
    coeffs = HermiteCoeffs(a)
    return LinkFunction(
        coeffs=coeffs,
        k_star=information_exponent(coeffs),
        evaluator=synthesize(coeffs),
        name="coeffs",
    )


def hermite_link(degree: int) -> LinkFunction:
    """The link H_k / sqrt(k!): unit norm, information exponent k, unbounded."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    a = np.zeros(degree + 1)
    a[degree] = 1.0
    scale = 1.0 / sqrt(factorial(degree))

    def evaluator(z):
        return hermite_eval(degree, z) * scale

    return LinkFunction(
        coeffs=HermiteCoeffs(a),
        k_star=degree,
        evaluator=evaluator,
        name=f"hermite_{degree}",
    )


def sign_link(max_degree: int = LINK_COEFF_DEGREE) -> LinkFunction:
    """The sign link: bounded, exact evaluator, information exponent 1."""
    coeffs = sign_coeffs(max_degree)
    return LinkFunction(
        coeffs=coeffs,
        k_star=1,
        evaluator=np.sign,
        name="sign",
        complete=False,
        bounded=True,
    )


def link_from_config(config: dict) -> LinkFunction:
    """Build a link from its JSON form: hermite / sign / explicit coefficients."""
    kind = config.get("type")
    if kind == "hermite":
        return hermite_link(int(config["degree"]))
    if kind == "sign":
        return sign_link()
    if kind == "coeffs":
        return normalize_link(HermiteCoeffs(np.asarray(config["values"], dtype=np.float64)))
    raise ValueError(f"unknown link type: {kind!r}")


@dataclass(frozen=True)
class SimInstance:
    """A fully specified data generator: covariance, target direction, link."""

    cov: CovarianceSpec
    w_star: np.ndarray
    link: LinkFunction
    stats: AlignmentStats

    @property
    def d(self) -> int:
        return self.cov.d

    @property
    def q_norm_w_star(self) -> float:
        return sqrt(self.stats.lambda_)


def make_instance(cov: CovarianceSpec, link: LinkFunction, w_star: np.ndarray) -> SimInstance:
    w_star = np.asarray(w_star, dtype=np.float64)
    norm = np.linalg.norm(w_star)
    if abs(norm - 1.0) > 1e-12:
        w_star = w_star / norm
    w_star.setflags(write=False)
    return SimInstance(cov=cov, w_star=w_star, link=link, stats=cov.alignment_stats(w_star))


def generate_sample(inst: SimInstance, rng: np.random.Generator):
    """One draw (x, y, z*) with x ~ N(0, Q), z* ~ N(0, 1), y = f(z*)."""
    x = inst.cov.sample(rng)
    z_star = float(x @ inst.w_star) / inst.q_norm_w_star
    return x, float(inst.link(z_star)), z_star


def generate_batch(inst: SimInstance, rng: np.random.Generator, n: int):
    """Batch form of :func:`generate_sample`: (X, y, z*) with X of shape (n, d)."""
    x = inst.cov.sample(rng, n)
    z_star = (x @ inst.w_star) / inst.q_norm_w_star
    return x, inst.link(z_star), z_star


@dataclass(frozen=True)
class CoeffCheck:
    """Outcome of the drift-coefficient inequality check.

    ``sign`` is +1 if the link itself satisfies the inequality
    sum_l b_l c_l x^l <= -c_hat x^{k*-1} on (0, gamma'], -1 if the flipped
    link -f does, 0 if neither.  ``c_hat`` is the grid minimum of
    -g(x)/x^{k*-1} for the satisfying sign (negative when the check fails).
    """

    holds: bool
    c_hat: float
    sign: int


def drift_products(link: LinkFunction, truncation: int = LINK_COEFF_DEGREE) -> np.ndarray:
    """Products b_l * c_l of the step and x*f(x) expansions, l = 0..truncation.

    These are the coefficients of the power series expressing the population
    correlation drift E[z* f(z*) sigma'(z_t)] = sum_l b_l c_l m^l in the
    correlation m between the latent projections.
    """
    c = xf_coeffs(link.coeffs).coeffs
    length = min(truncation + 1, c.size)
    b = step_coeffs(length - 1).coeffs
    out = np.zeros(truncation + 1)
    out[:length] = b[:length] * c[:length]
    return out


def check_assumption_coeff(
    link: LinkFunction, gamma_prime: float, grid_points: int = 256
) -> CoeffCheck:
    """Check the drift-coefficient inequality on a uniform grid over (0, gamma'].

    Both the link and its negation are tested because the inequality only
    ever holds up to a sign: flipping f flips every c_l.  The satisfying
    sign is reported so callers know which orientation of the link drives
    the correlation up rather than down.
    """
    if not 0.0 < gamma_prime <= 1.0:
        raise ValueError("gamma_prime must be in (0, 1]")
    prods = drift_products(link)
    xs = np.linspace(gamma_prime / grid_points, gamma_prime, grid_points)
    series = np.polynomial.polynomial.polyval(xs, prods)
    lead = xs ** (link.k_star - 1)
    best = CoeffCheck(holds=False, c_hat=float(np.min(-series / lead)), sign=0)
    for sign in (1, -1):
        c_hat = float(np.min(-sign * series / lead))
        if c_hat > 0.0 and not best.holds:
            best = CoeffCheck(holds=True, c_hat=c_hat, sign=sign)
    return best
