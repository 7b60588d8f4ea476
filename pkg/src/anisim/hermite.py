"""Probabilists' Hermite polynomial algebra.

Everything in this module is phrased in terms of the probabilists' family

    H_0(x) = 1,   H_1(x) = x,   H_{n+1}(x) = x H_n(x) - n H_{n-1}(x),

which is orthogonal for the standard Gaussian measure with
E[H_n H_m] = delta_{nm} n!.

Coefficient convention
----------------------
All public coefficient vectors are *orthonormal* coefficients

    a_k = E[f(Z) H_k(Z)] / sqrt(k!),   Z ~ N(0, 1),

so that f = sum_k a_k H_k / sqrt(k!) and sum_k a_k^2 = E[f^2] for
square-integrable f.  Sticking to one convention everywhere avoids
factor-of-sqrt(k!) mistakes when mixing decompositions of different
functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, sqrt

import numpy as np
from scipy.special import roots_hermitenorm

__all__ = [
    "HermiteCoeffs",
    "hermite_eval",
    "hermite_eval_table",
    "gauss_hermite_nodes",
    "hermite_coeffs_of",
    "information_exponent",
    "xf_coeffs",
    "hermite_scale_expand",
    "correlated_hermite_expectation",
    "synthesize",
    "step_coeffs",
    "sign_coeffs",
]

SQRT_2PI = sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class HermiteCoeffs:
    """Orthonormal Hermite coefficients a_0 .. a_{max_degree} of a scalar function."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.atleast_1d(np.asarray(self.coeffs, dtype=np.float64))
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coeffs must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def max_degree(self) -> int:
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __getitem__(self, k: int) -> float:
        return float(self.coeffs[k])


def hermite_eval(n: int, x):
    """Evaluate H_n at x (scalar or array) via the three-term recurrence."""
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.shape else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h, h_prev = x * h - k * h_prev, h
    return h if h.shape else float(h)


def hermite_eval_table(max_degree: int, x: np.ndarray) -> np.ndarray:
    """Table of shape (max_degree + 1, len(x)) with row n equal to H_n(x)."""
    x = np.asarray(x, dtype=np.float64)
    table = np.empty((max_degree + 1, x.size))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for n in range(1, max_degree):
        table[n + 1] = x * table[n] - n * table[n - 1]
    return table


@lru_cache(maxsize=None)
def gauss_hermite_nodes(quad_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for the N(0,1) measure.

    Nodes/weights come from the Golub-Welsch eigen-decomposition of the
    Jacobi matrix (scipy's ``roots_hermitenorm``), rescaled so the weights
    sum to one, i.e. sum_i w_i g(x_i) ~ E[g(Z)] and the rule is exact for
    polynomials of degree <= 2*quad_order - 1.
    """
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    nodes, weights = roots_hermitenorm(quad_order)
    weights = weights / SQRT_2PI
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def hermite_coeffs_of(f, max_degree: int, quad_order: int | None = None) -> HermiteCoeffs:
    """Orthonormal Hermite coefficients of ``f`` by Gauss-Hermite quadrature.

    Exact (up to float precision) whenever f is a polynomial of degree
    <= 2*quad_order - 1 - max_degree.  For discontinuous f (step, sign) the
    quadrature converges slowly; cross-check such coefficients against a
    Monte-Carlo estimate before trusting them to many digits.
    """
    if quad_order is None:
        quad_order = 2 * max_degree + 32
    if quad_order < max_degree + 1:
        raise ValueError(
            f"quad_order={quad_order} too small for max_degree={max_degree}"
        )
    nodes, weights = gauss_hermite_nodes(quad_order)
    values = np.asarray(f(nodes), dtype=np.float64)
    if values.shape != nodes.shape:
        values = np.broadcast_to(values, nodes.shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("function produced non-finite values at quadrature nodes")
    table = hermite_eval_table(max_degree, nodes)
    raw = table @ (weights * values)
    norms = np.array([sqrt(factorial(k)) for k in range(max_degree + 1)])
    return HermiteCoeffs(raw / norms)


def information_exponent(c: HermiteCoeffs, tol: float = 1e-8) -> int:
    """Smallest degree k >= 1 with |a_k| > tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    above = np.nonzero(np.abs(c.coeffs[1:]) > tol)[0]
    if above.size == 0:
        raise ValueError(
            f"no information exponent within max_degree={c.max_degree}: "
            f"all coefficients of degree >= 1 are below tol={tol}"
        )
    return int(above[0]) + 1


def xf_coeffs(c: HermiteCoeffs) -> HermiteCoeffs:
    """Orthonormal coefficients of x -> x*f(x) given those of f.

    Multiplication by x maps H_n to H_{n+1} + n H_{n-1}, which in the
    orthonormal convention reads

        (xf)_n = sqrt(n+1) a_{n+1} + sqrt(n) a_{n-1},

    raising max_degree by one and lowering the information exponent by one.
    """
    a = c.coeffs
    n_out = a.size + 1
    out = np.zeros(n_out)
    degrees = np.arange(n_out, dtype=np.float64)
    out[:-2] += np.sqrt(degrees[1 : n_out - 1]) * a[1:]
    out[1:] += np.sqrt(degrees[1:]) * a[: n_out - 1]
    return HermiteCoeffs(out)


def hermite_scale_expand(n: int, gamma: float) -> dict[int, float]:
    """Expand H_n(gamma*x) over {H_{n-2k}(x)}.

    Returns the mapping degree -> coefficient of the identity

        H_n(gamma x) = sum_{k=0}^{n//2} gamma^(n-2k) (gamma^2-1)^k
                       * n! / ((n-2k)! k! 2^k) * H_{n-2k}(x).
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    out: dict[int, float] = {}
    for k in range(n // 2 + 1):
        comb = factorial(n) / (factorial(n - 2 * k) * factorial(k) * 2.0**k)
        out[n - 2 * k] = gamma ** (n - 2 * k) * (gamma**2 - 1.0) ** k * comb
    return out


def correlated_hermite_expectation(n: int, m: int, rho: float) -> float:
    """E[H_n(Z) H_m(Z')] for standard Gaussians with correlation rho.

    Equals n! rho^n when n == m and zero otherwise.
    """
    if abs(rho) > 1.0 + 1e-12:
        raise ValueError(f"|rho| must be <= 1, got {rho}")
    if n != m:
        return 0.0
    return factorial(n) * float(rho) ** n


def step_coeffs(max_degree: int) -> HermiteCoeffs:
    """Orthonormal Hermite coefficients of the ReLU derivative 1{x > 0}.

    Integrating H_k against the half-line Gaussian gives the closed form
    E[1{x>0} H_k] = H_{k-1}(0)/sqrt(2*pi) for k >= 1, so

        b_0 = 1/2,
        b_{2m} = 0            (m >= 1),
        b_{2m+1} = (-1)^m (2m-1)!! / (sqrt(2*pi) sqrt((2m+1)!)).

    Exact, so it sidesteps the slow quadrature convergence of the step.
    """
    out = np.zeros(max_degree + 1)
    out[0] = 0.5
    for k in range(1, max_degree + 1):
        if k % 2 == 1:
            m = (k - 1) // 2
            double_fact = factorial(2 * m) // (2**m * factorial(m))  # (2m-1)!!
            out[k] = (-1.0) ** m * double_fact / (SQRT_2PI * sqrt(factorial(k)))
    return HermiteCoeffs(out)


def sign_coeffs(max_degree: int) -> HermiteCoeffs:
    """Orthonormal Hermite coefficients of sign(x); twice the step's, mean removed."""
    out = 2.0 * np.asarray(step_coeffs(max_degree).coeffs)
    out[0] = 0.0
    return HermiteCoeffs(out)


def synthesize(c: HermiteCoeffs):
    """Callable x -> sum_k a_k H_k(x)/sqrt(k!) from a coefficient vector."""
    norms = np.array([sqrt(factorial(k)) for k in range(len(c))])
    scaled = c.coeffs / norms

    def f(x):
        x_arr = np.asarray(x, dtype=np.float64)
        table = hermite_eval_table(c.max_degree, np.ravel(x_arr))
        values = (scaled @ table).reshape(x_arr.shape)
        return values if values.shape else float(values)

    return f
