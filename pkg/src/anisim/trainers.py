"""Online SGD variants on a single ReLU neuron with correlation loss.

The loss is L(y, yhat) = 1 - y * yhat with yhat = relu(w.x), so the
stochastic gradient is -y 1{w.x > 0} x and one vanilla step reads

    w <- w + eta * y * 1{w.x > 0} * x.

Four variants share the machinery: vanilla, Q-oracle spherical (gradient
projected tangent to the Q-sphere, weights renormalized to unit Q-norm each
step), adaptive learning rate (eta multiplied by 1 + growth every step), and
RepSGD (each fresh sample used for two gradient evaluations, the second at
the intermediate point but applied from the current weight).

The loop draws samples in fixed blocks and maintains the scalars <w, Qw*>,
<w, w*>, w.Qw and w.w incrementally, with a full O(d) recomputation every
RESYNC_EVERY steps to keep float drift below 1e-8 relative.  Per step this
costs one or two O(d) inner products plus one axpy, so the correlation m_t
is available at every step, not just at recorded ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import sqrt

import numpy as np

from .covariance import Identity
from .sim_model import SimInstance

__all__ = [
    "TrainerConfig",
    "TrajectoryRecord",
    "init_weights",
    "sgd_step",
    "spherical_sgd_step",
    "rep_sgd_step",
    "theorem1_schedule",
    "run_trajectory",
]

VARIANTS = ("vanilla", "spherical_q", "adaptive_lr", "rep_sgd")

ESCAPE_THRESHOLD = 0.5
RESYNC_EVERY = 1000
BLOCK = 512


@dataclass(frozen=True)
class TrainerConfig:
    """One trajectory's worth of knobs.

    ``init_scale_cr`` is the ratio ||Q^{1/2}w0|| / ||Q^{1/2}w*||.  When
    ``condition_m0_positive`` is set, the sign of the Gaussian init direction
    is flipped if needed so m_0 > 0 (exact rejection sampling of the sign,
    matching the positive-initial-correlation assumption).
    """

    variant: str = "vanilla"
    eta0: float = 1e-4
    steps: int = 10_000
    init_scale_cr: float = 1.0
    seed: int = 0
    record_every: int = 0  # 0 -> max(1, steps // 2000)
    growth: float = 0.0  # adaptive_lr: eta_{t+1} = eta_t * (1 + growth)
    eta2: float | None = None  # rep_sgd second step size; defaults to eta0
    condition_m0_positive: bool = True

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not (np.isfinite(self.eta0) and self.eta0 > 0):
            raise ValueError("eta0 must be finite and positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 < self.init_scale_cr <= 1.0:
            raise ValueError("init_scale_cr must be in (0, 1]")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")
        if self.variant == "adaptive_lr" and not (np.isfinite(self.growth) and self.growth >= 0):
            raise ValueError("adaptive_lr requires finite growth >= 0")

    def with_(self, **kwargs) -> "TrainerConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sparsely recorded diagnostics of one trajectory."""

    times: np.ndarray
    m_t: np.ndarray
    q_norm_w: np.ndarray  # ||Q^{1/2} w_t||
    w_sig_norm: np.ndarray  # <w_t, w*>
    w_perp_norm: np.ndarray  # ||w_t - <w_t, w*> w*||
    eta_t: np.ndarray
    escape_time: int | None  # first step with m_t >= 0.5, checked every step
    noise_budget: float  # eta0 * ||Q^{1/2}||_F * sqrt(T)

    @property
    def final_m(self) -> float:
        return float(self.m_t[-1])

    def write_csv(self, fh) -> None:
        fh.write("t,m_t,q_norm_w,w_sig_norm,w_perp_norm,eta_t\n")
        for row in zip(self.times, self.m_t, self.q_norm_w, self.w_sig_norm,
                       self.w_perp_norm, self.eta_t):
            fh.write("%d,%.10g,%.10g,%.10g,%.10g,%.10g\n" % row)


def init_weights(inst: SimInstance, cr: float, rng: np.random.Generator) -> np.ndarray:
    """w0 = r w'/||w'|| with w' standard Gaussian, r set after the draw so
    ||Q^{1/2}w0|| = cr * ||Q^{1/2}w*|| exactly."""
    if not 0.0 < cr <= 1.0:
        raise ValueError("cr must be in (0, 1]")
    direction = rng.standard_normal(inst.d)
    direction /= np.linalg.norm(direction)
    r = cr * inst.q_norm_w_star / inst.cov.q_norm(direction)
    return r * direction


def sgd_step(w: np.ndarray, x: np.ndarray, y: float, eta: float) -> np.ndarray:
    """One vanilla step; the weight is unchanged when the neuron is inactive."""
    if w.shape != x.shape:
        raise ValueError("dimension mismatch between w and x")
    if eta <= 0:
        raise ValueError("eta must be positive")
    if float(w @ x) <= 0.0:
        return w.copy()
    return w + eta * y * x


def spherical_sgd_step(w: np.ndarray, x: np.ndarray, y: float, eta: float, cov) -> np.ndarray:
    """One Q-oracle spherical step: project the gradient tangent to the
    Q-sphere, step, renormalize to unit Q-norm."""
    qw = cov.apply_q(w)
    q_norm = sqrt(float(w @ qw))
    if abs(q_norm - 1.0) > 1e-8:
        raise ValueError(f"spherical step requires unit Q-norm weight, got {q_norm}")
    g = eta * y if float(w @ x) > 0.0 else 0.0
    # grad = -y sigma'(w.x) x;  w~ = w - eta (grad - <grad, w>_Q w)
    w_new = w + g * x - g * float(x @ qw) * w
    new_norm = cov.q_norm(w_new)
    if new_norm < 1e-14:
        raise ArithmeticError("degenerate spherical update: ||Q^(1/2)w~|| ~ 0")
    return w_new / new_norm


def rep_sgd_step(w: np.ndarray, x: np.ndarray, y: float, eta1: float, eta2: float) -> np.ndarray:
    """Sample-reuse step: intermediate w~ = w + eta1 y sigma'(w.x) x, then a
    second gradient evaluated at w~ but applied from w."""
    if w.shape != x.shape:
        raise ValueError("dimension mismatch between w and x")
    z = float(w @ x)
    z_tilde = z + (eta1 * y * float(x @ x) if z > 0.0 else 0.0)
    if z_tilde <= 0.0 or eta2 == 0.0:
        return w.copy()
    return w + eta2 * y * x


def theorem1_schedule(
    k_star: int, m0: float, theta_ratio: float, eps_d: float = 0.1
) -> tuple[float, int]:
    """Learning rate and iteration count for weak recovery, by case on k*.

    k* >= 3: eta = eps^2 m0^{k*-2} Theta^2,   T = eps^-2 m0^{2(2-k*)} Theta^-2
    k*  = 2: eta = eps^2 Theta^2 / |log m0|,  T = eps^-2 log^2(m0) Theta^-2
    k*  = 1: eta = eps^2 Theta^2,             T = eps^-2 Theta^-2

    |log m0| replaces the stated log m0, which is negative for m0 < 1.
    """
    if m0 <= 0.0:
        raise ValueError("m0 must be positive (initial correlation assumption)")
    if not (m0 < 1.0 and 0.0 < theta_ratio <= 1.0 and 0.0 < eps_d < 1.0):
        raise ValueError("require m0 in (0,1), theta_ratio in (0,1], eps_d in (0,1)")
    if k_star < 1:
        raise ValueError("k_star must be >= 1")
    th2 = theta_ratio * theta_ratio
    e2 = eps_d * eps_d
    if k_star == 1:
        eta = e2 * th2
        t = 1.0 / (e2 * th2)
    elif k_star == 2:
        log_m0 = abs(np.log(m0))
        eta = e2 * th2 / log_m0
        t = log_m0**2 / (e2 * th2)
    else:
        eta = e2 * m0 ** (k_star - 2) * th2
        t = m0 ** (2 * (2 - k_star)) / (e2 * th2)
    return eta, int(np.ceil(t))


class _Recorder:
    """Accumulates the sparse diagnostic time series."""

    def __init__(self) -> None:
        self.times: list[int] = []
        self.m: list[float] = []
        self.q_norm: list[float] = []
        self.sig: list[float] = []
        self.perp: list[float] = []
        self.eta: list[float] = []

    def add(self, t, m, qn2, s_w, n2, eta) -> None:
        if not (np.isfinite(qn2) and qn2 > 0.0):
            raise ArithmeticError(
                f"non-finite or collapsed weight at step {t} (learning-rate blow-up?)"
            )
        self.times.append(t)
        self.m.append(m)
        self.q_norm.append(sqrt(qn2))
        self.sig.append(s_w)
        self.perp.append(sqrt(max(n2 - s_w * s_w, 0.0)))
        self.eta.append(eta)


def run_trajectory(inst: SimInstance, cfg: TrainerConfig) -> TrajectoryRecord:
    """Run ``cfg.steps`` online updates with fresh samples, one per step
    (RepSGD consumes one fresh sample per double evaluation).

    Deterministic given (inst, cfg): a single numpy Generator seeded from
    cfg.seed drives initialization and the sample stream, drawn in fixed
    blocks.  Raises ArithmeticError with the step index if weights blow up.
    """
    rng = np.random.default_rng(cfg.seed)
    cov = inst.cov
    w_star = inst.w_star
    qws = inst.q_norm_w_star
    qw_star = cov.apply_q(w_star)
    identity_q = isinstance(cov, Identity)
    record_every = cfg.record_every if cfg.record_every > 0 else max(1, cfg.steps // 2000)

    w = init_weights(inst, cfg.init_scale_cr, rng)
    if cfg.condition_m0_positive and float(w @ qw_star) < 0.0:
        w = -w

    spherical = cfg.variant == "spherical_q"
    adaptive = cfg.variant == "adaptive_lr"
    reuse = cfg.variant == "rep_sgd"
    if spherical:
        w = w / cov.q_norm(w)

    # incrementally maintained scalars of w
    s_qw = float(w @ qw_star)  # <w, Qw*>
    s_w = float(w @ w_star)  # <w, w*>
    qn2 = float(w @ cov.apply_q(w))  # w.Qw
    n2 = float(w @ w)  # w.w
    qw = cov.apply_q(w) if spherical else None
    since_sync = 0

    eta = cfg.eta0
    eta2 = cfg.eta2 if cfg.eta2 is not None else cfg.eta0
    rec = _Recorder()
    m = s_qw / (sqrt(qn2) * qws)
    escape = 0 if m >= ESCAPE_THRESHOLD else None
    rec.add(0, m, qn2, s_w, n2, eta)

    t = 0
    while t < cfg.steps:
        block = min(BLOCK, cfg.steps - t)
        x_blk = cov.sample(rng, block)
        qx_blk = x_blk if identity_q else cov.apply_q(x_blk)
        x_qws = x_blk @ qw_star
        x_ws = x_blk @ w_star
        y_blk = np.asarray(inst.link(x_ws / qws), dtype=np.float64)
        x_x = np.einsum("ij,ij->i", x_blk, x_blk)
        x_qx = x_x if identity_q else np.einsum("ij,ij->i", x_blk, qx_blk)

        for i in range(block):
            t += 1
            x = x_blk[i]
            y = y_blk[i]
            z = float(w @ x)

            if spherical:
                if z > 0.0:
                    g = eta * y
                    a = 1.0 - g * float(x @ qw)
                    w = a * w + g * x
                    qw = a * qw + g * qx_blk[i]
                    s_qw = a * s_qw + g * x_qws[i]
                    s_w = a * s_w + g * x_ws[i]
                    n2 = a * a * n2 + 2.0 * a * g * z + g * g * x_x[i]
                    qn2 = float(w @ qw)
                    norm = sqrt(qn2)
                    if norm < 1e-14:
                        raise ArithmeticError(f"degenerate spherical update at step {t}")
                    w /= norm
                    qw /= norm
                    s_qw /= norm
                    s_w /= norm
                    n2 /= qn2
                    qn2 = 1.0
                    since_sync += 1
            else:
                if reuse:
                    z_tilde = z + (eta * y * x_x[i] if z > 0.0 else 0.0)
                    g = eta2 * y if z_tilde > 0.0 else 0.0
                else:
                    g = eta * y if z > 0.0 else 0.0
                if g != 0.0:
                    x_qw = z if identity_q else float(qx_blk[i] @ w)
                    w += g * x
                    s_qw += g * x_qws[i]
                    s_w += g * x_ws[i]
                    qn2 += 2.0 * g * x_qw + g * g * x_qx[i]
                    n2 += 2.0 * g * z + g * g * x_x[i]
                    since_sync += 1

            if adaptive:
                eta *= 1.0 + cfg.growth
            if since_sync >= RESYNC_EVERY:
                s_qw = float(w @ qw_star)
                s_w = float(w @ w_star)
                qn2 = float(w @ (w if identity_q else cov.apply_q(w)))
                n2 = float(w @ w)
                if spherical:
                    qw = cov.apply_q(w)
                since_sync = 0
            m = s_qw / (sqrt(qn2) * qws)
            if escape is None and m >= ESCAPE_THRESHOLD:
                escape = t
            if t % record_every == 0 or t == cfg.steps:
                rec.add(t, m, qn2, s_w, n2, eta)

    if not np.all(np.isfinite(w)):
        raise ArithmeticError(f"non-finite weight at step {cfg.steps}")

    return TrajectoryRecord(
        times=np.asarray(rec.times, dtype=np.int64),
        m_t=np.asarray(rec.m),
        q_norm_w=np.asarray(rec.q_norm),
        w_sig_norm=np.asarray(rec.sig),
        w_perp_norm=np.asarray(rec.perp),
        eta_t=np.asarray(rec.eta),
        escape_time=escape,
        noise_budget=cfg.eta0 * sqrt(inst.stats.trace_q) * sqrt(cfg.steps),
    )
