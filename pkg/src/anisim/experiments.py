"""Config-driven experiments: presets, runners, summaries, CSV output.

An experiment is one JSON document naming an instance (covariance, link,
target direction), a trainer (explicit knobs or the "theorem1" auto
schedule), and seeds.  Built-in presets reproduce the four experiments of
the study; every field can be overridden via the CLI.  Trajectories are
written to one CSV per experiment (seed column appended) and figures are
rendered from the written CSV, never from in-memory state, so plots can
never alter results.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covariance import CovarianceSpec, covariance_from_config
from .sim_model import SimInstance, link_from_config, make_instance
from .trainers import TrainerConfig, TrajectoryRecord, run_trajectory, theorem1_schedule

__all__ = [
    "ExperimentConfig",
    "SeedResult",
    "ExperimentSummary",
    "ComparisonSummary",
    "PRESETS",
    "preset_config",
    "build_instance",
    "resolve_trainer",
    "run_experiment",
    "compare_variants",
    "write_trajectories_csv",
]

CSV_HEADER = "t,m_t,q_norm_w,w_sig_norm,w_perp_norm,eta_t,seed"


# ---------------------------------------------------------------------------
# Presets.  Initialization scales below are tuned operating points: the
# published step counts and learning rates are kept verbatim, and the free
# initialization radius is chosen so the runs exhibit the documented effects
# within those budgets.
# ---------------------------------------------------------------------------

PRESETS: dict[str, dict] = {
    # Anisotropy accelerates escape: spiked covariance aligned with the target.
    "fig1-aniso": {
        "name": "fig1-aniso",
        "covariance": {"type": "spiked", "d": 1000, "kappa": 6.0, "theta": "w_star"},
        "link": {"type": "hermite", "degree": 2},
        "w_star": "e1",
        "trainer": {
            "variant": "vanilla",
            "eta0": 2e-5,
            "steps": 40000,
            "init_scale_cr": 0.06,
            "record_every": 20,
        },
        "seeds": list(range(20)),
    },
    # Same budget without the spike.
    "fig1-iso": {
        "name": "fig1-iso",
        "covariance": {"type": "identity", "d": 1000},
        "link": {"type": "hermite", "degree": 2},
        "w_star": "e1",
        "trainer": {
            "variant": "vanilla",
            "eta0": 2e-5,
            "steps": 40000,
            "init_scale_cr": 0.06,
            "record_every": 20,
        },
        "seeds": list(range(20)),
    },
    # Earlier draft of the same figure (degree-3 link: vanilla SGD stalls
    # because the step activation has no even Hermite mass beyond degree 0).
    "fig1-draft": {
        "name": "fig1-draft",
        "covariance": {"type": "spiked", "d": 7192, "kappa": 6.0, "theta": "w_star"},
        "link": {"type": "hermite", "degree": 3},
        "w_star": "e1",
        "trainer": {
            "variant": "vanilla",
            "eta0": 1e-4,
            "steps": 10000,
            "init_scale_cr": 0.06,
            "record_every": 5,
        },
        "seeds": list(range(5)),
    },
    # Vanilla vs Q-oracle spherical SGD on the anisotropic instance.  The
    # spherical weight lives on the unit Q-sphere while the vanilla weight
    # has Q-norm init_scale_cr, so the spherical step size is scaled by
    # 1/init_scale_cr to match effective rates.
    "fig2": {
        "name": "fig2",
        "covariance": {"type": "spiked", "d": 1000, "kappa": 6.0, "theta": "w_star"},
        "link": {"type": "hermite", "degree": 2},
        "w_star": "e1",
        "variants": [
            {
                "variant": "vanilla",
                "eta0": 2e-5,
                "steps": 40000,
                "init_scale_cr": 0.06,
                "record_every": 20,
            },
            {
                "variant": "spherical_q",
                "eta0": 2e-5 / 0.06,
                "steps": 40000,
                "init_scale_cr": 0.06,
                "record_every": 20,
            },
        ],
        "seeds": list(range(20)),
    },
    # Sample reuse on the degree-3 link: vanilla stalls, RepSGD recovers.
    # The link is the sign-flipped normalized H_3 (the published runs use a
    # negative step size, which is the same thing in our sign convention).
    "repsgd": {
        "name": "repsgd",
        "covariance": {"type": "identity", "d": 4000},
        "link": {"type": "coeffs", "values": [0.0, 0.0, 0.0, -1.0]},
        "w_star": "e1",
        "variants": [
            {
                "variant": "rep_sgd",
                "eta0": 1e-4,
                "eta2": 1e-4,
                "steps": 80000,
                "init_scale_cr": 0.15,
                "record_every": 40,
            },
            {
                "variant": "vanilla",
                "eta0": 1e-4,
                "steps": 80000,
                "init_scale_cr": 0.15,
                "record_every": 40,
            },
        ],
        "seeds": list(range(10)),
    },
    # Growing the learning rate accelerates escape on the sign link.
    "adaptive-lr": {
        "name": "adaptive-lr",
        "covariance": {"type": "identity", "d": 4000},
        "link": {"type": "sign"},
        "w_star": "e1",
        "variants": [
            {
                "variant": "adaptive_lr",
                "eta0": 1e-6,
                "growth": 1e-6,
                "steps": 8000,
                "init_scale_cr": 0.002,
                "record_every": 1,
            },
            {
                "variant": "vanilla",
                "eta0": 1e-6,
                "steps": 8000,
                "init_scale_cr": 0.002,
                "record_every": 1,
            },
        ],
        "seeds": list(range(10)),
    },
    # Theorem-schedule search phase: weight norms stay pinned to their
    # initial value while the correlation is still small.
    "norm-stability": {
        "name": "norm-stability",
        "covariance": {"type": "identity", "d": 500},
        "link": {"type": "hermite", "degree": 2},
        "w_star": "e1",
        "trainer": {"schedule": "theorem1", "eps_d": 0.1, "init_scale_cr": 1.0},
        "seeds": list(range(20)),
    },
    # Seed-averaged SGD against the deterministic recursion.
    "tracking": {
        "name": "tracking",
        "covariance": {"type": "identity", "d": 200},
        "link": {"type": "hermite", "degree": 2},
        "w_star": "e1",
        "trainer": {"schedule": "theorem1", "eps_d": 0.1, "init_scale_cr": 1.0},
        "seeds": list(range(50)),
    },
}


@dataclass
class ExperimentConfig:
    name: str
    covariance: dict
    link: dict
    w_star: str | list = "e1"
    trainer: dict | None = None
    variants: list[dict] | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    w_star_seed: int = 2024

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("experiment name must be nonempty")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.trainer is None and not self.variants:
            raise ValueError("config needs a trainer or a variant list")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "covariance": self.covariance,
            "link": self.link,
            "w_star": self.w_star,
            "seeds": self.seeds,
        }
        if self.trainer is not None:
            out["trainer"] = self.trainer
        if self.variants is not None:
            out["variants"] = self.variants
        return out


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return ExperimentConfig.from_dict(copy.deepcopy(PRESETS[name]))


def _resolve_w_star(cfg: ExperimentConfig, d: int) -> np.ndarray:
    spec = cfg.w_star
    if isinstance(spec, str):
        if spec == "e1":
            w = np.zeros(d)
            w[0] = 1.0
            return w
        if spec == "random":
            w = np.random.default_rng(cfg.w_star_seed).standard_normal(d)
            return w / np.linalg.norm(w)
        raise ValueError(f'w_star must be "e1", "random", or a vector; got {spec!r}')
    w = np.asarray(spec, dtype=np.float64)
    return w / np.linalg.norm(w)


def build_instance(cfg: ExperimentConfig) -> SimInstance:
    d = int(cfg.covariance.get("d") or len(cfg.covariance.get("spectrum", []))
            or len(cfg.covariance.get("matrix", [])))
    if d < 1:
        raise ValueError("covariance config does not determine a dimension")
    w_star = _resolve_w_star(cfg, d)
    theta = None
    if cfg.covariance.get("theta") == "random":
        theta = np.random.default_rng(cfg.w_star_seed + 1).standard_normal(d)
    elif cfg.covariance.get("theta") == "w_star":
        theta = w_star
    cov = covariance_from_config(cfg.covariance, theta=theta)
    link = link_from_config(cfg.link)
    return make_instance(cov, link, w_star)


def resolve_trainer(trainer: dict, inst: SimInstance, seed: int) -> TrainerConfig:
    """Turn a trainer dict (explicit or theorem1-scheduled) into a config."""
    doc = dict(trainer)
    if doc.pop("schedule", None) == "theorem1":
        eps_d = float(doc.pop("eps_d", 0.1))
        eta, steps = theorem1_schedule(
            inst.link.k_star, inst.stats.typical_m0, inst.stats.theta_ratio, eps_d
        )
        doc.setdefault("eta0", eta)
        doc.setdefault("steps", steps)
    return TrainerConfig(seed=seed, **doc)


@dataclass(frozen=True)
class SeedResult:
    seed: int
    final_m: float
    final_abs_m: float
    escape_time: int | None  # first step with m_t >= 0.5
    abs_escape_time: int | None  # first recorded step with |m_t| >= 0.5
    final_q_norm: float


@dataclass
class ExperimentSummary:
    name: str
    variant: str
    results: list[SeedResult]
    median_final_m: float
    median_final_abs_m: float
    median_escape: float | None
    unbounded_link: bool
    typical_m0: float
    theta_ratio: float
    csv_path: str | None = None
    figure_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variant": self.variant,
            "median_final_m": self.median_final_m,
            "median_final_abs_m": self.median_final_abs_m,
            "median_escape": self.median_escape,
            "unbounded_link": self.unbounded_link,
            "typical_m0": self.typical_m0,
            "theta_ratio": self.theta_ratio,
            "csv_path": self.csv_path,
            "figure_path": self.figure_path,
            "seeds": [
                {
                    "seed": r.seed,
                    "final_m": r.final_m,
                    "final_abs_m": r.final_abs_m,
                    "escape_time": r.escape_time,
                    "abs_escape_time": r.abs_escape_time,
                }
                for r in self.results
            ],
        }


@dataclass
class ComparisonSummary:
    name: str
    summaries: list[ExperimentSummary]
    paired_final_m_delta: list[float]  # variant[i>0] minus variant[0], per seed
    mean_final_m_difference: float
    earlier_escape_counts: list[int]  # seeds where variant[i>0] escapes strictly earlier

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variants": [s.to_dict() for s in self.summaries],
            "paired_final_m_delta": self.paired_final_m_delta,
            "mean_final_m_difference": self.mean_final_m_difference,
            "earlier_escape_counts": self.earlier_escape_counts,
        }


def _abs_escape(rec: TrajectoryRecord, threshold: float = 0.5) -> int | None:
    hit = np.nonzero(np.abs(rec.m_t) >= threshold)[0]
    return int(rec.times[hit[0]]) if hit.size else None


def _seed_result(seed: int, rec: TrajectoryRecord) -> SeedResult:
    return SeedResult(
        seed=seed,
        final_m=rec.final_m,
        final_abs_m=abs(rec.final_m),
        escape_time=rec.escape_time,
        abs_escape_time=_abs_escape(rec),
        final_q_norm=float(rec.q_norm_w[-1]),
    )


def write_trajectories_csv(path: str | Path, records: list[tuple[int, TrajectoryRecord]]) -> None:
    """Combined CSV, one block per seed in seed order, LF endings, 10 digits."""
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for seed, rec in records:
            for row in zip(rec.times, rec.m_t, rec.q_norm_w, rec.w_sig_norm,
                           rec.w_perp_norm, rec.eta_t):
                fh.write("%d,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n" % (row + (seed,)))


def _summarize(
    cfg: ExperimentConfig, variant_name: str, records: list[tuple[int, TrajectoryRecord]],
    inst: SimInstance,
) -> ExperimentSummary:
    results = [_seed_result(seed, rec) for seed, rec in records]
    escapes = [r.abs_escape_time for r in results]
    reached = [e for e in escapes if e is not None]
    return ExperimentSummary(
        name=cfg.name,
        variant=variant_name,
        results=results,
        median_final_m=float(np.median([r.final_m for r in results])),
        median_final_abs_m=float(np.median([r.final_abs_m for r in results])),
        median_escape=float(np.median(reached)) if len(reached) * 2 >= len(escapes) and reached else None,
        unbounded_link=not inst.link.bounded,
        typical_m0=inst.stats.typical_m0,
        theta_ratio=inst.stats.theta_ratio,
    )


def _run_variant(
    cfg: ExperimentConfig, trainer: dict, inst: SimInstance
) -> list[tuple[int, TrajectoryRecord]]:
    return [(seed, run_trajectory(inst, resolve_trainer(trainer, inst, seed)))
            for seed in cfg.seeds]


def run_experiment(
    cfg: ExperimentConfig, out_dir: str | Path | None = None, make_plots: bool = True
) -> ExperimentSummary:
    """Run one trainer over all seeds; optionally write CSV and a figure."""
    if cfg.trainer is None:
        raise ValueError(f"experiment {cfg.name!r} has no single trainer; use compare_variants")
    inst = build_instance(cfg)
    records = _run_variant(cfg, cfg.trainer, inst)
    summary = _summarize(cfg, cfg.trainer.get("variant", "vanilla"), records, inst)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{cfg.name}.csv"
        write_trajectories_csv(csv_path, records)
        summary.csv_path = str(csv_path)
        if make_plots:
            from .plots import plot_trajectories

            fig_path = out / f"{cfg.name}.svg"
            plot_trajectories(csv_path, fig_path, title=cfg.name)
            summary.figure_path = str(fig_path)
    return summary


def compare_variants(
    cfg: ExperimentConfig, out_dir: str | Path | None = None, make_plots: bool = True
) -> ComparisonSummary:
    """Run >= 2 variants on the same instance and seeds; report paired deltas."""
    if not cfg.variants or len(cfg.variants) < 2:
        raise ValueError("need >= 2 variants to compare")
    inst = build_instance(cfg)
    all_records: list[list[tuple[int, TrajectoryRecord]]] = []
    summaries: list[ExperimentSummary] = []
    csv_paths: list[Path] = []
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for trainer in cfg.variants:
        records = _run_variant(cfg, trainer, inst)
        name = trainer.get("variant", "vanilla")
        summary = _summarize(cfg, name, records, inst)
        if out is not None:
            csv_path = out / f"{cfg.name}-{name}.csv"
            write_trajectories_csv(csv_path, records)
            summary.csv_path = str(csv_path)
            csv_paths.append(csv_path)
        all_records.append(records)
        summaries.append(summary)

    base = summaries[0].results
    deltas = []
    earlier_counts = []
    for other in summaries[1:]:
        deltas = [r.final_m - b.final_m for r, b in zip(other.results, base)]
        inf = float("inf")
        earlier = sum(
            (r.abs_escape_time if r.abs_escape_time is not None else inf)
            < (b.abs_escape_time if b.abs_escape_time is not None else inf)
            for r, b in zip(other.results, base)
        )
        earlier_counts.append(int(earlier))
    comparison = ComparisonSummary(
        name=cfg.name,
        summaries=summaries,
        paired_final_m_delta=deltas,
        mean_final_m_difference=float(abs(
            np.mean([r.final_m for r in summaries[-1].results])
            - np.mean([b.final_m for b in base])
        )),
        earlier_escape_counts=earlier_counts,
    )
    if out is not None and make_plots and csv_paths:
        from .plots import plot_comparison

        fig_path = out / f"{cfg.name}.svg"
        plot_comparison(csv_paths, [s.variant for s in summaries], fig_path, title=cfg.name)
        for s in summaries:
            s.figure_path = str(fig_path)
    return comparison
