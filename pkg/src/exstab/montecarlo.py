"""Seeded, reproducible Monte Carlo experiments over random instances.

Trial ``t`` always uses the instance generated from ``mix(seed, t)``, so a
run is a pure function of its configuration: per-trial results are integers,
they are accumulated exactly, and worker threads only change the schedule.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.stats import binomtest

from . import _kernels
from .enumeration import normalize_kind
from .errors import CapExceededError, ContractError
from .instance import generate_one_sided, generate_two_sided, write_instance
from .rng import Seed, mix

# Desk-scale guidance for default trial budgets; larger n needs force=True.
GUIDANCE_MAX_N = {"two": 12, "one": 16}
CHUNK = 256
Z95 = 1.959963984540054

SUMMARY_FIELDS = [
    "side", "kind", "n", "trials", "seed", "mean", "stderr",
    "second_moment", "ci_lo", "ci_hi", "elapsed_s",
]
RANK_FIELDS = ["side", "n", "instance_trial", "matching_index", "R", "Q", "R_norm"]


@dataclass(frozen=True)
class ExperimentConfig:
    side: Literal["two", "one"]
    n: int
    trials: int
    seed: int
    kind: str = "e-stable"
    threads: int = 1
    retain_ranks: bool = False
    force: bool = False

    def __post_init__(self):
        if self.side not in ("two", "one"):
            raise ContractError(f"side must be 'two' or 'one', got {self.side!r}")
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        Seed(self.seed)  # validates the range
        if self.trials < 1:
            raise ContractError("trials must be >= 1")
        if self.n < 1 or self.side == "one" and (self.n < 2 or self.n % 2):
            raise ContractError(f"invalid n={self.n} for a {self.side}-sided experiment")
        if self.threads < 1:
            raise ContractError("threads must be >= 1")

    def check_feasible(self) -> None:
        limit = GUIDANCE_MAX_N[self.side]
        if self.n > limit and not self.force:
            raise CapExceededError(
                f"{self.side}-sided enumeration beyond n={limit} is outside the desk-scale guidance "
                f"(two-sided n <= 12, one-sided n <= 16 at default trial counts); pass force to run anyway",
                required=self.n,
                cap=limit,
            )


@dataclass(frozen=True)
class EstimateSummary:
    side: str
    kind: str
    quantity: Literal["count", "exists"]
    n: int
    trials: int
    seed: int
    mean: float
    second_moment: float
    variance: float
    stderr: float
    ci95: tuple[float, float]
    total: int
    total_sq: int
    max_value: int
    argmax_trial: int
    elapsed: float = field(default=0.0, compare=False)

    @property
    def exact_mean(self) -> Fraction:
        return Fraction(self.total, self.trials)

    def csv_row(self, timing: bool = False) -> dict:
        kind = self.kind if self.quantity == "count" else f"{self.kind}-exists"
        return {
            "side": self.side,
            "kind": kind,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mean": repr(self.mean),
            "stderr": repr(self.stderr),
            "second_moment": repr(self.second_moment),
            "ci_lo": repr(self.ci95[0]),
            "ci_hi": repr(self.ci95[1]),
            "elapsed_s": f"{self.elapsed:.3f}" if timing else "",
        }


def summaries_to_csv(summaries, timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for s in summaries:
        writer.writerow(s.csv_row(timing))
    return buf.getvalue()


def _chunk_values(cfg: ExperimentConfig, exchange: bool, classic: bool, stop_after: int) -> np.ndarray:
    batch = _kernels.batch_two_sided if cfg.side == "two" else _kernels.batch_one_sided
    master = np.uint64(cfg.seed)
    bounds = [(t, min(t + CHUNK, cfg.trials)) for t in range(0, cfg.trials, CHUNK)]

    def run(b):
        return batch(master, b[0], b[1], cfg.n, exchange, classic, stop_after)

    if cfg.threads == 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(run, bounds))
    return np.concatenate(parts)


def _summarize(cfg: ExperimentConfig, values: np.ndarray, quantity: str, elapsed: float) -> EstimateSummary:
    ints = [int(v) for v in values]
    T = cfg.trials
    total = sum(ints)
    total_sq = sum(v * v for v in ints)
    mean = Fraction(total, T)
    second = Fraction(total_sq, T)
    var = (Fraction(total_sq) - Fraction(total * total, T)) / (T - 1) if T > 1 else Fraction(0)
    stderr = math.sqrt(var / T)
    if quantity == "exists":
        ci = binomtest(total, T).proportion_ci(confidence_level=0.95, method="wilson")
        ci95 = (float(ci.low), float(ci.high))
    else:
        ci95 = (float(mean) - Z95 * stderr, float(mean) + Z95 * stderr)
    max_value = max(ints)
    return EstimateSummary(
        side=cfg.side,
        kind=cfg.kind,
        quantity=quantity,  # type: ignore[arg-type]
        n=cfg.n,
        trials=T,
        seed=cfg.seed,
        mean=float(mean),
        second_moment=float(second),
        variance=float(var),
        stderr=stderr,
        ci95=ci95,
        total=total,
        total_sq=total_sq,
        max_value=max_value,
        argmax_trial=ints.index(max_value),
        elapsed=elapsed,
    )


def trial_counts(cfg: ExperimentConfig) -> np.ndarray:
    """Number of matchings of ``cfg.kind`` in each trial's instance."""
    cfg.check_feasible()
    kind = cfg.kind
    return _chunk_values(cfg, kind in ("e-stable", "doubly"), kind in ("stable", "doubly"), 0)


def estimate_counts(cfg: ExperimentConfig) -> EstimateSummary:
    start = time.perf_counter()
    values = trial_counts(cfg)
    return _summarize(cfg, values, "count", time.perf_counter() - start)


def estimate_doubly_stable_prob(cfg: ExperimentConfig) -> EstimateSummary:
    """Fraction of trials whose instance admits a doubly stable matching."""
    cfg.check_feasible()
    start = time.perf_counter()
    values = _chunk_values(cfg, True, True, 1)
    cfg = ExperimentConfig(cfg.side, cfg.n, cfg.trials, cfg.seed, "doubly", cfg.threads, cfg.retain_ranks, cfg.force)
    return _summarize(cfg, values, "exists", time.perf_counter() - start)


def trial_instance(side: str, n: int, seed: int, t: int):
    """The instance used by trial ``t`` of an experiment with master ``seed``."""
    trial_seed = Seed(mix(seed, t))
    return generate_two_sided(n, trial_seed) if side == "two" else generate_one_sided(n, trial_seed)


def estimate_second_moment(cfg: ExperimentConfig, argmax_path: str | None = None) -> EstimateSummary:
    """Count summary whose ``second_moment`` estimates E[S^2]; optionally saves the argmax instance."""
    summary = estimate_counts(cfg)
    if argmax_path is not None:
        inst = trial_instance(cfg.side, cfg.n, cfg.seed, summary.argmax_trial)
        with open(argmax_path, "w", encoding="utf-8") as fh:
            fh.write(f"# trial {summary.argmax_trial} of seed {cfg.seed}: {summary.max_value} {cfg.kind} matchings\n")
            fh.write(write_instance(inst))
    return summary


@dataclass(frozen=True)
class RankRecord:
    side: str
    n: int
    trial: int
    matching_index: int
    R: int
    Q: int | None

    @property
    def R_norm(self) -> float:
        return self.R / self.n**1.5

    @property
    def Q_norm(self) -> float | None:
        return None if self.Q is None else self.Q / self.n**1.5


@dataclass(frozen=True)
class RankLawSummary:
    matchings: int
    trials: int
    mean_R_norm: float
    stderr_R_norm: float
    mean_Q_norm: float | None
    stderr_Q_norm: float | None
    mean_diff_norm: float | None
    stderr_diff_norm: float | None
    min_R_norm: float
    max_R_norm: float
    eps: float
    frac_outside: float


def _ratio_estimate(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """Ratio of per-trial totals with a cluster (per-instance) standard error."""
    T = len(num)
    r = num.sum() / den.sum()
    if T < 2:
        return float(r), 0.0
    resid = num - r * den
    se = math.sqrt(resid.var(ddof=1) / T) / den.mean()
    return float(r), float(se)


def collect_rank_law(cfg: ExperimentConfig, eps: float = 0.25) -> tuple[list[RankRecord], RankLawSummary]:
    """Ranks of every e-stable matching found across the trials.

    Matchings from the same instance are correlated, so standard errors are
    computed from per-instance totals.
    """
    cfg.check_feasible()
    n = cfg.n

    rows = np.arange(n)

    def one_trial(t: int) -> list[RankRecord]:
        trial_seed = mix(cfg.seed, t)
        if cfg.side == "two":
            mr, wr = _kernels.gen_two_sided(np.uint64(trial_seed), n)
            run = lambda out: _kernels.enumerate_two_sided(mr, wr, True, False, out, 0)  # noqa: E731
        else:
            mr = _kernels.gen_one_sided(np.uint64(trial_seed), n)
            run = lambda out: _kernels.enumerate_one_sided(mr, True, False, out, 0)  # noqa: E731
        out = np.empty((64, n), dtype=np.int64)
        count, _ = run(out)
        if count > len(out):
            out = np.empty((count, n), dtype=np.int64)
            run(out)
        out = out[:count]
        R = mr[rows, out].sum(axis=1)
        Q = wr[out, rows].sum(axis=1) if cfg.side == "two" else [None] * count
        return [RankRecord(cfg.side, n, t, idx, int(R[idx]), None if Q[idx] is None else int(Q[idx]))
                for idx in range(count)]

    if cfg.threads == 1:
        per_trial = [one_trial(t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            per_trial = list(pool.map(one_trial, range(cfg.trials)))
    records = [r for rs in per_trial for r in rs]
    if not records:
        raise ContractError("no e-stable matchings found in any trial; increase trials")

    scale = n**1.5
    counts = np.array([len(rs) for rs in per_trial], dtype=float)
    r_tot = np.array([sum(r.R for r in rs) for rs in per_trial], dtype=float) / scale
    mean_r, se_r = _ratio_estimate(r_tot, counts)
    mean_q = se_q = mean_d = se_d = None
    if cfg.side == "two":
        q_tot = np.array([sum(r.Q for r in rs) for rs in per_trial], dtype=float) / scale
        mean_q, se_q = _ratio_estimate(q_tot, counts)
        mean_d, se_d = _ratio_estimate(r_tot - q_tot, counts)
    norms = np.array([r.R_norm for r in records])
    summary = RankLawSummary(
        matchings=len(records),
        trials=cfg.trials,
        mean_R_norm=mean_r,
        stderr_R_norm=se_r,
        mean_Q_norm=mean_q,
        stderr_Q_norm=se_q,
        mean_diff_norm=mean_d,
        stderr_diff_norm=se_d,
        min_R_norm=float(norms.min()),
        max_R_norm=float(norms.max()),
        eps=eps,
        frac_outside=float(np.mean(np.abs(norms - 1.0) >= eps)),
    )
    return records, summary


def rank_records_to_csv(records: list[RankRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RANK_FIELDS)
    for r in records:
        writer.writerow([r.side, r.n, r.trial, r.matching_index, r.R, "" if r.Q is None else r.Q, repr(r.R_norm)])
    return buf.getvalue()
