"""Matched-pairs statistical characterization of intervention phases.

The unit of inference is the differential sample: per participant and
experiment day, the same-weekday baseline reference minus the experiment
daily mean.  Positive differences mean consumption dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .aggregation import Aggregator
from .core import Phase, PhaseKind, Site
from .tdist import student_t_two_tailed_p, t_critical_95


@dataclass(frozen=True, slots=True)
class Observation:
    """One matched pair: an experiment day against its weekday reference."""

    participant_id: str
    weekday: str
    day: date
    baseline_watts: float
    expt_watts: float

    @property
    def diff_watts(self) -> float:
        return self.baseline_watts - self.expt_watts


@dataclass(frozen=True)
class DifferentialSample:
    site: Site
    phase_label: str
    observations: tuple[Observation, ...]
    baseline_pool_mean_watts: float

    @property
    def diffs(self) -> np.ndarray:
        return np.array([o.diff_watts for o in self.observations])

    @property
    def n(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class TestResult:
    n: int
    df: int
    mean_diff_watts: float
    sd_diff_watts: float
    t_stat: float
    p_two_tailed: float
    ci95_watts: tuple[float, float]
    ci95_pct: tuple[float, float]
    mean_reduction_pct: float
    baseline_pool_mean_watts: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "df": self.df,
            "mean_diff_w": self.mean_diff_watts,
            "sd_w": self.sd_diff_watts,
            "t": self.t_stat,
            "p": self.p_two_tailed,
            "ci95_w": list(self.ci95_watts),
            "ci95_pct": list(self.ci95_pct),
            "mean_reduction_pct": self.mean_reduction_pct,
            "baseline_pool_mean_w": self.baseline_pool_mean_watts,
        }


@dataclass(frozen=True, slots=True)
class SummaryStats:
    """Five-number summary plus mean of daily energy, in kWh per day."""

    phase_label: str
    n_days: int
    min_kwh: float
    q1_kwh: float
    median_kwh: float
    q3_kwh: float
    max_kwh: float
    mean_kwh: float


class InsufficientSampleError(ValueError):
    pass


def build_differential_sample(agg: Aggregator, site: Site,
                              expt_phase: Phase | str) -> DifferentialSample:
    """One observation per (participant, experiment day) with a valid
    weekday match; the pool mean for percent conversion is the mean of the
    observations' baseline sides."""
    calendar = agg.dataset.calendar
    expt = calendar.by_label(expt_phase) if isinstance(expt_phase, str) else expt_phase
    baseline = calendar.baseline(site)
    obs: list[Observation] = []
    for pid in agg.phase_participants(expt):
        for pair in agg.weekday_matched_pairs(baseline, expt, pid):
            obs.append(Observation(pid, pair.weekday, pair.expt_day,
                                   pair.baseline_watts, pair.expt_watts))
    obs.sort(key=lambda o: (o.participant_id, o.day))
    if len(obs) < 2:
        raise InsufficientSampleError(
            f"insufficient sample: {len(obs)} matched observation(s) for "
            f"{expt.label}; need at least 2")
    baseline_pool = float(np.mean([o.baseline_watts for o in obs]))
    return DifferentialSample(site, expt.label, tuple(obs), baseline_pool)


def paired_t_test(sample: DifferentialSample) -> TestResult:
    """Two-tailed paired t-test of the mean differential against zero.

    Zero sample variance is degenerate rather than an error: the CI
    collapses to the point and p is 0 (mean nonzero) or 1 (mean zero).
    """
    diffs = sample.diffs
    n = len(diffs)
    if n < 2:
        raise InsufficientSampleError("paired t-test needs n >= 2")
    if sample.baseline_pool_mean_watts <= 0:
        raise ValueError("baseline pool mean must be positive for percent conversion")
    mean = float(np.mean(diffs))
    sd = float(np.std(diffs, ddof=1))
    df = n - 1
    base = sample.baseline_pool_mean_watts
    if sd == 0.0:
        p = 0.0 if mean != 0.0 else 1.0
        ci = (mean, mean)
        t_stat = math.copysign(math.inf, mean) if mean != 0.0 else 0.0
    else:
        se = sd / math.sqrt(n)
        t_stat = mean / se
        p = student_t_two_tailed_p(t_stat, df)
        half = t_critical_95(df) * se
        ci = (mean - half, mean + half)
    return TestResult(
        n=n, df=df, mean_diff_watts=mean, sd_diff_watts=sd, t_stat=t_stat,
        p_two_tailed=p, ci95_watts=ci,
        ci95_pct=(100.0 * ci[0] / base, 100.0 * ci[1] / base),
        mean_reduction_pct=100.0 * mean / base,
        baseline_pool_mean_watts=base)


def analyze_phase(agg: Aggregator, site: Site, expt_phase: Phase | str) -> TestResult:
    return paired_t_test(build_differential_sample(agg, site, expt_phase))


def summarize_phase(agg: Aggregator, site: Site, phase: Phase | str) -> SummaryStats:
    """Distribution of daily energy (kWh) across participants and days."""
    calendar = agg.dataset.calendar
    ph = calendar.by_label(phase) if isinstance(phase, str) else phase
    daily = [dm.mean_watts * 24.0 / 1000.0 for dm in agg.phase_daily_means(ph)]
    if not daily:
        raise ValueError(f"phase {ph.label} has no sampled days to summarize")
    arr = np.array(daily)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return SummaryStats(ph.label, len(arr), float(arr.min()), float(q1),
                        float(med), float(q3), float(arr.max()),
                        float(arr.mean()))


# --------------------------------------------------------------------------
# Published-results consistency harness.
#
# The field study's raw data is unavailable, but its summary statistics are
# internally redundant: from (t, df, CI) one can recover the implied mean,
# sd, p and percent conversions.  The fixture below carries the published
# values; the report recomputes each derived quantity and the deltas.


@dataclass(frozen=True)
class PublishedPhaseResult:
    site: Site
    phase_label: str
    intervention: str
    baseline_pool_mean_w: float
    expt_pool_mean_w: float
    t_stat: float
    df: int
    p_two_tailed: float
    ci95_w: tuple[float, float]
    ci95_pct: tuple[float, float]
    mean_reduction_pct: float


PUBLISHED_RESULTS: tuple[PublishedPhaseResult, ...] = (
    PublishedPhaseResult(Site.NASA, "P3N", "feedback", 51.51, 48.86,
                         3.64, 86, 4.61e-4, (2.22, 7.57), (4.32, 14.71), 9.52),
    PublishedPhaseResult(Site.CMU, "P2C", "incentive", 61.09, 53.91,
                         1.62, 74, 0.11, (-1.84, 17.63), (-3.01, 28.87), 12.93),
    PublishedPhaseResult(Site.CMU, "P3C", "feedback", 61.09, 49.27,
                         2.26, 75, 0.03, (1.58, 24.82), (2.59, 40.63), 21.61),
    PublishedPhaseResult(Site.CMU, "P4C", "feedback+incentive", 61.09, 50.33,
                         2.30, 67, 0.02, (1.96, 27.63), (3.21, 45.24), 24.22),
)


@dataclass(frozen=True)
class ConsistencyRow:
    site: str
    phase_label: str
    intervention: str
    published_t: float
    df: int
    mean_diff_w: float          # CI midpoint: the paired-sample mean
    implied_sd_w: float         # sd recovered from t = mean/(sd/sqrt(n))
    recomputed_p: float
    published_p: float
    delta_p: float
    recomputed_ci95_w: tuple[float, float]
    published_ci95_w: tuple[float, float]
    delta_ci_w: float           # max absolute endpoint delta
    recomputed_ci95_pct: tuple[float, float]
    published_ci95_pct: tuple[float, float]
    delta_ci_pct: float
    recomputed_reduction_pct: float
    published_reduction_pct: float
    delta_reduction_pct: float

    def as_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items()}


def paper_consistency_report(results: Sequence[PublishedPhaseResult] = PUBLISHED_RESULTS,
                             ) -> list[ConsistencyRow]:
    """Recompute every derivable quantity from the published summaries.

    The paired-sample mean is taken as the midpoint of the published watt
    CI (the phase-mean difference disagrees with it because pairing is
    unbalanced; the paired mean is what the tests were run on).
    """
    rows = []
    for r in results:
        n = r.df + 1
        mean = 0.5 * (r.ci95_w[0] + r.ci95_w[1])
        sd = mean * math.sqrt(n) / r.t_stat
        p = student_t_two_tailed_p(r.t_stat, r.df)
        half = t_critical_95(r.df) * sd / math.sqrt(n)
        ci_w = (mean - half, mean + half)
        ci_pct = (100.0 * r.ci95_w[0] / r.baseline_pool_mean_w,
                  100.0 * r.ci95_w[1] / r.baseline_pool_mean_w)
        reduction = 100.0 * mean / r.baseline_pool_mean_w
        rows.append(ConsistencyRow(
            site=r.site.value, phase_label=r.phase_label,
            intervention=r.intervention,
            published_t=r.t_stat, df=r.df, mean_diff_w=mean, implied_sd_w=sd,
            recomputed_p=p, published_p=r.p_two_tailed,
            delta_p=abs(p - r.p_two_tailed),
            recomputed_ci95_w=ci_w, published_ci95_w=r.ci95_w,
            delta_ci_w=max(abs(ci_w[0] - r.ci95_w[0]), abs(ci_w[1] - r.ci95_w[1])),
            recomputed_ci95_pct=ci_pct, published_ci95_pct=r.ci95_pct,
            delta_ci_pct=max(abs(ci_pct[0] - r.ci95_pct[0]),
                             abs(ci_pct[1] - r.ci95_pct[1])),
            recomputed_reduction_pct=reduction,
            published_reduction_pct=r.mean_reduction_pct,
            delta_reduction_pct=abs(reduction - r.mean_reduction_pct)))
    return rows
