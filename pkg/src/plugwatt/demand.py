"""Plugload-integrated controllable building demand.

Total demand decomposes into a cyclostationary non-plugload part (period 24
hours) and a plugload part scaled down by a reduction process R_k, which
follows a first-order recursion driven by previous-hour screentime and the
current incentive.  R_k is measured in percent; the plugload fraction of
the base profile is f_p.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Sequence

import numpy as np

from .core import parse_utc

log = logging.getLogger(__name__)

EPOCH_S = 3600
PERIOD_S = 86400
EPOCHS_PER_DAY = PERIOD_S // EPOCH_S
_HOUR = timedelta(hours=1)


@dataclass(frozen=True)
class CyclostationaryProfile:
    """Per hour-of-day (1..24) mean and std of the base building load, kW."""

    mean_kw: tuple[float, ...]
    std_kw: tuple[float, ...]
    period_s: int = PERIOD_S

    def __post_init__(self) -> None:
        if len(self.mean_kw) != 24 or len(self.std_kw) != 24:
            raise ValueError("profile needs exactly 24 hourly entries")
        if any(m < 0 for m in self.mean_kw):
            raise ValueError("mean_kw entries must be non-negative")

    def base_series(self, horizon: int) -> list[float]:
        return [self.mean_kw[k % EPOCHS_PER_DAY] for k in range(horizon)]


@dataclass(frozen=True)
class ReductionCoefficients:
    alpha_l: float
    beta_l: float
    gamma_l: float
    delta_l: float
    sigma_xi: float

    def __post_init__(self) -> None:
        if self.sigma_xi < 0:
            raise ValueError("sigma_xi must be non-negative")
        if abs(self.beta_l) >= 1:
            log.warning("beta_l = %g has magnitude >= 1; the reduction "
                        "recursion will not be stable", self.beta_l)

    @property
    def fixed_point(self) -> float:
        """Zero-input, zero-noise limit alpha_l / (1 - beta_l)."""
        return self.alpha_l / (1.0 - self.beta_l)


# Estimated on the two-site experiment's pooled percent-reduction series.
CHAPTER_COEFFS = ReductionCoefficients(
    alpha_l=-0.06534, beta_l=0.8078, gamma_l=0.005597, delta_l=0.07303,
    sigma_xi=1.2779)


@dataclass(frozen=True, slots=True)
class EpochInput:
    """Exogenous drive for one epoch: screentime of the previous hour and
    the incentive in force during this hour."""

    screentime_prev_s: float = 0.0
    incentive_usd: float = 0.0


@dataclass(frozen=True, slots=True)
class DemandEpoch:
    k: int
    t_utc: datetime
    non_plugload_kw: float
    plugload_kw: float
    total_kw: float
    reduction_pct: float
    screentime_prev_s: float
    incentive_usd: float


@dataclass(frozen=True)
class DemandPath:
    epochs: tuple[DemandEpoch, ...]
    dt_s: int = EPOCH_S

    def totals_kw(self) -> np.ndarray:
        return np.array([e.total_kw for e in self.epochs])

    def daily_kwh(self) -> list[float]:
        """Energy per whole 24-epoch day (partial trailing days dropped)."""
        totals = self.totals_kw()
        n_days = len(totals) // EPOCHS_PER_DAY
        hours = self.dt_s / 3600.0
        return [float(totals[d * EPOCHS_PER_DAY:(d + 1) * EPOCHS_PER_DAY].sum() * hours)
                for d in range(n_days)]

    def peak_kw(self) -> float:
        return float(self.totals_kw().max())


def simulate_reduction(coeffs: ReductionCoefficients, r0: float,
                       inputs: Sequence[EpochInput],
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Run the reduction recursion over the inputs; None rng means zero noise."""
    if not inputs:
        raise ValueError("need at least one epoch of inputs")
    r = float(r0)
    if not math.isfinite(r):
        raise ValueError("non-finite initial reduction")
    noise = (rng.normal(0.0, coeffs.sigma_xi, len(inputs))
             if rng is not None and coeffs.sigma_xi > 0
             else np.zeros(len(inputs)))
    out = np.empty(len(inputs))
    for k, u in enumerate(inputs):
        if not (math.isfinite(u.screentime_prev_s) and math.isfinite(u.incentive_usd)):
            raise ValueError(f"non-finite input at epoch {k}")
        r = (coeffs.alpha_l + coeffs.beta_l * r
             + coeffs.gamma_l * u.screentime_prev_s
             + coeffs.delta_l * u.incentive_usd + noise[k])
        out[k] = r
    return out


def integrate_demand(profile: CyclostationaryProfile, f_p: float,
                     r_path: Sequence[float],
                     base_day_series: Sequence[float] | None = None,
                     start_utc: datetime | None = None,
                     inputs: Sequence[EpochInput] | None = None) -> DemandPath:
    """Compose total demand from the base profile and a reduction path.

    Epoch k draws its plugload base from the profile hour (k mod 24) + 1;
    the non-plugload part repeats the previous day's value, which for the
    first simulated day is the same-hour value (cyclostationary start).
    """
    if not 0.0 < f_p < 1.0:
        raise ValueError("f_p must lie strictly between 0 and 1")
    horizon = len(r_path)
    if horizon < 1:
        raise ValueError("empty reduction path")
    if base_day_series is None:
        base = profile.base_series(horizon)
    elif len(base_day_series) == EPOCHS_PER_DAY:
        base = [float(base_day_series[k % EPOCHS_PER_DAY]) for k in range(horizon)]
    elif len(base_day_series) >= horizon:
        base = [float(v) for v in base_day_series[:horizon]]
    else:
        raise ValueError("base_day_series must have 24 entries or cover the horizon")
    start = start_utc or datetime(2016, 10, 18, tzinfo=timezone.utc)
    epochs = []
    for k in range(horizon):
        base_prev_day = base[k - EPOCHS_PER_DAY] if k >= EPOCHS_PER_DAY else base[k]
        lnp = (1.0 - f_p) * base_prev_day
        lpb = f_p * base[k]
        eta = min(float(r_path[k]) / 100.0, 1.0)
        lp = (1.0 - eta) * lpb
        u = inputs[k] if inputs is not None else EpochInput()
        epochs.append(DemandEpoch(
            k=k, t_utc=start + k * _HOUR, non_plugload_kw=lnp, plugload_kw=lp,
            total_kw=lnp + lp, reduction_pct=float(r_path[k]),
            screentime_prev_s=u.screentime_prev_s, incentive_usd=u.incentive_usd))
    return DemandPath(tuple(epochs))


# --------------------------------------------------------------------------
# Profile ingestion


def ingest_profile(rows: Iterable[tuple[datetime | str, float]],
                   ) -> CyclostationaryProfile:
    """Build a profile from (timestamp, kw) hourly rows.

    Days missing any of the 24 hours are dropped with a warning; per-hour
    std uses the n-1 denominator and is 0 when only one day survives.
    """
    by_day: dict[date, dict[int, float]] = {}
    for ts, kw in rows:
        dt = parse_utc(ts) if isinstance(ts, str) else ts
        hour = dt.hour + 1
        by_day.setdefault(dt.date(), {})[hour] = float(kw)
    full_days = {d: hours for d, hours in by_day.items() if len(hours) == 24}
    dropped = len(by_day) - len(full_days)
    if dropped:
        log.warning("ingest_profile dropped %d partial day(s)", dropped)
    if not full_days:
        raise ValueError("no full 24-hour days in profile input")
    means, stds = [], []
    for hour in range(1, 25):
        vals = np.array([full_days[d][hour] for d in sorted(full_days)])
        means.append(float(vals.mean()))
        stds.append(float(vals.std(ddof=1)) if len(vals) > 1 else 0.0)
    return CyclostationaryProfile(tuple(means), tuple(stds))


# A plausible medium-office weekday shape used when no measured profile is
# supplied on the command line.
DEFAULT_OFFICE_PROFILE = CyclostationaryProfile(
    mean_kw=(98.0, 96.0, 95.0, 95.0, 96.0, 105.0, 130.0, 180.0, 220.0, 245.0,
             255.0, 258.0, 252.0, 256.0, 258.0, 250.0, 235.0, 205.0, 170.0,
             145.0, 128.0, 115.0, 105.0, 100.0),
    std_kw=(4.0, 4.0, 4.0, 4.0, 4.0, 5.0, 7.0, 9.0, 11.0, 12.0, 12.0, 12.0,
            12.0, 12.0, 12.0, 12.0, 11.0, 10.0, 9.0, 7.0, 6.0, 5.0, 4.0, 4.0))


# --------------------------------------------------------------------------
# Monte Carlo what-if harness


@dataclass(frozen=True)
class RolloutSummary:
    horizon: int
    n_draws: int
    seed: int
    f_p: float
    epoch_mean_kw: tuple[float, ...]
    epoch_p5_kw: tuple[float, ...]
    epoch_p95_kw: tuple[float, ...]
    deterministic_path: DemandPath
    daily_kwh_mean: float
    daily_kwh_p5: float
    daily_kwh_p95: float
    peak_kw_mean: float
    peak_kw_p5: float
    peak_kw_p95: float

    def to_json_dict(self) -> dict:
        det = self.deterministic_path
        return {
            "horizon": self.horizon,
            "n_draws": self.n_draws,
            "seed": self.seed,
            "f_p": self.f_p,
            "epoch_mean_kw": list(self.epoch_mean_kw),
            "epoch_p5_kw": list(self.epoch_p5_kw),
            "epoch_p95_kw": list(self.epoch_p95_kw),
            "deterministic_total_kw": [e.total_kw for e in det.epochs],
            "deterministic_reduction_pct": [e.reduction_pct for e in det.epochs],
            "daily_kwh": {"mean": self.daily_kwh_mean, "p5": self.daily_kwh_p5,
                          "p95": self.daily_kwh_p95},
            "peak_kw": {"mean": self.peak_kw_mean, "p5": self.peak_kw_p5,
                        "p95": self.peak_kw_p95},
        }


def policy_rollout(profile: CyclostationaryProfile,
                   coeffs: ReductionCoefficients,
                   inputs: Sequence[EpochInput],
                   n_monte_carlo: int, seed: int,
                   f_p: float = 0.5, r0: float = 0.0,
                   base_day_series: Sequence[float] | None = None,
                   start_utc: datetime | None = None) -> RolloutSummary:
    """Distribution of demand paths over seeded draws of the process noise.

    Per-draw generators come from spawning one seed sequence, so results
    are reproducible bit-for-bit for a given (seed, n_monte_carlo).
    """
    if n_monte_carlo < 1:
        raise ValueError("n_monte_carlo must be >= 1")
    horizon = len(inputs)
    det_r = simulate_reduction(coeffs, r0, inputs, rng=None)
    det_path = integrate_demand(profile, f_p, det_r, base_day_series,
                                start_utc, inputs)
    children = np.random.SeedSequence(seed).spawn(n_monte_carlo)
    totals = np.empty((n_monte_carlo, horizon))
    daily: list[float] = []
    peaks = np.empty(n_monte_carlo)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        r = simulate_reduction(coeffs, r0, inputs, rng=rng)
        path = integrate_demand(profile, f_p, r, base_day_series, start_utc, inputs)
        totals[i] = path.totals_kw()
        daily.extend(path.daily_kwh())
        peaks[i] = path.peak_kw()
    daily_arr = np.array(daily) if daily else np.array([float("nan")])
    return RolloutSummary(
        horizon=horizon, n_draws=n_monte_carlo, seed=seed, f_p=f_p,
        epoch_mean_kw=tuple(float(v) for v in totals.mean(axis=0)),
        epoch_p5_kw=tuple(float(v) for v in np.percentile(totals, 5, axis=0)),
        epoch_p95_kw=tuple(float(v) for v in np.percentile(totals, 95, axis=0)),
        deterministic_path=det_path,
        daily_kwh_mean=float(daily_arr.mean()),
        daily_kwh_p5=float(np.percentile(daily_arr, 5)),
        daily_kwh_p95=float(np.percentile(daily_arr, 95)),
        peak_kw_mean=float(peaks.mean()),
        peak_kw_p5=float(np.percentile(peaks, 5)),
        peak_kw_p95=float(np.percentile(peaks, 95)))
