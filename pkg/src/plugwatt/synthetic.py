"""Synthetic experiment generator.

The field study's raw data is not distributable, so the pipeline is
exercised on generated datasets with known ground truth: a workday-gated
two-state (active/idle) occupant load with Gaussian jitter, participant and
weekday multipliers as the nuisance factors the matched-pairs design is
meant to block, and a configurable multiplicative reduction on intervention
days.  Everything is a pure function of the master seed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Sequence

import numpy as np

from .arx import ArxCoefficients, HourPoint
from .core import (
    DEFAULT_TZ,
    Dataset,
    IncentiveSchedule,
    Phase,
    PhaseCalendar,
    PhaseKind,
    ReadingSet,
    SessionSet,
    Site,
    VALID_INCENTIVES_USD,
    day_bounds,
    is_workday,
    study_calendar,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    site: Site = Site.CMU
    n_participants: int = 16
    phases: tuple[Phase, ...] | None = None  # None: the study calendar's site phases
    floor_w: float = 8.0            # always-on base draw per participant
    active_w: float = 45.0          # extra mean draw while present
    work_start_s: int = 9 * 3600    # workday window, seconds after midnight
    work_end_s: int = 17 * 3600
    reduction_by_kind: tuple[tuple[PhaseKind, float], ...] = (
        (PhaseKind.INCENTIVE, 0.08),
        (PhaseKind.FEEDBACK, 0.10),
        (PhaseKind.FEEDBACK_AND_INCENTIVE, 0.15),
    )
    sessions_per_workday: float = 3.0
    session_mean_s: float = 600.0
    sample_noise_w: float = 2.0     # per-sample jitter, W
    day_noise_frac: float = 0.05    # per-day multiplicative spread
    weekday_spread: float = 0.10    # per-(participant, weekday) spread
    participant_spread: float = 0.20
    n_sockets: int = 2
    cadence_s: int = 60
    tz: str = DEFAULT_TZ
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_participants < 1 or self.n_sockets < 1:
            raise ValueError("need at least one participant and one socket")
        for _, r in self.reduction_by_kind:
            if not 0.0 <= r < 1.0:
                raise ValueError("reductions must lie in [0, 1)")
        if self.cadence_s < 1:
            raise ValueError("cadence_s must be positive")

    def calendar(self) -> PhaseCalendar:
        if self.phases is not None:
            return PhaseCalendar(self.phases)
        return PhaseCalendar(tuple(study_calendar().site_phases(self.site)))

    def reduction_for(self, kind: PhaseKind) -> float:
        for k, r in self.reduction_by_kind:
            if k is kind:
                return r
        return 0.0


@dataclass(frozen=True)
class SynthTruth:
    """Ground truth embedded in a generated dataset."""

    reduction_by_kind: tuple[tuple[PhaseKind, float], ...]
    floor_w: float
    active_w: float
    seed: int


def generate_incentive_schedule(seed: int, dates: Sequence[date]) -> IncentiveSchedule:
    """Assign daily amounts from {5..50 step 5}.

    Exactly 10 dates get a shuffled permutation of the full value set (no
    amount repeats); any other count falls back to i.i.d. uniform draws
    with a warning.
    """
    if not dates:
        raise ValueError("need at least one date")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = list(VALID_INCENTIVES_USD)
    ordered = sorted(dates)
    if len(ordered) == len(values):
        perm = rng.permutation(len(values))
        amounts = [values[i] for i in perm]
    else:
        log.warning("incentive schedule over %d dates (not %d): falling back "
                    "to i.i.d. uniform draws", len(ordered), len(values))
        amounts = [values[i] for i in rng.integers(0, len(values), len(ordered))]
    return IncentiveSchedule.from_pairs(
        (d, float(a)) for d, a in zip(ordered, amounts))


def _phase_of(calendar: PhaseCalendar, site: Site, day: date) -> Phase | None:
    return calendar.phase_of(site, day)


def generate_synthetic(config: SynthConfig) -> tuple[Dataset, SynthTruth]:
    """Generate a full dataset (readings, screentime, incentives, phases)."""
    calendar = config.calendar()
    root = np.random.SeedSequence(config.seed)
    # Fixed spawn order keeps output byte-identical for a given seed.
    incentive_ss, *participant_ss = root.spawn(1 + config.n_participants)

    incentive_days: list[date] = []
    for phase in calendar.phases:
        if phase.kind.has_incentive:
            incentive_days.extend(d for d in phase.days() if is_workday(d))
    if incentive_days:
        incentives = generate_incentive_schedule(
            int(incentive_ss.generate_state(1)[0]), incentive_days)
    else:
        incentives = IncentiveSchedule.from_pairs([])

    width = max(2, len(str(config.n_participants)))
    reading_rows: list[tuple[int, str, str, float]] = []
    session_rows: list[tuple[str, float, float]] = []

    all_days = [d for phase in calendar.phases for d in phase.days()]

    for idx, pss in enumerate(participant_ss):
        pid = f"p{idx + 1:0{width}d}"
        rng = np.random.default_rng(pss)
        p_factor = max(0.2, 1.0 + config.participant_spread * rng.standard_normal())
        weekday_factor = np.maximum(
            0.2, 1.0 + config.weekday_spread * rng.standard_normal(7))
        shares = rng.uniform(0.5, 1.5, config.n_sockets)
        shares = shares / shares.sum()
        socket_ids = [f"s{j + 1}" for j in range(config.n_sockets)]

        for day in all_days:
            phase = _phase_of(calendar, config.site, day)
            reduction = config.reduction_for(phase.kind) if phase else 0.0
            start_epoch, end_epoch = day_bounds(day, config.tz)
            day_len = end_epoch - start_epoch
            offsets = np.arange(0, min(day_len, 86400), config.cadence_s)
            day_factor = max(0.2, 1.0 + config.day_noise_frac * rng.standard_normal())
            scale = p_factor * weekday_factor[day.weekday()] * day_factor * (1.0 - reduction)

            working = is_workday(day)
            base = np.full(len(offsets), config.floor_w)
            if working:
                in_window = (offsets >= config.work_start_s) & (offsets < config.work_end_s)
                base = base + config.active_w * in_window
            jitter = config.sample_noise_w * rng.standard_normal(len(offsets))
            totals = np.maximum(0.0, (base + jitter) * scale)

            ts = start_epoch + offsets
            for sid, share in zip(socket_ids, shares):
                socket_watts = totals * share
                reading_rows.extend(zip(ts.tolist(), [pid] * len(ts),
                                        [sid] * len(ts),
                                        socket_watts.tolist()))

            # Dashboard screentime happens only on intervention workdays.
            if working and phase is not None and phase.kind is not PhaseKind.BASELINE:
                n_sessions = int(rng.poisson(config.sessions_per_workday))
                for _ in range(n_sessions):
                    # Whole seconds so the CSV round-trip is exact.
                    start = int(rng.uniform(config.work_start_s, config.work_end_s))
                    dur = int(np.clip(rng.exponential(config.session_mean_s),
                                      60.0, 4.0 * config.session_mean_s))
                    session_rows.append((pid, float(start_epoch + start),
                                         float(start_epoch + start + dur)))

    dataset = Dataset(
        readings=ReadingSet.from_rows(reading_rows),
        sessions=SessionSet.from_rows(session_rows),
        incentives=incentives,
        calendar=calendar,
        site_tz=config.tz)
    truth = SynthTruth(config.reduction_by_kind, config.floor_w,
                       config.active_w, config.seed)
    return dataset, truth


# --------------------------------------------------------------------------
# Direct model-space generation for estimator checks


def generate_arx_points(coeffs: ArxCoefficients, n_days: int, seed: int,
                        screentime_max_s: float = 1800.0,
                        incentive_values: Sequence[float] = (0.0,),
                        start_day: date = date(2016, 10, 18),
                        ) -> list[HourPoint]:
    """Hourly series drawn exactly from the ARX recursion.

    Screentime is i.i.d. uniform per hour; the incentive cycles through
    `incentive_values` day by day.  The chain runs straight through day
    boundaries; lagging still consumes the first hour of each day, and every
    remaining transition obeys the model, so fits on these points estimate
    the generating coefficients.
    """
    if n_days < 1:
        raise ValueError("need at least one day")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    gamma = coeffs.gamma if coeffs.gamma is not None else 0.0
    delta = coeffs.delta if coeffs.delta is not None else 0.0
    points: list[HourPoint] = []
    y_prev = coeffs.alpha / (1.0 - coeffs.beta[0]) if coeffs.beta[0] != 1.0 else 0.0
    for d in range(n_days):
        day = start_day + timedelta(days=d)
        incentive = float(incentive_values[d % len(incentive_values)])
        for hour in range(1, 25):
            st = float(rng.uniform(0.0, screentime_max_s))
            eps = float(rng.normal(0.0, coeffs.sigma_eps)) if coeffs.sigma_eps > 0 else 0.0
            y = (coeffs.alpha + coeffs.beta[0] * y_prev + gamma * st
                 + delta * incentive + eps)
            points.append(HourPoint(day, hour, y, st, incentive,
                                    observed_pool_w=abs(y) + 40.0))
            y_prev = y
    return points
