"""The competition engine: baselines, live scores, ranking, winners.

A participant's score compares today's active consumption (idle samples
below the 5 W socket threshold excluded) against their baseline-phase
active average; 900 means no change, each percent of reduction adds one
point.  An inactivity guard keeps unplugged-but-idle strips from winning.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Sequence

import numpy as np

from .aggregation import Aggregator, weighted_percentile
from .core import Phase, Site, day_bounds

log = logging.getLogger(__name__)

ACTIVE_THRESHOLD_W = 5.0
INACTIVITY_WINDOW_S = 3600.0
INACTIVITY_VAR_W2 = 0.25
FLOOR_FACTOR = 1.2
FLOOR_PERCENTILE = 5.0


def score_formula(baseline_watts: float, expt_watts: float) -> float:
    """900 plus the percent improvement of expt over baseline."""
    if baseline_watts <= 0:
        raise ValueError("baseline must be positive")
    return 900.0 + 100.0 * (baseline_watts - expt_watts) / baseline_watts


@dataclass(frozen=True, slots=True)
class BaselineRecord:
    participant_id: str
    active_baseline_watts: float
    computed_from: str          # phase label
    always_on_floor_w: float    # 5th percentile of baseline total wattage

    def __post_init__(self) -> None:
        if self.active_baseline_watts <= 0:
            raise ValueError("active baseline must be positive")


@dataclass(frozen=True, slots=True)
class ScoreEntry:
    participant_id: str
    day: date
    as_of: datetime
    score: float
    rank: int
    inactive: bool


def compute_baselines(agg: Aggregator, site: Site,
                      threshold_w: float = ACTIVE_THRESHOLD_W,
                      ) -> dict[str, BaselineRecord]:
    """Active baseline per participant: mean over baseline days of the
    active daily mean, skipping days with no above-threshold activity.
    Participants never active in the baseline are omitted (unscorable)."""
    baseline = agg.dataset.calendar.baseline(site)
    records: dict[str, BaselineRecord] = {}
    for pid in agg.phase_participants(baseline):
        actives = [m for day in baseline.days()
                   if (m := agg.active_mean_power(pid, day, threshold_w)) is not None]
        if not actives:
            log.info("participant %s has no above-threshold baseline activity; "
                     "not scorable", pid)
            continue
        values, seconds = agg.weighted_wattage_distribution(pid, baseline)
        floor = weighted_percentile(values, seconds, FLOOR_PERCENTILE)
        records[pid] = BaselineRecord(pid, float(np.mean(actives)),
                                      baseline.label, floor)
    return records


class Scoreboard:
    """Scoring bound to one dataset snapshot and one site."""

    def __init__(self, agg: Aggregator, site: Site,
                 threshold_w: float = ACTIVE_THRESHOLD_W,
                 window_s: float = INACTIVITY_WINDOW_S,
                 var_threshold_w2: float = INACTIVITY_VAR_W2,
                 floor_factor: float = FLOOR_FACTOR):
        self.agg = agg
        self.site = site
        self.threshold_w = threshold_w
        self.window_s = window_s
        self.var_threshold_w2 = var_threshold_w2
        self.floor_factor = floor_factor
        self.baselines = compute_baselines(agg, site, threshold_w)

    def _offset(self, day: date, as_of: datetime) -> tuple[float, float]:
        """(seconds since local midnight, local day length)."""
        start, end = day_bounds(day, self.agg.tz)
        return as_of.timestamp() - start, float(end - start)

    def live_score(self, participant_id: str, day: date,
                   as_of: datetime) -> float | None:
        """Score from today's active average over [local midnight, as_of).

        None when the participant has no baseline or no active samples yet.
        """
        record = self.baselines.get(participant_id)
        if record is None:
            return None
        offset, day_len = self._offset(day, as_of)
        if offset <= 0:
            return None
        expt = self.agg.active_mean_power(participant_id, day, self.threshold_w,
                                          0.0, min(offset, day_len))
        if expt is None:
            return None
        return score_formula(record.active_baseline_watts, expt)

    def detect_inactivity(self, participant_id: str, day: date,
                          as_of: datetime) -> bool:
        """Flat-and-low test over the trailing window.

        True only when every socket's in-window sample variance stays under
        the threshold AND the total mean sits below floor_factor times the
        participant's always-on floor.  Thin coverage (under half the
        window) gets the benefit of the doubt.
        """
        record = self.baselines.get(participant_id)
        if record is None:
            return False
        hi = as_of.timestamp()
        lo = hi - self.window_s
        mean, coverage, n_samples = self.agg.window_stats(participant_id, lo, hi)
        if mean is None or n_samples == 0 or coverage < 0.5 * self.window_s:
            return False
        for _, ts, watts in self.agg.dataset.readings.participant_streams(participant_id):
            i0 = int(np.searchsorted(ts, lo, side="left"))
            i1 = int(np.searchsorted(ts, hi, side="left"))
            if i1 > i0 and float(np.var(watts[i0:i1])) > self.var_threshold_w2:
                return False
        return mean < self.floor_factor * record.always_on_floor_w

    def rank_leaderboard(self, day: date, as_of: datetime) -> list[ScoreEntry]:
        """Scored participants, actives before inactives, descending score,
        ties broken by participant id."""
        scored = []
        for pid in sorted(self.baselines):
            s = self.live_score(pid, day, as_of)
            if s is None:
                continue
            scored.append((self.detect_inactivity(pid, day, as_of), -s, pid, s))
        scored.sort()
        return [ScoreEntry(pid, day, as_of, s, rank, inactive)
                for rank, (inactive, _, pid, s) in enumerate(scored, start=1)]

    def end_of_day(self, day: date) -> datetime:
        return datetime.fromtimestamp(day_bounds(day, self.agg.tz)[1],
                                      tz=timezone.utc)

    def declare_winner(self, day: date) -> str | None:
        """Rank-1 participant at end of day, if the day carries a posted
        incentive; inactive participants never win."""
        phase = self.agg.dataset.calendar.phase_of(self.site, day)
        if phase is None or not phase.kind.has_incentive:
            return None
        if self.agg.dataset.incentives.amount_on(day) is None:
            return None
        entries = self.rank_leaderboard(day, self.end_of_day(day))
        if not entries or entries[0].inactive:
            return None
        return entries[0].participant_id


def scores_csv_rows(entries: Sequence[ScoreEntry]) -> list[list[str]]:
    rows = [["date", "as_of_utc", "participant_id", "score", "rank", "inactive_flag"]]
    for e in entries:
        rows.append([e.day.isoformat(), e.as_of.isoformat(), e.participant_id,
                     repr(e.score), str(e.rank), str(e.inactive).lower()])
    return rows


def winners_csv_rows(winners: Sequence[tuple[date, str, float]]) -> list[list[str]]:
    rows = [["date", "participant_id", "amount_usd"]]
    for day, pid, amount in winners:
        rows.append([day.isoformat(), pid, repr(amount)])
    return rows
