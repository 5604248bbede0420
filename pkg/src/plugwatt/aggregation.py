"""Deterministic averaging over socket power streams.

Each reading holds its value until the next reading of the same stream, but
never longer than the staleness cap; time not covered by any reading is
excluded from every mean (a silent meter is missing data, not zero watts).
Totals across a participant's sockets divide by the union of covered time.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .core import (
    CADENCE_S,
    STALENESS_CAP_S,
    Dataset,
    Phase,
    PhaseKind,
    Site,
    day_bounds,
    day_window,
    merge_intervals,
    union_length,
    weekday_name,
)


@dataclass(frozen=True, slots=True)
class ParticipantDailyMean:
    participant_id: str
    phase_label: str
    day: date
    mean_watts: float
    n_samples: int


@dataclass(frozen=True, slots=True)
class PoolHourlyMean:
    phase_label: str
    day: date
    hour: int
    mean_watts: float
    n_participants: int


@dataclass(frozen=True, slots=True)
class MatchedPair:
    """One experiment day paired with the same-weekday baseline reference."""

    participant_id: str
    weekday: str
    expt_day: date
    baseline_watts: float
    expt_watts: float


def stream_segments(ts: np.ndarray, watts: np.ndarray, t0: float, tf: float,
                    cap: float = STALENESS_CAP_S,
                    ) -> tuple[float, list[tuple[float, float]]]:
    """Integral (watt-seconds) and covered intervals of one stream on [t0, tf).

    Reading i covers [ts[i], min(ts[i+1], ts[i]+cap)) clipped to the window.
    """
    if tf <= t0 or len(ts) == 0:
        return 0.0, []
    i0 = int(np.searchsorted(ts, t0 - cap, side="right"))
    i1 = int(np.searchsorted(ts, tf, side="left"))
    if i0 >= i1:
        return 0.0, []
    seg_ts = ts[i0:i1].astype(np.float64)
    nxt = np.empty(i1 - i0, dtype=np.float64)
    if i1 - i0 > 1:
        nxt[:-1] = ts[i0 + 1:i1]
    nxt[-1] = ts[i1] if i1 < len(ts) else np.inf
    ends = np.minimum(nxt, seg_ts + cap)
    s = np.maximum(seg_ts, t0)
    e = np.minimum(ends, tf)
    dur = np.maximum(e - s, 0.0)
    integral = float(np.dot(watts[i0:i1], dur))
    mask = dur > 0.0
    segments = list(zip(s[mask].tolist(), e[mask].tolist()))
    return integral, segments


def stream_weighted_values(ts: np.ndarray, watts: np.ndarray, t0: float, tf: float,
                           cap: float = STALENESS_CAP_S,
                           ) -> tuple[np.ndarray, np.ndarray]:
    """(values, durations) of the step function restricted to [t0, tf)."""
    if tf <= t0 or len(ts) == 0:
        return np.empty(0), np.empty(0)
    i0 = int(np.searchsorted(ts, t0 - cap, side="right"))
    i1 = int(np.searchsorted(ts, tf, side="left"))
    if i0 >= i1:
        return np.empty(0), np.empty(0)
    seg_ts = ts[i0:i1].astype(np.float64)
    nxt = np.empty(i1 - i0, dtype=np.float64)
    if i1 - i0 > 1:
        nxt[:-1] = ts[i0 + 1:i1]
    nxt[-1] = ts[i1] if i1 < len(ts) else np.inf
    ends = np.minimum(nxt, seg_ts + cap)
    dur = np.maximum(np.minimum(ends, tf) - np.maximum(seg_ts, t0), 0.0)
    mask = dur > 0.0
    return watts[i0:i1][mask], dur[mask]


class Aggregator:
    """Averaging service bound to one validated dataset.

    Daily and hourly means are cached; a fresh Aggregator should be built if
    the underlying dataset changes (datasets are immutable, so in practice
    one per snapshot).
    """

    def __init__(self, dataset: Dataset, staleness_cap_s: float = STALENESS_CAP_S):
        self.dataset = dataset
        self.cap = staleness_cap_s
        self.tz = dataset.site_tz
        self._daily: dict[tuple[str, date], float | None] = {}
        self._daily_n: dict[tuple[str, date], int] = {}
        self._hourly: dict[tuple[str, date, int], float | None] = {}
        self._phase_roster: dict[str, list[str]] = {}

    # -- interval means ----------------------------------------------------

    def interval_mean_power(self, participant_id: str, day: date, t0: float,
                            tf: float) -> float | None:
        """Mean watts over [t0, tf) seconds after local midnight, or None.

        Sums socket integrals and divides by the union of covered time, so
        overlapping socket coverage is not double-counted in the denominator.
        """
        lo, hi = day_window(day, t0, tf, self.tz)
        return self._mean_between(participant_id, lo, hi)[0]

    def window_stats(self, participant_id: str, lo: float, hi: float,
                     ) -> tuple[float | None, float, int]:
        """(mean watts or None, union coverage seconds, sample count) over an
        epoch-second window [lo, hi)."""
        streams = self.dataset.readings.participant_streams(participant_id)
        if not streams:
            return None, 0.0, 0
        integral = 0.0
        segments: list[tuple[float, float]] = []
        n_samples = 0
        for _, ts, watts in streams:
            part, segs = stream_segments(ts, watts, lo, hi, self.cap)
            integral += part
            segments.extend(segs)
            n_samples += int(np.searchsorted(ts, hi, side="left")
                             - np.searchsorted(ts, lo, side="left"))
        coverage = union_length(segments)
        if coverage <= 0.0:
            return None, coverage, n_samples
        return integral / coverage, coverage, n_samples

    def _mean_between(self, participant_id: str, lo: float, hi: float,
                      ) -> tuple[float | None, int]:
        mean, _, n_samples = self.window_stats(participant_id, lo, hi)
        return mean, n_samples

    def daily_mean(self, participant_id: str, day: date) -> float | None:
        """Mean watts over the local day, averaged over sampled time only."""
        key = (participant_id, day)
        if key not in self._daily:
            lo, hi = day_bounds(day, self.tz)
            mean, n = self._mean_between(participant_id, lo, hi)
            self._daily[key] = mean
            self._daily_n[key] = n
        return self._daily[key]

    def daily_sample_count(self, participant_id: str, day: date) -> int:
        self.daily_mean(participant_id, day)
        return self._daily_n[(participant_id, day)]

    def hourly_mean(self, participant_id: str, day: date, hour: int) -> float | None:
        key = (participant_id, day, hour)
        if key not in self._hourly:
            self._hourly[key] = self.interval_mean_power(
                participant_id, day, 3600 * (hour - 1), 3600 * hour)
        return self._hourly[key]

    def active_mean_power(self, participant_id: str, day: date,
                          threshold_w: float = 5.0,
                          t0: float = 0.0, tf: float = 86400.0) -> float | None:
        """Sum over sockets of the time-weighted mean of samples strictly
        above the idle threshold; sockets with no active time contribute
        nothing.  None when no socket was ever active in the window."""
        lo, hi = day_window(day, t0, tf, self.tz)
        total = 0.0
        any_active = False
        for _, ts, watts in self.dataset.readings.participant_streams(participant_id):
            vals, dur = stream_weighted_values(ts, watts, lo, hi, self.cap)
            mask = vals > threshold_w
            active_time = float(dur[mask].sum())
            if active_time > 0.0:
                total += float(np.dot(vals[mask], dur[mask])) / active_time
                any_active = True
        return total if any_active else None

    # -- pools and phases ---------------------------------------------------

    def phase_participants(self, phase: Phase) -> list[str]:
        """Participants with at least one reading during the phase."""
        if phase.label not in self._phase_roster:
            lo = day_bounds(phase.start_date, self.tz)[0]
            hi = day_bounds(phase.end_date, self.tz)[1]
            present = set()
            for (pid, _), (ts, _) in self.dataset.readings.items():
                if pid in present:
                    continue
                i0 = np.searchsorted(ts, lo, side="left")
                i1 = np.searchsorted(ts, hi, side="left")
                if i1 > i0:
                    present.add(pid)
            self._phase_roster[phase.label] = sorted(present)
        return self._phase_roster[phase.label]

    def pool_hourly_mean(self, phase: Phase, day: date, hour: int) -> PoolHourlyMean | None:
        """Mean over phase participants of the hourly mean; skips absentees."""
        vals = []
        for pid in self.phase_participants(phase):
            m = self.hourly_mean(pid, day, hour)
            if m is not None:
                vals.append(m)
        if not vals:
            return None
        return PoolHourlyMean(phase.label, day, hour,
                              float(np.mean(vals)), len(vals))

    def pool_daily_mean(self, phase: Phase, day: date) -> float | None:
        vals = [m for pid in self.phase_participants(phase)
                if (m := self.daily_mean(pid, day)) is not None]
        return float(np.mean(vals)) if vals else None

    def phase_daily_means(self, phase: Phase) -> list[ParticipantDailyMean]:
        out = []
        for pid in self.phase_participants(phase):
            for day in phase.days():
                m = self.daily_mean(pid, day)
                if m is not None:
                    out.append(ParticipantDailyMean(
                        pid, phase.label, day, m,
                        self.daily_sample_count(pid, day)))
        return out

    def baseline_weekday_reference(self, baseline: Phase, participant_id: str,
                                   ) -> dict[str, float]:
        """Per-weekday mean of the participant's baseline daily means."""
        acc: dict[str, list[float]] = {}
        for day in baseline.days():
            m = self.daily_mean(participant_id, day)
            if m is not None:
                acc.setdefault(weekday_name(day), []).append(m)
        return {wd: float(np.mean(vals)) for wd, vals in acc.items()}

    def weekday_matched_pairs(self, baseline: Phase, expt: Phase,
                              participant_id: str) -> list[MatchedPair]:
        """Pair each sampled experiment day with the same-weekday baseline
        reference; days missing either side are dropped."""
        ref = self.baseline_weekday_reference(baseline, participant_id)
        pairs = []
        for day in expt.days():
            wd = weekday_name(day)
            if wd not in ref:
                continue
            m = self.daily_mean(participant_id, day)
            if m is None:
                continue
            pairs.append(MatchedPair(participant_id, wd, day, ref[wd], m))
        return pairs

    # -- distributions -------------------------------------------------------

    def weighted_wattage_distribution(self, participant_id: str, phase: Phase,
                                      ) -> tuple[np.ndarray, np.ndarray]:
        """(total watts, seconds) pairs of the participant's summed step
        signal over the phase, restricted to time covered by some socket.
        Sockets silent at an instant count zero toward that instant's total."""
        lo = day_bounds(phase.start_date, self.tz)[0]
        hi = day_bounds(phase.end_date, self.tz)[1]
        per_socket: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        bounds: list[np.ndarray] = []
        for _, ts, watts in self.dataset.readings.participant_streams(participant_id):
            vals, dur = stream_weighted_values(ts, watts, lo, hi, self.cap)
            if len(vals) == 0:
                continue
            _, segs = stream_segments(ts, watts, lo, hi, self.cap)
            starts = np.array([a for a, _ in segs])
            ends = np.array([b for _, b in segs])
            per_socket.append((starts, ends, vals))
            bounds.append(starts)
            bounds.append(ends)
        if not per_socket:
            return np.empty(0), np.empty(0)
        edges = np.unique(np.concatenate(bounds))
        mids = (edges[:-1] + edges[1:]) / 2.0
        widths = np.diff(edges)
        totals = np.zeros(len(mids))
        covered = np.zeros(len(mids), dtype=bool)
        for starts, ends, vals in per_socket:
            idx = np.searchsorted(starts, mids, side="right") - 1
            idx_clip = np.clip(idx, 0, len(starts) - 1)
            inside = (idx >= 0) & (mids < ends[idx_clip])
            totals += np.where(inside, vals[idx_clip], 0.0)
            covered |= inside
        return totals[covered], widths[covered]


def weighted_percentile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Lower weighted percentile: smallest value with CDF >= q (q in 0..100)."""
    if len(values) == 0:
        raise ValueError("empty distribution")
    order = np.argsort(values, kind="stable")
    v = values[order]
    cum = np.cumsum(weights[order])
    target = (q / 100.0) * cum[-1]
    idx = int(np.searchsorted(cum, target, side="left"))
    return float(v[min(idx, len(v) - 1)])


def export_aggregates(agg: Aggregator, site: Site) -> list[tuple[str, str, date, str, float]]:
    """Rows (participant, phase, day, kind, watts) for aggregates.csv."""
    rows: list[tuple[str, str, date, str, float]] = []
    for phase in agg.dataset.calendar.site_phases(site):
        for pid in agg.phase_participants(phase):
            for day in phase.days():
                m = agg.daily_mean(pid, day)
                if m is not None:
                    rows.append((pid, phase.label, day, "daily", m))
                a = agg.active_mean_power(pid, day)
                if a is not None:
                    rows.append((pid, phase.label, day, "active_daily", a))
    return rows
