"""Domain types and time conventions shared by every other module.

Days are bounded by local midnight in the site timezone; hour ``h`` of a day
(1..24) covers the half-open window ``[3600*(h-1), 3600*h)`` seconds after
local midnight.  All timestamps are stored as UTC epoch seconds internally
and serialized as ISO-8601 with a ``+00:00`` offset.
"""
from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Sequence
from zoneinfo import ZoneInfo

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TZ = "America/Los_Angeles"

# Canonical sampling assumptions for step-function power series.
CADENCE_S = 60
STALENESS_CAP_S = 300

WEEKDAY_NAMES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday",
                 "Saturday", "Sunday")

VALID_INCENTIVES_USD = tuple(range(5, 55, 5))

COMFORT_LEVELS = tuple(range(-3, 4))


class Site(str, Enum):
    NASA = "NASA"
    CMU = "CMU"


class PhaseKind(str, Enum):
    BASELINE = "Baseline"
    INCENTIVE = "Incentive"
    FEEDBACK = "Feedback"
    FEEDBACK_AND_INCENTIVE = "FeedbackAndIncentive"

    @property
    def has_incentive(self) -> bool:
        return self in (PhaseKind.INCENTIVE, PhaseKind.FEEDBACK_AND_INCENTIVE)

    @property
    def has_feedback(self) -> bool:
        return self in (PhaseKind.FEEDBACK, PhaseKind.FEEDBACK_AND_INCENTIVE)


# --------------------------------------------------------------------------
# Time conventions


def parse_utc(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_utc(epoch_s: float) -> str:
    """ISO-8601 with an explicit +00:00 offset (parseable on Python 3.10)."""
    return datetime.fromtimestamp(epoch_s, tz=timezone.utc).isoformat()


def epoch_s(dt: datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


@lru_cache(maxsize=4096)
def local_midnight_epoch(day: date, tz: str) -> int:
    """Epoch seconds of local midnight starting `day` in zone `tz`."""
    return int(datetime(day.year, day.month, day.day, tzinfo=ZoneInfo(tz)).timestamp())


def day_bounds(day: date, tz: str) -> tuple[int, int]:
    """[start, end) epoch seconds of the local day; length varies on DST days."""
    return local_midnight_epoch(day, tz), local_midnight_epoch(day + timedelta(days=1), tz)


def day_window(day: date, t0: float, tf: float, tz: str) -> tuple[float, float]:
    """Epoch bounds of the window `[t0, tf)` seconds after local midnight."""
    base = local_midnight_epoch(day, tz)
    return base + t0, base + tf


def weekday_name(day: date) -> str:
    return WEEKDAY_NAMES[day.weekday()]


def is_workday(day: date) -> bool:
    return day.weekday() < 5


@dataclass(frozen=True, slots=True)
class TimeIndex:
    """A (day, hour) pair; hour runs 1..24 counted from local midnight."""

    day: date
    hour: int

    def __post_init__(self) -> None:
        if not 1 <= self.hour <= 24:
            raise ValueError(f"hour must be in 1..24, got {self.hour}")

    @property
    def weekday(self) -> str:
        return weekday_name(self.day)

    def offsets(self) -> tuple[int, int]:
        """Window as seconds after local midnight."""
        return 3600 * (self.hour - 1), 3600 * self.hour

    def window(self, tz: str) -> tuple[float, float]:
        lo, hi = self.offsets()
        return day_window(self.day, lo, hi, tz)


# --------------------------------------------------------------------------
# Interval algebra (used for screentime sessions, heartbeat coalescing and
# step-function coverage)


def merge_intervals(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of half-open intervals; touching intervals are joined."""
    out: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def union_length(intervals: Iterable[tuple[float, float]]) -> float:
    return sum(hi - lo for lo, hi in merge_intervals(intervals))


def clip_length(intervals: Iterable[tuple[float, float]], lo: float, hi: float) -> float:
    """Total overlap between already-disjoint sorted intervals and [lo, hi)."""
    total = 0.0
    for a, b in intervals:
        if a >= hi:
            break
        total += max(0.0, min(b, hi) - max(a, lo))
    return total


# --------------------------------------------------------------------------
# Value types


@dataclass(frozen=True, slots=True)
class PowerReading:
    """One socket-level sample; the exchange unit for ingest APIs."""

    timestamp: datetime
    participant_id: str
    socket_id: str
    watts: float

    def epoch(self) -> int:
        return epoch_s(self.timestamp)


@dataclass(frozen=True, slots=True)
class ScreentimeSession:
    participant_id: str
    start: datetime
    end: datetime

    def seconds(self) -> float:
        return (self.end - self.start).total_seconds()


@dataclass(frozen=True, slots=True)
class ComfortReport:
    participant_id: str
    timestamp: datetime
    level: int

    def __post_init__(self) -> None:
        if self.level not in COMFORT_LEVELS:
            raise ValueError(f"comfort level must be an integer in -3..3, got {self.level}")


@dataclass(frozen=True, slots=True)
class Phase:
    """A contiguous run of study days at one site, inclusive on both ends."""

    site: Site
    kind: PhaseKind
    label: str
    start_date: date
    end_date: date

    def days(self) -> list[date]:
        n = (self.end_date - self.start_date).days
        return [self.start_date + timedelta(days=i) for i in range(n + 1)]

    def contains(self, day: date) -> bool:
        return self.start_date <= day <= self.end_date


@dataclass(frozen=True)
class PhaseCalendar:
    phases: tuple[Phase, ...]

    def site_phases(self, site: Site) -> list[Phase]:
        return sorted((p for p in self.phases if p.site == site),
                      key=lambda p: p.start_date)

    def baseline(self, site: Site) -> Phase:
        found = [p for p in self.site_phases(site) if p.kind is PhaseKind.BASELINE]
        if len(found) != 1:
            raise LookupError(f"expected exactly one baseline phase for {site.value}, "
                              f"found {len(found)}")
        return found[0]

    def phase_of(self, site: Site, day: date) -> Phase | None:
        for p in self.site_phases(site):
            if p.contains(day):
                return p
        return None

    def by_label(self, label: str) -> Phase:
        for p in self.phases:
            if p.label == label:
                return p
        raise LookupError(f"no phase labelled {label!r}")

    def sites(self) -> list[Site]:
        return sorted({p.site for p in self.phases}, key=lambda s: s.value)


def study_calendar() -> PhaseCalendar:
    """The fall 2016 two-site deployment calendar."""
    d = date
    return PhaseCalendar(phases=(
        Phase(Site.NASA, PhaseKind.BASELINE, "P1N", d(2016, 9, 12), d(2016, 10, 17)),
        Phase(Site.NASA, PhaseKind.FEEDBACK, "P3N", d(2016, 10, 18), d(2016, 11, 11)),
        Phase(Site.CMU, PhaseKind.BASELINE, "P1C", d(2016, 9, 12), d(2016, 10, 17)),
        Phase(Site.CMU, PhaseKind.INCENTIVE, "P2C", d(2016, 10, 18), d(2016, 10, 30)),
        Phase(Site.CMU, PhaseKind.FEEDBACK, "P3C", d(2016, 10, 31), d(2016, 11, 13)),
        Phase(Site.CMU, PhaseKind.FEEDBACK_AND_INCENTIVE, "P4C", d(2016, 11, 14), d(2016, 11, 25)),
    ))


# --------------------------------------------------------------------------
# Bulk collections.  Readings are held columnar per (participant, socket)
# stream so that million-row datasets stay cheap to scan.


class ReadingSet:
    """Immutable power readings grouped into per-socket streams."""

    __slots__ = ("_streams", "_n_rows")

    def __init__(self, streams: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]]):
        frozen: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]] = {}
        n = 0
        for key, (ts, watts) in streams.items():
            ts = np.asarray(ts, dtype=np.int64)
            watts = np.asarray(watts, dtype=np.float64)
            if ts.shape != watts.shape:
                raise ValueError(f"stream {key}: timestamp/watt length mismatch")
            ts.setflags(write=False)
            watts.setflags(write=False)
            frozen[key] = (ts, watts)
            n += len(ts)
        self._streams = frozen
        self._n_rows = n

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, str, str, float]]) -> "ReadingSet":
        """Group (epoch_s, participant, socket, watts) rows preserving order."""
        acc: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
        for ts, pid, sid, watts in rows:
            bucket = acc.get((pid, sid))
            if bucket is None:
                bucket = acc.setdefault((pid, sid), ([], []))
            bucket[0].append(ts)
            bucket[1].append(watts)
        return cls({k: (np.array(v[0], dtype=np.int64), np.array(v[1], dtype=np.float64))
                    for k, v in acc.items()})

    @classmethod
    def from_readings(cls, readings: Iterable[PowerReading]) -> "ReadingSet":
        return cls.from_rows((r.epoch(), r.participant_id, r.socket_id, r.watts)
                             for r in readings)

    @property
    def n_rows(self) -> int:
        return self._n_rows

    def participants(self) -> list[str]:
        return sorted({pid for pid, _ in self._streams})

    def sockets(self, participant_id: str) -> list[str]:
        return sorted(sid for pid, sid in self._streams if pid == participant_id)

    def stream(self, participant_id: str, socket_id: str) -> tuple[np.ndarray, np.ndarray]:
        return self._streams[(participant_id, socket_id)]

    def participant_streams(self, participant_id: str) -> list[tuple[str, np.ndarray, np.ndarray]]:
        out = []
        for (pid, sid), (ts, watts) in self._streams.items():
            if pid == participant_id:
                out.append((sid, ts, watts))
        out.sort(key=lambda item: item[0])
        return out

    def items(self) -> Iterator[tuple[tuple[str, str], tuple[np.ndarray, np.ndarray]]]:
        return iter(sorted(self._streams.items()))

    def iter_rows(self) -> Iterator[tuple[int, str, str, float]]:
        """Rows sorted by (participant, socket, timestamp) for serialization."""
        for (pid, sid), (ts, watts) in sorted(self._streams.items()):
            for t, w in zip(ts.tolist(), watts.tolist()):
                yield t, pid, sid, w


class SessionSet:
    """Per-participant screentime sessions, merged into disjoint intervals."""

    __slots__ = ("_sessions", "merged_count", "dropped_count")

    def __init__(self, sessions: dict[str, list[tuple[float, float]]],
                 merged_count: int = 0, dropped_count: int = 0):
        self._sessions = {pid: tuple(iv) for pid, iv in sessions.items()}
        self.merged_count = merged_count
        self.dropped_count = dropped_count

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, float, float]]) -> "SessionSet":
        """Build from (participant, start_epoch, end_epoch) rows.

        Rows with end <= start are dropped and counted; overlapping sessions
        of one participant are merged and the merges counted as warnings.
        """
        raw: dict[str, list[tuple[float, float]]] = {}
        dropped = 0
        for pid, start, end in rows:
            if end <= start:
                dropped += 1
                continue
            raw.setdefault(pid, []).append((float(start), float(end)))
        merged_total = 0
        merged: dict[str, list[tuple[float, float]]] = {}
        for pid, ivs in raw.items():
            out = merge_intervals(ivs)
            merged_total += len(ivs) - len(out)
            merged[pid] = out
        return cls(merged, merged_count=merged_total, dropped_count=dropped)

    @classmethod
    def from_sessions(cls, sessions: Iterable[ScreentimeSession]) -> "SessionSet":
        return cls.from_rows((s.participant_id, epoch_s(s.start), epoch_s(s.end))
                             for s in sessions)

    def participants(self) -> list[str]:
        return sorted(self._sessions)

    def sessions(self, participant_id: str) -> tuple[tuple[float, float], ...]:
        return self._sessions.get(participant_id, ())

    def overlap_seconds(self, participant_id: str, lo: float, hi: float) -> float:
        ivs = self._sessions.get(participant_id)
        if not ivs:
            return 0.0
        starts = [a for a, _ in ivs]
        i = max(0, bisect_right(starts, lo) - 1)
        j = bisect_left(starts, hi)
        return clip_length(ivs[i:j], lo, hi)

    def iter_rows(self) -> Iterator[tuple[str, float, float]]:
        for pid in sorted(self._sessions):
            for a, b in self._sessions[pid]:
                yield pid, a, b


@dataclass(frozen=True)
class IncentiveSchedule:
    """Daily incentive amounts, at most one per calendar date."""

    entries: tuple[tuple[date, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[date, float]]) -> "IncentiveSchedule":
        return cls(tuple(sorted(pairs, key=lambda p: p[0])))

    def amount_on(self, day: date) -> float | None:
        for d, amount in self.entries:
            if d == day:
                return amount
        return None

    def as_dict(self) -> dict[date, float]:
        return dict(self.entries)


@dataclass(frozen=True)
class Dataset:
    """A full study dataset: readings, screentime, incentives and phases."""

    readings: ReadingSet
    sessions: SessionSet
    incentives: IncentiveSchedule
    calendar: PhaseCalendar
    site_tz: str = DEFAULT_TZ

    def validate(self) -> "ValidationReport":
        return validate_dataset(self.readings, self.sessions, self.incentives,
                                self.calendar)


# --------------------------------------------------------------------------
# Screentime query helper


def screentime_in_interval(sessions: SessionSet, participant_id: str, day: date,
                           t0: float, tf: float, tz: str = DEFAULT_TZ) -> float:
    """Seconds of screentime inside `[t0, tf)` after local midnight of `day`.

    Unknown participants contribute zero (logged once per call site as a
    warning rather than raised, since sparse screentime is expected).
    """
    if participant_id not in sessions._sessions:
        log.warning("screentime queried for unknown participant %r", participant_id)
        return 0.0
    lo, hi = day_window(day, t0, tf, tz)
    return sessions.overlap_seconds(participant_id, lo, hi)


# --------------------------------------------------------------------------
# Dataset validation


@dataclass
class ValidationReport:
    violations: dict[str, int] = field(default_factory=dict)
    warnings: dict[str, int] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return all(count == 0 for count in self.violations.values())

    def lines(self) -> list[str]:
        out = []
        for name in sorted(self.violations):
            out.append(f"violation {name}: {self.violations[name]}")
        for name in sorted(self.warnings):
            out.append(f"warning {name}: {self.warnings[name]}")
        out.append(f"dataset {'accepted' if self.accepted else 'rejected'}")
        return out


def validate_dataset(readings: ReadingSet, sessions: SessionSet,
                     incentives: IncentiveSchedule,
                     calendar: PhaseCalendar) -> ValidationReport:
    """Check every dataset invariant; report per-invariant violation counts.

    The dataset is accepted iff all violation counts are zero.  Session
    overlap merging is a warning, not a violation.
    """
    report = ValidationReport()
    v = report.violations

    bad_watts = 0
    non_monotone = 0
    for _, (ts, watts) in readings.items():
        bad_watts += int(np.count_nonzero(~np.isfinite(watts) | (watts < 0)))
        if len(ts) > 1:
            non_monotone += int(np.count_nonzero(np.diff(ts) <= 0))
    v["readings_negative_or_nonfinite_watts"] = bad_watts
    v["readings_non_increasing_timestamps"] = non_monotone

    v["sessions_nonpositive_duration"] = sessions.dropped_count
    report.warnings["sessions_merged_overlaps"] = sessions.merged_count

    inverted = sum(1 for p in calendar.phases if p.start_date > p.end_date)
    v["phases_inverted_date_range"] = inverted
    overlap = 0
    baseline_miscount = 0
    for site in calendar.sites():
        sp = calendar.site_phases(site)
        for a, b in zip(sp, sp[1:]):
            if b.start_date <= a.end_date:
                overlap += 1
        n_base = sum(1 for p in sp if p.kind is PhaseKind.BASELINE)
        if n_base != 1:
            baseline_miscount += 1
    v["phases_overlapping_within_site"] = overlap
    v["sites_without_single_baseline"] = baseline_miscount

    bad_amounts = sum(1 for _, amount in incentives.entries
                      if amount not in VALID_INCENTIVES_USD)
    v["incentives_invalid_amount"] = bad_amounts
    seen: set[date] = set()
    dup_dates = 0
    outside = 0
    incentive_days: set[date] = set()
    for p in calendar.phases:
        if p.kind.has_incentive:
            incentive_days.update(p.days())
    for d, _ in incentives.entries:
        if d in seen:
            dup_dates += 1
        seen.add(d)
        if incentive_days and d not in incentive_days:
            outside += 1
    v["incentives_duplicate_date"] = dup_dates
    v["incentives_outside_incentive_phase"] = outside

    return report
