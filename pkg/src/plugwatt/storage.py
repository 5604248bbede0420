"""Dataset persistence: four CSV files plus a manifest.

Plain CSV keeps the pipeline reproducible and diffable; writers emit rows
in a fixed order and floats in shortest round-trip form, so identical
datasets produce byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import json
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    Dataset,
    IncentiveSchedule,
    Phase,
    PhaseCalendar,
    PhaseKind,
    ReadingSet,
    SessionSet,
    Site,
    format_utc,
    parse_utc,
)

READINGS_FILE = "readings.csv"
SCREENTIME_FILE = "screentime.csv"
INCENTIVES_FILE = "incentives.csv"
PHASES_FILE = "phases.csv"
MANIFEST_FILE = "manifest.json"

SCHEMA_VERSION = 1


class DatasetFormatError(ValueError):
    """Malformed dataset file; message carries file name and line number."""


def _fmt_float(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def save_dataset(dataset: Dataset, directory: str | Path,
                 manifest_extra: dict | None = None) -> Path:
    """Write the dataset directory; returns its path."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / READINGS_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_utc", "participant_id", "socket_id", "watts"])
        for ts, pid, sid, watts in dataset.readings.iter_rows():
            w.writerow([format_utc(ts), pid, sid, _fmt_float(watts)])

    with open(out / SCREENTIME_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "session_start_utc", "session_end_utc"])
        for pid, start, end in dataset.sessions.iter_rows():
            w.writerow([pid, format_utc(start), format_utc(end)])

    with open(out / INCENTIVES_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "amount_usd"])
        for d, amount in dataset.incentives.entries:
            w.writerow([d.isoformat(), _fmt_float(amount)])

    with open(out / PHASES_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["site", "kind", "label", "start_date", "end_date"])
        for p in sorted(dataset.calendar.phases,
                        key=lambda p: (p.site.value, p.start_date)):
            w.writerow([p.site.value, p.kind.value, p.label,
                        p.start_date.isoformat(), p.end_date.isoformat()])

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "site_tz": dataset.site_tz,
        "sites": [s.value for s in dataset.calendar.sites()],
        "n_participants": len(dataset.readings.participants()),
        "n_readings": dataset.readings.n_rows,
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    (out / MANIFEST_FILE).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return out


def _open_csv(path: Path, required: Sequence[str]) -> tuple[list[dict], str]:
    if not path.exists():
        raise DatasetFormatError(f"{path.name}: file missing")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise DatasetFormatError(f"{path.name}: missing column {col!r}")
        return list(reader), path.name


def _parse(fn, raw: str, fname: str, line: int, what: str):
    try:
        return fn(raw)
    except (ValueError, KeyError) as exc:
        raise DatasetFormatError(
            f"{fname}:{line}: bad {what} {raw!r} ({exc})") from None


def load_dataset(directory: str | Path, validate: bool = True) -> Dataset:
    """Load a dataset directory; raises on malformed files.

    With validate=True (the default) the dataset's invariants are checked
    and a rejection raises; pass validate=False to load anyway and inspect
    the report yourself.
    """
    root = Path(directory)

    rows, fname = _open_csv(root / READINGS_FILE,
                            ["timestamp_utc", "participant_id", "socket_id", "watts"])
    # Timestamps repeat across sockets and participants, so memoizing the
    # ISO-8601 parse keeps million-row loads inside the ingest budget.
    ts_cache: dict[str, int] = {}

    def _ts_epoch(raw: str) -> int:
        hit = ts_cache.get(raw)
        if hit is None:
            hit = ts_cache[raw] = int(parse_utc(raw).timestamp())
        return hit

    reading_rows = []
    for i, row in enumerate(rows, start=2):
        ts = _parse(_ts_epoch, row["timestamp_utc"], fname, i, "timestamp")
        watts = _parse(float, row["watts"], fname, i, "watts")
        reading_rows.append((ts, row["participant_id"], row["socket_id"], watts))
    readings = ReadingSet.from_rows(reading_rows)

    rows, fname = _open_csv(root / SCREENTIME_FILE,
                            ["participant_id", "session_start_utc", "session_end_utc"])
    session_rows = []
    for i, row in enumerate(rows, start=2):
        start = _parse(lambda s: parse_utc(s).timestamp(), row["session_start_utc"],
                       fname, i, "session start")
        end = _parse(lambda s: parse_utc(s).timestamp(), row["session_end_utc"],
                     fname, i, "session end")
        session_rows.append((row["participant_id"], start, end))
    sessions = SessionSet.from_rows(session_rows)

    rows, fname = _open_csv(root / INCENTIVES_FILE, ["date", "amount_usd"])
    pairs = []
    for i, row in enumerate(rows, start=2):
        d = _parse(date.fromisoformat, row["date"], fname, i, "date")
        amount = _parse(float, row["amount_usd"], fname, i, "amount")
        pairs.append((d, amount))
    incentives = IncentiveSchedule.from_pairs(pairs)

    rows, fname = _open_csv(root / PHASES_FILE,
                            ["site", "kind", "label", "start_date", "end_date"])
    phases = []
    for i, row in enumerate(rows, start=2):
        site = _parse(Site, row["site"], fname, i, "site")
        kind = _parse(PhaseKind, row["kind"], fname, i, "phase kind")
        start = _parse(date.fromisoformat, row["start_date"], fname, i, "start date")
        end = _parse(date.fromisoformat, row["end_date"], fname, i, "end date")
        phases.append(Phase(site, kind, row["label"], start, end))
    calendar = PhaseCalendar(tuple(phases))

    site_tz = "America/Los_Angeles"
    manifest_path = root / MANIFEST_FILE
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        site_tz = manifest.get("site_tz", site_tz)

    dataset = Dataset(readings=readings, sessions=sessions,
                      incentives=incentives, calendar=calendar, site_tz=site_tz)
    if validate:
        report = dataset.validate()
        if not report.accepted:
            bad = {k: v for k, v in report.violations.items() if v}
            raise DatasetFormatError(f"dataset rejected by validation: {bad}")
    return dataset


def manifest_sha256(directory: str | Path) -> str | None:
    path = Path(directory) / MANIFEST_FILE
    if not path.exists():
        return None
    return hashlib.sha256(path.read_bytes()).hexdigest()
