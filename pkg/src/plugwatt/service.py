"""HTTP service: live ingestion, scoring, leaderboard, incentives, comfort,
series and screentime heartbeats.

All reads run against an immutable dataset snapshot rebuilt only after a
write, so a GET never observes a partially applied batch; the leaderboard
is additionally cached for 60 seconds (the declared meaning of "near real
time").  Screentime is measured server-side: heartbeats no more than 30 s
apart coalesce into one session, extended by a 30 s trailing grace.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import threading
import time
from bisect import bisect_left
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse

from .aggregation import Aggregator
from .core import (
    DEFAULT_TZ,
    Dataset,
    IncentiveSchedule,
    PhaseCalendar,
    ReadingSet,
    SessionSet,
    Site,
    VALID_INCENTIVES_USD,
    parse_utc,
)
from .scoring import Scoreboard
from .storage import INCENTIVES_FILE, load_dataset

log = logging.getLogger(__name__)

HEARTBEAT_COALESCE_S = 30.0
HEARTBEAT_GRACE_S = 30.0
LEADERBOARD_CACHE_S = 60.0


@dataclass
class _OpenSession:
    first: float
    last: float


class ServiceState:
    """Mutable backend state guarded by one write lock.

    `clock` returns the current epoch seconds and is injectable so tests
    can drive heartbeat coalescing and cache expiry deterministically.
    """

    def __init__(self, dataset: Dataset | None = None,
                 clock: Callable[[], float] = time.time,
                 data_dir: str | Path | None = None,
                 operator_token: str | None = None):
        self.clock = clock
        self.data_dir = Path(data_dir) if data_dir else None
        self.operator_token = operator_token
        self._lock = threading.Lock()
        self._version = 0
        self._snapshot: tuple[int, Dataset, Aggregator, dict[Site, Scoreboard]] | None = None

        base = dataset or Dataset(ReadingSet({}), SessionSet({}),
                                  IncentiveSchedule.from_pairs([]),
                                  PhaseCalendar(()), DEFAULT_TZ)
        self.tz = base.site_tz
        self.calendar = base.calendar
        self._streams: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
        for (pid, sid), (ts, watts) in base.readings.items():
            self._streams[(pid, sid)] = (ts.tolist(), watts.tolist())
        self._loaded_sessions = list(base.sessions.iter_rows())
        self._closed_sessions: list[tuple[str, float, float]] = []
        self._open_sessions: dict[str, _OpenSession] = {}
        self._incentives: dict[date, float] = base.incentives.as_dict()
        self._comfort: list[dict] = []
        self._winners: dict[date, dict] = {}
        self._acked: set[tuple[str, str]] = set()
        self._lb_cache: dict[tuple, tuple[float, int, dict, str]] = {}

    # -- participants --------------------------------------------------------

    def known_participants(self) -> set[str]:
        return {pid for pid, _ in self._streams}

    # -- ingest ---------------------------------------------------------------

    def ingest(self, items: list) -> dict:
        accepted = rejected = duplicates = 0
        rejections: list[dict] = []
        with self._lock:
            for i, item in enumerate(items):
                reason = None
                if not isinstance(item, dict):
                    reason = "not an object"
                else:
                    try:
                        ts = int(parse_utc(str(item["timestamp_utc"])).timestamp())
                        pid = str(item["participant_id"])
                        sid = str(item["socket_id"])
                        watts = float(item["watts"])
                        if not np.isfinite(watts) or watts < 0:
                            reason = "watts must be finite and non-negative"
                    except KeyError as exc:
                        reason = f"missing field {exc.args[0]!r}"
                    except (TypeError, ValueError):
                        reason = "malformed field value"
                if reason is None:
                    ts_list, w_list = self._streams.setdefault((pid, sid), ([], []))
                    if ts_list and ts <= ts_list[-1]:
                        j = bisect_left(ts_list, ts)
                        if j < len(ts_list) and ts_list[j] == ts:
                            duplicates += 1
                            continue
                        reason = "out of order for stream"
                    else:
                        ts_list.append(ts)
                        w_list.append(watts)
                        accepted += 1
                        continue
                rejected += 1
                rejections.append({"index": i, "reason": reason})
            if accepted:
                self._version += 1
                self._lb_cache.clear()
        return {"accepted": accepted, "rejected": rejected,
                "duplicates": duplicates, "rejections": rejections}

    # -- screentime ------------------------------------------------------------

    def heartbeat(self, pid: str) -> None:
        now = self.clock()
        with self._lock:
            open_s = self._open_sessions.get(pid)
            if open_s is not None and now - open_s.last <= HEARTBEAT_COALESCE_S:
                open_s.last = max(open_s.last, now)
            else:
                if open_s is not None:
                    self._closed_sessions.append(
                        (pid, open_s.first, open_s.last + HEARTBEAT_GRACE_S))
                self._open_sessions[pid] = _OpenSession(now, now)
            self._version += 1
            self._lb_cache.clear()

    def session_rows(self) -> list[tuple[str, float, float]]:
        rows = list(self._loaded_sessions) + list(self._closed_sessions)
        for pid, open_s in self._open_sessions.items():
            rows.append((pid, open_s.first, open_s.last + HEARTBEAT_GRACE_S))
        return rows

    # -- incentives / comfort / winners ----------------------------------------

    def post_incentive(self, day: date, amount: float) -> None:
        with self._lock:
            if day in self._incentives:
                raise KeyError(day)
            self._incentives[day] = amount
            self._version += 1
            self._lb_cache.clear()
            if self.data_dir:
                self._write_incentives_csv()

    def _write_incentives_csv(self) -> None:
        path = self.data_dir / INCENTIVES_FILE
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "amount_usd"])
            for d in sorted(self._incentives):
                amount = self._incentives[d]
                text = str(int(amount)) if amount == int(amount) else repr(amount)
                w.writerow([d.isoformat(), text])

    def post_comfort(self, pid: str, level: int) -> None:
        with self._lock:
            self._comfort.append({
                "participant_id": pid, "level": level,
                "timestamp_utc": datetime.fromtimestamp(
                    self.clock(), tz=timezone.utc).isoformat()})
            self._version += 1

    def declare_winner(self, day: date, site: Site) -> dict:
        board = self.scoreboard(site)
        with self._lock:
            existing = self._winners.get(day)
            if existing is not None:
                return existing
        pid = board.declare_winner(day)
        record = {"date": day.isoformat(), "participant_id": pid,
                  "amount_usd": self._incentives.get(day)}
        with self._lock:
            self._winners.setdefault(day, record)
            return self._winners[day]

    def unacked_winner(self, pid: str) -> dict | None:
        with self._lock:
            for day in sorted(self._winners, reverse=True):
                rec = self._winners[day]
                if rec["participant_id"] == pid and (pid, rec["date"]) not in self._acked:
                    return rec
        return None

    def ack_winner(self, pid: str, day_iso: str) -> None:
        with self._lock:
            self._acked.add((pid, day_iso))

    # -- snapshots ---------------------------------------------------------------

    def snapshot(self) -> tuple[Dataset, Aggregator]:
        with self._lock:
            if self._snapshot is not None and self._snapshot[0] == self._version:
                return self._snapshot[1], self._snapshot[2]
            readings = ReadingSet({key: (np.array(ts, dtype=np.int64),
                                         np.array(w, dtype=np.float64))
                                   for key, (ts, w) in self._streams.items()})
            dataset = Dataset(
                readings=readings,
                sessions=SessionSet.from_rows(self.session_rows()),
                incentives=IncentiveSchedule.from_pairs(self._incentives.items()),
                calendar=self.calendar,
                site_tz=self.tz)
            agg = Aggregator(dataset)
            self._snapshot = (self._version, dataset, agg, {})
            return dataset, agg

    def scoreboard(self, site: Site) -> Scoreboard:
        dataset, agg = self.snapshot()
        with self._lock:
            boards = self._snapshot[3]
            if site not in boards:
                boards[site] = Scoreboard(agg, site)
            return boards[site]

    def default_site(self) -> Site:
        sites = self.calendar.sites()
        if not sites:
            raise HTTPException(status_code=409,
                                detail="no phase calendar loaded; baselines absent")
        return sites[0]

    # -- leaderboard cache ---------------------------------------------------------

    def leaderboard_cached(self, day: date, as_of: datetime, site: Site,
                           ) -> tuple[dict, str]:
        key = (day.isoformat(), as_of.isoformat(), site.value)
        now = self.clock()
        with self._lock:
            hit = self._lb_cache.get(key)
            if hit is not None and hit[0] > now and hit[1] == self._version:
                return hit[2], hit[3]
        board = self.scoreboard(site)
        if not board.baselines:
            raise HTTPException(status_code=409,
                                detail="baselines absent: no scorable baseline data")
        entries = board.rank_leaderboard(day, as_of)
        body = {
            "date": day.isoformat(),
            "as_of": as_of.isoformat(),
            "site": site.value,
            "incentive_usd": self._incentives.get(day),
            "entries": [{"participant_id": e.participant_id, "score": e.score,
                         "rank": e.rank, "inactive": e.inactive}
                        for e in entries],
        }
        etag = '"' + hashlib.sha256(
            json.dumps(body, sort_keys=True).encode()).hexdigest()[:24] + '"'
        with self._lock:
            self._lb_cache[key] = (now + LEADERBOARD_CACHE_S, self._version,
                                   body, etag)
        return body, etag


# --------------------------------------------------------------------------


def _require_operator(state: ServiceState, request: Request) -> None:
    if state.operator_token is None:
        return
    if request.headers.get("x-operator-token") != state.operator_token:
        raise HTTPException(status_code=403, detail="operator token required")


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="plugwatt", version="0.1.0")

    @app.get("/v1/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/v1/readings")
    async def post_readings(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="malformed JSON body")
        if not isinstance(body, dict) or not isinstance(body.get("readings"), list):
            raise HTTPException(status_code=400,
                                detail="body must be {\"readings\": [...]}")
        result = state.ingest(body["readings"])
        status = 202
        if result["rejected"] > 0 and result["accepted"] == 0 and result["duplicates"] == 0:
            status = 422
        return JSONResponse(result, status_code=status)

    @app.get("/v1/leaderboard")
    def leaderboard(request: Request) -> Response:
        params = request.query_params
        try:
            day = (date.fromisoformat(params["date"]) if "date" in params
                   else datetime.fromtimestamp(state.clock(),
                                               tz=timezone.utc).date())
            as_of = (parse_utc(params["as_of"]) if "as_of" in params
                     else datetime.fromtimestamp(state.clock(), tz=timezone.utc))
            site = Site(params["site"]) if "site" in params else state.default_site()
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"bad query parameter: {exc}")
        body, etag = state.leaderboard_cached(day, as_of, site)
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return JSONResponse(body, headers={"ETag": etag,
                                           "Cache-Control": "max-age=60"})

    @app.post("/v1/incentives", status_code=201)
    def post_incentive(payload: dict, request: Request) -> dict:
        _require_operator(state, request)
        try:
            day = date.fromisoformat(str(payload["date"]))
            amount = float(payload["amount_usd"])
        except (KeyError, ValueError, TypeError):
            raise HTTPException(status_code=422, detail="need date and amount_usd")
        if amount not in VALID_INCENTIVES_USD:
            raise HTTPException(status_code=422,
                                detail="amount must be one of 5,10,...,50 USD")
        try:
            state.post_incentive(day, amount)
        except KeyError:
            raise HTTPException(status_code=409,
                                detail=f"incentive already posted for {day}")
        return {"date": day.isoformat(), "amount_usd": amount}

    @app.post("/v1/comfort", status_code=201)
    def post_comfort(payload: dict) -> dict:
        pid = str(payload.get("participant_id", ""))
        if pid not in state.known_participants():
            raise HTTPException(status_code=404, detail="unknown participant")
        level = payload.get("level")
        if not isinstance(level, int) or isinstance(level, bool) or not -3 <= level <= 3:
            raise HTTPException(status_code=422,
                                detail="level must be an integer in -3..3")
        state.post_comfort(pid, level)
        return {"participant_id": pid, "level": level}

    @app.get("/v1/series")
    def series(participant: str, request: Request) -> dict:
        params = request.query_params
        if participant not in state.known_participants():
            raise HTTPException(status_code=404, detail="unknown participant")
        try:
            t_from = parse_utc(params["from"]).timestamp()
            t_to = parse_utc(params["to"]).timestamp()
            resolution = int(params.get("resolution", "3600"))
        except (KeyError, ValueError):
            raise HTTPException(status_code=422,
                                detail="need from, to (ISO) and integer resolution")
        if resolution < 60 or t_to <= t_from:
            raise HTTPException(status_code=422, detail="bad window or resolution")
        if (t_to - t_from) / resolution > 5000:
            raise HTTPException(status_code=422, detail="too many buckets")
        _, agg = state.snapshot()
        everyone = sorted(state.known_participants())
        points = []
        t = t_from
        while t < t_to:
            hi = min(t + resolution, t_to)
            individual, _, _ = agg.window_stats(participant, t, hi)
            pool_vals = [m for other in everyone
                         if (m := agg.window_stats(other, t, hi)[0]) is not None]
            pool = float(np.mean(pool_vals)) if pool_vals else None
            points.append({
                "t": datetime.fromtimestamp(t, tz=timezone.utc).isoformat(),
                "individual_w": individual,
                "pool_w": pool})
            t += resolution
        return {"participant_id": participant, "resolution_s": resolution,
                "points": points}

    @app.get("/v1/sockets")
    def sockets(participant: str) -> dict:
        if participant not in state.known_participants():
            raise HTTPException(status_code=404, detail="unknown participant")
        dataset, _ = state.snapshot()
        out = []
        for sid, ts, watts in dataset.readings.participant_streams(participant):
            if len(ts):
                out.append({"socket_id": sid,
                            "watts": float(watts[-1]),
                            "timestamp_utc": datetime.fromtimestamp(
                                int(ts[-1]), tz=timezone.utc).isoformat()})
        return {"participant_id": participant, "sockets": out}

    @app.post("/v1/screentime-heartbeat", status_code=204)
    def heartbeat(payload: dict) -> Response:
        pid = str(payload.get("participant_id", ""))
        if pid not in state.known_participants():
            raise HTTPException(status_code=404, detail="unknown participant")
        state.heartbeat(pid)
        return Response(status_code=204)

    @app.post("/v1/winners", status_code=201)
    def declare(payload: dict, request: Request) -> dict:
        _require_operator(state, request)
        try:
            day = date.fromisoformat(str(payload["date"]))
        except (KeyError, ValueError):
            raise HTTPException(status_code=422, detail="need date")
        site = Site(payload["site"]) if "site" in payload else state.default_site()
        return state.declare_winner(day, site)

    @app.get("/v1/notifications")
    def notifications(participant: str) -> dict:
        if participant not in state.known_participants():
            raise HTTPException(status_code=404, detail="unknown participant")
        return {"winner": state.unacked_winner(participant)}

    @app.post("/v1/notifications/ack", status_code=204)
    def ack(payload: dict) -> Response:
        pid = str(payload.get("participant_id", ""))
        day = str(payload.get("date", ""))
        state.ack_winner(pid, day)
        return Response(status_code=204)

    return app


def app_from_env() -> FastAPI:
    """Build the app from PLUGWATT_* environment variables."""
    data_dir = os.environ.get("PLUGWATT_DATA_DIR")
    tz = os.environ.get("PLUGWATT_SITE_TZ")
    dataset = None
    if data_dir:
        dataset = load_dataset(data_dir)
        if tz:
            dataset = Dataset(dataset.readings, dataset.sessions,
                              dataset.incentives, dataset.calendar, tz)
    state = ServiceState(dataset, data_dir=data_dir,
                         operator_token=os.environ.get("PLUGWATT_OPERATOR_TOKEN"))
    return create_app(state)


def serve(data_dir: str | None, bind: str | None) -> None:
    """Run uvicorn on PLUGWATT_BIND_ADDR or the given host:port."""
    import uvicorn

    if data_dir:
        os.environ["PLUGWATT_DATA_DIR"] = data_dir
    addr = bind or os.environ.get("PLUGWATT_BIND_ADDR", "127.0.0.1:8000")
    host, _, port = addr.partition(":")
    uvicorn.run(app_from_env(), host=host or "127.0.0.1",
                port=int(port or "8000"))
