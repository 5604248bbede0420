"""HTTP service: ingestion, leaderboard caching, heartbeats, notifications.

Every test drives the app through the ASGI test client with an injected
fake clock, so cache expiry and heartbeat coalescing are deterministic.
"""
from __future__ import annotations

from datetime import date, datetime, timezone

import pytest
from fastapi.testclient import TestClient

from plugwatt.core import (
    Dataset,
    IncentiveSchedule,
    Phase,
    PhaseCalendar,
    PhaseKind,
    ReadingSet,
    SessionSet,
    Site,
)
from plugwatt.service import ServiceState, create_app

BASE_DAY = date(2016, 9, 13)
GAME_DAY = date(2016, 9, 19)


def _mid(day):
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp())


class FakeClock:
    def __init__(self, t: float = 0.0):
        self.t = t

    def __call__(self) -> float:
        return self.t

    def advance(self, dt: float) -> None:
        self.t += dt


def _segment_rows(pid, day, segments, sid="s1"):
    mid = _mid(day)
    rows = []
    for h0, h1, watts in segments:
        for t in range(int(h0 * 3600), int(h1 * 3600), 300):
            rows.append((mid + t, pid, sid, watts))
    return rows


def make_dataset():
    """Three participants: 4 W idle, distinct 09:00-17:00 active levels."""
    phases = (Phase(Site.CMU, PhaseKind.BASELINE, "B",
                    date(2016, 9, 12), date(2016, 9, 18)),
              Phase(Site.CMU, PhaseKind.INCENTIVE, "I",
                    date(2016, 9, 19), date(2016, 9, 25)))
    rows = []
    for pid, active_w in (("p1", 50.0), ("p2", 40.0), ("p3", 60.0)):
        rows += _segment_rows(pid, BASE_DAY,
                              [(0, 9, 4.0), (9, 17, active_w), (17, 24, 4.0)])
    rows += _segment_rows("p1", GAME_DAY, [(0, 6, 30.0)])
    rows += _segment_rows("p2", GAME_DAY, [(0, 6, 44.0)])
    rows += _segment_rows("p3", GAME_DAY, [(0, 1, 50.0), (1, 6, 4.0)])
    rows.sort(key=lambda r: (r[1], r[2], r[0]))
    return Dataset(readings=ReadingSet.from_rows(rows),
                   sessions=SessionSet.from_rows([]),
                   incentives=IncentiveSchedule.from_pairs([(GAME_DAY, 25.0)]),
                   calendar=PhaseCalendar(phases), site_tz="UTC")


@pytest.fixture()
def service():
    clock = FakeClock(float(_mid(GAME_DAY) + 6 * 3600))
    state = ServiceState(make_dataset(), clock=clock)
    return TestClient(create_app(state)), state, clock


def test_healthz(service):
    client, _, _ = service
    resp = client.get("/v1/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


# ----------------------------------------------------------------------
# Readings ingestion


def test_ingest_accepts_and_is_idempotent_on_replay(service):
    client, state, _ = service
    batch = {"readings": [
        {"timestamp_utc": "2016-09-19T07:00:00Z", "participant_id": "p1",
         "socket_id": "s1", "watts": 31.0},
        {"timestamp_utc": "2016-09-19T07:05:00Z", "participant_id": "p1",
         "socket_id": "s1", "watts": 29.0},
    ]}
    first = client.post("/v1/readings", json=batch)
    assert first.status_code == 202
    assert first.json() == {"accepted": 2, "rejected": 0, "duplicates": 0,
                            "rejections": []}
    version = state._version
    replay = client.post("/v1/readings", json=batch)
    assert replay.status_code == 202
    assert replay.json()["duplicates"] == 2
    assert replay.json()["accepted"] == 0
    assert state._version == version  # duplicate-only batch changes nothing


def test_ingest_reports_rejections_with_index_and_reason(service):
    client, _, _ = service
    resp = client.post("/v1/readings", json={"readings": [
        {"timestamp_utc": "2016-09-19T07:00:00Z", "participant_id": "p1",
         "socket_id": "s1", "watts": -3.0},
        {"participant_id": "p1", "socket_id": "s1", "watts": 5.0},
        "not an object",
    ]})
    assert resp.status_code == 422  # nothing in the batch was usable
    body = resp.json()
    assert body["accepted"] == 0 and body["rejected"] == 3
    reasons = {r["index"]: r["reason"] for r in body["rejections"]}
    assert "non-negative" in reasons[0]
    assert "timestamp_utc" in reasons[1]
    assert reasons[2] == "not an object"


def test_ingest_mixed_batch_is_202_and_rejects_out_of_order(service):
    client, _, _ = service
    resp = client.post("/v1/readings", json={"readings": [
        {"timestamp_utc": "2016-09-19T07:00:00Z", "participant_id": "p1",
         "socket_id": "s1", "watts": 31.0},
        {"timestamp_utc": "2016-09-19T06:30:00Z", "participant_id": "p1",
         "socket_id": "s1", "watts": 30.0},
    ]})
    assert resp.status_code == 202
    body = resp.json()
    assert body["accepted"] == 1 and body["rejected"] == 1
    assert body["rejections"][0]["reason"] == "out of order for stream"


def test_ingest_malformed_body_is_400(service):
    client, _, _ = service
    assert client.post("/v1/readings", content=b"{nope",
                       headers={"content-type": "application/json"}).status_code == 400
    assert client.post("/v1/readings", json={"rows": []}).status_code == 400


# ----------------------------------------------------------------------
# Leaderboard


def test_leaderboard_matches_scoring_module(service):
    client, state, _ = service
    as_of = datetime.fromtimestamp(_mid(GAME_DAY) + 6 * 3600, tz=timezone.utc)
    resp = client.get("/v1/leaderboard", params={
        "date": GAME_DAY.isoformat(), "as_of": as_of.isoformat(), "site": "CMU"})
    assert resp.status_code == 200
    assert resp.headers["Cache-Control"] == "max-age=60"
    body = resp.json()
    expected = state.scoreboard(Site.CMU).rank_leaderboard(GAME_DAY, as_of)
    assert body["entries"] == [
        {"participant_id": e.participant_id, "score": e.score, "rank": e.rank,
         "inactive": e.inactive} for e in expected]
    assert body["incentive_usd"] == 25.0
    assert [e["participant_id"] for e in body["entries"]] == ["p1", "p2", "p3"]
    assert body["entries"][2]["inactive"] is True


def test_leaderboard_etag_roundtrip(service):
    client, _, _ = service
    params = {"date": GAME_DAY.isoformat(),
              "as_of": "2016-09-19T06:00:00+00:00", "site": "CMU"}
    first = client.get("/v1/leaderboard", params=params)
    etag = first.headers["ETag"]
    again = client.get("/v1/leaderboard", params=params,
                       headers={"If-None-Match": etag})
    assert again.status_code == 304
    stale = client.get("/v1/leaderboard", params=params,
                       headers={"If-None-Match": '"something-else"'})
    assert stale.status_code == 200


def test_leaderboard_cache_invalidated_by_writes(service):
    client, _, clock = service
    params = {"date": GAME_DAY.isoformat(),
              "as_of": "2016-09-19T06:00:00+00:00", "site": "CMU"}
    before = client.get("/v1/leaderboard", params=params).json()
    # p2 throttles down for the last two minutes of the scoring window
    client.post("/v1/readings", json={"readings": [
        {"timestamp_utc": "2016-09-19T05:58:00Z", "participant_id": "p2",
         "socket_id": "s1", "watts": 20.0}]})
    clock.advance(1.0)
    after = client.get("/v1/leaderboard", params=params).json()
    score = {e["participant_id"]: e["score"] for e in after["entries"]}
    old = {e["participant_id"]: e["score"] for e in before["entries"]}
    assert score["p2"] > old["p2"]  # the write invalidated the cached body
    assert score["p1"] == old["p1"]
    # same key served from cache while nothing changes
    cached = client.get("/v1/leaderboard", params=params).json()
    assert cached == after


def test_leaderboard_409_without_baselines():
    state = ServiceState(clock=FakeClock(1000.0))
    client = TestClient(create_app(state))
    resp = client.get("/v1/leaderboard", params={"date": "2016-09-19"})
    assert resp.status_code == 409


def test_leaderboard_bad_params_422(service):
    client, _, _ = service
    assert client.get("/v1/leaderboard",
                      params={"date": "not-a-date"}).status_code == 422
    assert client.get("/v1/leaderboard",
                      params={"date": "2016-09-19",
                              "site": "mars"}).status_code == 422


# ----------------------------------------------------------------------
# Incentives


def test_incentive_post_conflict_and_validation(service):
    client, _, _ = service
    ok = client.post("/v1/incentives",
                     json={"date": "2016-09-20", "amount_usd": 30})
    assert ok.status_code == 201
    assert ok.json() == {"date": "2016-09-20", "amount_usd": 30.0}
    dup = client.post("/v1/incentives",
                      json={"date": "2016-09-20", "amount_usd": 10})
    assert dup.status_code == 409
    bad_amount = client.post("/v1/incentives",
                             json={"date": "2016-09-21", "amount_usd": 12})
    assert bad_amount.status_code == 422
    missing = client.post("/v1/incentives", json={"amount_usd": 10})
    assert missing.status_code == 422


def test_operator_token_guards_incentives_and_winners():
    state = ServiceState(make_dataset(), clock=FakeClock(1000.0),
                         operator_token="sesame")
    client = TestClient(create_app(state))
    payload = {"date": "2016-09-20", "amount_usd": 10}
    assert client.post("/v1/incentives", json=payload).status_code == 403
    assert client.post("/v1/incentives", json=payload,
                       headers={"x-operator-token": "wrong"}).status_code == 403
    assert client.post("/v1/incentives", json=payload,
                       headers={"x-operator-token": "sesame"}).status_code == 201
    assert client.post("/v1/winners", json={"date": "2016-09-19"},
                       ).status_code == 403


# ----------------------------------------------------------------------
# Comfort


def test_comfort_validation(service):
    client, state, _ = service
    ok = client.post("/v1/comfort", json={"participant_id": "p1", "level": -2})
    assert ok.status_code == 201
    assert state._comfort[-1]["level"] == -2
    assert client.post("/v1/comfort",
                       json={"participant_id": "ghost", "level": 0}).status_code == 404
    for bad in (4, -4, 1.5, "warm", True, None):
        resp = client.post("/v1/comfort",
                           json={"participant_id": "p1", "level": bad})
        assert resp.status_code == 422, bad


# ----------------------------------------------------------------------
# Screentime heartbeats


def test_heartbeats_coalesce_into_one_session(service):
    client, state, clock = service
    t0 = clock.t
    for _ in range(3):
        resp = client.post("/v1/screentime-heartbeat",
                           json={"participant_id": "p1"})
        assert resp.status_code == 204
        clock.advance(10.0)
    # three beats 10 s apart: one open session, 30 s trailing grace
    rows = [r for r in state.session_rows() if r[0] == "p1"]
    assert rows == [("p1", t0, t0 + 20.0 + 30.0)]


def test_heartbeat_gap_splits_sessions(service):
    client, state, clock = service
    t0 = clock.t
    client.post("/v1/screentime-heartbeat", json={"participant_id": "p1"})
    clock.advance(31.0)  # just beyond the coalescing horizon
    client.post("/v1/screentime-heartbeat", json={"participant_id": "p1"})
    rows = sorted(r for r in state.session_rows() if r[0] == "p1")
    assert rows == [("p1", t0, t0 + 30.0),
                    ("p1", t0 + 31.0, t0 + 31.0 + 30.0)]


def test_heartbeat_unknown_participant_404(service):
    client, _, _ = service
    resp = client.post("/v1/screentime-heartbeat",
                       json={"participant_id": "ghost"})
    assert resp.status_code == 404


# ----------------------------------------------------------------------
# Series and sockets


def test_series_buckets_match_window_stats(service):
    client, state, _ = service
    resp = client.get("/v1/series", params={
        "participant": "p1", "from": "2016-09-19T00:00:00Z",
        "to": "2016-09-19T02:00:00Z", "resolution": 3600})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["points"]) == 2
    _, agg = state.snapshot()
    t0 = float(_mid(GAME_DAY))
    for i, point in enumerate(body["points"]):
        lo, hi = t0 + i * 3600, t0 + (i + 1) * 3600
        assert point["individual_w"] == pytest.approx(
            agg.window_stats("p1", lo, hi)[0])
    # p1 and p2 run constant 30/44 W over hour one; p3 runs 50 W
    assert body["points"][0]["pool_w"] == pytest.approx((30 + 44 + 50) / 3)


def test_series_validation(service):
    client, _, _ = service
    base = {"participant": "p1", "from": "2016-09-19T00:00:00Z",
            "to": "2016-09-19T02:00:00Z"}
    assert client.get("/v1/series", params={**base, "resolution": 30},
                      ).status_code == 422
    assert client.get("/v1/series", params={**base, "to": base["from"]},
                      ).status_code == 422
    assert client.get("/v1/series", params={
        "participant": "p1", "from": "2016-01-01T00:00:00Z",
        "to": "2016-12-31T00:00:00Z", "resolution": 60}).status_code == 422
    assert client.get("/v1/series", params={**base, "participant": "ghost"},
                      ).status_code == 404


def test_sockets_report_latest_reading(service):
    client, _, _ = service
    resp = client.get("/v1/sockets", params={"participant": "p1"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["participant_id"] == "p1"
    (sock,) = body["sockets"]
    assert sock["socket_id"] == "s1"
    assert sock["watts"] == 30.0
    assert sock["timestamp_utc"] == "2016-09-19T05:55:00+00:00"
    assert client.get("/v1/sockets",
                      params={"participant": "ghost"}).status_code == 404


# ----------------------------------------------------------------------
# Winners and notifications


def test_winner_flow_declare_notify_ack(service):
    client, _, _ = service
    declared = client.post("/v1/winners", json={"date": GAME_DAY.isoformat()})
    assert declared.status_code == 201
    record = declared.json()
    assert record == {"date": "2016-09-19", "participant_id": "p1",
                      "amount_usd": 25.0}
    # declaring twice returns the same frozen record
    again = client.post("/v1/winners", json={"date": GAME_DAY.isoformat()})
    assert again.json() == record

    note = client.get("/v1/notifications", params={"participant": "p1"})
    assert note.json()["winner"] == record
    othernote = client.get("/v1/notifications", params={"participant": "p2"})
    assert othernote.json()["winner"] is None

    ack = client.post("/v1/notifications/ack",
                      json={"participant_id": "p1", "date": "2016-09-19"})
    assert ack.status_code == 204
    after = client.get("/v1/notifications", params={"participant": "p1"})
    assert after.json()["winner"] is None


def test_winner_on_day_without_incentive_is_none(service):
    client, _, _ = service
    resp = client.post("/v1/winners", json={"date": "2016-09-21"})
    assert resp.status_code == 201
    assert resp.json()["participant_id"] is None
