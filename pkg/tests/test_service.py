"""Play service: session lifecycle, redaction, atomicity, log export."""

import threading

import pytest
from fastapi.testclient import TestClient

from cardroom import presets
from cardroom.datagen import SampleRecord
from cardroom.diff import merge, parse_diff
from cardroom.evalharness import PredictionRecord, score_states
from cardroom.presets import preset_text
from cardroom.service import PlayService, build_app
from cardroom.state import HIDDEN_CARD, parse_state


@pytest.fixture()
def client(tmp_path):
    return TestClient(build_app(PlayService(tmp_path / "sessions")))


def _texas3() -> str:
    # a three-seat texas table: one human, two bots
    return preset_text("texas_holdem").replace("players: 5", "players: 3")


def _create(client, script=None, seed=7):
    r = client.post("/sessions", json={"script": script or _texas3(), "seed": seed})
    assert r.status_code == 200, r.text
    return r.json()["session_id"]


def test_create_parses_and_reports_errors(client):
    r = client.post("/sessions", json={"script": ""})
    assert r.status_code == 400
    body = r.json()
    assert body["error"] == "MissingSection"
    assert "players" in body["detail"]

    r = client.post("/sessions", json={"script": "players: 4\n"})
    assert r.status_code == 400

    bad = _texas3().replace("players: 3", "players: 1")
    r = client.post("/sessions", json={"script": bad})
    assert r.status_code == 400
    assert r.json()["error"] == "InvalidSpec"


def test_join_and_view_redaction(client):
    sid = _create(client)
    r = client.post(f"/sessions/{sid}/join", json={"seat": 1})
    assert r.status_code == 200
    client.post(f"/sessions/{sid}/bots", json={"seat": 2, "seed": 1})
    r = client.post(f"/sessions/{sid}/bots", json={"seat": 3, "seed": 2})
    assert r.json()["status"] in ("active", "finished")

    view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    state = view["state"]
    assert state["deck"] == []
    assert all(c == HIDDEN_CARD for c in state["hole"]["2"])
    assert all(c == HIDDEN_CARD for c in state["hole"]["3"])
    assert all(c != HIDDEN_CARD for c in state["hole"]["1"])


def test_unknown_session_404(client):
    assert client.get("/sessions/zzz/view", params={"seat": 1}).status_code == 404


def test_illegal_action_returns_legal_set_and_keeps_state(client):
    sid = _create(client)
    client.post(f"/sessions/{sid}/join", json={"seat": 1})
    client.post(f"/sessions/{sid}/bots", json={"seat": 2, "seed": 1})
    client.post(f"/sessions/{sid}/bots", json={"seat": 3, "seed": 2})

    view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    while not view["your_turn"] and view["status"] == "active":
        view = client.get(f"/sessions/{sid}/events",
                          params={"seat": 1, "since": view["step"]}).json()
    if view["status"] != "active":
        pytest.skip("bots folded the round out before the human acted")
    step_before = view["step"]
    r = client.post(f"/sessions/{sid}/actions",
                    json={"seat": 1, "action": {"kind": "raise", "amount": 9999}})
    assert r.status_code == 409
    body = r.json()
    assert body["error"] == "IllegalAction"
    assert body["legal"]
    after = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    assert after["step"] == step_before  # state unchanged

    # a legal action from the returned set succeeds
    chosen = body["legal"][0]
    r = client.post(f"/sessions/{sid}/actions", json={"seat": 1, "action": chosen})
    assert r.status_code == 200


def test_not_your_turn(client):
    sid = _create(client)
    client.post(f"/sessions/{sid}/join", json={"seat": 1})
    client.post(f"/sessions/{sid}/join", json={"seat": 2})
    client.post(f"/sessions/{sid}/bots", json={"seat": 3, "seed": 2})
    v1 = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    v2 = client.get(f"/sessions/{sid}/view", params={"seat": 2}).json()
    waiting = 1 if not v1["your_turn"] else 2
    r = client.post(f"/sessions/{sid}/actions",
                    json={"seat": waiting, "action": {"kind": "check"}})
    assert r.status_code == 409
    assert r.json()["error"] == "NotYourTurn"


def test_all_bot_session_runs_to_prize_and_exports_gold(client):
    sid = _create(client, seed=11)
    for seat, seed in ((1, 5), (2, 6), (3, 7)):
        client.post(f"/sessions/{sid}/bots", json={"seat": seat, "seed": seed})
    view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    assert view["status"] == "finished"
    assert view["state"]["flow_cache"][-1] == "prize"

    # exported log passes eval self-consistency
    text = client.get(f"/sessions/{sid}/log", params={"mode": "dsp"}).text
    gold = [SampleRecord.from_json(line) for line in text.splitlines() if line]
    assert gold
    preds = [PredictionRecord(g.round_id, g.step_idx, g.target) for g in gold]
    report = score_states(gold, preds)
    assert all(c == t for c, t in report.categories.values())
    assert all(report.rounds.values())


def test_export_replays_to_terminal_state(client):
    sid = _create(client, seed=13)
    for seat, seed in ((1, 1), (2, 2), (3, 3)):
        client.post(f"/sessions/{sid}/bots", json={"seat": seat, "seed": seed})
    text = client.get(f"/sessions/{sid}/log", params={"mode": "dsp"}).text
    gold = [SampleRecord.from_json(line) for line in text.splitlines() if line]
    spec = presets.load_preset("texas_holdem")
    from cardroom.script import parse_script

    spec = parse_script(gold[0].script)
    state = parse_state(gold[0].prev_state)
    for g in gold:
        state = merge(state, parse_diff(g.target), spec)
    final_view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    assert state.to_tree()["stacks"] == final_view["state"]["stacks"]
    assert state.finished()


def test_event_stream_endpoint(client):
    sid = _create(client, seed=3)
    for seat, seed in ((1, 1), (2, 2), (3, 3)):
        client.post(f"/sessions/{sid}/bots", json={"seat": seat, "seed": seed})
    with client.stream("GET", f"/sessions/{sid}/stream",
                       params={"seat": 1, "max_events": 4}) as r:
        chunks = list(r.iter_lines())
    data_lines = [c for c in chunks if c.startswith("data: ")]
    assert data_lines


def test_session_event_file_written(tmp_path):
    svc = PlayService(tmp_path / "d")
    client = TestClient(build_app(svc))
    sid = _create(client, seed=4)
    for seat in (1, 2, 3):
        client.post(f"/sessions/{sid}/bots", json={"seat": seat, "seed": seat})
    path = tmp_path / "d" / f"{sid}.ndjson"
    assert path.exists()
    lines = path.read_text().splitlines()
    assert lines  # created + one line per transition
    view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    assert len(lines) == 1 + view["step"]


def test_concurrent_actions_linearized(client):
    """Exactly one of many identical concurrent submissions succeeds per turn."""
    sid = _create(client, seed=21)
    client.post(f"/sessions/{sid}/join", json={"seat": 1})
    client.post(f"/sessions/{sid}/bots", json={"seat": 2, "seed": 1})
    client.post(f"/sessions/{sid}/bots", json={"seat": 3, "seed": 2})
    view = client.get(f"/sessions/{sid}/view", params={"seat": 1}).json()
    while not view["your_turn"] and view["status"] == "active":
        view = client.get(f"/sessions/{sid}/events",
                          params={"seat": 1, "since": view["step"]}).json()
    if view["status"] != "active":
        pytest.skip("round ended before the human's turn")
    action = view["legal"][0]
    results = []

    def submit():
        r = client.post(f"/sessions/{sid}/actions", json={"seat": 1, "action": action})
        results.append(r.status_code)

    threads = [threading.Thread(target=submit) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results.count(200) == 1
    assert results.count(409) == 3
