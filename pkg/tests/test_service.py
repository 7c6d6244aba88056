import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from powerforge.service import create_app

SESSION_BODY = {
    "dv_meta": {
        "name": "READINGTIME",
        "unit": "min",
        "range_min": 0.0,
        "range_max": 60.0,
        "direction": "lower_is_better",
        "variability": 5.0,
    },
    "ivs": [
        {"name": "MEDIUM", "levels": ["P", "S"]},
        {"name": "LAYOUT", "levels": ["1", "2"]},
    ],
}


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def session_id(client):
    response = client.post("/sessions", json=SESSION_BODY)
    assert response.status_code == 200
    return response.json()["id"]


def sse_messages(response):
    for line in response.iter_lines():
        if line.startswith("data: "):
            yield json.loads(line[len("data: "):])


class TestSessionEndpoints:
    def test_create_returns_document_and_sliders(self, client):
        payload = client.post("/sessions", json=SESSION_BODY).json()
        assert payload["document"]["version"] == 1
        sliders = {s["confound"]: s for s in payload["slider_ranges"]}
        assert sliders["fatigue_per_trial"]["hi"] == 15.0

    def test_get_roundtrip(self, client, session_id):
        payload = client.get(f"/sessions/{session_id}").json()
        assert payload["id"] == session_id
        assert payload["document"]["design"]["participants"] == 12

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_update_bumps_epoch(self, client, session_id):
        r1 = client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_mean", "node": {"kind": "grand"}, "value": 34.0},
        )
        r2 = client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_confound", "field": "fatigue_per_trial", "value": 3.0},
        )
        assert r2.json()["epoch"] == r1.json()["epoch"] + 1

    def test_rejected_move_is_machine_readable(self, client, session_id):
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "toggle_lock", "node": {"kind": "group", "level": "S"}},
        )
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "toggle_lock", "node": {"kind": "condition", "levels": ["S", "2"]}},
        )
        response = client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_mean", "node": {"kind": "condition", "levels": ["S", "1"]},
                  "value": 50.0},
        )
        assert response.status_code == 400
        assert response.json()["error"] == "REJECTED_MOVE"

    def test_design_change_reports_imbalance_warning(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_design", "participants": 6},
        )
        codes = {w["code"] for w in response.json()["warnings"]}
        assert "participant_multiple" in codes

    def test_put_replaces_session(self, client, session_id):
        doc = client.get(f"/sessions/{session_id}").json()["document"]
        doc["design"]["participants"] = 20
        client.put(f"/sessions/{session_id}", json={"document": doc})
        after = client.get(f"/sessions/{session_id}").json()["document"]
        assert after["design"]["participants"] == 20


class TestHistoryEndpoints:
    def test_restore_keeps_tradeoff_and_returns_document(self, client, session_id):
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "select_tradeoff", "mode": "pair",
                  "pair": {"iv": "LAYOUT", "a": "1", "b": "2"}, "axis": "replications"},
        )
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_mean", "node": {"kind": "grand"}, "value": 44.0, "commit": True},
        )
        response = client.post(f"/sessions/{session_id}/history/0/restore")
        doc = response.json()["document"]
        means = {tuple(l["condition"]): l["value"] for l in doc["mean_tree"]["leaves"]}
        assert set(means.values()) == {30.0}
        assert doc["settings"]["tradeoff"]["pair"] == ["LAYOUT", "1", "2"]
        assert doc["settings"]["tradeoff"]["axis"] == "replications"

    def test_mark_and_diff(self, client, session_id):
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_confound", "field": "fatigue_per_trial", "value": 5.0,
                  "commit": True},
        )
        client.post(f"/sessions/{session_id}/history/1/mark", json={"marked": True})
        doc = client.get(f"/sessions/{session_id}").json()["document"]
        marked = [n for n in doc["history"]["nodes"] if n["marked"]]
        assert [n["id"] for n in marked] == [1]
        diff = client.get(f"/sessions/{session_id}/history/0/diff/1").json()
        assert diff["confound_changes"] == [["fatigue_per_trial", 0.0, 5.0]]
        assert not diff["empty"]

    def test_unknown_node_404(self, client, session_id):
        assert client.post(f"/sessions/{session_id}/history/77/restore").status_code == 404


class TestPowerCurveStream:
    def setup_session(self, client, session_id, x_hi=9, k=200):
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_settings", "x_lo": 6, "x_hi": x_hi, "k": k, "seed": 5},
        )
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_mean", "node": {"kind": "condition", "levels": ["S", "1"]},
                  "value": 33.0},
        )

    def test_stream_analytic_then_simulated(self, client, session_id):
        self.setup_session(client, session_id)
        with client.stream("GET", f"/sessions/{session_id}/power-curve") as response:
            messages = list(sse_messages(response))
        assert messages[-1]["done"] is True
        assert messages[-1]["cancelled"] is False
        points = [m for m in messages if not m.get("done")]
        tiers = [m["tier"] for m in points]
        assert tiers == ["analytic"] * 4 + ["simulated"] * 4
        sim_xs = [m["x"] for m in points if m["tier"] == "simulated"]
        assert sim_xs == [6, 7, 8, 9]
        assert len({m["epoch"] for m in messages}) == 1

    def test_analytic_tier_only(self, client, session_id):
        self.setup_session(client, session_id)
        with client.stream(
            "GET", f"/sessions/{session_id}/power-curve", params={"tier": "analytic"}
        ) as response:
            messages = list(sse_messages(response))
        points = [m for m in messages if not m.get("done")]
        assert {m["tier"] for m in points} == {"analytic"}

    def test_superseding_update_cancels_stream(self, client, session_id):
        # large K so the simulated tier is slow enough to supersede mid-flight
        self.setup_session(client, session_id, x_hi=50, k=2000)
        app = client.app
        handle = app.state.registry.get(session_id)

        def bump_soon():
            time.sleep(0.25)
            with handle.lock:
                handle.epoch += 1

        bumper = threading.Thread(target=bump_soon)
        bumper.start()
        with client.stream("GET", f"/sessions/{session_id}/power-curve") as response:
            messages = list(sse_messages(response))
        bumper.join()
        assert messages[-1]["done"] is True
        assert messages[-1]["cancelled"] is True
        # every non-terminal message carries the stream's epoch: a client
        # filtering on its latest epoch would drop all of these as stale
        stream_epoch = messages[0]["epoch"]
        assert all(m["epoch"] == stream_epoch for m in messages)
        assert handle.epoch != stream_epoch


class TestPairwiseFramesEndpoint:
    def test_frames_shape(self, client, session_id):
        payload = client.get(
            f"/sessions/{session_id}/pairwise-frames", params={"frames": 5}
        ).json()
        assert len(payload["frames"]) == 5
        labels = {f["pair"] for f in payload["frames"][0]}
        assert labels == {"MEDIUM:P-S", "LAYOUT:1-2"}

    def test_tradeoff_selection_does_not_resimulate(self, client, session_id):
        handle = client.app.state.registry.get(session_id)
        client.get(f"/sessions/{session_id}/pairwise-frames", params={"frames": 4})
        computed = handle.frames_computed
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "select_tradeoff", "mode": "pair",
                  "pair": {"iv": "MEDIUM", "a": "S", "b": "P"}, "axis": "replications"},
        )
        client.get(f"/sessions/{session_id}/pairwise-frames", params={"frames": 4})
        assert handle.frames_computed == computed  # served from cache
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_confound", "field": "fatigue_per_trial", "value": 2.0},
        )
        client.get(f"/sessions/{session_id}/pairwise-frames", params={"frames": 4})
        assert handle.frames_computed == computed + 1  # parameters changed

    def test_confound_preview_endpoint(self, client, session_id):
        client.post(
            f"/sessions/{session_id}/updates",
            json={"op": "set_confound", "field": "fatigue_per_trial", "value": 2.0},
        )
        payload = client.get(f"/sessions/{session_id}/confound-preview").json()
        values = [b["expected"] for b in payload["bars"]]
        assert values == [30.0, 32.0, 34.0, 36.0]
