import json
import os
import pathlib

import pytest

import sentinel

SCENARIO = pathlib.Path(os.environ.get(
    "SENTINEL_SCENARIO_DIR",
    pathlib.Path(__file__).resolve().parents[2] / "data" / "scenarios",
)) / "pearl_harbor.json"


def test_validate():
    name, digest, _ = sentinel.validate(str(SCENARIO))
    assert name == "pearl_harbor_1941"
    assert len(digest) == 16


def test_minimum_transit():
    assert sentinel.shortest_hops(str(SCENARIO), 191, "OAHU") == 9
    fp = sentinel.first_passage(str(SCENARIO), "OAHU/IMMEDIATE", 30)
    assert all(p == 0.0 for p in fp[:8])
    assert fp[8] > 0.0


def test_present_value():
    assert sentinel.present_value(1.0, 62, 0.01, 2) == pytest.approx(1.01 ** -31)


def test_replay_and_service_agree(tmp_path):
    recs = sentinel.replay(str(SCENARIO), str(tmp_path / "out"))
    assert (tmp_path / "out" / "recommendations.csv").exists()
    svc = sentinel.Service(tmp_path / "data")
    doc = json.loads(SCENARIO.read_text())
    sid = svc.create_session(svc.upload_scenario(doc)["id"])["id"]
    for obs in doc["script"]:
        out = svc.observe(sid, obs)
        ref = recs[obs["period"]]
        assert out["recommendation"]["alert_type"] == ref["alert_type"]
        assert out["recommendation"]["tau"] == ref["tau"]
    assert svc.belief(sid)["period"] == len(doc["script"])
    branch = svc.branch(sid, {"at_period": 3})
    assert svc.history(branch["id"])["period"] == 3


def test_errors_carry_codes():
    svc = sentinel.Service()
    with pytest.raises(sentinel.SentinelError) as info:
        svc.belief("s000123")
    assert info.value.args[0] == "NotFound"
