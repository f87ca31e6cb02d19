"""Engine <-> Python interface checks.

Reads files written by the interop_export binary (directory taken from
SFLOW_INTEROP_DIR) and the checked-in golden fixtures.
"""

import json
import os
import pathlib
import sys

import numpy as np
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tools"))

import sflow_io  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
EXPORT = pathlib.Path(os.environ.get("SFLOW_INTEROP_DIR", ""))

needs_export = pytest.mark.skipif(not (EXPORT / "expected.json").is_file(), reason="run interop_export first")


def expected():
    return json.loads((EXPORT / "expected.json").read_text())


def test_crc_check_value():
    assert sflow_io.crc32c(b"123456789") == 0xE3069283


@pytest.mark.parametrize("name", ["golden_lower.svow", "golden_adversary.svow"])
def test_golden_weights_repack_bitwise(name):
    blob = (FIXTURES / name).read_bytes()
    assert sflow_io.pack_weights(sflow_io.unpack_weights(blob)) == blob


def test_corruption_is_rejected():
    blob = bytearray((FIXTURES / "golden_lower.svow").read_bytes())
    blob[40] ^= 0x04
    with pytest.raises(sflow_io.FormatError):
        sflow_io.unpack_weights(bytes(blob))
    with pytest.raises(sflow_io.FormatError):
        sflow_io.unpack_weights(b"XXXX" + bytes(blob[4:]))


@needs_export
@pytest.mark.parametrize("role", ["lower", "adversary"])
def test_engine_weights_and_observation_decode(role):
    weights = (EXPORT / ("%s.svow" % role)).read_bytes()
    obs_blob = (EXPORT / ("%s_obs.svob" % role)).read_bytes()
    tensors = sflow_io.unpack_weights(weights)
    assert sflow_io.pack_weights(tensors) == weights
    obs = sflow_io.unpack_observation(obs_blob)
    assert sflow_io.pack_observation(obs["width"], obs["query"], obs["dynamic"], obs["static"]) == obs_blob
    assert obs["width"] == (6 if role == "lower" else 5)
    raw = sflow_io.forward(tensors, obs)
    np.testing.assert_allclose(raw, expected()[role]["raw"], rtol=0, atol=1e-5)


@needs_export
def test_observation_layout():
    obs = sflow_io.unpack_observation((EXPORT / "lower_obs.svob").read_bytes())
    exp = expected()["lower"]
    assert len(obs["dynamic"]) == exp["dynamic_polylines"]
    assert len(obs["static"]) == exp["static_polylines"]
    assert obs["query"] == 0
    for poly in obs["dynamic"]:
        assert poly.shape[1] == 6
        # last column carries the delivered SVO: a degree value or the invisible marker
        assert np.all((poly[:, 5] == -1.0) | ((poly[:, 5] >= 0.0) & (poly[:, 5] <= 90.0)))
    for poly in obs["static"]:
        assert poly.shape[1] == 5


@needs_export
def test_adversary_output_squashing():
    tensors = sflow_io.unpack_weights((EXPORT / "adversary.svow").read_bytes())
    obs = sflow_io.unpack_observation((EXPORT / "adversary_obs.svob").read_bytes())
    (svo,) = sflow_io.squash(tensors, sflow_io.forward(tensors, obs))
    assert abs(svo - expected()["adversary"]["svo"]) <= 1e-4
    assert 0.0 <= svo <= 90.0


@needs_export
def test_episode_log_reads():
    log = sflow_io.read_episode_log(EXPORT / "episode.ndjson.gz")
    exp = expected()["episode"]
    assert log["footer"]["steps"] == exp["steps"]
    assert log["footer"]["fingerprint"] == exp["fingerprint"]
    assert len(log["steps"]) == exp["steps"]
    assert [s["step"] for s in log["steps"]] == list(range(1, exp["steps"] + 1))
    final = {a["id"]: a for a in log["footer"]["agents"]}
    for a in exp["agents"]:
        assert final[a["id"]]["status"] == a["status"]
        assert final[a["id"]]["termination_step"] == a["termination_step"]
        # an agent appears in step records exactly while alive
        seen = [s["step"] for s in log["steps"] if any(r["id"] == a["id"] for r in s["agents"])]
        assert seen == list(range(1, a["termination_step"] + 1))
    statuses = {"success", "collision", "off_road", "off_route", "wrong_lane", "timeout"}
    for s in log["steps"]:
        for r in s["agents"]:
            assert len(r["action"]) == 2 and len(r["pose"]) == 3 and len(r["reward"]) == 5
            assert r["status"] == "alive" or r["status"] in statuses
