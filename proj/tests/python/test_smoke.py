import json
import os
import pathlib

import pytest

import websynth

FIXTURES = pathlib.Path(os.environ.get("WEBSYNTH_FIXTURES", pathlib.Path(__file__).parents[2] / "fixtures"))


def test_action_grammar():
    assert websynth.canonicalize_action("CLICK  [12]") == "click [12]"
    j = websynth.action_to_training("select [6] [Dark Grey]", "pick a colour")
    assert websynth.action_from_training(j) == "select [6] [Dark Grey]"
    with pytest.raises(websynth.ActionError) as e:
        websynth.canonicalize_action("fly [1]")
    assert str(e.value).startswith("UnknownVerb")
    with pytest.raises(ValueError):
        websynth.canonicalize_action("click [x]")


def test_agent_payload():
    p = websynth.parse_agent_payload(
        'ok\n```json\n{"task": "t", "action_in_natural_language": "n", "grounded_action": "scroll [down]"}\n```'
    )
    assert p["grounded_action"] == "scroll [down]"
    with pytest.raises(websynth.PayloadError):
        websynth.parse_agent_payload("nothing here")


def test_metrics():
    m = websynth.keynode_metrics([("a", 3, 2), ("b", 2, 1)])
    assert m["avg_step_sr"] == pytest.approx(7 / 12)
    assert m["completion_rate"] == pytest.approx(0.6)
    assert m["task_sr"] == 0.0
    assert websynth.keynode_metrics([("a", 3, 2), ("b", 2, 1)], tolerance=1)["task_sr"] == 1.0
    s = websynth.step_metrics([("e1", {"e1"}, "type sofa", "TYPE sofa"), ("e2", {"e1"}, "click", "click")])
    assert s["element_accuracy"] == 0.5 and s["step_sr"] == 0.5
    assert websynth.run_average([[1, 0], [1, 1]]) == 0.75
    assert websynth.token_f1("a a b", "a b b") == pytest.approx(2 / 3)
    with pytest.raises(websynth.EmptyInput):
        websynth.run_average([])
    with pytest.raises(websynth.RaggedMatrix):
        websynth.run_average([[1], [1, 0]])


def test_dataset_operations():
    ds = FIXTURES / "dataset"
    want = json.loads((FIXTURES / "dataset_expected_stats.json").read_text())
    got = websynth.compute_stats(ds)
    for key in ("n_total", "tokens", "elements", "images", "unique_urls"):
        assert got[key] == want[key], key
    assert round(got["avg_steps"], 3) == round(want["avg_steps"], 3)
    ids = websynth.filter_training(ds)
    assert len(ids) == 6
    inst = websynth.export_training(ds, ids[:2], seed=3, draws=4)
    assert len(inst) == 4 and all(i["trajectory_id"] in ids[:2] for i in inst)
    assert websynth.load_manifest(ds / ids[0])["id"] == ids[0]
    with pytest.raises(websynth.DatastoreError):
        websynth.load_manifest(ds / "missing")


def test_cost_and_sampling():
    usage = {s: {"calls": n} for s, n in
             [("proposal", 1000), ("refinement", 6700), ("verification", 1000), ("summarization", 1000)]}
    rates = {"usd_per_million_tokens": 0, "usd_per_image": 0,
             "usd_per_call": {"proposal": 0.0128, "refinement": 0.0128,
                              "verification": 0.02381, "summarization": 0.02581}}
    l = websynth.cost_report(usage, rates, n_total=1000, n_success=531)
    assert l["cost_per_trajectory"] == "0.148"
    assert websynth.format_dollars(l["cost_per_success_micro_usd"], 2) == "0.28"
    draws = websynth.sample_steps([1, 9], "uniform-step", seed=42, draws=10000)
    share = sum(t == 0 for t, _ in draws) / len(draws)
    assert abs(share - 0.1) <= 0.02


def test_seed_filter():
    r = websynth.filter_seeds(["https://a.com/x toplist", "https://www.a.com/x", "ftp://b.org", "https://c.bad.com"],
                              blocked=["bad.com"])
    assert [s["url"] for s in r["seeds"]] == ["https://a.com/x"]
    assert (r["duplicates"], r["bad_scheme"], r["blocked"]) == (1, 1, 1)


def test_fixture_trajectory(tmp_path):
    script = json.loads((FIXTURES / "scripts" / "shop_e2e.json").read_text())
    runs = [
        websynth.run_fixture_trajectory(FIXTURES / "shop", "fixture://shop/home", FIXTURES / "transcripts" / "shop",
                                        config=script["config"], store_dir=tmp_path / f"run{i}")
        for i in range(2)
    ]
    assert runs[0]["status"] == "success"
    assert runs[0]["id"] == "db94821a660bb9d5"
    assert len(runs[0]["steps"]) == 4
    assert runs[0]["artifact_digests"] == runs[1]["artifact_digests"]
    assert (tmp_path / "run0" / "db94821a660bb9d5" / "manifest.json").exists()
    assert len(websynth.template_version()) == 16


def test_fixture_manifests_match_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schemas = pathlib.Path(__file__).parents[2] / "resources" / "schemas"
    schema = json.loads((schemas / "fixture_manifest.schema.json").read_text())
    manifests = sorted(FIXTURES.glob("*/manifest.json"))
    assert manifests
    for m in manifests:
        jsonschema.validate(json.loads(m.read_text()), schema)
    report = json.loads((schemas / "page_report.schema.json").read_text())
    jsonschema.validate({"ok": True, "elements": [{"index": 0, "role": "link", "name": "Deals",
                                                   "bbox": {"x": 1, "y": 2, "w": 3, "h": 4}}]}, report)
    jsonschema.validate({"ok": False, "error": "boom"}, report)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"ok": True}, report)
