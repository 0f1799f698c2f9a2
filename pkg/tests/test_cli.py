"""End-to-end tests for the command-line interface."""

import json
import math

import pytest

from stabdecomp import known
from stabdecomp.certify import Certificate
from stabdecomp.cli import main
from stabdecomp.decomposition import Decomposition


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_verify_fixture_exact_exit_zero(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--fixture", "norrell_m4", "--exact", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["format"] == "stabdecomp-verify"
    (row,) = payload["results"]
    assert row["name"] == "norrell_m4"
    assert row["passed"]
    assert row["exact_mismatches"] == []
    assert row["residual"] <= 1e-13


def test_verify_all_fixtures(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--all-fixtures", "--exact", "--out", str(out)]) == 0
    payload = read_json(out)
    assert {r["name"] for r in payload["results"]} == set(known.FIXTURES)
    assert all(r["passed"] for r in payload["results"])


def test_verify_usage_errors(tmp_path):
    assert main(["verify", "--fixture", "nope", "--out", str(tmp_path / "r.json")]) == 2
    assert main(["verify", "--out", str(tmp_path / "r.json")]) == 2


def test_verify_file_roundtrip_and_failure(tmp_path):
    dec = known.FIXTURES["strange_m2"]()
    good = tmp_path / "good.json"
    dec.save(str(good))
    assert main(["verify", "--file", str(good), "--exact", "--out", str(tmp_path / "a.json")]) == 0

    bad = Decomposition(dec.target, dec.states[:1], dec.coeffs[:1])
    bad_path = tmp_path / "bad.json"
    bad.save(str(bad_path))
    assert main(["verify", "--file", str(bad_path), "--out", str(tmp_path / "b.json")]) == 1
    row = read_json(tmp_path / "b.json")["results"][0]
    assert not row["passed"]
    assert row["residual"] > 0.1


def test_catalog_writes_jsonl(tmp_path):
    out = tmp_path / "cat.jsonl"
    assert main(["catalog", "--p", "3", "--n", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["format"] == "stabdecomp-catalog"
    assert header["count"] == 12
    assert len(lines) == 13


def test_certify_t3_pair_cli(tmp_path):
    out = tmp_path / "cert.json"
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--out", str(out)]) == 0
    cert = Certificate.load(str(out))
    assert cert.total_tuples == 66
    assert cert.tuples_tested == 66
    assert cert.witnesses == []
    assert cert.rules_out()


def test_certify_deterministic_apart_from_walltime(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "1", "--out", str(a)]) == 0
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "1", "--out", str(b)]) == 0
    pa, pb = read_json(a), read_json(b)
    pa.pop("wall_time"), pb.pop("wall_time")
    assert pa == pb


def test_certify_shards_merge_and_audit_cli(tmp_path):
    paths = []
    for i in range(3):
        out = tmp_path / ("shard%d.json" % i)
        code = main(
            ["certify", "--target", "T3", "--m", "1", "--r", "2", "--shard", "%d/3" % i, "--out", str(out)]
        )
        assert code == 0
        paths.append(str(out))
    part = Certificate.load(paths[1])
    assert not part.full_coverage
    assert not part.rules_out()

    merged = tmp_path / "merged.json"
    assert main(["merge", *paths, "--out", str(merged)]) == 0
    cert = Certificate.load(str(merged))
    assert cert.full_coverage
    assert cert.tuples_tested == 66
    assert cert.rules_out()

    assert main(["audit", "--cert", str(merged), "--out", str(tmp_path / "audit.json")]) == 0
    report = read_json(tmp_path / "audit.json")
    assert report["passed"]
    assert report["failures"] == []


def test_merge_inconsistent_usage_error(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--shard", "0/3", "--out", str(a)]) == 0
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--shard", "2/3", "--out", str(b)]) == 0
    assert main(["merge", str(a), str(b), "--out", str(tmp_path / "m.json")]) == 2


def test_certify_threads_matches_serial(tmp_path):
    serial, threaded = tmp_path / "s.json", tmp_path / "t.json"
    assert main(["certify", "--target", "S", "--m", "2", "--r", "2", "--out", str(serial)]) == 0
    assert main(["certify", "--target", "S", "--m", "2", "--r", "2", "--threads", "3", "--out", str(threaded)]) == 0
    cs, ct = Certificate.load(str(serial)), Certificate.load(str(threaded))
    assert ct.witnesses == cs.witnesses
    assert len(cs.witnesses) == 12
    assert ct.tuples_tested == cs.tuples_tested
    assert ct.tuples_pruned == cs.tuples_pruned
    assert ct.min_nonwitness_residual == pytest.approx(cs.min_nonwitness_residual, abs=1e-9)
    assert ct.shard.to_payload() == cs.shard.to_payload()


def test_certify_checkpoint_flag_guards(tmp_path):
    chk = tmp_path / "chk.json"
    assert (
        main(
            ["certify", "--target", "T3", "--m", "1", "--r", "2", "--threads", "2", "--checkpoint", str(chk), "--out", str(tmp_path / "c.json")]
        )
        == 2
    )
    chk.write_text("{}")
    assert (
        main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--checkpoint", str(chk), "--out", str(tmp_path / "c.json")])
        == 2
    )
    chk.unlink()
    assert (
        main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--checkpoint", str(chk), "--out", str(tmp_path / "c.json")])
        == 0
    )
    assert not chk.exists()


def test_audit_detects_tampering(tmp_path):
    out = tmp_path / "cert.json"
    assert main(["certify", "--target", "T3", "--m", "1", "--r", "2", "--out", str(out)]) == 0
    payload = read_json(out)
    payload["min_nonwitness_residual"] = 1e-9
    with open(out, "w") as fh:
        json.dump(payload, fh)
    assert main(["audit", "--cert", str(out), "--out", str(tmp_path / "a.json")]) == 1
    report = read_json(tmp_path / "a.json")
    assert not report["passed"]
    assert any("residual-gap" in f for f in report["failures"])


def test_search_cli_success_feeds_verify(tmp_path):
    out = tmp_path / "search.json"
    assert main(["search", "--target", "S", "--m", "2", "--r", "2", "--seed", "0", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["success"]
    assert payload["residual"] <= 1e-10
    assert len(payload["subset"]) == 2
    dec_path = tmp_path / "dec.json"
    with open(dec_path, "w") as fh:
        json.dump(payload["decomposition"], fh)
    assert main(["verify", "--file", str(dec_path), "--exact", "--out", str(tmp_path / "v.json")]) == 0


def test_search_cli_failure_exit_one(tmp_path):
    out = tmp_path / "search.json"
    code = main(
        ["search", "--target", "H3", "--m", "2", "--r", "2", "--chains", "2", "--steps", "2000", "--out", str(out)]
    )
    assert code == 1
    payload = read_json(out)
    assert not payload["success"]
    assert payload["decomposition"] is None


def test_sweep_twocopy_strange_cli(tmp_path):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "twocopy", "--state", "S", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["magic"] == "S"
    assert payload["kind"] == "two-copy"
    assert payload["total"] == 51840 * 3
    assert all(h["classification"] != "phase-state-nonclifford" for h in payload["hits"])


def test_orbit_cli(tmp_path):
    out = tmp_path / "orbit.json"
    assert main(["orbit", "--state", "S", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["size"] == 9
    assert payload["group_order"] == 216
    assert len(payload["elements"]) == 9


def test_bound_cli(tmp_path):
    out = tmp_path / "bound.json"
    assert main(["bound", "--m", "26", "--state", "H3", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["value"] == pytest.approx(27 / (3 * math.log2(27)))
    assert payload["applicable"]
    assert payload["witness"]["ratio"] == pytest.approx(math.sqrt(3) + 1)
    assert len(payload["subsequence"]) == 27

    assert main(["bound", "--m", "3", "--state", "S", "--out", str(out)]) == 0
    payload = read_json(out)
    assert not payload["applicable"]
    assert payload["witness"] is None


def test_exponent_cli(tmp_path):
    out = tmp_path / "exp.json"
    assert main(["exponent", "--r", "4", "--m", "3", "--p", "3", "--out", str(out)]) == 0
    payload = read_json(out)
    assert payload["exponent"] == pytest.approx(0.4206, abs=1e-4)


def test_outdir_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("STABDECOMP_OUTDIR", str(tmp_path))
    assert main(["exponent", "--r", "2", "--m", "2", "--p", "3"]) == 0
    assert (tmp_path / "exponent-r2m2p3.json").exists()


def test_unknown_target_usage_error(tmp_path):
    assert main(["certify", "--target", "Q", "--m", "1", "--r", "1", "--out", str(tmp_path / "c.json")]) == 2
    assert main(["sweep", "twocopy", "--state", "H", "--out", str(tmp_path / "s.json")]) == 2
