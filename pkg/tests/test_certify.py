import math
import os

import numpy as np
import pytest

from stabdecomp.certify import (
    Certificate,
    ShardSpec,
    audit,
    certify_rank,
    merge_certificates,
    rank_tuple,
    target_fingerprint,
    unrank_tuple,
)
from stabdecomp.decomposition import best_fit
from stabdecomp.stabilizer import (
    ScaledCyclo,
    TargetState,
    build_catalog,
    magic_power,
    magic_state,
)


@pytest.fixture(scope="module")
def cat1():
    return build_catalog(3, 1)


@pytest.fixture(scope="module")
def cat2():
    return build_catalog(3, 2)


# ---------------------------------------------------------------------------
# ranking
# ---------------------------------------------------------------------------


def test_rank_round_trip():
    rng = np.random.default_rng(5)
    for r in (1, 2, 3, 4):
        for _ in range(50):
            rank = int(rng.integers(0, 10**9))
            assert rank_tuple(unrank_tuple(rank, r)) == rank
    with pytest.raises(ValueError):
        rank_tuple((3, 3))
    with pytest.raises(ValueError):
        rank_tuple((5, 2))


def test_colex_enumeration_matches_rank_order():
    import itertools

    tuples = sorted(itertools.combinations(range(7), 3), key=rank_tuple)
    assert tuples[:4] == [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    assert [rank_tuple(t) for t in tuples] == list(range(math.comb(7, 3)))
    assert [unrank_tuple(i, 3) for i in range(len(tuples))] == tuples


def test_shard_partition_exact():
    total = math.comb(12, 2)
    shards = [ShardSpec.of(i, 5, total) for i in range(5)]
    assert shards[0].lo == 0 and shards[-1].hi == total
    assert all(a.hi == b.lo for a, b in zip(shards, shards[1:]))
    assert sum(s.hi - s.lo for s in shards) == total
    with pytest.raises(ValueError):
        ShardSpec.of(5, 5, total)
    with pytest.raises(ValueError):
        ShardSpec(10, 5)


# ---------------------------------------------------------------------------
# small exhaustive searches
# ---------------------------------------------------------------------------


def test_t3_pair_certificate(cat1):
    cert = certify_rank(magic_state("T3"), 2, cat1)
    assert cert.total_tuples == 66
    assert cert.tuples_tested == 66
    assert cert.witnesses == []
    assert cert.rules_out()
    assert cert.min_nonwitness_residual > 1e-7
    report = audit(cert, cat1, magic_state("T3"))
    assert report.passed and report.failures == []


def test_pruning_matches_support_oracle(cat1):
    # pairs whose combined support misses a target point are pruned
    cert = certify_rank(magic_state("T3"), 2, cat1)
    supports = [set(cat1.get(i).support_indices().tolist()) for i in range(12)]
    expect = sum(
        1
        for j in range(12)
        for i in range(j)
        if not {0, 1, 2} <= (supports[i] | supports[j])
    )
    assert cert.tuples_pruned == expect == 3


def test_strange_two_copy_rank1_excluded(cat2):
    cert = certify_rank(magic_power("S", 2), 1, cat2)
    assert cert.tuples_tested == 360
    assert cert.witnesses == []
    assert cert.min_nonwitness_residual == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("name", ["H3", "N"])
def test_two_copy_rank2_excluded(cat2, name):
    cert = certify_rank(magic_power(name, 2), 2, cat2)
    assert cert.total_tuples == math.comb(360, 2) == 64620
    assert cert.witnesses == []
    assert cert.rules_out()
    assert cert.min_nonwitness_residual > 1e-7


def test_strange_two_copy_rank2_witnesses(cat2):
    cert = certify_rank(magic_power("S", 2), 2, cat2)
    assert len(cert.witnesses) > 0
    t = magic_power("S", 2).complex_vector()
    for w in cert.witnesses:
        A = np.column_stack([cat2.get(i).complex_vector() for i in w])
        _, res = best_fit(A, t)
        assert res <= 1e-10
    assert not cert.rules_out()
    assert audit(cert, cat2, magic_power("S", 2)).passed


def test_completeness_against_projective_equality(cat1):
    # with the target equal to a catalog state, r=1 witnesses are exactly it
    for idx in (0, 7, 11):
        st = cat1.get(idx)
        target = TargetState("fixture", 3, 1, [ScaledCyclo.wrap(a) for a in st.state_vector()])
        cert = certify_rank(target, 1, cat1)
        assert cert.witnesses == [(idx,)]


def test_gram_scores_match_direct_lstsq(cat1):
    cert = certify_rank(magic_state("S"), 2, cat1)
    t = magic_state("S").complex_vector()
    best = math.inf
    wits = []
    for rank in range(66):
        tup = unrank_tuple(rank, 2)
        A = np.column_stack([cat1.get(i).complex_vector() for i in tup])
        _, res = best_fit(A, t)
        if res <= 1e-10:
            wits.append(tup)
        else:
            best = min(best, res)
    assert sorted(wits) == cert.witnesses
    assert cert.min_nonwitness_residual == pytest.approx(best, abs=1e-9)


def test_shard_out_of_range(cat1):
    with pytest.raises(ValueError):
        certify_rank(magic_state("T3"), 2, cat1, shard=ShardSpec(0, 67))


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------


def test_merge_shards_equals_full(cat1):
    t3 = magic_state("T3")
    full = certify_rank(t3, 2, cat1)
    parts = [certify_rank(t3, 2, cat1, shard=ShardSpec.of(i, 3, 66)) for i in range(3)]
    merged = merge_certificates(parts)
    assert merged.tuples_tested == full.tuples_tested == 66
    assert merged.witnesses == full.witnesses
    assert merged.full_coverage and merged.rules_out()
    assert merged.min_nonwitness_residual == pytest.approx(
        full.min_nonwitness_residual, abs=1e-12
    )
    assert audit(merged, cat1, t3).passed


def test_merge_rejects_bad_unions(cat1):
    t3 = magic_state("T3")
    parts = [certify_rank(t3, 2, cat1, shard=ShardSpec.of(i, 3, 66)) for i in range(3)]
    with pytest.raises(ValueError):
        merge_certificates([parts[0], parts[0]])
    with pytest.raises(ValueError):
        merge_certificates([parts[0], parts[2]])
    other = certify_rank(t3, 2, cat1, shard=ShardSpec.of(1, 3, 66), tol=1e-9)
    with pytest.raises(ValueError):
        merge_certificates([parts[0], other])


def test_partial_merge_has_no_ruling_power(cat1):
    t3 = magic_state("T3")
    parts = [certify_rank(t3, 2, cat1, shard=ShardSpec.of(i, 3, 66)) for i in range(2)]
    merged = merge_certificates(parts)
    assert not merged.full_coverage
    assert not merged.rules_out()


# ---------------------------------------------------------------------------
# checkpoint / resume
# ---------------------------------------------------------------------------


def test_checkpoint_resume(tmp_path, cat1):
    t3 = magic_state("T3")
    ck = str(tmp_path / "ck.json")
    straight = certify_rank(t3, 2, cat1, checkpoint=ck, checkpoint_every=20)
    assert not os.path.exists(ck)

    calls = {"n": 0}

    def bomb(done):
        calls["n"] += 1
        if done > 30:
            raise RuntimeError("interrupted")

    with pytest.raises(RuntimeError):
        certify_rank(t3, 2, cat1, checkpoint=ck, checkpoint_every=20, progress=bomb)
    assert os.path.exists(ck)
    resumed = certify_rank(t3, 2, cat1, checkpoint=ck, checkpoint_every=20)
    assert resumed.tuples_tested == straight.tuples_tested
    assert resumed.witnesses == straight.witnesses
    assert resumed.min_nonwitness_residual == pytest.approx(
        straight.min_nonwitness_residual, abs=1e-12
    )

    # a checkpoint from a different search must be refused
    with pytest.raises(RuntimeError):
        certify_rank(t3, 2, cat1, checkpoint=ck, checkpoint_every=20, progress=bomb)
    with pytest.raises(ValueError):
        certify_rank(magic_state("S"), 2, cat1, checkpoint=ck)
    os.remove(ck)


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def test_audit_detects_tampering(cat1):
    t3 = magic_state("T3")
    cert = certify_rank(t3, 2, cat1)

    forged = Certificate.from_payload(cert.to_payload())
    forged.tuples_tested = 65
    assert audit(forged, cat1, t3).first_failure() == "coverage-arithmetic"

    forged = Certificate.from_payload(cert.to_payload())
    forged.catalog_hash = "0" * 64
    assert "catalog-hash" in audit(forged, cat1, t3).failures

    forged = Certificate.from_payload(cert.to_payload())
    forged.min_nonwitness_residual = 1e-9
    assert "residual-gap" in audit(forged, cat1, t3).failures

    forged = Certificate.from_payload(cert.to_payload())
    forged.witnesses = [(0, 1)]
    assert "witness-replay" in audit(forged, cat1, t3).failures

    forged = Certificate.from_payload(cert.to_payload())
    forged.min_nonwitness_residual = 0.9
    assert "sample-below-recorded-minimum" in audit(forged, cat1, t3).failures

    wrong_target = magic_state("S")
    assert "target-hash" in audit(cert, cat1, wrong_target).failures


def test_certificate_round_trip(tmp_path, cat1):
    cert = certify_rank(magic_state("T3"), 2, cat1)
    path = str(tmp_path / "cert.json")
    cert.save(path)
    loaded = Certificate.load(path)
    assert loaded == cert
    assert target_fingerprint(magic_state("T3")) == cert.target_hash
