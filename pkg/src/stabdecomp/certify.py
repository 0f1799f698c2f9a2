"""Exhaustive non-existence certificates for stabilizer-rank bounds.

All unordered r-tuples from a catalog are enumerated in colexicographic
order (rank = sum_t C(i_t, t)), scored by least-squares residual against
the target, and summarized in a machine-auditable certificate.  Sharding
splits the rank range exactly, so independent runs tile the full space and
merge into one certificate.  Tuples whose combined support cannot cover
the target's support are pruned before any linear algebra; a pruned tuple's
residual is bounded below by the smallest nonzero target amplitude, which
keeps the recorded minimum residual sound.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .decomposition import best_fit
from .stabilizer import Catalog, TargetState

__all__ = [
    "ShardSpec",
    "Certificate",
    "AuditReport",
    "rank_tuple",
    "unrank_tuple",
    "certify_rank",
    "merge_certificates",
    "audit",
    "target_fingerprint",
]

# Gram-solve residuals bottom out near sqrt(machine eps); anything below
# this squared threshold is re-scored exactly before the witness decision.
_CANDIDATE_RES2 = 1e-12


# ---------------------------------------------------------------------------
# colexicographic tuple ranking
# ---------------------------------------------------------------------------


def rank_tuple(tup: tuple[int, ...]) -> int:
    """Colex rank of a strictly increasing index tuple."""
    if list(tup) != sorted(set(tup)):
        raise ValueError("tuple must be strictly increasing")
    return sum(math.comb(i, t) for t, i in enumerate(tup, start=1))


def _largest_with_binomial_leq(rank: int, t: int) -> int:
    lo, hi = t - 1, t
    while math.comb(hi, t) <= rank:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if math.comb(mid, t) <= rank:
            lo = mid
        else:
            hi = mid
    return lo


def unrank_tuple(rank: int, r: int) -> tuple[int, ...]:
    """Inverse of rank_tuple: the rank-th r-tuple in colex order."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    out = []
    for t in range(r, 0, -1):
        i = _largest_with_binomial_leq(rank, t)
        out.append(i)
        rank -= math.comb(i, t)
    return tuple(reversed(out))


def _next_suffix(suffix: tuple[int, ...], count: int) -> tuple[int, ...] | None:
    """Successor suffix (positions 2..r) once all first-slot values are done."""
    s = list(suffix)
    for u in range(len(s)):
        nxt = s[u] + 1
        bound = s[u + 1] if u + 1 < len(s) else count
        if nxt < bound:
            return tuple(range(1, u + 1)) + (nxt,) + tuple(s[u + 1 :])
    return None


# ---------------------------------------------------------------------------
# shards and certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShardSpec:
    """Half-open tuple-rank range [lo, hi), optionally tagged index/count."""

    lo: int
    hi: int
    index: int | None = None
    count: int | None = None

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError("need 0 <= lo <= hi")

    @classmethod
    def of(cls, index: int, count: int, total: int) -> "ShardSpec":
        """Shard index/count with the exact-partition ranges floor(i*T/N)."""
        if not 0 <= index < count:
            raise ValueError("shard index out of range")
        return cls(
            lo=index * total // count,
            hi=(index + 1) * total // count,
            index=index,
            count=count,
        )

    def to_payload(self) -> dict:
        return {"index": self.index, "count": self.count, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_payload(cls, d: dict) -> "ShardSpec":
        return cls(lo=d["lo"], hi=d["hi"], index=d.get("index"), count=d.get("count"))


@dataclass
class Certificate:
    """Record of one exhaustive (sharded) rank search."""

    target_name: str
    copies: int
    p: int
    n: int
    r: int
    tol: float
    target_hash: str
    catalog_hash: str
    catalog_mode: str
    catalog_count: int
    total_tuples: int
    shard: ShardSpec
    tuples_tested: int
    tuples_pruned: int
    witnesses: list[tuple[int, ...]]
    min_nonwitness_residual: float
    wall_time: float
    full_coverage: bool
    version: int = 1

    def rules_out(self) -> bool:
        """True when this certificate alone excludes rank r."""
        return self.full_coverage and not self.witnesses

    def to_payload(self) -> dict:
        return {
            "format": "stabdecomp-certificate",
            "version": self.version,
            "target": self.target_name,
            "copies": self.copies,
            "p": self.p,
            "n": self.n,
            "r": self.r,
            "tol": self.tol,
            "target_hash": self.target_hash,
            "catalog_hash": self.catalog_hash,
            "catalog_mode": self.catalog_mode,
            "catalog_count": self.catalog_count,
            "total_tuples": self.total_tuples,
            "shard": self.shard.to_payload(),
            "tuples_tested": self.tuples_tested,
            "tuples_pruned": self.tuples_pruned,
            "witnesses": [list(w) for w in self.witnesses],
            "min_nonwitness_residual": self.min_nonwitness_residual,
            "full_coverage": self.full_coverage,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_payload(cls, d: dict) -> "Certificate":
        if d.get("format") != "stabdecomp-certificate":
            raise ValueError("not a certificate payload")
        return cls(
            target_name=d["target"],
            copies=d["copies"],
            p=d["p"],
            n=d["n"],
            r=d["r"],
            tol=d["tol"],
            target_hash=d["target_hash"],
            catalog_hash=d["catalog_hash"],
            catalog_mode=d["catalog_mode"],
            catalog_count=d["catalog_count"],
            total_tuples=d["total_tuples"],
            shard=ShardSpec.from_payload(d["shard"]),
            tuples_tested=d["tuples_tested"],
            tuples_pruned=d["tuples_pruned"],
            witnesses=[tuple(w) for w in d["witnesses"]],
            min_nonwitness_residual=d["min_nonwitness_residual"],
            wall_time=d["wall_time"],
            full_coverage=d["full_coverage"],
            version=d["version"],
        )

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_payload(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Certificate":
        with open(path) as fh:
            return cls.from_payload(json.load(fh))


def target_fingerprint(target: TargetState) -> str:
    """SHA-256 over the exact amplitude payloads of a target state."""
    body = json.dumps(
        [
            {"npow": a.npow, "num": a.num.to_payload()}
            for a in target.amps
        ],
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(body.encode()).hexdigest()


# ---------------------------------------------------------------------------
# the search kernel
# ---------------------------------------------------------------------------


class _SearchContext:
    """Shared per-catalog precomputation for one certify run."""

    def __init__(self, target: TargetState, catalog: Catalog):
        if (catalog.p, catalog.n) != (target.p, target.n):
            raise ValueError("catalog does not match the target dimensions")
        count = len(catalog)
        dim = catalog.p**catalog.n
        self.count = count
        self.V = np.empty((count, dim), dtype=np.complex128)
        masks = np.empty(count, dtype=np.int64)
        for i in range(count):
            st = catalog.get(i)
            self.V[i] = st.complex_vector()
            m = 0
            for idx in st.support_indices():
                m |= 1 << int(idx)
            masks[i] = m
        self.masks = masks
        self.t = target.complex_vector()
        self.tnorm2 = float(np.linalg.norm(self.t) ** 2)
        self.t_ov = self.V.conj() @ self.t
        tmask = 0
        for idx in np.flatnonzero(np.abs(self.t) > 0):
            tmask |= 1 << int(idx)
        self.target_mask = int(tmask)
        nonzero = np.abs(self.t[np.abs(self.t) > 0])
        # a pruned tuple misses at least one support point, so its residual
        # is at least the smallest amplitude sitting there
        self.prune_bound = float(nonzero.min()) if nonzero.size else 0.0


def _score_block(
    ctx: _SearchContext,
    xs: np.ndarray,
    suffix: tuple[int, ...],
    tol: float,
):
    """Residuals for tuples (x, *suffix); returns per-tuple stats.

    Returns (pruned_count, min_nonwitness_residual, witness_list).
    """
    masks = ctx.masks
    needed = ctx.target_mask
    for s in suffix:
        needed &= ~int(masks[s])
    witnesses: list[tuple[int, ...]] = []
    min_res = math.inf
    pruned = 0
    if needed:
        covered = (masks[xs] & needed) == needed
        pruned = int(xs.size - covered.sum())
        if pruned:
            min_res = ctx.prune_bound
        xs = xs[covered]
    if xs.size == 0:
        return pruned, min_res, witnesses

    r = len(suffix) + 1
    if r == 1:
        res2 = ctx.tnorm2 - np.abs(ctx.t_ov[xs]) ** 2
    else:
        Vs = ctx.V[list(suffix)]
        g = ctx.V[xs].conj() @ Vs.T  # (B, r-1) entries <v_x, v_s>
        B = xs.size
        G = np.empty((B, r, r), dtype=np.complex128)
        G[:, 0, 0] = 1.0
        G[:, 0, 1:] = g
        G[:, 1:, 0] = g.conj()
        G[:, 1:, 1:] = Vs.conj() @ Vs.T
        b = np.empty((B, r), dtype=np.complex128)
        b[:, 0] = ctx.t_ov[xs]
        b[:, 1:] = ctx.t_ov[list(suffix)]
        try:
            c = np.linalg.solve(G, b[..., None])[..., 0]
            res2 = ctx.tnorm2 - np.einsum("bi,bi->b", b.conj(), c).real
        except np.linalg.LinAlgError:
            # some tuple in the block is linearly dependent: score one by one
            res2 = np.empty(B)
            for row, x in enumerate(xs):
                A = np.column_stack([ctx.V[x], *ctx.V[list(suffix)]])
                _, res = best_fit(A, ctx.t)
                res2[row] = res**2
    res2 = np.clip(res2, 0.0, None)

    # exact re-score below the Gram floating-point floor
    cand = np.flatnonzero(res2 <= _CANDIDATE_RES2)
    for row in cand:
        x = int(xs[row])
        A = np.column_stack([ctx.V[x]] + [ctx.V[s] for s in suffix])
        _, res = best_fit(A, ctx.t)
        if res <= tol:
            witnesses.append((x, *suffix))
            res2[row] = math.inf  # exclude from the non-witness minimum
        else:
            res2[row] = res**2
    finite = res2[np.isfinite(res2)]
    if finite.size:
        min_res = min(min_res, float(np.sqrt(finite.min())))
    return pruned, min_res, witnesses


def _certify_range(ctx, lo, hi, r, tol, progress=None, progress_base=0):
    """Stream ranks [lo, hi) through the block scorer."""
    tested = 0
    pruned = 0
    min_res = math.inf
    witnesses: list[tuple[int, ...]] = []
    if lo >= hi:
        return tested, pruned, min_res, witnesses
    tup = unrank_tuple(lo, r)
    x_lo = tup[0]
    suffix = tup[1:]
    done = lo
    while done < hi:
        bound = suffix[0] if suffix else ctx.count
        x_hi = min(bound, x_lo + (hi - done))
        xs = np.arange(x_lo, x_hi, dtype=np.int64)
        p, m, w = _score_block(ctx, xs, suffix, tol)
        pruned += p
        min_res = min(min_res, m)
        witnesses.extend(w)
        tested += xs.size
        done += xs.size
        if progress is not None:
            progress(progress_base + done - lo)
        if done < hi and x_hi == bound:
            suffix = _next_suffix(suffix, ctx.count)
            if suffix is None:
                raise RuntimeError("ran past the final tuple; shard range invalid")
            x_lo = 0
        else:
            x_lo = x_hi
    return tested, pruned, min_res, witnesses


def certify_rank(
    target: TargetState,
    r: int,
    catalog: Catalog,
    shard: ShardSpec | None = None,
    tol: float = 1e-10,
    progress=None,
    checkpoint: str | None = None,
    checkpoint_every: int = 20_000_000,
) -> Certificate:
    """Exhaustively test every r-tuple in the shard against the target.

    A tuple is a witness when its least-squares residual is at most tol.
    With checkpoint set, progress is persisted so an interrupted run can
    resume; the resulting certificate is identical either way.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    count = len(catalog)
    total = math.comb(count, r)
    if shard is None:
        shard = ShardSpec(0, total, index=0, count=1)
    if shard.hi > total:
        raise ValueError("shard range exceeds the tuple space")

    ctx = _SearchContext(target, catalog)
    t_start = time.time()
    wall_prev = 0.0

    start = shard.lo
    tested = 0
    pruned = 0
    min_res = math.inf
    witnesses: list[tuple[int, ...]] = []

    state = _load_checkpoint(checkpoint, target, catalog, r, shard, tol)
    if state is not None:
        start = state["next_rank"]
        tested = state["tuples_tested"]
        pruned = state["tuples_pruned"]
        min_res = state["min_residual"]
        witnesses = [tuple(w) for w in state["witnesses"]]
        wall_prev = state["wall_time"]

    pos = start
    while pos < shard.hi:
        stop = min(shard.hi, pos + checkpoint_every) if checkpoint else shard.hi
        te, pr, mr, wi = _certify_range(
            ctx, pos, stop, r, tol, progress=progress, progress_base=pos - shard.lo
        )
        tested += te
        pruned += pr
        min_res = min(min_res, mr)
        witnesses.extend(wi)
        pos = stop
        if checkpoint and pos < shard.hi:
            _save_checkpoint(
                checkpoint, target, catalog, r, shard, tol,
                {
                    "next_rank": pos,
                    "tuples_tested": tested,
                    "tuples_pruned": pruned,
                    "min_residual": min_res,
                    "witnesses": [list(w) for w in witnesses],
                    "wall_time": wall_prev + time.time() - t_start,
                },
            )

    cert = Certificate(
        target_name=target.name,
        copies=_copies_of(target),
        p=target.p,
        n=target.n,
        r=r,
        tol=tol,
        target_hash=target_fingerprint(target),
        catalog_hash=catalog.content_hash(),
        catalog_mode=catalog.mode,
        catalog_count=count,
        total_tuples=total,
        shard=shard,
        tuples_tested=tested,
        tuples_pruned=pruned,
        witnesses=sorted(witnesses),
        min_nonwitness_residual=min_res,
        wall_time=wall_prev + time.time() - t_start,
        full_coverage=(shard.lo == 0 and shard.hi == total),
    )
    if checkpoint and os.path.exists(checkpoint):
        os.remove(checkpoint)
    return cert


def _copies_of(target: TargetState) -> int:
    name = target.name
    if "^" in name:
        return int(name.split("^")[1])
    # every named magic target uses one qudit leg per copy
    return target.n


def _checkpoint_key(target, catalog, r, shard, tol) -> dict:
    return {
        "target_hash": target_fingerprint(target),
        "catalog_count": len(catalog),
        "catalog_mode": catalog.mode,
        "r": r,
        "shard": shard.to_payload(),
        "tol": tol,
    }


def _load_checkpoint(path, target, catalog, r, shard, tol):
    if not path or not os.path.exists(path):
        return None
    with open(path) as fh:
        d = json.load(fh)
    if d.get("key") != _checkpoint_key(target, catalog, r, shard, tol):
        raise ValueError("checkpoint does not match this search")
    return d["state"]


def _save_checkpoint(path, target, catalog, r, shard, tol, state) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump({"key": _checkpoint_key(target, catalog, r, shard, tol), "state": state}, fh)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# merge and audit
# ---------------------------------------------------------------------------


def merge_certificates(certs: list[Certificate]) -> Certificate:
    """Union of disjoint shards of one search into a single certificate."""
    if not certs:
        raise ValueError("nothing to merge")
    head = certs[0]
    for c in certs[1:]:
        same = (
            c.target_name == head.target_name
            and c.copies == head.copies
            and c.r == head.r
            and c.tol == head.tol
            and c.target_hash == head.target_hash
            and c.catalog_hash == head.catalog_hash
            and c.catalog_mode == head.catalog_mode
            and c.catalog_count == head.catalog_count
            and c.total_tuples == head.total_tuples
            and c.version == head.version
        )
        if not same:
            raise ValueError("certificates describe different searches")
    ordered = sorted(certs, key=lambda c: c.shard.lo)
    for a, b in zip(ordered, ordered[1:]):
        if b.shard.lo < a.shard.hi:
            raise ValueError("overlapping shards")
        if b.shard.lo != a.shard.hi:
            # a gapped union could not be audited from a single rank range
            raise ValueError("shards do not tile a contiguous range")
    tiles = ordered[0].shard.lo == 0 and ordered[-1].shard.hi == head.total_tuples
    return Certificate(
        target_name=head.target_name,
        copies=head.copies,
        p=head.p,
        n=head.n,
        r=head.r,
        tol=head.tol,
        target_hash=head.target_hash,
        catalog_hash=head.catalog_hash,
        catalog_mode=head.catalog_mode,
        catalog_count=head.catalog_count,
        total_tuples=head.total_tuples,
        shard=ShardSpec(lo=ordered[0].shard.lo, hi=ordered[-1].shard.hi),
        tuples_tested=sum(c.tuples_tested for c in ordered),
        tuples_pruned=sum(c.tuples_pruned for c in ordered),
        witnesses=sorted(w for c in ordered for w in c.witnesses),
        min_nonwitness_residual=min(c.min_nonwitness_residual for c in ordered),
        wall_time=sum(c.wall_time for c in ordered),
        full_coverage=tiles,
        version=head.version,
    )


@dataclass
class AuditReport:
    passed: bool
    failures: list[str]
    samples_tested: int
    min_sample_residual: float

    def first_failure(self) -> str | None:
        return self.failures[0] if self.failures else None


def audit(
    cert: Certificate,
    catalog: Catalog,
    target: TargetState,
    samples: int = 1000,
    seed: int = 0,
) -> AuditReport:
    """Independently re-check a certificate's claims.

    Re-derives the catalog and target hashes, replays every listed witness,
    re-scores a random sample of non-witness tuples with the exact fitter,
    and checks the coverage arithmetic and the residual-gap invariant.
    """
    failures: list[str] = []

    if target_fingerprint(target) != cert.target_hash:
        failures.append("target-hash")
    if len(catalog) != cert.catalog_count or catalog.mode != cert.catalog_mode:
        failures.append("catalog-shape")
    elif catalog.content_hash() != cert.catalog_hash:
        failures.append("catalog-hash")

    total = math.comb(len(catalog), cert.r)
    span = cert.shard.hi - cert.shard.lo
    if (
        total != cert.total_tuples
        or cert.tuples_tested != span
        or cert.tuples_pruned > cert.tuples_tested
        or cert.full_coverage != (cert.shard.lo == 0 and cert.shard.hi == total)
    ):
        failures.append("coverage-arithmetic")

    if cert.min_nonwitness_residual < cert.tol * 1e3:
        failures.append("residual-gap")

    t = target.complex_vector()

    def residual_of(tup):
        A = np.column_stack([catalog.get(i).complex_vector() for i in tup])
        _, res = best_fit(A, t)
        return res

    if not failures:
        for w in cert.witnesses:
            if residual_of(w) > cert.tol:
                failures.append("witness-replay")
                break

    witness_ranks = {rank_tuple(w) for w in cert.witnesses}
    rng = np.random.default_rng(seed)
    n_samples = min(samples, max(span - len(witness_ranks), 0))
    min_sample = math.inf
    tested = 0
    if failures or span == 0:
        n_samples = 0
    while tested < n_samples:
        rank = int(rng.integers(cert.shard.lo, cert.shard.hi))
        if rank in witness_ranks:
            continue
        res = residual_of(unrank_tuple(rank, cert.r))
        min_sample = min(min_sample, res)
        tested += 1
        if res <= cert.tol:
            failures.append("sample-below-tolerance")
            break
        if res < cert.min_nonwitness_residual - 1e-9:
            failures.append("sample-below-recorded-minimum")
            break

    return AuditReport(
        passed=not failures,
        failures=failures,
        samples_tested=tested,
        min_sample_residual=min_sample,
    )
