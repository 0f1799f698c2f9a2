"""Command-line interface for catalogs, verification, search, and certificates.

Every subcommand writes a JSON artifact (stable field order, one schema
version per artifact type) and prints a short human summary to stdout;
progress goes to stderr.  Exit codes: 0 success/pass, 1 verification or
audit failure (including an unsuccessful search), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .anneal import AnnealConfig, anneal_search
from .asymptotics import exp_subsequence, find_ratio_witness, moulton_bound
from .certify import Certificate, ShardSpec, audit, certify_rank, merge_certificates
from .clifford import generate_clifford_group, orbit_closure
from .decomposition import Decomposition, exponent_from_bound
from .gadget import sweep_injection, sweep_two_copy
from . import known
from .stabilizer import MAGIC_NAMES, build_catalog, magic_power, magic_state

VERIFY_TOL = 1e-13
WITNESS_TOL = 1e-10

_QUTRIT = ("S", "N", "H3", "T3")


def _out_path(args, default_name: str) -> str:
    if getattr(args, "out", None):
        return args.out
    base = os.environ.get("STABDECOMP_OUTDIR", ".")
    return os.path.join(base, default_name)


def _write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _target(name: str, m: int):
    if name not in MAGIC_NAMES:
        raise ValueError("unknown magic state %r (choose from %s)" % (name, ", ".join(MAGIC_NAMES)))
    return magic_power(name, m)


def _parse_shard(text: str) -> tuple[int, int]:
    try:
        i, n = text.split("/")
        i, n = int(i), int(n)
    except ValueError:
        raise ValueError("--shard expects i/N, e.g. 0/100")
    if not 0 <= i < n:
        raise ValueError("shard index out of range")
    return i, n


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    cat = build_catalog(args.p, args.n, args.mode)
    path = _out_path(args, "catalog-p%dn%d-%s.jsonl" % (args.p, args.n, args.mode))
    header = cat.write_jsonl(path)
    print("catalog p=%d n=%d mode=%s: %d states" % (args.p, args.n, args.mode, len(cat)))
    print("sha256 %s" % header["sha256"])
    print("wrote %s" % path)
    return 0


def cmd_verify(args) -> int:
    jobs = []
    if args.all_fixtures:
        jobs = sorted(known.FIXTURES)
    elif args.fixture:
        if args.fixture not in known.FIXTURES:
            print("unknown fixture %r (choose from %s)" % (args.fixture, ", ".join(sorted(known.FIXTURES))), file=sys.stderr)
            return 2
        jobs = [args.fixture]
    elif not args.file:
        print("need --fixture, --all-fixtures, or --file", file=sys.stderr)
        return 2

    rows = []
    ok = True
    for name in jobs:
        dec = known.FIXTURES[name]()
        rows.append(_verify_one(name, dec, args.exact, args.tol))
        ok &= rows[-1]["passed"]
    if args.file:
        dec = Decomposition.load(args.file)
        rows.append(_verify_one(os.path.basename(args.file), dec, args.exact, args.tol))
        ok &= rows[-1]["passed"]

    payload = {
        "format": "stabdecomp-verify",
        "version": 1,
        "tol": args.tol,
        "exact": args.exact,
        "results": rows,
    }
    path = _out_path(args, "verify-report.json")
    _write_json(path, payload)
    for row in rows:
        print(
            "%-14s rank %-2d residual %.2e %s"
            % (row["name"], row["rank"], row["residual"], "ok" if row["passed"] else "FAIL")
        )
    print("wrote %s" % path)
    return 0 if ok else 1


def _verify_one(name, dec, exact, tol) -> dict:
    residual = dec.verify_numeric()
    row = {
        "name": name,
        "target": dec.target.name,
        "rank": dec.rank,
        "residual": residual,
        "passed": residual <= tol,
    }
    if exact:
        mismatches = dec.verify_exact()
        row["exact_mismatches"] = mismatches
        row["passed"] = row["passed"] and not mismatches
    return row


def cmd_search(args) -> int:
    target = _target(args.target, args.m)
    catalog = build_catalog(target.p, target.n, args.mode)
    cfg = AnnealConfig(
        target=target,
        rank=args.r,
        catalog=catalog,
        steps=args.steps,
        chains=args.chains,
        t_initial=args.t0,
        cooling=args.cooling,
        tol=args.tol,
        seed=args.seed,
    )
    t0 = time.time()
    res = anneal_search(cfg)
    wall = time.time() - t0
    payload = {
        "format": "stabdecomp-search",
        "version": 1,
        "target": target.name,
        "p": target.p,
        "r": args.r,
        "catalog_count": len(catalog),
        "catalog_mode": args.mode,
        "steps": args.steps,
        "chains": args.chains,
        "cooling": args.cooling,
        "tol": args.tol,
        "seed": args.seed,
        "success": res.success,
        "residual": res.residual,
        "subset": list(res.subset),
        "chains_run": len(res.chain_traces),
        "chain_traces": res.chain_traces,
        "decomposition": res.decomposition.to_payload() if res.decomposition else None,
        "wall_time": wall,
    }
    path = _out_path(args, "search-%s-r%d-seed%d.json" % (target.name.replace("^", "m"), args.r, args.seed))
    _write_json(path, payload)
    print(
        "search %s r=%d: %s (residual %.2e, %d chains, %.1fs)"
        % (target.name, args.r, "success" if res.success else "no witness", res.residual, len(res.chain_traces), wall)
    )
    print("wrote %s" % path)
    return 0 if res.success else 1


def _progress_printer(total: int):
    state = {"t": time.time(), "start": time.time()}

    def cb(done: int):
        now = time.time()
        if now - state["t"] >= 2.0:
            state["t"] = now
            rate = done / max(now - state["start"], 1e-9)
            print(
                "  %d / %d tuples (%.1f%%, %.2fM/s)"
                % (done, total, 100.0 * done / max(total, 1), rate / 1e6),
                file=sys.stderr,
            )

    return cb


def cmd_certify(args) -> int:
    target = _target(args.target, args.m)
    catalog = build_catalog(target.p, target.n, args.mode)
    total = math.comb(len(catalog), args.r)
    idx, cnt = _parse_shard(args.shard)
    shard = ShardSpec.of(idx, cnt, total)

    if args.threads > 1 and args.checkpoint:
        print("--threads and --checkpoint are mutually exclusive", file=sys.stderr)
        return 2
    checkpoint = args.checkpoint
    if checkpoint and os.path.exists(checkpoint) and not args.resume:
        print("checkpoint %s exists; pass --resume to continue it" % checkpoint, file=sys.stderr)
        return 2

    progress = _progress_printer(shard.hi - shard.lo)
    if args.threads > 1:
        span = shard.hi - shard.lo
        cuts = [shard.lo + i * span // args.threads for i in range(args.threads + 1)]
        parts = [ShardSpec(lo=a, hi=b) for a, b in zip(cuts, cuts[1:]) if a < b]
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            certs = list(
                pool.map(lambda s: certify_rank(target, args.r, catalog, shard=s, tol=args.tol), parts)
            )
        cert = merge_certificates(certs)
        cert.shard = shard
    else:
        cert = certify_rank(
            target,
            args.r,
            catalog,
            shard=shard,
            tol=args.tol,
            progress=progress,
            checkpoint=checkpoint,
        )
    path = _out_path(
        args,
        "cert-%s-r%d-shard%dof%d.json" % (target.name.replace("^", "m"), args.r, idx, cnt),
    )
    cert.save(path)
    print(
        "certify %s r=%d shard %d/%d: %d tuples (%d pruned), %d witnesses, min residual %.3g"
        % (target.name, args.r, idx, cnt, cert.tuples_tested, cert.tuples_pruned, len(cert.witnesses), cert.min_nonwitness_residual)
    )
    if cert.rules_out():
        print("rank %d ruled out over the full tuple space" % args.r)
    print("wrote %s" % path)
    return 0


def cmd_merge(args) -> int:
    try:
        certs = [Certificate.load(p) for p in args.certs]
        merged = merge_certificates(certs)
    except (ValueError, KeyError) as exc:
        print("merge failed: %s" % exc, file=sys.stderr)
        return 2
    path = _out_path(args, "cert-merged.json")
    merged.save(path)
    print(
        "merged %d certificates: %d tuples, %d witnesses, coverage %s"
        % (len(certs), merged.tuples_tested, len(merged.witnesses), "full" if merged.full_coverage else "partial")
    )
    print("wrote %s" % path)
    return 0


def cmd_audit(args) -> int:
    cert = Certificate.load(args.cert)
    base = cert.target_name.split("^")[0]
    try:
        target = _target(base, cert.copies)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    catalog = build_catalog(cert.p, cert.n, cert.catalog_mode)
    report = audit(cert, catalog, target, samples=args.samples, seed=args.seed)
    payload = {
        "format": "stabdecomp-audit",
        "version": 1,
        "certificate": os.path.basename(args.cert),
        "passed": report.passed,
        "failures": report.failures,
        "samples_tested": report.samples_tested,
        "min_sample_residual": report.min_sample_residual
        if math.isfinite(report.min_sample_residual)
        else None,
    }
    path = _out_path(args, "audit-report.json")
    _write_json(path, payload)
    if report.passed:
        print("audit passed (%d samples, min sample residual %.3g)" % (report.samples_tested, report.min_sample_residual))
    else:
        print("audit FAILED: %s" % ", ".join(report.failures))
    print("wrote %s" % path)
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    if args.state not in _QUTRIT:
        print("sweeps cover the qutrit states: %s" % ", ".join(_QUTRIT), file=sys.stderr)
        return 2
    t0 = time.time()
    if args.kind == "twocopy":
        res = sweep_two_copy(args.state)
    else:
        res = sweep_injection(args.state)
    wall = time.time() - t0
    payload = res.to_json()
    payload["wall_time"] = wall
    path = _out_path(args, "sweep-%s-%s.json" % (args.kind, args.state))
    _write_json(path, payload)
    print("sweep %s %s: %d branches" % (args.kind, args.state, res.total))
    for key in sorted(res.counts):
        print("  %-24s %d" % (key, res.counts[key]))
    if args.kind == "twocopy":
        nc = res.nonclifford_hits()
        print("  non-Clifford conversion hits: %d" % len(nc))
    else:
        print("  deterministic gadgets: %d" % len(res.hits))
    print("wrote %s" % path)
    return 0


def cmd_orbit(args) -> int:
    if args.state not in _QUTRIT:
        print("orbits cover the qutrit states: %s" % ", ".join(_QUTRIT), file=sys.stderr)
        return 2
    vec = magic_state(args.state).complex_vector()
    group = generate_clifford_group(1)
    orbit = orbit_closure(vec, [U for U, _ in group])
    payload = {
        "format": "stabdecomp-orbit",
        "version": 1,
        "state": args.state,
        "group_order": len(group),
        "size": len(orbit),
        "elements": [[[float(z.real), float(z.imag)] for z in v] for v in orbit],
    }
    path = _out_path(args, "orbit-%s.json" % args.state)
    _write_json(path, payload)
    print("orbit of %s under the single-qutrit Clifford group: %d states" % (args.state, len(orbit)))
    print("wrote %s" % path)
    return 0


def cmd_bound(args) -> int:
    payload = {
        "format": "stabdecomp-bound",
        "version": 1,
        "m": args.m,
        "value": moulton_bound(args.m),
    }
    if args.state:
        if args.state not in _QUTRIT:
            print("witness check covers the qutrit states", file=sys.stderr)
            return 2
        wit = find_ratio_witness(magic_state(args.state).complex_vector())
        payload["state"] = args.state
        payload["applicable"] = wit is not None
        payload["witness"] = (
            {"i_a": wit.i_a, "i_b": wit.i_b, "a": wit.a, "b": wit.b, "ratio": wit.ratio}
            if wit
            else None
        )
        if wit:
            seq = exp_subsequence(magic_state(args.state).complex_vector(), args.m)
            payload["subsequence"] = [
                {"coordinate": list(c), "modulus": mod} for c, mod in seq
            ]
    path = _out_path(args, "bound-m%d.json" % args.m)
    _write_json(path, payload)
    print("counting bound at m=%d copies: %.6f" % (args.m, payload["value"]))
    if args.state:
        print(
            "ratio witness for %s: %s"
            % (args.state, "ratio %.4f" % payload["witness"]["ratio"] if payload["applicable"] else "none (bound inapplicable)")
        )
    print("wrote %s" % path)
    return 0


def cmd_exponent(args) -> int:
    value = exponent_from_bound(args.r, args.m, args.p)
    payload = {
        "format": "stabdecomp-exponent",
        "version": 1,
        "r": args.r,
        "m": args.m,
        "p": args.p,
        "exponent": value,
    }
    path = _out_path(args, "exponent-r%dm%dp%d.json" % (args.r, args.m, args.p))
    _write_json(path, payload)
    print("rank %d at %d copies (p=%d) gives exponent %.6f" % (args.r, args.m, args.p, value))
    print("wrote %s" % path)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stabdecomp",
        description="Stabilizer-rank decompositions, certificates, and Clifford protocol sweeps.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="enumerate canonical stabilizer states to JSONL")
    p.add_argument("--p", type=int, default=3, choices=(2, 3))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("raw", "dedupe"), default="raw")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify", help="verify bundled or saved decompositions")
    p.add_argument("--fixture")
    p.add_argument("--all-fixtures", action="store_true")
    p.add_argument("--file")
    p.add_argument("--exact", action="store_true", help="also run the exact cyclotomic check")
    p.add_argument("--tol", type=float, default=VERIFY_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="simulated-annealing decomposition search")
    p.add_argument("--target", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--chains", type=int, default=32)
    p.add_argument("--cooling", type=float, default=0.995)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--tol", type=float, default=WITNESS_TOL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("raw", "dedupe"), default="raw")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("certify", help="exhaustive tuple certificate for a rank bound")
    p.add_argument("--target", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--shard", default="0/1", help="shard i/N of the tuple space")
    p.add_argument("--tol", type=float, default=WITNESS_TOL)
    p.add_argument("--mode", choices=("raw", "dedupe"), default="raw")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--checkpoint", help="checkpoint file for interruptible runs")
    p.add_argument("--resume", action="store_true", help="continue from an existing checkpoint")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("merge", help="merge shard certificates")
    p.add_argument("certs", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("audit", help="independently re-check a certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sweep", help="exhaustive two-qutrit Clifford protocol sweeps")
    p.add_argument("kind", choices=("twocopy", "injection"))
    p.add_argument("--state", required=True)
    p.add_argument("--threads", type=int, default=1, help="accepted for symmetry; the sweep is vectorized")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("orbit", help="projective Clifford orbit of a magic state")
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("bound", help="counting lower bound and ratio-witness check")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("exponent", help="asymptotic exponent from a finite rank bound")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exponent)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
