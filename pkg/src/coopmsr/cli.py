"""Command-line front end.

Exit codes: 0 success, 2 parameter error, 3 verification failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cluster import Cluster, RepairReport
from .code import Codeword, Shard, encode, make_params, mds_reconstruct, parity_residuals
from .errors import CoopMSRError, ParameterError, ShardFormatError
from .gf import is_prime
from .grouping import classify, instances_for
from .shardfile import SUFFIX, ShardFile, pack_bytes, shard_path, unpack_bytes

log = logging.getLogger("coopmsr")

EXIT_OK, EXIT_PARAM, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


def smallest_prime_at_least(x: int) -> int:
    while not is_prime(x) or x == 2:
        x += 1
    return x


def int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def thread_cap() -> int:
    """``COOPMSR_THREADS``; the library runs serially, so any cap >= 1 is honoured."""
    raw = os.environ.get("COOPMSR_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ParameterError(f"COOPMSR_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ParameterError("COOPMSR_THREADS must be >= 1")
    return cap


def cmd_params(n: int, k: int, q: int, h: int) -> dict:
    """Case detection and sub-packetization against the ``(h+1) 2**n`` of the instance-pairing scheme."""
    if h < 1 or h > n - k - 1:
        raise ParameterError(f"h={h} outside [1, r-1={n - k - 1}]")
    case = classify(h)
    params = make_params(n, k, q, instances_for(h))
    prior = (h + 1) << n
    ratio = Fraction(prior, params.N)
    return {
        "n": n, "k": k, "q": q, "h": h, "d": k + 1,
        "case": case.kind, "m": case.m, "ell": case.ell,
        "N": params.N, "prior_N": prior,
        "ratio": int(ratio) if ratio.denominator == 1 else float(ratio),
        "lambda": params.lam.tolist(),
    }


def _resolve_instances(h: int | None, ell: int | None) -> int:
    if h is not None:
        inst = instances_for(h)
        if ell is not None and 2 * ell + 1 != inst:
            raise ParameterError(f"ell={ell} inconsistent with h={h}")
        return inst
    return 2 * (ell or 0) + 1


def cmd_encode(data: bytes, out_dir, n: int, k: int, q: int, instances: int = 1) -> list[Path]:
    params = make_params(n, k, q, instances)
    stripes = pack_bytes(data, params)
    coded = np.stack([encode(params, stripe).symbols for stripe in stripes])  # (S, n, N)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        sf = ShardFile(n, k, q, instances, i, coded[:, i, :], len(data))
        path = shard_path(out_dir, i)
        sf.write(path)
        paths.append(path)
    return paths


def _expand(paths) -> list[Path]:
    out = []
    for p in paths:
        p = Path(p)
        out += sorted(p.glob(f"*{SUFFIX}")) if p.is_dir() else [p]
    return out


def load_shards(paths, check: bool = True) -> dict[int, ShardFile]:
    shards = {}
    for path in _expand(paths):
        sf = ShardFile.read(path, check=check)
        if shards and not sf.matches(next(iter(shards.values()))):
            raise ShardFormatError(f"{path}: header does not match the other shards")
        shards[sf.node_id] = sf
    if not shards:
        raise ShardFormatError("no shard files found")
    return shards


def cmd_decode(paths) -> bytes:
    shards = load_shards(paths)
    first = next(iter(shards.values()))
    if len(shards) < first.k:
        raise ShardFormatError(f"need {first.k} shards, found {len(shards)}")
    use = [shards[i] for i in sorted(shards)[:first.k]]
    params = make_params(first.n, first.k, first.q, first.instances)
    data = []
    for s in range(first.stripes):
        cw = mds_reconstruct(params, [Shard(sf.node_id, sf.symbols[s]) for sf in use])
        data.append(cw.symbols[:params.k])
    return unpack_bytes(np.stack(data), first.q, first.length)


def cmd_verify(paths) -> bool:
    shards = load_shards(paths, check=False)
    first = next(iter(shards.values()))
    if sorted(shards) != list(range(first.n)):
        raise ShardFormatError(f"verification needs all {first.n} shards, found {sorted(shards)}")
    params = make_params(first.n, first.k, first.q, first.instances)
    for s in range(first.stripes):
        symbols = np.stack([shards[i].symbols[s] for i in range(first.n)])
        if (symbols >= params.q).any() or parity_residuals(params, symbols).any():
            return False
    return True


def cmd_repair(n: int, k: int, q: int, h: int | None = None, ell: int | None = None,
               erased=None, helpers=None, seed: int = 0, in_dir=None, out_dir=None,
               transcript=None) -> RepairReport:
    """Fail ``erased`` (or ``h`` seeded-random nodes) and repair cooperatively.

    Data is random from ``seed`` unless ``in_dir`` holds a full set of shard files.
    """
    rng = np.random.default_rng(seed)
    if erased is None:
        if h is None:
            raise ParameterError("give --erased or --h")
        erased = sorted(rng.choice(n, size=h, replace=False).tolist()) if h else []
    erased = sorted(erased)
    if h is not None and h != len(erased):
        raise ParameterError(f"h={h} but {len(erased)} nodes listed as erased")
    instances = _resolve_instances(len(erased) or None, ell)
    params = make_params(n, k, q, instances)

    if in_dir is not None:
        files = load_shards([in_dir])
        first = next(iter(files.values()))
        if (first.n, first.k, first.q, first.instances) != (n, k, q, instances):
            raise ShardFormatError("shard headers do not match the requested code")
        if sorted(files) != list(range(n)):
            raise ShardFormatError(f"repair simulation needs all {n} shards, found {sorted(files)}")
        stripes = [Codeword([Shard(i, files[i].symbols[s]) for i in range(n)]) for s in range(first.stripes)]
        length = first.length
    else:
        stripes = [encode(params, rng.integers(0, q, size=(k, params.N)))]
        length = 0

    report, restored, ledger = None, [], []
    for cw in stripes:
        cluster = Cluster(params, cw)
        rep = cluster.run_repair(erased, helpers)
        report = rep if report is None else report + rep
        restored.append(cluster.codeword().symbols)
        ledger += cluster.ledger

    if transcript is not None:
        with open(transcript, "w") as fh:
            for rec in ledger:
                fh.write(rec.to_json() + "\n")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stack = np.stack(restored)  # (S, n, N)
        for i in range(n):
            ShardFile(n, k, q, instances, i, stack[:, i, :], length).write(shard_path(out_dir, i))
    return report


BENCH_FIELDS = ["n", "k", "h", "q", "case", "N", "gamma", "gamma_optimal", "optimal", "correct", "seconds", "error"]


def cmd_bench(ns, ks, hs, q: int | None = None, seed: int = 0) -> list[dict]:
    rows = []
    rng = np.random.default_rng(seed)
    for n, k, h in itertools.product(ns, ks, hs):
        row = dict.fromkeys(BENCH_FIELDS, "")
        row.update(n=n, k=k, h=h)
        try:
            qq = q or smallest_prime_at_least(2 * n + 1)
            row["q"] = qq
            info = cmd_params(n, k, qq, h)
            row.update(case=info["case"], N=info["N"])
            params = make_params(n, k, qq, instances_for(h))
            cluster = Cluster.random(params, rng)
            erased = sorted(rng.choice(n, size=h, replace=False).tolist())
            start = time.perf_counter()
            rep = cluster.run_repair(erased)
            row.update(seconds=f"{time.perf_counter() - start:.4f}", gamma=rep.gamma_total,
                       gamma_optimal=rep.gamma_optimal, optimal=rep.optimal, correct=rep.correct)
        except CoopMSRError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _common(p: argparse.ArgumentParser, need_h=False):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--h", type=int, required=need_h)
    p.add_argument("--ell", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopmsr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="case, sub-packetization and lambda table")
    _common(p, need_h=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("encode", help="encode a file into n shard files")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("decode", help="rebuild a file from any k shard files")
    p.add_argument("--in", dest="inp", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="check all parity equations over n shard files")
    p.add_argument("--in", dest="inp", nargs="+", required=True)

    p = sub.add_parser("repair", help="fail nodes and repair them cooperatively")
    _common(p)
    p.add_argument("--erased", type=int_list)
    p.add_argument("--helpers", type=int_list)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="inp")
    p.add_argument("--out")
    p.add_argument("--transcript")
    p.add_argument("--json", action="store_true", help="pretty-print the report")

    p = sub.add_parser("bench", help="sweep (n, k, h) and compare measured to optimal bandwidth")
    p.add_argument("--n", type=int_list, required=True)
    p.add_argument("--k", type=int_list, required=True)
    p.add_argument("--h", type=int_list, required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    return parser


def _run(args, out) -> int:
    if args.command == "params":
        info = cmd_params(args.n, args.k, args.q, args.h)
        if args.json:
            print(json.dumps(info), file=out)
        else:
            for key, val in info.items():
                print(f"{key}: {val}", file=out)
        return EXIT_OK
    if args.command == "encode":
        instances = _resolve_instances(args.h, args.ell)
        data = Path(args.inp).read_bytes()
        paths = cmd_encode(data, args.out, args.n, args.k, args.q, instances)
        print(f"wrote {len(paths)} shards to {args.out}", file=out)
        return EXIT_OK
    if args.command == "decode":
        Path(args.out).write_bytes(cmd_decode(args.inp))
        return EXIT_OK
    if args.command == "verify":
        ok = cmd_verify(args.inp)
        print("ok" if ok else "parity check failed", file=out)
        return EXIT_OK if ok else EXIT_VERIFY
    if args.command == "repair":
        rep = cmd_repair(args.n, args.k, args.q, h=args.h, ell=args.ell, erased=args.erased,
                         helpers=args.helpers, seed=args.seed, in_dir=args.inp, out_dir=args.out,
                         transcript=args.transcript)
        print(rep.to_json(indent=2 if args.json else None), file=out)
        return EXIT_OK if rep.correct and rep.optimal else EXIT_VERIFY
    if args.command == "bench":
        rows = cmd_bench(args.n, args.k, args.h, args.q, args.seed)
        if args.json:
            print(json.dumps(rows), file=out)
        else:
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
            out.write(buf.getvalue())
        if any(r["error"] for r in rows):
            return EXIT_PARAM
        if not all(r["optimal"] is True and r["correct"] is True for r in rows):
            return EXIT_VERIFY
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        thread_cap()
        return _run(args, out)
    except ShardFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CoopMSRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
