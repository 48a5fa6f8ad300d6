"""Command-line entry point: ``extractorlab {eval, pa, verify}``.

Exit codes: 0 when every in-force bound held, 1 for usage or parse errors,
2 when a bound was violated or an instance was outside its regime.
Machine-readable output goes to stdout (or ``--output``); diagnostics go to
stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import os
import sys
import threading
from fractions import Fraction

import numpy as np

from . import __version__
from .dist import WeakSourceSpec, enum_flat_sources
from .ff import ExtField, FieldError, GF2m, PrimeField
from .mac import MacKey, format_word, mac_tag, parse_word
from .nmtest import NM_NOTE, RegimeError, mac_pairwise_range, nm_bruteforce, test_mac_forgery, test_nm, test_two_source
from .xtr import NmExtParams, TwoWiseSpec, build_weak_design, ip_ext, nm_ext, trevisan_ext, two_source_bound

log = logging.getLogger("extractorlab")

SEED_ENV = "EXTRACTORLAB_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _ints(text: str) -> list[int]:
    try:
        return [int(v, 0) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer") from exc
    return args.seed


# eval


def cmd_eval(args) -> int:
    prim = args.primitive
    if prim == "ip":
        x, y = _ints(args.x), _ints(args.y)
        print(ip_ext(x, y, PrimeField(args.p).p))
    elif prim == "nmext":
        params = NmExtParams(args.p, args.n)
        print(nm_ext(_ints(args.x), tuple(_ints(args.y)), params))
    elif prim == "mac":
        fld = GF2m(args.m, parse_word(args.poly) if args.poly else 0)
        k = args.key.split(",")
        if len(k) != 2:
            raise UsageError("--key takes k1,k2")
        key = MacKey(parse_word(k[0], args.m), parse_word(k[1], args.m), fld)
        print(format_word(mac_tag(key, parse_word(args.msg, args.m)), args.m))
    elif prim == "tre":
        params = build_weak_design(args.l, args.t, n=len(args.x))
        print(trevisan_ext(args.x, args.seed_bits, params))
    return 0


# pa


def _profile(args):
    from .pa import load_profile

    return load_profile(args.profile, args.profile_dir)


def _emit_lines(out):
    lock = threading.Lock()

    def emit(rec):
        with lock:
            out.write(json.dumps(rec, sort_keys=True) + "\n")
            out.flush()

    return emit


def cmd_pa(args) -> int:
    from .pa import make_adversary, protocol_bounds, run_sessions
    from .pa.net import BobServer, MitmProxy, parse_address, run_alice

    params = _profile(args)
    seed = _seed(args)
    out = open(args.output, "w") if args.output else sys.stdout
    emit = _emit_lines(out)
    try:
        if args.role == "local":
            adv = make_adversary(args.adv, params)
            stats = {"sessions": 0, "correct": 0, "rejected": 0, "robust_violation": 0}
            for o in run_sessions(params, adv, args.sessions, seed):
                rec = o.to_dict()
                rec["session"] = stats["sessions"]
                emit(rec)
                stats["sessions"] += 1
                stats["correct"] += o.correct
                stats["rejected"] += o.rejected
                stats["robust_violation"] += o.robust_violation
            b = protocol_bounds(params)
            stats.update(adversary=args.adv, profile=params.name, seed=seed,
                         robust_bound=b["robust"], robust_mac_bound=b["robust_mac"])
            print(json.dumps(stats, sort_keys=True), file=sys.stderr)
        elif args.role == "bob":
            with BobServer(params, seed, *parse_address(args.listen)) as srv:
                log.info("bob listening on %s:%d", *srv.address)
                srv.serve(args.sessions, emit)
        elif args.role == "alice":
            run_alice(params, parse_address(args.connect), args.sessions, seed, emit)
        elif args.role == "mitm":
            adv = make_adversary(args.adv, params)
            with MitmProxy(params, adv, parse_address(args.upstream), seed, *parse_address(args.listen)) as px:
                log.info("mitm listening on %s:%d", *px.address)
                px.serve(args.sessions, emit)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# verify


def _row_twowise(args):
    rows = []
    for p in args.p:
        for n in args.n:
            spec = TwoWiseSpec.ip(p, n)
            c = spec.collision_counts()
            off = c[~np.eye(spec.nx, dtype=bool)]
            rows.append({"p": p, "n": n, "expected": p ** (n - 1), "min_collisions": int(off.min()),
                         "max_collisions": int(off.max()), "in_force": 1,
                         "holds": int(off.min() == off.max() == p ** (n - 1))})
    return rows


def ext_sweep(p: int, n: int, budget: int = 1 << 12, seed: int = 0) -> list[dict]:
    """Worst Y-strong error over flat X sources of each support size, Y uniform."""
    spec = TwoWiseSpec.ip(p, n)
    y = WeakSourceSpec(spec.ny, math.log2(spec.ny))
    rows = []
    for s in range(2, spec.nx + 1):
        worst, count = Fraction(0), 0
        for src in enum_flat_sources(None, s, budget, seed, size=spec.nx):
            worst = max(worst, test_two_source(spec, src, y, "Y"))
            count += 1
        bound = two_source_bound(spec.nz, spec.ny, math.log2(s), math.log2(spec.ny))
        rows.append({"p": p, "n": n, "support": s, "k_x": f"{math.log2(s):.6f}", "sources": count,
                     "epsilon": f"{float(worst):.12g}", "epsilon_exact": str(worst),
                     "bound": f"{bound:.12g}", "in_force": int(bound < 1),
                     "holds": int(float(worst) <= bound + 1e-12)})
    return rows


def nm_sweep(p: int, n: int, budget: int = 1 << 10, seed: int = 0) -> list[dict]:
    """Worst non-malleability error per X support size against every tampering table."""
    params = NmExtParams(p, n)
    nx = p**n
    y = WeakSourceSpec(params.ny, math.log2(params.ny))
    rows = []
    for s in range(1, nx + 1):
        worst = None
        count = 0
        for src in enum_flat_sources(None, s, budget, seed, size=nx):
            rep = test_nm(params, src, y)
            count += 1
            if worst is None or rep.epsilon > worst.epsilon:
                worst = rep
        row = {"support": s, "sources": count, **worst.csv_row(), "worst_table": " ".join(map(str, worst.worst_table))}
        if s == nx and params.ny <= 9:
            row["bruteforce_agrees"] = int(nm_bruteforce(params, WeakSourceSpec(nx, math.log2(nx)), y).epsilon
                                           == worst.epsilon)
        rows.append(row)
    return rows


def _row_mac(args):
    rows = []
    for m in range(1, args.m + 1):
        forge = test_mac_forgery(m)
        lo, hi = mac_pairwise_range(m)
        rows.append({"m": m, "poly": f"{GF2m(m).poly:#x}", "forgery": f"{float(forge):.12g}",
                     "forgery_exact": str(forge), "bound": f"{2.0 ** -m:.12g}",
                     "pair_min": str(lo), "pair_max": str(hi), "in_force": 1,
                     "holds": int(forge <= Fraction(1, 2**m) and lo == hi == Fraction(1, 4**m))})
    return rows


def _row_renner(args, seed):
    from .qcheck import random_cq_state, verify_renner_ip

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(args.instances):
        r = verify_renner_ip(random_cq_state(args.p**args.n, args.mdim, rng), args.p, args.n)
        rows.append({"instance": i, "lhs": f"{r['lhs']:.12g}", "mid": f"{r['mid']:.12g}",
                     "rhs": f"{r['rhs']:.12g}", "in_force": 1, "holds": int(r["holds"])})
    return rows


def _row_thm31(args, seed):
    from .qcheck import random_thm31_instance, verify_thm31

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(args.instances):
        r = verify_thm31(random_thm31_instance(rng, seed=seed))
        if r["skipped"]:
            log.warning("instance %d skipped: %s", i, r["notice"])
        rows.append({"instance": i, "epsilon": f"{r['epsilon']:.12g}", "pr_ab": f"{r['pr_ab']:.12g}",
                     "lhs": "" if r["lhs"] is None else f"{r['lhs']:.12g}",
                     "rhs": "" if r["rhs"] is None else f"{r['rhs']:.12g}",
                     "in_force": int(not r["skipped"] and r["epsilon"] >= 1e-8), "holds": int(r["holds"])})
    return rows


def write_report(rows: list[dict], meta: dict, fmt: str, out) -> None:
    """First line carries the timestamp; everything after it is reproducible."""
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    meta = dict(meta)
    note = meta.pop("note", None)
    if fmt == "json":
        out.write(json.dumps({"generated": stamp}) + "\n")
        out.write(json.dumps(dict(meta, note=note) if note else meta, sort_keys=True) + "\n")
        for r in rows:
            out.write(json.dumps(r, sort_keys=True) + "\n")
        return
    out.write(f"# generated {stamp}\n")
    out.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
    if note:
        out.write(f"# note: {note}\n")
    if rows:
        keys = list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n", restval="")
        w.writeheader()
        w.writerows(rows)
        out.write(buf.getvalue())


def cmd_verify(args) -> int:
    seed = _seed(args)
    suite = args.suite
    try:
        if suite == "twowise":
            rows = _row_twowise(args)
        elif suite == "ext-sweep":
            rows = ext_sweep(args.p[0], args.n[0], seed=seed)
        elif suite == "nm-sweep":
            rows = nm_sweep(args.p[0], args.n[0], seed=seed)
        elif suite == "mac":
            rows = _row_mac(args)
        elif suite == "renner":
            rows = _row_renner(args, seed)
        else:
            rows = _row_thm31(args, seed)
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return 2
    meta = {"suite": suite, "seed": seed, "profile": args.profile, "version": __version__}
    if suite == "nm-sweep":
        meta["note"] = NM_NOTE
    if args.output:
        with open(args.output, "w") as fh:
            write_report(rows, meta, args.format, fh)
    else:
        write_report(rows, meta, args.format, sys.stdout)
    failed = [r for r in rows if int(r.get("in_force", 1)) and not int(r["holds"])]
    for r in failed:
        print(f"bound violated: {json.dumps(r, sort_keys=True)}", file=sys.stderr)
    if suite == "ext-sweep":
        eps = [Fraction(r["epsilon_exact"]) for r in rows]
        if any(b > a for a, b in zip(eps, eps[1:])):
            print("monotonicity violated: worst error rose with support size", file=sys.stderr)
            return 2
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="extractorlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate one primitive")
    evs = ev.add_subparsers(dest="primitive", required=True, parser_class=_Parser)
    e = evs.add_parser("ip")
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--x", required=True)
    e.add_argument("--y", required=True)
    e = evs.add_parser("nmext")
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--x", required=True)
    e.add_argument("--y", required=True, help="field element coefficients, lowest degree first")
    e = evs.add_parser("mac")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--poly", default="", help="reduction polynomial incl. leading bit, e.g. 0x13")
    e.add_argument("--key", required=True, help="k1,k2 in hex")
    e.add_argument("--msg", required=True)
    e = evs.add_parser("tre")
    e.add_argument("--x", required=True, help="input bit string")
    e.add_argument("--seed", dest="seed_bits", required=True, help="seed bit string of length q^2")
    e.add_argument("--l", type=int, required=True)
    e.add_argument("--t", type=int, required=True)
    ev.set_defaults(func=cmd_eval)

    pa = sub.add_parser("pa", help="run privacy-amplification sessions")
    pa.add_argument("role", choices=["local", "alice", "bob", "mitm"])
    pa.add_argument("--profile", default="desk32")
    pa.add_argument("--profile-dir", default=None)
    pa.add_argument("--sessions", type=int, default=1)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--adv", default="identity")
    pa.add_argument("--listen", default="127.0.0.1:0")
    pa.add_argument("--connect", default="127.0.0.1:7401")
    pa.add_argument("--upstream", default="127.0.0.1:7401")
    pa.add_argument("--output", default=None)
    pa.set_defaults(func=cmd_pa)

    ve = sub.add_parser("verify", help="run a verification suite and write a report")
    ve.add_argument("suite", choices=["twowise", "ext-sweep", "nm-sweep", "mac", "renner", "thm31"])
    ve.add_argument("--p", type=int, nargs="+", default=None)
    ve.add_argument("--n", type=int, nargs="+", default=None)
    ve.add_argument("--m", type=int, default=4)
    ve.add_argument("--instances", type=int, default=100)
    ve.add_argument("--mdim", type=int, default=3, help="side-information dimension for renner")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--profile", default="desk")
    ve.add_argument("--format", choices=["csv", "json"], default="csv")
    ve.add_argument("--output", default=None)
    ve.set_defaults(func=cmd_verify)
    return ap


_DEFAULTS = {
    "twowise": ([3, 5], [1, 2]),
    "ext-sweep": ([3], [2]),
    "nm-sweep": ([3], [2]),
    "renner": ([3], [1]),
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        dp, dn = _DEFAULTS.get(args.suite, ([3], [1]))
        args.p = args.p or dp
        args.n = args.n or dn
        if args.suite == "renner":
            args.p, args.n = args.p[0], args.n[0]
    try:
        return args.func(args)
    except (UsageError, FieldError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
