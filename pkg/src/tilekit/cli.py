"""Command line front end: ``tilekit <verb> ...``.

Exit codes: 0 success, 1 the checked property fails, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import boxes, cuboids, cyclotomic as cy, fibers, reductions, saturation, search
from .multiset import Multiset, from_set
from .tiling import (
    VerificationError,
    divisor_set,
    make_pair,
    replacement_check,
    standard_complement,
    standard_divisors,
    verify,
)
from .zmod import as_modulus


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def _load_set(path) -> Multiset:
    obj = _load(path)
    try:
        return Multiset.from_json(obj)
    except (ValueError, TypeError, KeyError) as e:
        raise UsageError(f"{path}: {e}") from e


def _load_pair(args):
    """(A, B) from --pair, or from --a/--b."""
    if getattr(args, "pair", None):
        obj = _load(args.pair)
        try:
            M = int(obj["modulus"])
            return from_set(obj["a"], M), from_set(obj["b"], M)
        except (ValueError, TypeError, KeyError) as e:
            raise UsageError(f"{args.pair}: {e}") from e
    if getattr(args, "a", None) and getattr(args, "b", None):
        A, B = _load_set(args.a), _load_set(args.b)
        if A.M != B.M:
            raise UsageError(f"modulus mismatch: {A.M} vs {B.M}")
        return A, B
    raise UsageError("give --pair FILE or both --a FILE and --b FILE")


def _tiling(args):
    A, B = _load_pair(args)
    try:
        return make_pair(A, B)
    except VerificationError as e:
        raise UsageError(f"input is not a tiling: {e}") from e


def _set_arg(args) -> Multiset:
    if getattr(args, "set", None):
        return _load_set(args.set)
    raise UsageError("give --set FILE")


def _mod_echo(M: int) -> dict:
    m = as_modulus(M)
    return {"value": m.value, "factored": " * ".join(f"{p}^{n}" if n > 1 else str(p) for p, n in m.primes)}


# ---------------------------------------------------------------------------
# verbs: each returns (payload dict, ok flag)


def cmd_verify(args):
    A, B = _load_pair(args)
    rep = verify(A, B)
    out = rep.to_json()
    out["modulus"] = _mod_echo(A.M)
    return out, rep.tiles


def cmd_analyze(args):
    A = _set_arg(args)
    prof = cy.profile(A)
    out = {
        "modulus": _mod_echo(A.M),
        "size": A.total,
        "S_A": sorted(prof.sa),
        "T1": cy.t1_check(A, prof.sa),
        "T2": cy.t2_check(A),
        "T2_failures": cy.t2_failures(A)[:10],
        "divisors": sorted(divisor_set(A).values),
        "cyclotomic_divisors": sorted(prof.full),
        "fibered": {
            str(i): [N for N in A.modulus.divisors() if N % p == 0 and fibers.is_fibered(A, i, N)]
            for i, (p, _) in enumerate(A.modulus.primes)
        },
    }
    return out, True


def cmd_standard(args):
    A = _set_arg(args)
    flat = standard_complement(A)
    out = {
        "modulus": _mod_echo(A.M),
        "flat": list(flat.support),
        "flat_divisors": sorted(standard_divisors(A).values),
        "flat_T2": cy.t2_check(flat),
    }
    ok = True
    if args.b:
        B = _load_set(args.b)
        pair = make_pair(A, B)
        rec = replacement_check(pair)
        out["replacement"] = {"div_exclusion": rec.div_exclusion, "flat_tiles": rec.flat_tiles, "B_T2": rec.b_t2}
        ok = rec.agree
    return out, ok


def cmd_boxes(args):
    A, B = _load_pair(args)
    pair = make_pair(A, B)
    M = pair.M
    scales = [args.scale] if args.scale else as_modulus(M).divisors()
    out = {"modulus": _mod_echo(M), "scales": {}}
    ok = True
    for N in scales:
        if M % N:
            raise UsageError(f"{N} does not divide {M}")
        good = boxes.ortho_all(pair, N)
        ok &= good
        out["scales"][str(N)] = good
    if args.x is not None:
        N = args.scale or M
        out["box_A"] = boxes.nbox(pair.a, N, args.x).as_dict()
        out["box_B"] = boxes.nbox(pair.b, N, args.x).as_dict()
    return out, ok


def cmd_saturate(args):
    pair = _tiling(args)
    sat = saturation.saturating_set(pair, args.x)
    out = sat.to_json()
    out["bispan_bound"] = saturation.bispan_bound_check(pair, args.x)
    if args.y is not None:
        out["A_xy"] = list(saturation.saturating_pairs(pair.a, pair.b, args.x, args.y))
        out["B_yx"] = list(saturation.saturating_pairs(pair.b, pair.a, args.y, args.x))
    out["exclusion_scan"] = [list(t) for t in saturation.exclusion_scan(pair)]
    mj = saturation.missing_joint_scan(pair)
    out["missing_joints"] = "hypothesis unmet, skipped" if mj is None else mj
    return out, out["bispan_bound"] and not out["exclusion_scan"] and not mj


def cmd_cuboid(args):
    A = _set_arg(args)
    if args.preset:
        if args.direction is None:
            raise UsageError("--preset needs --direction")
        ok = cuboids.preset_null_check(A, args.preset, args.direction, args.alpha)
        return {"preset": args.preset, "consistent": ok}, ok
    N = args.scale or A.M
    if A.M % N:
        raise UsageError(f"{N} does not divide {A.M}")
    ctype = cuboids.classic_type(A.M, N)
    null = cuboids.is_null(A, ctype, method="enumerate")
    div = cy.divides(N, A) if N > 1 else A.total == 0
    bad = cuboids.null_violations(A, ctype, limit=1)
    out = {"scale": N, "null": null, "phi_divides": div}
    if bad:
        cub, val = bad[0]
        out["witness"] = {"corner": cub.c, "offsets": {str(k): v for k, v in cub.d.items()}, "value": val}
    return out, null == div


def cmd_fibers(args):
    if args.depth:
        pair = _tiling(args)
        found = fibers.all_cofibered(pair, args.direction, args.depth, cofiber_limit=args.limit)
        return {"structures": [s.to_json() for s in found]}, bool(found)
    A = _set_arg(args)
    dec = fibers.detect_fibered(A, args.direction, args.scale)
    if dec is None:
        return {"fibered": False}, False
    return {"fibered": True, "scale": dec.N, "roots": list(dec.roots), "multiplicity": dec.multiplicity}, True


def cmd_shift(args):
    pair = _tiling(args)
    st = fibers.find_cofibered(pair, args.direction, args.depth)
    if st is None:
        return {"structure": None}, False
    F = st.cofibers[min(args.chain, len(st.cofibers) - 1)]
    beta = args.beta if args.beta is not None else max(st.pb)
    res = fibers.fiber_shift(pair, st, F, beta, args.k)
    out = {
        "structure": st.to_json(),
        "chain": list(F.elements),
        "shifted": list(res.shifted),
        "tiles": res.tiles,
        "t2_before": res.t2_before,
        "t2_after": res.t2_after,
    }
    if res.pair is not None:
        out["a"] = list(res.pair.a.support)
    return out, res.tiles and res.t2_preserved


def cmd_szabo(args):
    p1, p2, p3 = args.primes
    pair = fibers.szabo_construct(p1, p2, p3)
    m = pair.modulus
    subgroup = {str(p): any(all(a % p == 0 for a in X.support) for X in (pair.a, pair.b)) for p, _ in m.primes}
    out = {
        "modulus": _mod_echo(m.value),
        "sizes": [pair.a.total, pair.b.total],
        "in_subgroup": subgroup,
        "T2": [cy.t2_check(pair.a), cy.t2_check(pair.b)],
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(pair.to_json(), fh)
    else:
        out["pair"] = pair.to_json()
    return out, not any(subgroup.values()) and all(out["T2"])


def cmd_reduce(args):
    pair = _tiling(args)
    tr = reductions.t2_induction_driver(pair, args.strategy)
    return tr.to_json(), not tr.stuck and tr.consistent


def cmd_search(args):
    A = _set_arg(args)
    try:
        comps = search.enumerate_complements(A, budget=args.budget, limit=args.limit)
    except search.BudgetExceeded as e:
        return {"error": str(e)}, False
    return {"modulus": _mod_echo(A.M), "count": len(comps), "complements": [list(B.support) for B in comps]}, bool(comps)


def cmd_corpus(args):
    if args.load:
        C = search.Corpus.load(args.load, reverify=True)
        return {"moduli": list(C.moduli), "pairs": len(C)}, True
    moduli = tuple(args.moduli) if args.moduli else search.DEFAULT_MODULI + (search.STRETCH_MODULI if args.stretch else ())
    C = search.build_corpus(moduli, threads=args.threads)
    if args.out:
        C.dump(args.out)
    return {"moduli": list(C.moduli), "pairs": {str(M): len(C.pairs.get(M, [])) for M in C.moduli}, "meta": {str(k): v for k, v in C.meta.items()}}, True


def cmd_conjecture(args):
    C = search.Corpus.load(args.corpus) if args.corpus else search.build_corpus(threads=args.threads)
    try:
        rep = search.conjecture_harness(C, args.id)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from e
    return rep.to_json(), rep.ok


VERBS = {
    "verify": cmd_verify,
    "analyze": cmd_analyze,
    "standard": cmd_standard,
    "boxes": cmd_boxes,
    "saturate": cmd_saturate,
    "cuboid": cmd_cuboid,
    "fibers": cmd_fibers,
    "shift": cmd_shift,
    "szabo": cmd_szabo,
    "reduce": cmd_reduce,
    "search": cmd_search,
    "corpus": cmd_corpus,
    "conjecture": cmd_conjecture,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tilekit", description="Analyse tilings A + B = Z_M.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine readable output")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: TILEKIT_THREADS or 1)")
    sub = ap.add_subparsers(dest="verb", required=True)

    def pair_args(p):
        p.add_argument("--pair")
        p.add_argument("--a")
        p.add_argument("--b")

    p = sub.add_parser("verify", parents=[common], help="decide whether A + B = Z_M")
    pair_args(p)
    p = sub.add_parser("analyze", parents=[common], help="cyclotomic profile, T1/T2, divisors")
    p.add_argument("--set", required=True)
    p = sub.add_parser("standard", parents=[common], help="standard complement and replacement check")
    p.add_argument("--set", required=True)
    p.add_argument("--b")
    p = sub.add_parser("boxes", parents=[common], help="box products on every scale")
    pair_args(p)
    p.add_argument("--scale", type=int)
    p.add_argument("--x", type=int)
    p = sub.add_parser("saturate", parents=[common], help="saturating sets and exclusion scans")
    pair_args(p)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int)
    p = sub.add_parser("cuboid", parents=[common], help="cuboid nullity versus divisibility")
    p.add_argument("--set", required=True)
    p.add_argument("--scale", type=int)
    p.add_argument("--preset", choices=cuboids.PRESETS)
    p.add_argument("--direction", type=int)
    p.add_argument("--alpha", type=int)
    p = sub.add_parser("fibers", parents=[common], help="fibering and cofibered structures")
    pair_args(p)
    p.add_argument("--set")
    p.add_argument("--direction", type=int, required=True)
    p.add_argument("--scale", type=int)
    p.add_argument("--depth", type=int, help="look for cofibered structures of this depth (needs a pair)")
    p.add_argument("--limit", type=int, default=32)
    p = sub.add_parser("shift", parents=[common], help="shift one cofiber and re-verify")
    pair_args(p)
    p.add_argument("--direction", type=int, required=True)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--beta", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--chain", type=int, default=0)
    p = sub.add_parser("szabo", parents=[common], help="Szabo-type tiling for three primes")
    p.add_argument("--primes", type=int, nargs=3, default=[3, 5, 7])
    p.add_argument("--out")
    p = sub.add_parser("reduce", parents=[common], help="reduction trace down to base cases")
    pair_args(p)
    p.add_argument("--strategy", default="auto")
    p = sub.add_parser("search", parents=[common], help="all complements of a set")
    p.add_argument("--set", required=True)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--limit", type=int)
    p = sub.add_parser("corpus", parents=[common], help="build or re-verify a tiling corpus")
    p.add_argument("--moduli", type=int, nargs="*")
    p.add_argument("--stretch", action="store_true")
    p.add_argument("--out")
    p.add_argument("--load")
    p = sub.add_parser("conjecture", parents=[common], help="run a conjecture harness")
    p.add_argument("--id", required=True)
    p.add_argument("--corpus")
    return ap


def _render(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict) and v and len(json.dumps(v)) > 70:
            lines.append(f"{pad}{k}:")
            lines.append(_render(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
    return "\n".join(lines)


def run(argv=None) -> tuple[dict, int]:
    """Parse, dispatch and build the report; never exits."""
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return {"error": "usage"}, 2 if e.code else 0
    if args.threads is not None:
        os.environ["TILEKIT_THREADS"] = str(args.threads)
    t0 = time.perf_counter()
    try:
        payload, ok = VERBS[args.verb](args)
        code = 0 if ok else 1
    except UsageError as e:
        payload, code = {"error": str(e)}, 2
    except (ValueError, KeyError) as e:
        payload, code = {"error": f"{type(e).__name__}: {e}"}, 2
    report = {
        "command": list(argv) if argv is not None else sys.argv[1:],
        "result": payload,
        "elapsed": round(time.perf_counter() - t0, 4),
        "exit": code,
    }
    report["_json"] = args.json
    return report, code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    report, code = run(argv)
    as_json = report.pop("_json", False)
    if "result" in report:
        if as_json:
            print(json.dumps(report, sort_keys=True))
        else:
            print(_render(report["result"]))
            if code == 1:
                print("property check FAILED")
    return code


if __name__ == "__main__":
    sys.exit(main())
