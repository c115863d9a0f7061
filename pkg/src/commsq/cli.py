"""Command-line front door: `commsq <subcommand> ...`.

Exit codes: 0 success, 1 a verification failed, 2 bad input, 3 structural error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

OUT_ENV = "COMMSQ_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_STRUCT = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- parsing helpers

def parse_range(text: str) -> list[int]:
    """'1..10' or '3' or '1,4,7'."""
    text = text.strip()
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return list(range(lo, hi + 1))
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad range {text!r}") from None


def _ray(text: str):
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return None
    try:
        k = int(t)
    except ValueError:
        raise InputError(f"bad ray length {text!r}") from None
    if k < 1:
        raise InputError("ray lengths must be >= 1")
    return k


def parse_pattern(text: str, j: int) -> tuple:
    """Evaluate a pattern such as 'j,j+1,j+1' at j."""
    out = []
    for term in text.split(","):
        t = term.strip().replace(" ", "")
        m = re.fullmatch(r"j([+-]\d+)?", t)
        if m:
            k = j + int(m.group(1) or 0)
            if k < 1:
                raise InputError(f"pattern term {term!r} is < 1 at j = {j}")
            out.append(k)
        else:
            out.append(_ray(t))
    return tuple(out)


def parse_builtin(name: str):
    """Build (spec, pair) for e10, al:m:l, star3:k:l:m or thoffman:n:horizon."""
    from . import biunitary as bu

    parts = name.strip().split(":")
    try:
        args = [int(p) for p in parts[1:]]
    except ValueError:
        raise InputError(f"bad builtin {name!r}") from None
    kind = parts[0].lower()
    if kind == "e10" and not args:
        return bu.build_e10()
    if kind == "al" and len(args) == 2:
        m, l = args
        if m < 3 or not 1 <= l <= m - 2:
            raise InputError("al:m:l needs m >= 3 and 1 <= l <= m-2")
        return bu.build_al(m, l)
    if kind == "star3" and len(args) == 3:
        if min(args) < 1:
            raise InputError("ray lengths must be >= 1")
        return bu.build_three_star(*args)
    if kind == "thoffman" and len(args) == 2:
        if args[0] not in (2, 3, 4):
            raise InputError("thoffman:n:horizon needs n in 2, 3, 4")
        return bu.build_thoffman(*args)
    raise InputError(f"unknown builtin {name!r}")


def builtin_spec(name: str):
    """Spec only, for checking a pair file against it."""
    from . import biunitary as bu
    from .biunitary.al import al_spec

    parts = name.strip().split(":")
    try:
        args = [int(p) for p in parts[1:]]
    except ValueError:
        raise InputError(f"bad builtin {name!r}") from None
    kind = parts[0].lower()
    if kind == "e10" and not args:
        return bu.e10_spec()
    if kind == "al" and len(args) == 2:
        return al_spec(*args)
    if kind == "star3" and len(args) == 3:
        return bu.star3_spec(tuple(args))
    if kind == "thoffman" and len(args) == 2:
        return bu.thoffman_spec(*args)
    raise InputError(f"unknown builtin {name!r}")


def _num(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _emit(args, text: str, default_name: str):
    if not text.endswith("\n"):
        text += "\n"
    target = args.out
    if target is None and os.environ.get(OUT_ENV):
        target = str(Path(os.environ[OUT_ENV]) / default_name)
    if target is None or target == "-":
        sys.stdout.write(text)
        return
    p = Path(target)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


# ---------------------------------------------------------------- subcommands

def run_table(args) -> int:
    from . import spectral

    fam = args.family
    m = re.fullmatch(r"star(\d*)", fam)
    if not m:
        raise InputError(f"unknown family {fam!r}")
    arity = int(m.group(1)) if m.group(1) else None
    rays_list = []
    if args.pattern:
        if args.j is None:
            raise InputError("--pattern needs --j")
        for j in parse_range(args.j):
            rays_list.append(parse_pattern(args.pattern, j))
    else:
        fix = tuple(_ray(t) for t in args.fix.split(",")) if args.fix else ()
        ks = parse_range(args.k) if args.k else [None]
        ls = parse_range(args.l) if args.l else [None]
        for k in ks:
            for l in ls:
                extra = tuple(v for v in (k, l) if v is not None)
                if any(v < 1 for v in extra):
                    raise InputError("ray lengths must be >= 1")
                rays_list.append(fix + extra)
    rays_list = [r for r in rays_list if r]
    if not rays_list:
        raise InputError("empty window")
    for r in rays_list:
        if arity is not None and len(r) != arity:
            raise InputError(f"{fam} expects {arity} rays, got {len(r)}")
        if len(r) < 2:
            raise InputError("a star needs at least two rays")
    rows = spectral.index_table(rays_list, fam, args.digits)
    if args.format == "json":
        _emit(args, spectral.table_json(rows), f"table_{fam}.json")
    else:
        _emit(args, spectral.table_csv(rows), f"table_{fam}.csv")
    return EXIT_OK


def run_classify(args) -> int:
    from .admissibility import classify_stars

    if args.max_ray < 1:
        raise InputError("--max-ray must be >= 1")
    c = classify_stars(args.max_ray)
    out = {"max_ray": c.max_ray,
           "three_star": [list(r) for r in c.three_star_list],
           "four_star_cond1": [list(r) for r in c.four_star_cond1_list],
           "four_star_cond1_cond2": [list(r) for r in c.four_star_cond12_list]}
    _emit(args, json.dumps(out, sort_keys=True, indent=1), "classify.json")
    return EXIT_OK


def run_verify(args) -> int:
    from .biunitary import pair_from_json, verify_pair

    if args.pair:
        try:
            text = Path(args.pair).read_text()
            data = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read pair file: {exc}") from None
        name = args.builtin or data.get("spec_ref", "")
        s = builtin_spec(name)
        p = pair_from_json(s, text)
    elif args.builtin:
        s, p = parse_builtin(args.builtin)
    else:
        raise InputError("give --builtin or --pair")
    rep = verify_pair(s, p, args.tol)
    _emit(args, rep.to_json(), "verify.json")
    return EXIT_OK if rep.ok else EXIT_FAIL


def run_build(args) -> int:
    from .biunitary import pair_to_json, verify_pair

    s, p = parse_builtin(args.builtin)
    rep = verify_pair(s, p, args.tol)
    _emit(args, pair_to_json(s, p, args.builtin), "pair.json")
    return EXIT_OK if rep.ok else EXIT_FAIL


def run_shearer(args) -> int:
    from . import shearer

    s = shearer.shearer_build(args.lam, args.horizon)
    if args.csv:
        _emit(args, shearer.state_csv(s), "shearer.csv")
        return EXIT_OK
    periods = parse_range(args.scan_period) if args.scan_period else []
    if any(n < 1 for n in periods):
        raise InputError("periods must be >= 1")
    text = shearer.report_json(s, periods)
    _emit(args, text, "shearer.json")
    return EXIT_OK if json.loads(text)["verify"]["pass"] else EXIT_FAIL


def run_hoffman(args) -> int:
    from . import spectral

    if args.n < 2:
        raise InputError("--n must be >= 2")
    h = spectral.hoffman_lambda(args.n)
    out = {"n": h.n, "rho": h.rho, "lambda": h.lam, "index": h.lam ** 2,
           "kn_residual": h.kn_residual, "real_roots": list(h.real_root_census),
           "nonreal_roots": h.nonreal_root_count}
    _emit(args, json.dumps(_num(out), sort_keys=True), f"hoffman_{args.n}.json")
    return EXIT_OK


def run_tower(args) -> int:
    from . import tower
    from .biunitary import validate_spec

    s = builtin_spec(args.builtin)
    if args.depth < 0:
        raise InputError("--depth must be >= 0")
    rep = validate_spec(s)
    out = tower.tower_report(s, args.depth)
    out["spec_valid"] = rep.ok
    _emit(args, tower.report_json(out), "tower.json")
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commsq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output file ('-' for stdout; default from ${OUT_ENV} or stdout)")
        return sp

    t = common(sub.add_parser("table", help="index tables for star families"))
    t.add_argument("--family", required=True, help="star3, star4, ... or star")
    t.add_argument("--fix", help="fixed leading rays, e.g. 1,1")
    t.add_argument("--k", help="range for the first free ray, e.g. 1..10")
    t.add_argument("--l", help="range for the second free ray")
    t.add_argument("--pattern", help="rays as expressions in j, e.g. j,j+1,j+1")
    t.add_argument("--j", help="range for j")
    t.add_argument("--digits", type=int, help="index digits (default 5 for 4-stars, 6 for 3-stars)")
    t.add_argument("--format", choices=("csv", "json"), default="csv")
    t.set_defaults(func=run_table)

    c = common(sub.add_parser("classify", help="admissible 3-stars and 4-stars up to a ray length"))
    c.add_argument("--max-ray", type=int, default=12)
    c.set_defaults(func=run_classify)

    for name, fn, hlp in (("verify", run_verify, "verify a built-in or stored bi-unitary pair"),
                          ("build", run_build, "build a pair and write it as JSON")):
        v = common(sub.add_parser(name, help=hlp))
        v.add_argument("--builtin", help="e10 | al:m:l | star3:k:l:m | thoffman:n:horizon")
        if name == "verify":
            v.add_argument("--pair", help="pair JSON written by `build`")
        v.add_argument("--tol", type=float, default=1e-9)
        v.set_defaults(func=fn)

    sh = common(sub.add_parser("shearer", help="Shearer graph sequences, bounds and periodicity"))
    sh.add_argument("--lambda", dest="lam", type=float, required=True)
    sh.add_argument("--horizon", type=int, default=500)
    sh.add_argument("--scan-period", help="periods to scan, e.g. 1..6")
    sh.add_argument("--csv", action="store_true", help="dump k, n_k, r_k, a_k instead of the report")
    sh.set_defaults(func=run_shearer)

    h = common(sub.add_parser("hoffman", help="PF data of T(1,n,inf)"))
    h.add_argument("--n", type=int, required=True)
    h.set_defaults(func=run_hoffman)

    tw = common(sub.add_parser("tower", help="index, commutant bound and ladder data"))
    tw.add_argument("--builtin", required=True)
    tw.add_argument("--depth", type=int, default=6)
    tw.set_defaults(func=run_tower)
    return p


def main(argv=None) -> int:
    from .biunitary import StructuralError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StructuralError as exc:
        print(f"structural error: {exc}", file=sys.stderr)
        return EXIT_STRUCT
    except (InputError, ValueError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
