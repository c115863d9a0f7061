"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines are printed in the terminal summary) or directly
with `python3 tests/test_acceptance.py`.
"""
import csv
import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from commsq import admissibility as ad
from commsq import biunitary as bu
from commsq import graphs, shearer, spectral, tower
from commsq.biunitary.al import al_spec

DATA = Path(__file__).parent / "data"
RESULTS = {}


def _csv(name):
    with open(DATA / name, newline="") as fh:
        return list(csv.DictReader(fh))


def _ray(text):
    return None if text == "inf" else int(text)


def record(n, title, ok, detail):
    RESULTS[n] = (ok, f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    return ok


# ---------------------------------------------------------------- 1

def check_1():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for g in _csv("star4_11kl.csv"):
        rays = (1, 1, int(g["k"]), _ray(g["l"]))
        idx = spectral.star_lambda(rays).lam ** 2
        err = abs(idx - float(g["index"]))
        worst = max(worst, err)
        if err > 5e-5:
            bad.append(rays)
    limit = spectral.star_lambda((1, 1, None, None)).lam ** 2
    lim_err = abs(limit - (2 + 2 * math.sqrt(2)))
    lim_printed = abs(limit - 4.82843)
    dt = time.perf_counter() - t0
    ok = not bad and lim_err <= 5e-5 and lim_printed <= 5e-5 and dt < 5
    return record(1, "S(1,1,k,l) table", ok,
                  f"worst |diff| {worst:.2e} (tol 5e-5), off-table {bad}, limit 2+2sqrt2 diff {lim_err:.1e}, {dt:.2f}s (< 5s)")


# ---------------------------------------------------------------- 2

def check_2():
    t0 = time.perf_counter()
    cases = []
    fam = {"j_j1_j1": (0, 1, 1), "j_j1_j2": (0, 1, 2), "j_j1_j3": (0, 1, 3), "j_j2_j2": (0, 2, 2)}
    for g in _csv("star3_families.csv"):
        j = int(g["j"])
        for col, off in fam.items():
            cases.append((tuple(j + o for o in off), float(g[col])))
    for g in _csv("star3_jj_inf.csv"):
        j = int(g["j"])
        cases.append(((j, j, None), float(g["j_j_inf"])))
    for g in _csv("star3_jjl.csv"):
        l = int(g["l"])
        for col, val in g.items():
            if col.startswith("j") and val:
                j = int(col[1:])
                cases.append(((j, j, j + l), float(val)))
    worst, bad = 0.0, []
    for rays, want in cases:
        err = abs(spectral.star_lambda(rays).lam ** 2 - want)
        worst = max(worst, err)
        if err > 5e-6:
            bad.append(rays)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    return record(2, "3-star tables", ok,
                  f"{len(cases)} entries, worst |diff| {worst:.2e} (tol 5e-6), off-table {bad[:5]}, {dt:.2f}s (< 10s)")


# ---------------------------------------------------------------- 3

def fam4_cond1(r):
    a, b, c, d = r
    if a == b:
        return True
    if b == c == a + 1:
        return d >= a + 1
    if (b, c) == (a + 1, a + 2):
        return 2 <= d - a <= 4
    return b == c == d == a + 2


def fam4_cond12(r):
    a, b, c, d = r
    if a == b and c == d:
        return True
    if b == c == a + 1 and 1 <= d - a <= 3:
        return True
    if r == (1, 2, 2, 5):
        return True
    if (b, c) == (a + 1, a + 2):
        return 2 <= d - a <= 4
    return b == c == d == a + 2


def fam3(r):
    a, b, c = r
    if a >= 2 and a == b:
        return True
    if a >= 2 and (b, c) in ((a + 1, a + 1), (a + 1, a + 2), (a + 1, a + 3)):
        return True
    return b == c == a + 2


def check_3():
    n = 12
    c = ad.classify_stars(n)
    above = lambda r: spectral.star_lambda(r).lam > 2
    diffs = {}
    for name, got, member, arity in (("3-star", c.three_star_list, fam3, 3),
                                     ("cond1", c.four_star_cond1_list, fam4_cond1, 4),
                                     ("cond1&2", c.four_star_cond12_list, fam4_cond12, 4)):
        want = {r for r in itertools.combinations_with_replacement(range(1, n + 1), arity)
                if member(r) and above(r)}
        got = set(got)
        diffs[name] = (len(got), sorted(got - want), sorted(want - got))
    d = ad.FourStarData.from_star((1, 2, 2, 5))
    slack = ad.four_star_conditions(d).slack2
    cubic = d.lam ** 3 - 4 * d.lam - 2
    ok = all(not x and not y for _, x, y in diffs.values()) and abs(slack) <= 1e-9 and abs(cubic) <= 1e-9
    summary = ", ".join(f"{k} {v[0]} (extra {v[1][:3]}, missing {v[2][:3]})" for k, v in diffs.items())
    return record(3, "classification", ok, f"{summary}; S(1,2,2,5) slack {slack:.1e}, cubic {cubic:.1e}")


# ---------------------------------------------------------------- 4

def check_4():
    builds = [("e10", bu.build_e10)]
    builds += [(f"al:{m}:{l}", (lambda m=m, l=l: bu.build_al(m, l)))
               for m in range(4, 14) for l in range(1, m - 1)]
    three = set(ad.classify_stars(6).three_star_list)
    three |= {r for r in itertools.combinations_with_replacement(range(1, 7), 3)
              if spectral.star_lambda(r).lam <= 2}
    builds += [(f"star3:{r}", (lambda r=r: bu.build_three_star(*r))) for r in sorted(three)]
    builds += [(f"thoffman:{n}", (lambda n=n: bu.build_thoffman(n, 40))) for n in (2, 3, 4)]
    failed, worst = [], 0.0
    for name, fn in builds:
        try:
            s, p = fn()
            rep = bu.verify_pair(s, p, 1e-9)
        except Exception as exc:  # a crash counts as a failure of that build
            failed.append(f"{name} ({type(exc).__name__})")
            continue
        worst = max(worst, rep.worst)
        if not rep.ok:
            failed.append(name)
    idx = tower.subfactor_index(bu.e10_spec())
    ok = not failed and abs(idx - 4.026418) <= 5e-6
    return record(4, "construction verification", ok,
                  f"{len(builds)} pairs, worst residual {worst:.1e} (tol 1e-9), failed {failed}, E10 index {idx:.7f}")


# ---------------------------------------------------------------- 5

def check_5():
    rng = np.random.default_rng(20240917)
    mism, errors, counts = [], [], {"c12": 0, "c1": 0, "none": 0}
    for i in range(500):
        d = ad.random_four_star(rng)
        try:
            c = ad.four_star_conditions(d)
            sc = bool(ad.four_star_unitary(d, "scalar"))
            bl = bool(ad.four_star_unitary(d, "block"))
        except Exception as exc:
            errors.append((i, type(exc).__name__))
            continue
        counts["c12" if c.cond1 and c.cond2 else "c1" if c.cond1 else "none"] += 1
        if sc != (c.cond1 and c.cond2) or bl != c.cond1:
            mism.append(i)
    lam = 2.05
    lo, hi = 1 / lam, (lam - math.sqrt(lam * lam - 4)) / 2
    grid = np.linspace(lo, hi, 50)
    gmism, gerr, split = [], [], {True: 0, False: 0}
    for a1, a2 in itertools.product(grid, grid):
        a3 = lam - a1 - a2
        t = ad.ThreeStarData((a1, a2, a3))
        try:
            r = ad.nine_vectors(t)
        except Exception as exc:
            gerr.append(type(exc).__name__)
            continue
        i_ok = min(lam * a - 1 for a in (a1, a2, a3)) >= -ad.BOUNDARY
        ii_ok = min(a * a - lam * a + 1 for a in (a1, a2, a3)) >= -ad.BOUNDARY
        iii = 4 * lam * a1 * a2 * a3 - 4 * (a1 * a2 + a1 * a3 + a2 * a3) + 3
        if i_ok and ii_ok:
            split[iii >= 0] += 1
            if bool(r) != (iii >= 0):
                gmism.append((a1, a2))
        elif r:
            gmism.append((a1, a2))
    ok = not mism and not errors and not gmism and not gerr
    return record(5, "feasibility predicates", ok,
                  f"4-stars {counts}, mismatches {len(mism)}, exceptions {len(errors)}; "
                  f"grid (iii)>=0/<0 = {split[True]}/{split[False]}, mismatches {len(gmism)}, exceptions {len(gerr)}")


# ---------------------------------------------------------------- 6

def check_6():
    want = {2: (1.32472, 2.01980), 3: (1.46557, 2.03664), 4: (None, 2.04597)}
    devs = []
    for n, (rho, lam) in want.items():
        h = spectral.hoffman_lambda(n)
        if rho is not None:
            devs.append(abs(h.rho - rho))
        devs.append(abs(h.lam - lam))
    kres = max(abs(spectral.kn_eval(n, spectral.hoffman_lambda(n).lam)) for n in range(2, 21))
    census_bad = []
    for n in range(2, 11):
        h = spectral.hoffman_lambda(n)
        expect = sorted([-h.lam, h.lam] + ([0.0] if n % 2 else []))
        got = h.real_root_census
        if len(got) != len(expect) or max(abs(a - b) for a, b in zip(got, expect)) > 1e-9:
            census_bad.append(n)
    first = bu.t14_attempts()["S6"].feasibility
    t14 = (not first.feasible and abs(first.diff - 0.83234) <= 5e-5 and abs(first.ac - 0.67895) <= 5e-5
           and first.diff > first.ac)
    ok = max(devs) <= 5e-5 and kres <= 1e-8 and not census_bad and t14
    return record(6, "Hoffman numerics", ok,
                  f"max rho/lambda dev {max(devs):.1e}, max |K_n(lambda_n)| {kres:.1e}, census failures {census_bad}, "
                  f"T14 |b^2-d^2| {first.diff:.5f} > ac {first.ac:.5f}")


# ---------------------------------------------------------------- 7

def check_7():
    notes, ok = [], True
    for lam in (2.06, 2.1, 2.2):
        s = shearer.shearer_build(lam, 500)
        v = shearer.shearer_verify(s)
        t = shearer.shearer_tail(s)
        lams = [spectral.pf_oracle(graphs.shearer_graph(lam, h), tol=1e-13).lam for h in (50, 100, 200)]
        mono = lams[0] <= lams[1] <= lams[2] <= lam
        good = v.ok and t.partial_sum <= t.tail_bound and t.decay_ok and mono
        ok &= good
        notes.append(f"{lam}: inv {v.ok}, sum {t.partial_sum:.4f} <= {t.tail_bound:.4f}, "
                     f"oracle {lams[0]:.6f}/{lams[1]:.6f}/{lams[2]:.6f}")
    return record(7, "Shearer properties", ok, "; ".join(notes))


# ---------------------------------------------------------------- 8

def matrix_power_dims(G, depth):
    G = np.array(G.tolist(), dtype=object)
    GG = G.dot(G.T)
    out = []
    for n in range(depth + 1):
        P = np.identity(G.shape[0], dtype=object)
        for _ in range(n // 2):
            P = P.dot(GG)
        v = P.dot(np.array([1] * G.shape[0], dtype=object))
        if n % 2:
            v = G.T.dot(v)
        out.append([int(x) for x in v])
    return out


def check_8():
    specs = [bu.e10_spec(), al_spec(9, 4), bu.star3_spec((2, 3, 3)), bu.thoffman_spec(2, 40)]
    dims_bad = []
    for s in specs:
        got = [t.a_dims for t in tower.extend_ladder(s, 30)]
        if got != matrix_power_dims(s.G, 30):
            dims_bad.append(s.name)
    prof = tower.convergence_profile(graphs.path(5), 40)
    s = bu.e10_spec()
    cb, irr = tower.commutant_bound(s), tower.irreducibility_flag(s)
    ok = not dims_bad and prof[40] <= 1e-6 and cb == 1 and irr
    return record(8, "tower properties", ok,
                  f"dims mismatches {dims_bad} over {len(specs)} specs to depth 30, A_5 profile(40) {prof[40]:.1e}, "
                  f"E10 bound {cb}, irreducible {irr}")


# ---------------------------------------------------------------- 9

def finite_instances():
    yield from (graphs.path(m) for m in range(2, 61))
    yield from (graphs.kite(k) for k in range(1, 57))
    yield graphs.e10()
    for arity, top in ((3, 10), (4, 7), (5, 4)):
        for rays in itertools.combinations_with_replacement(range(1, top + 1), arity):
            yield graphs.star(rays)


def check_9():
    worst, count, bad = 0.0, 0, []
    for g in finite_instances():
        assert len(g.vertices) <= 60
        cf = spectral.closed_form_coords(g)
        orc = spectral.pf_oracle(g, tol=1e-13, anchor=cf.anchor)
        d = max([abs(cf.lam - orc.lam)] + [abs(c - orc.coords[v]) for v, c in cf.coords.items()])
        worst = max(worst, d)
        count += 1
        if d > 1e-7:
            bad.append(g.family)
    return record(9, "closed form vs power iteration", not bad,
                  f"{count} instances, worst diff {worst:.1e} (tol 1e-7), failures {bad[:3]}")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(check):
    assert check(), RESULTS[int(check.__name__.split("_")[1])][1]


if __name__ == "__main__":
    for c in CHECKS:
        c()
        print(RESULTS[int(c.__name__.split("_")[1])][1], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
