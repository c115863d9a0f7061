"""Perron-Frobenius data: closed-form eigen equations and a power-iteration oracle."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
from scipy import sparse

from . import poly
from .graphs import BipartiteGraph, bipartite_blocks, star as star_graph

INF = None  # marker for an infinite ray


@dataclass
class PFData:
    lam: float
    point: poly.PolyPoint
    coords: dict[str, float]
    anchor: str
    residual: float = 0.0
    iterations: int = 0


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (last residual {residual:.3e})")
        self.residual = residual


def _eigen_residual(g: BipartiteGraph, lam: float, coords: dict[str, float]) -> float:
    worst = 0.0
    nb = g.neighbours()
    for v in g.vertices:
        if v in g.boundary:
            continue
        s = sum(m * coords[w] for w, m in nb[v].items())
        worst = max(worst, abs(s - lam * coords[v]))
    return worst


def pf_oracle(g: BipartiteGraph, tol: float = 1e-11, anchor: str | None = None,
              max_iter: int = 1_000_000) -> PFData:
    """Power iteration on G G^t (the even half of Delta^2), all-ones start.

    G G^t has a positive diagonal, so it is primitive and the iteration does
    not oscillate the way plain Delta would on a bipartite graph.
    """
    G = sparse.csr_matrix(bipartite_blocks(g).astype(float))
    M = (G @ G.T).tocsr()
    u = np.ones(M.shape[0])
    u /= np.linalg.norm(u)
    mu = 0.0
    res = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = M @ u
        mu = float(u @ w)
        res = float(np.linalg.norm(w - mu * u))
        nw = np.linalg.norm(w)
        u = w / nw
        if res <= tol * max(1.0, mu):
            break
    else:
        raise ConvergenceError("power iteration did not converge", res)
    lam = math.sqrt(mu)
    odd = (G.T @ u) / lam
    coords = dict(zip(g.even, u.tolist()))
    coords.update(zip(g.odd, odd.tolist()))
    anchor = anchor or g.even[0]
    a = coords[anchor]
    coords = {v: c / a for v, c in coords.items()}
    return PFData(lam, poly.point(lam), coords, anchor, _eigen_residual(g, lam, coords), it)


# ---------------------------------------------------------------- stars

def _ray_term(k, p: poly.PolyPoint) -> float:
    if k is INF or k == math.inf:
        return math.exp(-p.x) if p.x is not None else 1.0
    return poly.r_quotient(k - 1, k, p)


def star_equation(rays, lam: float) -> float:
    """sum_i R_{k_i-1}/R_{k_i} - lambda."""
    p = poly.point(lam)
    return sum(_ray_term(k, p) for k in rays) - lam


def _bisect(f, lo, hi, tol):
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def _is_inf(k) -> bool:
    return k is INF or k == math.inf


def star_lambda(rays, tol: float = 1e-14) -> poly.PolyPoint:
    """Largest root of the star eigenvalue equation.

    Above 2 the left side minus lambda is strictly decreasing, so bisection on
    [2, max(m, 2)] is safe. If there is no root above 2 the finite star is a
    Dynkin diagram and its norm comes from a dense eigensolve; the returned
    point then carries theta instead of x.
    """
    rays = list(rays)
    if len(rays) < 2:
        raise ValueError("a star needs at least two rays")
    m = len(rays)
    lo = 2.0 + 1e-12
    if star_equation(rays, lo) > 0:
        hi = float(max(m, 2)) + 1.0
        lam = _bisect(lambda t: star_equation(rays, t), lo, hi, tol)
        return poly.point(lam)
    if any(_is_inf(k) for k in rays):
        return poly.point(2.0)
    g = star_graph(rays)
    lam = float(np.linalg.eigvalsh(g.adjacency().astype(float))[-1])
    return poly.point(min(lam, 2.0))


def star_pf_coords(rays, p: poly.PolyPoint | None = None, horizon: int | None = None,
                   check: float = 1e-9) -> PFData:
    """Centre 1; vertex at distance d on ray i gets R_{k_i-d}/R_{k_i} (e^{-dx} on an infinite ray)."""
    rays = list(rays)
    if p is None:
        p = star_lambda(rays)
    lam = p.lam
    res = abs(star_equation(rays, lam)) if lam > 2 else 0.0
    if res > check * max(1.0, lam):
        raise ValueError(f"lambda={lam} does not solve the eigenvalue equation (residual {res:.2e})")
    coords = {"c": 1.0}
    for i, k in enumerate(rays, start=1):
        if _is_inf(k):
            if horizon is None:
                raise ValueError("infinite ray needs a horizon")
            for d in range(1, horizon + 1):
                coords[f"r{i}_{d}"] = math.exp(-d * p.x) if p.x is not None else 1.0
        else:
            for d in range(1, k + 1):
                coords[f"r{i}_{d}"] = poly.r_quotient(k - d, k, p)
    if lam <= 2:
        # the trigonometric regime: validate the relation on the finite graph directly
        g = star_graph(rays, horizon)
        res = _eigen_residual(g, lam, coords)
        if res > 1e-8:
            raise ValueError(f"coordinates fail the eigen relation (residual {res:.2e})")
    return PFData(lam, p, coords, "c", res)


# ---------------------------------------------------------------- other families

def kite_equation(k: int, lam: float) -> float:
    # cycle neighbours of k0 carry lam/(lam^2-2), the tail carries R_{k-1}/R_k
    p = poly.point(lam)
    return 2.0 * lam / (lam * lam - 2.0) + poly.r_quotient(k - 1, k, p) - lam


def kite_lambda(k: int, tol: float = 1e-14) -> poly.PolyPoint:
    lam = _bisect(lambda t: kite_equation(k, t), 2.0 + 1e-12, 4.0, tol)
    return poly.point(lam)


def kite_pf_coords(k: int) -> PFData:
    p = kite_lambda(k)
    lam = p.lam
    y = lam / (lam * lam - 2.0)
    coords = {"k0": 1.0, "k1": y, "k3": y, "k2": 2.0 * y / lam}
    for d in range(1, k + 1):
        coords[f"p{d}"] = poly.r_quotient(k - d, k, p)
    return PFData(lam, p, coords, "k0", abs(kite_equation(k, lam)))


def path_pf_coords(m: int) -> PFData:
    """A_m: lambda = 2cos(pi/(m+1)), vertex j carries R_{j-1}(lambda)."""
    th = math.pi / (m + 1)
    lam = 2.0 * math.cos(th)
    p = poly.PolyPoint(lam, theta=th)
    coords = {str(j): math.sin(j * th) / math.sin(th) for j in range(1, m + 1)}
    return PFData(lam, p, coords, "1")


E10_RAYS = (2, 1, 6)
# E10 is the star S(2,1,6) centred at B
E10_NAMES = {"c": "B", "r1_1": "a", "r1_2": "A", "r2_1": "b",
             "r3_1": "c", "r3_2": "C", "r3_3": "d", "r3_4": "D", "r3_5": "e", "r3_6": "E"}


def e10_pf_coords() -> PFData:
    pf = star_pf_coords(E10_RAYS)
    coords = {E10_NAMES[v]: c for v, c in pf.coords.items()}
    return PFData(pf.lam, pf.point, coords, "B", pf.residual)


def hoffman_pf_coords(n: int, horizon: int) -> PFData:
    """T(1,n,inf) as the star S(n,1,inf) centred at vertex n+1."""
    h = hoffman_lambda(n)
    p = poly.point(h.lam)
    pf = star_pf_coords((n, 1, INF), p, horizon=horizon - n - 2, check=1e-8)
    b = n + 1
    coords = {str(b): 1.0}
    for v, c in pf.coords.items():
        if v == "c":
            continue
        ray, d = v[1:].split("_")
        d = int(d)
        label = {"1": b - d, "2": b + 1, "3": b + 1 + d}[ray]
        coords[str(label)] = c
    return PFData(p.lam, p, coords, str(b), pf.residual)


def closed_form_coords(g: BipartiteGraph) -> PFData:
    """Closed-form PF data for a family-built graph."""
    fam = g.family
    kind = fam.get("kind")
    if kind == "star":
        return star_pf_coords([INF if k is None else k for k in fam["rays"]], horizon=fam.get("horizon"))
    if kind == "kite":
        return kite_pf_coords(fam["k"])
    if kind == "path":
        return path_pf_coords(fam["m"])
    if kind == "E10":
        return e10_pf_coords()
    if kind == "hoffman":
        return hoffman_pf_coords(fam["n"], fam["horizon"])
    raise ValueError(f"no closed form for family {kind!r}")


# ---------------------------------------------------------------- Hoffman graphs

@dataclass
class HoffmanRoot:
    n: int
    rho: float
    lam: float
    kn_residual: float
    real_root_census: list[float]
    nonreal_root_count: int
    nonreal_numpy: int = field(default=0, repr=False)


def phi(n: int, rho: float) -> float:
    return rho ** (n + 1) - sum(rho ** i for i in range(n))


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _padd(a, b, sign=1):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] += sign * y
    return out


def kn_coeffs(n: int) -> list[int]:
    """K_n = (R_{n+3} - R_{n+1} - R_{n-1}) R_{n-1} - 1, lowest degree first."""
    inner = _padd(_padd(poly.r_coeffs(n + 3), poly.r_coeffs(n + 1), -1), poly.r_coeffs(n - 1), -1)
    out = _pmul(inner, poly.r_coeffs(n - 1))
    out[0] -= 1
    while out and out[-1] == 0:
        out.pop()
    return out


def kn_eval(n: int, lam: float) -> float:
    p = poly.point(lam)
    R = [poly.r_eval(i, p) for i in range(n + 4)]
    return (R[n + 3] - R[n + 1] - R[n - 1]) * R[n - 1] - 1.0


def _horner(c, t):
    acc = 0.0
    for a in reversed(c):
        acc = acc * t + a
    return acc


def real_root_census(coeffs, grid: int = 200_001) -> tuple[list[float], int]:
    """Real roots by sign-change scan inside a root bound, plus exact zero roots.

    Returns the roots (each listed once) and the number of real roots counted
    with multiplicity, assuming the nonzero roots are simple.
    """
    c = [int(a) for a in coeffs]
    z = 0
    while c[z] == 0:
        z += 1
    c = c[z:]
    # Fujiwara's bound; the Cauchy bound overflows polyval for large n
    deg = len(c) - 1
    bound = 2.0 * max((abs(c[deg - k] / c[-1]) ** (1.0 / k) for k in range(1, deg + 1)), default=0.5)
    ts = np.linspace(-bound, bound, grid)
    vals = np.polynomial.polynomial.polyval(ts, np.array(c, dtype=float))
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        f = lambda t: _horner(c, t)
        roots.append(float(_bisect(f, ts[i], ts[i + 1], 1e-15)))
    count = len(roots) + z
    if z:
        roots.append(0.0)
    return sorted(roots), count


def hoffman_lambda(n: int, tol: float = 1e-15) -> HoffmanRoot:
    if n < 2:
        raise ValueError("n must be >= 2")
    rho = _bisect(lambda r: phi(n, r), 1.0 + 1e-12, 2.0, tol)
    lam = math.sqrt(rho) + 1.0 / math.sqrt(rho)
    c = kn_coeffs(n)
    roots, count = real_root_census(c)
    deg = len(c) - 1
    nr = np.roots(np.array(c[::-1], dtype=float))
    nonreal_np = int(np.sum(np.abs(nr.imag) > 1e-6))
    return HoffmanRoot(n, rho, lam, abs(kn_eval(n, lam)), roots, deg - count, nonreal_np)


# ---------------------------------------------------------------- index tables

@dataclass
class IndexTableRow:
    family: str
    params: tuple
    lam: float
    index: float
    flags: str = ""
    digits: int = 5

    def index_str(self) -> str:
        return round_half_away(self.index, self.digits)


def round_half_away(v: float, digits: int) -> str:
    q = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(v)).quantize(q, rounding=ROUND_HALF_UP))


def _fmt_param(k) -> str:
    return "inf" if _is_inf(k) else str(k)


def index_table(rays_list, family: str = "star", digits: int | None = None,
                tol: float = 1e-14) -> list[IndexTableRow]:
    """One row per star; 4-stars get '*' when both admissibility conditions hold."""
    from . import admissibility

    rows = []
    for rays in rays_list:
        rays = tuple(rays)
        p = star_lambda(rays, tol)
        lam = p.lam
        d = digits if digits is not None else (6 if len(rays) == 3 else 5)
        flags = []
        if lam <= 2.0:
            flags.append("le2")
        elif len(rays) == 4 and not any(_is_inf(k) for k in rays):
            fs = admissibility.four_star_conditions(admissibility.FourStarData.from_star(rays, p))
            if fs.cond1 and fs.cond2:
                flags.append("*")
            elif fs.cond1:
                flags.append("cond1")
        rows.append(IndexTableRow(family, rays, lam, lam * lam, ";".join(flags), d))
    return rows


def table_csv(rows: list[IndexTableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "params", "lambda", "index", "flags"])
    for r in rows:
        w.writerow([r.family, " ".join(_fmt_param(k) for k in r.params),
                    f"{r.lam:.12f}", r.index_str(), r.flags])
    return buf.getvalue()


def table_json(rows: list[IndexTableRow]) -> str:
    data = [{"family": r.family, "params": [_fmt_param(k) for k in r.params],
             "lambda": float(f"{r.lam:.12g}"), "index": r.index_str(), "flags": r.flags}
            for r in rows]
    return json.dumps(data, indent=1, sort_keys=True)
