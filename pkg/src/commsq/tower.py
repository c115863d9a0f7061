"""The ladder of a symmetric commuting square and its computable consequences."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .biunitary.core import SquareSpec
from .graphs import BipartiteGraph, bipartite_blocks


class SpecInconsistency(ValueError):
    """The square spec contradicts itself (for instance ||H|| != ||K||)."""


class DivergenceError(RuntimeError):
    """A convergence profile failed to decrease after burn-in."""


@dataclass
class TowerState:
    level: int
    a_dims: list  # bottom row, python ints
    b_dims: list  # top row
    a_trace: np.ndarray
    b_trace: np.ndarray
    parity: str  # inclusion used to reach the next level: "G/L" or "Gt/Lt"
    extension_residual: float = 0.0

    @property
    def trace_mass(self) -> float:
        return float(sum(d * t for d, t in zip(self.a_dims, self.a_trace)))

    @property
    def top_trace_mass(self) -> float:
        return float(sum(d * t for d, t in zip(self.b_dims, self.b_trace)))


def _apply(M: np.ndarray, v: list, transpose: bool) -> list:
    """Exact integer product: M^t v when transpose, else M v."""
    M = M.T if transpose else M
    out = []
    for row in M:
        out.append(sum(int(m) * x for m, x in zip(row, v) if m))
    return out


def _trusted(s: SquareSpec, side: str) -> np.ndarray:
    labels = getattr(s, side)
    return np.array([not s.is_untrusted(side, v) for v in labels], dtype=bool)


def markov_modulus(s: SquareSpec) -> float:
    """mu with G^t alpha = mu beta, read off the trusted coordinates."""
    lhs = s.G.T @ s.alpha
    ok = _trusted(s, "B") & (s.beta > 0)
    return float(np.median(lhs[ok] / s.beta[ok]))


def extend_ladder(s: SquareSpec, depth: int) -> list[TowerState]:
    """Levels 0..depth of  A_0 <_G A_1 <_Gt A_2 ...  under  C_0 <_L C_1 <_Lt C_2 ...

    A_0 starts with every summand of dimension one and the top row is its
    image under K. Traces are the square spec's weights, divided by the Markov
    modulus every second level, so the trace of the identity stays fixed.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    mu = markov_modulus(s)
    a = [1] * len(s.A)
    b = _apply(s.K, a, transpose=True)
    out = []
    ta, tb = [s.alpha, s.beta], [s.gamma, s.delta]
    tr_rows = [_trusted(s, "A"), _trusted(s, "B")]
    for n in range(depth + 1):
        scale = mu ** -(n // 2)
        at, bt = ta[n % 2] * scale, tb[n % 2] * scale
        nxt_a = ta[(n + 1) % 2] * mu ** -((n + 1) // 2)
        # alpha_n = M alpha_{n+1} for the inclusion M leading to the next level
        M = s.G if n % 2 == 0 else s.G.T
        lhs = M @ nxt_a
        ok = tr_rows[n % 2]
        res = float(np.abs(lhs - at)[ok].max(initial=0.0) / max(at[ok].max(initial=1.0), 1e-300))
        out.append(TowerState(n, a, b, at, bt, "G/L" if n % 2 == 0 else "Gt/Lt", res))
        a = _apply(s.G, a, transpose=(n % 2 == 0))
        b = _apply(s.L, b, transpose=(n % 2 == 0))
    return out


def _pf_sq(M: np.ndarray, tol: float = 1e-14, max_iter: int = 200_000) -> float:
    """Largest eigenvalue of M^t M by power iteration."""
    M = np.asarray(M, dtype=float)
    P = M.T @ M
    u = np.ones(P.shape[0]) / math.sqrt(P.shape[0])
    mu = 0.0
    for _ in range(max_iter):
        w = P @ u
        new = float(u @ w)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        u = w / nw
        if abs(new - mu) <= tol * max(1.0, new):
            return new
        mu = new
    return mu


def subfactor_index(s: SquareSpec, tol: float = 1e-6) -> float:
    h, k = _pf_sq(s.H), _pf_sq(s.K)
    if abs(h - k) > tol:
        raise SpecInconsistency(f"||H||^2 = {h:.12g} but ||K||^2 = {k:.12g}")
    return h


@dataclass
class CommutantBound:
    bound: int
    side: str  # which matrix and direction produced the minimum, e.g. "K rows"


def commutant_bound_detail(s: SquareSpec) -> CommutantBound:
    cands = []
    for name, M, rside, cside in (("K", s.K, "A", "C"), ("H", s.H, "B", "D")):
        rows, cols = M.sum(axis=1), M.sum(axis=0)
        rok, cok = _trusted(s, rside), _trusted(s, cside)
        if rok.any():
            cands.append((int(rows[rok].min()), f"{name} rows"))
        if cok.any():
            cands.append((int(cols[cok].min()), f"{name} columns"))
    m, side = min(cands)
    return CommutantBound(m * m, side)


def commutant_bound(s: SquareSpec) -> int:
    return commutant_bound_detail(s).bound


def irreducibility_flag(s: SquareSpec) -> bool:
    """A trusted vertex of Gamma_H or Gamma_K meeting a single edge, or bound 1."""
    for M, rside, cside in ((s.K, "A", "C"), (s.H, "B", "D")):
        if ((M.sum(axis=1) == 1) & _trusted(s, rside)).any():
            return True
        if ((M.sum(axis=0) == 1) & _trusted(s, cside)).any():
            return True
    return commutant_bound(s) == 1


def _profile(G: np.ndarray, depth: int, keep: np.ndarray, burn_in: int) -> list[float]:
    G = np.asarray(G, dtype=float)
    P = G @ G.T
    w, V = np.linalg.eigh(P)
    mu, xi = w[-1], V[:, -1]
    xi = xi * np.sign(xi.sum())
    a0 = np.ones(P.shape[0])
    target = (a0 @ xi) * xi
    x = a0.copy()
    out = []
    for _ in range(depth + 1):
        out.append(float(np.abs(x - target)[keep].max(initial=0.0)))
        x = P @ x / mu
    floor = 64 * np.finfo(float).eps * max(1.0, float(np.abs(target).max()))
    for n in range(burn_in, len(out) - 1):
        if out[n + 1] > out[n] * (1 + 1e-9) and out[n + 1] > floor:
            raise DivergenceError(f"profile rises at level {n + 1}: {out[n]:.3e} -> {out[n + 1]:.3e}")
    return out


def convergence_profile(g: BipartiteGraph, depth: int, burn_in: int | None = None,
                        margin: int | None = None) -> list[float]:
    """Max-norm distance of mu^{-l} (G G^t)^l 1 from its limit <1, xi> xi, l = 0..depth.

    mu and xi are the top eigenpair of the (truncated) G G^t. Even vertices
    within `margin` steps of a truncation boundary are left out of the norm.
    The profile must not rise after `burn_in` levels (default: half the
    eccentricity of the first even vertex, at least 5).
    """
    G = bipartite_blocks(g)
    keep = np.ones(len(g.even), dtype=bool)
    if g.boundary:
        dist = g.distance_from(g.boundary)
        diam = max(dist.values())
        margin = diam // 4 if margin is None else margin
        keep = np.array([dist.get(v, diam) > margin for v in g.even], dtype=bool)
    if burn_in is None:
        # G G^t moves two steps per level; let the start vector cross the graph first
        ecc = max(g.distance_from([g.even[0]]).values())
        burn_in = min(depth, max(5, ecc // 2))
    return _profile(G, depth, keep, burn_in)


def spec_profile(s: SquareSpec, depth: int) -> list[float]:
    return _profile(s.G, depth, _trusted(s, "A"), min(5, depth))


def tower_report(s: SquareSpec, depth: int) -> dict:
    levels = extend_ladder(s, depth)
    cb = commutant_bound_detail(s)
    return {
        "index": subfactor_index(s),
        "bound": cb.bound,
        "bound_side": cb.side,
        "irreducible": irreducibility_flag(s),
        "levels": [{"dims_sum": sum(t.a_dims), "trace_mass": t.trace_mass} for t in levels],
        "convergence": spec_profile(s, depth),
    }


def _fmt(x):
    if isinstance(x, bool) or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_fmt(v) for v in x]
    return x


def report_json(rep: dict) -> str:
    return json.dumps(_fmt(rep), sort_keys=True, indent=1)
