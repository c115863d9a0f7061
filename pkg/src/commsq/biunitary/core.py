"""Square specifications, the cell model behind u and v, and the bi-unitary verifier."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..graphs import BipartiteGraph, polynomial_image


class StructuralError(ValueError):
    """A pair does not have the block structure its spec dictates."""


@dataclass
class SquareSpec:
    """C <_L D over A <_G B with vertical inclusions A <_K C and B <_H D."""
    A: list
    B: list
    C: list
    D: list
    G: np.ndarray
    H: np.ndarray
    K: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    symmetric: bool = True
    name: str = ""
    # labels whose neighbourhood was cut by truncation, per algebra
    untrusted: dict = field(default_factory=dict)

    def __post_init__(self):
        for m in ("G", "H", "K", "L"):
            setattr(self, m, np.asarray(getattr(self, m), dtype=np.int64))
        for w in ("alpha", "beta", "gamma", "delta"):
            setattr(self, w, np.asarray(getattr(self, w), dtype=float))
        shapes = {"G": (len(self.A), len(self.B)), "H": (len(self.B), len(self.D)),
                  "K": (len(self.A), len(self.C)), "L": (len(self.C), len(self.D))}
        for m, sh in shapes.items():
            if getattr(self, m).shape != sh:
                raise StructuralError(f"{m} has shape {getattr(self, m).shape}, expected {sh}")
        for w, labs in (("alpha", self.A), ("beta", self.B), ("gamma", self.C), ("delta", self.D)):
            if len(getattr(self, w)) != len(labs):
                raise StructuralError(f"weight vector {w} has the wrong length")
        self._idx = {s: {v: n for n, v in enumerate(getattr(self, s))} for s in "ABCD"}

    def index(self, side: str, label) -> int:
        return self._idx[side][label]

    def is_untrusted(self, side: str, label) -> bool:
        return label in self.untrusted.get(side, ())

    def weight(self, i, j, k, l) -> float:
        """sqrt(alpha_i delta_k / (beta_j gamma_l)) for labels i in A, j in B, k in D, l in C."""
        x = self
        return math.sqrt(x.alpha[x._idx["A"][i]] * x.delta[x._idx["D"][k]]
                         / (x.beta[x._idx["B"][j]] * x.gamma[x._idx["C"][l]]))


# ---------------------------------------------------------------- construction of specs

def poly_square(g: BipartiteGraph, coeffs, xi: dict, lam: float, name: str = "") -> SquareSpec:
    """Square whose vertical inclusions are g and whose horizontal ones are P(Delta).

    A and C are the even and odd vertices. For an even P the horizontal
    inclusions stay on one side (B = evens, D = odds); for an odd P they
    cross (B = odds, D = evens). Trace weights are the PF vector xi scaled so
    that alpha = G beta = K gamma, beta = H delta and gamma = L delta.
    """
    img = polynomial_image(g, coeffs)
    Gm = np.zeros((len(g.even), len(g.odd)), dtype=np.int64)
    ie = {v: n for n, v in enumerate(g.even)}
    io = {v: n for n, v in enumerate(g.odd)}
    for (a, b), m in g.edges.items():
        Gm[ie[a], io[b]] = m
    ev, od = list(g.even), list(g.odd)
    first = np.clip(img.first, 0, None)
    second = np.clip(img.second, 0, None)
    p_lam = sum(c * lam ** n for n, c in enumerate(coeffs))
    if p_lam <= 0:
        raise ValueError("P(lambda) must be positive")
    xe = np.array([xi[v] for v in ev])
    xo = np.array([xi[v] for v in od])
    unt_e = [v for v in ev if v in img.untrusted]
    unt_o = [v for v in od if v in img.untrusted]
    if img.parity == "even":
        B, D = ev, od
        G, L, H = first, second, Gm
        beta, delta = lam * xe, xo
        unt = {"A": unt_e, "B": unt_e, "C": unt_o, "D": unt_o}
    else:
        B, D = od, ev
        G, L, H = first, second, Gm.T
        beta, delta = lam * xo, xe
        unt = {"A": unt_e, "B": unt_o, "C": unt_o, "D": unt_e}
    alpha = lam * p_lam * xe
    gamma = p_lam * xo
    return SquareSpec(ev, B, od, D, G, H, Gm, L, alpha, beta, gamma, delta, True, name,
                      {k: frozenset(v) for k, v in unt.items()})


# ---------------------------------------------------------------- validation

@dataclass
class Report:
    ok: bool
    violations: list
    worst: float = 0.0
    untested: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"pass": self.ok, "worst_residual": float(f"{self.worst:.12g}"),
                           "failures": self.violations, "untested": self.untested},
                          sort_keys=True, indent=1)


def validate_spec(s: SquareSpec, tol: float = 1e-9) -> Report:
    """GH = KL, symmetry, G^t K <= H L^t, trace consistency and Markov residuals."""
    out = []
    tA = np.array([s.is_untrusted("A", v) for v in s.A], dtype=bool)
    tB = np.array([s.is_untrusted("B", v) for v in s.B], dtype=bool)
    tC = np.array([s.is_untrusted("C", v) for v in s.C], dtype=bool)
    tD = np.array([s.is_untrusted("D", v) for v in s.D], dtype=bool)

    def compare(name, X, Y, rows, cols, rlab, clab, rel="="):
        bad = (X != Y) if rel == "=" else (X > Y)
        mask = ~(rows[:, None] | cols[None, :])
        for a, b in zip(*np.nonzero(bad & mask)):
            out.append({"check": name, "at": [str(rlab[a]), str(clab[b])],
                        "left": int(X[a, b]), "right": int(Y[a, b])})

    compare("GH=KL", s.G @ s.H, s.K @ s.L, tA, tD, s.A, s.D)
    compare("GtK<=HLt", s.G.T @ s.K, s.H @ s.L.T, tB, tC, s.B, s.C, "<=")
    if s.symmetric:
        compare("GtK=HLt", s.G.T @ s.K, s.H @ s.L.T, tB, tC, s.B, s.C)
    worst = 0.0

    def resid(name, lhs, rhs, skip, labels):
        nonlocal worst
        scale = max(1.0, float(np.abs(rhs).max()))
        r = np.abs(lhs - rhs) / scale
        r[skip] = 0.0
        worst = max(worst, float(r.max(initial=0.0)))
        for a in np.nonzero(r > tol)[0]:
            out.append({"check": name, "at": [str(labels[a])], "residual": float(r[a])})

    # trace weights: a minimal projection of the smaller algebra splits along the inclusion
    resid("alpha=G beta", s.G @ s.beta, s.alpha, tA | ~(s.G.sum(1) > 0), s.A)
    resid("alpha=K gamma", s.K @ s.gamma, s.alpha, tA, s.A)
    resid("beta=H delta", s.H @ s.delta, s.beta, tB, s.B)
    resid("gamma=L delta", s.L @ s.delta, s.gamma, tC | ~(s.L.sum(1) > 0), s.C)
    # Markov: H^t beta and K^t alpha are the same multiple of delta and gamma
    keepD, keepC = ~tD, ~tC
    hb, ka = s.H.T @ s.beta, s.K.T @ s.alpha
    mu = float(hb[keepD] @ s.delta[keepD] / (s.delta[keepD] @ s.delta[keepD]))
    resid("H^t beta=mu delta", hb, mu * s.delta, tD, s.D)
    resid("K^t alpha=mu gamma", ka, mu * s.gamma, tC, s.C)
    return Report(not out, out, worst)


# ---------------------------------------------------------------- cells

def _mult(M, a, b):
    return int(M[a, b])


def u_rows(s: SquareSpec, i, k) -> list:
    """Row labels (j, rho, sigma) of u^{(i,k)}, lexicographic in the B order."""
    ia, kd = s.index("A", i), s.index("D", k)
    out = []
    for jb, j in enumerate(s.B):
        g, h = _mult(s.G, ia, jb), _mult(s.H, jb, kd)
        out += [(j, r, t) for r, t in product(range(g), range(h))]
    return out


def u_cols(s: SquareSpec, i, k) -> list:
    ia, kd = s.index("A", i), s.index("D", k)
    out = []
    for lc, l in enumerate(s.C):
        a, b = _mult(s.K, ia, lc), _mult(s.L, lc, kd)
        out += [(l, f, p) for f, p in product(range(a), range(b))]
    return out


def v_rows(s: SquareSpec, j, l) -> list:
    jb, lc = s.index("B", j), s.index("C", l)
    out = []
    for ia, i in enumerate(s.A):
        a, b = _mult(s.G, ia, jb), _mult(s.K, ia, lc)
        out += [(i, r, f) for r, f in product(range(a), range(b))]
    return out


def v_cols(s: SquareSpec, j, l) -> list:
    jb, lc = s.index("B", j), s.index("C", l)
    out = []
    for kd, k in enumerate(s.D):
        a, b = _mult(s.H, jb, kd), _mult(s.L, lc, kd)
        out += [(k, t, p) for t, p in product(range(a), range(b))]
    return out


def u_keys(s: SquareSpec) -> list:
    P = s.G @ s.H
    return [(s.A[a], s.D[d]) for a, d in zip(*np.nonzero(P))]


def v_keys(s: SquareSpec) -> list:
    P = s.G.T @ s.K
    return [(s.B[b], s.C[c]) for b, c in zip(*np.nonzero(P))]


def block_shapes(s: SquareSpec) -> dict:
    """Expected block shapes from the matrix products."""
    GH, KL, GtK, HLt = s.G @ s.H, s.K @ s.L, s.G.T @ s.K, s.H @ s.L.T
    out = {}
    for i, k in u_keys(s):
        a, d = s.index("A", i), s.index("D", k)
        out[("u", i, k)] = (int(GH[a, d]), int(KL[a, d]))
    for j, l in v_keys(s):
        b, c = s.index("B", j), s.index("C", l)
        out[("v", j, l)] = (int(GtK[b, c]), int(HLt[b, c]))
    return out


# ---------------------------------------------------------------- pairs

@dataclass
class BlockUnitaryPair:
    u: dict  # (i, k) -> complex matrix, rows u_rows, cols u_cols
    v: dict  # (j, l) -> complex matrix, rows v_rows, cols v_cols


def empty_u(s: SquareSpec) -> dict:
    return {key: np.zeros((len(u_rows(s, *key)), len(u_cols(s, *key))), dtype=complex)
            for key in u_keys(s)}


class UFiller:
    """Write u entries by cell (i, j, k, l) plus multiplicity indices."""

    def __init__(self, s: SquareSpec):
        self.s = s
        self.u = empty_u(s)
        self._rows = {key: {r: n for n, r in enumerate(u_rows(s, *key))} for key in self.u}
        self._cols = {key: {c: n for n, c in enumerate(u_cols(s, *key))} for key in self.u}
        self.filled = {key: np.zeros(m.shape, dtype=bool) for key, m in self.u.items()}

    def has(self, i, j, k, l, rho=0, sigma=0, phi=0, psi=0) -> bool:
        key = (i, k)
        return key in self.u and (j, rho, sigma) in self._rows[key] and (l, phi, psi) in self._cols[key]

    def set(self, i, j, k, l, value, rho=0, sigma=0, phi=0, psi=0):
        key = (i, k)
        try:
            r = self._rows[key][(j, rho, sigma)]
            c = self._cols[key][(l, phi, psi)]
        except KeyError:
            raise StructuralError(f"no cell {i}-{j}-{k}-{l} ({rho},{sigma},{phi},{psi})") from None
        self.u[key][r, c] = value
        self.filled[key][r, c] = True

    def cells(self):
        for key in self.u:
            i, k = key
            for (j, rho, sigma), r in self._rows[key].items():
                for (l, phi, psi), c in self._cols[key].items():
                    yield i, j, k, l, rho, sigma, phi, psi

    def missing(self) -> list:
        return [key for key, f in self.filled.items() if not f.all()]


def transition_v(s: SquareSpec, u: dict) -> dict:
    """v^{(j,l)}_{(i,rho,phi),(k,sigma,psi)} = w * u^{(i,k)}_{(j,rho,sigma),(l,phi,psi)}."""
    v = {}
    rows = {key: {r: n for n, r in enumerate(u_rows(s, *key))} for key in u}
    cols = {key: {c: n for n, c in enumerate(u_cols(s, *key))} for key in u}
    for j, l in v_keys(s):
        vr, vc = v_rows(s, j, l), v_cols(s, j, l)
        M = np.zeros((len(vr), len(vc)), dtype=complex)
        for a, (i, rho, phi) in enumerate(vr):
            for b, (k, sigma, psi) in enumerate(vc):
                ub = u.get((i, k))
                if ub is None:
                    continue
                val = ub[rows[(i, k)][(j, rho, sigma)], cols[(i, k)][(l, phi, psi)]]
                M[a, b] = s.weight(i, j, k, l) * val
        v[(j, l)] = M
    return v


def inverse_transition(s: SquareSpec, v: dict) -> dict:
    """Recover u from v; transition_v followed by this is the identity."""
    u = {}
    vrows = {key: {r: n for n, r in enumerate(v_rows(s, *key))} for key in v}
    vcols = {key: {c: n for n, c in enumerate(v_cols(s, *key))} for key in v}
    for i, k in u_keys(s):
        ur, uc = u_rows(s, i, k), u_cols(s, i, k)
        M = np.zeros((len(ur), len(uc)), dtype=complex)
        for a, (j, rho, sigma) in enumerate(ur):
            for b, (l, phi, psi) in enumerate(uc):
                vb = v.get((j, l))
                if vb is None:
                    continue
                M[a, b] = vb[vrows[(j, l)][(i, rho, phi)], vcols[(j, l)][(k, sigma, psi)]] / s.weight(i, j, k, l)
        u[(i, k)] = M
    return u


def make_pair(s: SquareSpec, u: dict) -> BlockUnitaryPair:
    return BlockUnitaryPair(u, transition_v(s, u))


# ---------------------------------------------------------------- verification

def _unitarity(M: np.ndarray) -> float:
    if M.shape[0] != M.shape[1]:
        return math.inf
    n = M.shape[0]
    e = np.eye(n)
    return float(max(np.abs(M.conj().T @ M - e).max(initial=0.0), np.abs(M @ M.conj().T - e).max(initial=0.0)))


def _touches_untrusted(s: SquareSpec, side: str, key) -> bool:
    if side == "u":
        i, k = key
        if s.is_untrusted("A", i) or s.is_untrusted("D", k):
            return True
        return any(s.is_untrusted("B", j) for j, _, _ in u_rows(s, i, k)) or \
            any(s.is_untrusted("C", l) for l, _, _ in u_cols(s, i, k))
    j, l = key
    if s.is_untrusted("B", j) or s.is_untrusted("C", l):
        return True
    return any(s.is_untrusted("A", i) for i, _, _ in v_rows(s, j, l)) or \
        any(s.is_untrusted("D", k) for k, _, _ in v_cols(s, j, l))


def check_structure(s: SquareSpec, p: BlockUnitaryPair):
    shapes = block_shapes(s)
    want_u = {(k[1], k[2]) for k in shapes if k[0] == "u"}
    want_v = {(k[1], k[2]) for k in shapes if k[0] == "v"}
    if set(p.u) != want_u:
        raise StructuralError(f"u blocks differ from the square spec: {sorted(map(str, set(p.u) ^ want_u))[:4]}")
    if set(p.v) != want_v:
        raise StructuralError(f"v blocks differ from the square spec: {sorted(map(str, set(p.v) ^ want_v))[:4]}")
    for (side, a, b), sh in shapes.items():
        M = (p.u if side == "u" else p.v)[(a, b)]
        if tuple(M.shape) != sh:
            raise StructuralError(f"{side} block {a},{b} has shape {M.shape}, expected {sh}")


def verify_pair(s: SquareSpec, p: BlockUnitaryPair, tol: float = 1e-9) -> Report:
    """Unitarity of every block and the entrywise transition law.

    Blocks that involve a truncation artefact are reported as untested.
    """
    check_structure(s, p)
    fails, untested = [], []
    worst = 0.0
    for side, blocks in (("u", p.u), ("v", p.v)):
        for key in sorted(blocks, key=lambda x: (str(x[0]), str(x[1]))):
            if _touches_untrusted(s, side, key):
                untested.append({"side": side, "key": [str(x) for x in key]})
                continue
            r = _unitarity(blocks[key])
            worst = max(worst, r)
            if r > tol:
                fails.append({"side": side, "key": [str(x) for x in key], "check": "unitary", "residual": r})
    expected = transition_v(s, p.u)
    for key in sorted(p.v, key=lambda x: (str(x[0]), str(x[1]))):
        if _touches_untrusted(s, "v", key):
            continue
        r = float(np.abs(p.v[key] - expected[key]).max(initial=0.0))
        worst = max(worst, r)
        if r > tol:
            fails.append({"side": "v", "key": [str(x) for x in key], "check": "transition", "residual": r})
    return Report(not fails, fails, worst, untested)


# ---------------------------------------------------------------- serialization

def pair_to_json(s: SquareSpec, p: BlockUnitaryPair, spec_ref: str = "") -> str:
    blocks = []
    for side, bl, rf, cf in (("u", p.u, u_rows, u_cols), ("v", p.v, v_rows, v_cols)):
        for key in sorted(bl, key=lambda x: (str(x[0]), str(x[1]))):
            M = bl[key]
            blocks.append({
                "side": side, "key": [str(x) for x in key],
                "rows": [[str(a), b, c] for a, b, c in rf(s, *key)],
                "cols": [[str(a), b, c] for a, b, c in cf(s, *key)],
                "entries": [[[float(f"{z.real:.15g}"), float(f"{z.imag:.15g}")] for z in row] for row in M],
            })
    return json.dumps({"spec_ref": spec_ref or s.name, "blocks": blocks}, sort_keys=True)


def pair_from_json(s: SquareSpec, text: str) -> BlockUnitaryPair:
    data = json.loads(text)
    lab = {side: {str(x): x for x in getattr(s, side)} for side in "ABCD"}
    u, v = {}, {}
    try:
        for b in data["blocks"]:
            e = np.array(b["entries"], dtype=float)
            M = e[..., 0] + 1j * e[..., 1] if e.size else np.zeros((len(b["rows"]), len(b["cols"])), complex)
            if b["side"] == "u":
                u[(lab["A"][b["key"][0]], lab["D"][b["key"][1]])] = M
            elif b["side"] == "v":
                v[(lab["B"][b["key"][0]], lab["C"][b["key"][1]])] = M
            else:
                raise StructuralError(f"unknown side {b['side']!r}")
    except (KeyError, TypeError, IndexError) as exc:
        raise StructuralError(f"malformed pair file: {exc}") from None
    return BlockUnitaryPair(u, v)


# ---------------------------------------------------------------- brute force oracle

def brute_force_shapes(s: SquareSpec) -> dict:
    """Block shapes counted from explicit 4-cycles; independent of block_shapes."""
    cnt: dict = {}
    for ia, i in enumerate(s.A):
        for jb, j in enumerate(s.B):
            if not s.G[ia, jb]:
                continue
            for kd, k in enumerate(s.D):
                if not s.H[jb, kd]:
                    continue
                key = ("u", i, k)
                r, c = cnt.get(key, (0, 0))
                cnt[key] = (r + int(s.G[ia, jb] * s.H[jb, kd]), c)
    for ia, i in enumerate(s.A):
        for lc, l in enumerate(s.C):
            if not s.K[ia, lc]:
                continue
            for kd, k in enumerate(s.D):
                if not s.L[lc, kd]:
                    continue
                key = ("u", i, k)
                r, c = cnt.get(key, (0, 0))
                cnt[key] = (r, c + int(s.K[ia, lc] * s.L[lc, kd]))
    for jb, j in enumerate(s.B):
        for lc, l in enumerate(s.C):
            rows = sum(int(s.G[ia, jb] * s.K[ia, lc]) for ia in range(len(s.A)))
            cols = sum(int(s.H[jb, kd] * s.L[lc, kd]) for kd in range(len(s.D)))
            if rows or cols:
                cnt[("v", j, l)] = (rows, cols)
    return cnt
