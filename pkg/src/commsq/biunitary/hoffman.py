"""Bi-unitaries for the Hoffman graphs T(1,n,inf), n = 2, 3, 4, on a truncated window."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import poly, spectral
from ..admissibility import Infeasible, unitary_with_moduli3
from ..graphs import BipartiteGraph, hoffman
from .core import (BlockUnitaryPair, SquareSpec, StructuralError, UFiller, make_pair, poly_square,
                   transition_v, u_cols, u_rows, v_cols, v_keys, v_rows,
                   _touches_untrusted)


def thoffman_coeffs(n: int) -> list[int]:
    if n == 2:
        return poly.s_coeffs(4)
    if n == 3:
        return poly.s_coeffs(5)
    if n == 4:
        c = poly.s_coeffs(6)
        c[0] += 1
        return c
    raise ValueError("only n = 2, 3, 4 are constructed")


def thoffman_spec(n: int, horizon: int) -> SquareSpec:
    c = thoffman_coeffs(n)
    if horizon < 2 * n + 8 + len(c):
        raise ValueError("horizon too small for the displayed window")
    pf = spectral.hoffman_pf_coords(n, horizon)
    g = hoffman(n, horizon)
    if n == 3:
        # the odd polynomial needs the branch vertex on the C side
        g = BipartiteGraph(g.odd, g.even, {(b, a): m for (a, b), m in g.edges.items()}, g.family, g.boundary)
    return poly_square(g, c, pf.coords, pf.lam, f"T(1,{n},inf)")


def _fill(s: SquareSpec, boxes: dict, mult_boxes: dict | None = None) -> UFiller:
    """Write the window, then the scalar-1 tail.

    `boxes` maps (row edge, column edge) to a scalar; an edge is a pair of vertex
    labels in either order. Row edge = the K-edge i-l, column edge = the H-edge j-k.
    """
    f = UFiller(s)
    for (re_, ce), val in boxes.items():
        f.set(*box_cell(s, re_, ce), val)
    for (re_, ce), block in (mult_boxes or {}).items():
        for (rho, psi), val in block.items():
            f.set(*box_cell(s, re_, ce), val, rho=rho, psi=psi)
    for (i, k), M in f.u.items():
        queue = ~f.filled[(i, k)]
        if not queue.any():
            continue
        if M.shape != (1, 1):
            if f.filled[(i, k)].any() or not _near_boundary(s, i, k):
                raise StructuralError(f"block u({i},{k}) of shape {M.shape} is outside the window")
            continue
        f.u[(i, k)][0, 0] = 1.0
        f.filled[(i, k)][0, 0] = True
    return f


def box_cell(s: SquareSpec, row_edge, col_edge) -> tuple:
    """Cell (i, j, k, l) of the box with row edge i-l and column edge j-k."""
    a, b = (str(x) for x in row_edge)
    i, l = (a, b) if a in s.A else (b, a)
    c, d = (str(x) for x in col_edge)
    j, k = (c, d) if c in s.B else (d, c)
    return i, j, k, l


def _near_boundary(s: SquareSpec, i, k) -> bool:
    return s.is_untrusted("A", i) or s.is_untrusted("D", k)


def _t12_boxes(x: float) -> dict:
    E = lambda m: math.exp(-m * x)
    return {
        ((1, 2), (5, 6)): 1.0, ((1, 2), (6, 7)): 1.0,
        ((2, 3), (3, 5)): E(1), ((2, 3), (5, 6)): E(5), ((2, 3), (6, 7)): -E(3), ((2, 3), (7, 8)): E(2),
        ((3, 4), (3, 4)): 1.0, ((3, 4), (6, 7)): E(2), ((3, 4), (7, 8)): E(3),
        ((3, 5), (2, 3)): 1.0, ((3, 5), (3, 5)): -E(5), ((3, 5), (5, 6)): E(1), ((3, 5), (8, 9)): 1.0,
        ((5, 6), (1, 2)): E(2), ((5, 6), (2, 3)): E(3), ((5, 6), (3, 5)): 1.0, ((5, 6), (9, 10)): 1.0,
        ((6, 7), (1, 2)): E(3), ((6, 7), (2, 3)): -E(2), ((6, 7), (3, 4)): 1.0,
        ((7, 8), (2, 3)): 1.0, ((7, 8), (3, 4)): 1.0,
    }


T13_FREE = (((3, 4), (3, 4)), ((3, 4), (4, 5)), ((4, 5), (3, 4)), ((4, 5), (4, 5)))


def _t13_boxes(x: float, lam: float) -> dict:
    E = lambda m: math.exp(-m * x)
    L = lambda m: math.sqrt(lam * math.exp(-m * x))
    b = {
        ((1, 2), (6, 7)): 1.0, ((1, 2), (7, 8)): 1.0,
        ((2, 3), (4, 6)): L(5), ((2, 3), (6, 7)): E(4), ((2, 3), (7, 8)): -E(2), ((2, 3), (8, 9)): L(7),
        ((3, 4), (4, 6)): E(4), ((3, 4), (6, 7)): -L(5), ((3, 4), (7, 8)): L(7), ((3, 4), (8, 9)): E(2),
        ((3, 4), (9, 10)): 1.0,
        ((4, 5), (4, 6)): 1.0, ((4, 5), (8, 9)): 1.0, ((4, 5), (9, 10)): -1.0,
        ((4, 6), (2, 3)): L(5), ((4, 6), (3, 4)): E(4), ((4, 6), (4, 5)): 1.0, ((4, 6), (4, 6)): E(1),
        ((4, 6), (6, 7)): E(3), ((4, 6), (7, 8)): 1.0, ((4, 6), (10, 11)): 1.0,
        ((6, 7), (1, 2)): -1.0, ((6, 7), (2, 3)): E(4), ((6, 7), (3, 4)): -L(5), ((6, 7), (4, 6)): E(3),
        ((6, 7), (6, 7)): -E(1),
        ((7, 8), (1, 2)): 1.0, ((7, 8), (2, 3)): E(2), ((7, 8), (3, 4)): L(7), ((7, 8), (4, 6)): 1.0,
        ((8, 9), (2, 3)): L(7), ((8, 9), (3, 4)): -E(2), ((8, 9), (4, 5)): 1.0,
        ((9, 10), (3, 4)): 1.0, ((9, 10), (4, 5)): 1.0,
        ((10, 11), (4, 6)): 1.0,
    }
    for key in T13_FREE:
        b[key] = 1.0  # modulus-one placeholders, fixed by the 3x3 block of v
    return b


@dataclass
class Block3:
    key: tuple
    moduli_sq: np.ndarray
    slack: float  # -(a^2 + b^2 + c^2 - 2ab - 2bc - 2ca) for the first two rows


def _complete_v3(s: SquareSpec, f: UFiller, free: list) -> Block3:
    """Fill the free u cells so that the v block holding them is a 3x3 unitary.

    The remaining entries of that block are fixed; the free cells carry
    phases only, so a unitary with the right moduli is rotated by row and
    column phases onto the fixed entries.
    """
    keys = {(j, l) for i, j, k, l in free}
    if len(keys) != 1:
        raise StructuralError("free cells do not lie in a single block of v")
    (j, l), = keys
    V = transition_v(s, f.u)[(j, l)]
    if V.shape != (3, 3):
        raise StructuralError(f"v({j},{l}) has shape {V.shape}, expected 3x3")
    rows = [r[0] for r in v_rows(s, j, l)]
    cols = [c[0] for c in v_cols(s, j, l)]
    pos = {(rows.index(i), cols.index(k)): (i, j, k, l) for i, j, k, l in free}
    D = np.abs(V) ** 2
    d = np.sqrt(D)
    a, b, c = d[0] * d[1]
    U0 = unitary_with_moduli3(D)
    if isinstance(U0, Infeasible):
        raise StructuralError(f"3x3 block of v is not realisable: {U0.reason}")
    fixed = [(r, c_) for r in range(3) for c_ in range(3) if (r, c_) not in pos]
    # row and column phases along a spanning tree of the fixed entries
    ra, cb = {0: 1.0 + 0j}, {}
    for _ in range(6):
        for r, c_ in fixed:
            ph = V[r, c_] / U0[r, c_]
            if r in ra and c_ not in cb:
                cb[c_] = ph / ra[r]
            elif c_ in cb and r not in ra:
                ra[r] = ph / cb[c_]
    if len(ra) != 3 or len(cb) != 3:
        raise StructuralError("fixed entries do not determine the phases")
    W = np.array([[ra[r] * U0[r, c_] * cb[c_] for c_ in range(3)] for r in range(3)])
    if np.abs(W - V)[tuple(zip(*fixed))].max() > 1e-9:
        raise StructuralError("fixed entries of the 3x3 block are inconsistent")
    for (r, c_), (i, jj, k, ll) in pos.items():
        f.set(i, jj, k, ll, W[r, c_] / s.weight(i, jj, k, ll))
    return Block3((j, l), D, -(a * a + b * b + c * c - 2 * a * b - 2 * b * c - 2 * c * a))


def t13_block_slack() -> float:
    """-(-4 rho^2 - rho - 5), positive for every rho > 0."""
    rho = spectral.hoffman_lambda(3).rho
    return 4 * rho * rho + rho + 5


def t12_identity_residual() -> float:
    rho = spectral.hoffman_lambda(2).rho
    return abs((rho ** 2 - rho + 1) * (rho ** 3 - rho - 1) - (rho ** 5 - rho ** 4 - 1))


def build_thoffman(n: int, horizon: int) -> tuple[SquareSpec, BlockUnitaryPair]:
    s = thoffman_spec(n, horizon)
    h = spectral.hoffman_lambda(n)
    x = 0.5 * math.log(h.rho)
    if n == 2:
        f = _fill(s, _t12_boxes(x))
    elif n == 3:
        f = _fill(s, _t13_boxes(x, h.lam))
        _complete_v3(s, f, [box_cell(s, *b) for b in T13_FREE])
    else:
        f = _t14(s)
    return s, make_pair(s, f.u)


def _t14(s: SquareSpec, window: int = 12, seeds: int = 40, tol: float = 1e-12) -> UFiller:
    """Solve the window numerically; 1x1 blocks beyond it carry the scalar 1.

    Unknowns are the entries of every u block whose labels are both at most
    `window`. The residual stacks u^*u - 1 and v v^* - 1 over the trusted
    blocks that see an unknown, with v obtained from u by the transition law.
    """
    from scipy.optimize import least_squares

    f = UFiller(s)
    free = [key for key in f.u if max(int(key[0]), int(key[1])) <= window]
    for key, M in f.u.items():
        if key in free:
            continue
        if M.shape == (1, 1):
            M[0, 0] = 1.0
        elif M.size and not _near_boundary(s, *key):
            raise StructuralError(f"block u{key} of shape {M.shape} is outside the window")
        f.filled[key][:] = True
    # flat layout of the unknowns
    offs, n = {}, 0
    for key in free:
        offs[key] = n
        n += f.u[key].size
    rows = {key: {r: a for a, r in enumerate(u_rows(s, *key))} for key in f.u}
    cols = {key: {c: b for b, c in enumerate(u_cols(s, *key))} for key in f.u}
    vplan = []
    for j, l in v_keys(s):
        vr, vc = v_rows(s, j, l), v_cols(s, j, l)
        if _touches_untrusted(s, "v", (j, l)) or len(vr) != len(vc):
            continue
        idx = np.full((len(vr), len(vc)), -1)
        const = np.zeros((len(vr), len(vc)), dtype=complex)
        wts = np.zeros((len(vr), len(vc)))
        for a, (i, rho, phi) in enumerate(vr):
            for b, (k, sigma, psi) in enumerate(vc):
                if (i, k) not in f.u:
                    continue
                r, c = rows[(i, k)][(j, rho, sigma)], cols[(i, k)][(l, phi, psi)]
                w = s.weight(i, j, k, l)
                if (i, k) in offs:
                    idx[a, b] = offs[(i, k)] + r * f.u[(i, k)].shape[1] + c
                    wts[a, b] = w
                else:
                    const[a, b] = w * f.u[(i, k)][r, c]
        if (idx >= 0).any():
            vplan.append((idx, wts, const))
    ublocks = [(offs[k], f.u[k].shape) for k in free
               if f.u[k].shape[0] == f.u[k].shape[1] and not _touches_untrusted(s, "u", k)]

    # each unknown appears once in u and at most once in v
    seg, m = [], 0
    for o, (p, q) in ublocks:
        seg.append(m)
        m += q * q
    vseg, vhit = [], [[] for _ in range(n)]
    for t, (idx, wts, const) in enumerate(vplan):
        vseg.append(m)
        m += idx.shape[0] ** 2
        for a, b in zip(*np.nonzero(idx >= 0)):
            vhit[idx[a, b]].append((t, a, b))

    def unpack(z):
        return z[:n] + 1j * z[n:]

    def vmats(w):
        return [np.where(idx >= 0, wts * w[np.maximum(idx, 0)], const) for idx, wts, const in vplan]

    def resid(z):
        w = unpack(z)
        out = []
        for o, (p, q) in ublocks:
            M = w[o:o + p * q].reshape(p, q)
            out.append((M.conj().T @ M - np.eye(q)).ravel())
        for V in vmats(w):
            out.append((V @ V.conj().T - np.eye(V.shape[0])).ravel())
        r = np.concatenate(out)
        return np.concatenate([r.real, r.imag])

    def jac(z):
        w = unpack(z)
        J = np.zeros((m, 2 * n), dtype=complex)
        for sidx, (o, (p, q)) in zip(seg, ublocks):
            M = w[o:o + p * q].reshape(p, q)
            for a in range(p):
                for b in range(q):
                    e = o + a * q + b
                    for col, t in ((e, 1.0), (n + e, 1j)):
                        D = np.zeros((q, q), dtype=complex)
                        D[b, :] += np.conj(t) * M[a, :]
                        D[:, b] += t * M[a, :].conj()
                        J[sidx:sidx + q * q, col] = D.ravel()
        Vs = vmats(w)
        for e in range(n):
            for tv, a, b in vhit[e]:
                V, wt = Vs[tv], vplan[tv][1][a, b]
                r = V.shape[0]
                for col, t in ((e, 1.0), (n + e, 1j)):
                    D = np.zeros((r, r), dtype=complex)
                    D[a, :] += t * wt * V[:, b].conj()
                    D[:, a] += np.conj(t * wt) * V[:, b]
                    J[vseg[tv]:vseg[tv] + r * r, col] = D.ravel()
        return np.vstack([J.real, J.imag])

    rng = np.random.default_rng(20240601)
    best = None
    for _ in range(seeds):
        z0 = rng.normal(size=2 * n) / 2
        sol = least_squares(resid, z0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        err = float(np.abs(sol.fun).max())
        if best is None or err < best[0]:
            best = (err, sol.x)
        if err < tol:
            break
    err, z = best
    if err > tol:
        raise StructuralError(f"window solve stalled at residual {err:.3g}")
    w = unpack(z)
    for key in free:
        o = offs[key]
        f.u[key][:] = w[o:o + f.u[key].size].reshape(f.u[key].shape)
        f.filled[key][:] = True
    return f


@dataclass
class T14Attempt:
    a: float
    b: float
    c: float
    d: float
    feasibility: object  # admissibility.VectorFeasibility


def t14_attempts() -> dict:
    """Vector-problem data for S_6 (fails) and S_6 + 1 (succeeds) on T(1,4,inf)."""
    from ..admissibility import t14_vector_feasible

    rho = spectral.hoffman_lambda(4).rho
    first = (rho * (2 - rho), rho * rho - 1, (rho * rho - 1) * (rho + 1) / rho ** 3, 1.0)
    second = (rho * (3 - rho), rho * rho - 1, (3 + 3 * rho - rho ** 3) / rho, 1.0)
    return {name: T14Attempt(*v, t14_vector_feasible(*v)) for name, v in
            (("S6", first), ("S6+1", second))}


def t14_gamma3_sq() -> float:
    """b - gamma_1^2 - gamma_2^2 for the S_6 + 1 data; positive means f can be completed."""
    t = t14_attempts()["S6+1"]
    a, b, c, d = t.a, t.b, t.c, t.d
    return (9 * b - (a - b) * (a - d) - (c - b) * (c - d) + 4 * (b - d) ** 2) / 9


def t14_gamma3() -> float:
    return math.sqrt(t14_gamma3_sq())
