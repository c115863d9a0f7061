"""Bi-unitary for a 3-star S(k,l,m) with horizontal inclusions Delta^2 - 1."""
from __future__ import annotations

import math

import numpy as np

from .. import spectral
from ..admissibility import Infeasible, ThreeStarData, nine_vectors
from ..graphs import star
from .core import BlockUnitaryPair, SquareSpec, StructuralError, UFiller, make_pair, poly_square

STAR3_COEFFS = [-1, 0, 1]


def _pos(v: str):
    """(ray, distance) for 'r{i}_{d}', (None, 0) for the centre."""
    if v == "c":
        return None, 0
    ray, d = v[1:].split("_")
    return int(ray) - 1, int(d)


def _complete(M: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to the two orthonormal columns of the 3x2 matrix M."""
    w = np.cross(M[:, 0], M[:, 1]).conj()
    return w / np.linalg.norm(w)


class _Star3:
    def __init__(self, rays):
        self.rays = tuple(int(k) for k in rays)
        p = spectral.star_lambda(self.rays)
        pf = spectral.star_pf_coords(self.rays)
        xi = {v: c / pf.coords["c"] for v, c in pf.coords.items()}
        self.lam, self.xi = pf.lam, xi
        self.al = tuple(xi[f"r{i + 1}_1"] for i in range(3))
        self.t = ThreeStarData(self.al, p.lam)
        nv = nine_vectors(self.t)
        if isinstance(nv, Infeasible):
            raise ValueError(f"S{self.rays} admits no commuting square: {nv.reason}")
        self.nv = nv
        self.e = np.asarray(nv.e, dtype=complex)
        self.dsq = tuple(self.alpha(i, k) ** 2 for i, k in enumerate(self.rays))
        self._central()

    def alpha(self, ray: int, d: int) -> float:
        if d == 0:
            return 1.0
        if d > self.rays[ray]:
            return 0.0
        return self.xi[f"r{ray + 1}_{d}"]

    def _central(self):
        al, e = self.al, self.e
        # u_j: rows i, columns (e_ij / sqrt(alpha_j), sigma_ij)
        self.sigma = np.zeros((3, 3), dtype=complex)
        for j in range(3):
            M = np.array([e[i, j] for i in range(3)]) / math.sqrt(al[j])
            c = _complete(M)
            if abs(c[j]) > 1e-14:
                c = c * abs(c[j]) / c[j]
            self.sigma[:, j] = c
        # v_i: columns j, rows (e_ij^t / sqrt(alpha_i), rho_ij)
        self.rho = np.zeros((3, 3), dtype=complex)
        for i in range(3):
            M = np.array([e[i, j] for j in range(3)]) / math.sqrt(al[i])
            r = _complete(M.conj()).conj()
            if abs(r[i]) > 1e-14:
                r = r * abs(r[i]) / r[i]
            self.rho[i] = r

    def ray_value(self, ray, p, q, r, s) -> float:
        a = lambda d: self.alpha(ray, d)
        ld = self.lam * self.dsq[ray]
        t2 = p
        if s == t2 - 1:
            c = math.sqrt(ld / (a(t2 - 1) * a(t2)))
            sn = math.sqrt(a(t2 - 2) * a(t2 + 1) / (a(t2 - 1) * a(t2)))
            table = {(t2 - 1, t2 - 2): c, (t2 - 1, t2): -sn, (t2 + 1, t2 - 2): sn, (t2 + 1, t2): c}
        elif s == t2 + 1:
            c = math.sqrt(ld / (a(t2) * a(t2 + 1)))
            sn = math.sqrt(a(t2 - 1) * a(t2 + 2) / (a(t2) * a(t2 + 1)))
            table = {(t2 - 1, t2): c, (t2 - 1, t2 + 2): sn, (t2 + 1, t2): -sn, (t2 + 1, t2 + 2): c}
        elif s == t2 + 3:
            table = {(t2 + 1, t2 + 2): 1.0}
        elif s == t2 - 3:
            table = {(t2 - 1, t2 - 2): 1.0}
        else:
            table = {}
        if (q, r) not in table:
            raise StructuralError(f"no ray entry for p={p} q={q} r={r} s={s} on ray {ray + 1}")
        return table[(q, r)]

    def value(self, i, j, k, l, rho) -> complex:
        (pr, pd), (rr, rd), (sr, sd), (qr, qd) = (_pos(v) for v in (i, j, k, l))
        if pd == 0 and sd == 1:
            jj, ii = sr, qr
            if rd == 0:
                return self.e[ii, jj][rho] / math.sqrt(self.al[jj])
            return self.sigma[ii, jj]
        if pd == 2 and sd == 1 and sr != pr:
            w = math.sqrt(self.xi[i] * self.xi[k] / (self.xi[l] * self.xi[j]))
            return self.rho[pr, sr] / w
        ray = next(x for x in (pr, qr, rr, sr) if x is not None)
        if any(x not in (None, ray) for x in (pr, qr, rr, sr)):
            raise StructuralError(f"cell {i}-{j}-{k}-{l} spans two rays")
        return self.ray_value(ray, pd, qd, rd, sd)


def star3_spec(rays) -> SquareSpec:
    g = star(rays)
    pf = spectral.star_pf_coords(tuple(rays))
    return poly_square(g, STAR3_COEFFS, pf.coords, pf.lam, f"S{tuple(rays)}")


def build_three_star(k: int, l: int, m: int) -> tuple[SquareSpec, BlockUnitaryPair]:
    rays = (k, l, m)
    data = _Star3(rays)
    s = star3_spec(rays)
    f = UFiller(s)
    for i, j, kk, ll, rho, sigma, phi, psi in f.cells():
        f.set(i, j, kk, ll, data.value(i, j, kk, ll, rho), rho, sigma, phi, psi)
    return s, make_pair(s, f.u)
