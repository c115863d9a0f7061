"""Real bi-unitary for A_m with horizontal inclusions R_l(Delta)."""
from __future__ import annotations

import math

from .. import poly, spectral
from ..graphs import path
from .core import BlockUnitaryPair, SquareSpec, UFiller, make_pair, poly_square


def al_alpha(m: int):
    x = math.pi / (m + 1)
    return lambda j: math.sin(j * x) / math.sin(x)


def al_modulus(m: int, l: int, a: int, b: int) -> float:
    """Modulus of the entry in box ({a}, {b}); edge {a} joins vertices a and a+1."""
    al = al_alpha(m)
    j = (a + 1) // 2  # the row edge's even vertex is 2j
    if l % 2 == 0:
        n = l // 2
        k = b // 2  # the column edge's odd vertex is 2k+1
        den = al(2 * j) * al(2 * k + 1)
        num = al(n + j - k) * al(n - j + k + 1) if (a + b) % 2 else al(j + k - n) * al(n + j + k + 1)
    else:
        n = (l - 1) // 2
        k = (b + 1) // 2  # the column edge's even vertex is 2k
        den = al(2 * j) * al(2 * k)
        num = al(1 - j + k + n) * al(n + j - k + 1) if (a + b) % 2 == 0 else al(j + k - n - 1) * al(n + j + k + 1)
    q = num / den
    if q < -1e-12:
        raise ValueError(f"negative squared modulus in box ({a},{b})")
    return math.sqrt(max(q, 0.0))


def al_sign(l: int, a: int, b: int) -> int:
    """Diagonal sign pattern: one minus stripe in every four."""
    return -1 if (b - a) % 4 == (2 if l % 2 == 0 else 3) else 1


def al_spec(m: int, l: int) -> SquareSpec:
    if m < 3 or not 1 <= l < m:
        raise ValueError("need m >= 3 and 1 <= l < m")
    g = path(m)
    pf = spectral.path_pf_coords(m)
    return poly_square(g, poly.r_coeffs(l), pf.coords, pf.lam, f"A{m}:R{l}")


def build_al(m: int, l: int) -> tuple[SquareSpec, BlockUnitaryPair]:
    s = al_spec(m, l)
    f = UFiller(s)
    for i, j, k, ll, *_ in f.cells():
        e = min(int(i), int(ll))  # K-edge i - l
        h = min(int(j), int(k))  # H-edge j - k
        f.set(i, j, k, ll, al_sign(l, e, h) * al_modulus(m, l, e, h))
    return s, make_pair(s, f.u)
