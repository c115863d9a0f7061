"""Real bi-unitary for E10 with the horizontal inclusion P(Delta), P(t) = t^4-8t^3+20t^2-16t+3, t = Delta^2."""
from __future__ import annotations

import math

import numpy as np

from .. import spectral
from ..graphs import e10
from .core import BlockUnitaryPair, SquareSpec, UFiller, make_pair, poly_square

E10_COEFFS = [3, 0, -16, 0, 20, 0, -8, 0, 1]


def r_values(lam: float, n: int = 10) -> list[float]:
    R = [1.0, lam]
    while len(R) <= n:
        R.append(lam * R[-1] - R[-2])
    return R


def identities(lam: float) -> dict[str, float]:
    """Residuals of the norm-table identities; all vanish at the E10 eigenvalue."""
    R = r_values(lam)
    q = lambda i, k, l: R[i] / (R[k] * R[l])
    return {
        "a": 1 / R[1] ** 2 + R[2] / R[1] ** 2 - 1,
        "b": q(5, 1, 6) + q(7, 1, 6) - 1,
        "c": 1 / R[2] + 1 / R[1] ** 2 + q(5, 1, 6) - 1,
        "d": (R[2] - 1) / R[2] + R[2] / R[1] ** 2 + q(7, 1, 6) - 2,
        "e": q(7, 2, 5) + R[1] * R[4] / (R[2] * R[5]) - 1,
        "f": q(4, 1, 3) + q(2, 1, 3) - 1,
        "g": R[6] * R[7] - R[2] * R[3] * R[4],
        "h": R[1] * R[4] * (R[5] - R[3]) - R[2] * R[6],
        "i": R[4] * R[6] - R[1] * R[2] * R[5],
        "R10-R6-R4": R[10] - R[6] - R[4],
    }


def _constants(lam: float) -> dict[str, float]:
    R = r_values(lam)
    c = {
        "s1": math.sqrt(1 / R[2]),
        "s2": math.sqrt((R[2] - 1) / R[2]),
        "s3": 1 / R[1],
        "s4": math.sqrt(R[2]) / R[1],
        "s5": math.sqrt(R[5] / (R[1] * R[6])),
        "s6": math.sqrt(R[7] / (R[1] * R[6])),
        "t1": math.sqrt(R[7] / (R[2] * R[5])),
        "t2": math.sqrt(R[1] * R[4] / (R[2] * R[5])),
        "r1": math.sqrt(R[4] / (R[1] * R[3])),
        "r2": math.sqrt(R[2] / (R[1] * R[3])),
        "m1": math.sqrt(R[3] / R[5]),
        "m2": math.sqrt(1 - R[3] / R[5]),
    }
    # complete the first column of Y inside the plane orthogonal to its fixed third row (s5, s6, 0)
    a, b = c["s1"] / c["s6"], math.sqrt(max(c["s2"] ** 2 - (c["s5"] * c["s1"] / c["s6"]) ** 2, 0.0))
    c["e"] = np.array([-c["s5"] * a, b]) / c["s2"]
    cc = c["s3"] / c["s6"]
    c["f"] = np.array([-c["s5"] * cc, -a * cc / b]) / c["s4"]
    return c


def _table(c) -> dict:
    """Blocks of u keyed by (row edge pq, column edge rs); shape mult(qs) x mult(pr)."""
    e, f = c["e"], c["f"]
    row = lambda *x: np.array([x], dtype=float)
    col = lambda *x: np.array([x], dtype=float).T
    one = row(1.0)
    return {
        ("Aa", "Ba"): one, ("Aa", "Bb"): one, ("Aa", "Bc"): one, ("Aa", "Ee"): one,
        ("Ba", "Aa"): row(c["s1"]), ("Ba", "Ba"): c["s2"] * row(*e), ("Ba", "Bb"): row(*f),
        ("Ba", "Bc"): row(c["t1"], 0.0), ("Ba", "Cc"): row(c["t2"]), ("Ba", "De"): one,
        ("Bb", "Aa"): row(c["s3"]), ("Bb", "Ba"): c["s4"] * row(*f), ("Bb", "Bb"): row(f[1], -f[0]),
        ("Bb", "Cd"): row(c["r1"]), ("Bb", "Dd"): row(c["r2"]),
        ("Bc", "Aa"): row(c["s5"]), ("Bc", "Ba"): row(c["s6"], 0.0),
        ("Bc", "Bc"): np.array([[c["t2"], 0.0], [0.0, 1.0]]), ("Bc", "Cc"): col(-c["t1"], 0.0),
        ("Bc", "Cd"): row(c["r2"]), ("Bc", "Dd"): row(-c["r1"]),
        ("Cc", "Ba"): one, ("Cc", "Bc"): col(-c["m1"], 0.0),
        ("Cc", "Cc"): np.array([[c["m2"], 0.0], [0.0, 1.0]]), ("Cc", "Cd"): row(1.0, 0.0),
        ("Cd", "Bb"): one, ("Cd", "Bc"): row(c["m2"]), ("Cd", "Cc"): row(c["m1"], 0.0), ("Cd", "Cd"): row(0.0, 1.0),
        ("Dd", "Bb"): one, ("Dd", "Bc"): row(-1.0), ("Dd", "Dd"): one,
        ("De", "Ba"): one, ("De", "De"): one,
        ("Ee", "Aa"): one, ("Ee", "Ee"): one,
    }


def e10_spec() -> SquareSpec:
    pf = spectral.e10_pf_coords()
    return poly_square(e10(), E10_COEFFS, pf.coords, pf.lam, "E10")


def build_e10() -> tuple[SquareSpec, BlockUnitaryPair]:
    s = e10_spec()
    c = _constants(spectral.e10_pf_coords().lam)
    f = UFiller(s)
    for (pq, rs), X in _table(c).items():
        p, q = pq
        r, sv = rs
        for psi in range(X.shape[0]):
            for rho in range(X.shape[1]):
                f.set(p, r, sv, q, X[psi, rho], rho=rho, psi=psi)
    return s, make_pair(s, f.u)
