"""R_n and S_k polynomials evaluated at real points.

R_0 = 1, R_1 = t, R_{n+1} = t R_n - R_{n-1}
S_1 = t, S_2 = t^2 - 2, S_{k+1} = t S_k - S_{k-1}

For t = e^x + e^-x the R_n are sinh((n+1)x)/sinh(x), for t = 2cos(x) they are
sin((n+1)x)/sin(x) and for t = 2 they are n + 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

RAW_LIMIT = 64


@dataclass(frozen=True)
class PolyPoint:
    lam: float
    x: float | None = None
    theta: float | None = None

    @property
    def rho(self) -> float:
        if self.x is None:
            raise ValueError("rho = e^{2x} needs lambda >= 2")
        return math.exp(2.0 * self.x)


def point(lam: float) -> PolyPoint:
    """PolyPoint with the hyperbolic or trigonometric parameter filled in."""
    lam = float(lam)
    if lam >= 2.0:
        return PolyPoint(lam, x=math.acosh(lam / 2.0))
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    return PolyPoint(lam, theta=math.acos(lam / 2.0))


def from_x(x: float) -> PolyPoint:
    return PolyPoint(2.0 * math.cosh(x), x=float(x))


def _pt(p) -> PolyPoint:
    return p if isinstance(p, PolyPoint) else point(p)


def r_values(nmax: int, lam: float) -> list[float]:
    """R_0..R_nmax by the three-term recursion."""
    out = [1.0, lam]
    for _ in range(nmax - 1):
        out.append(lam * out[-1] - out[-2])
    return out[: nmax + 1]


def r_eval(n: int, p) -> float:
    if n < 0:
        raise ValueError("n must be >= 0")
    p = _pt(p)
    if n <= RAW_LIMIT:
        return r_values(n, p.lam)[n]
    if p.lam == 2.0:
        return float(n + 1)
    if p.x is not None:
        return math.sinh((n + 1) * p.x) / math.sinh(p.x)
    return math.sin((n + 1) * p.theta) / math.sin(p.theta)


def _log_r_ratio(j: int, k: int, lam: float) -> float:
    # log(R_j / R_k) via r_m = R_m / R_{m-1} = lam - 1/r_{m-1}; lam >= 2 keeps r_m > 0
    lo, hi = min(j, k), max(j, k)
    r = lam
    acc = 0.0
    for m in range(1, hi + 1):
        if m > 1:
            r = lam - 1.0 / r
        if m > lo:
            acc += math.log(r)
    return acc if j > k else -acc


def r_quotient(j: int, k: int, p) -> float:
    """R_j / R_k without forming large R_n."""
    if j < 0 or k < 0:
        raise ValueError("indices must be >= 0")
    p = _pt(p)
    if j == k:
        return 1.0
    if p.lam >= 2.0:
        return math.exp(_log_r_ratio(j, k, p.lam))
    rk = math.sin((k + 1) * p.theta) / math.sin(p.theta)
    if abs(rk) < 1e-13 * max(1.0, k):
        raise ZeroDivisionError(f"R_{k}({p.lam}) vanishes")
    return (math.sin((j + 1) * p.theta) / math.sin(p.theta)) / rk


def s_eval(k: int, p) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    p = _pt(p)
    if k > RAW_LIMIT and p.x is not None:
        return 2.0 * math.cosh(k * p.x)
    t = p.lam
    a, b = t, t * t - 2.0
    if k == 1:
        return a
    for _ in range(k - 2):
        a, b = b, t * b - a
    return b


def s_coeffs(k: int) -> list[int]:
    """Integer coefficients of S_k, lowest degree first."""
    a, b = [0, 1], [-2, 0, 1]
    if k == 1:
        return a
    for _ in range(k - 2):
        nxt = [0] + b
        for i, c in enumerate(a):
            nxt[i] -= c
        a, b = b, nxt
    return b


def r_coeffs(n: int) -> list[int]:
    a, b = [1], [0, 1]
    if n == 0:
        return a
    for _ in range(n - 1):
        nxt = [0] + b
        for i, c in enumerate(a):
            nxt[i] -= c
        a, b = b, nxt
    return b


def identity_residuals(n: int, p) -> tuple[float, float, float]:
    """Relative residuals of the three R_n identities at p.

    (a) R_n^2 - R_{n-1} R_{n+1} - 1
    (b) R_{n+2} R_{n+1} - R_{n+3} R_n - lambda
    (c) R_m R_n - sum_k R_{n-m+2k}, m = min(n, 3)
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = _pt(p)
    R = [r_eval(i, p) for i in range(n + 4)]
    a = R[n] ** 2 - R[n - 1] * R[n + 1] - 1.0
    b = R[n + 2] * R[n + 1] - R[n + 3] * R[n] - p.lam
    m = min(n, 3)
    s = sum(R[n - m + 2 * k] for k in range(m + 1))
    c = R[m] * R[n] - s
    return (
        abs(a) / max(1.0, R[n] ** 2),
        abs(b) / max(1.0, abs(R[n + 2] * R[n + 1])),
        abs(c) / max(1.0, abs(R[m] * R[n])),
    )
