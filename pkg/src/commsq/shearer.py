"""Shearer's graphs: a path P_0, P_1, ... with n_k leaves hung at P_k, for lambda > sqrt(2 + sqrt 5)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

LAMBDA_MIN = math.sqrt(2 + math.sqrt(5))
FLOOR_GUARD = 1e-12
SNAP = 1e-12  # r within this of e^{-x} is the fixed point itself


@dataclass
class ShearerState:
    lam: float
    x: float
    horizon: int
    n_seq: list[int]  # k = 0..horizon
    r_seq: list[float]  # r_seq[0] is unused (nan); r_1 = lambda
    a_seq: list[float]  # a_0 = 1
    snapped: list[int] = field(default_factory=list)  # k with r_k snapped onto e^{-x}

    @property
    def em(self) -> float:
        return math.exp(-self.x)

    @property
    def n_cap(self) -> int:
        return math.floor(self.lam * self.lam) - 2


def x_of(lam: float) -> float:
    """x > 0 with lam = e^x + e^{-x}."""
    return math.acosh(lam / 2)


def _admit(lam: float):
    if not lam > LAMBDA_MIN + 1e-9:
        raise ValueError(f"lambda must exceed sqrt(2+sqrt 5) = {LAMBDA_MIN:.12g}")


def boundary_identity_residual() -> float:
    """1/lambda + e^{-x} - e^x at lambda = sqrt(2 + sqrt 5); zero in exact arithmetic."""
    lam = LAMBDA_MIN
    x = x_of(lam)
    return 1 / lam + math.exp(-x) - math.exp(x)


def pendant_count(lam: float, r: float, em: float) -> int:
    """max{j : lam - 1/r - j/lam >= e^{-x}} with a guarded floor."""
    slack = lambda j: lam - 1 / r - j / lam - em
    j = math.floor((lam - 1 / r - em) * lam + FLOOR_GUARD)
    if slack(j + 1) >= -FLOOR_GUARD:
        j += 1
    while slack(j) < -FLOOR_GUARD:
        j -= 1
    return j


def shearer_build(lam: float, horizon: int) -> ShearerState:
    _admit(lam)
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    x = x_of(lam)
    em = math.exp(-x)
    n = [0]
    r = [math.nan, lam]
    a = [1.0, lam]
    snapped = []
    for k in range(1, horizon + 1):
        nk = pendant_count(lam, r[k], em)
        n.append(nk)
        if k == horizon:
            break
        nxt = lam - 1 / r[k] - nk / lam
        if abs(nxt - em) <= SNAP:
            nxt = em
            snapped.append(k + 1)
        r.append(nxt)
        a.append(nxt * a[-1])
    return ShearerState(lam, x, horizon, n, r, a, snapped)


# ---------------------------------------------------------------- checks

@dataclass
class ShearerReport:
    ok: bool
    worst_eigen: float  # relative residual at the path vertices
    worst_at: int
    eigen_residuals: list[float]
    cap_slack: int  # n_lambda - max n_k
    r_lower_slack: float  # min_k (r_k - e^{-x}), k >= 2
    r_upper_slack: float  # min_k (1/lambda + e^{-x} - r_k), k >= 2
    a_consistency: float  # max |a_k - r_k a_{k-1}| / a_k
    failures: list[str]


def eigen_residuals(s: ShearerState) -> list[float]:
    """Relative residual of the eigen relation at P_0 .. P_{K-1}.

    At P_k it reads a_{k-1} + a_{k+1} + n_k a_k / lam = lam a_k, divided by a_k;
    a leaf carries a_k / lam, so its own relation holds identically.
    """
    lam, n, r = s.lam, s.n_seq, s.r_seq
    out = [abs(s.a_seq[1] / s.a_seq[0] - lam)]
    for k in range(1, s.horizon):
        out.append(abs(1 / r[k] + r[k + 1] + n[k] / lam - lam))
    return out


def shearer_verify(s: ShearerState, tol: float = 1e-9) -> ShearerReport:
    lam, em = s.lam, s.em
    res = eigen_residuals(s)
    worst = max(res)
    at = res.index(worst)
    fails = []
    if worst > tol * lam:
        fails.append(f"eigen relation fails at P_{at}: {worst:.3e}")
    cap = s.n_cap - max(s.n_seq)
    if cap < 0:
        fails.append(f"n_k exceeds floor(lambda^2) - 2 = {s.n_cap}")
    if min(s.n_seq) < 0:
        fails.append("negative leaf count")
    tail = s.r_seq[2:]
    lo = min(t - em for t in tail)
    hi = min(1 / lam + em - t for t in tail)
    if lo < -FLOOR_GUARD:
        fails.append(f"r_k below e^-x by {-lo:.3e}")
    if hi < -FLOOR_GUARD:
        fails.append(f"r_k above 1/lambda + e^-x by {-hi:.3e}")
    cons = max(abs(s.a_seq[k] - s.r_seq[k] * s.a_seq[k - 1]) / s.a_seq[k] for k in range(1, len(s.a_seq)))
    if cons > tol:
        fails.append(f"a_k != r_k a_(k-1) (relative {cons:.3e})")
    return ShearerReport(not fails, worst, at, res, cap, lo, hi, cons, fails)


def epsilon(lam: float) -> float:
    x = x_of(lam)
    return 1 - (lam * math.exp(-x) * (lam * lam - 1) - 1) / lam ** 2


@dataclass
class TailReport:
    partial_sum: float  # l1 norm of xi over P_0..P_K and their leaves
    tail_bound: float  # upper bound for the whole l1 norm
    epsilon_lambda: float
    k0: int  # first k >= 2 with n_k != 0 (2 if none in the window)
    decay_ok: bool  # a_n <= (1 - eps)^{(n - k0)/2} a_k0 throughout the window
    decay_worst: float


def _weights(s: ShearerState) -> list[float]:
    return [a * (1 + n / s.lam) for a, n in zip(s.a_seq, s.n_seq)]


def tail_from(s: ShearerState, K: int, eps: float | None = None) -> float:
    """Bound on sum_{j >= K} a_j (1 + n_j/lam) from the geometric decay after k0."""
    eps = epsilon(s.lam) if eps is None else eps
    k0 = _k0(s)
    K = max(K, k0)
    q = math.sqrt(1 - eps)
    return (s.n_cap / s.lam + 1) * s.a_seq[k0] * q ** (K - k0) / (1 - q)


def _k0(s: ShearerState) -> int:
    for k in range(2, len(s.n_seq)):
        if s.n_seq[k]:
            return k
    return 2


def shearer_tail(s: ShearerState) -> TailReport:
    eps = epsilon(s.lam)
    if eps <= 0:
        raise RuntimeError(f"epsilon(lambda) = {eps} is not positive")
    k0 = _k0(s)
    w = _weights(s)
    partial = math.fsum(w)
    total = math.fsum(w[:k0]) + tail_from(s, k0, eps)
    q = math.sqrt(1 - eps)
    worst = max((s.a_seq[n] / (s.a_seq[k0] * q ** (n - k0)) for n in range(k0, len(s.a_seq))), default=0.0)
    return TailReport(partial, total, eps, k0, worst <= 1 + 1e-9, worst)


# ---------------------------------------------------------------- periodicity

@dataclass
class PeriodicityReport:
    n: int
    monotone_ok: bool  # r_{k+n} <= r_k throughout the window
    first_violation: int | None
    eventually_periodic: bool  # n_i = n_{i+n} from period_start to the end of the window
    period_start: int | None
    insufficient_data: bool
    window: int


def periodicity_scan(lam: float, n: int, horizon: int, state: ShearerState | None = None) -> PeriodicityReport:
    """Window-scoped test of the necessary condition for a degree-n polynomial square.

    Nothing here certifies behaviour beyond the horizon.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    s = state if state is not None and state.horizon >= horizon else shearer_build(lam, horizon)
    r, ns = s.r_seq[:horizon], s.n_seq[:horizon + 1]
    first = None
    for k in range(1, len(r) - n):
        if r[k + n] > r[k] + 1e-12:
            first = k
            break
    start = None
    last = len(ns) - 1 - n
    if last >= 1:
        j = last
        while j >= 1 and ns[j] == ns[j + n]:
            j -= 1
        start = j + 1 if j < last else None
    insufficient = horizon - n < 2 * n
    periodic = start is not None and (last - start + 1) >= max(2 * n, (horizon - n) // 2)
    return PeriodicityReport(n, first is None, first, periodic, start if periodic else None,
                             insufficient, horizon)


# ---------------------------------------------------------------- output

def state_csv(s: ShearerState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "n_k", "r_k", "a_k"])
    for k in range(s.horizon + 1):
        rk = "" if k == 0 or k >= len(s.r_seq) else f"{s.r_seq[k]:.12g}"
        ak = f"{s.a_seq[k]:.12g}" if k < len(s.a_seq) else ""
        w.writerow([k, s.n_seq[k], rk, ak])
    return buf.getvalue()


def _num(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    return x


def report_json(s: ShearerState, periods=()) -> str:
    v = shearer_verify(s)
    t = shearer_tail(s)
    out = {
        "lambda": _num(s.lam),
        "horizon": s.horizon,
        "verify": {"pass": v.ok, "worst_eigen": _num(v.worst_eigen), "worst_at": v.worst_at,
                   "cap_slack": v.cap_slack, "r_lower_slack": _num(v.r_lower_slack),
                   "r_upper_slack": _num(v.r_upper_slack), "failures": v.failures},
        "tail": {"partial_sum": _num(t.partial_sum), "tail_bound": _num(t.tail_bound),
                 "epsilon_lambda": _num(t.epsilon_lambda), "k0": t.k0, "decay_ok": t.decay_ok},
        "periodicity": [
            {"n": p.n, "monotone_ok": p.monotone_ok, "first_violation": p.first_violation,
             "eventually_periodic": p.eventually_periodic, "period_start": p.period_start,
             "insufficient_data": p.insufficient_data, "window": p.window}
            for p in (periodicity_scan(s.lam, n, s.horizon, s) for n in periods)
        ],
    }
    return json.dumps(out, sort_keys=True, indent=1)
