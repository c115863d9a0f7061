"""Closed-form admissibility criteria for stars and the small constructive problems behind them.

Everything here works on the first-ray Perron-Frobenius coordinates alpha_i of
a star normalised to 1 at the centre, so that lambda = sum(alpha_i).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import poly, spectral

BOUNDARY = 1e-10  # slacks this close to zero count as satisfied


class ConsistencyError(RuntimeError):
    """Two independent routes to the same decision disagreed."""


@dataclass
class Infeasible:
    reason: str
    slack: float = 0.0

    def __bool__(self):
        return False


# ---------------------------------------------------------------- 4-stars

@dataclass
class FourStarData:
    alphas: tuple
    lam: float
    deltas: tuple = field(init=False)

    def __post_init__(self):
        al = [float(a) for a in self.alphas]
        if len(al) != 4 or min(al) <= 0:
            raise ValueError("need four positive alphas")
        lam = float(self.lam)
        gam = [a * a - lam * a + 1.0 for a in al]
        if min(gam) < -1e-12:
            i = int(np.argmin(gam))
            raise ValueError(f"alpha_{i + 1} out of range: alpha^2 - lambda*alpha + 1 = {gam[i]:.3e}")
        dl = [math.sqrt(max(g, 0.0)) for g in gam]
        order = sorted(range(4), key=lambda i: -dl[i])
        self.alphas = tuple(al[i] for i in order)
        self.deltas = tuple(dl[i] for i in order)
        self.lam = lam
        err = np.abs(self.moduli().sum(axis=0) - 1).max()
        if err > 1e-12 * max(1.0, lam):
            raise ValueError(f"moduli matrix is not doubly stochastic ({err:.2e}); lambda must be sum(alpha)")

    @classmethod
    def from_alphas(cls, alphas):
        return cls(tuple(alphas), float(sum(alphas)))

    @classmethod
    def from_star(cls, rays, p: poly.PolyPoint | None = None):
        if len(rays) != 4:
            raise ValueError("a 4-star has four rays")
        if p is None:
            p = spectral.star_lambda(rays)
        al = [poly.r_quotient(k - 1, k, p) for k in rays]
        d = cls(tuple(al), p.lam)
        return d

    def moduli(self) -> np.ndarray:
        a = np.array(self.alphas)
        D = np.outer(a, a)
        D[np.diag_indices(4)] = np.array(self.deltas) ** 2
        return D


@dataclass
class FourStarConditions:
    cond1: bool
    cond2: bool
    slack1: float  # delta1 - delta2 - delta3 - delta4, needs <= 0
    slack2: float  # delta1 - delta2 - delta3 + delta4, needs >= 0
    quartic: float  # sum d^4 - 2 sum d_i^2 d_j^2
    product: float  # 8 d1 d2 d3 d4


def four_star_conditions(d: FourStarData) -> FourStarConditions:
    d1, d2, d3, d4 = d.deltas
    s1 = d1 - d2 - d3 - d4
    s2 = d1 - d2 - d3 + d4
    c1 = s1 <= BOUNDARY
    c2 = s2 >= -BOUNDARY
    # symmetric form: -8P <= sum d^4 - 2 sum d_i^2 d_j^2 <= 8P
    sq = [x * x for x in d.deltas]
    q = sum(x * x for x in sq) - 2 * sum(a * b for a, b in itertools.combinations(sq, 2))
    p8 = 8 * d1 * d2 * d3 * d4
    # relative: deltas of long rays are O(1e-3) and their quartics O(1e-12)
    tol = 1e-9 * sum(sq) ** 2
    sym1 = q <= p8 + tol
    sym2 = q >= -p8 - tol
    # each quartic factors as a product with one factor per slack, so only
    # cases away from the boundary must agree
    gate = 1e-6 * max(d1, 1e-300)
    if sym1 != c1 and abs(s1) > gate:
        raise ConsistencyError(f"condition 1 disagrees with its symmetric form (slack {s1:.3e})")
    if sym2 != c2 and abs(s2) > gate:
        raise ConsistencyError(f"condition 2 disagrees with its symmetric form (slack {s2:.3e})")
    return FourStarConditions(c1, c2, s1, s2, q, p8)


def random_four_star(rng: np.random.Generator, max_tries: int = 10_000) -> FourStarData:
    """Sample alphas with sum in (2, 4/sqrt 3) and every alpha below the small root."""
    for _ in range(max_tries):
        lam = rng.uniform(2.0, 4.0 / math.sqrt(3.0))
        amax = (lam - math.sqrt(lam * lam - 4.0)) / 2.0
        a = rng.uniform(0.0, amax, size=3)
        a = np.where(a == 0.0, amax, a)
        a4 = lam - a.sum()
        if 0.0 < a4 <= amax:
            return FourStarData.from_alphas((*a.tolist(), a4))
    raise RuntimeError("rejection sampling did not produce a sample")


# ---------------------------------------------------------------- classification

@dataclass
class Classification:
    max_ray: int
    three_star_list: list
    four_star_cond1_list: list
    four_star_cond12_list: list
    slacks: dict = field(default_factory=dict)


def three_star_data(rays) -> "ThreeStarData":
    p = spectral.star_lambda(rays)
    return ThreeStarData(tuple(poly.r_quotient(k - 1, k, p) for k in rays))


def classify_stars(max_ray: int) -> Classification:
    if max_ray > 40:
        raise ValueError("window limited to max_ray <= 40")
    three, c1, c12 = [], [], []
    slacks = {}
    for rays in itertools.combinations_with_replacement(range(1, max_ray + 1), 3):
        p = spectral.star_lambda(rays)
        if p.lam <= 2.0:
            continue
        t = ThreeStarData(tuple(poly.r_quotient(k - 1, k, p) for k in rays), p.lam)
        if three_star_conditions(t).feasible:
            three.append(rays)
    for rays in itertools.combinations_with_replacement(range(1, max_ray + 1), 4):
        p = spectral.star_lambda(rays)
        if p.lam <= 2.0:
            continue
        fc = four_star_conditions(FourStarData.from_star(rays, p))
        slacks[rays] = (fc.slack1, fc.slack2)
        if fc.cond1:
            c1.append(rays)
            if fc.cond2:
                c12.append(rays)
    return Classification(max_ray, three, c1, c12, slacks)


# ---------------------------------------------------------------- 3x3 unitary

def _check_doubly_stochastic(D: np.ndarray, tol: float = 1e-10):
    D = np.asarray(D, dtype=float)
    if (D < -tol).any():
        raise ValueError("negative entry in moduli matrix")
    err = max(np.abs(D.sum(axis=0) - 1).max(), np.abs(D.sum(axis=1) - 1).max())
    if err > tol:
        raise ValueError(f"moduli matrix is not doubly stochastic ({err:.2e})")
    return np.clip(D, 0.0, None)


def _close_triangle(a: float, b: float, c: float) -> tuple[complex, complex]:
    """Unit phases p, q with a + b p + c q = 0 (a, b, c sides of a triangle)."""
    if a > 0 and b > 0:
        cos2 = np.clip((c * c - a * a - b * b) / (2 * a * b), -1.0, 1.0)
        p = complex(cos2, math.sqrt(1.0 - cos2 * cos2))
        q = -(a + b * p) / c if c > 0 else 1.0 + 0j
        return p, q / abs(q)
    if a > 0:  # b = 0, so c = a
        return 1.0 + 0j, -1.0 + 0j
    return -1.0 + 0j, 1.0 + 0j


def unitary_with_moduli3(D) -> np.ndarray | Infeasible:
    """3x3 unitary u with |u_ij|^2 = D_ij, or the violated triangle inequality."""
    D = _check_doubly_stochastic(np.asarray(D, dtype=float))
    sides = np.sqrt(D[0] * D[1])
    for i in range(3):
        others = sides.sum() - sides[i]
        if sides[i] - others > 1e-12:
            return Infeasible(f"triangle inequality fails for side {i + 1}", float(others - sides[i]))
    p, q = _close_triangle(*sides)
    r1 = np.sqrt(D[0]).astype(complex)
    r2 = np.sqrt(D[1]) * np.array([1.0, p, q])
    r3 = np.conj(np.cross(r1, r2))
    if abs(r3[0]) > 0:
        r3 *= abs(r3[0]) / r3[0]
    return np.vstack([r1, r2, r3])


# ---------------------------------------------------------------- Gram problem in C^2

@dataclass
class GramResult:
    vectors: np.ndarray  # 2 x 3, column j is xi_j
    r: float
    det_margin: float
    psd_margin: float


def q_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    d = np.diag(A)
    Q = 2 * A * A - np.outer(d, d)
    Q[np.diag_indices(3)] = d * d
    return Q


def q_map(x) -> np.ndarray:
    """Real 3-vector of sqrt2 (x x* - |x|^2/2) in the normalised Pauli basis."""
    x = np.asarray(x, dtype=complex)
    a, b = x
    return np.array([2 * (np.conj(a) * b).real, 2 * (np.conj(a) * b).imag, abs(a) ** 2 - abs(b) ** 2])


def _gram_margins(A: np.ndarray) -> tuple[float, float]:
    d = np.diag(A)
    scale = max(float(d.sum()), 1e-300)
    off = A[0, 1] * A[0, 2] * A[1, 2]
    x = d.prod() - d[0] * A[1, 2] ** 2 - d[1] * A[0, 2] ** 2 - d[2] * A[0, 1] ** 2
    det_a, det_ap = x + 2 * off, x - 2 * off
    cs = min(d[i] * d[j] - A[i, j] ** 2 for i, j in ((0, 1), (0, 2), (1, 2)))
    m1 = min(det_a / scale ** 3, -det_ap / scale ** 3, cs / scale ** 2, d.min() / scale)
    Q = q_matrix(A)
    w = np.linalg.eigvalsh(Q)
    m2 = float(w[0] / max(float(np.trace(Q)), 1e-300))
    return float(m1), m2


def gram_vectors_c2(A, tol: float = 1e-10) -> GramResult | Infeasible:
    """Vectors xi_1..3 in C^2 with |(xi_i, xi_j)| = A_ij, decided by two independent criteria."""
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3) or not np.allclose(A, A.T) or (A < -tol).any():
        raise ValueError("need a symmetric nonnegative 3x3 matrix")
    A = np.clip(A, 0.0, None)
    m1, m2 = _gram_margins(A)
    ok1, ok2 = m1 >= -tol, m2 >= -tol
    if ok1 != ok2 and max(abs(m1), abs(m2)) > 1e-7:
        raise ConsistencyError(f"determinant criterion ({m1:.3e}) and Q(A) criterion ({m2:.3e}) disagree")
    if not ok1:
        return Infeasible("determinant criterion fails", m1)
    d = np.diag(A)
    off = A[0, 1] * A[0, 2] * A[1, 2]
    x = d.prod() - d[0] * A[1, 2] ** 2 - d[1] * A[0, 2] ** 2 - d[2] * A[0, 1] ** 2
    r = 1.0 if off == 0 else float(np.clip(-x / (2 * off), -1.0, 1.0))
    g = complex(r, math.sqrt(max(0.0, 1.0 - r * r)))
    B = A.astype(complex)
    B[1, 2] = g * A[1, 2]
    B[2, 1] = np.conj(g) * A[1, 2]
    w, V = np.linalg.eigh(B)
    w = np.clip(w[1:], 0.0, None)
    X = np.sqrt(w)[:, None] * V[:, 1:].conj().T
    G = X.conj().T @ X
    err = np.abs(np.abs(G) - A).max()
    if err > 1e-9 * max(1.0, float(d.max())):
        raise ConsistencyError(f"Gram construction missed the targets by {err:.2e}")
    return GramResult(X, r, m1, m2)


# ---------------------------------------------------------------- nine vectors

@dataclass
class ThreeStarData:
    alphas: tuple
    lam: float | None = None

    def __post_init__(self):
        if len(self.alphas) != 3 or min(self.alphas) <= 0:
            raise ValueError("need three positive alphas")
        self.alphas = tuple(float(a) for a in self.alphas)
        s = sum(self.alphas)
        if self.lam is not None and abs(self.lam - s) > 1e-9 * s:
            raise ValueError("lambda must equal the sum of the alphas")
        self.lam = s

    @property
    def gammas(self) -> tuple:
        return tuple(a * a - self.lam * a + 1 for a in self.alphas)

    @property
    def deltas(self) -> tuple:
        return tuple(math.sqrt(g) if g >= 0 else math.nan for g in self.gammas)


@dataclass
class ThreeStarConditions:
    feasible: bool
    violated: str | None
    slack_i: float
    slack_ii: float
    slack_iii: float


def three_star_conditions(t: ThreeStarData, tol: float = BOUNDARY) -> ThreeStarConditions:
    a1, a2, a3 = t.alphas
    lam = t.lam
    si = min(lam * a - 1 for a in t.alphas)
    sii = min(t.gammas)
    siii = 4 * lam * a1 * a2 * a3 - 4 * (a1 * a2 + a1 * a3 + a2 * a3) + 3
    violated = None
    for name, s in (("(i)", si), ("(ii)", sii), ("(iii)", siii)):
        if s < -tol:
            violated = name
            break
    return ThreeStarConditions(violated is None, violated, si, sii, siii)


@dataclass
class NineVectors:
    e: np.ndarray  # shape (3, 3, 2); e[i, j] is e_{i+1, j+1}
    data: ThreeStarData
    route: str
    residuals: dict


def nine_vector_residuals(e: np.ndarray, t: ThreeStarData) -> dict:
    lam, al = t.lam, t.alphas
    out = {"a": 0.0, "b": 0.0, "c": 0.0, "d": 0.0}
    eye = np.eye(2)
    for i in range(3):
        out["a"] = max(out["a"], abs(np.vdot(e[i, i], e[i, i]).real - (lam - al[i]) * (lam * al[i] - 1)))
        for j in range(3):
            if i != j:
                tgt = al[i] + al[j] - lam * al[i] * al[j]
                out["b"] = max(out["b"], abs(np.vdot(e[i, j], e[i, j]).real - tgt))
        row = sum(np.outer(e[i, j], e[i, j].conj()) for j in range(3))
        col = sum(np.outer(e[j, i], e[j, i].conj()) for j in range(3))
        out["c"] = max(out["c"], np.abs(row - al[i] * eye).max())
        out["d"] = max(out["d"], np.abs(col - al[i] * eye).max())
    return {k: float(v) for k, v in out.items()}


def _nine_small(t: ThreeStarData) -> np.ndarray:
    lam = t.lam
    a1, a2, a3 = t.alphas
    th = math.acos(min(1.0, lam / 2.0))
    w = complex(math.cos(th), math.sin(th))
    wb = w.conjugate()
    s = math.sqrt
    p = s(a1 * a2 * a3)
    E = np.zeros((3, 3, 3), dtype=complex)
    E[0, 0] = s(max(lam * a1 - 1, 0) / lam) * np.array([lam - a1, -s(a1 * a2), -s(a1 * a3)])
    E[1, 1] = s(max(lam * a2 - 1, 0) / lam) * np.array([-s(a1 * a2), lam - a2, -s(a2 * a3)])
    E[2, 2] = s(max(lam * a3 - 1, 0) / lam) * np.array([-s(a1 * a3), -s(a2 * a3), lam - a3])
    E[0, 1] = [s(a2) * (a1 - w), s(a1) * (a2 - wb), p]
    E[0, 2] = [s(a3) * (a1 - w), p, s(a1) * (a3 - wb)]
    E[1, 2] = [p, s(a3) * (a2 - w), s(a2) * (a3 - wb)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        E[j, i] = E[i, j].conj()
    xi = np.sqrt(np.array(t.alphas)) / math.sqrt(lam)
    # orthonormal basis of the complement of xi, real so conjugation commutes with it
    Q, _ = np.linalg.qr(np.column_stack([xi, np.eye(3)[:, :2]]))
    W = Q[:, 1:3]
    return np.einsum("ka,ijk->ija", W, E)


def _complete(x1: np.ndarray, x2: np.ndarray, c: float) -> np.ndarray:
    """Third row of a 3x3 matrix with orthogonal rows of squared norm c, first two rows extending x1, x2."""
    n1 = max(c - np.vdot(x1, x1).real, 0.0)
    n2 = max(c - np.vdot(x2, x2).real, 0.0)
    ip = np.vdot(x1, x2)
    x23 = -math.sqrt(n2)
    if n2 > 0:
        x13 = np.conj(ip) / math.sqrt(n2)
    else:
        x13 = math.sqrt(n1)
    y1 = np.append(x1, x13)
    y2 = np.append(x2, x23)
    y3 = np.conj(np.cross(y1, y2))
    nrm = np.linalg.norm(y3)
    if nrm == 0:
        raise ConsistencyError("degenerate completion")
    return (math.sqrt(c) * y3 / nrm)[:2]


def _nine_large(t: ThreeStarData) -> np.ndarray | Infeasible:
    lam = t.lam
    al = t.alphas
    A = np.zeros((3, 3))
    for i in range(3):
        j, k = [x for x in range(3) if x != i]
        A[i, i] = al[j] + al[k] - lam * al[j] * al[k]
        A[j, k] = A[k, j] = math.sqrt(al[j] * al[k]) * (lam * al[i] - 1)
    g = gram_vectors_c2(A)
    if not g:
        return g
    xi = g.vectors
    e = np.zeros((3, 3, 2), dtype=complex)
    for i in range(3):
        j, k = [x for x in range(3) if x != i]
        e[j, k] = e[k, j] = xi[:, i]
    for i in range(3):
        j, k = [x for x in range(3) if x != i]
        e[i, i] = _complete(e[i, j], e[i, k], al[i])
    return e


def nine_vectors(t: ThreeStarData, tol: float = 1e-9) -> NineVectors | Infeasible:
    """Nine vectors e_ij in C^2 with prescribed norms and row/column sums alpha_i Id."""
    cond = three_star_conditions(t)
    if not cond.feasible:
        slack = {"(i)": cond.slack_i, "(ii)": cond.slack_ii, "(iii)": cond.slack_iii}[cond.violated]
        return Infeasible(f"condition {cond.violated} fails", slack)
    if t.lam <= 2.0:
        e, route = _nine_small(t), "explicit"
    else:
        e, route = _nine_large(t), "gram"
        if isinstance(e, Infeasible):
            raise ConsistencyError(f"conditions hold but the Gram problem is infeasible: {e.reason}")
    res = nine_vector_residuals(e, t)
    if max(res.values()) > tol:
        raise ConsistencyError(f"nine vectors miss their targets: {res}")
    return NineVectors(e, t, route, res)


# ---------------------------------------------------------------- 4x4 unitaries

@dataclass
class FourStarUnitary:
    u: np.ndarray  # 4x4 (scalar) or 8x8 (2x2 cells)
    kind: str  # "scalar" or "block"
    t: float = 0.0
    theta: float | None = None


def _phase_normalise(u: np.ndarray) -> np.ndarray:
    u = u.copy()
    for j in range(u.shape[1]):
        if abs(u[0, j]) > 1e-14:
            u[:, j] *= abs(u[0, j]) / u[0, j]
    for i in range(1, u.shape[0]):
        if abs(u[i, 0]) > 1e-14:
            u[i, :] *= abs(u[i, 0]) / u[i, 0]
    return u


def _root(f, lo, hi, flo, fhi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _shift_signs(dl) -> tuple[float, tuple] | None:
    """t in [0, delta_4^2] and signs with sum(+-sqrt(delta_i^2 - t)) = 0."""
    sq = [x * x for x in dl]
    top = sq[3]

    def h(signs, t):
        return sum(s * math.sqrt(max(q - t, 0.0)) for s, q in zip(signs, sq))

    for signs in itertools.product((1, -1), repeat=3):
        signs = (1,) + signs
        a, b = h(signs, 0.0), h(signs, top)
        if abs(a) <= BOUNDARY:
            return 0.0, signs
        if abs(b) <= BOUNDARY:
            return top, signs
        if (a > 0) != (b > 0):
            return _root(lambda t: h(signs, t), 0.0, top, a, b), signs
    return None


def _selfadjoint_v(a: np.ndarray, eps: np.ndarray) -> np.ndarray | None:
    """Selfadjoint unitary, trace 0, |v_ij|^2 = a_i a_j off the diagonal and v_ii = eps_i."""
    if np.abs(eps).max() <= 1e-13:
        v = np.array([[0, 1, 1, 1], [1, 0, 1j, -1j], [1, -1j, 0, 1j], [1, 1j, -1j, 0]]) / math.sqrt(3)
        return v
    for perm in itertools.permutations(range(4)):
        if perm[0] > perm[1] or perm[2] > perm[3]:
            continue
        e = eps[list(perm)]
        x = a[list(perm)]
        s = e[0] + e[1]
        if abs(s) <= 1e-13:
            continue
        cphi = (x[3] ** 2 - x[2] ** 2 - s * s) / (2 * s * x[2])
        if abs(cphi) > 1 + 1e-12:
            continue
        cphi = float(np.clip(cphi, -1, 1))
        sig = complex(cphi, math.sqrt(1 - cphi * cphi))
        tau = -(s + x[2] * sig) / x[3]
        A = np.array([[e[0], math.sqrt(x[0] * x[1])], [math.sqrt(x[0] * x[1]), e[1]]], dtype=complex)
        C = np.array([[math.sqrt(x[0] * x[2]), math.sqrt(x[1] * x[2]) * sig],
                      [math.sqrt(x[0] * x[3]), math.sqrt(x[1] * x[3]) * tau]])
        Bm = C.conj().T
        if abs(np.linalg.det(Bm)) < 1e-13:
            continue
        Dm = -np.linalg.solve(Bm, A @ Bm)
        vp = np.block([[A, Bm], [C, Dm]])
        v = np.zeros((4, 4), dtype=complex)
        idx = np.array(perm)
        v[np.ix_(idx, idx)] = vp
        tgt = np.outer(a, a)
        tgt[np.diag_indices(4)] = eps ** 2
        if np.abs(v @ v.conj().T - np.eye(4)).max() < 1e-9 and np.abs(np.abs(v) ** 2 - tgt).max() < 1e-9:
            return v
    return None


def four_star_scalar(d: FourStarData) -> FourStarUnitary | Infeasible:
    found = _shift_signs(d.deltas)
    if found is None:
        return Infeasible("no shift t with a zero signed sum of the shifted deltas")
    t, signs = found
    c = math.sqrt(1.0 - t)
    a = np.array(d.alphas) / c
    eps = np.array([s * math.sqrt(max(x * x - t, 0.0)) for s, x in zip(signs, d.deltas)]) / c
    v = _selfadjoint_v(a, eps)
    if v is None:
        raise ConsistencyError("shift found but the selfadjoint completion failed")
    u = _phase_normalise(c * v + 1j * math.sqrt(t) * np.eye(4))
    _check_unitary(u, d.moduli(), 1)
    return FourStarUnitary(u, "scalar", t)


# quaternion a + bi + cj + dk as [[a+bi, c+di], [-c+di, a-bi]]
def quat(a, b=0.0, c=0.0, d=0.0) -> np.ndarray:
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def cell_norms(U: np.ndarray, k: int = 2) -> np.ndarray:
    n = U.shape[0] // k
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = np.linalg.norm(U[k * i:k * i + k, k * j:k * j + k]) / math.sqrt(k)
    return out


def _check_unitary(U: np.ndarray, D: np.ndarray, k: int, tol: float = 1e-9):
    err = np.abs(U.conj().T @ U - np.eye(U.shape[0])).max()
    mods = cell_norms(U, k) ** 2 if k > 1 else np.abs(U) ** 2
    merr = np.abs(mods - D).max()
    if err > tol or merr > tol:
        raise ConsistencyError(f"constructed unitary fails (unitarity {err:.2e}, moduli {merr:.2e})")


def _block_attempt(al: np.ndarray, dl: np.ndarray, theta: float):
    s = dl[0] + dl[1]
    h = (al[3] ** 2 - al[2] ** 2 - s * s) / (2 * al[2] * s)
    if abs(h) > 1 + 1e-12:
        return None
    h = float(np.clip(h, -1, 1))
    w = math.sqrt(1 - h * h)
    sig = quat(h, w)
    sigp = quat(h, -w * math.cos(theta), -w * math.sin(theta))
    one = quat(1.0)
    tau = -(s * one + al[2] * sig) / al[3]
    taup = -(s * one + al[2] * sigp) / al[3]
    r = np.sqrt
    A = np.block([[dl[0] * one, r(al[0] * al[1]) * one], [r(al[0] * al[1]) * one, dl[1] * one]])
    C = np.block([[r(al[0] * al[2]) * one, r(al[1] * al[2]) * sig], [r(al[0] * al[3]) * one, r(al[1] * al[3]) * tau]])
    B = np.block([[r(al[0] * al[2]) * one, r(al[0] * al[3]) * one], [r(al[1] * al[2]) * sigp, r(al[1] * al[3]) * taup]])
    Dm = -np.linalg.solve(C.conj().T, A.conj().T @ B)
    return np.block([[A, B], [C, Dm]])


def _kappa(U, al):
    return float(np.linalg.norm(U[6, 4:6]) ** 2 - al[2] * al[3])


def four_star_block(d: FourStarData) -> FourStarUnitary | Infeasible:
    """Quaternion-valued 4x4 unitary with |u_ij|^2 = D_ij, embedded as 8x8 complex."""
    dl = np.array(d.deltas)
    al = np.array(d.alphas)
    D = d.moduli()
    if dl.min() <= 1e-13:
        sc = four_star_scalar(d)
        if not sc:
            return Infeasible("scalar fallback failed: " + sc.reason)
        return FourStarUnitary(np.kron(sc.u, np.eye(2)), "block", sc.t)
    k0 = None
    for pair in ((2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1)):
        rest = [i for i in range(4) if i not in pair]
        if dl[list(pair)].sum() > dl[rest].sum() + 1e-12:
            continue
        for last2 in (tuple(rest), tuple(rest[::-1])):
            perm = list(pair) + list(last2)
            a, dd = al[perm], dl[perm]
            U0 = _block_attempt(a, dd, 0.0)
            Upi = _block_attempt(a, dd, math.pi)
            if U0 is None or Upi is None:
                continue
            k0, kpi = _kappa(U0, a), _kappa(Upi, a)
            if k0 < -1e-10:
                continue
            if kpi > 1e-10:
                raise ConsistencyError(f"kappa does not change sign ({k0:.3e}, {kpi:.3e})")
            if abs(k0) <= 1e-12:
                th = 0.0
            else:
                th = _root(lambda x: _kappa(_block_attempt(a, dd, x), a), 0.0, math.pi, k0, kpi)
            Up = _block_attempt(a, dd, th)
            U = np.zeros((8, 8), dtype=complex)
            idx = np.array([[2 * p, 2 * p + 1] for p in perm]).ravel()
            U[np.ix_(idx, idx)] = Up
            _check_unitary(U, D, 2)
            return FourStarUnitary(U, "block", 0.0, th)
    return Infeasible("kappa(0) < 0 for every pairing (condition 1 fails)")


def four_star_unitary(d: FourStarData, mode: str = "auto") -> FourStarUnitary | Infeasible:
    """mode 'auto' tries the scalar route and falls back to 2x2 quaternion cells."""
    if mode == "scalar":
        return four_star_scalar(d)
    if mode == "block":
        return four_star_block(d)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    sc = four_star_scalar(d)
    return sc if sc else four_star_block(d)


# ---------------------------------------------------------------- T(1,4,inf) vectors

@dataclass
class VectorFeasibility:
    feasible: bool
    diff: float  # |b^2 - d^2|
    ac: float
    slack_first: float  # ac - |b^2 - d^2|
    slack_second: float  # b^2 + d^2 - (a^2 + c^2)/2


def t14_vector_feasible(a: float, b: float, c: float, d: float) -> VectorFeasibility:
    if min(a, b, c, d) < 0:
        raise ValueError("inputs must be nonnegative")
    diff = abs(b * b - d * d)
    s1 = a * c - diff
    s2 = b * b + d * d - 0.5 * (a * a + c * c)
    return VectorFeasibility(s1 >= -BOUNDARY and s2 >= -BOUNDARY, diff, a * c, s1, s2)
