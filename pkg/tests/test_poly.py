import math
import random

import pytest

from commsq import poly


def test_r_small_values():
    assert poly.r_eval(0, 7.3) == 1.0
    assert poly.r_eval(3, 2.0) == 4.0
    assert poly.r_eval(2, 2.5) == pytest.approx(5.25, abs=1e-14)


@pytest.mark.parametrize("n", [1, 5, 40, 63, 64, 65, 120])
def test_r_at_two_is_n_plus_one(n):
    assert poly.r_eval(n, 2.0) == pytest.approx(n + 1, rel=1e-12)


@pytest.mark.parametrize("lam", [0.7, 1.3, 1.9, 2.0, 2.05, 2.5, 3.7])
def test_r_closed_form_matches_recursion(lam):
    p = poly.point(lam)
    for n in range(0, 30):
        if p.x is not None and p.x > 0:
            ref = math.sinh((n + 1) * p.x) / math.sinh(p.x)
        elif p.theta is not None:
            ref = math.sin((n + 1) * p.theta) / math.sin(p.theta)
        else:
            ref = n + 1
        assert poly.r_eval(n, p) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_r_large_n_uses_closed_form():
    p = poly.point(2.1)
    ref = math.sinh(101 * p.x) / math.sinh(p.x)
    assert poly.r_eval(100, p) == pytest.approx(ref, rel=1e-12)


def test_r_negative_index_rejected():
    with pytest.raises(ValueError):
        poly.r_eval(-1, 2.0)


def test_point_rejects_nonpositive():
    with pytest.raises(ValueError):
        poly.point(0.0)
    with pytest.raises(ValueError):
        poly.point(1.5).rho


@pytest.mark.parametrize("n", [1, 4, 17])
def test_quotient_at_two(n):
    assert poly.r_quotient(n - 1, n, 2.0) == pytest.approx(n / (n + 1), rel=1e-13)


def test_quotient_identity_case():
    assert poly.r_quotient(2, 2, 2.3) == 1.0


@pytest.mark.parametrize("m", [1, 2, 5])
def test_quotient_limit(m):
    p = poly.point(2.2)
    assert poly.r_quotient(200, 200 + m, p) == pytest.approx(math.exp(-m * p.x), abs=1e-8)


def test_quotient_huge_indices_finite():
    q = poly.r_quotient(5000, 5001, 3.0)
    assert math.isfinite(q) and 0 < q < 1


def test_quotient_matches_plain_division():
    for lam in (2.0, 2.3, 3.1):
        for j in range(12):
            for k in range(12):
                ref = poly.r_eval(j, lam) / poly.r_eval(k, lam)
                assert poly.r_quotient(j, k, lam) == pytest.approx(ref, rel=1e-12)


def test_quotient_trig_zero_denominator():
    # R_2(1) = 0
    with pytest.raises(ZeroDivisionError):
        poly.r_quotient(1, 2, 1.0)


def test_s_values():
    assert poly.s_eval(1, 1.7) == pytest.approx(1.7)
    assert poly.s_eval(2, 2.0) == pytest.approx(2.0)


def test_s4_polynomial():
    rng = random.Random(5)
    for _ in range(100):
        t = rng.uniform(-3, 3) if rng.random() < 0.5 else rng.uniform(0.1, 3)
        if t <= 0:
            continue
        assert poly.s_eval(4, t) == pytest.approx(t ** 4 - 4 * t ** 2 + 2, abs=1e-10)
    assert poly.s_coeffs(4) == [2, 0, -4, 0, 1]


def test_s_large_k_hyperbolic():
    p = poly.point(2.3)
    assert poly.s_eval(80, p) == pytest.approx(2 * math.cosh(80 * p.x), rel=1e-12)


def test_r_coeffs_match_eval():
    for n in range(8):
        c = poly.r_coeffs(n)
        for t in (0.5, 2.0, 2.7):
            assert sum(a * t ** i for i, a in enumerate(c)) == pytest.approx(poly.r_eval(n, t), rel=1e-12)


@pytest.mark.parametrize("n,lam,tol", [(1, 2.1, 1e-12), (10, 2.01980, 1e-9), (1, 2.0, 0.0), (6, 2.0, 0.0)])
def test_identities(n, lam, tol):
    a, b, c = poly.identity_residuals(n, lam)
    assert max(a, b, c) <= tol
