import math

import pytest

from commsq import shearer as sh


@pytest.fixture(scope="module")
def s21():
    return sh.shearer_build(2.1, 500)


def test_cap(s21):
    assert s21.n_cap == 2
    assert max(s21.n_seq) <= 2 and min(s21.n_seq) >= 0


def test_boundary_identity():
    assert abs(sh.boundary_identity_residual()) <= 1e-12
    with pytest.raises(ValueError):
        sh.shearer_build(sh.LAMBDA_MIN, 50)
    with pytest.raises(ValueError):
        sh.shearer_build(2.0, 50)


@pytest.mark.parametrize("j", [4, 5, 7])
def test_eventually_zero(j):
    # lam = sqrt(j) + 1/sqrt(j) puts r_2 on e^{-x} after j leaves at P_1
    lam = math.sqrt(j) + 1 / math.sqrt(j)
    s = sh.shearer_build(lam, 100)
    assert s.n_seq[1] == j and not any(s.n_seq[2:])
    em = math.exp(-s.x)
    assert all(abs(r - em) <= 1e-10 for r in s.r_seq[3:])
    assert sh.shearer_verify(s).ok


@pytest.mark.parametrize("lam", [2.06, 2.2])
def test_verify_passes(lam):
    r = sh.shearer_verify(sh.shearer_build(lam, 200))
    assert r.ok, r.failures
    assert r.r_lower_slack >= -1e-12 and r.r_upper_slack >= -1e-12


def test_tamper_localised():
    s = sh.shearer_build(2.1, 200)
    s.r_seq[50] *= 1.001
    res = sh.eigen_residuals(s)
    bad = [k for k, v in enumerate(res) if v > 1e-9]
    assert bad and set(bad) <= {49, 50, 51}
    assert not sh.shearer_verify(s).ok


def test_a_consistency_catches_tamper():
    s = sh.shearer_build(2.1, 100)
    s.a_seq[40] *= 1.01
    r = sh.shearer_verify(s)
    assert not r.ok and r.a_consistency > 1e-3


def test_epsilon():
    assert sh.epsilon(2.06) > 0
    near = sh.epsilon(sh.LAMBDA_MIN + 1e-4)
    assert 0 < near < sh.epsilon(2.06)
    assert abs(sh.epsilon(sh.LAMBDA_MIN)) <= 1e-12


def test_partial_sums_within_tail():
    lam = 2.1
    sums = {K: sh.shearer_tail(sh.shearer_build(lam, K)).partial_sum for K in (100, 200, 400)}
    bound = sh.tail_from(sh.shearer_build(lam, 100), 100)
    assert abs(sums[200] - sums[100]) <= bound
    assert abs(sums[400] - sums[100]) <= bound
    t = sh.shearer_tail(sh.shearer_build(lam, 400))
    assert t.partial_sum <= t.tail_bound and t.decay_ok


def test_periodicity_eventually_zero():
    lam = 2.5
    for n in (1, 2, 3):
        p = sh.periodicity_scan(lam, n, 200)
        assert p.eventually_periodic and p.period_start is not None and p.period_start <= 2
        assert p.monotone_ok


def test_periodicity_generic():
    s = sh.shearer_build(2.11, 2000)
    for n in range(1, 9):
        p = sh.periodicity_scan(2.11, n, 2000, state=s)
        assert not p.monotone_ok


def test_periodicity_degenerate_window():
    p = sh.periodicity_scan(2.1, 50, 50)
    assert p.insufficient_data
    with pytest.raises(ValueError):
        sh.periodicity_scan(2.1, 0, 50)


def test_csv_and_json(s21):
    text = sh.state_csv(sh.shearer_build(2.1, 5))
    lines = text.splitlines()
    assert lines[0] == "k,n_k,r_k,a_k" and len(lines) == 7
    assert lines[1].split(",")[2] == ""
    import json
    d = json.loads(sh.report_json(s21, [1, 2]))
    assert d["verify"]["pass"] and len(d["periodicity"]) == 2


def test_pendant_count_guard():
    lam = 2.5
    em = 0.5
    # r = lam exactly: lam - 1/lam - 4/lam = 0.5 = em
    assert sh.pendant_count(lam, lam, em) == 4
