import math

import mpmath
import numpy as np
import pytest
from scipy import integrate as sint

from kgewi.grid import build_grid
from kgewi.weights import (
    MAX_MOMENT,
    SERIES_THRESHOLD,
    _recurrence,
    _series,
    build_weight_table,
    mode_frequencies,
    moment_integrals,
    scaled_moments,
)
from oracles import closed_forms, quad_moments


def scaled_quad(x, m):
    """``s_m, c_m`` as integrals over the unit interval."""
    kw = dict(epsabs=1e-15, epsrel=1e-14, limit=500)
    s = sint.quad(lambda y: y**m * np.sin(x * (1 - y)), 0, 1, **kw)[0]
    c = sint.quad(lambda y: y**m * np.cos(x * (1 - y)), 0, 1, **kw)[0]
    return s, c


def test_mode_frequencies():
    g = build_grid(-32, 32, 64)
    assert mode_frequencies(g, 1.0)[0] == 1.0
    assert mode_frequencies(g, 0.5)[0] == 4.0
    w = mode_frequencies(g, 0.1)
    assert w[1] == pytest.approx(math.sqrt(0.01 * (math.pi / 32) ** 2 + 1) / 0.01, rel=1e-15)
    assert np.all(w >= 100.0 * (1 - 1e-15))
    assert w[g.mode(-5)] == w[g.mode(5)]
    with pytest.raises(ValueError):
        mode_frequencies(g, 0.0)


def test_s0_at_pi():
    mt = moment_integrals(math.pi, 1.0, 0)
    assert mt.S[0] == pytest.approx(2 / math.pi, rel=1e-15)


def test_tau_zero():
    mt = moment_integrals(2.0, 0.0)
    assert not mt.S.any() and not mt.C.any()


def test_single_case_against_quadrature():
    S, C = quad_moments(3.7, 0.25, 4)
    mt = moment_integrals(3.7, 0.25, 4)
    assert np.max(np.abs(mt.S - S)) < 1e-12
    assert np.max(np.abs(mt.C - C)) < 1e-12


def test_random_moments_against_quadrature():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(40):
        x = 10 ** rng.uniform(-8, 1)
        s, c = scaled_moments(x, MAX_MOMENT)
        for m in range(MAX_MOMENT + 1):
            qs, qc = scaled_quad(x, m)
            worst = max(worst, abs(s[m, 0] - qs), abs(c[m, 0] - qc))
    assert worst < 1e-12


def test_unscaled_against_mpmath():
    from oracles import mp_moments

    for omega, tau in [(4.0, 0.1), (1e3, 0.01), (400.0, 1.25e-3), (1.0, 1e-6)]:
        S, C = mp_moments(omega, tau)
        mt = moment_integrals(omega, tau)
        scale = tau ** np.arange(1, MAX_MOMENT + 2)
        assert np.max(np.abs((mt.S - S) / scale)) < 1e-14
        assert np.max(np.abs((mt.C - C) / scale)) < 1e-14


@pytest.mark.parametrize("x", [1e-2, 0.1, 0.7, 1.5, 2.5, 10.0, 150.0])
def test_closed_forms(x):
    omega, tau = 3.0, x / 3.0
    mt = moment_integrals(omega, tau, 2)
    S1, C1, S2, C2 = closed_forms(omega, tau)
    for got, want in [(mt.S[1], S1), (mt.C[1], C1), (mt.S[2], S2), (mt.C[2], C2)]:
        assert got == pytest.approx(want, rel=1e-13)


def test_series_and_recurrence_agree_at_threshold():
    x = np.array([SERIES_THRESHOLD * (1 - 1e-12), SERIES_THRESHOLD, 3.0])
    s1, c1 = _series(x, MAX_MOMENT)
    s2, c2 = _recurrence(x, MAX_MOMENT)
    assert np.max(np.abs(s1 - s2)) < 1e-13
    assert np.max(np.abs(c1 - c2)) < 1e-13


def test_moment_bounds():
    rng = np.random.default_rng(5)
    for _ in range(50):
        omega, tau = 10 ** rng.uniform(-1, 4), 10 ** rng.uniform(-4, 0)
        mt = moment_integrals(omega, tau)
        bound = tau ** np.arange(1, 8) / np.arange(1, 8)
        assert np.all(np.abs(mt.S) <= bound * (1 + 1e-12))
        assert np.all(np.abs(mt.C) <= bound * (1 + 1e-12))
        assert mt.S[0] >= 0


@pytest.mark.parametrize("omega", [1e3, 1e6])
def test_high_frequency_bound(omega):
    tau = 0.3
    mt = moment_integrals(omega, tau)
    m = np.arange(MAX_MOMENT + 1)
    assert np.all(np.abs(mt.S) <= 2 * tau**m / omega)


def test_tau_derivatives():
    omega, tau, h = 2.3, 0.7, 1e-6
    dS = (moment_integrals(omega, tau + h).S[0] - moment_integrals(omega, tau - h).S[0]) / (2 * h)
    dC = (moment_integrals(omega, tau + h).C[0] - moment_integrals(omega, tau - h).C[0]) / (2 * h)
    assert dS == pytest.approx(math.sin(omega * tau), abs=1e-6)
    assert dC == pytest.approx(math.cos(omega * tau), abs=1e-6)


def test_negative_tau_parity():
    s, c = scaled_moments(np.array([0.3, 5.0]))
    sn, cn = scaled_moments(np.array([-0.3, -5.0]))
    assert np.array_equal(sn, -s)
    assert np.array_equal(cn, c)
    S, C = quad_moments(2.0, -0.4)
    mt = moment_integrals(2.0, -0.4)
    assert np.max(np.abs(mt.S - S)) < 1e-13 and np.max(np.abs(mt.C - C)) < 1e-13


def test_moment_errors():
    with pytest.raises(ValueError):
        moment_integrals(0.0, 1.0)
    with pytest.raises(ValueError):
        scaled_moments(1.0, MAX_MOMENT + 1)


def test_fourth_order_main_weights_closed_form():
    g = build_grid(-32, 32, 64)
    eps, tau = 0.5, 0.1
    wt = build_weight_table(g, eps, tau, 4)
    assert sorted(wt.main) == [0, 2] and sorted(wt.first) == [0, 1, 2]
    for k in (0, 1, 7, 31, 32):
        w = mpmath.mpf(wt.omega[k])
        with mpmath.workdps(40):
            t, e2 = mpmath.mpf(tau), mpmath.mpf(eps) ** 2
            A0 = (2 - 2 * mpmath.cos(w * t)) / (e2 * w**2)
            A2 = (w**2 * t**2 + 2 * mpmath.cos(w * t) - 2) / (e2 * w**4)
            B1 = (w * t - mpmath.sin(w * t)) / (e2 * w**3)
        assert wt.main[0][k] == pytest.approx(float(A0), rel=1e-13)
        assert wt.main[2][k] == pytest.approx(float(A2), rel=1e-13)
        assert wt.first[1][k] == pytest.approx(float(B1), rel=1e-13)
        assert wt.gap[k] == pytest.approx(float(A0 * e2 * w**2), rel=1e-13)


def test_second_order_table_is_truncation():
    g = build_grid(-32, 32, 64)
    wt = build_weight_table(g, 0.5, 0.1, 2)
    assert list(wt.main) == [0] and list(wt.first) == [0]
    assert list(wt.main_dot) == [0] and list(wt.first_dot) == [0]
    w4 = build_weight_table(g, 0.5, 0.1, 4)
    assert np.array_equal(wt.main[0], w4.main[0])


def test_table_matches_moment_integrals():
    g = build_grid(-32, 32, 1024)
    eps, tau = 0.05, 1.25e-3
    wt = build_weight_table(g, eps, tau, 6)
    for name in ("main", "main_dot", "first", "first_dot"):
        for arr in getattr(wt, name).values():
            assert np.all(np.isfinite(arr))
    for k in (0, 1, 100, 511, 512, 900):
        w = wt.omega[k]
        mt = moment_integrals(w, tau)
        for m in range(5):
            fact = math.factorial(m)
            assert wt.first[m][k] == pytest.approx(mt.S[m] / (eps**2 * w * fact), rel=1e-13)
            assert wt.first_dot[m][k] == pytest.approx(mt.C[m] / (eps**2 * fact), rel=1e-13)
            if m % 2 == 0:
                assert wt.main[m][k] == pytest.approx(2 * mt.S[m] / (eps**2 * w * fact), rel=1e-13)
                assert wt.main_dot[m][k] == pytest.approx(2 * mt.C[m] / (eps**2 * fact), rel=1e-13)


def test_table_errors():
    g = build_grid(0, 1, 8)
    with pytest.raises(ValueError):
        build_weight_table(g, 0.5, 0.1, 8)
    with pytest.raises(ValueError):
        build_weight_table(g, 0.5, 0.0, 4)
    with pytest.raises(ValueError):
        build_weight_table(g, 0.5, math.inf, 4)


def test_half_accessor():
    g = build_grid(0, 1, 8)
    wt = build_weight_table(g, 0.5, 0.1, 4)
    assert wt.half("omega").shape == (5,)
    assert np.array_equal(wt.half("main", 2), wt.main[2][:5])
