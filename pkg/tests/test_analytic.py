import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from ris_secrecy import analytic
from ris_secrecy.analytic import (
    ConvergenceError,
    asymptotic_estimate,
    ccdf_e2e,
    ccdf_hop,
    cdf_e2e,
    cdf_eav,
    cdf_hop,
    ip_asymptotic,
    ip_quadrature,
    pdf_eav,
)
from ris_secrecy.config import ConfigError, SystemConfig, derive, gamma_shape, omega
from ris_secrecy.special import QuadResult, integrate_semi_infinite

mpmath.mp.dps = 30


def trapezoid_ip_oracle(cfg, points=400_000):
    """1 - int Fc_eq f_RE on a log grid, from scipy.stats and a hand-differentiated density."""
    m1, m2 = gamma_shape(cfg.m_elems, cfg.nb1), gamma_shape(cfg.n_elems, cfg.nb2)
    o1, o2 = omega(cfg.m_elems, cfg.nb1), omega(cfg.n_elems, cfg.nb2)
    s_re, s_je, n = cfg.snr_re, cfg.snr_je, cfg.n_elems
    lam = 1.0 / (n * s_re)
    c = s_je / s_re
    top = 1e3 * max(o1 * cfg.snr_sr, o2 * cfg.snr_rd, n * s_re)
    t = np.linspace(math.log(1e-9), math.log(top), points)
    x = np.exp(t)
    fc = stats.gamma.sf(x, m1, scale=o1 * cfg.snr_sr / m1) * stats.gamma.sf(x, m2, scale=o2 * cfg.snr_rd / m2)
    f = np.exp(-lam * x) * (lam / (1 + c * x) + c / (1 + c * x) ** 2)
    return 1.0 - np.trapezoid(fc * f * x, t)


def mp_regularized_upper(a, x):
    a, x = mpmath.mpf(a), mpmath.mpf(x)
    lower = mpmath.mpf(0)
    for n in range(600):
        lower += (-1) ** n * x ** (a + n) / (mpmath.factorial(n) * (a + n))
    return float(1 - lower / mpmath.gamma(a))


@pytest.mark.parametrize("m, x_scaled", [(1.0, 0.5), (3.2, 1.0), (12.86, 8.0), (12.86, 15.0), (0.7, 3.0)])
def test_ccdf_hop_against_series_oracle(m, x_scaled):
    om, snr = 600.0, 1000.0
    x = x_scaled * om * snr / m
    assert ccdf_hop(x, m, om, snr) == pytest.approx(mp_regularized_upper(m, x_scaled), rel=1e-10, abs=1e-300)


def test_ccdf_hop_monotone_and_bounded_on_scan():
    d = derive(SystemConfig())
    x = np.geomspace(1e-3, 1e8, 1000)
    q = ccdf_hop(x, d.m_sr, d.omega_sr, d.snr_sr)
    assert np.all((q >= 0) & (q <= 1))
    assert np.all(np.diff(q) <= 0)
    assert ccdf_hop(1e-12, d.m_sr, d.omega_sr, d.snr_sr) == pytest.approx(1.0)
    assert ccdf_hop(1e9, d.m_sr, d.omega_sr, d.snr_sr) == 0.0
    assert isinstance(cdf_hop(1.0, d.m_sr, d.omega_sr, d.snr_sr), float)


def test_e2e_cdf_and_ccdf_complement():
    d = derive(SystemConfig(m_elems=16, nb1=2))
    x = np.geomspace(1e2, 1e7, 200)
    np.testing.assert_allclose(cdf_e2e(x, d) + ccdf_e2e(x, d), 1.0, rtol=0, atol=2e-16 * 4)


@pytest.mark.parametrize("z", [1e-3, 0.5, 10.0, 3e3, 2e5, 1e7])
def test_cdf_eav_matches_defining_integral(z):
    n, s_re, s_je = 32, 1e4, 10.0
    mean_re, mean_je = n * s_re, n * s_je
    # P(G_RE / (G_JE + 1) <= z) = int F_RE(z (x + 1)) f_JE(x) dx with exponential terms
    integrand = lambda x: -math.expm1(-z * (x + 1) / mean_re) * math.exp(-x / mean_je) / mean_je
    ref, _ = integrate.quad(integrand, 0, math.inf, epsabs=0, epsrel=1e-12, limit=200)
    assert cdf_eav(z, n, s_re, s_je) == pytest.approx(ref, rel=1e-8, abs=1e-300)


def test_cdf_eav_limits():
    assert cdf_eav(0.0, 32, 1e4, 10.0) == 0.0
    assert cdf_eav(1e12, 32, 1e4, 10.0) == pytest.approx(1.0)
    # no jamming: plain exponential
    assert cdf_eav(2e5, 32, 1e4, 0.0) == pytest.approx(-math.expm1(-2e5 / 3.2e5), rel=1e-14)


@pytest.mark.parametrize("s_je", [0.0, 1.0, 10.0, 100.0])
def test_pdf_eav_integrates_to_one(s_je):
    n, s_re = 32, 1e4
    res = integrate_semi_infinite(
        lambda z: pdf_eav(z, n, s_re, s_je),
        rel_tol=1e-12,
        abs_tol=0.0,
        breakpoints=np.geomspace(1.0, 1e7, 15),
    )
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-8)
    ref = mpmath.quad(lambda z: pdf_eav(float(z), n, s_re, s_je), [0, 10, 1e3, 1e5, 1e6, mpmath.inf])
    assert float(ref) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("z", [0.3, 20.0, 700.0, 4e4, 9e5])
def test_pdf_eav_is_derivative_of_cdf(z):
    args = (32, 1e4, 10.0)
    h = z * 1e-5
    numeric = (cdf_eav(z + h, *args) - cdf_eav(z - h, *args)) / (2 * h)
    assert pdf_eav(z, *args) == pytest.approx(numeric, rel=1e-6)


TRAPEZOID_GRID = [
    SystemConfig(),
    SystemConfig(m_elems=40, n_elems=40),
    SystemConfig(snr_sr_db=20.0, snr_rd_db=20.0),
    SystemConfig(snr_je_db=0.0),
    SystemConfig(m_elems=16, n_elems=32, nb1=2, snr_sr_db=25.0),
]


@pytest.mark.parametrize("cfg", TRAPEZOID_GRID)
def test_ip_quadrature_matches_trapezoid_oracle(cfg):
    est = ip_quadrature(cfg)
    assert est.method == "quadrature"
    assert est.value == pytest.approx(trapezoid_ip_oracle(cfg), rel=1e-4)


def test_ip_quadrature_frozen_values():
    # frozen after agreement with the trapezoid oracle to ~5e-9
    assert ip_quadrature(SystemConfig()).value == pytest.approx(5.063931269e-4, rel=1e-7)
    assert ip_quadrature(SystemConfig(m_elems=40, n_elems=40)).value == pytest.approx(2.078711016e-4, rel=1e-7)


def test_ip_quadrature_limits_and_trends():
    assert ip_quadrature(SystemConfig(snr_sr_db=-30.0, snr_rd_db=-30.0)).value > 0.999
    base = ip_quadrature(SystemConfig()).value
    assert ip_quadrature(SystemConfig(snr_je_db=None)).value > base
    assert ip_quadrature(SystemConfig(nb1=1, nb2=1)).value > base


def test_ip_quadrature_symmetry_is_exact():
    a = ip_quadrature(SystemConfig(snr_sr_db=20.0, snr_rd_db=35.0)).value
    b = ip_quadrature(SystemConfig(snr_sr_db=35.0, snr_rd_db=20.0)).value
    assert a == b


@settings(deadline=None, max_examples=25)
@given(
    sr=st.floats(0.0, 60.0),
    rd=st.floats(0.0, 60.0),
    k=st.integers(4, 64),
    nb=st.integers(1, 5),
    je=st.floats(-10.0, 30.0),
)
def test_ip_quadrature_symmetric_and_bounded(sr, rd, k, nb, je):
    cfg = SystemConfig(m_elems=k, n_elems=k, nb1=nb, nb2=nb, snr_sr_db=sr, snr_rd_db=rd, snr_je_db=je)
    a = ip_quadrature(cfg).value
    b = ip_quadrature(cfg.with_values(snr_sr_db=rd, snr_rd_db=sr)).value
    assert 0.0 <= a <= 1.0
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


@settings(deadline=None, max_examples=20)
@given(je=st.floats(-10.0, 30.0), step=st.floats(0.5, 10.0))
def test_ip_decreases_with_jamming(je, step):
    lo = ip_quadrature(SystemConfig(snr_je_db=je)).value
    hi = ip_quadrature(SystemConfig(snr_je_db=je + step)).value
    assert hi < lo


def test_ip_quadrature_rejects_unsupported_configs():
    with pytest.raises(ConfigError, match="setup"):
        ip_quadrature(SystemConfig(setup="first"))
    with pytest.raises(ConfigError, match="snr_re_db"):
        ip_quadrature(SystemConfig(snr_re_db=-math.inf))
    with pytest.raises(ConfigError, match="snr_sr_db"):
        ip_quadrature(SystemConfig(snr_sr_db=-math.inf))


def test_ip_quadrature_surfaces_nonconvergence(monkeypatch):
    bad = QuadResult(value=0.3, abs_error_estimate=1.0, evaluations=15, converged=False)
    monkeypatch.setattr(analytic, "integrate_semi_infinite", lambda *a, **k: bad)
    with pytest.raises(ConvergenceError) as info:
        ip_quadrature(SystemConfig())
    assert info.value.result is bad


def mp_branch_gain(k, nb, n, snr_re, snr_je):
    m = mpmath.mpf(gamma_shape(k, nb))
    om = mpmath.mpf(omega(k, nb))
    x = 1 / (mpmath.mpf(n) * snr_je)
    return (m * snr_re / (om * snr_je)) ** m * mpmath.gammainc(1 - m, x) * mpmath.exp(x)


def test_asymptote_branch_selection():
    cfg = SystemConfig(m_elems=16, n_elems=32)
    res = ip_asymptotic(cfg)
    assert res.branch == "sr"
    assert res.diversity_order == gamma_shape(16, 3)
    ref = mp_branch_gain(16, 3, 32, cfg.snr_re, cfg.snr_je)
    assert res.coding_gain == pytest.approx(float(ref), rel=1e-10)

    res = ip_asymptotic(SystemConfig(m_elems=32, n_elems=16))
    assert res.branch == "rd"
    assert res.diversity_order == gamma_shape(16, 3)

    cfg = SystemConfig(m_elems=16, n_elems=16)
    res = ip_asymptotic(cfg)
    assert res.branch == "both"
    assert res.coding_gain == pytest.approx(2 * float(mp_branch_gain(16, 3, 16, cfg.snr_re, cfg.snr_je)), rel=1e-10)


def test_asymptote_with_equal_elements_but_different_bits_uses_smaller_shape():
    res = ip_asymptotic(SystemConfig(nb1=1, nb2=3))
    d = derive(SystemConfig(nb1=1, nb2=3))
    assert res.branch == "sr"
    assert res.diversity_order == min(d.m_sr, d.m_rd)


def test_asymptote_requires_jamming():
    with pytest.raises(ConfigError, match="asymptotic form undefined without jamming"):
        ip_asymptotic(SystemConfig(snr_je_db=None))


def test_asymptote_power_law_and_slope():
    res = ip_asymptotic(SystemConfig())
    dbs = np.array([50.0, 55.0, 60.0, 65.0, 70.0])
    logs = np.log10([res.ip_at_db(v) for v in dbs])
    assert np.polyfit(dbs, logs, 1)[0] == pytest.approx(-res.diversity_order / 10, rel=1e-12)
    assert res.ip_at(1e6) == pytest.approx(res.ip_at_db(60.0), rel=1e-12)
    assert res.ip_at_db(60.0) < res.ip_at_db(50.0)


@pytest.mark.parametrize(
    "cfg",
    [
        SystemConfig(m_elems=16, n_elems=16),
        SystemConfig(m_elems=16, n_elems=32),
        SystemConfig(m_elems=24, n_elems=8, nb1=2),
        SystemConfig(snr_je_db=20.0),
    ],
)
def test_asymptotic_consistency_tightens_with_snr(cfg):
    res = ip_asymptotic(cfg)
    errs = []
    for db in (50.0, 60.0, 70.0):
        q = ip_quadrature(cfg.with_values(snr_db=db)).value
        errs.append(abs(q - res.ip_at_db(db)) / q)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.05


def test_asymptotic_estimate_heuristic_flag():
    est = asymptotic_estimate(SystemConfig(snr_sr_db=40.0, snr_rd_db=60.0))
    assert est.heuristic and est.method == "asymptotic"
    assert est.value == pytest.approx(ip_asymptotic(SystemConfig()).ip_at_db(40.0))
    assert not asymptotic_estimate(SystemConfig()).heuristic
    # the power law exceeds 1 at low SNR; reported values are probabilities
    assert asymptotic_estimate(SystemConfig(snr_sr_db=0.0, snr_rd_db=0.0)).value == 1.0
