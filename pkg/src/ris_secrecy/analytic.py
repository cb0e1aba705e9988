"""Approximate distributions, quadrature IP and the high-SNR asymptote.

The per-hop SNRs are modelled as Gamma variables and the eavesdropper SINR
as a ratio of exponentials. The intercept probability is

    P_int = 1 - int_0^inf Fc_eq(x) f_RE(x) dx = int_0^inf F_eq(x) f_RE(x) dx,

and the second form is the one integrated: F_eq = P_sr + P_rd - P_sr P_rd is
built from regularized lower incomplete gammas, so probabilities far below
machine epsilon keep their relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .config import ConfigError, DerivedParams, Setup, SystemConfig, derive
from .special import QuadResult, integrate_semi_infinite, upper_inc_gamma

__all__ = [
    "ConvergenceError",
    "IpEstimate",
    "AsymptoticResult",
    "ccdf_hop",
    "cdf_hop",
    "ccdf_e2e",
    "cdf_e2e",
    "cdf_eav",
    "pdf_eav",
    "ip_integrand",
    "ip_quadrature",
    "ip_asymptotic",
]


class ConvergenceError(ArithmeticError):
    """Quadrature did not reach its tolerance."""

    def __init__(self, message: str, result: QuadResult | None = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class IpEstimate:
    """An intercept probability tagged with the route that produced it.

    ``std_error``/``n_samples``/``seed`` are set for Monte Carlo;
    ``error_estimate`` is the quadrature error bound; ``heuristic`` marks an
    asymptote evaluated outside the balanced-SNR regime.
    """

    value: float
    method: str
    std_error: float | None = None
    n_samples: int | None = None
    seed: int | None = None
    error_estimate: float | None = None
    heuristic: bool = False


def ccdf_hop(x, m: float, omega: float, snr_lin: float):
    """Gamma-approximation CCDF Q(m, m x / (omega snr)) of one RIS hop."""
    x = np.asarray(x, dtype=float)
    out = sc.gammaincc(m, m * x / (omega * snr_lin))
    return out if out.ndim else float(out)


def cdf_hop(x, m: float, omega: float, snr_lin: float):
    x = np.asarray(x, dtype=float)
    out = sc.gammainc(m, m * x / (omega * snr_lin))
    return out if out.ndim else float(out)


def ccdf_e2e(x, derived: DerivedParams):
    """CCDF of min(gamma_SR, gamma_RD) for independent hops."""
    return ccdf_hop(x, derived.m_sr, derived.omega_sr, derived.snr_sr) * ccdf_hop(
        x, derived.m_rd, derived.omega_rd, derived.snr_rd
    )


def cdf_e2e(x, derived: DerivedParams):
    """1 - ccdf_e2e from the hop CDFs directly.

    P_sr + P_rd - P_sr P_rd never cancels (it is at least max(P_sr, P_rd))
    and is bitwise symmetric under swapping the hops.
    """
    p_sr = cdf_hop(x, derived.m_sr, derived.omega_sr, derived.snr_sr)
    p_rd = cdf_hop(x, derived.m_rd, derived.omega_rd, derived.snr_rd)
    return (p_sr + p_rd) - p_sr * p_rd


def cdf_eav(z, n_elems: int, snr_re_lin: float, snr_je_lin: float):
    """CDF of Gamma_RE / (Gamma_JE + 1) with both terms exponential (means N*snr)."""
    z = np.asarray(z, dtype=float)
    u = z / (n_elems * snr_re_lin)
    cz = snr_je_lin / snr_re_lin * z
    # 1 - e^-u / (cz + 1), rearranged to stay accurate for small z
    out = -np.expm1(-u) + np.exp(-u) * cz / (cz + 1.0)
    return out if out.ndim else float(out)


def pdf_eav(z, n_elems: int, snr_re_lin: float, snr_je_lin: float):
    """Density of the eavesdropper SINR; derivative of :func:`cdf_eav`."""
    z = np.asarray(z, dtype=float)
    re, je = snr_re_lin, snr_je_lin
    denom = re + je * z
    out = np.exp(-z / (n_elems * re)) * (je * n_elems * re + re + je * z) / (n_elems * denom * denom)
    return out if out.ndim else float(out)


def ip_integrand(derived: DerivedParams, n_elems: int):
    """Vectorized F_eq(x) f_RE(x)."""

    def f(x: np.ndarray) -> np.ndarray:
        return cdf_e2e(x, derived) * pdf_eav(x, n_elems, derived.snr_re, derived.snr_je)

    return f


def _breakpoints(cfg: SystemConfig, d: DerivedParams) -> list[float]:
    scales = [d.mean_exp_re]
    if d.snr_je > 0:
        scales.append(d.snr_re / d.snr_je)
    # bulk and left shoulder of each Gamma hop
    for m, om, snr in ((d.m_sr, d.omega_sr, d.snr_sr), (d.m_rd, d.omega_rd, d.snr_rd)):
        mean = om * snr
        scales.append(mean)
        width = mean / math.sqrt(m)
        for k in (-3.0, -1.5, 1.5, 3.0):
            if mean + k * width > 0:
                scales.append(mean + k * width)
    lo, hi = min(scales), max(scales)
    # geometric fill keeps the algebraic 1/x stretch of f_RE well resolved
    pts = set(scales)
    pts.update(np.geomspace(lo * 1e-3, hi, 8 + int(4 * math.log10(hi / lo + 1.0))).tolist())
    return sorted(pts)


def ip_quadrature(
    cfg: SystemConfig,
    derived: DerivedParams | None = None,
    rel_tol: float = 1e-9,
    abs_tol: float = 0.0,
) -> IpEstimate:
    """Intercept probability by adaptive quadrature of the approximate model."""
    if cfg.setup is not Setup.DUAL:
        raise ConfigError(f"setup: quadrature is defined for the dual-RIS link only, got {cfg.setup.value}")
    d = derived or derive(cfg)
    if not d.snr_re > 0:
        raise ConfigError("snr_re_db: quadrature needs a positive eavesdropper SNR")
    if not (d.snr_sr > 0 and d.snr_rd > 0):
        raise ConfigError("snr_sr_db/snr_rd_db: quadrature needs positive legitimate SNRs")
    res = integrate_semi_infinite(
        ip_integrand(d, cfg.n_elems),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        breakpoints=_breakpoints(cfg, d),
        max_intervals=20_000,
    )
    if not res.converged:
        raise ConvergenceError(
            f"IP quadrature did not converge (value {res.value:.3e}, error {res.abs_error_estimate:.1e})",
            res,
        )
    value = min(max(res.value, 0.0), 1.0)
    return IpEstimate(value=value, method="quadrature", error_estimate=res.abs_error_estimate)


@dataclass(frozen=True)
class AsymptoticResult:
    """High-SNR power law ``coding_gain * snr**(-diversity_order)``.

    ``branch`` names which hop(s) dominate: "sr", "rd" or "both".
    """

    coding_gain: float
    diversity_order: float
    branch: str
    heuristic: bool = False
    log_coding_gain: float = math.nan

    def ip_at(self, snr_lin: float) -> float:
        return math.exp(self.log_coding_gain - self.diversity_order * math.log(snr_lin))

    def ip_at_db(self, snr_db: float) -> float:
        return math.exp(self.log_coding_gain - self.diversity_order * snr_db * math.log(10.0) / 10.0)


def _log_branch_gain(m: float, om: float, snr_re: float, snr_je: float, n_elems: int) -> float:
    x = 1.0 / (n_elems * snr_je)
    return m * math.log(m * snr_re / (om * snr_je)) + math.log(upper_inc_gamma(1.0 - m, x)) + x


def ip_asymptotic(cfg: SystemConfig, derived: DerivedParams | None = None) -> AsymptoticResult:
    """Coding gain and diversity order of the high-SNR intercept probability.

    The dominant branch is the hop with the smaller Gamma shape; equal
    shapes sum both branch terms.
    """
    if cfg.setup is not Setup.DUAL:
        raise ConfigError(f"setup: asymptote is defined for the dual-RIS link only, got {cfg.setup.value}")
    if not cfg.jamming or cfg.snr_je <= 0:
        raise ConfigError("snr_je_db: asymptotic form undefined without jamming")
    d = derived or derive(cfg)
    if not d.snr_re > 0:
        raise ConfigError("snr_re_db: asymptote needs a positive eavesdropper SNR")
    n = cfg.n_elems
    log_sr = _log_branch_gain(d.m_sr, d.omega_sr, d.snr_re, d.snr_je, n)
    log_rd = _log_branch_gain(d.m_rd, d.omega_rd, d.snr_re, d.snr_je, n)
    if math.isclose(d.m_sr, d.m_rd, rel_tol=1e-12):
        branch = "both"
        log_gc = max(log_sr, log_rd) + math.log1p(math.exp(-abs(log_sr - log_rd)))
    elif d.m_sr < d.m_rd:
        branch, log_gc = "sr", log_sr
    else:
        branch, log_gc = "rd", log_rd
    return AsymptoticResult(
        coding_gain=math.exp(log_gc) if log_gc < 709 else math.inf,
        diversity_order=min(d.m_sr, d.m_rd),
        branch=branch,
        heuristic=cfg.snr_sr_db != cfg.snr_rd_db,
        log_coding_gain=log_gc,
    )


def asymptotic_estimate(cfg: SystemConfig, derived: DerivedParams | None = None) -> IpEstimate:
    """Asymptote evaluated at the configured SNR (min of the two hops), capped at 1."""
    res = ip_asymptotic(cfg, derived)
    snr_db = min(cfg.snr_sr_db, cfg.snr_rd_db)
    return IpEstimate(
        value=min(1.0, res.ip_at_db(snr_db)),
        method="asymptotic",
        heuristic=res.heuristic,
    )
