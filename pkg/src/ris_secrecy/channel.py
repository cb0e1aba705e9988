"""Monte Carlo simulation of the exact (non-approximated) channel model.

Samples are drawn in fixed-size batches. Batch ``b`` owns a Philox stream
keyed by ``SeedSequence(seed, spawn_key=(b,))``, so results depend only on
``(cfg, n_samples, seed)`` and never on how batches are spread over workers.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from .analytic import IpEstimate
from .config import ConfigError, Setup, SystemConfig

__all__ = [
    "BATCH_SIZE",
    "RareEventWarning",
    "ChannelSample",
    "MomentReport",
    "batch_rng",
    "sample_channel",
    "estimate_ip",
    "estimate_moments",
    "secrecy_capacity",
]

log = logging.getLogger(__name__)

BATCH_SIZE = 1 << 15
RARE_EVENT_FLOOR = 100

T = TypeVar("T")


class RareEventWarning(UserWarning):
    """Too few intercept events for a reliable Monte Carlo estimate."""


@dataclass(frozen=True)
class ChannelSample:
    """A batch of draws; every field is an array with one entry per draw."""

    gamma_sr: np.ndarray
    gamma_rd: np.ndarray
    gamma_re: np.ndarray
    g_rd: np.ndarray
    g_re: np.ndarray
    g_je: np.ndarray
    big_gamma_re: np.ndarray
    big_gamma_je: np.ndarray

    def __len__(self) -> int:
        return len(self.gamma_sr)


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch,))))


def _cn(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    # CN(0, 1): independent real/imaginary parts of variance 1/2
    z = rng.standard_normal(shape + (2,))
    z *= math.sqrt(0.5)
    return z.view(np.complex128)[..., 0]


def _pqe(rng: np.random.Generator, nb: int, shape: tuple[int, ...]) -> np.ndarray:
    half_width = math.pi / 2.0**nb
    return np.exp(1j * rng.uniform(-half_width, half_width, shape))


def _ris_hop(rng: np.random.Generator, n: int, k: int, nb: int) -> np.ndarray:
    """Cascaded coefficient sum |h1||h2| exp(j xi) of a phase-aligned RIS hop."""
    h1 = _cn(rng, (n, k))
    h2 = _cn(rng, (n, k))
    return (np.abs(h1) * np.abs(h2) * _pqe(rng, nb, (n, k))).sum(axis=1)


def sample_channel(rng: np.random.Generator, cfg: SystemConfig, n: int = 1) -> ChannelSample:
    """Draw ``n`` independent realizations of all fading coefficients and PQEs.

    Each RIS phase cancels the phases of the legitimate cascade up to the
    quantization error, so the SR/RD sums reduce to envelopes times
    exp(j xi). The eavesdropper sees the RD-aligned phases, and the jammer's
    cascade keeps its full complex coefficients.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if cfg.setup is Setup.SECOND:
        g_sr = _cn(rng, (n,))
    else:
        g_sr = _ris_hop(rng, n, cfg.m_elems, cfg.nb1)
    gamma_sr = cfg.snr_sr * np.abs(g_sr) ** 2

    if cfg.setup is Setup.FIRST:
        # no RIS on the second hop: direct Rayleigh links R-D, R-E and J-E
        g_rd = _cn(rng, (n,))
        g_re = _cn(rng, (n,))
        g_je = _cn(rng, (n,))
    else:
        big_n = cfg.n_elems
        h_rl = _cn(rng, (n, big_n))
        h_ld = _cn(rng, (n, big_n))
        h_le = _cn(rng, (n, big_n))
        h_jl = _cn(rng, (n, big_n))
        e_xi = _pqe(rng, cfg.nb2, (n, big_n))
        a_rl = np.abs(h_rl)
        a_ld = np.abs(h_ld)
        u_rl = h_rl / a_rl  # exp(j arg h)
        u_ld = h_ld / a_ld
        g_rd = (a_rl * a_ld * e_xi).sum(axis=1)
        # |h_RL||h_LE| exp(j(arg h_LE - arg h_LD + xi))
        g_re = (a_rl * h_le * np.conj(u_ld) * e_xi).sum(axis=1)
        # h_JL h_LE exp(j eta), eta = -(arg h_RL + arg h_LD) + xi
        g_je = (h_jl * h_le * np.conj(u_rl * u_ld) * e_xi).sum(axis=1)

    gamma_rd = cfg.snr_rd * np.abs(g_rd) ** 2
    big_gamma_re = cfg.snr_re * np.abs(g_re) ** 2
    big_gamma_je = cfg.snr_je * np.abs(g_je) ** 2
    gamma_re = big_gamma_re / (big_gamma_je + 1.0)
    return ChannelSample(
        gamma_sr=gamma_sr,
        gamma_rd=gamma_rd,
        gamma_re=gamma_re,
        g_rd=g_rd,
        g_re=g_re,
        g_je=g_je,
        big_gamma_re=big_gamma_re,
        big_gamma_je=big_gamma_je,
    )


def secrecy_capacity(gamma_sr, gamma_rd, gamma_re):
    """log2((1 + min(gamma_SR, gamma_RD)) / (1 + gamma_RE)) in bit/s/Hz."""
    out = np.log2(1.0 + np.minimum(gamma_sr, gamma_rd)) - np.log2(1.0 + np.asarray(gamma_re))
    return out if np.ndim(out) else float(out)


def _batches(n_samples: int) -> list[tuple[int, int]]:
    return [(b, min(BATCH_SIZE, n_samples - start)) for b, start in enumerate(range(0, n_samples, BATCH_SIZE))]


def _map_batches(fn: Callable[[int, int], T], n_samples: int, workers: int) -> list[T]:
    jobs = _batches(n_samples)
    if workers <= 1 or len(jobs) == 1:
        return [fn(b, size) for b, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so the reduction order is fixed
        return list(pool.map(lambda job: fn(*job), jobs))


def _check_n(n_samples: int) -> None:
    if isinstance(n_samples, bool) or not isinstance(n_samples, (int, np.integer)) or n_samples < 1:
        raise ConfigError(f"n_samples: must be a positive integer, got {n_samples!r}")


def estimate_ip(cfg: SystemConfig, n_samples: int, seed: int = 0, workers: int = 1) -> IpEstimate:
    """Fraction of draws with min(gamma_SR, gamma_RD) < gamma_RE."""
    _check_n(n_samples)

    def count(batch: int, size: int) -> int:
        s = sample_channel(batch_rng(seed, batch), cfg, size)
        return int(np.count_nonzero(np.minimum(s.gamma_sr, s.gamma_rd) < s.gamma_re))

    hits = sum(_map_batches(count, n_samples, workers))
    p = hits / n_samples
    if hits < RARE_EVENT_FLOOR:
        warnings.warn(
            f"only {hits} intercept events in {n_samples} samples; relative error above 10%",
            RareEventWarning,
            stacklevel=2,
        )
    return IpEstimate(
        value=p,
        method="mc",
        std_error=math.sqrt(p * (1.0 - p) / n_samples),
        n_samples=n_samples,
        seed=seed,
    )


@dataclass(frozen=True)
class MomentReport:
    """Empirical means (with standard errors) and complex correlation coefficients."""

    mean_gamma_sr: float
    mean_gamma_rd: float
    mean_big_gamma_re: float
    mean_big_gamma_je: float
    sem_gamma_sr: float
    sem_gamma_rd: float
    sem_big_gamma_re: float
    sem_big_gamma_je: float
    corr_rd_re: complex
    corr_rd_je: complex
    corr_re_je: complex
    n_samples: int


_REAL_KEYS = ("gamma_sr", "gamma_rd", "big_gamma_re", "big_gamma_je")
_PAIRS = (("g_rd", "g_re"), ("g_rd", "g_je"), ("g_re", "g_je"))


def estimate_moments(cfg: SystemConfig, n_samples: int, seed: int = 0, workers: int = 1) -> MomentReport:
    """Means of the SNR terms and pairwise correlation of g_RD, g_RE, g_JE.

    Correlation is E[(a - mu_a) conj(b - mu_b)] / sqrt(Var a Var b), accumulated
    from per-batch raw sums.
    """
    _check_n(n_samples)

    def sums(batch: int, size: int) -> dict[str, complex | float]:
        s = sample_channel(batch_rng(seed, batch), cfg, size)
        out: dict[str, complex | float] = {}
        for key in _REAL_KEYS:
            v = getattr(s, key)
            out[key] = float(v.sum())
            out[key + "^2"] = float(np.dot(v, v))
        for key in ("g_rd", "g_re", "g_je"):
            v = getattr(s, key)
            out[key] = complex(v.sum())
            out[key + "^2"] = float(np.vdot(v, v).real)
        for a, b in _PAIRS:
            out[a + "*" + b] = complex(np.vdot(getattr(s, b), getattr(s, a)))
        return out

    parts = _map_batches(sums, n_samples, workers)
    total = {key: sum(p[key] for p in parts) for key in parts[0]}
    n = n_samples
    mean = {key: total[key] / n for key in total}

    def sem(key: str) -> float:
        var = max(mean[key + "^2"] - mean[key] ** 2, 0.0)
        return math.sqrt(var / max(n - 1, 1))

    def corr(a: str, b: str) -> complex:
        cov = mean[a + "*" + b] - mean[a] * np.conj(mean[b])
        var_a = mean[a + "^2"] - abs(mean[a]) ** 2
        var_b = mean[b + "^2"] - abs(mean[b]) ** 2
        if var_a <= 0 or var_b <= 0:
            return complex("nan")
        return complex(cov / math.sqrt(var_a * var_b))

    return MomentReport(
        mean_gamma_sr=mean["gamma_sr"],
        mean_gamma_rd=mean["gamma_rd"],
        mean_big_gamma_re=mean["big_gamma_re"],
        mean_big_gamma_je=mean["big_gamma_je"],
        sem_gamma_sr=sem("gamma_sr"),
        sem_gamma_rd=sem("gamma_rd"),
        sem_big_gamma_re=sem("big_gamma_re"),
        sem_big_gamma_je=sem("big_gamma_je"),
        corr_rd_re=corr("g_rd", "g_re"),
        corr_rd_je=corr("g_rd", "g_je"),
        corr_re_je=corr("g_re", "g_je"),
        n_samples=n,
    )


def sample_sr_snr(cfg: SystemConfig, n_samples: int, seed: int = 0) -> np.ndarray:
    """Draw gamma_SR only (first hop of the dual-RIS link), e.g. for fit checks."""
    _check_n(n_samples)
    out = np.empty(n_samples)
    for b, size in _batches(n_samples):
        start = b * BATCH_SIZE
        out[start : start + size] = cfg.snr_sr * np.abs(_ris_hop(batch_rng(seed, b), size, cfg.m_elems, cfg.nb1)) ** 2
    return out
