"""System configuration and the Gamma/exponential parameters derived from it."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

__all__ = [
    "ConfigError",
    "Setup",
    "SystemConfig",
    "DerivedParams",
    "phase_moment",
    "gamma_shape",
    "omega",
    "derive",
    "db_to_linear",
    "load_config_file",
    "parse_config_text",
    "parse_config_values",
    "read_config_values",
    "NB_CAP",
]

# 2**nb overflows int64 arithmetic above this; larger nb is the continuous-phase limit.
NB_CAP = 62


class ConfigError(ValueError):
    """Invalid system configuration or sweep specification."""


class Setup(str, enum.Enum):
    DUAL = "dual"
    FIRST = "first"  # RIS only on the source-relay hop
    SECOND = "second"  # RIS only on the relay-destination hop

    @classmethod
    def parse(cls, value: "str | Setup") -> "Setup":
        if isinstance(value, Setup):
            return value
        key = str(value).strip().lower()
        aliases = {
            "dual": cls.DUAL,
            "dualris": cls.DUAL,
            "first": cls.FIRST,
            "firsthoprisonly": cls.FIRST,
            "setup1": cls.FIRST,
            "second": cls.SECOND,
            "secondhoprisonly": cls.SECOND,
            "setup2": cls.SECOND,
        }
        try:
            return aliases[key.replace("_", "").replace("-", "")]
        except KeyError:
            raise ConfigError(f"setup: unknown value {value!r} (dual|first|second)") from None


def db_to_linear(db: float | None) -> float:
    """10**(db/10); ``None`` (link switched off) and -inf map to 0."""
    if db is None:
        return 0.0
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Free parameters of the dual-hop link.

    SNRs are path-loss-normalized averages in dB. ``snr_je_db=None`` means no
    jammer. ``-inf`` dB is accepted for the other SNRs to model a link with
    zero average power; the analytic routes reject that case.
    """

    m_elems: int = 32
    n_elems: int = 32
    nb1: int = 3
    nb2: int = 3
    snr_sr_db: float = 30.0
    snr_rd_db: float = 30.0
    snr_re_db: float = 40.0
    snr_je_db: float | None = 10.0
    setup: Setup = Setup.DUAL

    def __post_init__(self) -> None:
        for name in ("m_elems", "n_elems", "nb1", "nb2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name}: must be an integer >= 1, got {value!r}")
        for name in ("snr_sr_db", "snr_rd_db", "snr_re_db", "snr_je_db"):
            value = getattr(self, name)
            if value is None and name == "snr_je_db":
                continue
            if value is None or not isinstance(value, (int, float)) or math.isnan(value):
                raise ConfigError(f"{name}: must be a real number of dB, got {value!r}")
            if value == math.inf or value > 3000.0:
                # 10**(x/10) leaves the double range near 3083 dB
                raise ConfigError(f"{name}: {value} dB overflows in linear scale")
            if name == "snr_je_db" and value == -math.inf:
                raise ConfigError("snr_je_db: use None for 'no jamming', not -inf")
        object.__setattr__(self, "setup", Setup.parse(self.setup))

    @property
    def snr_sr(self) -> float:
        return db_to_linear(self.snr_sr_db)

    @property
    def snr_rd(self) -> float:
        return db_to_linear(self.snr_rd_db)

    @property
    def snr_re(self) -> float:
        return db_to_linear(self.snr_re_db)

    @property
    def snr_je(self) -> float:
        return db_to_linear(self.snr_je_db)

    @property
    def jamming(self) -> bool:
        return self.snr_je_db is not None

    def with_values(self, **changes: Any) -> "SystemConfig":
        """``dataclasses.replace`` that also accepts the CLI aliases (M, N, snr_db, mn, nb)."""
        return replace(self, **_expand_aliases(changes))


# Aliases used by config files, sweeps and the CLI. Joint aliases set two fields.
_ALIASES: dict[str, tuple[str, ...]] = {
    "m": ("m_elems",),
    "n": ("n_elems",),
    "mn": ("m_elems", "n_elems"),
    "nb": ("nb1", "nb2"),
    "snr_db": ("snr_sr_db", "snr_rd_db"),
}

FIELD_NAMES = tuple(f.name for f in fields(SystemConfig))


def resolve_field(name: str) -> tuple[str, ...]:
    key = name.strip().replace("-", "_")
    if key in FIELD_NAMES:
        return (key,)
    if key.lower() in _ALIASES:
        return _ALIASES[key.lower()]
    raise ConfigError(f"unknown configuration field {name!r}")


def coerce_value(field_name: str, value: Any) -> Any:
    if field_name in ("m_elems", "n_elems", "nb1", "nb2"):
        if isinstance(value, str):
            value = value.strip()
            try:
                return int(value)
            except ValueError:
                raise ConfigError(f"{field_name}: expected an integer, got {value!r}") from None
        if isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"{field_name}: expected an integer, got {value!r}")
            return int(value)
        return value
    if field_name == "setup":
        return Setup.parse(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if field_name == "snr_je_db" and text in ("none", "off", "no", ""):
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{field_name}: expected a number of dB, got {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _expand_aliases(changes: Mapping[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in changes.items():
        for target in resolve_field(key):
            out[target] = coerce_value(target, value)
    return out


def parse_config_values(text: str) -> dict[str, str]:
    """Raw ``key = value`` pairs (``#`` starts a comment), keys validated."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        resolve_field(key)
        values[key] = value
    return values


def parse_config_text(text: str, base: SystemConfig | None = None) -> SystemConfig:
    """Parse ``key = value`` lines on top of ``base`` (the defaults when omitted)."""
    return (base or SystemConfig()).with_values(**parse_config_values(text))


def read_config_values(path: str) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_config_values(fh.read())


def load_config_file(path: str, base: SystemConfig | None = None) -> SystemConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


def phase_moment(nb: int, k: int) -> float:
    """k-th characteristic-function moment E[exp(j k xi)] of a b-bit uniform PQE."""
    if k not in (1, 2):
        raise ConfigError(f"k must be 1 or 2, got {k!r}")
    if nb < 1:
        raise ConfigError(f"nb must be >= 1, got {nb!r}")
    if nb > NB_CAP:
        return 1.0
    return 2.0 ** (nb + 1 - k) * math.sin(2.0 ** (k - 1 - nb) * math.pi) / math.pi


def gamma_shape(k_elems: int, nb: int) -> float:
    """Shape parameter of the Gamma approximation to a RIS-assisted hop SNR."""
    if k_elems < 1:
        raise ConfigError(f"element count must be >= 1, got {k_elems!r}")
    p1 = phase_moment(nb, 1)
    p2 = phase_moment(nb, 2)
    c = p1 * p1 * math.pi**2 / 16.0
    return 0.5 * k_elems * c / (1.0 + p2 - 2.0 * c)


def omega(k_elems: int, nb: int) -> float:
    """Average equivalent fading power (K pi phi_1 / 4)**2 of a RIS-assisted hop."""
    if k_elems < 1:
        raise ConfigError(f"element count must be >= 1, got {k_elems!r}")
    return (k_elems * math.pi * phase_moment(nb, 1) / 4.0) ** 2


@dataclass(frozen=True)
class DerivedParams:
    m_sr: float
    m_rd: float
    omega_sr: float
    omega_rd: float
    phi11: float
    phi12: float
    phi21: float
    phi22: float
    scale_sr: float
    scale_rd: float
    mean_exp_re: float
    mean_exp_je: float
    # linear-scale average SNRs, converted once here
    snr_sr: float
    snr_rd: float
    snr_re: float
    snr_je: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def derive(cfg: SystemConfig) -> DerivedParams:
    snr_sr, snr_rd, snr_re, snr_je = cfg.snr_sr, cfg.snr_rd, cfg.snr_re, cfg.snr_je
    m_sr = gamma_shape(cfg.m_elems, cfg.nb1)
    m_rd = gamma_shape(cfg.n_elems, cfg.nb2)
    omega_sr = omega(cfg.m_elems, cfg.nb1)
    omega_rd = omega(cfg.n_elems, cfg.nb2)
    return DerivedParams(
        m_sr=m_sr,
        m_rd=m_rd,
        omega_sr=omega_sr,
        omega_rd=omega_rd,
        phi11=phase_moment(cfg.nb1, 1),
        phi12=phase_moment(cfg.nb1, 2),
        phi21=phase_moment(cfg.nb2, 1),
        phi22=phase_moment(cfg.nb2, 2),
        scale_sr=omega_sr * snr_sr / m_sr,
        scale_rd=omega_rd * snr_rd / m_rd,
        mean_exp_re=cfg.n_elems * snr_re,
        mean_exp_je=cfg.n_elems * snr_je,
        snr_sr=snr_sr,
        snr_rd=snr_rd,
        snr_re=snr_re,
        snr_je=snr_je,
    )
