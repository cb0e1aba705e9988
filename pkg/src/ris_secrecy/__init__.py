"""Intercept probability of a dual-RIS decode-and-forward relay link with
cooperative jamming and phase quantization errors."""

from .analytic import (
    AsymptoticResult,
    ConvergenceError,
    IpEstimate,
    ccdf_e2e,
    ccdf_hop,
    cdf_e2e,
    cdf_eav,
    cdf_hop,
    ip_asymptotic,
    ip_quadrature,
    pdf_eav,
)
from .channel import (
    ChannelSample,
    MomentReport,
    RareEventWarning,
    estimate_ip,
    estimate_moments,
    sample_channel,
    secrecy_capacity,
)
from .config import (
    ConfigError,
    DerivedParams,
    Setup,
    SystemConfig,
    derive,
    gamma_shape,
    load_config_file,
    omega,
    phase_moment,
)
from .experiments import SweepSpec, ValidationReport, run_point, run_sweep, run_validation
from .special import (
    PoleError,
    QuadResult,
    gamma_fn,
    integrate_semi_infinite,
    lower_inc_gamma,
    upper_inc_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticResult",
    "ChannelSample",
    "ConfigError",
    "ConvergenceError",
    "DerivedParams",
    "IpEstimate",
    "MomentReport",
    "PoleError",
    "QuadResult",
    "RareEventWarning",
    "Setup",
    "SweepSpec",
    "SystemConfig",
    "ValidationReport",
    "ccdf_e2e",
    "ccdf_hop",
    "cdf_e2e",
    "cdf_eav",
    "cdf_hop",
    "derive",
    "estimate_ip",
    "estimate_moments",
    "gamma_fn",
    "gamma_shape",
    "integrate_semi_infinite",
    "ip_asymptotic",
    "ip_quadrature",
    "load_config_file",
    "lower_inc_gamma",
    "omega",
    "pdf_eav",
    "phase_moment",
    "run_point",
    "run_sweep",
    "run_validation",
    "sample_channel",
    "secrecy_capacity",
    "upper_inc_gamma",
]
