"""Wave transfer functions and wave-absorbing control of vehicle platoons."""

from ._core import (
    PlatoonConfig,
    Variant,
    WavePlatoonError,
    alpha,
    g1_cf_eval,
    g1_exact,
    g1_fir_taps,
    g2_exact,
    kappa,
    simulate,
    verify,
)

__all__ = [
    "PlatoonConfig",
    "Variant",
    "WavePlatoonError",
    "alpha",
    "g1_cf_eval",
    "g1_exact",
    "g1_fir_taps",
    "g2_exact",
    "kappa",
    "simulate",
    "verify",
]
