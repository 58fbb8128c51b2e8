"""Closed-form figures of merit for photon-cycling schemes.

All functions are pure and reentrant. Inputs follow the package-wide unit
conventions (see :mod:`coolcycle.constants`): wavelengths nm, lifetimes s,
temperatures K, masses u, intensities mW/cm^2, energies cm^-1.

A perfectly closed scheme (closure exactly 1 within float tolerance) never
loses population; the survival scatter count is represented as ``math.inf``
so comparisons against it stay exact.
"""

from __future__ import annotations

import math
from typing import Sequence

from .constants import (
    LOG10_FACTOR,
    NCOOL_COEFF,
    PLANCK_J_S,
    REFERENCE_INTENSITY_MW_CM2,
    SATURATION_COEFF,
    TEMP_PER_WAVENUMBER,
)
from .graph import DecayChannel

CLOSURE_TOLERANCE = 1e-9
MIN_INITIAL_TEMPERATURE_K = 4.0


def _check_channels(channels: Sequence[DecayChannel], same_upper: bool = True) -> None:
    if not channels:
        raise ValueError("at least one driven channel is required")
    if same_upper and len({c.upper_id for c in channels}) != 1:
        raise ValueError("driven channels must share one upper state")


def closure(channels: Sequence[DecayChannel]) -> float:
    """Fraction of decays that stay inside the scheme: sum of driven BRs."""
    _check_channels(channels)
    p = math.fsum(c.branching_ratio for c in channels)
    if p <= 0 or p > 1.0 + CLOSURE_TOLERANCE:
        raise ValueError(f"closure {p} outside (0, 1]")
    return p


def n_ten_percent(p: float) -> float:
    """Scatter count after which 10% of the population remains bright.

    ``p`` at or above 1 (within tolerance) means nothing ever leaks; that is
    returned as ``inf``.
    """
    if p <= 0 or p > 1.0 + CLOSURE_TOLERANCE:
        raise ValueError(f"closure {p} outside (0, 1]")
    if p >= 1.0:
        return math.inf
    return math.log(0.1) / math.log(p)


def inverse_scattering_rate(
    lifetime_s: float,
    channels: Sequence[DecayChannel],
    intensity_mw_cm2: float = REFERENCE_INTENSITY_MW_CM2,
) -> float:
    """Mean time per scattered photon (s) for a single-excited-state scheme.

    Counts every driven transition toward the excited-state occupancy term;
    grouping transitions onto shared lasers is a reporting concern and does
    not change the rate.
    """
    if lifetime_s <= 0:
        raise ValueError(f"lifetime must be positive, got {lifetime_s}")
    if intensity_mw_cm2 <= 0:
        raise ValueError(f"intensity must be positive, got {intensity_mw_cm2}")
    _check_channels(channels)
    g = len(channels)
    saturation = math.fsum(1.0 / c.wavelength_nm**3 for c in channels)
    scale = REFERENCE_INTENSITY_MW_CM2 / intensity_mw_cm2
    return lifetime_s * (g + 1) + SATURATION_COEFF * scale * saturation


def initial_temperature(starting_energy_cm: float) -> float:
    """Gas temperature (K) at which the starting state keeps 10% occupancy.

    Floored at 4 K, the practical limit of buffer-gas precooling.
    """
    if starting_energy_cm < 0:
        raise ValueError(f"state energy must be >= 0, got {starting_energy_cm}")
    return max(MIN_INITIAL_TEMPERATURE_K, starting_energy_cm * TEMP_PER_WAVENUMBER)


def n_cool(
    p: float,
    channels: Sequence[DecayChannel],
    t_init_k: float,
    mass_u: float,
) -> float:
    """Scatter count to bring the mean thermal momentum to rest."""
    if not 0 < p <= 1.0 + CLOSURE_TOLERANCE:
        raise ValueError(f"closure {p} outside (0, 1]")
    if t_init_k <= 0 or mass_u <= 0:
        raise ValueError("temperature and mass must be positive")
    _check_channels(channels)
    br_over_lambda = math.fsum(c.branching_ratio / c.wavelength_nm for c in channels)
    if br_over_lambda <= 0:
        raise ValueError("sum of BR/wavelength must be positive")
    # Written as 1/((1/p) * s) rather than p/s so the two-excited-state
    # variant reduces to this bit-for-bit when both subschemes coincide.
    return NCOOL_COEFF * math.sqrt(t_init_k * mass_u) / ((1.0 / p) * br_over_lambda)


def cooling_and_survival_times(
    n_cool_count: float, n10: float, inv_rate_s: float
) -> tuple[float, float]:
    """(time to cool, time until 10% remain), both in s; the latter may be inf."""
    if n_cool_count <= 0 or n10 <= 0 or inv_rate_s <= 0:
        raise ValueError("scatter counts and rate must be positive")
    return n_cool_count * inv_rate_s, n10 * inv_rate_s


def mean_photon_momentum(channels: Sequence[DecayChannel]) -> float:
    """Closure-weighted mean photon momentum (kg m/s) over driven channels."""
    p = closure(channels)
    br_over_lambda_m = math.fsum(
        c.branching_ratio / (c.wavelength_nm * 1e-9) for c in channels
    )
    return PLANCK_J_S * br_over_lambda_m / p


def double_lifetime(tau_a_s: float, tau_b_s: float) -> float:
    """Effective lifetime of a two-excited-state scheme: the plain average."""
    if tau_a_s <= 0 or tau_b_s <= 0:
        raise ValueError("lifetimes must be positive")
    return 0.5 * (tau_a_s + tau_b_s)


def double_closure(p_a: float, p_b: float) -> float:
    """Effective closure of a two-excited-state scheme: average of the halves."""
    for p in (p_a, p_b):
        if not 0 < p <= 1.0 + CLOSURE_TOLERANCE:
            raise ValueError(f"closure {p} outside (0, 1]")
    return (p_a + p_b) / 2.0


def double_inverse_rate(
    tau_avg_s: float,
    paired_channels: Sequence[tuple[DecayChannel, DecayChannel]],
    intensity_mw_cm2: float = REFERENCE_INTENSITY_MW_CM2,
) -> float:
    """Mean time per scattered photon (s) for a two-excited-state scheme.

    ``paired_channels`` holds, per shared lower state, the decay channel
    from each of the two excited states.
    """
    if tau_avg_s <= 0:
        raise ValueError(f"lifetime must be positive, got {tau_avg_s}")
    if intensity_mw_cm2 <= 0:
        raise ValueError(f"intensity must be positive, got {intensity_mw_cm2}")
    if not paired_channels:
        raise ValueError("at least one shared lower state is required")
    for ch_a, ch_b in paired_channels:
        if ch_a.lower_id != ch_b.lower_id:
            raise ValueError(
                f"pair {ch_a.upper_id}->{ch_a.lower_id} / "
                f"{ch_b.upper_id}->{ch_b.lower_id} does not share a lower state"
            )
    n_ground = len(paired_channels)
    saturation = math.fsum(
        (a.branching_ratio + b.branching_ratio)
        / (
            a.wavelength_nm**3 * a.branching_ratio
            + b.wavelength_nm**3 * b.branching_ratio
        )
        for a, b in paired_channels
    )
    scale = REFERENCE_INTENSITY_MW_CM2 / intensity_mw_cm2
    return tau_avg_s * (1.0 + n_ground / 2.0) + 0.5 * SATURATION_COEFF * scale * saturation


def double_n_cool(
    p_a: float,
    p_b: float,
    channels_a: Sequence[DecayChannel],
    channels_b: Sequence[DecayChannel],
    t_init_k: float,
    mass_u: float,
) -> float:
    """Scatter count to rest for a two-excited-state scheme.

    The mean photon momentum averages the two subschemes weighted by their
    closures; with identical subschemes this collapses exactly to
    :func:`n_cool`.
    """
    for p in (p_a, p_b):
        if not 0 < p <= 1.0 + CLOSURE_TOLERANCE:
            raise ValueError(f"closure {p} outside (0, 1]")
    if t_init_k <= 0 or mass_u <= 0:
        raise ValueError("temperature and mass must be positive")
    _check_channels(channels_a)
    _check_channels(channels_b)
    denom = (1.0 / p_a) * math.fsum(
        c.branching_ratio / c.wavelength_nm for c in channels_a
    ) + (1.0 / p_b) * math.fsum(c.branching_ratio / c.wavelength_nm for c in channels_b)
    if denom <= 0:
        raise ValueError("sum of BR/wavelength must be positive")
    return 2.0 * NCOOL_COEFF * math.sqrt(t_init_k * mass_u) / denom


__all__ = [
    "closure",
    "n_ten_percent",
    "inverse_scattering_rate",
    "initial_temperature",
    "n_cool",
    "cooling_and_survival_times",
    "mean_photon_momentum",
    "double_lifetime",
    "double_closure",
    "double_inverse_rate",
    "double_n_cool",
    "LOG10_FACTOR",
]
