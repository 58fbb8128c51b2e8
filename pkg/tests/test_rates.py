"""Closed-form rate model: derived constants, each figure of merit, scalings.

Reference values were frozen from independent evaluation (mpmath at 30
digits) of the defining formulas, or from published spectroscopy tables
where noted.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coolcycle import constants, rates
from coolcycle.graph import DecayChannel


def ch(br: float, lam: float, upper: int = 10, lower: int = 1) -> DecayChannel:
    return DecayChannel(
        upper_id=upper,
        lower_id=lower,
        einstein_a=br * 1e7,
        branching_ratio=br,
        wavelength_nm=lam,
    )


class TestConstants:
    """The four unit-bridging coefficients reproduce from SI definitions."""

    QUOTED = {
        "kelvin_in_wavenumber": "0.6950348004",
        "temp_per_wavenumber": "0.62485285866738",
        "ncool_coeff": "0.39579544150466855",
        "saturation_coeff": "0.04160402474381969",
    }

    @pytest.mark.parametrize("name,quoted", sorted(QUOTED.items()))
    def test_quoted_decimal_strings(self, name, quoted):
        derived = getattr(constants, name.upper())
        assert derived == pytest.approx(float(quoted), rel=1e-10)

    def test_kelvin_wavenumber_is_truncated_exact_ratio(self):
        exact = constants.BOLTZMANN_J_PER_K / (
            constants.PLANCK_J_S * constants.LIGHT_M_PER_S * 100.0
        )
        assert f"{exact:.12f}".startswith("0.6950348004")
        assert constants.KELVIN_IN_WAVENUMBER == 0.6950348004

    def test_temp_coefficient_matches_quoted_digits(self):
        assert f"{constants.TEMP_PER_WAVENUMBER:.14f}" == "0.62485285866738"

    def test_ncool_from_fundamentals(self):
        expected = (
            math.sqrt(3 * constants.BOLTZMANN_J_PER_K * constants.ATOMIC_MASS_KG)
            / constants.PLANCK_J_S
            * 1e-9
        )
        assert constants.NCOOL_COEFF == expected
        assert constants.NCOOL_COEFF == pytest.approx(0.39579544150466855, rel=1e-12)

    def test_saturation_from_fundamentals(self):
        assert constants.SATURATION_COEFF == pytest.approx(
            0.04160402474381969, rel=1e-12
        )

    def test_energy_cutoff_at_500k(self):
        assert constants.thermal_energy_cutoff_cm(500.0) == pytest.approx(
            800.188385, abs=1e-5
        )


class TestClosure:
    def test_sum(self):
        assert rates.closure([ch(0.5, 400), ch(0.3, 500, lower=2)]) == pytest.approx(0.8)

    def test_two_level(self):
        assert rates.closure([ch(1.0, 500)]) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rates.closure([])

    def test_mixed_uppers_rejected(self):
        with pytest.raises(ValueError, match="upper"):
            rates.closure([ch(0.5, 400, upper=10), ch(0.3, 500, upper=11)])


class TestNTenPercent:
    def test_frozen_value(self):
        assert rates.n_ten_percent(0.9) == pytest.approx(21.854345326782833, rel=1e-12)

    def test_perfect_closure_is_infinite(self):
        assert rates.n_ten_percent(1.0) == math.inf
        assert rates.n_ten_percent(1.0 + 5e-10) == math.inf

    def test_domain(self):
        with pytest.raises(ValueError):
            rates.n_ten_percent(0.0)
        with pytest.raises(ValueError):
            rates.n_ten_percent(1.0 + 1e-8)

    @given(st.floats(min_value=0.01, max_value=0.999999))
    @settings(max_examples=200, deadline=None)
    def test_strictly_increasing(self, p):
        eps = (1.0 - p) * 1e-3
        assert rates.n_ten_percent(p) < rates.n_ten_percent(p + eps)


class TestInverseScatteringRate:
    def yo_channels(self):
        # B-state scheme of YO: three laser lines, each addressing an e/f
        # pair of degenerate transitions (state energies from published
        # tables; state 34 at 20741.6877 cm^-1).
        e_up = 20741.6877
        lams = [1e7 / (e_up - e_lo) for e_lo in
                (0.7761, 0.7761, 856.519, 856.519, 1706.6031, 1706.6031)]
        return [ch(0.16, lam, lower=i) for i, lam in enumerate(lams, 1)]

    def test_saturation_limit(self):
        channels = [ch(0.5, 400), ch(0.4, 600, lower=2)]
        tau = 2e-7
        limit = rates.inverse_scattering_rate(tau, channels, intensity_mw_cm2=1e30)
        assert limit == pytest.approx(tau * 3, rel=1e-9)

    def test_yo_three_laser_rate(self):
        got = rates.inverse_scattering_rate(3.073e-8, self.yo_channels())
        assert got == pytest.approx(0.216e-6, rel=0.01)
        assert got == pytest.approx(2.1708057434665126e-7, rel=1e-12)

    def test_monotonic_in_intensity_and_g(self):
        channels = [ch(0.5, 400), ch(0.4, 600, lower=2)]
        low = rates.inverse_scattering_rate(2e-7, channels, intensity_mw_cm2=500)
        high = rates.inverse_scattering_rate(2e-7, channels, intensity_mw_cm2=2000)
        assert high < low
        more = rates.inverse_scattering_rate(2e-7, channels + [ch(0.05, 900, lower=3)])
        assert more > rates.inverse_scattering_rate(2e-7, channels)

    def test_domain(self):
        with pytest.raises(ValueError):
            rates.inverse_scattering_rate(0.0, [ch(1.0, 500)])
        with pytest.raises(ValueError):
            rates.inverse_scattering_rate(1e-7, [ch(1.0, 500)], intensity_mw_cm2=0)


class TestInitialTemperature:
    def test_floor(self):
        assert rates.initial_temperature(0.0) == 4.0

    def test_excited_start(self):
        # hydroxyl-cation starting level at 34.4599 cm^-1
        assert rates.initial_temperature(34.4599) == pytest.approx(
            21.532367024392046, rel=1e-12
        )
        assert round(rates.initial_temperature(34.4599), 1) == 21.5

    def test_500k_scale(self):
        cutoff = constants.thermal_energy_cutoff_cm(500.0)
        assert rates.initial_temperature(cutoff) == pytest.approx(500.0, rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            rates.initial_temperature(-1.0)


class TestNCool:
    def test_sqrt_temperature_scaling(self):
        channels = [ch(0.7, 400), ch(0.3, 650, lower=2)]
        base = rates.n_cool(1.0, channels, 4.0, 15.0)
        quadrupled = rates.n_cool(1.0, channels, 16.0, 15.0)
        assert abs(quadrupled / base - 2.0) < 1e-12

    def test_linear_in_weighted_momentum(self):
        one = rates.n_cool(1.0, [ch(1.0, 500)], 4.0, 15.0)
        expected = constants.NCOOL_COEFF * math.sqrt(60.0) * 500.0
        assert one == pytest.approx(expected, rel=1e-14)

    def test_app_d_form_equivalence(self):
        channels = [ch(0.6, 350), ch(0.25, 380, lower=2), ch(0.1, 900, lower=3)]
        p = rates.closure(channels)
        s = math.fsum(c.branching_ratio / c.wavelength_nm for c in channels)
        alt = math.sqrt(21.5 * 17.0) * p * constants.NCOOL_COEFF / s
        assert rates.n_cool(p, channels, 21.5, 17.0) == pytest.approx(alt, rel=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            rates.n_cool(0.0, [ch(1.0, 500)], 4.0, 15.0)
        with pytest.raises(ValueError):
            rates.n_cool(0.5, [ch(1.0, 500)], -4.0, 15.0)


class TestCoolingTimes:
    def test_products(self):
        t_cool, t10 = rates.cooling_and_survival_times(1000.0, 2000.0, 1e-6)
        assert t_cool == pytest.approx(1e-3)
        assert t10 == pytest.approx(2e-3)

    def test_hydroxyl_cation_scale(self):
        t_cool, _ = rates.cooling_and_survival_times(3260.0, 4e4, 11.2e-6)
        assert t_cool == pytest.approx(37e-3, rel=0.02)

    def test_carbon_dimer_scale(self):
        t_cool, _ = rates.cooling_and_survival_times(6643.0, 4e5, 65.7e-6)
        assert t_cool == pytest.approx(436e-3, rel=0.002)

    def test_infinite_survival(self):
        _, t10 = rates.cooling_and_survival_times(10.0, math.inf, 1e-6)
        assert t10 == math.inf


class TestMeanPhotonMomentum:
    def test_single_channel(self):
        got = rates.mean_photon_momentum([ch(1.0, 500)])
        assert got == pytest.approx(constants.PLANCK_J_S / 500e-9, rel=1e-14)

    def test_two_channel_weighting(self):
        lam = 420.0
        channels = [ch(0.5, lam), ch(0.5, 2 * lam, lower=2)]
        expected = constants.PLANCK_J_S * 3.0 / (4.0 * lam * 1e-9)
        assert rates.mean_photon_momentum(channels) == pytest.approx(expected, rel=1e-13)


class TestDoubleVariants:
    def test_lifetime_mean(self):
        assert rates.double_lifetime(1.0, 2.0) == 1.5
        assert rates.double_lifetime(3e-8, 3e-8) == 3e-8
        assert rates.double_lifetime(3.073e-8, 3.5473e-8) == pytest.approx(
            3.31015e-8, rel=1e-12
        )

    def test_closure_mean(self):
        assert rates.double_closure(1.0, 0.998) == pytest.approx(0.999)

    @given(st.floats(min_value=1e-6, max_value=1.0))
    @settings(max_examples=100, deadline=None)
    def test_closure_reduction_exact(self, p):
        assert rates.double_closure(p, p) == p

    def test_inverse_rate_saturation_limit(self):
        channels = [ch(0.6, 480), ch(0.3, 520, lower=2)]
        paired = list(zip(channels, channels))
        tau = 3e-8
        got = rates.double_inverse_rate(tau, paired, intensity_mw_cm2=1e30)
        assert got == pytest.approx(tau * (1 + len(paired) / 2), rel=1e-9)

    def test_intensity_term_halves_for_degenerate_pair(self):
        c = ch(0.4, 500)
        tau = 3e-8
        double_term = rates.double_inverse_rate(tau, [(c, c)]) - tau * 1.5
        single_term = rates.inverse_scattering_rate(tau, [c]) - tau * 2
        assert double_term == pytest.approx(0.5 * single_term, rel=1e-12)

    def test_mismatched_pair_rejected(self):
        with pytest.raises(ValueError, match="lower"):
            rates.double_inverse_rate(1e-8, [(ch(0.5, 500, lower=1), ch(0.5, 500, lower=2))])

    @given(
        st.floats(min_value=0.05, max_value=1.0),
        st.floats(min_value=4.0, max_value=500.0),
        st.floats(min_value=1.0, max_value=300.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_n_cool_reduction_exact(self, p, t, m):
        channels = (ch(0.7 * p, 410.0), ch(0.3 * p, 777.0, lower=2))
        single = rates.n_cool(p, channels, t, m)
        double = rates.double_n_cool(p, p, channels, channels, t, m)
        assert double == single  # bit-for-bit

    def test_n_cool_sqrt_scaling(self):
        a = [ch(0.8, 480)]
        b = [ch(0.75, 610)]
        base = rates.double_n_cool(0.8, 0.75, a, b, 4.0, 105.0)
        quad = rates.double_n_cool(0.8, 0.75, a, b, 16.0, 105.0)
        assert abs(quad / base - 2.0) < 1e-12
