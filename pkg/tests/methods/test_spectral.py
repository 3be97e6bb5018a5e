"""Tests for the spectral.py module."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from slipt_lab.exceptions import ConfigError, DomainError
from slipt_lab.methods.spectral import *
from slipt_lab.test_utils import *


class TestPhysicalConstants:
    """Tests for PhysicalConstants."""

    def test_equivalent_size_of_one_square_centimetre(self):
        """Test nu_s for the reference cell area."""
        assert CONSTANTS.equivalent_size(1e-4) == pytest.approx(6.8079e-9, rel=1e-4)

    def test_raises_for_non_positive_constant(self):
        """Test every constant must be strictly positive."""
        with pytest.raises(DomainError, match="alpha_se"):
            PhysicalConstants(alpha_se=0.0)

    def test_raises_for_non_positive_area(self):
        """Test the cell area guard."""
        with pytest.raises(DomainError):
            CONSTANTS.equivalent_size(0.0)


class TestThermalVoltage:
    """Tests for thermal_voltage."""

    def test_room_temperature(self):
        """Test k_b T / q_0 at 300 K."""
        assert thermal_voltage(300.0) == pytest.approx(0.025852, rel=1e-4)

    def test_raises_at_absolute_zero(self):
        """Test the temperature guard."""
        with pytest.raises(DomainError):
            thermal_voltage(0.0)


class TestSpectralBand:
    """Tests for SpectralBand."""

    @pytest.mark.parametrize("edges", [(700e-9, 400e-9), (0.0, 400e-9), (5e-7, 5e-7)])
    def test_raises_for_invalid_edges(self, edges):
        """Test band edges must be ordered and positive."""
        with pytest.raises(DomainError):
            SpectralBand(*edges)

    def test_contains_is_closed(self):
        """Test both end points belong to the band."""
        band = SpectralBand(400e-9, 1000e-9)

        assert band.contains(400e-9)
        assert band.contains(1000e-9)
        assert not band.contains(1001e-9)

    def test_contains_without_lower_edge(self):
        """Test the lower edge can be left out for a band sitting on a neighbour."""
        band = SpectralBand(650e-9, 900e-9)

        assert not band.contains(650e-9, closed_lower=False)
        assert band.contains(651e-9, closed_lower=False)
        assert band.contains(900e-9, closed_lower=False)

    def test_contains_array(self):
        """Test element-wise membership."""
        band = SpectralBand(400e-9, 650e-9)

        actual = band.contains(np.array([300e-9, 500e-9, 700e-9]))

        np.testing.assert_array_equal(actual, [False, True, False])

    @parametrize_cases(
        Case(label="shared_end_point", other=(650e-9, 900e-9), expected=False),
        Case(label="intersecting", other=(600e-9, 900e-9), expected=True),
        Case(label="disjoint", other=(900e-9, 1100e-9), expected=False),
    )
    def test_overlaps(self, other, expected):
        """Test touching bands do not overlap."""
        assert SpectralBand(400e-9, 650e-9).overlaps(SpectralBand(*other)) is expected

    def test_midpoint(self):
        """Test the band midpoint."""
        assert SpectralBand(400e-9, 700e-9).midpoint == pytest.approx(550e-9)


class TestReceiverSpec:
    """Tests for ReceiverSpec."""

    def test_r_sigma_of_single_junction(self, rx_single):
        """Test R_Sigma is the series resistance plus the load."""
        assert rx_single.r_sigma == pytest.approx(10_100.0)

    def test_r_sigma_of_four_junctions(self, rx_four):
        """Test the four series resistances add up."""
        assert rx_four.series_resistance == pytest.approx(400.0)
        assert rx_four.r_sigma == pytest.approx(10_400.0)

    def test_info_junction_of_four_junctions(self, rx_four):
        """Test 980 nm lands in the third band."""
        assert rx_four.info_junction == 3
        assert rx_four.info_index == 2

    def test_raises_for_overlapping_bands(self):
        """Test intersecting passbands are rejected."""
        with pytest.raises(DomainError, match="intersect"):
            make_receiver(((400, 700), (650, 900)))

    def test_raises_for_info_junction_out_of_range(self):
        """Test the information junction must exist."""
        with pytest.raises(DomainError, match="info_junction"):
            make_receiver(info_junction=2)

    def test_raises_without_junctions(self):
        """Test an empty stack is rejected."""
        with pytest.raises(DomainError):
            ReceiverSpec(junctions=())

    def test_raises_for_non_positive_load(self):
        """Test circuit elements must be positive."""
        with pytest.raises(DomainError, match="r_load"):
            make_receiver(r_load=0.0)


class TestJunctionSpec:
    """Tests for JunctionSpec."""

    @parametrize_cases(
        Case(label="zero_efficiency", params={"efficiency": 0.0}),
        Case(label="efficiency_above_one", params={"efficiency": 1.2}),
        Case(label="zero_saturation_current", params={"i_sat1": 0.0}),
        Case(label="negative_series_resistance", params={"r_series": -1.0}),
    )
    def test_raises_for_invalid_parameters(self, params):
        """Test the junction parameter guards."""
        with pytest.raises(DomainError):
            JunctionSpec(SpectralBand(400e-9, 1000e-9), **params)


class TestPlanckRadiance:
    """Tests for planck_radiance."""

    def test_peak_follows_wien_displacement(self):
        """Test the radiance peaks at b / T."""
        wavelengths = np.linspace(300e-9, 800e-9, 5001)

        radiance = planck_radiance(wavelengths, 5778.0)

        peak = wavelengths[np.argmax(radiance)]
        assert peak == pytest.approx(2.897771955e-3 / 5778.0, abs=2e-10)

    def test_scalar_matches_array(self):
        """Test scalar and vector evaluation agree."""
        wavelengths = np.array([500e-9, 980e-9])

        actual = planck_radiance(wavelengths, 5778.0)

        assert actual[1] == pytest.approx(planck_radiance(980e-9, 5778.0), rel=1e-14)
        assert isinstance(planck_radiance(980e-9, 5778.0), float)

    def test_no_overflow_for_large_exponent(self):
        """Test the far Wien tail evaluates to a finite value."""
        actual = planck_radiance(1e-8, 300.0)

        assert np.isfinite(actual)
        assert actual == 0.0

    @pytest.mark.parametrize("wavelength", [0.0, -1e-7])
    def test_raises_for_non_positive_wavelength(self, wavelength):
        """Test the wavelength guard."""
        with pytest.raises(DomainError):
            planck_radiance(wavelength, 5778.0)


class TestResponsivity:
    """Tests for responsivity."""

    @parametrize_cases(
        Case(label="information_carrier", wavelength=980e-9, expected=0.55330),
        Case(label="band_midpoint", wavelength=550e-9, expected=0.31052),
    )
    def test_inside_band(self, rx_single, wavelength, expected):
        """Test lambda eta q_0 / (k_p c) for the default efficiency."""
        actual = responsivity(wavelength, rx_single.junctions[0])

        assert actual == pytest.approx(expected, rel=1e-4)

    def test_zero_outside_band(self, rx_single):
        """Test no response beyond the band edge."""
        assert responsivity(1100e-9, rx_single.junctions[0]) == 0.0


class TestAmbientPhotocurrent:
    """Tests for ambient_photocurrent."""

    def test_zero_without_ambient_light(self, rx_single):
        """Test mu_a = 0 short-circuits the integral."""
        assert ambient_photocurrent(rx_single.junctions[0], AmbientModel(), rx_single) == 0.0

    def test_matches_trapezoid_rule(self, rx_single):
        """Test the adaptive integral against a dense fixed grid."""
        junction = rx_single.junctions[0]
        ambient = AmbientModel(mu_a=0.7)
        wavelengths = np.linspace(400e-9, 1000e-9, 200_001)
        integrand = ambient_psd(wavelengths, ambient, rx_single) * responsivity(
            wavelengths,
            junction,
        )

        actual = ambient_photocurrent(junction, ambient, rx_single)

        assert actual == pytest.approx(trapezoid(integrand, wavelengths), rel=1e-6)

    def test_scales_linearly_with_mu_a(self, rx_single):
        """Test the ambient current is proportional to mu_a."""
        junction = rx_single.junctions[0]

        low = ambient_photocurrent(junction, AmbientModel(mu_a=0.2), rx_single)
        high = ambient_photocurrent(junction, AmbientModel(mu_a=0.7), rx_single)

        assert high == pytest.approx(3.5 * low, rel=1e-8)


class TestEnergySignal:
    """Tests for EnergySignal."""

    def test_split_evenly(self):
        """Test equal shares of the total power."""
        signal = EnergySignal.split_evenly(0.1, [500e-9, 600e-9])

        assert [line.power for line in signal.lines] == [0.05, 0.05]
        assert signal.total_power == pytest.approx(0.1)

    def test_split_without_wavelengths(self):
        """Test no lines are created without wavelengths."""
        assert EnergySignal.split_evenly(0.1, []).lines == ()

    def test_raises_for_duplicate_wavelengths(self):
        """Test lines must sit at distinct wavelengths."""
        with pytest.raises(DomainError, match="distinct"):
            EnergySignal((SpectralLine(550e-9, 0.01), SpectralLine(550e-9, 0.02)))


class TestAbsorbingJunction:
    """Tests for absorbing_junction."""

    @parametrize_cases(
        Case(label="third_band", wavelength=980e-9, expected=3),
        Case(label="shared_edge_goes_to_first", wavelength=650e-9, expected=1),
        Case(label="outside_all_bands", wavelength=2000e-9, expected=None),
    )
    def test_expected(self, rx_four, wavelength, expected):
        """Test the 1-based junction index."""
        assert absorbing_junction(rx_four.junctions, wavelength) == expected

    def test_shared_edge_in_unsorted_stack(self):
        """Test the lower band keeps a shared edge whatever the stack order."""
        junctions = (
            JunctionSpec(SpectralBand(650e-9, 900e-9)),
            JunctionSpec(SpectralBand(400e-9, 650e-9)),
        )

        assert absorbing_junction(junctions, 650e-9) == 2
        assert absorbing_junction(junctions, 900e-9) == 1


class TestBandMidpoints:
    """Tests for band_midpoints."""

    def test_expected(self, rx_four):
        """Test one midpoint per band."""
        actual = band_midpoints(junction.band for junction in rx_four.junctions)

        assert actual == pytest.approx((525e-9, 775e-9, 1000e-9, 1450e-9))


class TestInfoGain:
    """Tests for info_gain."""

    def test_uses_junction_responsivity(self, rx_single):
        """Test g_s = h r(lambda_0)."""
        actual = info_gain(rx_single, InfoSignal(gain=0.5))

        assert actual == pytest.approx(0.5 * 0.55330, rel=1e-4)

    def test_uses_override(self):
        """Test an explicit responsivity replaces the junction one."""
        rx = make_receiver(((400, 700),), info_responsivity=0.4)

        assert info_gain(rx, InfoSignal(gain=0.5)) == pytest.approx(0.2)

    def test_raises_outside_band(self):
        """Test a carrier the junction cannot absorb is a configuration error."""
        rx = make_receiver(((400, 700),))

        with pytest.raises(ConfigError, match="info_responsivity_a_per_w"):
            info_gain(rx, InfoSignal())


class TestPhotocurrents:
    """Tests for photocurrents."""

    def test_energy_line_current(self, rx_single):
        """Test a laser line adds p g r(lambda) to its junction."""
        energy = EnergySignal((SpectralLine(550e-9, 0.01),))

        state = photocurrents(rx_single, AmbientModel(), energy, InfoSignal())

        assert state.j_a == pytest.approx((0.01 * 0.31052,), rel=1e-4)
        assert state.g_s == pytest.approx(0.55330, rel=1e-4)

    def test_lines_only_feed_their_band(self, rx_four):
        """Test a line outside a band adds nothing to that junction."""
        energy = EnergySignal((SpectralLine(1000e-9, 0.01),))

        state = photocurrents(rx_four, AmbientModel(), energy, InfoSignal())

        assert state.j_a[0] == 0.0
        assert state.j_a[1] == 0.0
        assert state.j_a[2] > 0.0
        assert state.j_a[3] == 0.0

    @pytest.mark.parametrize("edge", [0, 1, 2])
    def test_line_on_shared_edge_feeds_one_junction(self, rx_four, edge):
        """Test a line on the edge of two bands is counted once, by the lower band."""
        wavelength = rx_four.junctions[edge].band.lambda_max
        energy = EnergySignal((SpectralLine(wavelength, 0.01),))

        state = photocurrents(rx_four, AmbientModel(), energy, InfoSignal())

        expected = [0.0] * 4
        expected[edge] = 0.01 * responsivity(wavelength, rx_four.junctions[edge])
        assert list(state.j_a) == pytest.approx(expected, rel=1e-12)

    def test_ambient_and_energy_add_up(self, rx_four):
        """Test ambient and energy photocurrents add junction by junction."""
        ambient = AmbientModel(mu_a=0.7)
        energy = EnergySignal.split_evenly(
            0.1,
            band_midpoints(junction.band for junction in rx_four.junctions),
        )
        info = InfoSignal()

        both = photocurrents(rx_four, ambient, energy, info)
        ambient_only = photocurrents(rx_four, ambient, EnergySignal(), info)
        energy_only = photocurrents(rx_four, AmbientModel(), energy, info)

        expected = np.add(ambient_only.j_a, energy_only.j_a)
        np.testing.assert_allclose(both.j_a, expected, rtol=1e-9)
        assert both.g_s == ambient_only.g_s == energy_only.g_s

    def test_ambient_reaches_every_junction(self, state_four):
        """Test ambient light gives every junction a current."""
        assert all(current > 0 for current in state_four.j_a)


class TestPhotocurrentState:
    """Tests for PhotocurrentState."""

    def test_junction_currents_add_information_current(self):
        """Test only the information junction receives g_s s."""
        state = PhotocurrentState(j_a=(1e-3, 2e-3), g_s=0.5, info_junction=2)

        np.testing.assert_allclose(state.junction_currents(0.1), [1e-3, 0.052])

    def test_raises_for_negative_current(self):
        """Test photocurrents must be non-negative."""
        with pytest.raises(DomainError):
            PhotocurrentState(j_a=(-1e-3,), g_s=0.5)

    def test_raises_for_missing_info_junction(self):
        """Test the information junction must exist."""
        with pytest.raises(DomainError):
            PhotocurrentState(j_a=(1e-3,), g_s=0.5, info_junction=2)
