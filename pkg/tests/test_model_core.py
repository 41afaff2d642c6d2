#!/usr/bin/env python3
"""
Tests for the pointwise susceptibility model
"""

import math

import numpy as np
import pytest

from biphoton.errors import ParameterValidationError
from biphoton.model_core import (
    autler_townes_splitting,
    biphoton_spectral_amplitude,
    cross_susceptibility,
    csinc,
    decoherence_model_from_point,
    decoherence_rate,
    effective_alpha,
    eit_transmission,
    group_delay_spectrum,
    phase_mismatch,
    phase_mismatch_efficiency,
    propagation_factor,
    self_susceptibility,
)
from biphoton.schemas import BeamGeometry, DecoherenceModel, DriveParams, MediumParams


@pytest.mark.unit
class TestSusceptibilities:
    """Test cross- and self-susceptibility groups"""

    def setup_method(self):
        self.medium = MediumParams(alpha=110.0, gamma=3.0e-4)
        self.drive = DriveParams(omega_c=0.42, omega_p=0.32, delta_p=33.3)
        self.rng = np.random.default_rng(7)

    def test_cross_susceptibility_line_center(self):
        """Test chi at delta=0 against the hand-evaluated magnitude"""
        value = cross_susceptibility(0.0, self.medium, self.drive)
        assert isinstance(value, complex)
        assert abs(value) == pytest.approx(0.63, rel=0.01)

    def test_cross_susceptibility_zero_pump(self):
        """Test chi vanishes without pump"""
        drive = self.drive.replace(omega_p=0.0)
        assert cross_susceptibility(0.3, self.medium, drive) == 0

    def test_cross_susceptibility_decays_far_from_resonance(self):
        """Test |chi| falls off as delta grows"""
        values = np.abs(cross_susceptibility(np.array([1.0, 10.0, 100.0]), self.medium, self.drive))
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-3

    def test_cross_susceptibility_linear_in_pump_and_alpha(self):
        """Test exact linearity in Omega_p and alpha"""
        delta = self.rng.uniform(-5, 5, 200)
        base = cross_susceptibility(delta, self.medium, self.drive)
        doubled_pump = cross_susceptibility(delta, self.medium, self.drive.replace(omega_p=0.64))
        doubled_alpha = cross_susceptibility(delta, self.medium.replace(alpha=220.0), self.drive)
        np.testing.assert_allclose(doubled_pump, 2 * base, rtol=1e-14)
        np.testing.assert_allclose(doubled_alpha, 2 * base, rtol=1e-14)

    def test_self_susceptibility_perfect_eit(self):
        """Test phi(0) is exactly zero without decoherence"""
        medium = self.medium.replace(gamma=0.0)
        assert self_susceptibility(0.0, medium, self.drive) == 0

    def test_self_susceptibility_line_center(self):
        """Test phi(0) with decoherence is almost purely imaginary"""
        phi = self_susceptibility(0.0, self.medium, self.drive)
        assert abs(phi.real) < 1e-12
        assert phi.imag == pytest.approx(0.0935, rel=5e-3)

    def test_self_susceptibility_against_direct_evaluation(self):
        """Test phi at delta=Omega_c/2 against plain complex arithmetic"""
        medium = self.medium.replace(gamma=0.0)
        delta = 0.21
        expected = 55.0 * delta / (0.1764 - 4 * delta * (delta + 0.5j))
        assert self_susceptibility(delta, medium, self.drive) == pytest.approx(expected, rel=1e-12)

    def test_conjugation_symmetry(self):
        """Test phi(-delta) = -conj(phi(delta))"""
        delta = self.rng.uniform(-3, 3, 500)
        forward = self_susceptibility(delta, self.medium, self.drive)
        mirrored = self_susceptibility(-delta, self.medium, self.drive)
        np.testing.assert_allclose(mirrored, -np.conj(forward), rtol=1e-12, atol=1e-15)

    def test_non_finite_detuning_rejected(self):
        """Test NaN detuning raises a validation error"""
        with pytest.raises(ParameterValidationError):
            self_susceptibility(float("nan"), self.medium, self.drive)

    def test_effective_alpha_average(self):
        """Test window-average OD when alpha is the initial OD"""
        assert effective_alpha(self.medium) == 110.0
        initial = self.medium.replace(alpha_is_average=False)
        assert effective_alpha(initial) == pytest.approx(110.0 * 0.95)


@pytest.mark.unit
class TestAmplitudeAndTransmission:
    """Test spectral amplitude, sinc helpers and EIT transmission"""

    def setup_method(self):
        self.medium = MediumParams(alpha=110.0, gamma=3.0e-4)
        self.drive = DriveParams(omega_c=0.42, omega_p=0.32, delta_p=33.3)

    def test_csinc_at_zero(self):
        """Test sinc(0) = 1"""
        assert csinc(0.0) == 1

    def test_propagation_factor_continuous_at_series_switch(self):
        """Test series and exact branches agree near the switch radius"""
        z_small = 0.99e-4 * (1 + 1j) / math.sqrt(2)
        z_large = 1.01e-4 * (1 + 1j) / math.sqrt(2)
        exact_small = (np.exp(2j * z_small) - 1) / (2j * z_small)
        assert propagation_factor(z_small) == pytest.approx(exact_small, abs=1e-11)
        assert propagation_factor(z_large) == pytest.approx(propagation_factor(z_small), abs=1e-5)

    def test_propagation_factor_matches_sinc_form(self):
        """Test (exp(2i phi) - 1)/(2i phi) equals sinc(phi) exp(i phi)"""
        phi = np.array([0.3 + 0.1j, 1.5 + 2.0j, -0.7 + 0.4j])
        np.testing.assert_allclose(propagation_factor(phi), csinc(phi) * np.exp(1j * phi), rtol=1e-12)

    def test_propagation_factor_finite_on_absorption_line(self):
        """Test large positive Im(phi) does not overflow"""
        value = propagation_factor(5.0 + 800.0j)
        assert np.isfinite(value)
        assert abs(value) < 1e-2

    def test_amplitude_equals_chi_when_phi_vanishes(self):
        """Test amplitude(0) = chi(0) for gamma = 0"""
        medium = self.medium.replace(gamma=0.0)
        assert biphoton_spectral_amplitude(0.0, medium, self.drive) == cross_susceptibility(0.0, medium, self.drive)

    def test_amplitude_composes_chi_and_phi(self):
        """Test amplitude(0) = chi(0) sinc(phi(0)) exp(i phi(0))"""
        chi = cross_susceptibility(0.0, self.medium, self.drive)
        phi = self_susceptibility(0.0, self.medium, self.drive)
        expected = chi * csinc(phi) * np.exp(1j * phi)
        assert biphoton_spectral_amplitude(0.0, self.medium, self.drive) == pytest.approx(expected, rel=1e-12)

    def test_amplitude_vanishes_far_out(self):
        """Test |amplitude| -> 0 for large |delta|"""
        values = np.abs(biphoton_spectral_amplitude(np.array([-1e3, 1e3]), self.medium, self.drive))
        assert np.all(values < 1e-4)

    def test_transmission_unity_at_perfect_eit(self):
        """Test T(0) = 1 exactly for gamma = 0"""
        medium = self.medium.replace(gamma=0.0)
        assert eit_transmission(0.0, medium, self.drive) == 1.0

    def test_transmission_with_decoherence(self):
        """Test T(0) ~ exp(-2 alpha gamma / Omega_c^2)"""
        assert eit_transmission(0.0, self.medium, self.drive) == pytest.approx(0.688, rel=0.01)

    def test_transmission_absorbing_outside_window(self):
        """Test deep absorption at delta = Omega_c / 2"""
        assert eit_transmission(0.21, self.medium, self.drive) < 0.01

    def test_transmission_passive(self):
        """Test T <= 1 everywhere for gamma >= 0"""
        delta = np.linspace(-10, 10, 20001)
        assert np.all(eit_transmission(delta, self.medium, self.drive) <= 1 + 1e-12)

    def test_group_delay_at_line_center(self):
        """Test 2 Re(dphi/ddelta) at delta=0 equals alpha / Omega_c^2"""
        medium = self.medium.replace(gamma=0.0)
        assert group_delay_spectrum(0.0, medium, self.drive) == pytest.approx(110.0 / 0.42 ** 2, rel=1e-12)

    def test_group_delay_matches_finite_difference(self):
        """Test analytic derivative against a central difference"""
        delta, h = 0.05, 1e-6
        numeric = (self_susceptibility(delta + h, self.medium, self.drive)
                   - self_susceptibility(delta - h, self.medium, self.drive)) / (2 * h)
        assert group_delay_spectrum(delta, self.medium, self.drive) == pytest.approx(2 * numeric.real, rel=1e-5)

    def test_autler_townes_splitting(self):
        """Test the absorption doublet separation equals Omega_c without decoherence"""
        medium = self.medium.replace(gamma=0.0)
        assert autler_townes_splitting(medium, self.drive.replace(omega_c=2.1)) == pytest.approx(2.1, abs=1e-3)
        assert autler_townes_splitting(medium, self.drive) == pytest.approx(0.42, rel=0.01)


@pytest.mark.unit
class TestDecoherenceAndGeometry:
    """Test the decoherence law and phase mismatch"""

    def test_decoherence_at_zero_coupling(self):
        """Test gamma(0) = gamma0"""
        assert decoherence_rate(0.0, DecoherenceModel()) == pytest.approx(2e-4)

    def test_decoherence_calibration_point(self):
        """Test the default model reproduces (2.1, 4e-3)"""
        assert decoherence_rate(2.1, DecoherenceModel()) == pytest.approx(4.0e-3, rel=1e-9)

    def test_decoherence_weak_coupling(self):
        """Test gamma(0.42) ~ 3.5e-4, within 20% of 3e-4"""
        gamma = decoherence_rate(0.42, DecoherenceModel())
        assert gamma == pytest.approx(3.5e-4, rel=0.02)
        assert abs(gamma - 3e-4) / 3e-4 < 0.2

    def test_decoherence_monotone(self):
        """Test gamma is nondecreasing in Omega_c"""
        model = DecoherenceModel()
        values = [decoherence_rate(w, model) for w in np.linspace(0, 3, 31)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_decoherence_negative_coupling_rejected(self):
        """Test negative Omega_c raises"""
        with pytest.raises(ParameterValidationError):
            decoherence_rate(-0.1, DecoherenceModel())

    def test_decoherence_model_from_point(self):
        """Test slope derived from a calibration point"""
        model = decoherence_model_from_point(2.1, 4.0e-3, 2.0e-4)
        assert model.a_switch == pytest.approx(8.6e-4, rel=0.01)
        with pytest.raises(ParameterValidationError):
            decoherence_model_from_point(2.1, 1e-4, 2.0e-4)

    def test_phase_mismatch_collinear(self):
        """Test perfect phase matching at theta=0 with paired wavelengths"""
        assert phase_mismatch(BeamGeometry(theta_deg=0.0)) == 0.0

    def test_phase_mismatch_default_geometry(self):
        """Test 1 degree, Rb wavelengths, default length -> 0.23 rad"""
        assert phase_mismatch(BeamGeometry()) == pytest.approx(0.23, rel=0.05)

    def test_phase_mismatch_linear_in_length(self):
        """Test doubling L doubles the mismatch"""
        single = phase_mismatch(BeamGeometry())
        double = phase_mismatch(BeamGeometry(length_mm=20.22))
        assert double == pytest.approx(2 * single, rel=1e-12)

    def test_phase_mismatch_efficiency(self):
        """Test the reduction at 0.23 rad is negligible"""
        assert phase_mismatch_efficiency(0.0) == pytest.approx(1.0)
        assert phase_mismatch_efficiency(0.23) == pytest.approx(1 - 0.23 ** 2 / 12, rel=1e-4)
        assert phase_mismatch_efficiency(0.23) > 0.99
