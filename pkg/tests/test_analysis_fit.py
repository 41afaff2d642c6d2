#!/usr/bin/env python3
"""
Tests for histogram analysis, correlation metrics and wave-packet fitting
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from biphoton.analysis_fit import (
    Alignment,
    AnalysisOptions,
    analyze_histogram,
    baseline_error,
    baseline_estimate,
    brightness,
    cauchy_schwarz_factor,
    detected_to_generated_rate,
    dft_spectrum,
    exposure_corrected,
    fit_wavepacket,
    g2_cross_zero,
    model_counts,
    moving_average,
    Weighting,
    packet_envelope,
    packet_support,
    sbr,
    sbr_raw,
    spectral_brightness,
)
from biphoton.coincidence_sim import (
    CoincidenceHistogram,
    expected_background_floor,
    exposure,
    histogram_coincidences,
    synthesize_time_tags,
)
from biphoton.errors import EdgePeakError, FitBoundsError, NoPeakError, ParameterValidationError
from biphoton.schemas import AcquisitionConfig, DetectorChain, DriveParams, ExperimentConfig, MediumParams
from biphoton.wavepacket_engine import (
    auto_grid,
    compute_wavepacket,
    full_width_half_max,
    spectral_fwhm_of_wavepacket,
    temporal_fwhm,
    wavepacket_on_delays,
)

NARROWBAND_MEDIUM = MediumParams(alpha=110.0, gamma=3.0e-4)
NARROWBAND_DRIVE = DriveParams(omega_c=0.42, omega_p=0.32, delta_p=33.3)
WIDEBAND_MEDIUM = MediumParams(alpha=115.0, gamma=4.0e-3)
WIDEBAND_DRIVE = DriveParams(omega_c=2.1, omega_p=0.32, delta_p=33.3)


@lru_cache(maxsize=None)
def narrowband_grid():
    return auto_grid(NARROWBAND_MEDIUM, NARROWBAND_DRIVE)


def model_histogram(medium, drive, grid, bin_width_ns, n_bins, amplitude, baseline) -> CoincidenceHistogram:
    centers = (np.arange(n_bins) + 0.5) * bin_width_ns * 1e-9
    parameters = {"omega_c": drive.omega_c, "gamma": medium.gamma, "alpha": medium.alpha,
                  "amplitude": amplitude, "baseline": baseline}
    counts = model_counts(centers, parameters, medium, drive, grid)
    return CoincidenceHistogram(bin_width_ns=bin_width_ns, counts=counts, n_triggers=0)


@pytest.mark.unit
class TestSmoothingAndBaseline:
    """Test moving average, baseline and packet support"""

    def test_constant_unchanged(self):
        """Test a constant series survives smoothing"""
        np.testing.assert_allclose(moving_average(np.full(10, 3.0), 4), np.full(10, 3.0))
        np.testing.assert_allclose(moving_average(np.full(10, 3.0), 4, Alignment.CENTERED), np.full(10, 3.0))

    def test_identity_for_single_point(self):
        """Test n = 1 returns the input"""
        values = np.array([1.0, 5.0, 2.0, 0.0])
        np.testing.assert_array_equal(moving_average(values, 1), values)

    def test_trailing_impulse(self):
        """Test impulse (0,0,4,0,0) with n=4 gives 1 on the full-window bins"""
        smoothed = moving_average([0, 0, 4, 0, 0], 4)
        np.testing.assert_allclose(smoothed[3:], [1.0, 1.0])
        np.testing.assert_allclose(smoothed[:2], [0.0, 0.0])
        assert smoothed[2] == pytest.approx(4 / 3)

    def test_centered_impulse(self):
        """Test centered windows cover i-2..i+1 for n=4"""
        smoothed = moving_average([0, 0, 0, 4, 0, 0, 0], 4, "centered")
        np.testing.assert_allclose(smoothed[2:6], [1.0, 1.0, 1.0, 1.0])
        assert smoothed[1] == 0.0

    def test_total_preserved_up_to_edges(self):
        """Test |sum smoothed - sum raw| <= (n - 1) max bin"""
        values = np.random.default_rng(5).poisson(4.0, 500).astype(float)
        assert abs(moving_average(values, 4).sum() - values.sum()) <= 3 * values.max()

    def test_window_longer_than_series(self):
        """Test n > length is rejected"""
        with pytest.raises(ParameterValidationError):
            moving_average([1.0, 2.0], 3)

    def test_zero_histogram_baseline(self):
        """Test an all-zero histogram has zero baseline"""
        assert baseline_estimate(np.zeros(50)) == 0.0

    def test_baseline_of_packet_on_floor(self):
        """Test a decayed packet on a constant floor gives the floor"""
        x = np.arange(100.0)
        counts = 50.0 * np.exp(-x / 5.0) + 2.0
        assert baseline_estimate(counts) == pytest.approx(2.0, abs=1e-4)
        assert baseline_error(np.full(100, 2.0)) == 0.0

    def test_baseline_within_statistical_error(self):
        """Test a Poisson floor is recovered within 4 standard errors"""
        counts = np.random.default_rng(9).poisson(10.0, 1000).astype(float)
        assert abs(baseline_estimate(counts) - 10.0) < 4 * baseline_error(counts)

    def test_unstable_tail_warns(self, caplog):
        """Test a rising tail triggers a stability warning"""
        counts = np.concatenate([np.full(80, 1.0), np.linspace(1.0, 10.0, 20)])
        with caplog.at_level("WARNING"):
            baseline_estimate(counts)
        assert "Baseline unstable" in caplog.text

    def test_bad_tail_fraction(self):
        """Test tail_fraction outside (0, 0.5] is rejected"""
        with pytest.raises(ParameterValidationError):
            baseline_estimate(np.ones(10), tail_fraction=0.8)

    def test_packet_support_excludes_tail(self):
        """Test the support stops where the baseline tail begins"""
        counts = np.concatenate([[0.0, 5.0, 10.0, 5.0], np.ones(16)])
        assert packet_support(counts) == (0, 16)

    def test_packet_support_peak_in_tail(self):
        """Test a peak inside the tail is an edge-peak error"""
        counts = np.concatenate([np.ones(18), [10.0, 10.0]])
        with pytest.raises(EdgePeakError):
            packet_support(counts)

    def test_exposure_correction(self):
        """Test counts are divided by 1 - tau/window"""
        hist = CoincidenceHistogram(bin_width_ns=1000.0, counts=np.full(4, 10), n_triggers=1,
                                    metadata={"acquisition": {"window_us": 4.0}})
        np.testing.assert_allclose(exposure_corrected(hist), 10.0 / (1 - np.array([0.5, 1.5, 2.5, 3.5]) / 4))

    def test_exposure_correction_without_window(self):
        """Test histograms without a recorded window are left alone"""
        hist = CoincidenceHistogram(bin_width_ns=1.0, counts=np.arange(5), n_triggers=0)
        np.testing.assert_array_equal(exposure_corrected(hist), np.arange(5.0))


@pytest.mark.unit
class TestCorrelationMetrics:
    """Test SBR, g2 and the Cauchy-Schwarz factor"""

    def test_sbr_flat(self):
        """Test peak = baseline gives zero"""
        assert sbr(np.full(40, 3.0)) == 0.0

    def test_sbr_zero_baseline(self):
        """Test a zero baseline gives an unbounded ratio"""
        assert sbr(np.concatenate([[5.0, 5.0, 5.0, 5.0], np.zeros(36)])) == math.inf

    def test_sbr_smoothed_and_raw(self):
        """Test smoothed and raw peaks over a unit floor"""
        counts = np.ones(40)
        counts[10] = 9.0
        assert sbr_raw(counts) == pytest.approx(8.0)
        assert sbr(counts) == pytest.approx(2.0)

    def test_g2_cross(self):
        """Test g2 = SBR + 1"""
        assert g2_cross_zero(3.4) == pytest.approx(4.4)
        assert g2_cross_zero(0.0) == 1.0
        assert g2_cross_zero(39.0) == 40.0
        with pytest.raises(ParameterValidationError):
            g2_cross_zero(-0.1)

    def test_cauchy_schwarz(self):
        """Test the reported violation factors"""
        assert cauchy_schwarz_factor(4.4) == pytest.approx(4.84)
        assert cauchy_schwarz_factor(2.0) == pytest.approx(1.0)
        assert cauchy_schwarz_factor(41.0) == pytest.approx(420.25)
        assert cauchy_schwarz_factor(4.5) > cauchy_schwarz_factor(4.4)

    def test_cauchy_schwarz_zero_denominator(self):
        """Test zero autocorrelation is rejected"""
        with pytest.raises(ParameterValidationError):
            cauchy_schwarz_factor(4.4, 0.0, 2.0)


@pytest.mark.unit
class TestRatesAndBrightness:
    """Test generated-rate recovery and brightness conversions"""

    def test_ideal_detection(self):
        """Test unit efficiencies give counts per exposure time"""
        chain = DetectorChain(eta_s=1.0, eta_as=1.0)
        acq = AcquisitionConfig()
        assert detected_to_generated_rate(252.0, chain, acq) == pytest.approx(252.0 / (105_000 * 240e-6))

    def test_default_chain(self):
        """Test 842.5 detected pairs correspond to about 3340 pairs/s"""
        rate = detected_to_generated_rate(842.52, DetectorChain(), AcquisitionConfig())
        assert rate == pytest.approx(3340.0, rel=1e-4)

    def test_zero_efficiency(self):
        """Test zero efficiency is rejected"""
        with pytest.raises(ParameterValidationError):
            detected_to_generated_rate(10.0, DetectorChain(eta_s=0.0), AcquisitionConfig())

    def test_narrowband_spectral_brightness(self):
        """Test 3340 pairs/s at 56 uW over 50 kHz is about 1.2e6 pairs/(s mW MHz)"""
        bright = brightness(3340.0, 56e-6)
        assert bright == pytest.approx(5.96e4, rel=1e-3)
        assert spectral_brightness(bright, 50e3) == pytest.approx(1.19e6, rel=5e-3)

    def test_wideband_spectral_brightness(self):
        """Test 3460 pairs/s at 56 uW over 1.2 MHz is about 5.1e4"""
        assert spectral_brightness(brightness(3460.0, 56e-6), 1.2e6) == pytest.approx(5.1e4, rel=0.02)

    def test_power_scaling(self):
        """Test doubling the pump power halves brightness"""
        assert brightness(3340.0, 112e-6) == pytest.approx(brightness(3340.0, 56e-6) / 2)

    def test_nonpositive_divisors(self):
        """Test zero power or linewidth is rejected"""
        with pytest.raises(ParameterValidationError):
            brightness(1.0, 0.0)
        with pytest.raises(ParameterValidationError):
            spectral_brightness(1.0, -5.0)


@pytest.mark.unit
class TestSpectrum:
    """Test the histogram DFT"""

    def test_zero_input(self):
        """Test zero counts give a zero spectrum"""
        spectrum = dft_spectrum(np.zeros(64), bin_width=1e-6)
        assert not np.any(spectrum.values)

    def test_cosine_peak(self):
        """Test a cosine over the window peaks at its frequency"""
        n, dt = 512, 51.2e-9
        f = 16 / (n * dt)
        spectrum = dft_spectrum(np.cos(2 * math.pi * f * np.arange(n) * dt), bin_width=dt)
        assert spectrum.freq[np.argmax(spectrum.values)] == pytest.approx(f)

    def test_bin_width_from_histogram(self):
        """Test frequencies follow the histogram bin width"""
        hist = CoincidenceHistogram(bin_width_ns=100.0, counts=np.ones(10, dtype=np.int64), n_triggers=0)
        spectrum = dft_spectrum(hist)
        assert spectrum.freq[1] == pytest.approx(1 / (10 * 100e-9))
        assert spectrum.metadata["bin_width_s"] == pytest.approx(100e-9)

    def test_bare_series_needs_bin_width(self):
        """Test a plain array without bin width is rejected"""
        with pytest.raises(ParameterValidationError):
            dft_spectrum(np.ones(8))


@pytest.mark.unit
class TestPacketEnvelope:
    """Test the Gaussian packet envelope used for widths and SBR"""

    def setup_method(self):
        self.x = np.arange(1000, dtype=float)
        self.truth = 20.0 + 20.0 * np.exp(-0.5 * ((self.x - 200.0) / 60.0) ** 2)

    def test_flat_series_unchanged(self):
        """Test a series without signal above the baseline is returned as is"""
        np.testing.assert_allclose(packet_envelope(np.full(50, 4.0), 4.0), np.full(50, 4.0))

    def test_noise_free_width_preserved(self):
        """Test smoothing a broad packet changes its FWHM by under 5%"""
        width, _, _ = full_width_half_max(self.x, packet_envelope(self.truth, 20.0), 20.0)
        assert width == pytest.approx(2 * math.sqrt(2 * math.log(2)) * 60.0, rel=0.05)

    def test_far_tail_keeps_baseline(self):
        """Test bins far from the packet stay at the baseline"""
        envelope = packet_envelope(self.truth, 20.0)
        np.testing.assert_allclose(envelope[-200:], 20.0, atol=1e-9)

    def test_noisy_peak_not_inflated(self):
        """Test the envelope SBR of Poisson counts stays near the true ratio where the single-bin maximum overshoots"""
        counts = np.random.default_rng(7).poisson(self.truth).astype(float)
        baseline = baseline_estimate(counts)
        envelope_sbr = (packet_envelope(counts, baseline).max() - baseline) / baseline
        assert envelope_sbr == pytest.approx(1.0, abs=0.2)
        assert sbr_raw(counts) > envelope_sbr + 0.2


@pytest.mark.unit
class TestAnalysisChain:
    """Test the full chain on noise-free model histograms"""

    def setup_method(self):
        self.wp = compute_wavepacket(NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid())
        self.acq = AcquisitionConfig(window_us=240.0, bin_width_ns=51.2, histogram_span_us=200.0)
        self.hist = model_histogram(NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid(), 51.2, self.acq.n_bins, 100.0, 2.0)
        self.options = AnalysisOptions(average_points=1, correct_exposure=False, envelope=False)

    def test_widths_match_engine(self):
        """Test chain FWHMs reproduce the engine within one bin"""
        report = analyze_histogram(self.hist, DetectorChain(), self.acq, 56e-6, self.options)
        assert abs(report.temporal_fwhm - temporal_fwhm(self.wp)) < self.hist.bin_width
        frequency_bin = 1 / (self.hist.counts.size * self.hist.bin_width)
        assert abs(report.spectral_fwhm - spectral_fwhm_of_wavepacket(self.wp)) < frequency_bin

    def test_report_values(self):
        """Test SBR, g2 and rate figures of a model packet"""
        report = analyze_histogram(self.hist, DetectorChain(), self.acq, 56e-6, self.options)
        assert report.baseline == pytest.approx(2.0, rel=1e-4)
        assert report.sbr == pytest.approx(50.0, rel=1e-3)
        assert report.g2_cross_zero == pytest.approx(report.sbr + 1)
        assert report.cs_violation_factor == pytest.approx(report.g2_cross_zero ** 2 / 4)
        expected_true = np.sum(self.hist.counts[:self.acq.n_bins - round(0.2 * self.acq.n_bins)] - report.baseline)
        assert report.true_coincidences == pytest.approx(expected_true)
        assert report.brightness == pytest.approx(report.generated_pair_rate / 0.056)

    def test_envelope_on_noise_free_packet(self):
        """Test the default envelope keeps the model FWHM within 5% and the SBR within 10%"""
        report = analyze_histogram(self.hist, DetectorChain(), self.acq, 56e-6,
                                   AnalysisOptions(correct_exposure=False))
        assert report.temporal_fwhm == pytest.approx(temporal_fwhm(self.wp), rel=0.05)
        assert report.sbr == pytest.approx(50.0, rel=0.10)

    def test_empty_histogram(self):
        """Test an all-zero histogram has no peak"""
        hist = CoincidenceHistogram(bin_width_ns=51.2, counts=np.zeros(100, dtype=np.int64), n_triggers=0)
        with pytest.raises(NoPeakError):
            analyze_histogram(hist, DetectorChain(), self.acq, 56e-6)


@pytest.mark.unit
class TestFitInputs:
    """Test fit argument validation and the identity fit"""

    def setup_method(self):
        self.acq = AcquisitionConfig()
        self.hist = model_histogram(NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid(), 51.2, self.acq.n_bins, 50.0, 1.0)
        self.initial = {"omega_c": 0.42, "gamma": 3.0e-4, "alpha": 110.0, "amplitude": 50.0, "baseline": 1.0}

    def test_no_free_parameters(self):
        """Test an empty free set returns the starting residual"""
        initial = dict(self.initial, omega_c=0.5)
        result = fit_wavepacket(self.hist, initial, [], medium=NARROWBAND_MEDIUM, drive=NARROWBAND_DRIVE, grid=narrowband_grid())
        expected = model_counts(self.hist.bin_centers, initial, NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid())
        assert result.parameters == initial
        assert result.iterations == 1
        assert result.converged
        assert result.residual_sum_squares == pytest.approx(np.sum((expected - self.hist.counts) ** 2))

    def test_exact_start_has_zero_residual(self):
        """Test the generating parameters reproduce the histogram"""
        result = fit_wavepacket(self.hist, self.initial, [], medium=NARROWBAND_MEDIUM, drive=NARROWBAND_DRIVE,
                                grid=narrowband_grid())
        assert result.residual_sum_squares == pytest.approx(0.0, abs=1e-18)

    def test_poisson_weighting_residual(self):
        """Test Poisson weighting divides residuals by sqrt(max(counts, 1))"""
        initial = dict(self.initial, omega_c=0.5)
        result = fit_wavepacket(self.hist, initial, [], medium=NARROWBAND_MEDIUM, drive=NARROWBAND_DRIVE,
                                grid=narrowband_grid(), weighting=Weighting.POISSON)
        expected = model_counts(self.hist.bin_centers, initial, NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid())
        weights = 1.0 / np.sqrt(np.maximum(self.hist.counts, 1.0))
        assert result.residual_sum_squares == pytest.approx(np.sum(((expected - self.hist.counts) * weights) ** 2))
        unweighted = fit_wavepacket(self.hist, initial, [], medium=NARROWBAND_MEDIUM, drive=NARROWBAND_DRIVE,
                                    grid=narrowband_grid())
        assert result.residual_sum_squares < unweighted.residual_sum_squares

    def test_initial_outside_bounds(self):
        """Test a free start outside its bounds is rejected"""
        with pytest.raises(FitBoundsError):
            fit_wavepacket(self.hist, {"omega_c": 30.0}, ["omega_c"], grid=narrowband_grid())

    def test_inverted_bounds(self):
        """Test lower >= upper is rejected"""
        with pytest.raises(FitBoundsError):
            fit_wavepacket(self.hist, {}, ["omega_c"], bounds={"omega_c": (1.0, 0.1)}, grid=narrowband_grid())

    def test_unknown_parameter(self):
        """Test parameters outside the model are rejected"""
        with pytest.raises(ParameterValidationError):
            fit_wavepacket(self.hist, {}, ["delta_p"], grid=narrowband_grid())


@pytest.mark.slow
class TestFitRoundTrip:
    """Test recovery of generating parameters from noiseless packets"""

    def test_recover_narrowband_coupling(self):
        """Test Omega_c = 0.42 and amplitude recovered within 1% from 0.5"""
        acq = AcquisitionConfig()
        hist = model_histogram(NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid(), 51.2, acq.n_bins, 50.0, 1.0)
        initial = {"omega_c": 0.5, "amplitude": 40.0, "baseline": 1.0}
        result = fit_wavepacket(hist, initial, ["omega_c", "amplitude"], medium=NARROWBAND_MEDIUM,
                                drive=NARROWBAND_DRIVE, grid=narrowband_grid())
        assert result.converged
        assert result.parameters["omega_c"] == pytest.approx(0.42, rel=0.01)
        assert result.parameters["amplitude"] == pytest.approx(50.0, rel=0.01)
        assert result.parameters["baseline"] == 1.0

    def test_recover_narrowband_decoherence(self):
        """Test gamma = 3e-4 recovered within 10% from 4e-4 with a free amplitude"""
        acq = AcquisitionConfig()
        hist = model_histogram(NARROWBAND_MEDIUM, NARROWBAND_DRIVE, narrowband_grid(), 51.2, acq.n_bins, 50.0, 1.0)
        initial = {"gamma": 4.0e-4, "amplitude": 45.0, "baseline": 1.0}
        result = fit_wavepacket(hist, initial, ["gamma", "amplitude"], medium=NARROWBAND_MEDIUM,
                                drive=NARROWBAND_DRIVE, grid=narrowband_grid())
        assert result.parameters["gamma"] == pytest.approx(3.0e-4, rel=0.10)
        assert result.parameters["amplitude"] == pytest.approx(50.0, rel=0.05)
        assert result.bounds["gamma"][0] >= 1e-5

    def test_recover_wideband_coupling(self):
        """Test the oscillating packet is fitted within 10% from the Autler-Townes estimate"""
        grid = auto_grid(WIDEBAND_MEDIUM, WIDEBAND_DRIVE)
        acq = AcquisitionConfig(window_us=240.0, bin_width_ns=6.4, histogram_span_us=10.0)
        hist = model_histogram(WIDEBAND_MEDIUM, WIDEBAND_DRIVE, grid, 6.4, acq.n_bins, 80.0, 2.0)
        initial = {"omega_c": 2.0, "amplitude": 80.0, "baseline": 2.0}
        result = fit_wavepacket(hist, initial, ["omega_c", "amplitude"], medium=WIDEBAND_MEDIUM,
                                drive=WIDEBAND_DRIVE, grid=grid)
        assert result.parameters["omega_c"] == pytest.approx(2.1, rel=0.10)
        assert result.residual_sum_squares <= np.sum((hist.counts - model_counts(
            hist.bin_centers, dict(initial, gamma=4.0e-3, alpha=115.0), WIDEBAND_MEDIUM, WIDEBAND_DRIVE, grid)) ** 2)


@pytest.mark.slow
class TestNarrowbandRoundTrip:
    """Test the analysis chain on a simulated narrowband acquisition"""

    @classmethod
    def setup_class(cls):
        config = ExperimentConfig()
        cls.config = config
        cls.wp = compute_wavepacket(config.medium, config.drive)
        stream = synthesize_time_tags(config.medium, config.drive, config.pair_rate_per_s, config.chain,
                                      config.acquisition, wp=cls.wp)
        cls.hist = histogram_coincidences(stream, config.acquisition)
        cls.report = analyze_histogram(cls.hist, config.chain, config.acquisition, config.drive.pump_power)

    def test_generated_rate_recovered(self):
        """Test the input pair rate is recovered within 3 standard errors"""
        assert abs(self.report.generated_pair_rate - 3340.0) < 3 * self.report.generated_pair_rate_error

    def test_baseline_matches_floor(self):
        """Test the tail baseline agrees with the accidental floor"""
        floor = expected_background_floor(3340.0, self.config.chain, self.config.acquisition)
        error = baseline_error(exposure_corrected(self.hist))
        assert abs(self.report.baseline - floor) < 3 * error + 0.05 * floor

    def test_sbr_range(self):
        """Test the envelope SBR lands within 30% of the measured value of 3.4"""
        assert 3.4 * 0.7 <= self.report.sbr <= 3.4 * 1.3
        assert self.report.cs_violation_factor > 1.0

    def test_temporal_width_order(self):
        """Test the envelope FWHM of the noisy data is within 15% of the model FWHM"""
        assert self.report.temporal_fwhm == pytest.approx(temporal_fwhm(self.wp), rel=0.15)

    def test_model_shape_tracks_data(self):
        """Test the background-subtracted data correlates with the model packet"""
        model = wavepacket_on_delays(self.wp, self.hist.bin_centers)
        data = exposure_corrected(self.hist) - self.report.baseline
        assert np.corrcoef(model, data)[0, 1] > 0.4

    def test_model_shape_chi_square(self):
        """Test Pearson chi-square per degree of freedom of the scaled model packet is near 1"""
        acceptance = exposure(self.hist.bin_centers, self.hist.window)
        shape = wavepacket_on_delays(self.wp, self.hist.bin_centers)
        design = np.column_stack([acceptance * shape, acceptance])[1:]
        counts = self.hist.counts[1:].astype(float)
        coefficients, *_ = np.linalg.lstsq(design, counts, rcond=None)
        expected = design @ coefficients
        chi_square = np.sum((counts - expected) ** 2 / expected)
        assert chi_square / (counts.size - 2) == pytest.approx(1.0, abs=0.15)
