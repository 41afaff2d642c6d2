"""
Analysis chain for start-stop coincidence histograms: smoothing, baseline,
SBR, correlation metrics, generated-rate recovery, brightness, DFT spectra
and least-squares fits of the wave-packet model.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from lmfit import Minimizer, Parameters
from scipy.ndimage import gaussian_filter1d

from .coincidence_sim import CoincidenceHistogram, exposure
from .errors import EdgePeakError, FitBoundsError, NoPeakError, ParameterValidationError
from .observability import structured_logger, track_performance
from .schemas import (
    AcquisitionConfig, AnalysisReport, DetectorChain, DriveParams, FitResult,
    GridSpec, MediumParams, PhysicalConstants,
)
from .wavepacket_engine import (
    Spectrum, SpectrumKind, auto_grid, compute_wavepacket, full_width_half_max,
    main_lobe_peak, one_sided_dft, spectral_width, wavepacket_on_delays,
)

logger = logging.getLogger(__name__)

HistogramLike = Union[CoincidenceHistogram, Sequence[float], np.ndarray]

FIT_PARAMETERS = ("omega_c", "gamma", "alpha", "amplitude", "baseline")
DEFAULT_BOUNDS = {
    "omega_c": (1e-3, 20.0),
    "gamma": (1e-5, 0.1),
    "alpha": (1.0, 1000.0),
}
FIT_MAX_ITERATIONS = 500
FIT_RELATIVE_TOLERANCE = 1e-8
BASELINE_STABILITY = 0.1
# Gaussian envelope width as a fraction of the 10%-90% extent of the packet signal
ENVELOPE_WIDTH_FRACTION = 1 / 12
ENVELOPE_QUANTILES = (0.1, 0.9)


class Alignment(str, Enum):
    TRAILING = "trailing"
    CENTERED = "centered"


class Weighting(str, Enum):
    NONE = "none"
    POISSON = "poisson"


def _counts(hist: HistogramLike) -> np.ndarray:
    if isinstance(hist, CoincidenceHistogram):
        return np.asarray(hist.counts, dtype=float)
    values = np.asarray(hist, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ParameterValidationError("Histogram must be a non-empty one-dimensional series")
    return values


# Smoothing and baseline

def moving_average(values: HistogramLike, n: int = 4,
                   alignment: Union[Alignment, str] = Alignment.TRAILING) -> np.ndarray:
    """Boxcar mean over n bins; windows are truncated at the edges

    Trailing windows cover bins i-n+1..i; centered windows cover
    i-n//2..i+(n-1)//2.
    """
    y = _counts(values)
    alignment = Alignment(alignment)
    if n < 1 or n > y.size:
        raise ParameterValidationError(f"Window length {n} outside [1, {y.size}]")

    index = np.arange(y.size)
    if alignment is Alignment.TRAILING:
        lo, hi = index - n + 1, index + 1
    else:
        lo, hi = index - n // 2, index + (n - 1) // 2 + 1
    lo = np.clip(lo, 0, y.size)
    hi = np.clip(hi, 0, y.size)
    cumulative = np.concatenate([[0.0], np.cumsum(y)])
    return (cumulative[hi] - cumulative[lo]) / (hi - lo)


def _tail_bins(size: int, tail_fraction: float) -> int:
    if not 0 < tail_fraction <= 0.5:
        raise ParameterValidationError("tail_fraction must lie in (0, 0.5]", details={"tail_fraction": tail_fraction})
    return max(1, int(round(size * tail_fraction)))


def baseline_estimate(hist: HistogramLike, tail_fraction: float = 0.2) -> float:
    """Mean counts/bin over the last ``tail_fraction`` of the histogram

    Logs a warning when halving the tail moves the mean by more than 10%,
    which usually means the packet reaches into the tail.
    """
    y = _counts(hist)
    k = _tail_bins(y.size, tail_fraction)
    baseline = float(np.mean(y[-k:]))
    half = float(np.mean(y[-max(1, k // 2):]))
    if baseline > 0 and abs(half - baseline) > BASELINE_STABILITY * baseline:
        logger.warning(f"Baseline unstable: tail mean {baseline:.4g} vs half-tail mean {half:.4g}")
    return baseline


def baseline_error(hist: HistogramLike, tail_fraction: float = 0.2) -> float:
    """Standard error of the tail mean"""
    y = _counts(hist)
    k = _tail_bins(y.size, tail_fraction)
    if k < 2:
        return 0.0
    return float(np.std(y[-k:], ddof=1) / math.sqrt(k))


def exposure_corrected(hist: CoincidenceHistogram) -> np.ndarray:
    """Counts divided by the finite-window acceptance 1 - tau/window"""
    counts = np.asarray(hist.counts, dtype=float)
    window = hist.window
    if window is None:
        return counts
    acceptance = exposure(hist.bin_centers, window)
    return np.divide(counts, acceptance, out=np.zeros_like(counts), where=acceptance > 0)


def packet_support(hist: HistogramLike, tail_fraction: float = 0.2, n: int = 4,
                   alignment: Union[Alignment, str] = Alignment.TRAILING) -> Tuple[int, int]:
    """Bin range [start, stop) integrated for true coincidences"""
    y = _counts(hist)
    stop = y.size - _tail_bins(y.size, tail_fraction)
    peak_index = int(np.argmax(moving_average(y, min(n, y.size), alignment)))
    if peak_index >= stop:
        raise EdgePeakError("Histogram peak lies inside the baseline tail",
                            details={"peak_index": peak_index, "tail_start": stop})
    return 0, stop


def packet_envelope(hist: HistogramLike, baseline: float, stop: Optional[int] = None) -> np.ndarray:
    """Gaussian-smoothed counts whose width follows the packet extent

    The baseline-removed signal is smoothed with a Gaussian of standard
    deviation ENVELOPE_WIDTH_FRACTION times the span holding the central
    80% of the signal before ``stop``; bins outside the histogram count as
    zero signal. The baseline is added back.
    """
    signal = _counts(hist) - baseline
    stop = signal.size if stop is None else stop
    cumulative = np.maximum.accumulate(np.cumsum(signal[:stop]))
    total = cumulative[-1] if cumulative.size else 0.0
    if not total > 0:
        return signal + baseline
    lo, hi = np.searchsorted(cumulative, [q * total for q in ENVELOPE_QUANTILES])
    sigma = ENVELOPE_WIDTH_FRACTION * max(int(hi - lo), 1)
    smoothed = gaussian_filter1d(signal, sigma, mode="constant", cval=0.0)
    logger.debug(f"Packet envelope: extent {hi - lo} bins, sigma {sigma:.2f} bins")
    return smoothed + baseline


# Correlation metrics

def _sbr_from_peak(peak: float, baseline: float) -> float:
    if baseline <= 0:
        return math.inf
    return max(0.0, (peak - baseline) / baseline)


def sbr(hist: HistogramLike, n: int = 4, alignment: Union[Alignment, str] = Alignment.TRAILING,
        tail_fraction: float = 0.2) -> float:
    """(smoothed peak - baseline) / baseline; math.inf when the baseline is zero"""
    y = _counts(hist)
    baseline = baseline_estimate(y, tail_fraction)
    return _sbr_from_peak(float(np.max(moving_average(y, n, alignment))), baseline)


def sbr_raw(hist: HistogramLike, tail_fraction: float = 0.2) -> float:
    """SBR from the unsmoothed peak bin"""
    return sbr(hist, n=1, tail_fraction=tail_fraction)


def g2_cross_zero(sbr_value: float) -> float:
    if not sbr_value >= 0:
        raise ParameterValidationError("SBR must be >= 0", details={"sbr": sbr_value})
    return sbr_value + 1.0


def cauchy_schwarz_factor(g2_cross: float, g2_ss: float = 2.0, g2_asas: float = 2.0) -> float:
    """[g2_s,as(0)]^2 / (g2_s,s(0) g2_as,as(0)); above 1 for nonclassical light"""
    if min(g2_cross, g2_ss, g2_asas) < 0:
        raise ParameterValidationError("Correlation functions must be >= 0")
    if g2_ss * g2_asas == 0:
        raise ParameterValidationError("Autocorrelation product is zero")
    return g2_cross ** 2 / (g2_ss * g2_asas)


# Rates and brightness

def detected_to_generated_rate(true_coincidences: float, chain: DetectorChain, acq: AcquisitionConfig) -> float:
    """Generated pairs/s from background-subtracted coincidences"""
    if chain.eta_s <= 0 or chain.eta_as <= 0:
        raise ParameterValidationError("Collection efficiencies must be positive",
                                       details={"eta_s": chain.eta_s, "eta_as": chain.eta_as})
    return true_coincidences / (chain.eta_s * chain.eta_as * acq.n_trials * acq.window)


def brightness(rate: float, pump_power: float) -> float:
    """pairs/(s mW) from pairs/s and pump power in W"""
    if not pump_power > 0:
        raise ParameterValidationError("Pump power must be positive", details={"pump_power": pump_power})
    return rate / (pump_power * 1e3)


def spectral_brightness(brightness_value: float, linewidth: float) -> float:
    """pairs/(s mW MHz) from brightness and linewidth in Hz"""
    if not linewidth > 0:
        raise ParameterValidationError("Linewidth must be positive", details={"linewidth": linewidth})
    return brightness_value / (linewidth * 1e-6)


# Spectra

def dft_spectrum(hist: HistogramLike, bin_width: Optional[float] = None, baseline: float = 0.0) -> Spectrum:
    """One-sided DFT magnitude of (counts - baseline); frequencies in Hz"""
    if bin_width is None:
        if not isinstance(hist, CoincidenceHistogram):
            raise ParameterValidationError("bin_width is required for a bare count series")
        bin_width = hist.bin_width
    freq, magnitude = one_sided_dft(_counts(hist) - baseline, bin_width)
    return Spectrum(freq=freq, values=magnitude, kind=SpectrumKind.WAVEPACKET_TRANSFORM,
                    metadata={"bin_width_s": bin_width, "baseline": baseline})


# Full chain

@dataclass(frozen=True)
class AnalysisOptions:
    average_points: int = 4
    alignment: Alignment = Alignment.TRAILING
    tail_fraction: float = 0.2
    g2_ss: float = 2.0
    g2_asas: float = 2.0
    correct_exposure: bool = True
    # widths and SBR from packet_envelope instead of the moving average
    envelope: bool = True


@track_performance("analyze_histogram")
def analyze_histogram(hist: CoincidenceHistogram, chain: DetectorChain, acq: AcquisitionConfig,
                      pump_power: float, options: Optional[AnalysisOptions] = None) -> AnalysisReport:
    """Temporal/spectral widths, SBR, nonclassicality and rate figures of one histogram"""
    options = options or AnalysisOptions()
    counts = exposure_corrected(hist) if options.correct_exposure else _counts(hist)
    if not np.any(counts > 0):
        raise NoPeakError("Histogram is empty")

    baseline = baseline_estimate(counts, options.tail_fraction)
    start, stop = packet_support(counts, options.tail_fraction, options.average_points, options.alignment)
    if options.envelope:
        smoothed = packet_envelope(counts, baseline, stop)
        sbr_value = _sbr_from_peak(float(smoothed.max()), baseline)
    else:
        smoothed = moving_average(counts, options.average_points, options.alignment)
        sbr_value = sbr(counts, options.average_points, options.alignment, options.tail_fraction)
    temporal, _, _ = full_width_half_max(hist.bin_centers, smoothed, baseline)
    spectrum = dft_spectrum(counts, hist.bin_width, baseline)
    spectral = spectral_width(spectrum.freq, spectrum.values)
    g2 = g2_cross_zero(sbr_value)

    in_support = counts[start:stop]
    n_support = stop - start
    true_counts = float(in_support.sum() - baseline * n_support)
    # Poisson error of the support sum plus the baseline-mean uncertainty
    sigma_true = math.sqrt(max(in_support.sum(), 0.0)
                           + (n_support * baseline_error(counts, options.tail_fraction)) ** 2)
    rate = detected_to_generated_rate(true_counts, chain, acq)
    rate_error = detected_to_generated_rate(sigma_true, chain, acq)
    bright = brightness(rate, pump_power)

    report = AnalysisReport(
        temporal_fwhm=temporal,
        spectral_fwhm=spectral,
        sbr=sbr_value,
        sbr_raw=sbr_raw(counts, options.tail_fraction),
        g2_cross_zero=g2,
        cs_violation_factor=cauchy_schwarz_factor(g2, options.g2_ss, options.g2_asas),
        baseline=baseline,
        true_coincidences=true_counts,
        generated_pair_rate=rate,
        generated_pair_rate_error=rate_error,
        brightness=bright,
        spectral_brightness=spectral_brightness(bright, spectral),
    )
    structured_logger.log_analysis(counts.size, sbr_value, rate)
    return report


# Model fitting

def model_counts(delays: np.ndarray, parameters: Dict[str, float], medium: MediumParams,
                 drive: DriveParams, grid: GridSpec,
                 constants: Optional[PhysicalConstants] = None) -> np.ndarray:
    """amplitude * G2(tau) / main-lobe peak + baseline at the given delays (s)"""
    medium = medium.replace(alpha=parameters["alpha"], gamma=parameters["gamma"])
    drive = drive.replace(omega_c=parameters["omega_c"])
    wp = compute_wavepacket(medium, drive, grid, constants, check=False)
    peak = main_lobe_peak(wp)
    shape = wavepacket_on_delays(wp, delays) / peak if peak > 0 else np.zeros_like(delays)
    return parameters["amplitude"] * shape + parameters["baseline"]


def _resolve_fit_inputs(counts: np.ndarray, initial: Dict[str, float], free: Iterable[str],
                        bounds: Optional[Dict[str, Tuple[float, float]]],
                        medium: MediumParams, drive: DriveParams):
    free = list(dict.fromkeys(free))
    unknown = [name for name in list(free) + list(initial) if name not in FIT_PARAMETERS]
    if unknown:
        raise ParameterValidationError(f"Unknown fit parameters: {unknown}",
                                       details={"allowed": list(FIT_PARAMETERS)})

    tail = baseline_estimate(counts)
    start = {
        "omega_c": drive.omega_c,
        "gamma": medium.gamma,
        "alpha": medium.alpha,
        "amplitude": float(counts.max() - tail),
        "baseline": tail,
    }
    start.update({name: float(value) for name, value in initial.items()})

    scale = float(np.abs(counts).max()) + 1.0
    limits = dict(DEFAULT_BOUNDS)
    limits.update({"amplitude": (0.0, 10.0 * scale), "baseline": (-scale, scale)})
    limits.update({name: (float(lo), float(hi)) for name, (lo, hi) in (bounds or {}).items()})

    for name in free:
        lo, hi = limits[name]
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise FitBoundsError(f"Bounds for {name} must be finite with lower < upper",
                                 details={"parameter": name, "bounds": [lo, hi]})
        if not lo <= start[name] <= hi:
            raise FitBoundsError(f"Initial {name}={start[name]} outside bounds [{lo}, {hi}]",
                                 details={"parameter": name, "initial": start[name], "bounds": [lo, hi]})
    return start, free, limits


@track_performance("fit_wavepacket")
def fit_wavepacket(hist: CoincidenceHistogram, initial: Dict[str, float], free: Iterable[str],
                   bounds: Optional[Dict[str, Tuple[float, float]]] = None,
                   medium: Optional[MediumParams] = None, drive: Optional[DriveParams] = None,
                   grid: Optional[GridSpec] = None, constants: Optional[PhysicalConstants] = None,
                   weighting: Union[Weighting, str] = Weighting.NONE,
                   correct_exposure: bool = True) -> FitResult:
    """Least-squares fit of amplitude * G2 + baseline to the histogram

    Derivative-free Nelder-Mead search from ``initial``; parameters not in
    ``free`` stay at their initial values. Stops when the objective spread
    across the simplex falls below 1e-8 of the starting objective or after
    500 iterations. The wave packet grid is fixed from the starting point.
    """
    counts = exposure_corrected(hist) if correct_exposure else _counts(hist)
    medium = medium or MediumParams(alpha=110.0, gamma=3.0e-4)
    drive = drive or DriveParams(omega_c=0.42, omega_p=0.32, delta_p=33.3)
    weighting = Weighting(weighting)
    start, free, limits = _resolve_fit_inputs(counts, initial, free, bounds, medium, drive)

    start_medium = medium.replace(alpha=start["alpha"], gamma=start["gamma"])
    start_drive = drive.replace(omega_c=start["omega_c"])
    grid = grid or auto_grid(start_medium, start_drive)
    delays = hist.bin_centers
    weights = 1.0 / np.sqrt(np.maximum(counts, 1.0)) if weighting is Weighting.POISSON else np.ones_like(counts)

    def residual(params: Parameters) -> np.ndarray:
        values = params.valuesdict()
        return (model_counts(delays, values, medium, drive, grid, constants) - counts) * weights

    params = Parameters()
    for name in FIT_PARAMETERS:
        lo, hi = limits[name]
        if name in free:
            params.add(name, value=start[name], min=lo, max=hi, vary=True)
        else:
            params.add(name, value=start[name], vary=False)

    initial_objective = float(np.sum(residual(params) ** 2))
    if not free:
        result = FitResult(parameters=dict(start), free=[], bounds={},
                           residual_sum_squares=initial_objective, iterations=1,
                           converged=True, message="No free parameters")
        structured_logger.log_fit([], True, 1, initial_objective)
        return result

    minimizer = Minimizer(residual, params, nan_policy="raise")
    tolerance = max(FIT_RELATIVE_TOLERANCE * initial_objective, np.finfo(float).tiny)
    fit = minimizer.minimize(
        method="nelder",
        options={"maxiter": FIT_MAX_ITERATIONS, "fatol": tolerance, "xatol": 1e-6},
    )

    fitted = {name: float(fit.params[name].value) for name in FIT_PARAMETERS}
    result = FitResult(
        parameters=fitted,
        free=free,
        bounds={name: limits[name] for name in free},
        residual_sum_squares=float(fit.chisqr),
        iterations=int(fit.nfev),
        converged=bool(fit.success),
        message=str(fit.message),
    )
    if not result.converged:
        logger.warning(f"Fit did not converge after {result.iterations} evaluations: {result.message}")
    structured_logger.log_fit(free, result.converged, result.iterations, result.residual_sum_squares)
    return result
