"""
Wave packets and spectra from the pointwise model.

G2(tau) = |(1/2pi) Int d(delta) exp(-i delta tau) A(delta)|^2 is evaluated
with one FFT over a uniform detuning grid; delays come out on the reciprocal
grid. The closed-form approximations (delay time, linewidth, generation
rate) and the regime diagnostics live here as well.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .errors import EdgePeakError, GridInadequateError, NoPeakError, ParameterValidationError
from .model_core import (
    biphoton_spectral_amplitude,
    decoherence_rate,
    effective_alpha,
)
from .observability import structured_logger, track_performance
from .schemas import DriveParams, ExperimentConfig, GridSpec, MediumParams, PhysicalConstants

logger = logging.getLogger(__name__)

EDGE_AMPLITUDE_LIMIT = 1e-4
EDGE_FRACTION = 1 / 64
MIN_WINDOW_POINTS = 32
DEFAULT_POINTS = 2**18
MAX_POINTS = 2**22
REGIME_THRESHOLD = 3.0
# Int G2 d(tau) over the unscaled closed-form rate at the default narrowband point
# (calibrate_pair_rate_scale); the large-OD, zero-decoherence limit is pi / 2
PAIR_RATE_SCALE = 1.4316
LINEWIDTH_FACTOR = 0.88


class SpectrumKind(str, Enum):
    OPTICAL_DENSITY = "optical-density"
    WAVEPACKET_TRANSFORM = "wavepacket-transform"


@dataclass(frozen=True)
class WavePacket:
    """G2 samples on a uniform delay grid (seconds)"""
    tau: np.ndarray
    values: np.ndarray
    bin_width: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.tau.shape != self.values.shape:
            raise ParameterValidationError("tau and values must have the same length")
        if self.bin_width <= 0:
            raise ParameterValidationError("bin_width must be positive")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def transient(self) -> float:
        """Delay (s) before which the leading precursor may dominate the main lobe"""
        return float(self.metadata.get("leading_transient_s", 0.0))


@dataclass(frozen=True)
class Spectrum:
    freq: np.ndarray
    values: np.ndarray
    kind: SpectrumKind
    unit: str = "Hz"
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RegimeReport:
    tau_d: float
    tau_b: float
    tau_c: float
    ratio_c_d: float
    ratio_d_b: float
    large_od: bool
    negligible_decoherence: bool
    threshold: float = REGIME_THRESHOLD

    @property
    def holds(self) -> bool:
        return self.large_od and self.negligible_decoherence


# Grid construction and adequacy

def eit_window(medium: MediumParams, drive: DriveParams) -> float:
    """EIT transparency width Omega_c^2 / sqrt(alpha), units of Gamma"""
    return drive.omega_c ** 2 / math.sqrt(effective_alpha(medium))


def default_grid(medium: MediumParams, drive: DriveParams) -> GridSpec:
    span = max(8.0 * drive.omega_c, 4.0, 64.0 * eit_window(medium, drive))
    return GridSpec(n_points=DEFAULT_POINTS, delta_span=span)


def detuning_grid(grid: GridSpec) -> np.ndarray:
    return -grid.delta_span + grid.d_delta * np.arange(grid.n_points)


def check_grid(medium: MediumParams, drive: DriveParams, grid: GridSpec,
               amplitude: Optional[np.ndarray] = None) -> None:
    """Raise GridInadequateError naming the first failed check"""
    window_points = eit_window(medium, drive) / grid.d_delta
    if window_points < MIN_WINDOW_POINTS:
        raise GridInadequateError(
            "resolution",
            f"EIT window covered by {window_points:.1f} points, need {MIN_WINDOW_POINTS}",
            {"window_points": window_points},
        )

    needed = 4.0 * (_tau_d(medium, drive) + _tau_b(medium, drive))
    if grid.tau_span / 2 < needed:
        raise GridInadequateError(
            "duration",
            f"Delay half-span {grid.tau_span / 2:.1f}/Gamma shorter than {needed:.1f}/Gamma",
            {"half_span": grid.tau_span / 2, "needed": needed},
        )

    if amplitude is None:
        amplitude = biphoton_spectral_amplitude(detuning_grid(grid), medium, drive)
    magnitude = np.abs(amplitude)
    peak = magnitude.max()
    if peak == 0:
        return
    edge = max(1, int(grid.n_points * EDGE_FRACTION))
    edge_level = max(magnitude[:edge].max(), magnitude[-edge:].max()) / peak
    if edge_level >= EDGE_AMPLITUDE_LIMIT:
        raise GridInadequateError(
            "span",
            f"Amplitude at |delta|={grid.delta_span:.3g} is {edge_level:.2e} of its peak",
            {"edge_level": edge_level, "delta_span": grid.delta_span},
        )


def auto_grid(medium: MediumParams, drive: DriveParams, max_points: int = MAX_POINTS) -> GridSpec:
    """Default grid widened and refined until every adequacy check passes"""
    grid = default_grid(medium, drive)
    while True:
        try:
            check_grid(medium, drive, grid)
            return grid
        except GridInadequateError as e:
            if e.check == "span":
                grid = grid.replace(delta_span=grid.delta_span * 2)
            elif grid.n_points * 2 <= max_points:
                grid = grid.replace(n_points=grid.n_points * 2)
            else:
                raise
            if grid.n_points > max_points or grid.delta_span > 1e6:
                raise
            logger.debug(f"Grid refined after failed '{e.check}' check: "
                         f"n_points={grid.n_points}, delta_span={grid.delta_span:.3g}")


# Wave packets and spectra

def _metadata(medium: MediumParams, drive: DriveParams, grid: GridSpec,
              constants: PhysicalConstants) -> Dict[str, Any]:
    return {
        "medium": medium.model_dump(by_alias=True),
        "drive": drive.model_dump(by_alias=True),
        "grid": grid.model_dump(by_alias=True),
        "gamma_e_rad_per_s": constants.gamma_e,
        "leading_transient_s": _tau_b(medium, drive) / constants.gamma_e,
    }


@track_performance("compute_wavepacket")
def compute_wavepacket(medium: MediumParams, drive: DriveParams, grid: Optional[GridSpec] = None,
                       constants: Optional[PhysicalConstants] = None, check: bool = True) -> WavePacket:
    """Biphoton wave packet on the delay grid reciprocal to ``grid``"""
    constants = constants or PhysicalConstants()
    if grid is None:
        grid = auto_grid(medium, drive)
    amplitude = biphoton_spectral_amplitude(detuning_grid(grid), medium, drive)
    if not np.all(np.isfinite(amplitude)):
        raise ParameterValidationError("Spectral amplitude is not finite for these parameters")
    if check:
        check_grid(medium, drive, grid, amplitude)

    # the exp(i delta_0 tau) phase from the grid offset drops out of |.|^2
    transform = fft.fft(amplitude) * (grid.d_delta / (2 * math.pi))
    values = fft.fftshift(np.abs(transform) ** 2)
    tau = (np.arange(grid.n_points) - grid.n_points // 2) * grid.d_tau / constants.gamma_e
    structured_logger.log_wavepacket(medium.alpha, drive.omega_c, medium.gamma, grid.n_points)

    return WavePacket(
        tau=tau,
        values=values,
        bin_width=grid.d_tau / constants.gamma_e,
        metadata=_metadata(medium, drive, grid, constants),
    )


def compute_optical_spectrum(medium: MediumParams, drive: DriveParams,
                             grid: Optional[GridSpec] = None) -> Spectrum:
    """|A(delta)|^2 on the detuning grid (units of Gamma)"""
    if grid is None:
        grid = auto_grid(medium, drive)
    else:
        check_grid(medium, drive, grid)
    delta = detuning_grid(grid)
    values = np.abs(biphoton_spectral_amplitude(delta, medium, drive)) ** 2
    return Spectrum(freq=delta, values=values, kind=SpectrumKind.OPTICAL_DENSITY, unit="gamma",
                    metadata={"grid": grid.model_dump(by_alias=True)})


def wavepacket_on_delays(wp: WavePacket, delays: np.ndarray) -> np.ndarray:
    """G2 linearly interpolated at arbitrary delays (s), zero outside the grid"""
    return np.interp(delays, wp.tau, wp.values, left=0.0, right=0.0)


def causal_leakage(wp: WavePacket) -> float:
    """Fraction of Int G2 found at negative delays"""
    total = trapezoid(wp.values, dx=wp.bin_width)
    if total == 0:
        return 0.0
    negative = trapezoid(wp.values[wp.tau < 0], dx=wp.bin_width)
    return float(negative / total)


def count_local_maxima(wp: WavePacket, threshold: float = 0.05, prominence: float = 0.01) -> int:
    """Local maxima above ``threshold`` x peak, ignoring ripples below ``prominence`` x peak"""
    peak = wp.values.max()
    if peak <= 0:
        return 0
    peaks, _ = find_peaks(wp.values, height=threshold * peak, prominence=prominence * peak)
    return len(peaks)


# Widths

def full_width_half_max(x: np.ndarray, y: np.ndarray, baseline: float = 0.0,
                        onset: float = -math.inf) -> Tuple[float, float, float]:
    """FWHM around the maximum of y - baseline over x >= onset

    Walks outward from the maximum to the first sample below half on each
    side and interpolates linearly between the two straddling samples. The
    walk may cross samples before ``onset``; only the peak search is
    restricted. Returns (width, left, right).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) - baseline
    if y.size < 3:
        raise NoPeakError("Need at least three samples for a width")
    searched = np.nonzero(x >= onset)[0]
    if searched.size == 0:
        raise NoPeakError("No samples after the onset", details={"onset": onset})
    peak_index = int(searched[np.argmax(y[searched])])
    peak = y[peak_index]
    if not peak > 0 or np.all(y == peak):
        raise NoPeakError("Input has no peak above its baseline", details={"peak": float(peak)})
    if peak_index == 0 or peak_index == y.size - 1:
        raise EdgePeakError("Maximum lies on the grid edge", details={"index": peak_index})
    half = peak / 2.0

    below_left = np.nonzero(y[:peak_index] < half)[0]
    below_right = np.nonzero(y[peak_index + 1:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise EdgePeakError("Half maximum not reached before the grid edge")

    i = below_left[-1]
    left = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    j = peak_index + 1 + below_right[0]
    right = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return float(right - left), float(left), float(right)


def main_lobe_peak(wp: WavePacket) -> float:
    """Maximum of G2 at delays past the leading transient"""
    return float(wp.values[wp.tau >= wp.transient].max())


def temporal_fwhm(wp: WavePacket, baseline: float = 0.0) -> float:
    """Temporal FWHM in seconds of the main lobe, the precursor excluded from the peak search"""
    width, _, _ = full_width_half_max(wp.tau, wp.values, baseline, onset=wp.transient)
    return width


def one_sided_dft(values: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Magnitude of the DFT with unit-bin normalization, non-negative frequencies in Hz"""
    magnitude = np.abs(fft.rfft(values))
    return fft.rfftfreq(len(values), d=dt), magnitude


def spectral_width(freq: np.ndarray, magnitude: np.ndarray) -> float:
    """FWHM of the power |DFT|^2 of a one-sided magnitude spectrum, mirrored to negative frequencies"""
    power = np.asarray(magnitude, dtype=float) ** 2
    x = np.concatenate([-freq[:0:-1], freq])
    y = np.concatenate([power[:0:-1], power])
    width, _, _ = full_width_half_max(x, y)
    return width


def spectral_fwhm_of_wavepacket(wp: WavePacket, baseline: float = 0.0) -> float:
    """FWHM (Hz) of the power spectrum |DFT{G2 - baseline}|^2"""
    freq, magnitude = one_sided_dft(wp.values - baseline, wp.bin_width)
    return spectral_width(freq, magnitude)


# Closed forms

def _tau_d(medium: MediumParams, drive: DriveParams) -> float:
    return effective_alpha(medium) / drive.omega_c ** 2


def _tau_b(medium: MediumParams, drive: DriveParams) -> float:
    return math.sqrt(effective_alpha(medium)) / drive.omega_c ** 2


def delay_time(medium: MediumParams, drive: DriveParams,
               constants: Optional[PhysicalConstants] = None) -> float:
    """EIT propagation delay alpha Gamma / Omega_c^2 in seconds"""
    constants = constants or PhysicalConstants()
    return _tau_d(medium, drive) / constants.gamma_e


def eit_bandwidth_time(medium: MediumParams, drive: DriveParams,
                       constants: Optional[PhysicalConstants] = None) -> float:
    """Inverse EIT bandwidth sqrt(alpha) Gamma / Omega_c^2 in seconds"""
    constants = constants or PhysicalConstants()
    return _tau_b(medium, drive) / constants.gamma_e


def coherence_time(medium: MediumParams, constants: Optional[PhysicalConstants] = None) -> float:
    """1 / gamma in seconds; math.inf when gamma == 0"""
    constants = constants or PhysicalConstants()
    if medium.gamma == 0:
        return math.inf
    return 1.0 / (medium.gamma * constants.gamma_e)


def linewidth_approx(medium: MediumParams, drive: DriveParams,
                     constants: Optional[PhysicalConstants] = None) -> float:
    """Spectral FWHM 0.88 / tau_d in Hz"""
    return LINEWIDTH_FACTOR / delay_time(medium, drive, constants)


def pair_rate_integral(medium: MediumParams, drive: DriveParams, grid: Optional[GridSpec] = None) -> float:
    """Int G2 d(tau) with tau in units of 1/Gamma"""
    wp = compute_wavepacket(medium, drive, grid)
    gamma_e = wp.metadata["gamma_e_rad_per_s"]
    return float(trapezoid(wp.values, dx=wp.bin_width * gamma_e))


def pair_rate_approx(medium: MediumParams, drive: DriveParams, scale: float = PAIR_RATE_SCALE) -> float:
    """scale * (alpha / 2pi) Omega_p^2 / (4 Delta_p^2 + 1) exp(-alpha gamma / Omega_c^2)"""
    alpha = effective_alpha(medium)
    pump = drive.omega_p ** 2 / (4.0 * drive.delta_p ** 2 + 1.0)
    return scale * alpha / (2 * math.pi) * pump * math.exp(-alpha * medium.gamma / drive.omega_c ** 2)


def calibrate_pair_rate_scale(medium: Optional[MediumParams] = None, drive: Optional[DriveParams] = None,
                              grid: Optional[GridSpec] = None) -> float:
    """Ratio Int G2 / unscaled approximation at a reference point (default narrowband parameters)"""
    reference = ExperimentConfig()
    medium = medium or reference.medium
    drive = drive or reference.drive
    return pair_rate_integral(medium, drive, grid) / pair_rate_approx(medium, drive, scale=1.0)


def regime_check(medium: MediumParams, drive: DriveParams,
                 constants: Optional[PhysicalConstants] = None,
                 threshold: float = REGIME_THRESHOLD) -> RegimeReport:
    """tau_c >> tau_d >> tau_b, each '>>' meaning a ratio of at least ``threshold``"""
    tau_d = delay_time(medium, drive, constants)
    tau_b = eit_bandwidth_time(medium, drive, constants)
    tau_c = coherence_time(medium, constants)
    ratio_c_d = tau_c / tau_d
    ratio_d_b = tau_d / tau_b
    report = RegimeReport(
        tau_d=tau_d,
        tau_b=tau_b,
        tau_c=tau_c,
        ratio_c_d=ratio_c_d,
        ratio_d_b=ratio_d_b,
        large_od=ratio_d_b >= threshold,
        negligible_decoherence=ratio_c_d >= threshold,
        threshold=threshold,
    )
    if not report.holds:
        logger.warning(f"Regime conditions not met: tau_c/tau_d={ratio_c_d:.2f}, tau_d/tau_b={ratio_d_b:.2f}")
    return report



COUPLING_NAMES = ("omega_c", "coupling_rabi_per_gamma")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    omega_c: float
    gamma: float
    temporal_fwhm: float
    spectral_fwhm: float
    pair_rate_integral: float
    linewidth_approx: float
    pair_rate_approx: float
    generated_rate: float
    brightness: float
    spectral_brightness: float
    regime_holds: bool

    @property
    def omega_c_sq(self) -> float:
        return self.omega_c ** 2


SWEEP_COLUMNS = [
    "value", "omega_c_sq", "temporal_fwhm_us", "spectral_fwhm_khz", "pair_rate_integral",
    "linewidth_approx_khz", "pair_rate_approx", "brightness", "spectral_brightness",
    "omega_c", "gamma", "regime_holds",
]


def _sweep_point(config: ExperimentConfig, value: float, rate_per_model_unit: float) -> SweepPoint:
    medium, drive = config.medium, config.drive
    wp = compute_wavepacket(medium, drive, constants=config.constants)
    integral = float(trapezoid(wp.values, dx=wp.bin_width * config.constants.gamma_e))
    spectral = spectral_fwhm_of_wavepacket(wp)
    rate = integral * rate_per_model_unit
    brightness = rate / (drive.pump_power * 1e3)
    point = SweepPoint(
        value=value,
        omega_c=drive.omega_c,
        gamma=medium.gamma,
        temporal_fwhm=temporal_fwhm(wp),
        spectral_fwhm=spectral,
        pair_rate_integral=integral,
        linewidth_approx=linewidth_approx(medium, drive, config.constants),
        pair_rate_approx=pair_rate_approx(medium, drive),
        generated_rate=rate,
        brightness=brightness,
        spectral_brightness=brightness / (spectral * 1e-6),
        regime_holds=regime_check(medium, drive, config.constants).holds,
    )
    logger.info(f"Sweep point {value:.4g}: temporal FWHM {point.temporal_fwhm * 1e6:.3f} us, "
                f"spectral FWHM {spectral / 1e3:.1f} kHz")
    return point


def _rate_per_model_unit(config: ExperimentConfig) -> float:
    """Generated pairs/s per unit of Int G2, anchored at the config's operating point"""
    reference = pair_rate_integral(config.medium, config.drive, config.grid)
    return config.pair_rate_per_s / reference if reference > 0 else 0.0


def sweep_coupling(config: ExperimentConfig, omega_c_values: Sequence[float]) -> List[SweepPoint]:
    """Evaluate the linewidth, rate and brightness quantities for each coupling Rabi frequency

    gamma follows the decoherence model at every point. Absolute rates are
    the config's generated pair rate scaled by Int G2 relative to the
    config's own operating point.
    """
    scale = _rate_per_model_unit(config)
    points = []
    for omega_c in omega_c_values:
        point_config = config.model_copy(update={
            "drive": config.drive.replace(omega_c=omega_c),
            "medium": config.medium.replace(gamma=decoherence_rate(omega_c, config.decoherence)),
        })
        points.append(_sweep_point(point_config, omega_c, scale))
    return points


def sweep_parameter(config: ExperimentConfig, parameter: str, values: Sequence[float]) -> List[SweepPoint]:
    """Sweep any sweepable field; coupling sweeps go through sweep_coupling"""
    if parameter in COUPLING_NAMES:
        return sweep_coupling(config, values)
    scale = _rate_per_model_unit(config)
    return [_sweep_point(config.with_value(parameter, value), value, scale) for value in values]


def fit_zero_intercept_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of y = s x"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    solution, *_ = np.linalg.lstsq(x[:, None], y, rcond=None)
    return float(solution[0])


def fit_inverse_law(x: Sequence[float], y: Sequence[float]) -> Tuple[float, np.ndarray]:
    """Least-squares b of y = b / x; returns (b, relative residuals)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    solution, *_ = np.linalg.lstsq((1.0 / x)[:, None], y, rcond=None)
    b = float(solution[0])
    return b, (y - b / x) / y
