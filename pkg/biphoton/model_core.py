"""
Pointwise biphoton model: susceptibilities, spectral amplitude, EIT
transmission, decoherence law and phase mismatch.

Rates are dimensionless in units of Gamma (Gamma -> 1 internally). The
susceptibility functions return the dimensionless groups
sqrt(k_as k_s) L chi / 2 and k_s L xi / 4 directly. Every function accepts a
scalar detuning (returning a Python number) or a numpy array.
"""

import logging
import math
from typing import Union

import numpy as np
from scipy.signal import find_peaks

from .errors import ParameterValidationError
from .schemas import BeamGeometry, DecoherenceModel, DriveParams, MediumParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SINC_SERIES_RADIUS = 1e-4


def _detuning(delta: ArrayLike):
    values = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ParameterValidationError("Detuning must be finite")
    return values, values.ndim == 0


def _out(values: np.ndarray, scalar: bool):
    if scalar:
        return values.item()
    return values


def effective_alpha(medium: MediumParams) -> float:
    """Window-average optical depth used by every model function"""
    if medium.alpha_is_average:
        return medium.alpha
    return medium.alpha * (1.0 + medium.od_end_fraction) / 2.0


def _denominator(delta: np.ndarray, gamma: float, omega_c: float) -> np.ndarray:
    return omega_c ** 2 - 4.0 * (delta + 1j * gamma) * (delta + 0.5j)


def cross_susceptibility(delta: ArrayLike, medium: MediumParams, drive: DriveParams):
    """Cross-susceptibility group sqrt(k_as k_s) L chi(delta) / 2"""
    values, scalar = _detuning(delta)
    alpha = effective_alpha(medium)
    pump = drive.omega_p / (drive.delta_p + 0.5j)
    chi = (alpha / 4.0) * pump * drive.omega_c / _denominator(values, medium.gamma, drive.omega_c)
    return _out(chi, scalar)


def self_susceptibility(delta: ArrayLike, medium: MediumParams, drive: DriveParams):
    """Self-susceptibility group k_s L xi(delta) / 4"""
    values, scalar = _detuning(delta)
    alpha = effective_alpha(medium)
    phi = (alpha / 2.0) * (values + 1j * medium.gamma) / _denominator(values, medium.gamma, drive.omega_c)
    return _out(phi, scalar)


def csinc(z):
    """sin(z)/z for complex z, sinc(0) = 1"""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SINC_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    result = np.where(small, 1.0 - z ** 2 / 6.0 + z ** 4 / 120.0, np.sin(safe) / safe)
    return result.item() if result.ndim == 0 else result


def propagation_factor(phi):
    """sinc(phi) * exp(i phi), evaluated as (exp(2i phi) - 1) / (2i phi)

    The rewritten form stays finite for the large positive Im(phi) met on the
    absorption lines, where sin(phi) alone would overflow.
    """
    phi = np.asarray(phi, dtype=complex)
    small = np.abs(phi) < SINC_SERIES_RADIUS
    safe = np.where(small, 1.0, phi)
    exact = (np.exp(2j * safe) - 1.0) / (2j * safe)
    series = 1.0 + 1j * phi - (2.0 / 3.0) * phi ** 2
    result = np.where(small, series, exact)
    return result.item() if result.ndim == 0 else result


def biphoton_spectral_amplitude(delta: ArrayLike, medium: MediumParams, drive: DriveParams):
    """Integrand of the two-photon correlation: chi * sinc(phi) * exp(i phi)"""
    values, scalar = _detuning(delta)
    chi = cross_susceptibility(values, medium, drive)
    phi = self_susceptibility(values, medium, drive)
    return _out(np.asarray(chi * propagation_factor(phi)), scalar)


def eit_transmission(delta: ArrayLike, medium: MediumParams, drive: DriveParams):
    """Classical probe intensity transmission |exp(2i phi)|^2 through the medium"""
    values, scalar = _detuning(delta)
    phi = np.asarray(self_susceptibility(values, medium, drive))
    return _out(np.exp(-4.0 * phi.imag), scalar)


def group_delay_spectrum(delta: ArrayLike, medium: MediumParams, drive: DriveParams):
    """Anti-Stokes group delay 2 Re(d phi / d delta), units of 1/Gamma"""
    values, scalar = _detuning(delta)
    alpha = effective_alpha(medium)
    n = values + 1j * medium.gamma
    d = _denominator(values, medium.gamma, drive.omega_c)
    d_prime = -4.0 * ((values + 0.5j) + n)
    dphi = (alpha / 2.0) * (d - n * d_prime) / d ** 2
    return _out(2.0 * dphi.real, scalar)


def autler_townes_splitting(medium: MediumParams, drive: DriveParams, n_points: int = 20001) -> float:
    """Separation of the two absorption maxima (units of Gamma)

    Located on Im(phi), whose shape does not depend on the optical depth.
    Returns NaN when the doublet is not resolved.
    """
    delta = np.linspace(0.0, 2.0 * drive.omega_c + 2.0, n_points)
    absorption = np.asarray(self_susceptibility(delta, medium, drive)).imag
    peaks, _ = find_peaks(absorption)
    if len(peaks) == 0:
        logger.warning(f"Autler-Townes doublet not resolved at Omega_c={drive.omega_c}")
        return math.nan
    return 2.0 * float(delta[peaks[np.argmax(absorption[peaks])]])


def decoherence_rate(omega_c: float, model: DecoherenceModel) -> float:
    """gamma = gamma0 + a * (Omega_c / Gamma)^2"""
    if not omega_c >= 0 or not math.isfinite(omega_c):
        raise ParameterValidationError("omega_c must be finite and >= 0", details={"omega_c": omega_c})
    return model.gamma0 + model.a_switch * omega_c ** 2


def decoherence_model_from_point(omega_c: float, gamma: float, gamma0: float) -> DecoherenceModel:
    """Photon-switching slope fixed by one measured (Omega_c, gamma) pair"""
    if omega_c <= 0 or gamma < gamma0:
        raise ParameterValidationError(
            "Calibration point needs omega_c > 0 and gamma >= gamma0",
            details={"omega_c": omega_c, "gamma": gamma, "gamma0": gamma0},
        )
    return DecoherenceModel(gamma0=gamma0, a_switch=(gamma - gamma0) / omega_c ** 2)


def phase_mismatch(geom: BeamGeometry) -> float:
    """L |(k_p - k_s + k_c - k_as) . z| in rad

    z runs along the anti-Stokes/pump direction; the Stokes photon and the
    coupling field share the direction at angle theta.
    """
    k_p, k_c = geom.wavenumber("p"), geom.wavenumber("c")
    k_s, k_as = geom.wavenumber("s"), geom.wavenumber("as")
    return geom.length * abs(k_p - k_as + (k_c - k_s) * math.cos(geom.theta))


def phase_mismatch_efficiency(phase: float) -> float:
    """Generation-rate reduction |sinc(phase / 2)|^2"""
    return abs(csinc(phase / 2.0)) ** 2
