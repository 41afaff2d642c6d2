"""
Parameter records, configuration and report schemas.

All rates that enter the biphoton model are dimensionless, in units of the
excited-state decay rate Gamma. JSON keys carry their unit; dimensional
fields are stored in the unit named by the key and exposed in SI through
read-only properties.
"""

import hashlib
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ParameterValidationError, StorageError

GAMMA_E_DEFAULT = 2 * math.pi * 6.0e6
LAMBDA_D1_NM = 794.98
LAMBDA_D2_NM = 780.24
WIDEBAND_POINT = (2.1, 4.0e-3)
GAMMA0_DEFAULT = 2.0e-4

ModelT = TypeVar("ModelT", bound=BaseModel)


class ParamModel(BaseModel):
    """Immutable record populated by field name or by its unit-suffixed key"""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    def replace(self: ModelT, **changes: Any) -> ModelT:
        """Validated copy with some fields changed"""
        data = self.model_dump()
        data.update(changes)
        try:
            return type(self).model_validate(data)
        except ValidationError as e:
            raise ParameterValidationError(
                f"Invalid {type(self).__name__}: {e.errors()[0]['msg']}",
                details={"errors": _error_list(e)},
            ) from e


def _error_list(error: ValidationError) -> List[Dict[str, Any]]:
    return [
        {"loc": ".".join(str(p) for p in err["loc"]), "msg": err["msg"]}
        for err in error.errors()
    ]


class PhysicalConstants(ParamModel):
    gamma_e: float = Field(GAMMA_E_DEFAULT, gt=0, alias="gamma_e_rad_per_s",
                           description="Excited-state decay rate Gamma (rad/s)")
    lambda_s_nm: float = Field(LAMBDA_D1_NM, gt=0, description="Stokes wavelength (nm)")
    lambda_as_nm: float = Field(LAMBDA_D2_NM, gt=0, description="Anti-Stokes wavelength (nm)")

    @property
    def lambda_s(self) -> float:
        return self.lambda_s_nm * 1e-9

    @property
    def lambda_as(self) -> float:
        return self.lambda_as_nm * 1e-9


class MediumParams(ParamModel):
    alpha: float = Field(..., gt=0, alias="optical_depth", description="Optical depth of the whole medium")
    gamma: float = Field(..., ge=0, alias="decoherence_per_gamma",
                         description="Ground-state decoherence rate in units of Gamma")
    od_end_fraction: float = Field(0.9, gt=0, le=1,
                                   description="OD at the end of the window relative to its start")
    alpha_is_average: bool = Field(True, description="alpha already is the window-average OD")


class DriveParams(ParamModel):
    omega_c: float = Field(..., gt=0, alias="coupling_rabi_per_gamma")
    omega_p: float = Field(..., ge=0, alias="pump_rabi_per_gamma")
    delta_p: float = Field(..., alias="pump_detuning_per_gamma")
    pump_power_uW: float = Field(56.0, gt=0, description="Pump power, brightness normalization only")

    @field_validator("omega_c", "omega_p", "delta_p")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def pump_power(self) -> float:
        return self.pump_power_uW * 1e-6


class DecoherenceModel(ParamModel):
    gamma0: float = Field(GAMMA0_DEFAULT, ge=0, alias="gamma0_per_gamma")
    a_switch: float = Field(
        (WIDEBAND_POINT[1] - GAMMA0_DEFAULT) / WIDEBAND_POINT[0] ** 2, ge=0,
        description="Photon-switching proportionality of gamma to (Omega_c/Gamma)^2",
    )


class BeamGeometry(ParamModel):
    theta_deg: float = Field(1.0, ge=0, lt=90, description="Pump/coupling angle (deg)")
    # reproduces the reported 0.23 rad mismatch at theta = 1 deg
    length_mm: float = Field(10.11, gt=0, description="Medium length L (mm)")
    lambda_p_nm: float = Field(LAMBDA_D1_NM, gt=0)
    lambda_c_nm: float = Field(LAMBDA_D2_NM, gt=0)
    lambda_s_nm: float = Field(LAMBDA_D1_NM, gt=0)
    lambda_as_nm: float = Field(LAMBDA_D2_NM, gt=0)

    @property
    def theta(self) -> float:
        return math.radians(self.theta_deg)

    @property
    def length(self) -> float:
        return self.length_mm * 1e-3

    def wavenumber(self, beam: str) -> float:
        """k = 2 pi / lambda in 1/m for beam in {p, c, s, as}"""
        return 2 * math.pi / (getattr(self, f"lambda_{beam}_nm") * 1e-9)


class DetectorChain(ParamModel):
    eta_s: float = Field(0.13, ge=0, le=1, description="Stokes overall collection efficiency")
    eta_as: float = Field(0.077, ge=0, le=1, description="Anti-Stokes overall collection efficiency")
    dark_s_cps: float = Field(140.0, ge=0)
    dark_as_cps: float = Field(220.0, ge=0)
    leak_s_cps: float = Field(350.0, ge=0, description="Pump leakage into the Stokes arm")
    leak_as_cps: float = Field(600.0, ge=0, description="Coupling leakage into the anti-Stokes arm")

    @property
    def background_s(self) -> float:
        return self.dark_s_cps + self.leak_s_cps

    @property
    def background_as(self) -> float:
        return self.dark_as_cps + self.leak_as_cps


class AcquisitionConfig(ParamModel):
    window_us: float = Field(240.0, gt=0)
    bin_width_ns: float = Field(51.2, gt=0)
    n_trials: int = Field(105_000, ge=1)
    duty_cycle: float = Field(0.008, gt=0, le=1)
    rng_seed: int = Field(0, ge=0, lt=2**64)
    histogram_span_us: float = Field(60.0, gt=0, description="Largest start-stop delay histogrammed")

    @model_validator(mode="after")
    def _check_bins(self) -> "AcquisitionConfig":
        if self.bin_width_ns * 1e-3 >= self.window_us:
            raise ValueError("bin_width_ns must be shorter than the window")
        if self.histogram_span_us > self.window_us:
            raise ValueError("histogram_span_us cannot exceed the window")
        if self.bin_width_ns * 1e-3 > self.histogram_span_us:
            raise ValueError("histogram_span_us must hold at least one bin")
        return self

    @property
    def window(self) -> float:
        return self.window_us * 1e-6

    @property
    def bin_width(self) -> float:
        return self.bin_width_ns * 1e-9

    @property
    def histogram_span(self) -> float:
        return self.histogram_span_us * 1e-6

    @property
    def n_bins(self) -> int:
        return int(round(self.histogram_span_us * 1e3 / self.bin_width_ns))


class GridSpec(ParamModel):
    n_points: int = Field(2**18, ge=2**10)
    delta_span: float = Field(..., gt=0, alias="delta_span_per_gamma",
                              description="Half-width of the detuning grid in units of Gamma")

    @field_validator("n_points")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError("n_points must be a power of two")
        return value

    @property
    def d_delta(self) -> float:
        return 2 * self.delta_span / self.n_points

    @property
    def d_tau(self) -> float:
        """Delay step in units of 1/Gamma"""
        return 2 * math.pi / (self.n_points * self.d_delta)

    @property
    def tau_span(self) -> float:
        return self.n_points * self.d_tau


class SweepSpec(ParamModel):
    parameter: str = Field("omega_c")
    values: List[float] = Field(..., min_length=1)


SWEEPABLE = {
    "alpha": "medium", "optical_depth": "medium",
    "gamma": "medium", "decoherence_per_gamma": "medium",
    "omega_c": "drive", "coupling_rabi_per_gamma": "drive",
    "omega_p": "drive", "pump_rabi_per_gamma": "drive",
    "delta_p": "drive", "pump_detuning_per_gamma": "drive",
    "pump_power_uW": "drive",
}


class ExperimentConfig(ParamModel):
    """Complete, serializable description of one experiment"""

    constants: PhysicalConstants = Field(default_factory=PhysicalConstants)
    medium: MediumParams = Field(default_factory=lambda: MediumParams(alpha=110.0, gamma=3.0e-4))
    drive: DriveParams = Field(default_factory=lambda: DriveParams(omega_c=0.42, omega_p=0.32, delta_p=33.3))
    decoherence: DecoherenceModel = Field(default_factory=DecoherenceModel)
    geometry: BeamGeometry = Field(default_factory=BeamGeometry)
    chain: DetectorChain = Field(default_factory=DetectorChain)
    acquisition: AcquisitionConfig = Field(default_factory=AcquisitionConfig)
    grid: Optional[GridSpec] = None
    sweep: Optional[SweepSpec] = None
    pair_rate_per_s: float = Field(3340.0, ge=0, description="Generated pair rate fed to the simulator")

    @model_validator(mode="after")
    def _check_sweep(self) -> "ExperimentConfig":
        if self.sweep is not None and self.sweep.parameter not in SWEEPABLE:
            raise ValueError(f"sweep parameter '{self.sweep.parameter}' does not name a sweepable field")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ParameterValidationError(
                f"Invalid experiment config: {e.errors()[0]['msg']}",
                details={"errors": _error_list(e)},
            ) from e

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise StorageError(f"Config not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ParameterValidationError(f"Config is not valid JSON: {e}") from e
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, mode="json")

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def save(self, path: Path) -> Path:
        from .storage import atomic_write_text

        return atomic_write_text(Path(path), json.dumps(self.to_dict(), indent=2) + "\n")

    def with_value(self, parameter: str, value: float) -> "ExperimentConfig":
        """Copy with one sweepable field replaced"""
        section = SWEEPABLE.get(parameter)
        if section is None:
            raise ParameterValidationError(f"Unknown sweep parameter: {parameter}")
        target = getattr(self, section)
        field = next(
            (name for name, info in type(target).model_fields.items()
             if parameter in (name, info.alias)),
            parameter,
        )
        return self.model_copy(update={section: target.replace(**{field: value})})


class AnalysisReport(BaseModel):
    temporal_fwhm: float = Field(..., description="s")
    spectral_fwhm: float = Field(..., description="Hz")
    sbr: float = Field(..., ge=0)
    sbr_raw: float = Field(..., ge=0)
    g2_cross_zero: float
    cs_violation_factor: float = Field(..., ge=0)
    baseline: float = Field(..., description="counts/bin")
    true_coincidences: float
    generated_pair_rate: float = Field(..., description="pairs/s")
    generated_pair_rate_error: float = Field(..., description="pairs/s, one standard error")
    brightness: float = Field(..., description="pairs/(s mW)")
    spectral_brightness: float = Field(..., description="pairs/(s mW MHz)")

    @model_validator(mode="after")
    def _finite(self) -> "AnalysisReport":
        for name, value in self:
            if isinstance(value, float) and math.isnan(value):
                raise ValueError(f"{name} is NaN")
        return self


class FitResult(BaseModel):
    parameters: Dict[str, float]
    free: List[str]
    bounds: Dict[str, Tuple[float, float]]
    residual_sum_squares: float = Field(..., ge=0)
    iterations: int = Field(..., ge=0, description="Objective evaluations")
    converged: bool
    message: str = ""


# Command output envelopes
class StandardResponse(BaseModel):
    """Summary printed by a successful command"""
    success: bool = Field(..., description="Whether the command succeeded")
    message: str = Field(..., description="Human-readable summary")
    data: Optional[Any] = Field(None, description="Command result payload")
    timestamp: str = Field(default_factory=lambda: datetime.utcnow().isoformat())
    meta: Optional[Dict[str, Any]] = Field(None, description="Config hash, outputs, timings")


class ErrorResponse(BaseModel):
    """Report printed by a failing command"""
    success: bool = Field(False, description="Always false for errors")
    message: str = Field(..., description="Error message")
    error_code: str = Field(..., description="Specific error code")
    exit_code: int = Field(..., ge=1, le=3)
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error details")
    timestamp: str = Field(default_factory=lambda: datetime.utcnow().isoformat())
