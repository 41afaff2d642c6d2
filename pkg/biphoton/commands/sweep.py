import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from . import provenance
from ..errors import ParameterValidationError
from ..schemas import ExperimentConfig
from ..storage import write_sweep_csv
from ..wavepacket_engine import fit_inverse_law, fit_zero_intercept_slope, sweep_parameter

logger = logging.getLogger(__name__)


def cmd_sweep(config: ExperimentConfig, out_path: Path) -> Dict[str, Any]:
    """One CSV row per swept value; coupling sweeps also report the linear and 1/x fits"""
    if config.sweep is None:
        raise ParameterValidationError("Config has no sweep section; pass --sweep name=v1,v2,...")

    points = sweep_parameter(config, config.sweep.parameter, config.sweep.values)
    summary: Dict[str, Any] = {"parameter": config.sweep.parameter, "n_points": len(points)}

    rates = np.array([p.pair_rate_integral for p in points])
    if rates.min() > 0:
        summary["rate_max_over_min"] = float(rates.max() / rates.min())
    omega_sq = [p.omega_c_sq for p in points]
    if len(set(omega_sq)) > 1:
        summary["spectral_slope_khz"] = fit_zero_intercept_slope(omega_sq, [p.spectral_fwhm * 1e-3 for p in points])
        b, residuals = fit_inverse_law(omega_sq, [p.spectral_brightness for p in points])
        summary["spectral_brightness_inverse_law"] = b
        summary["spectral_brightness_max_relative_residual"] = float(np.max(np.abs(residuals)))

    write_sweep_csv(Path(out_path), points, {**provenance(config), "summary": summary})
    logger.info(f"Sweep over {config.sweep.parameter} written to {out_path} ({len(points)} rows)")
    return {"outputs": [str(out_path)], "summary": summary}
