import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from . import provenance
from ..schemas import ExperimentConfig
from ..storage import atomic_write_json, write_wavepacket_csv, write_wavepacket_json
from ..wavepacket_engine import (
    causal_leakage, compute_wavepacket, count_local_maxima, delay_time,
    linewidth_approx, regime_check, spectral_fwhm_of_wavepacket, temporal_fwhm,
)

logger = logging.getLogger(__name__)


def summary_path(out_path: Path) -> Path:
    return out_path.with_name(out_path.stem + ".summary.json")


def cmd_wavepacket(config: ExperimentConfig, out_path: Path, fmt: str = "csv") -> Dict[str, Any]:
    """Write G2(tau) and a JSON sidecar with its widths and closed-form estimates"""
    out_path = Path(out_path)
    wp = compute_wavepacket(config.medium, config.drive, config.grid, config.constants)
    meta = provenance(config)

    if fmt == "json":
        write_wavepacket_json(out_path, wp, meta)
    else:
        write_wavepacket_csv(out_path, wp, meta)

    temporal: Optional[float] = None
    spectral: Optional[float] = None
    if np.any(wp.values > 0):
        temporal = temporal_fwhm(wp)
        spectral = spectral_fwhm_of_wavepacket(wp)
    else:
        logger.warning("Wave packet is identically zero; widths are undefined")

    regime = regime_check(config.medium, config.drive, config.constants)
    summary = {
        "temporal_fwhm_us": temporal * 1e6 if temporal is not None else None,
        "spectral_fwhm_khz": spectral * 1e-3 if spectral is not None else None,
        "delay_time_us": delay_time(config.medium, config.drive, config.constants) * 1e6,
        "linewidth_approx_khz": linewidth_approx(config.medium, config.drive, config.constants) * 1e-3,
        "causal_leakage": causal_leakage(wp),
        "local_maxima": count_local_maxima(wp),
        "regime_holds": regime.holds,
        "n_points": len(wp),
        "bin_width_s": wp.bin_width,
        "config_sha256": meta["config_sha256"],
    }
    sidecar = atomic_write_json(summary_path(out_path), summary)
    logger.info(f"Wave packet written to {out_path} ({len(wp)} samples)")
    return {"outputs": [str(out_path), str(sidecar)], "summary": summary}
