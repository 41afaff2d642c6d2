import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..analysis_fit import AnalysisOptions, analyze_histogram, dft_spectrum, exposure_corrected, baseline_estimate
from ..coincidence_sim import CoincidenceHistogram
from ..schemas import AcquisitionConfig, ExperimentConfig
from ..storage import atomic_write_json, read_histogram, write_spectrum_csv

logger = logging.getLogger(__name__)


def resolve_config(hist: CoincidenceHistogram, config: Optional[ExperimentConfig]) -> ExperimentConfig:
    """Explicit config first, then the one embedded by the simulator, then defaults"""
    if config is not None:
        return config
    embedded = hist.metadata.get("config")
    if embedded:
        return ExperimentConfig.from_dict(embedded)
    logger.warning("Histogram carries no config; using default detector chain and pump power")
    return ExperimentConfig()


def resolve_acquisition(hist: CoincidenceHistogram, config: ExperimentConfig) -> AcquisitionConfig:
    recorded = hist.metadata.get("acquisition")
    if recorded:
        return AcquisitionConfig.model_validate(recorded)
    return config.acquisition


def cmd_analyze(hist_path: Path, out_path: Optional[Path] = None, config: Optional[ExperimentConfig] = None,
                options: Optional[AnalysisOptions] = None,
                spectrum_path: Optional[Path] = None) -> Dict[str, Any]:
    """AnalysisReport of a histogram file, optionally written as JSON"""
    hist = read_histogram(Path(hist_path))
    config = resolve_config(hist, config)
    acq = resolve_acquisition(hist, config)
    options = options or AnalysisOptions()

    report = analyze_histogram(hist, config.chain, acq, config.drive.pump_power, options)
    payload = report.model_dump()
    outputs = []
    if out_path is not None:
        outputs.append(str(atomic_write_json(Path(out_path), payload)))
    if spectrum_path is not None:
        counts = exposure_corrected(hist) if options.correct_exposure else hist.counts
        spectrum = dft_spectrum(counts, hist.bin_width, baseline_estimate(counts, options.tail_fraction))
        outputs.append(str(write_spectrum_csv(Path(spectrum_path), spectrum)))

    logger.info(f"SBR {report.sbr:.2f}, generated rate {report.generated_pair_rate:.0f} "
                f"+/- {report.generated_pair_rate_error:.0f} pairs/s")
    return {"outputs": outputs, "report": payload}
