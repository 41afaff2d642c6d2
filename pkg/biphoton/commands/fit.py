import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

from ..analysis_fit import Weighting, fit_wavepacket
from ..errors import ConvergenceError
from ..schemas import ExperimentConfig
from ..storage import atomic_write_json, read_histogram
from .analyze import resolve_config

logger = logging.getLogger(__name__)


def cmd_fit(hist_path: Path, initial: Dict[str, float], free: Iterable[str],
            out_path: Optional[Path] = None, config: Optional[ExperimentConfig] = None,
            bounds: Optional[Dict[str, Tuple[float, float]]] = None,
            weighting: str = Weighting.NONE.value) -> Dict[str, Any]:
    """Fit the wave-packet model to a histogram file

    The FitResult is written even when the search does not converge; the
    command then fails with ConvergenceError so the exit code reports it.
    """
    hist = read_histogram(Path(hist_path))
    config = resolve_config(hist, config)
    result = fit_wavepacket(hist, initial, free, bounds, medium=config.medium, drive=config.drive,
                            grid=config.grid, constants=config.constants, weighting=weighting)
    payload = result.model_dump()
    outputs = []
    if out_path is not None:
        outputs.append(str(atomic_write_json(Path(out_path), payload)))

    if not result.converged:
        raise ConvergenceError(f"Fit did not converge: {result.message}",
                               details={"result": payload, "outputs": outputs})
    logger.info(f"Fit converged after {result.iterations} evaluations: {result.parameters}")
    return {"outputs": outputs, "result": payload}
