# Command implementations behind `python -m biphoton <command>`

from typing import Any, Dict

from ..schemas import ExperimentConfig


def provenance(config: ExperimentConfig) -> Dict[str, Any]:
    """Metadata stamped into every output file"""
    return {"config_sha256": config.sha256(), "config": config.to_dict()}
