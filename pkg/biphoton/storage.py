#!/usr/bin/env python3
"""
File formats for wave packets, spectra, sweeps, time tags and histograms

CSV files start with a single ``# metadata: {...}`` line holding sorted JSON
(config hash, units, producing parameters). Every write goes to a temporary
file in the target directory and is moved into place with os.replace.
"""

import io
import os
import json
import tempfile
import logging
from pathlib import Path
from typing import Dict, Any, Optional, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .coincidence_sim import Channel, CoincidenceHistogram, TimeTagStream
from .errors import DataFormatError, StorageError
from .wavepacket_engine import SWEEP_COLUMNS, Spectrum, SweepPoint, WavePacket

logger = logging.getLogger(__name__)

METADATA_PREFIX = "# metadata: "
TIME_TAG_COLUMNS = ["trial", "channel", "t_ns"]


def atomic_write_text(path: Path, content: str) -> Path:
    """Write text through a temp file + rename so readers never see partial output"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(content)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        raise StorageError(f"Cannot write {path}: {e}", details={"path": str(path)}) from e
    logger.debug(f"Wrote {path}")
    return path


def atomic_write_json(path: Path, data: Dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise StorageError(f"File not found: {path}", details={"path": str(path)}) from e
    except OSError as e:
        raise StorageError(f"Cannot read {path}: {e}", details={"path": str(path)}) from e


def read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path} is not valid JSON: {e}") from e


def _csv_with_metadata(frame: pd.DataFrame, metadata: Dict[str, Any]) -> str:
    buffer = io.StringIO()
    buffer.write(METADATA_PREFIX + json.dumps(metadata, sort_keys=True) + "\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def _read_csv_with_metadata(path: Path, columns: Sequence[str]) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    text = read_text(path)
    first, _, body = text.partition("\n")
    metadata: Dict[str, Any] = {}
    if first.startswith(METADATA_PREFIX):
        try:
            metadata = json.loads(first[len(METADATA_PREFIX):])
        except json.JSONDecodeError as e:
            raise DataFormatError(f"Malformed metadata header in {path}: {e}") from e
    else:
        body = text
    try:
        frame = pd.read_csv(io.StringIO(body), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"Malformed CSV {path}: {e}") from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataFormatError(f"{path} lacks columns {missing}", details={"columns": list(frame.columns)})
    return frame, metadata


# Wave packets and spectra

def wavepacket_frame(wp: WavePacket) -> pd.DataFrame:
    return pd.DataFrame({"tau_us": wp.tau * 1e6, "g2": wp.values})


def write_wavepacket_csv(path: Path, wp: WavePacket, metadata: Optional[Dict[str, Any]] = None) -> Path:
    header = {"bin_width_s": wp.bin_width, **wp.metadata, **(metadata or {})}
    return atomic_write_text(path, _csv_with_metadata(wavepacket_frame(wp), header))


def write_wavepacket_json(path: Path, wp: WavePacket, metadata: Optional[Dict[str, Any]] = None) -> Path:
    return atomic_write_json(path, {
        "tau_us": (wp.tau * 1e6).tolist(),
        "g2": wp.values.tolist(),
        "bin_width_s": wp.bin_width,
        "metadata": {**wp.metadata, **(metadata or {})},
    })


def read_wavepacket_csv(path: Path) -> WavePacket:
    frame, metadata = _read_csv_with_metadata(path, ["tau_us", "g2"])
    tau = frame["tau_us"].to_numpy(dtype=float) * 1e-6
    bin_width = metadata.pop("bin_width_s", None)
    if bin_width is None:
        if len(tau) < 2:
            raise DataFormatError(f"{path} holds too few samples to infer the bin width")
        bin_width = float(tau[1] - tau[0])
    return WavePacket(tau=tau, values=frame["g2"].to_numpy(dtype=float), bin_width=bin_width, metadata=metadata)


def write_spectrum_csv(path: Path, spectrum: Spectrum, metadata: Optional[Dict[str, Any]] = None) -> Path:
    frame = pd.DataFrame({f"freq_{spectrum.unit.lower()}": spectrum.freq, "magnitude": spectrum.values})
    header = {"kind": spectrum.kind.value, **spectrum.metadata, **(metadata or {})}
    return atomic_write_text(path, _csv_with_metadata(frame, header))


# Sweeps

def sweep_frame(points: List[SweepPoint]) -> pd.DataFrame:
    rows = []
    for p in points:
        rows.append({
            "value": p.value,
            "omega_c_sq": p.omega_c_sq,
            "temporal_fwhm_us": p.temporal_fwhm * 1e6,
            "spectral_fwhm_khz": p.spectral_fwhm * 1e-3,
            "pair_rate_integral": p.pair_rate_integral,
            "linewidth_approx_khz": p.linewidth_approx * 1e-3,
            "pair_rate_approx": p.pair_rate_approx,
            "brightness": p.brightness,
            "spectral_brightness": p.spectral_brightness,
            "omega_c": p.omega_c,
            "gamma": p.gamma,
            "regime_holds": p.regime_holds,
        })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep_csv(path: Path, points: List[SweepPoint], metadata: Optional[Dict[str, Any]] = None) -> Path:
    return atomic_write_text(path, _csv_with_metadata(sweep_frame(points), metadata or {}))


def read_sweep_csv(path: Path) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    return _read_csv_with_metadata(path, SWEEP_COLUMNS)


# Time tags and histograms

def write_time_tags(path: Path, stream: TimeTagStream, metadata: Optional[Dict[str, Any]] = None) -> Path:
    labels = np.array([c.label for c in Channel])
    frame = pd.DataFrame({
        "trial": stream.trial,
        "channel": labels[stream.channel],
        "t_ns": stream.t_ns,
    })
    header = {"window_ns": stream.window_ns, **(metadata or {})}
    return atomic_write_text(path, _csv_with_metadata(frame, header))


def read_time_tags(path: Path) -> Tuple[TimeTagStream, Dict[str, Any]]:
    frame, metadata = _read_csv_with_metadata(path, TIME_TAG_COLUMNS)
    window_ns = metadata.get("window_ns")
    if window_ns is None:
        raise DataFormatError(f"{path} has no window_ns in its metadata header")
    codes = {c.label: int(c) for c in Channel}
    channel = frame["channel"].map(codes)
    if channel.isna().any():
        raise DataFormatError(f"{path} contains unknown channel labels")
    stream = TimeTagStream(
        trial=frame["trial"].to_numpy(dtype=np.int64),
        channel=channel.to_numpy(dtype=np.int8),
        t_ns=frame["t_ns"].to_numpy(dtype=float),
        window_ns=float(window_ns),
    )
    return stream, metadata


def write_histogram(path: Path, hist: CoincidenceHistogram) -> Path:
    return atomic_write_json(path, hist.to_dict())


def read_histogram(path: Path) -> CoincidenceHistogram:
    data = read_json(path)
    if not isinstance(data, dict):
        raise DataFormatError(f"{path} does not hold a histogram object")
    return CoincidenceHistogram.from_dict(data)
