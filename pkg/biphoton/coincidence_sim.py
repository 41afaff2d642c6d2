"""
Monte Carlo synthesis of detector data and start-stop histogramming.

Each trial is one acquisition window. Pairs arrive as a Poisson number per
trial with Stokes emission times uniform in the window and anti-Stokes
delays drawn from the normalized wave packet; each arm thins its photons
independently and adds stationary dark/leakage counts. Trials are grouped in
fixed-size blocks, each block drawing from its own Philox stream keyed by
(rng_seed, block index), so the output never depends on scheduling.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, Iterator, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DataFormatError, ParameterValidationError, UnsortedRecordsError, ZeroDensityError
from .observability import structured_logger, track_performance
from .schemas import AcquisitionConfig, DetectorChain, DriveParams, MediumParams, PhysicalConstants
from .wavepacket_engine import WavePacket, compute_wavepacket, wavepacket_on_delays

logger = logging.getLogger(__name__)

BLOCK_TRIALS = 4096


class Channel(IntEnum):
    STOKES = 0
    ANTI_STOKES = 1

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Channel":
        try:
            return cls[label.upper()]
        except KeyError:
            raise DataFormatError(f"Unknown channel: {label}")


@dataclass(frozen=True)
class TimeTagRecord:
    trial: int
    channel: Channel
    t_ns: float

    @property
    def t(self) -> float:
        return self.t_ns * 1e-9


@dataclass
class TimeTagStream:
    """Columnar time-tag records sorted by (trial, t)"""
    trial: np.ndarray
    channel: np.ndarray
    t_ns: np.ndarray
    window_ns: float

    def __post_init__(self):
        self.trial = np.asarray(self.trial, dtype=np.int64)
        self.channel = np.asarray(self.channel, dtype=np.int8)
        self.t_ns = np.asarray(self.t_ns, dtype=np.float64)
        if not (len(self.trial) == len(self.channel) == len(self.t_ns)):
            raise DataFormatError("Time-tag columns differ in length")
        if len(self.t_ns) and (self.t_ns.min() < 0 or self.t_ns.max() >= self.window_ns):
            raise DataFormatError("Time tag outside the acquisition window")

    def __len__(self) -> int:
        return len(self.t_ns)

    def __iter__(self) -> Iterator[TimeTagRecord]:
        for trial, channel, t_ns in zip(self.trial, self.channel, self.t_ns):
            yield TimeTagRecord(int(trial), Channel(int(channel)), float(t_ns))

    @classmethod
    def from_records(cls, records, window_ns: float) -> "TimeTagStream":
        records = list(records)
        return cls(
            trial=[r.trial for r in records],
            channel=[int(r.channel) for r in records],
            t_ns=[r.t_ns for r in records],
            window_ns=window_ns,
        )

    def is_sorted(self) -> bool:
        if len(self) < 2:
            return True
        d_trial = np.diff(self.trial)
        d_t = np.diff(self.t_ns)
        return bool(np.all((d_trial > 0) | ((d_trial == 0) & (d_t >= 0))))

    def singles(self) -> Dict[str, int]:
        return {
            Channel.STOKES.label: int(np.sum(self.channel == Channel.STOKES)),
            Channel.ANTI_STOKES.label: int(np.sum(self.channel == Channel.ANTI_STOKES)),
        }

    def equals(self, other: "TimeTagStream") -> bool:
        return (
            self.window_ns == other.window_ns
            and np.array_equal(self.trial, other.trial)
            and np.array_equal(self.channel, other.channel)
            and np.array_equal(self.t_ns, other.t_ns)
        )


@dataclass
class CoincidenceHistogram:
    bin_width_ns: float
    counts: np.ndarray
    n_triggers: int
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.bin_width_ns <= 0:
            raise DataFormatError("bin_width_ns must be positive")
        if self.counts.ndim != 1 or self.counts.size == 0:
            raise DataFormatError("Histogram needs a non-empty one-dimensional counts array")
        if np.any(self.counts < 0):
            raise DataFormatError("Histogram counts must be non-negative")

    @property
    def bin_width(self) -> float:
        return self.bin_width_ns * 1e-9

    @property
    def bin_edges(self) -> np.ndarray:
        return np.arange(self.counts.size + 1) * self.bin_width

    @property
    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.counts.size) + 0.5) * self.bin_width

    @property
    def window(self) -> Optional[float]:
        window_us = self.metadata.get("acquisition", {}).get("window_us")
        return window_us * 1e-6 if window_us else None

    def to_dict(self) -> Dict[str, Any]:
        counts = self.counts
        if np.issubdtype(counts.dtype, np.integer):
            counts_out = [int(c) for c in counts]
        else:
            counts_out = [float(c) for c in counts]
        return {
            "bin_width_ns": self.bin_width_ns,
            "counts": counts_out,
            "n_triggers": int(self.n_triggers),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoincidenceHistogram":
        try:
            counts = data["counts"]
            dtype = np.int64 if all(isinstance(c, int) for c in counts) else np.float64
            return cls(
                bin_width_ns=float(data["bin_width_ns"]),
                counts=np.asarray(counts, dtype=dtype),
                n_triggers=int(data["n_triggers"]),
                metadata=dict(data.get("metadata") or {}),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataFormatError(f"Malformed histogram: {e}") from e


class DelaySampler:
    """Inverse-CDF sampler of anti-Stokes delays from the tau >= 0 part of a packet"""

    def __init__(self, wp: WavePacket):
        causal = wp.tau >= 0
        self.tau_ns = wp.tau[causal] * 1e9
        self.cdf = cumulative_trapezoid(wp.values[causal], self.tau_ns, initial=0.0)
        if self.cdf.size < 2 or not self.cdf[-1] > 0:
            raise ZeroDensityError("Wave packet has zero weight at non-negative delays")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size) * self.cdf[-1]
        return np.interp(u, self.cdf, self.tau_ns)


def block_generator(rng_seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of trials"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed, spawn_key=(block,))))


def _uniform_times(rng: np.random.Generator, trials: np.ndarray, rate: float, window_ns: float):
    counts = rng.poisson(rate * window_ns * 1e-9, size=trials.size)
    return np.repeat(trials, counts), rng.uniform(0.0, window_ns, counts.sum())


@track_performance("synthesize_time_tags")
def synthesize_time_tags(medium: MediumParams, drive: DriveParams, pair_rate: float,
                         chain: DetectorChain, acq: AcquisitionConfig,
                         wp: Optional[WavePacket] = None,
                         constants: Optional[PhysicalConstants] = None) -> TimeTagStream:
    """Detector time tags for ``acq.n_trials`` acquisition windows"""
    if not math.isfinite(pair_rate) or pair_rate < 0:
        raise ParameterValidationError("pair_rate must be finite and >= 0", details={"pair_rate": pair_rate})

    window_ns = acq.window_us * 1e3
    sampler = None
    if pair_rate > 0:
        sampler = DelaySampler(wp or compute_wavepacket(medium, drive, constants=constants))

    trials_out, channels_out, times_out = [], [], []
    for block, start in enumerate(range(0, acq.n_trials, BLOCK_TRIALS)):
        rng = block_generator(acq.rng_seed, block)
        trials = np.arange(start, min(start + BLOCK_TRIALS, acq.n_trials), dtype=np.int64)

        pair_trial, t_s = _uniform_times(rng, trials, pair_rate, window_ns)
        if sampler is not None and t_s.size:
            t_as = t_s + sampler.sample(rng, t_s.size)
        else:
            t_as = t_s.copy()
        keep_s = rng.random(t_s.size) < chain.eta_s
        # pairs whose anti-Stokes photon leaves the window are lost
        keep_as = (rng.random(t_s.size) < chain.eta_as) & (t_as < window_ns)

        bg_s_trial, bg_s = _uniform_times(rng, trials, chain.background_s, window_ns)
        bg_as_trial, bg_as = _uniform_times(rng, trials, chain.background_as, window_ns)

        trials_out += [pair_trial[keep_s], bg_s_trial, pair_trial[keep_as], bg_as_trial]
        channels_out += [
            np.full(keep_s.sum() + bg_s.size, Channel.STOKES, dtype=np.int8),
            np.full(keep_as.sum() + bg_as.size, Channel.ANTI_STOKES, dtype=np.int8),
        ]
        times_out += [t_s[keep_s], bg_s, t_as[keep_as], bg_as]

    trial = np.concatenate(trials_out) if trials_out else np.empty(0, dtype=np.int64)
    channel = np.concatenate(channels_out) if channels_out else np.empty(0, dtype=np.int8)
    t_ns = np.concatenate(times_out) if times_out else np.empty(0)
    order = np.lexsort((channel, t_ns, trial))
    stream = TimeTagStream(trial=trial[order], channel=channel[order], t_ns=t_ns[order], window_ns=window_ns)

    structured_logger.log_simulation(acq.n_trials, len(stream), acq.rng_seed)
    logger.info(f"Synthesized {len(stream)} time tags over {acq.n_trials} trials: {stream.singles()}")
    return stream


@track_performance("histogram_coincidences")
def histogram_coincidences(stream: TimeTagStream, acq: AcquisitionConfig,
                           metadata: Optional[Dict[str, Any]] = None) -> CoincidenceHistogram:
    """Multi-stop start-stop histogram: every anti-Stokes tag within the span after each Stokes tag"""
    if not stream.is_sorted():
        raise UnsortedRecordsError("Time tags must be sorted by (trial, t)")

    span_ns = acq.histogram_span_us * 1e3
    n_bins = acq.n_bins
    stokes = stream.channel == Channel.STOKES
    anti = ~stokes
    # trials never overlap on this key because span <= window
    offset = 2.0 * stream.window_ns
    key_s = stream.trial[stokes] * offset + stream.t_ns[stokes]
    key_as = stream.trial[anti] * offset + stream.t_ns[anti]
    t_s = stream.t_ns[stokes]
    t_as = stream.t_ns[anti]

    lo = np.searchsorted(key_as, key_s, side="left")
    hi = np.searchsorted(key_as, key_s + span_ns, side="left")
    per_trigger = hi - lo
    total = int(per_trigger.sum())
    starts = np.repeat(lo, per_trigger)
    within = np.arange(total) - np.repeat(np.cumsum(per_trigger) - per_trigger, per_trigger)
    delays = t_as[starts + within] - np.repeat(t_s, per_trigger)

    bins = np.floor(delays / acq.bin_width_ns).astype(np.int64)
    bins = bins[(bins >= 0) & (bins < n_bins)]
    counts = np.bincount(bins, minlength=n_bins).astype(np.int64)

    meta = {"acquisition": acq.model_dump()}
    meta.update(metadata or {})
    return CoincidenceHistogram(
        bin_width_ns=acq.bin_width_ns,
        counts=counts,
        n_triggers=int(stokes.sum()),
        metadata=meta,
    )


def expected_singles(pair_rate: float, chain: DetectorChain, acq: AcquisitionConfig) -> Dict[str, float]:
    """Mean detections per channel over the run (window losses neglected)"""
    exposure_time = acq.n_trials * acq.window
    return {
        Channel.STOKES.label: exposure_time * (pair_rate * chain.eta_s + chain.background_s),
        Channel.ANTI_STOKES.label: exposure_time * (pair_rate * chain.eta_as + chain.background_as),
    }


def expected_background_floor(pair_rate: float, chain: DetectorChain, acq: AcquisitionConfig) -> float:
    """Accidental coincidences per bin at zero delay"""
    n_triggers = acq.n_trials * acq.window * (pair_rate * chain.eta_s + chain.background_s)
    uncorrelated_as = chain.background_as + pair_rate * chain.eta_as * (1.0 - chain.eta_s)
    return n_triggers * uncorrelated_as * acq.bin_width


def exposure(delays: np.ndarray, window: float) -> np.ndarray:
    """Fraction of triggers whose window still covers a delay (multi-stop, finite window)"""
    return np.clip(1.0 - np.asarray(delays) / window, 0.0, 1.0)


def expected_true_coincidences(pair_rate: float, chain: DetectorChain, acq: AcquisitionConfig,
                               wp: Optional[WavePacket] = None) -> float:
    """Mean detected pair coincidences inside the histogram span"""
    full = acq.n_trials * acq.window * pair_rate * chain.eta_s * chain.eta_as
    if wp is None:
        return full
    delays = np.arange(0.0, acq.histogram_span, wp.bin_width)
    density = wavepacket_on_delays(wp, delays)
    norm = np.sum(wp.values[wp.tau >= 0])
    if norm == 0:
        return 0.0
    return full * float(np.sum(density * exposure(delays, acq.window)) / norm)


def acquisition_time(acq: AcquisitionConfig) -> float:
    """Wall-clock seconds implied by the duty cycle"""
    return acq.n_trials * acq.window / acq.duty_cycle
