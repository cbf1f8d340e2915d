"""Framing, windowing and DFT of multichannel audio.

Audio arrays are ``(n_samples, n_channels)``, the layout scipy's wavfile
reader returns. Spectra are ``(n_channels, n_bins)`` and hold only the bins
of the configured analysis band.
"""

from __future__ import annotations

import math
import queue
import threading
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.io import wavfile

_WINDOWS = {
    # numpy's blackman is the symmetric 0.42/0.5/0.08 window
    "blackman": np.blackman,
    "hann": np.hanning,
    "rect": np.ones,
}


class EmptyBandError(ValueError):
    """The requested analysis band holds no DFT bin."""


class FrameConfigError(ValueError):
    pass


class SampleRateMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FrameConfig:
    """Real-time framing parameters.

    Defaults are a 16 kHz stream cut into 512-sample Blackman frames,
    analysed between 2 and 4 kHz.
    """

    sample_rate: float = 16000.0
    frame_len: int = 512
    window: str = "blackman"
    band: tuple[float, float] = (2000.0, 4000.0)

    def __post_init__(self):
        n = self.frame_len
        if int(n) != n or n < 2 or (int(n) & (int(n) - 1)):
            raise FrameConfigError(f"frame_len must be a power of two, got {n}")
        object.__setattr__(self, "frame_len", int(n))
        if not self.sample_rate > 0:
            raise FrameConfigError("sample_rate must be positive")
        if self.window not in _WINDOWS:
            raise FrameConfigError(f"unknown window {self.window!r}")
        f0, f1 = (float(f) for f in self.band)
        object.__setattr__(self, "band", (f0, f1))
        if f0 < 0 or f1 > self.sample_rate / 2:
            raise FrameConfigError(f"band {self.band} outside [0, {self.sample_rate / 2}] Hz")
        if not f0 < f1:
            raise EmptyBandError(f"band {self.band} is empty")

    @property
    def bin_hz(self) -> float:
        return self.sample_rate / self.frame_len

    @property
    def frame_duration(self) -> float:
        return self.frame_len / self.sample_rate

    def window_values(self) -> np.ndarray:
        return _WINDOWS[self.window](self.frame_len)


@dataclass(frozen=True)
class SpectralFrame:
    """Band-limited spectra of one frame.

    ``spectra[c, b]`` is channel ``c`` at absolute DFT bin ``bins[b]``,
    whose centre frequency is ``freqs[b]``.
    """

    frame_index: int
    spectra: np.ndarray
    bins: np.ndarray
    freqs: np.ndarray
    bin_hz: float

    @property
    def n_channels(self) -> int:
        return self.spectra.shape[0]


def select_band(config: FrameConfig) -> np.ndarray:
    """Inclusive DFT bin indices whose centre frequency lies in the band."""
    f0, f1 = config.band
    # tolerate float noise so that exact multiples of bin_hz stay inclusive
    lo = math.ceil(f0 / config.bin_hz - 1e-9)
    hi = math.floor(f1 / config.bin_hz + 1e-9)
    if hi < lo:
        raise EmptyBandError(f"band {config.band} contains no bin at {config.bin_hz} Hz spacing")
    return np.arange(lo, hi + 1)


def pipeline_latency_budget(config: FrameConfig) -> float:
    """Seconds available to process one frame before the next one is complete."""
    return config.frame_len / config.sample_rate


def as_multichannel(samples) -> np.ndarray:
    """Coerce audio to a float ``(n_samples, n_channels)`` array.

    A sequence of 1-D channel arrays is accepted too; all must have the
    same length.
    """
    if isinstance(samples, np.ndarray):
        arr = samples
    else:
        chans = [np.asarray(c) for c in samples]
        if chans and all(c.ndim == 1 for c in chans):
            lengths = {len(c) for c in chans}
            if len(lengths) > 1:
                raise ValueError(f"channel lengths differ: {sorted(lengths)}")
            arr = np.stack(chans, axis=1)
        else:
            arr = np.asarray(samples)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"audio must be 2-D (n_samples, n_channels), got shape {arr.shape}")
    return arr


def frame_stream(samples, config: FrameConfig) -> Iterator[np.ndarray]:
    """Yield consecutive non-overlapping ``(frame_len, n_channels)`` blocks.

    Frame ``i`` covers samples ``[i * frame_len, (i + 1) * frame_len)``; a
    trailing partial frame is dropped.
    """
    x = as_multichannel(samples)
    n = config.frame_len
    for i in range(x.shape[0] // n):
        yield x[i * n:(i + 1) * n]


def count_frames(n_samples: int, config: FrameConfig) -> int:
    return n_samples // config.frame_len


def window_and_dft(frame: np.ndarray, config: FrameConfig, frame_index: int = 0,
                   bins: np.ndarray | None = None) -> SpectralFrame:
    """Window one raw frame, take its DFT and keep the band bins.

    The forward transform is un-normalised (numpy convention).
    """
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 1:
        frame = frame[:, None]
    if frame.shape[0] != config.frame_len:
        raise ValueError(f"frame has {frame.shape[0]} samples, expected {config.frame_len}")
    if bins is None:
        bins = select_band(config)
    spec = np.fft.rfft(frame * config.window_values()[:, None], axis=0)
    return SpectralFrame(
        frame_index=frame_index,
        spectra=np.ascontiguousarray(spec[bins].T),
        bins=bins,
        freqs=bins * config.bin_hz,
        bin_hz=config.bin_hz,
    )


def spectral_frames(samples, config: FrameConfig) -> Iterator[SpectralFrame]:
    bins = select_band(config)
    for i, block in enumerate(frame_stream(samples, config)):
        yield window_and_dft(block, config, i, bins)


_DONE = object()


def run_two_stage(samples, config: FrameConfig, consumer: Callable[[SpectralFrame], object],
                  threaded: bool = True) -> list:
    """Run acquisition/DFT and ``consumer`` as a two-stage pipeline.

    Stage A (framing + window + DFT) and stage B (``consumer``) exchange
    immutable :class:`SpectralFrame` objects through a queue of depth 1, so
    frame ``n + 1`` is prepared while frame ``n`` is processed. With
    ``threaded=False`` both stages run inline; results are identical.
    """
    if not threaded:
        return [consumer(f) for f in spectral_frames(samples, config)]

    q: queue.Queue = queue.Queue(maxsize=1)
    failure: list[BaseException] = []
    stop = threading.Event()

    def stage_a():
        try:
            for f in spectral_frames(samples, config):
                while not stop.is_set():
                    try:
                        q.put(f, timeout=0.1)
                        break
                    except queue.Full:
                        continue
                if stop.is_set():
                    return
        except BaseException as exc:  # handed to the consumer thread
            failure.append(exc)
        finally:
            q.put(_DONE)

    worker = threading.Thread(target=stage_a, name="chsrp-stage-a", daemon=True)
    worker.start()
    results = []
    try:
        while True:
            item = q.get()
            if item is _DONE:
                break
            results.append(consumer(item))
    finally:
        stop.set()
        # drain so a blocked producer can finish
        while worker.is_alive():
            try:
                q.get(timeout=0.05)
            except queue.Empty:
                pass
        worker.join()
    if failure:
        raise failure[0]
    return results


def read_wav(path, expected_rate: float | None = None) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM or 32-bit float WAV as float ``(n_samples, n_channels)``."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        data = data.astype(float) / 32768.0
    elif data.dtype == np.float32 or data.dtype == np.float64:
        data = data.astype(float)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}; use PCM16 or float32")
    if expected_rate is not None and rate != expected_rate:
        raise SampleRateMismatch(f"{path}: sample rate {rate} Hz, configuration expects {expected_rate} Hz")
    return as_multichannel(data), int(rate)


def write_wav(path, samples, sample_rate: float, fmt: str = "float32") -> None:
    x = as_multichannel(samples)
    if fmt == "float32":
        data = x.astype(np.float32)
    elif fmt == "pcm16":
        peak = np.max(np.abs(x)) if x.size else 0.0
        if peak > 1.0:
            raise ValueError(f"PCM16 export needs samples in [-1, 1], peak is {peak:.3f}")
        # same 32768 scale as read_wav; +1.0 clips to the largest code
        data = np.clip(np.round(x * 32768), -32768, 32767).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV format {fmt!r}")
    wavfile.write(path, int(sample_rate), data)


def frame_timestamps(n_frames: int, config: FrameConfig) -> np.ndarray:
    """Time at which each frame has been fully acquired, seconds."""
    return (np.arange(n_frames) + 1) * config.frame_duration

