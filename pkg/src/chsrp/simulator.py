"""Free-field plane-wave array simulator.

Sources are far-field; source distance only shows up through the
discrete reflections attached to a source. Azimuths are degrees here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ArrayGeometry, mic_angles
from .pipeline import FrameConfig, SpectralFrame, read_wav

FD_TAPS = 64
FD_BETA = 8.0
SIGNALS = ("white-noise", "tone", "wav-file")


@dataclass(frozen=True)
class Reflection:
    azimuth: float
    delay_s: float
    gain: float

    def __post_init__(self):
        if not 0 < self.gain <= 1:
            raise ValueError(f"reflection gain must be in (0, 1], got {self.gain}")
        if self.delay_s < 0:
            raise ValueError(f"reflection delay must be >= 0, got {self.delay_s}")


@dataclass(frozen=True)
class SourceSpec:
    """One far-field source.

    ``signal`` is ``"white-noise"``, ``"tone"`` (needs ``frequency_hz``) or
    ``"wav-file"`` (needs ``wav_path``; the first channel is used).
    """

    azimuth: float
    signal: str = "white-noise"
    level_db: float = 0.0
    reflections: tuple[Reflection, ...] = ()
    frequency_hz: float | None = None
    wav_path: str | None = None

    def __post_init__(self):
        if self.signal not in SIGNALS:
            raise ValueError(f"unknown signal {self.signal!r}; choose from {SIGNALS}")
        if self.signal == "tone" and self.frequency_hz is None:
            raise ValueError("tone source needs frequency_hz")
        if self.signal == "wav-file" and not self.wav_path:
            raise ValueError("wav-file source needs wav_path")
        object.__setattr__(self, "reflections", tuple(self.reflections))


@dataclass(frozen=True)
class SceneSpec:
    sources: tuple[SourceSpec, ...]
    snr_db: float = math.inf
    duration_s: float = 1.0
    seed: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError("duration_s must be positive")
        object.__setattr__(self, "sources", tuple(self.sources))


def scenario_presets() -> dict[str, SceneSpec]:
    """Named scenes.

    ``near_source``
        one white-noise source at 120 deg, no reflections.
    ``far_source_reflective``
        source at 240 deg plus three image reflections, a qualitative stand-in
        for a source placed near a room corner.
    ``sweep_table1``
        single source at 120 deg used for the order/band/array parameter grid
        (see :func:`chsrp.bench.table1_configs`).
    """
    far_reflections = (
        Reflection(azimuth=300.0, delay_s=0.005, gain=0.5),
        Reflection(azimuth=150.0, delay_s=0.012, gain=0.35),
        Reflection(azimuth=30.0, delay_s=0.020, gain=0.25),
    )
    return {
        "near_source": SceneSpec((SourceSpec(120.0),), snr_db=10.0, name="near_source"),
        "far_source_reflective": SceneSpec(
            (SourceSpec(240.0, reflections=far_reflections),), snr_db=10.0,
            name="far_source_reflective",
        ),
        "sweep_table1": SceneSpec((SourceSpec(120.0),), snr_db=20.0, name="sweep_table1"),
    }


def get_preset(name: str) -> SceneSpec:
    presets = scenario_presets()
    try:
        return presets[name]
    except KeyError:
        raise ValueError(f"unknown scene preset {name!r}; choose from {sorted(presets)}") from None


def synth_plane_wave_frequency(geometry: ArrayGeometry, azimuth_deg: float, freqs,
                               amplitude=1.0, bins=None, bin_hz: float = float("nan"),
                               frame_index: int = 0) -> SpectralFrame:
    """Exact frequency-domain array response to a plane wave.

    ``X_n(f) = S(f) exp(j k r_n cos(theta_n - theta_i))``.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    theta_i = math.radians(azimuth_deg)
    k = 2 * np.pi * freqs / geometry.sound_speed
    radii = np.concatenate([np.full(r.n_mics, r.radius) for r in geometry.rings])
    proj = radii * np.cos(mic_angles(geometry) - theta_i)
    spectra = np.broadcast_to(amplitude, freqs.shape) * np.exp(1j * np.outer(proj, k))
    if bins is None:
        bins = np.rint(freqs / bin_hz).astype(int) if np.isfinite(bin_hz) else np.arange(len(freqs))
    return SpectralFrame(frame_index, spectra, np.asarray(bins), freqs, bin_hz)


def far_field_delays(geometry: ArrayGeometry, azimuth_deg: float) -> np.ndarray:
    """Per-channel arrival delay relative to the array centre, seconds.

    Mics facing the source receive earlier (negative delay).
    """
    radii = np.concatenate([np.full(r.n_mics, r.radius) for r in geometry.rings])
    return -(radii / geometry.sound_speed) * np.cos(mic_angles(geometry) - math.radians(azimuth_deg))


def fractional_delay_kernel(frac: float, taps: int = FD_TAPS, beta: float = FD_BETA) -> np.ndarray:
    """Kaiser-windowed sinc for a delay of ``frac`` in [0, 1) samples.

    Tap ``i`` corresponds to integer lag ``i - (taps // 2 - 1)``.
    """
    half = taps // 2
    lags = np.arange(taps) - (half - 1)
    t = lags - frac
    win = np.i0(beta * np.sqrt(np.clip(1.0 - (t / half) ** 2, 0.0, None))) / np.i0(beta)
    return np.sinc(t) * win


def _delayed(sig: np.ndarray, pad: int, n: int, delay_samples: float) -> np.ndarray:
    # out[i] = sig(pad + i - delay) with sig sampled on the extended buffer
    whole = math.floor(delay_samples)
    frac = delay_samples - whole
    h = fractional_delay_kernel(frac)
    lead = FD_TAPS // 2 - 1
    start = pad - whole - (FD_TAPS - 1 - lead)
    if start < 0 or start + n + FD_TAPS - 1 > len(sig):
        raise ValueError(f"delay of {delay_samples:.1f} samples exceeds the synthesis buffer")
    return np.convolve(sig[start:start + n + FD_TAPS - 1], h, mode="valid")


def _source_signal(src: SourceSpec, n_total: int, fs: float, pad: int,
                   rng: np.random.Generator) -> np.ndarray:
    scale = 10 ** (src.level_db / 20)
    if src.signal == "white-noise":
        return scale * rng.standard_normal(n_total)
    if src.signal == "tone":
        t = (np.arange(n_total) - pad) / fs
        return scale * np.cos(2 * np.pi * src.frequency_hz * t)
    data, rate = read_wav(src.wav_path)
    if rate != fs:
        raise ValueError(f"{src.wav_path}: sample rate {rate} Hz, scene runs at {fs} Hz")
    mono = data[:, 0]
    out = np.zeros(n_total)
    take = min(len(mono), n_total - pad)
    out[pad:pad + take] = mono[:take]
    return scale * out


def synth_time_domain(scene: SceneSpec, geometry: ArrayGeometry,
                      config: FrameConfig | None = None) -> np.ndarray:
    """Render a scene to ``(n_samples, n_channels)`` audio.

    Each source and each of its reflections arrives as a plane wave; the
    per-mic delay is realised with a 64-tap Kaiser-windowed sinc. White
    Gaussian noise is added per channel at ``scene.snr_db``.
    """
    config = config or FrameConfig()
    fs = config.sample_rate
    n = int(round(scene.duration_s * fs))
    out = np.zeros((n, geometry.n_channels))
    root = np.random.default_rng(scene.seed)
    children = root.spawn(len(scene.sources) + 1)
    max_radius = max(r.radius for r in geometry.rings)
    geo_pad = int(math.ceil(max_radius / geometry.sound_speed * fs)) + 1
    for src, rng in zip(scene.sources, children):
        max_refl = max((r.delay_s for r in src.reflections), default=0.0)
        pad = int(math.ceil(max_refl * fs)) + geo_pad + FD_TAPS
        sig = _source_signal(src, n + 2 * pad, fs, pad, rng)
        arrivals = [(src.azimuth, 0.0, 1.0)] + [(r.azimuth, r.delay_s, r.gain) for r in src.reflections]
        for az, delay, gain in arrivals:
            delays = (delay + far_field_delays(geometry, az)) * fs
            for ch, d in enumerate(delays):
                out[:, ch] += gain * _delayed(sig, pad, n, d)
    if math.isfinite(scene.snr_db):
        out = add_noise(out, scene.snr_db, children[-1])
    return out


def add_noise(samples, snr_db: float, seed=None) -> np.ndarray:
    """Add white Gaussian noise at ``snr_db`` per channel.

    Signal power is measured per channel over the whole clip. An infinite
    ``snr_db`` returns the input unchanged.
    """
    x = np.asarray(samples, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    if math.isnan(snr_db):
        raise ValueError("snr_db is NaN")
    rng = np.random.default_rng(seed)
    two_d = x if x.ndim == 2 else x[:, None]
    power = np.mean(two_d ** 2, axis=0)
    if np.any(power == 0):
        raise ValueError("cannot set a finite SNR on a silent channel")
    sigma = np.sqrt(power / 10 ** (snr_db / 10))
    noisy = two_d + rng.standard_normal(two_d.shape) * sigma
    return noisy if x.ndim == 2 else noisy[:, 0]


def with_overrides(scene: SceneSpec, **changes) -> SceneSpec:
    """Copy of ``scene`` with fields replaced; None values are ignored."""
    return replace(scene, **{k: v for k, v in changes.items() if v is not None})
