import math

import numpy as np
import pytest

from chsrp.geometry import uca_small, ucca
from chsrp.pipeline import FrameConfig, window_and_dft, write_wav
from chsrp.simulator import (
    Reflection,
    SceneSpec,
    SourceSpec,
    add_noise,
    far_field_delays,
    fractional_delay_kernel,
    get_preset,
    scenario_presets,
    synth_plane_wave_frequency,
    synth_time_domain,
    with_overrides,
)


def test_presets():
    presets = scenario_presets()
    assert len(presets) == 3
    far = presets["far_source_reflective"]
    assert far.sources[0].azimuth == 240.0
    assert len(far.sources[0].reflections) == 3
    assert presets["near_source"].sources[0].azimuth == 120.0
    with pytest.raises(ValueError, match="near_source"):
        get_preset("kitchen")


def test_delays_lead_toward_source():
    d = far_field_delays(ucca(), 0.0)
    assert d[0] == pytest.approx(-0.06 / 343.0)
    assert np.argmin(d) == 0


def test_kernel_integer_delay_is_impulse():
    h = fractional_delay_kernel(0.0)
    assert h.argmax() == 31 and h[31] == pytest.approx(1.0)
    np.testing.assert_allclose(np.delete(h, 31), 0, atol=1e-12)


def test_kernel_half_sample_passband():
    h = fractional_delay_kernel(0.5)
    lags = np.arange(64) - 31
    for f in (500.0, 2000.0, 4000.0, 6000.0):
        w = 2 * np.pi * f / 16000
        H = np.sum(h * np.exp(-1j * w * lags))
        assert abs(H) == pytest.approx(1.0, abs=1e-3)
        assert np.angle(H * np.exp(1j * w * 0.5)) == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("geometry", [ucca(), uca_small()], ids=lambda g: g.name)
@pytest.mark.parametrize("azimuth", [0.0, 120.0, 241.0])
@pytest.mark.parametrize("freq", [2000.0, 2500.0, 3500.0])
def test_time_and_frequency_synthesis_agree(geometry, azimuth, freq):
    cfg = FrameConfig()
    scene = SceneSpec((SourceSpec(azimuth, signal="tone", frequency_hz=freq),), duration_s=0.1)
    audio = synth_time_domain(scene, geometry, cfg)
    b = int(freq / cfg.bin_hz)
    frame = window_and_dft(audio[512:1024], cfg, bins=np.array([b]))
    measured = frame.spectra[:, 0] / frame.spectra[0, 0]
    ref = synth_plane_wave_frequency(geometry, azimuth, [freq]).spectra[:, 0]
    expected = ref / ref[0]
    phase_err = np.angle(measured / expected)
    assert np.abs(phase_err).max() < 1e-3
    np.testing.assert_allclose(np.abs(measured), 1.0, atol=1e-3)


def test_reflection_adds_delayed_copy():
    g = uca_small()
    tone = dict(signal="tone", frequency_hz=1234.0)
    direct = SceneSpec((SourceSpec(90.0, **tone),), duration_s=0.2)
    refl = SceneSpec((SourceSpec(90.0, reflections=(Reflection(90.0, 0.01, 0.5),), **tone),), duration_s=0.2)
    a = synth_time_domain(direct, g)
    b = synth_time_domain(refl, g)
    diff = b - a
    # the extra arrival is the direct signal 160 samples later at half gain
    np.testing.assert_allclose(diff[400:3000], 0.5 * a[240:2840], atol=1e-6)


def test_deterministic_and_seeded():
    g = ucca()
    scene = get_preset("near_source")
    scene = with_overrides(scene, duration_s=0.1)
    a = synth_time_domain(scene, g)
    b = synth_time_domain(scene, g)
    np.testing.assert_array_equal(a, b)
    c = synth_time_domain(with_overrides(scene, seed=1), g)
    assert not np.allclose(a, c)
    assert a.shape == (1600, 16)


def test_with_overrides_ignores_none():
    scene = get_preset("near_source")
    assert with_overrides(scene, snr_db=None, seed=7) == SceneSpec(scene.sources, 10.0, 1.0, 7)


class TestNoise:
    @pytest.mark.parametrize("snr", [0.0, 10.0, 20.0])
    def test_measured_snr(self, rng, snr):
        x = rng.standard_normal((200_000, 3)) * [1.0, 0.1, 3.0]
        y = add_noise(x, snr, seed=1)
        noise = y - x
        measured = 10 * np.log10(np.mean(x ** 2, axis=0) / np.mean(noise ** 2, axis=0))
        np.testing.assert_allclose(measured, snr, atol=0.1)

    def test_infinite_snr(self, rng):
        x = rng.standard_normal((10, 2))
        y = add_noise(x, math.inf)
        np.testing.assert_array_equal(x, y)
        assert y is not x

    def test_silent_channel(self):
        with pytest.raises(ValueError, match="silent"):
            add_noise(np.zeros((10, 2)), 10.0)

    def test_same_seed_same_noise(self, rng):
        x = rng.standard_normal((100, 2))
        np.testing.assert_array_equal(add_noise(x, 5.0, seed=3), add_noise(x, 5.0, seed=3))


def test_source_validation():
    with pytest.raises(ValueError):
        SourceSpec(0.0, signal="tone")
    with pytest.raises(ValueError):
        SourceSpec(0.0, signal="pink")
    with pytest.raises(ValueError):
        Reflection(0.0, 0.01, 1.5)
    with pytest.raises(ValueError):
        SceneSpec((), duration_s=0)


def test_wav_source(tmp_path, rng):
    mono = rng.uniform(-0.5, 0.5, 4000)
    path = tmp_path / "src.wav"
    write_wav(path, mono, 16000)
    scene = SceneSpec((SourceSpec(0.0, signal="wav-file", wav_path=str(path)),), duration_s=0.2)
    audio = synth_time_domain(scene, uca_small())
    assert np.abs(audio).max() > 0.1
    assert audio.shape == (3200, 7)
