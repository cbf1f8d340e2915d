"""YAML experiment/scene configuration files.

Experiment keys::

    geometry: UCCA                # or give rings + sound_speed_mps
    rings: [{radius_m: 0.06, n_mics: 9, offset_deg: 0}, ...]
    sound_speed_mps: 343
    max_order: 3
    band_hz: [2000, 4000]
    method: minnorm               # minnorm | tikhonov | inverse
    alpha: 0.01
    grid_step_deg: 3
    average_window: 10
    scene: near_source            # preset name or a scene mapping
    n_frames: 1024
    seed: 0
    snr_db: 10
    sample_rate: 16000
    frame_len: 512
    tolerance_deg: 3

Scene mappings hold ``sources`` (each with ``azimuth_deg``, ``signal``,
``level_db``, ``frequency_hz``, ``wav_path``, ``reflections``),
``snr_db``, ``duration_s`` and ``seed``.
"""

from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

import yaml

from .bench import ExperimentConfig
from .geometry import DEFAULT_SOUND_SPEED, ArrayGeometry
from .simulator import Reflection, SceneSpec, SourceSpec

# file key -> ExperimentConfig field
_KEYS = {
    "geometry": "geometry",
    "max_order": "max_order",
    "band_hz": "band",
    "method": "method",
    "alpha": "alpha",
    "grid_step_deg": "grid_step",
    "average_window": "average_window",
    "scene": "scene",
    "n_frames": "n_frames",
    "seed": "seed",
    "snr_db": "snr_db",
    "sample_rate": "sample_rate",
    "frame_len": "frame_len",
    "tolerance_deg": "tolerance",
    "sound_speed_mps": "sound_speed",
}


class ConfigError(ValueError):
    pass


def _load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _float(v, key):
    try:
        return math.inf if v in ("inf", "+inf", "Infinity") else float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def scene_from_dict(d: dict) -> SceneSpec:
    try:
        sources = []
        for s in d.get("sources", []):
            refl = tuple(
                Reflection(float(r["azimuth_deg"]), float(r["delay_s"]), float(r["gain"]))
                for r in s.get("reflections", [])
            )
            sources.append(SourceSpec(
                azimuth=float(s["azimuth_deg"]),
                signal=s.get("signal", "white-noise"),
                level_db=float(s.get("level_db", 0.0)),
                reflections=refl,
                frequency_hz=s.get("frequency_hz"),
                wav_path=s.get("wav_path"),
            ))
        return SceneSpec(
            tuple(sources),
            snr_db=_float(d.get("snr_db", math.inf), "snr_db"),
            duration_s=float(d.get("duration_s", 1.0)),
            seed=int(d.get("seed", 0)),
            name=str(d.get("name", "custom")),
        )
    except KeyError as exc:
        raise ConfigError(f"scene entry missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scene: {exc}") from None


def load_scene(path) -> SceneSpec:
    return scene_from_dict(_load_yaml(path))


def config_from_dict(d: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    d = dict(d)
    rings = d.pop("rings", None)
    unknown = set(d) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    fields = {_KEYS[k]: v for k, v in d.items()}
    if "band" in fields:
        band = fields["band"]
        if isinstance(band, str):
            band = band.split(":")
        if len(band) != 2:
            raise ConfigError(f"band_hz needs two values, got {fields['band']!r}")
        fields["band"] = (_float(band[0], "band_hz"), _float(band[1], "band_hz"))
    for key in ("alpha", "grid_step", "sample_rate", "tolerance", "sound_speed"):
        if key in fields:
            fields[key] = _float(fields[key], key)
    if fields.get("snr_db") is not None:
        fields["snr_db"] = _float(fields["snr_db"], "snr_db")
    for key in ("max_order", "average_window", "n_frames", "seed", "frame_len"):
        if key in fields:
            v = fields[key]
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if isinstance(fields.get("scene"), dict):
        fields["scene"] = scene_from_dict(fields["scene"])
    if rings is not None:
        try:
            fields["geometry"] = ArrayGeometry.from_rings(
                rings, fields.get("sound_speed", DEFAULT_SOUND_SPEED),
                name=str(fields.get("geometry", "custom")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid rings: {exc}") from None
    return replace(base or ExperimentConfig(), **fields)


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file (optional) and apply CLI overrides on top."""
    data = _load_yaml(path) if path else {}
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(data)
