"""Small input checks shared by the estimator and the bench harness."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

from .geometry import ArrayGeometry, named_geometry


def check_audio(X, n_channels: int | None = None) -> np.ndarray:
    """Validate ``(n_samples, n_channels)`` audio; returns a float64 array."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)
    if n_channels is not None and X.shape[1] != n_channels:
        raise ValueError(f"audio has {X.shape[1]} channels, the array has {n_channels} mics")
    return X


def check_geometry(geometry, sound_speed: float) -> ArrayGeometry:
    if isinstance(geometry, ArrayGeometry):
        return geometry
    if isinstance(geometry, str):
        return named_geometry(geometry, sound_speed)
    raise TypeError(f"geometry must be a name or ArrayGeometry, got {type(geometry).__name__}")


def check_band(band) -> tuple[float, float]:
    try:
        f0, f1 = (float(f) for f in band)
    except (TypeError, ValueError):
        raise ValueError(f"band must be a pair of frequencies in Hz, got {band!r}") from None
    return f0, f1


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
