"""Steered-response power over an azimuth grid in the harmonic domain."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .filters import FilterBank
from .harmonics import HarmonicCoefficients
from .pipeline import EmptyBandError


class DegradedBandWarning(UserWarning):
    """Every bin of the analysis band was excluded by the filter bank."""


def steering_vector(theta: float, L: int) -> np.ndarray:
    """``exp(j l theta)`` for ``l = -L..L``; ``theta`` in radians."""
    if L < 0:
        raise ValueError("L must be non-negative")
    return np.exp(1j * np.arange(-L, L + 1) * theta)


@dataclass(frozen=True)
class SteeringGrid:
    """Uniform azimuth grid with its steering matrix.

    ``matrix[L + l, a] = exp(j l theta_a)``.
    """

    L: int
    step_deg: float = 3.0

    def __post_init__(self):
        n = 360.0 / self.step_deg
        if self.step_deg <= 0 or abs(n - round(n)) > 1e-9:
            raise ValueError(f"grid step {self.step_deg} deg does not divide 360")
        if self.L < 0:
            raise ValueError("L must be non-negative")

    @property
    def n_angles(self) -> int:
        return int(round(360.0 / self.step_deg))

    @property
    def angles_deg(self) -> np.ndarray:
        return np.arange(self.n_angles) * self.step_deg

    @property
    def angles(self) -> np.ndarray:
        return np.deg2rad(self.angles_deg)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.exp(1j * np.outer(np.arange(-self.L, self.L + 1), self.angles))


@dataclass(frozen=True)
class SpatialSpectrum:
    values: np.ndarray
    angles_deg: np.ndarray
    frame_index: int = 0

    @property
    def step_deg(self) -> float:
        return float(self.angles_deg[1] - self.angles_deg[0]) if len(self.angles_deg) > 1 else 360.0


@dataclass(frozen=True)
class CompensatedCoefficients:
    """Ring-combined, compensated coefficients ``values[L + l, b]``.

    ``usable[b]`` is False for bins the filter bank could not design.
    """

    values: np.ndarray
    usable: np.ndarray
    L: int
    bins: np.ndarray

    @property
    def skipped_bins(self) -> np.ndarray:
        return self.bins[~self.usable]


def compensate(coeffs: HarmonicCoefficients, bank: FilterBank) -> CompensatedCoefficients:
    """Apply the filter bank and sum over rings: ``sum_p C_l^p H_l^p``.

    A bin is dropped when any order's filter is flagged there.
    """
    if coeffs.L != bank.L or coeffs.values.shape != bank.values.shape:
        raise ValueError(
            f"coefficients {coeffs.values.shape} and filter bank {bank.values.shape} do not match"
        )
    if not np.array_equal(coeffs.bins, bank.bins):
        raise ValueError("coefficients and filter bank cover different bins")
    values = np.einsum("pob,pob->ob", coeffs.values, bank.values)
    usable = bank.usable_bins
    if not usable.any():
        warnings.warn(
            f"filter bank ({bank.method}) excludes every bin of the band", DegradedBandWarning,
            stacklevel=2,
        )
    return CompensatedCoefficients(values, usable, bank.L, coeffs.bins)


def srp_spectrum(compensated: CompensatedCoefficients, grid: SteeringGrid,
                 band=None, frame_index: int = 0) -> SpatialSpectrum:
    """Sum over usable bins of ``|sum_l C_l exp(j l theta)|^2``.

    ``band`` optionally restricts the sum to a subset of absolute bins.
    """
    if grid.L != compensated.L:
        raise ValueError(f"grid order {grid.L} != coefficient order {compensated.L}")
    keep = compensated.usable
    if band is not None:
        keep = keep & np.isin(compensated.bins, band)
    if not keep.any():
        raise EmptyBandError("no usable bins left for the SRP sum")
    response = compensated.values[:, keep].T @ grid.matrix
    power = (response.real ** 2 + response.imag ** 2).sum(axis=0)
    return SpatialSpectrum(power, grid.angles_deg, frame_index)


def argmax_azimuth(spectrum: SpatialSpectrum) -> float:
    """Grid angle of the largest value; ties go to the lowest angle."""
    if len(spectrum.values) == 0:
        raise ValueError("empty spectrum")
    return float(spectrum.angles_deg[int(np.argmax(spectrum.values))])


def temporal_average(spectra, window: int) -> SpatialSpectrum | None:
    """Mean of the most recent ``window`` spectra, or None during warm-up."""
    if window < 1:
        raise ValueError("window must be >= 1")
    spectra = list(spectra)
    if len(spectra) < window:
        return None
    recent = spectra[-window:]
    angles = recent[0].angles_deg
    for s in recent[1:]:
        if not np.array_equal(s.angles_deg, angles):
            raise ValueError("spectra use different grids")
    values = np.mean([s.values for s in recent], axis=0)
    return SpatialSpectrum(values, angles, recent[-1].frame_index)


class TemporalAverager:
    """Block averager that emits one spectrum every ``window`` frames.

    With the default 32 ms frames and ``window=10`` a result leaves every
    0.32 s. Holds mutable state; use from a single consumer.
    """

    def __init__(self, window: int = 10):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._buf: deque[SpatialSpectrum] = deque(maxlen=window)

    def push(self, spectrum: SpatialSpectrum) -> SpatialSpectrum | None:
        self._buf.append(spectrum)
        if len(self._buf) < self.window:
            return None
        out = temporal_average(self._buf, self.window)
        self._buf.clear()
        return out

    def reset(self):
        self._buf.clear()
