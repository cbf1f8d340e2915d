"""scikit-learn style front end for circular-harmonics SRP localisation."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_audio, check_band, check_geometry, check_positive_int
from .filters import DEFAULT_ALPHA, design_filters
from .geometry import DEFAULT_SOUND_SPEED
from .geometry import max_order as geometry_max_order
from .harmonics import Decomposer, HarmonicCoefficients, OrderLimitError
from .pipeline import FrameConfig, SpectralFrame, run_two_stage, select_band
from .srp import (
    SpatialSpectrum,
    SteeringGrid,
    TemporalAverager,
    argmax_azimuth,
    compensate,
    srp_spectrum,
)


def circular_distance(a, b) -> np.ndarray:
    """Smallest absolute angle between ``a`` and ``b`` in degrees."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 360.0)
    return np.minimum(d, 360.0 - d)


class CHSRPLocalizer(BaseEstimator):
    """Azimuth estimator for circular and concentric circular arrays.

    ``fit`` designs the compensating filters and steering grid for the
    configured array; it needs no training data. ``transform`` maps
    multichannel audio to per-frame spatial spectra and ``predict`` returns
    azimuth estimates (degrees) from block-averaged spectra.

    Parameters
    ----------
    geometry : str or ArrayGeometry, default="UCCA"
        ``"UCA_S"``, ``"UCA_L"``, ``"UCCA"`` or a custom geometry.
    max_order : int, default=3
        Highest circular-harmonic order L.
    band : tuple of float, default=(2000.0, 4000.0)
        Analysis band in Hz.
    method : {"minnorm", "tikhonov", "inverse"}, default="minnorm"
        Compensating filter design.
    alpha : float, default=1e-2
        Tikhonov regularisation weight.
    grid_step : float, default=3.0
        Azimuth scan step in degrees.
    average_window : int, default=10
        Frames per averaged estimate; 1 gives per-frame estimates.
    sample_rate, frame_len, window
        Framing; see :class:`chsrp.pipeline.FrameConfig`.
    sound_speed : float, default=343.0
        Used when ``geometry`` is a name.
    tolerance : float, default=3.0
        Success window in degrees for :meth:`score`.
    threaded : bool, default=False
        Run framing/DFT and SRP as a two-stage threaded pipeline.
    """

    def __init__(self, geometry="UCCA", max_order=3, band=(2000.0, 4000.0), method="minnorm",
                 alpha=DEFAULT_ALPHA, grid_step=3.0, average_window=10, sample_rate=16000.0,
                 frame_len=512, window="blackman", sound_speed=DEFAULT_SOUND_SPEED,
                 tolerance=3.0, threaded=False):
        self.geometry = geometry
        self.max_order = max_order
        self.band = band
        self.method = method
        self.alpha = alpha
        self.grid_step = grid_step
        self.average_window = average_window
        self.sample_rate = sample_rate
        self.frame_len = frame_len
        self.window = window
        self.sound_speed = sound_speed
        self.tolerance = tolerance
        self.threaded = threaded

    def fit(self, X=None, y=None):
        """Design filters and steering grid. ``X`` and ``y`` are ignored."""
        geometry = check_geometry(self.geometry, self.sound_speed)
        L = check_positive_int(self.max_order, "max_order", minimum=0)
        limit = geometry_max_order(geometry)
        if L > limit:
            raise OrderLimitError(
                f"max_order={L} exceeds {limit}, the limit for rings with "
                f"N={[r.n_mics for r in geometry.rings]}"
            )
        check_positive_int(self.average_window, "average_window")
        self.frame_config_ = FrameConfig(self.sample_rate, self.frame_len, self.window,
                                         check_band(self.band))
        self.geometry_ = geometry
        self.bins_ = select_band(self.frame_config_)
        self.freqs_ = self.bins_ * self.frame_config_.bin_hz
        self.filter_bank_ = design_filters(geometry, L, self.freqs_, self.method, self.alpha,
                                           bins=self.bins_)
        self.grid_ = SteeringGrid(L, self.grid_step)
        self._decomposer = Decomposer(geometry, L)
        self.n_features_in_ = geometry.n_channels
        return self

    def frame_spectrum(self, frame: SpectralFrame) -> SpatialSpectrum:
        """SRP spectrum of one spectral frame."""
        check_is_fitted(self, "filter_bank_")
        coeffs = HarmonicCoefficients(self._decomposer(frame.spectra), self.grid_.L,
                                      frame.bins, frame.freqs)
        return srp_spectrum(compensate(coeffs, self.filter_bank_), self.grid_,
                            frame_index=frame.frame_index)

    def spectra(self, X) -> list[SpatialSpectrum]:
        check_is_fitted(self, "filter_bank_")
        X = check_audio(X, self.n_features_in_)
        return run_two_stage(X, self.frame_config_, self.frame_spectrum, threaded=self.threaded)

    def transform(self, X) -> np.ndarray:
        """Per-frame spatial spectra, shape ``(n_frames, n_angles)``."""
        spectra = self.spectra(X)
        if not spectra:
            return np.empty((0, self.grid_.n_angles))
        return np.vstack([s.values for s in spectra])

    def averaged_spectra(self, X) -> list[SpatialSpectrum]:
        averager = TemporalAverager(self.average_window)
        out = []
        for s in self.spectra(X):
            avg = averager.push(s)
            if avg is not None:
                out.append(avg)
        return out

    def predict(self, X) -> np.ndarray:
        """Azimuth estimates in degrees, one per ``average_window`` frames."""
        return np.array([argmax_azimuth(s) for s in self.averaged_spectra(X)])

    def score(self, X, y) -> float:
        """Fraction of estimates within ``tolerance`` degrees of azimuth ``y``."""
        est = self.predict(X)
        if len(est) == 0:
            raise ValueError("audio too short for a single averaged estimate")
        return float(np.mean(circular_distance(est, y) <= self.tolerance))

    @property
    def angles_deg(self) -> np.ndarray:
        check_is_fitted(self, "grid_")
        return self.grid_.angles_deg
