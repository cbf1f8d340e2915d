import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from chsrp import CHSRPLocalizer
from chsrp.geometry import ArrayGeometry, Ring, ucca
from chsrp.harmonics import OrderLimitError
from chsrp.pipeline import EmptyBandError
from chsrp.simulator import SceneSpec, SourceSpec, synth_time_domain


def _audio(azimuth=120.0, geometry=None, duration=0.64, snr=20.0, seed=0):
    scene = SceneSpec((SourceSpec(azimuth),), snr_db=snr, duration_s=duration, seed=seed)
    return synth_time_domain(scene, geometry or ucca())


def test_params_round_trip():
    est = CHSRPLocalizer(max_order=2, band=(1000.0, 3000.0), method="tikhonov", alpha=0.1)
    params = est.get_params()
    assert params["max_order"] == 2 and params["alpha"] == 0.1
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(grid_step=6.0)
    assert est.grid_step == 6.0


def test_unfitted():
    with pytest.raises(NotFittedError):
        CHSRPLocalizer().transform(np.zeros((1024, 16)))


def test_fit_attributes():
    est = CHSRPLocalizer().fit()
    assert est.n_features_in_ == 16
    assert len(est.bins_) == 65
    assert est.filter_bank_.values.shape == (2, 7, 65)
    assert est.angles_deg.shape == (120,)


def test_transform_and_predict():
    est = CHSRPLocalizer(average_window=5).fit()
    X = _audio()
    spectra = est.transform(X)
    assert spectra.shape == (20, 120)
    assert np.all(spectra >= 0)
    pred = est.predict(X)
    assert pred.shape == (4,)
    np.testing.assert_array_equal(pred, 120.0)
    assert est.score(X, 120.0) == 1.0
    assert est.score(X, 300.0) == 0.0


def test_threaded_matches_inline():
    X = _audio(azimuth=33.0, snr=5.0)
    a = CHSRPLocalizer(threaded=False).fit().transform(X)
    b = CHSRPLocalizer(threaded=True).fit().transform(X)
    np.testing.assert_array_equal(a, b)


def test_wrong_channel_count():
    est = CHSRPLocalizer().fit()
    with pytest.raises(ValueError, match="16"):
        est.transform(np.zeros((1024, 7)))


def test_short_audio():
    est = CHSRPLocalizer().fit()
    assert est.transform(np.zeros((100, 16))).shape == (0, 120)
    with pytest.raises(ValueError):
        est.score(np.zeros((100, 16)), 0.0)


def test_invalid_parameters():
    with pytest.raises(OrderLimitError):
        CHSRPLocalizer(geometry="UCA_S", max_order=4).fit()
    with pytest.raises(EmptyBandError):
        CHSRPLocalizer(band=(3000.0, 2000.0)).fit()
    with pytest.raises(ValueError):
        CHSRPLocalizer(geometry="nope").fit()
    with pytest.raises(ValueError):
        CHSRPLocalizer(average_window=0).fit()


def test_custom_geometry():
    g = ArrayGeometry((Ring(0.05, 8),), name="octo")
    est = CHSRPLocalizer(geometry=g, max_order=3).fit()
    pred = est.predict(_audio(azimuth=201.0, geometry=g, snr=30.0))
    np.testing.assert_array_equal(pred, 201.0)
