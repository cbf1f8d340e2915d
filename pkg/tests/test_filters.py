import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsrp.filters import (
    FilterDesignError,
    compensation_residual,
    design_filters,
    design_inverse,
    design_minnorm,
    design_tikhonov,
    mode_vectors,
    reciprocal_magnitude_curve,
    zero_frequencies,
)
from chsrp.geometry import ArrayGeometry, Ring, uca_large, uca_small, ucca

from oracles import bessel_series

C = 343.0


def freq_for_kr(kr, radius):
    return kr * C / (2 * math.pi * radius)


class TestInverse:
    def test_first_order_at_bessel_peak(self):
        g = ArrayGeometry((Ring(1.0, 7),))
        bank = design_inverse(g, 1, [freq_for_kr(1.8412, 1.0)])
        h = bank.values[0, 2, 0]
        expected = 1 / (1j * bessel_series(1, 1.8412))
        assert h == pytest.approx(expected, abs=1e-9)
        assert h == pytest.approx(-1.71861j, abs=1e-5)

    def test_flags_bessel_zero(self):
        g = ArrayGeometry((Ring(1.0, 7),))
        bank = design_inverse(g, 0, [freq_for_kr(2.404826, 1.0), freq_for_kr(1.0, 1.0)])
        assert not bank.usable[0, 0]
        assert bank.usable[0, 1]
        assert bank.values[0, 0, 0] == 0

    def test_identity_away_from_zeros(self):
        g = uca_small()
        freqs = np.arange(64, 129) * 31.25
        bank = design_inverse(g, 3, freqs)
        res = compensation_residual(bank, g)
        assert np.abs(res[bank.usable]).max() < 1e-12

    def test_refuses_multiple_rings(self):
        with pytest.raises(FilterDesignError):
            design_inverse(ucca(), 3, [2000.0])

    def test_all_bins_singular(self):
        g = ArrayGeometry((Ring(1.0, 7),))
        with pytest.raises(FilterDesignError, match="orders"):
            design_inverse(g, 0, [freq_for_kr(2.404826, 1.0)])


class TestTikhonov:
    def test_matches_formula(self):
        g = uca_small()
        freqs = np.array([2000.0, 3281.99, 3900.0])
        alpha = 0.05
        bank = design_tikhonov(g, 2, freqs, alpha)
        for i, l in enumerate(range(-2, 3)):
            for b, f in enumerate(freqs):
                J = bessel_series(l, 2 * math.pi * f / C * 0.04)
                assert bank.values[0, i, b] == pytest.approx((-1j) ** l * J / (J * J + alpha), abs=1e-10)
        assert bank.usable.all()

    @given(alpha=st.floats(1e-6, 10.0), kr=st.floats(0.0, 15.0), l=st.integers(-4, 4))
    @settings(max_examples=200, deadline=None)
    def test_magnitude_bound(self, alpha, kr, l):
        g = ArrayGeometry((Ring(1.0, 9),))
        bank = design_tikhonov(g, 4, [freq_for_kr(kr, 1.0)], alpha)
        assert abs(bank.values[0, l + 4, 0]) <= 1 / (2 * math.sqrt(alpha)) * (1 + 1e-12)

    def test_bound_is_reached(self):
        # |J| = sqrt(alpha) at J_0(x) = 0.5, x = 1.52114405766876514815
        g = ArrayGeometry((Ring(1.0, 7),))
        bank = design_tikhonov(g, 0, [freq_for_kr(1.52114405766876514815, 1.0)], alpha=0.25)
        assert abs(bank.values[0, 0, 0]) == pytest.approx(1.0, abs=1e-9)

    def test_alpha_zero_flags_zeros(self):
        g = ArrayGeometry((Ring(1.0, 7),))
        bank = design_tikhonov(g, 0, [freq_for_kr(2.404826, 1.0), 100.0], alpha=0.0)
        assert bank.usable.tolist() == [[False, True]]

    def test_negative_alpha(self):
        with pytest.raises(FilterDesignError):
            design_tikhonov(uca_small(), 1, [1000.0], alpha=-1)

    def test_approaches_inverse_for_small_alpha(self):
        g = uca_small()
        freqs = np.array([2000.0, 2500.0])
        inv = design_inverse(g, 3, freqs)
        tik = design_tikhonov(g, 3, freqs, alpha=1e-12)
        np.testing.assert_allclose(tik.values, inv.values, rtol=1e-6)


class TestMinNorm:
    def test_single_ring_equals_inverse(self):
        g = uca_large()
        freqs = np.arange(64, 129) * 31.25
        np.testing.assert_allclose(design_minnorm(g, 4, freqs).values, design_inverse(g, 4, freqs).values)

    def test_constraint_holds_for_ucca(self):
        g = ucca()
        freqs = np.arange(1, 257) * 31.25
        bank = design_minnorm(g, 3, freqs)
        res = compensation_residual(bank, g)
        assert np.abs(res[bank.usable]).max() < 1e-12
        # only the lowest bins lose the highest orders, where J_3 is ~1e-7
        assert bank.usable[:, freqs >= 500].all()
        assert not bank.usable[0, 0] and bank.usable[3].all()

    def test_optimal_against_random_alternatives(self, rng):
        # every feasible H is H* + t * n with b^T n = 0; sample 10^4 of them
        g = ucca()
        freqs = np.array([1200.0, 2188.0, 3100.0, 3486.0])
        bank = design_minnorm(g, 3, freqs)
        b = mode_vectors(g, 3, freqs)
        for i in range(7):
            for k in range(len(freqs)):
                h_star = bank.values[:, i, k]
                bv = b[:, i, k]
                null = np.array([bv[1], -bv[0]])
                null = null / np.linalg.norm(null)
                t = (rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000)) * rng.choice(
                    [1e-3, 1e-1, 10.0], 10_000
                )
                alts = h_star[None, :] + t[:, None] * null[None, :]
                np.testing.assert_allclose(alts @ bv, 1.0, atol=1e-9)
                norms = (np.abs(alts) ** 2).sum(axis=1)
                assert norms.min() >= np.sum(np.abs(h_star) ** 2) * (1 - 1e-12)

    def test_rescues_single_ring_zero(self):
        # about 2188 Hz is a J_0 zero of the 6 cm ring but not of the 4 cm ring
        f0 = freq_for_kr(2.404825557695773, 0.06)
        g = ucca()
        bank = design_minnorm(g, 3, [f0])
        assert bank.usable.all()
        big = design_inverse(uca_large(), 3, [f0, 2500.0])
        assert not big.usable[3, 0]


def test_dispatch_and_unknown_method():
    g = uca_small()
    assert design_filters(g, 2, [2000.0], "tikhonov", alpha=0.1).alpha == 0.1
    assert design_filters(g, 2, [2000.0]).method == "minnorm"
    with pytest.raises(FilterDesignError, match="unknown"):
        design_filters(g, 2, [2000.0], "wiener")


def test_bins_length_mismatch():
    with pytest.raises(FilterDesignError):
        design_minnorm(uca_small(), 1, [1000.0, 2000.0], bins=[1])


class TestReciprocalCurve:
    def test_equals_bessel_for_inverse(self):
        g = uca_small()
        freqs = np.linspace(100, 8000, 200)
        bank = design_tikhonov(g, 3, freqs, alpha=0.0)
        curve = reciprocal_magnitude_curve(bank)
        for i, l in enumerate(range(-3, 4)):
            kr = 2 * np.pi * freqs / C * 0.04
            expected = np.abs([bessel_series(l, x) for x in kr])
            mask = bank.usable[i]
            np.testing.assert_allclose(curve[i, mask], expected[mask], rtol=1e-9, atol=1e-14)

    def test_flagged_entries_are_zero(self):
        g = ArrayGeometry((Ring(1.0, 7),))
        bank = design_inverse(g, 0, [freq_for_kr(2.404826, 1.0), 100.0])
        assert reciprocal_magnitude_curve(bank)[0, 0] == 0.0


class TestZeros:
    def test_small_ring_zeros(self):
        rows = zero_frequencies(uca_small(), 3, 1000, 8000)
        got = {(l, round(f, 2)) for l, _, f in rows}
        assert (0, 3281.99) in got and (1, 5229.33) in got
        assert all(1000 <= f <= 8000 for _, _, f in rows)

    def test_large_ring_first_order_in_band(self):
        rows = zero_frequencies(uca_large(), 4, 3000, 4000)
        assert [(l, round(f)) for l, _, f in rows] == [(1, 3486)]

    @pytest.mark.parametrize("geometry", [uca_small(), uca_large(), ucca()], ids=lambda g: g.name)
    def test_every_zero_is_a_zero(self, geometry):
        for l, p, f in zero_frequencies(geometry, 3, 500, 8000):
            kr = 2 * np.pi * f / geometry.sound_speed * geometry.radii[p]
            assert abs(bessel_series(l, kr)) < 1e-9

    def test_coverage_against_dense_scan(self):
        # sign changes of J_l on a fine grid are the zeros, none missed
        g = uca_small()
        f = np.linspace(1000, 8000, 70001)
        kr = 2 * np.pi * f / C * 0.04
        from scipy.special import jv

        rows = zero_frequencies(g, 3, 1000, 8000)
        for l in range(4):
            s = np.sign(jv(l, kr))
            crossings = f[:-1][s[:-1] * s[1:] < 0]
            found = sorted(fz for ll, _, fz in rows if ll == l)
            assert len(found) == len(crossings)
            np.testing.assert_allclose(found, crossings, atol=0.2)
